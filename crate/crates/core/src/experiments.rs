//! Simulation scenarios with repeated sampling, and the two real-data
//! analyses (yearly coal-mining disasters, S&P 500 absolute log-returns).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cp_priors::LocationVector;
use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::evidence::{
    location_marginals, log_bayes_factors, log_evidence, posterior_model_probs, EvidenceConfig, EvidenceMethod,
    EvidenceMode,
};
use crate::mle::profile_fit;
use crate::model_priors::{
    model_prior_probabilities, LocationPriorKind, McConfig, ModelPriorResult, NestedModelSequence, ParamPrior,
    SegmentPrior,
};
use crate::parallel::map_indexed;
use crate::rng::{substream, DEFAULT_SEED};

use rand::RngCore;

/// Observations with optional row labels (dates or years).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<f64>,
    pub labels: Option<Vec<String>>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Self {
        Sample { values, labels: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Label of observation i (0-based), or its 1-based index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => (i + 1).to_string(),
        }
    }

    /// Label of change point m: the last observation before the change.
    pub fn location_label(&self, m: usize) -> String {
        self.label(m.saturating_sub(1))
    }
}

/// SHA-256 of the little-endian bytes of the values, as hex.
pub fn data_hash(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Reads a one- or two-column CSV (optional header; with two columns the
/// first is a label). Returns labels and the raw value strings with their
/// line numbers.
fn read_columns(path: &Path) -> Result<(Option<Vec<String>>, Vec<(usize, String)>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut two_col = None;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| Error::Parse(format!("{}: line {line}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let cols = rec.len();
        if cols > 2 {
            return Err(Error::Parse(format!("{}: line {line}: expected 1 or 2 columns, got {cols}", path.display())));
        }
        let val = rec.get(cols - 1).unwrap_or("").to_string();
        if values.is_empty() && labels.is_empty() && val.parse::<f64>().is_err() {
            continue; // header
        }
        match two_col {
            None => two_col = Some(cols == 2),
            Some(t) if t != (cols == 2) => {
                return Err(Error::Parse(format!("{}: line {line}: inconsistent column count", path.display())));
            }
            _ => {}
        }
        if cols == 2 {
            labels.push(rec[0].to_string());
        }
        values.push((line, val));
    }
    if values.is_empty() {
        return Err(Error::Data(format!("{}: no observations", path.display())));
    }
    Ok((if labels.is_empty() { None } else { Some(labels) }, values))
}

fn parse_value(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("{}: line {line}: '{s}' is not a finite number", path.display())))
}

/// Non-negative integer counts.
pub fn ingest_counts(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let (labels, raw) = read_columns(path)?;
    let values = raw
        .iter()
        .map(|(line, s)| {
            let v = parse_value(path, *line, s)?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Data(format!("{}: line {line}: {v} is not a non-negative integer count", path.display())));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(Sample { values, labels })
}

/// Any finite real values.
pub fn ingest_values(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let (labels, raw) = read_columns(path)?;
    let values = raw.iter().map(|(line, s)| parse_value(path, *line, s)).collect::<Result<_>>()?;
    Ok(Sample { values, labels })
}

/// Floor applied to zero absolute returns, which lie outside the Weibull and
/// log-normal supports.
pub const RETURN_FLOOR: f64 = 1e-8;

/// rₜ = |ln(Pₜ / Pₜ₋₁)| with zeros replaced by `floor`. Returns the sample
/// (labelled by the later date) and the number of floored values.
pub fn ingest_prices_to_abs_log_returns(path: impl AsRef<Path>, floor: f64) -> Result<(Sample, usize)> {
    let path = path.as_ref();
    let (labels, raw) = read_columns(path)?;
    let prices: Vec<f64> = raw
        .iter()
        .map(|(line, s)| {
            let v = parse_value(path, *line, s)?;
            if v <= 0.0 {
                return Err(Error::Data(format!("{}: line {line}: price {v} is not positive", path.display())));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    if prices.len() < 2 {
        return Err(Error::Data(format!("{}: need at least two prices", path.display())));
    }
    let (sample, floored) = abs_log_returns(&prices, floor);
    Ok((Sample { values: sample, labels: labels.map(|l| l[1..].to_vec()) }, floored))
}

pub fn abs_log_returns(prices: &[f64], floor: f64) -> (Vec<f64>, usize) {
    let mut floored = 0;
    let r = prices
        .windows(2)
        .map(|w| {
            let v = (w[1] / w[0]).ln().abs();
            if v < floor {
                floored += 1;
                floor
            } else {
                v
            }
        })
        .collect();
    (r, floored)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelPriorChoice {
    #[default]
    LossBased,
    Uniform,
}

/// Sampling parameters and priors for Scenario 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario4Variant {
    /// Weibull / log-normal / Gamma sharing mean 5 and variance 2.5, with
    /// point-mass parameter priors at the sampling values.
    #[default]
    MomentMatched,
    /// Same sampling distributions, Scenario 2 hyperpriors throughout.
    Hyperprior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: u8,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Index of the generating model within the sequence.
    pub true_model: usize,
    pub truth: Vec<DistributionSpec>,
    pub breaks: Vec<usize>,
    /// Priors used to build the model prior.
    pub sequence: NestedModelSequence,
    /// Priors used in the evidences (segment s of every model).
    pub evidence_segments: Vec<SegmentPrior>,
    pub model_prior: ModelPriorChoice,
    pub evidence_mode: EvidenceMode,
    pub evidence_draws: usize,
    pub prior_draws: usize,
    pub threads: usize,
}

fn pp(s: &str) -> ParamPrior {
    s.parse().expect("built-in prior literal")
}

fn seg(family: Family, priors: &[&str]) -> SegmentPrior {
    SegmentPrior::new(family, priors.iter().map(|s| pp(s)).collect()).expect("built-in segment prior")
}

fn scaled_break(n: usize, num: usize, den: usize) -> usize {
    ((n * num) as f64 / den as f64).round().max(1.0) as usize
}

/// Moment-matched Weibull, log-normal and Gamma with mean 5 and variance 2.5.
pub fn moment_matched_triple() -> [DistributionSpec; 3] {
    [
        DistributionSpec::weibull(5.556878, 3.502839).expect("valid"),
        DistributionSpec::lognormal(1.561783, 10.492059).expect("valid"),
        DistributionSpec::gamma(10.0, 2.0).expect("valid"),
    ]
}

fn scenario2_segments() -> Vec<SegmentPrior> {
    vec![
        seg(Family::Weibull, &["gamma:1.5,1", "gamma:5,1"]),
        seg(Family::LogNormal, &["normal:0.05,1", "gamma:16,1"]),
        seg(Family::Gamma, &["gamma:10,1", "gamma:0.2,0.1"]),
    ]
}

impl ScenarioConfig {
    /// Built-in scenario `id` (1–4) at sample size n. `true_model` defaults
    /// to the largest model.
    pub fn builtin(id: u8, n: usize, true_model: Option<usize>) -> Result<Self> {
        let (segments, ev_segments, loc, truth_all, breaks_all): (Vec<SegmentPrior>, Vec<SegmentPrior>, LocationPriorKind, Vec<DistributionSpec>, Vec<usize>) =
            match id {
                1 => {
                    let s = vec![seg(Family::Geometric, &["beta:2,2"]), seg(Family::Poisson, &["gamma:3,1"])];
                    let truth = vec![DistributionSpec::geometric(0.8)?, DistributionSpec::poisson(3.0)?];
                    (s.clone(), s, LocationPriorKind::ShiftedBinomial, truth, vec![scaled_break(n, 1, 2)])
                }
                2 => {
                    let s = scenario2_segments();
                    let truth = vec![
                        DistributionSpec::weibull(1.5, 5.0)?,
                        DistributionSpec::lognormal(0.05, 16.0)?,
                        DistributionSpec::gamma(10.0, 2.0)?,
                    ];
                    // M1 splits 50/50; M2 adds a break at 70 (of 100)
                    let tm = true_model.unwrap_or(2);
                    let breaks = if tm == 1 { vec![scaled_break(n, 1, 2)] } else { vec![scaled_break(n, 1, 2), scaled_break(n, 7, 10)] };
                    (s.clone(), s, LocationPriorKind::Uniform, truth, breaks)
                }
                3 => {
                    let s = vec![
                        seg(Family::StudentT, &["2+poisson:30"]),
                        seg(Family::StudentT, &["2+poisson:3"]),
                        seg(Family::StudentT, &["2+poisson:8"]),
                    ];
                    let truth = vec![DistributionSpec::student_t(30)?, DistributionSpec::student_t(3)?, DistributionSpec::student_t(8)?];
                    (s.clone(), s, LocationPriorKind::Uniform, truth, vec![scaled_break(n, 1, 3), scaled_break(n, 2, 3)])
                }
                4 => return Self::scenario4(n, Scenario4Variant::MomentMatched),
                other => return Err(Error::Domain(format!("unknown scenario {other} (1-4)"))),
            };
        let k = segments.len() - 1;
        let true_model = true_model.unwrap_or(k);
        if true_model > k {
            return Err(Error::Domain(format!("scenario {id} has models 0..={k}, got true model {true_model}")));
        }
        Self::assemble(id, n, true_model, truth_all, breaks_all, segments, ev_segments, loc)
    }

    /// Scenario 4 at sample size n; the true model is M₂.
    pub fn scenario4(n: usize, variant: Scenario4Variant) -> Result<Self> {
        let truth = moment_matched_triple().to_vec();
        let breaks = match n {
            500 => vec![170, 340],
            1500 => vec![500, 1000],
            _ => vec![scaled_break(n, 1, 3), scaled_break(n, 2, 3)],
        };
        let segs = match variant {
            Scenario4Variant::MomentMatched => truth.iter().map(SegmentPrior::fixed).collect(),
            Scenario4Variant::Hyperprior => scenario2_segments(),
        };
        Self::assemble(4, n, 2, truth, breaks, segs.clone(), segs, LocationPriorKind::Uniform)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        id: u8,
        n: usize,
        true_model: usize,
        truth_all: Vec<DistributionSpec>,
        breaks_all: Vec<usize>,
        segments: Vec<SegmentPrior>,
        ev_segments: Vec<SegmentPrior>,
        loc: LocationPriorKind,
    ) -> Result<Self> {
        let truth = truth_all[..=true_model].to_vec();
        let breaks = breaks_all[..true_model].to_vec();
        let cfg = ScenarioConfig {
            scenario: id,
            n,
            replicates: 1,
            seed: DEFAULT_SEED,
            true_model,
            truth,
            breaks,
            sequence: NestedModelSequence::new(segments, loc)?,
            evidence_segments: ev_segments,
            model_prior: ModelPriorChoice::LossBased,
            evidence_mode: EvidenceMode::Auto,
            evidence_draws: 2000,
            prior_draws: 5000,
            threads: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Domain("need at least one replicate".into()));
        }
        if self.truth.len() != self.breaks.len() + 1 {
            return Err(Error::Domain("need one more true segment than breaks".into()));
        }
        LocationVector::new(self.breaks.clone(), self.n)
            .map_err(|e| Error::Domain(format!("true break locations {:?} invalid for n = {}: {e}", self.breaks, self.n)))?;
        if self.evidence_segments.len() != self.sequence.segments.len() {
            return Err(Error::Domain("evidence and model-prior sequences differ in length".into()));
        }
        Ok(())
    }

    /// Data for replicate r.
    pub fn simulate(&self, r: usize) -> Vec<f64> {
        let mut rng = substream(self.seed, &format!("scenario{}-data", self.scenario), r as u64);
        let mut bounds = vec![0];
        bounds.extend(&self.breaks);
        bounds.push(self.n);
        let mut out = Vec::with_capacity(self.n);
        for (s, d) in self.truth.iter().enumerate() {
            out.extend(d.sample(bounds[s + 1] - bounds[s], &mut rng));
        }
        out
    }

    fn evidence_config(&self, r: usize) -> EvidenceConfig {
        EvidenceConfig {
            mode: self.evidence_mode,
            draws: self.evidence_draws,
            seed: substream(self.seed, "evidence", r as u64).next_u64(),
            threads: 1,
            ..Default::default()
        }
    }

    fn mc_config(&self) -> McConfig {
        McConfig { draws: self.prior_draws, seed: self.seed, threads: self.threads, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub data_hash: String,
    pub log_evidences: Vec<f64>,
    pub mc_se: Vec<Option<f64>>,
    pub posteriors: Vec<f64>,
    pub winner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub scenario: u8,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub true_model: usize,
    pub prior_kind: ModelPriorChoice,
    pub model_priors: Vec<f64>,
    pub prior_details: Option<ModelPriorResult>,
    pub mean_posterior: Vec<f64>,
    /// Sample variance across replicates (0 when R = 1).
    pub var_posterior: Vec<f64>,
    /// Replicates in which each model had the highest posterior.
    pub wins: Vec<usize>,
    pub true_model_frequency: usize,
    pub records: Vec<ReplicateRecord>,
}

/// Index of the largest value; ties go to the smaller model.
fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (i, x)| if *x > v[best] { i } else { best })
}

fn priors_for(cfg: &ScenarioConfig, choice: ModelPriorChoice) -> Result<(Vec<f64>, Option<ModelPriorResult>)> {
    let k1 = cfg.sequence.segments.len();
    match choice {
        ModelPriorChoice::Uniform => Ok((vec![1.0 / k1 as f64; k1], None)),
        ModelPriorChoice::LossBased => {
            let r = model_prior_probabilities(&cfg.sequence, cfg.n, &cfg.mc_config())?;
            Ok((r.probs.clone(), Some(r)))
        }
    }
}

/// Log evidence of every model in the sequence for one data set. Models with
/// more change points than the data can hold get −∞.
fn all_evidences(cfg: &ScenarioConfig, data: &[f64], r: usize) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    let ecfg = cfg.evidence_config(r);
    let mut le = Vec::new();
    let mut se = Vec::new();
    for j in 0..cfg.evidence_segments.len() {
        if j + 1 > data.len() {
            le.push(f64::NEG_INFINITY);
            se.push(None);
            continue;
        }
        let e = log_evidence(&cfg.evidence_segments[..=j], data, &ecfg)?;
        le.push(e.log_evidence);
        se.push(e.mc_se);
    }
    Ok((le, se))
}

fn replicate_data(cfg: &ScenarioConfig) -> Result<Vec<(String, Vec<f64>, Vec<Option<f64>>)>> {
    let threads = if cfg.threads == 0 { crate::parallel::default_threads() } else { cfg.threads };
    let res: Vec<Result<(String, Vec<f64>, Vec<Option<f64>>)>> = map_indexed(threads, cfg.replicates, |r| {
        let data = cfg.simulate(r);
        let (le, se) = all_evidences(cfg, &data, r).map_err(|e| Error::Replicate { replicate: r, source: Box::new(e) })?;
        Ok((data_hash(&data), le, se))
    });
    res.into_iter().collect()
}

fn frequency_report(
    cfg: &ScenarioConfig,
    choice: ModelPriorChoice,
    priors: Vec<f64>,
    details: Option<ModelPriorResult>,
    evid: &[(String, Vec<f64>, Vec<Option<f64>>)],
) -> Result<FrequencyReport> {
    let k1 = priors.len();
    let mut records = Vec::with_capacity(evid.len());
    for (r, (hash, le, se)) in evid.iter().enumerate() {
        let post = posterior_model_probs(&priors, le).map_err(|e| Error::Replicate { replicate: r, source: Box::new(e) })?;
        records.push(ReplicateRecord {
            replicate: r,
            data_hash: hash.clone(),
            log_evidences: le.clone(),
            mc_se: se.clone(),
            winner: argmax(&post),
            posteriors: post,
        });
    }
    let rn = records.len() as f64;
    let mean: Vec<f64> = (0..k1).map(|i| records.iter().map(|r| r.posteriors[i]).sum::<f64>() / rn).collect();
    let var: Vec<f64> = (0..k1)
        .map(|i| {
            if records.len() < 2 {
                0.0
            } else {
                records.iter().map(|r| (r.posteriors[i] - mean[i]).powi(2)).sum::<f64>() / (rn - 1.0)
            }
        })
        .collect();
    let mut wins = vec![0; k1];
    records.iter().for_each(|r| wins[r.winner] += 1);
    Ok(FrequencyReport {
        scenario: cfg.scenario,
        n: cfg.n,
        replicates: cfg.replicates,
        seed: cfg.seed,
        true_model: cfg.true_model,
        prior_kind: choice,
        model_priors: priors,
        prior_details: details,
        mean_posterior: mean,
        var_posterior: var,
        true_model_frequency: wins[cfg.true_model],
        wins,
        records,
    })
}

/// Simulate R replicates and summarise the model posteriors.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<FrequencyReport> {
    cfg.validate()?;
    let (priors, details) = priors_for(cfg, cfg.model_prior)?;
    let evid = replicate_data(cfg)?;
    frequency_report(cfg, cfg.model_prior, priors, details, &evid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedReport {
    pub loss_based: FrequencyReport,
    pub uniform: FrequencyReport,
    /// True when both reports were computed on byte-identical data sets.
    pub same_datasets: bool,
}

/// Loss-based and uniform model priors on the same Scenario 4 data sets.
pub fn compare_priors_scenario4(n: usize, replicates: usize, seed: u64, variant: Scenario4Variant, threads: usize) -> Result<PairedReport> {
    let mut cfg = ScenarioConfig::scenario4(n, variant)?;
    cfg.replicates = replicates;
    cfg.seed = seed;
    cfg.threads = threads;
    compare_priors(&cfg)
}

/// Paired comparison for any scenario configuration.
pub fn compare_priors(cfg: &ScenarioConfig) -> Result<PairedReport> {
    cfg.validate()?;
    let evid = replicate_data(cfg)?;
    let (lp, ld) = priors_for(cfg, ModelPriorChoice::LossBased)?;
    let loss_based = frequency_report(cfg, ModelPriorChoice::LossBased, lp, ld, &evid)?;
    let (up, _) = priors_for(cfg, ModelPriorChoice::Uniform)?;
    let uniform = frequency_report(cfg, ModelPriorChoice::Uniform, up, None, &evid)?;
    let same_datasets = loss_based.records.iter().zip(&uniform.records).all(|(a, b)| a.data_hash == b.data_hash);
    Ok(PairedReport { loss_based, uniform, same_datasets })
}

/// Model comparison on one data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub name: String,
    pub n: usize,
    pub data_hash: String,
    pub models: Vec<String>,
    pub model_priors: Vec<f64>,
    pub prior_details: Option<ModelPriorResult>,
    pub method: EvidenceMethod,
    /// Log evidences; for the Schwarz method, ℓ̂ − ½ d ln n.
    pub log_evidences: Vec<f64>,
    pub mc_se: Vec<Option<f64>>,
    /// log_bayes_factors[j][i] = log B_ji.
    pub log_bayes_factors: Vec<Vec<f64>>,
    pub posteriors: Vec<f64>,
    /// Most probable (or maximum-likelihood) locations per model.
    pub best_locations: Vec<Option<Vec<usize>>>,
    /// Per model and change point: mass at each location 1..n−1.
    pub location_marginals: Vec<Vec<Vec<f64>>>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMethod {
    Exact,
    Mc,
    Bic,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub method: AnalysisMethod,
    pub model_prior: ModelPriorChoice,
    pub draws: usize,
    pub prior_draws: usize,
    pub seed: u64,
    pub threads: usize,
    /// Shortest segment admitted by the Schwarz location scan.
    pub min_segment: usize,
    pub location_prior: LocationPriorKind,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            method: AnalysisMethod::Exact,
            model_prior: ModelPriorChoice::LossBased,
            draws: 2000,
            prior_draws: 5000,
            seed: DEFAULT_SEED,
            threads: 1,
            min_segment: 10,
            location_prior: LocationPriorKind::Uniform,
        }
    }
}

fn describe(segments: &[SegmentPrior]) -> String {
    segments.iter().map(|s| s.family.to_string()).collect::<Vec<_>>().join(" -> ")
}

/// Model priors from the sequence, then evidences for M₀ … M_K.
pub fn analyze(name: &str, seq: &NestedModelSequence, data: &Sample, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let x = &data.values;
    let n = x.len();
    if n < 2 {
        return Err(Error::Data(format!("need at least 2 observations, got {n}")));
    }
    let k1 = seq.segments.len();
    let (model_priors, prior_details) = match opts.model_prior {
        ModelPriorChoice::Uniform => (vec![1.0 / k1 as f64; k1], None),
        ModelPriorChoice::LossBased => {
            let mc = McConfig { draws: opts.prior_draws, seed: opts.seed, threads: opts.threads, ..Default::default() };
            let r = model_prior_probabilities(seq, n, &mc)?;
            (r.probs.clone(), Some(r))
        }
    };
    let models: Vec<String> = (0..k1).map(|j| describe(&seq.segments[..=j])).collect();
    let mut notes = Vec::new();
    let mut log_ev = Vec::with_capacity(k1);
    let mut mc_se = Vec::with_capacity(k1);
    let mut best = Vec::with_capacity(k1);
    let mut marg = Vec::with_capacity(k1);
    let method;
    match opts.method {
        AnalysisMethod::Bic => {
            method = EvidenceMethod::SchwarzBic;
            let fits = (0..k1)
                .map(|j| profile_fit(&seq.families()[..=j], x, opts.min_segment, opts.threads))
                .collect::<Result<Vec<_>>>()?;
            for f in &fits {
                // differences of ℓ̂ − ½ d ln n are the Schwarz log Bayes factors
                log_ev.push(f.max_log_likelihood - 0.5 * f.dim as f64 * (n as f64).ln());
                mc_se.push(None);
                best.push(f.locations.as_ref().map(|m| m.locations().to_vec()));
                marg.push(Vec::new());
            }
            notes.push(format!("Schwarz approximation; locations profiled with minimum segment length {}", opts.min_segment));
        }
        AnalysisMethod::Exact | AnalysisMethod::Mc => {
            let cfg = EvidenceConfig {
                mode: if opts.method == AnalysisMethod::Exact { EvidenceMode::Exact } else { EvidenceMode::MonteCarlo },
                draws: opts.draws,
                seed: opts.seed,
                threads: opts.threads,
                location_prior: opts.location_prior,
                locations: true,
                ..Default::default()
            };
            let mut methods = Vec::new();
            for j in 0..k1 {
                let cfg_j = if j == 1 { cfg } else { EvidenceConfig { location_prior: LocationPriorKind::Uniform, ..cfg } };
                let e = log_evidence(&seq.segments[..=j], x, &cfg_j)?;
                notes.extend(e.diagnostics.iter().map(|d| format!("M{j}: {d}")));
                log_ev.push(e.log_evidence);
                mc_se.push(e.mc_se);
                methods.push(e.method);
                match &e.location_posterior {
                    Some(p) => {
                        best.push(Some(p.mode().locations().to_vec()));
                        marg.push(location_marginals(p));
                    }
                    None => {
                        best.push(None);
                        marg.push(Vec::new());
                    }
                }
            }
            method = if methods.contains(&EvidenceMethod::MonteCarlo) {
                EvidenceMethod::MonteCarlo
            } else if methods.contains(&EvidenceMethod::ExactEnumeration) {
                EvidenceMethod::ExactEnumeration
            } else {
                EvidenceMethod::ConjugateExact
            };
        }
    }
    let posteriors = posterior_model_probs(&model_priors, &log_ev)?;
    Ok(AnalysisReport {
        name: name.to_string(),
        n,
        data_hash: data_hash(x),
        models,
        model_priors,
        prior_details,
        method,
        log_bayes_factors: log_bayes_factors(&log_ev),
        log_evidences: log_ev,
        mc_se,
        posteriors,
        best_locations: best,
        location_marginals: marg,
        notes,
    })
}

/// No change vs one change in a Poisson rate with Gamma(2, 1) priors, exact.
pub fn coal_mining_analysis(data: &Sample) -> Result<AnalysisReport> {
    let s = seg(Family::Poisson, &["gamma:2,1"]);
    let seq = NestedModelSequence::new(vec![s.clone(), s], LocationPriorKind::Uniform)?;
    analyze("coal-mining", &seq, data, &AnalysisOptions::default())
}

/// Weibull, then log-normal, then log-normal segments for absolute
/// log-returns; Schwarz evidences with profiled locations.
pub fn sp500_sequence() -> NestedModelSequence {
    let s = scenario2_segments();
    NestedModelSequence::new(vec![s[0].clone(), s[1].clone(), s[1].clone()], LocationPriorKind::Uniform).expect("valid")
}

pub fn sp500_analysis(data: &Sample, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let opts = AnalysisOptions { method: AnalysisMethod::Bic, ..*opts };
    analyze("sp500", &sp500_sequence(), data, &opts)
}

/// Writes report.json, location_posterior.csv and data.csv.
pub fn write_analysis(dir: &Path, report: &AnalysisReport, data: &Sample) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    write(dir.join("report.json"), json)?;
    let mut csv = String::from("model,change_point,location,label,mass\n");
    for (j, per_model) in report.location_marginals.iter().enumerate() {
        for (q, masses) in per_model.iter().enumerate() {
            for (m, w) in masses.iter().enumerate().skip(1) {
                let _ = writeln!(csv, "{j},{},{m},{},{w:e}", q + 1, data.location_label(m));
            }
        }
    }
    write(dir.join("location_posterior.csv"), csv)?;
    let mut d = String::from("label,value\n");
    for (i, v) in data.values.iter().enumerate() {
        let _ = writeln!(d, "{},{v}", data.label(i));
    }
    write(dir.join("data.csv"), d)
}

/// Writes report.json, replicates.csv and data_replicate0.csv.
pub fn write_frequency(dir: &Path, report: &impl Serialize, reports: &[&FrequencyReport], first_data: &[f64]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    write(dir.join("report.json"), json)?;
    let mut csv = String::new();
    if let Some(first) = reports.first() {
        let k1 = first.model_priors.len();
        csv.push_str("prior,replicate,data_hash,winner");
        (0..k1).for_each(|j| {
            let _ = write!(csv, ",log_evidence_{j}");
        });
        (0..k1).for_each(|j| {
            let _ = write!(csv, ",posterior_{j}");
        });
        csv.push('\n');
        for rep in reports {
            let kind = match rep.prior_kind {
                ModelPriorChoice::LossBased => "loss_based",
                ModelPriorChoice::Uniform => "uniform",
            };
            for r in &rep.records {
                let _ = write!(csv, "{kind},{},{},{}", r.replicate, r.data_hash, r.winner);
                r.log_evidences.iter().for_each(|v| {
                    let _ = write!(csv, ",{v}");
                });
                r.posteriors.iter().for_each(|v| {
                    let _ = write!(csv, ",{v}");
                });
                csv.push('\n');
            }
        }
    }
    write(dir.join("replicates.csv"), csv)?;
    let mut d = String::from("index,value\n");
    for (i, v) in first_data.iter().enumerate() {
        let _ = writeln!(d, "{},{v}", i + 1);
    }
    write(dir.join("data_replicate0.csv"), d)
}

fn write(path: impl AsRef<Path>, contents: String) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
