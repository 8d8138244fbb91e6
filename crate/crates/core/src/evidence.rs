//! Marginal likelihoods, Bayes factors and posteriors over models and
//! change-point locations.
//!
//! A model with segment priors π₁ … π_{k+1} has evidence
//!
//! ```text
//! Z = Σ_m π(m) ∏_s ∫ ∏_{i ∈ segment s} f_s(x_i | θ) π_s(θ) dθ
//! ```
//!
//! summed over the whole uniform location prior. Each segment integral is
//! either a conjugate closed form or a weighted average over parameter atoms
//! (exact enumeration for count-valued priors, Monte Carlo draws otherwise).
//! Atom log-likelihoods are stored as prefix sums over the data, so the
//! marginal of any interval costs one pass over the atoms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cp_priors::{shifted_binomial_prior, DiscretePrior, LocationVector, UniformLocationPrior};
use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::model_priors::{LocationPriorKind, ParamPrior, SegmentPrior};
use crate::numeric::{ln_factorial, ln_gamma, log_sum_exp};
use crate::parallel::map_indexed;
use crate::rng::{substream, DEFAULT_SEED};

use statrs::function::beta::ln_beta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceMethod {
    /// Closed-form conjugate segment marginals.
    ConjugateExact,
    /// Exact sums over the finitely many atoms of count-valued or point-mass
    /// parameter priors (possibly mixed with conjugate segments).
    ExactEnumeration,
    MonteCarlo,
    SchwarzBic,
}

impl fmt::Display for EvidenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvidenceMethod::ConjugateExact => "conjugate_exact",
            EvidenceMethod::ExactEnumeration => "exact_enumeration",
            EvidenceMethod::MonteCarlo => "monte_carlo",
            EvidenceMethod::SchwarzBic => "schwarz_bic",
        })
    }
}

/// How segment integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceMode {
    /// Conjugate where available, then exact enumeration, then Monte Carlo.
    #[default]
    Auto,
    /// Conjugate or enumeration only; error otherwise.
    Exact,
    /// Monte Carlo for every continuous parameter prior, even conjugate ones.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy)]
pub struct EvidenceConfig {
    pub mode: EvidenceMode,
    pub draws: usize,
    pub batches: usize,
    pub seed: u64,
    pub threads: usize,
    /// Prior mass dropped when enumerating count-valued parameter priors.
    pub enumeration_tail: f64,
    pub location_prior: LocationPriorKind,
    /// Also return the posterior over location vectors.
    pub locations: bool,
}

impl Default for EvidenceConfig {
    fn default() -> Self {
        EvidenceConfig {
            mode: EvidenceMode::Auto,
            draws: 2000,
            batches: 20,
            seed: DEFAULT_SEED,
            threads: 1,
            enumeration_tail: 1e-14,
            location_prior: LocationPriorKind::Uniform,
            locations: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceResult {
    pub log_evidence: f64,
    pub method: EvidenceMethod,
    /// Batch-means standard error of the log evidence (Monte Carlo only).
    pub mc_se: Option<f64>,
    #[serde(skip)]
    pub location_posterior: Option<DiscretePrior<LocationVector>>,
    pub diagnostics: Vec<String>,
}

/// Log marginal of a segment under a conjugate prior: Poisson with a
/// Gamma(shape, rate) prior on the rate, or Geometric (failures before the
/// first success) with a Beta prior on the success probability.
pub fn conjugate_segment_log_marginal(family: Family, prior: &DistributionSpec, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Domain("empty segment".into()));
    }
    let stats = CountStats::of(data)?;
    conjugate_from_stats(family, prior, &stats)
}

#[derive(Debug, Clone, Copy, Default)]
struct CountStats {
    len: f64,
    sum: f64,
    sum_ln_fact: f64,
}

impl CountStats {
    fn of(data: &[f64]) -> Result<Self> {
        let mut s = CountStats::default();
        for &x in data {
            if !(x >= 0.0 && x.fract() == 0.0 && x.is_finite()) {
                return Err(Error::Data(format!("{x} is not a non-negative integer count")));
            }
            s.len += 1.0;
            s.sum += x;
            s.sum_ln_fact += ln_factorial(x);
        }
        Ok(s)
    }
}

fn conjugate_from_stats(family: Family, prior: &DistributionSpec, s: &CountStats) -> Result<f64> {
    let [a, b] = [prior.params()[0], prior.params().get(1).copied().unwrap_or(f64::NAN)];
    match (family, prior.family()) {
        (Family::Poisson, Family::Gamma) => Ok(a * b.ln() - ln_gamma(a) + ln_gamma(a + s.sum)
            - (a + s.sum) * (b + s.len).ln()
            - s.sum_ln_fact),
        (Family::Geometric, Family::Beta) => Ok(ln_beta(a + s.len, b + s.sum) - ln_beta(a, b)),
        (f, p) => Err(Error::Unsupported(format!("no conjugate marginal for {f} data with a {p} prior"))),
    }
}

/// Conjugate prior of a segment, if it has one.
fn conjugate_prior(seg: &SegmentPrior) -> Option<DistributionSpec> {
    match (seg.family, seg.params.as_slice()) {
        (Family::Poisson, [ParamPrior::Dist(d)]) if d.family() == Family::Gamma => Some(*d),
        (Family::Geometric, [ParamPrior::Dist(d)]) if d.family() == Family::Beta => Some(*d),
        _ => None,
    }
}

/// Evaluates log ∫ ∏_{i∈[a,b)} f(x_i|θ) π(θ) dθ for any interval.
enum Engine {
    Conjugate {
        family: Family,
        prior: DistributionSpec,
        /// prefix[i] = stats of x[0..i]
        prefix: Vec<CountStats>,
    },
    Atoms {
        atoms: usize,
        log_w: Vec<f64>,
        /// Position-major: prefix[i * atoms + d] = Σ_{t<i} ln f_d(x_t).
        prefix: Vec<f64>,
        /// Draw ranges of the batches; empty for exact atom sets.
        batches: Vec<(usize, usize)>,
    },
}

struct Segment {
    engine: Engine,
    /// invalid[i] = points in x[0..i] outside the family's support.
    invalid: Vec<u32>,
}

impl Segment {
    fn build(seg: &SegmentPrior, index: usize, data: &[f64], cfg: &EvidenceConfig) -> Result<(Self, EvidenceMethod)> {
        let n = data.len();
        let mut invalid = Vec::with_capacity(n + 1);
        invalid.push(0u32);
        let probe = probe_spec(seg.family);
        for &x in data {
            let bad = !probe.in_support(x);
            invalid.push(invalid.last().unwrap() + bad as u32);
        }
        if cfg.mode != EvidenceMode::MonteCarlo {
            if let Some(prior) = conjugate_prior(seg) {
                let mut prefix = Vec::with_capacity(n + 1);
                let mut acc = CountStats::default();
                prefix.push(acc);
                for &x in data {
                    if probe.in_support(x) {
                        acc.len += 1.0;
                        acc.sum += x;
                        acc.sum_ln_fact += ln_factorial(x);
                    }
                    prefix.push(acc);
                }
                let engine = Engine::Conjugate { family: seg.family, prior, prefix };
                return Ok((Segment { engine, invalid }, EvidenceMethod::ConjugateExact));
            }
        }
        let (specs, log_w, batches, method) = match seg.atoms(cfg.enumeration_tail) {
            Some(atoms) => {
                let (specs, w): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
                let log_w: Vec<f64> = w.iter().map(|v: &f64| v.ln()).collect();
                (specs, log_w, Vec::new(), EvidenceMethod::ExactEnumeration)
            }
            None => {
                if cfg.mode == EvidenceMode::Exact {
                    return Err(Error::Unsupported(format!(
                        "segment {} ({}) has a continuous parameter prior without a conjugate form; use Monte Carlo",
                        index + 1,
                        seg.family
                    )));
                }
                if cfg.draws < 100 {
                    return Err(Error::Domain(format!("need at least 100 draws, got {}", cfg.draws)));
                }
                let tag = format!("evidence-seg{index}");
                let specs: Vec<DistributionSpec> = (0..cfg.draws)
                    .map(|d| seg.draw(&mut substream(cfg.seed, &tag, d as u64)))
                    .collect::<Result<_>>()?;
                let b = cfg.batches.clamp(1, cfg.draws);
                let batches = (0..b).map(|i| (i * cfg.draws / b, (i + 1) * cfg.draws / b)).collect();
                (specs, vec![0.0; cfg.draws], batches, EvidenceMethod::MonteCarlo)
            }
        };
        let atoms = specs.len();
        let columns: Vec<Vec<f64>> = map_indexed(cfg.threads, atoms, |d| {
            let mut acc = 0.0;
            let mut col = Vec::with_capacity(n + 1);
            col.push(0.0);
            for &x in data {
                if probe.in_support(x) {
                    acc += specs[d].log_density(x);
                }
                col.push(acc);
            }
            col
        });
        let mut prefix = vec![0.0; (n + 1) * atoms];
        for (d, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                prefix[i * atoms + d] = *v;
            }
        }
        Ok((Segment { engine: Engine::Atoms { atoms, log_w, prefix, batches }, invalid }, method))
    }

    fn batch_count(&self) -> usize {
        match &self.engine {
            Engine::Atoms { batches, .. } => batches.len(),
            Engine::Conjugate { .. } => 0,
        }
    }

    /// Full log marginal of x[a..b]; per-batch estimates go to `out` when the
    /// segment is Monte Carlo.
    fn eval(&self, a: usize, b: usize, out: &mut [f64]) -> f64 {
        if self.invalid[b] > self.invalid[a] {
            out.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
            return f64::NEG_INFINITY;
        }
        match &self.engine {
            Engine::Conjugate { family, prior, prefix } => {
                let (p, q) = (prefix[a], prefix[b]);
                let s = CountStats { len: q.len - p.len, sum: q.sum - p.sum, sum_ln_fact: q.sum_ln_fact - p.sum_ln_fact };
                let v = conjugate_from_stats(*family, prior, &s).unwrap_or(f64::NAN);
                out.iter_mut().for_each(|o| *o = v);
                v
            }
            Engine::Atoms { atoms, log_w, prefix, batches } => {
                let lo = &prefix[a * atoms..(a + 1) * atoms];
                let hi = &prefix[b * atoms..(b + 1) * atoms];
                let lse = |r: std::ops::Range<usize>| {
                    let mut m = f64::NEG_INFINITY;
                    for d in r.clone() {
                        m = m.max(log_w[d] + hi[d] - lo[d]);
                    }
                    if m == f64::NEG_INFINITY {
                        return m;
                    }
                    let s: f64 = r.map(|d| (log_w[d] + hi[d] - lo[d] - m).exp()).sum();
                    m + s.ln()
                };
                if batches.is_empty() {
                    let v = lse(0..*atoms);
                    out.iter_mut().for_each(|o| *o = v);
                    return v;
                }
                let mut sums = Vec::with_capacity(batches.len());
                for (i, &(s, e)) in batches.iter().enumerate() {
                    let v = lse(s..e);
                    sums.push(v);
                    if let Some(o) = out.get_mut(i) {
                        *o = v - ((e - s) as f64).ln();
                    }
                }
                log_sum_exp(&sums) - (*atoms as f64).ln()
            }
        }
    }
}

/// A valid member of the family, used only for support checks.
fn probe_spec(family: Family) -> DistributionSpec {
    let params: &[f64] = match family {
        Family::Geometric => &[0.5],
        Family::Poisson => &[1.0],
        Family::StudentT => &[3.0],
        Family::Normal => &[0.0, 1.0],
        _ => &[1.0, 1.0],
    };
    DistributionSpec::new(family, params).expect("probe parameters are valid")
}

/// Log prior mass of each location vector of a k-change model; constant for
/// the uniform prior.
enum LocationWeights {
    Uniform(f64),
    Single(Vec<f64>),
}

impl LocationWeights {
    fn new(kind: LocationPriorKind, n: usize, k: usize) -> Result<Self> {
        match kind {
            LocationPriorKind::Uniform => Ok(LocationWeights::Uniform(UniformLocationPrior::new(n, k)?.log_mass())),
            LocationPriorKind::ShiftedBinomial => {
                if k != 1 {
                    return Err(Error::Unsupported(
                        "the shifted binomial location prior is defined for a single change point only".into(),
                    ));
                }
                let p = shifted_binomial_prior(n)?;
                let mut lw = vec![f64::NEG_INFINITY; n];
                for (m, w) in p.iter() {
                    lw[*m] = w.ln();
                }
                Ok(LocationWeights::Single(lw))
            }
        }
    }

    fn get(&self, m1: usize) -> f64 {
        match self {
            LocationWeights::Uniform(v) => *v,
            LocationWeights::Single(lw) => lw[m1],
        }
    }
}

/// Evidence of the model whose segments carry `segments` priors, summed over
/// every admissible location vector (k = segments.len() − 1 ≤ 2).
pub fn log_evidence(segments: &[SegmentPrior], data: &[f64], cfg: &EvidenceConfig) -> Result<EvidenceResult> {
    let n = data.len();
    let k = segments.len().checked_sub(1).ok_or_else(|| Error::Domain("a model needs at least one segment".into()))?;
    if k > 2 {
        return Err(Error::Unsupported(format!("evidence is implemented for at most 2 change points, got {k}")));
    }
    if n < k + 1 {
        return Err(Error::Domain(format!("n = {n} observations cannot hold {k} change point(s)")));
    }
    let mut segs = Vec::with_capacity(k + 1);
    let mut methods = Vec::with_capacity(k + 1);
    for (s, seg) in segments.iter().enumerate() {
        let (built, m) = Segment::build(seg, s, data, cfg)?;
        segs.push(built);
        methods.push(m);
    }
    let method = if methods.contains(&EvidenceMethod::MonteCarlo) {
        EvidenceMethod::MonteCarlo
    } else if methods.contains(&EvidenceMethod::ExactEnumeration) {
        EvidenceMethod::ExactEnumeration
    } else {
        EvidenceMethod::ConjugateExact
    };
    let nb = segs.iter().map(Segment::batch_count).max().unwrap_or(0);
    let lw = if k == 0 { LocationWeights::Uniform(0.0) } else { LocationWeights::new(cfg.location_prior, n, k)? };

    // rows[r] = (full log terms in location order, per-batch LSE)
    let (full_terms, batch_totals): (Vec<f64>, Vec<f64>) = match k {
        0 => {
            let mut b = vec![0.0; nb];
            let v = segs[0].eval(0, n, &mut b);
            (vec![v], b)
        }
        1 => {
            let mut full = Vec::with_capacity(n - 1);
            let mut per_batch: Vec<Vec<f64>> = vec![Vec::with_capacity(n - 1); nb];
            let (mut b0, mut b1) = (vec![0.0; nb], vec![0.0; nb]);
            for m in 1..n {
                let p = lw.get(m);
                let v = p + segs[0].eval(0, m, &mut b0) + segs[1].eval(m, n, &mut b1);
                full.push(v);
                for i in 0..nb {
                    per_batch[i].push(p + b0[i] + b1[i]);
                }
            }
            (full, per_batch.iter().map(|v| log_sum_exp(v)).collect())
        }
        _ => {
            let mut first = vec![(0.0, vec![0.0; nb]); n];
            let mut last = vec![(0.0, vec![0.0; nb]); n];
            for m in 1..n {
                let (v, b) = &mut first[m];
                *v = segs[0].eval(0, m, b);
                let (v, b) = &mut last[m];
                *v = segs[2].eval(m, n, b);
            }
            let p = lw.get(1);
            let rows: Vec<(Vec<f64>, Vec<f64>)> = map_indexed(cfg.threads, n - 2, |r| {
                let m1 = r + 1;
                let mut mid = vec![0.0; nb];
                let mut full = Vec::with_capacity(n - 1 - m1);
                let mut per_batch: Vec<Vec<f64>> = vec![Vec::with_capacity(n - 1 - m1); nb];
                for m2 in m1 + 1..n {
                    let v = segs[1].eval(m1, m2, &mut mid);
                    full.push(p + first[m1].0 + v + last[m2].0);
                    for i in 0..nb {
                        per_batch[i].push(p + first[m1].1[i] + mid[i] + last[m2].1[i]);
                    }
                }
                (full, per_batch.iter().map(|v| log_sum_exp(v)).collect())
            });
            let mut full = Vec::with_capacity((n - 1) * (n - 2) / 2);
            let mut batch_rows: Vec<Vec<f64>> = vec![Vec::with_capacity(n); nb];
            for (f, b) in rows {
                full.extend(f);
                for i in 0..nb {
                    batch_rows[i].push(b[i]);
                }
            }
            (full, batch_rows.iter().map(|v| log_sum_exp(v)).collect())
        }
    };
    let log_ev = log_sum_exp(&full_terms);
    let mut diagnostics = Vec::new();
    if log_ev == f64::NEG_INFINITY {
        for (s, seg) in segs.iter().enumerate() {
            if seg.invalid[n] > 0 {
                diagnostics.push(format!(
                    "segment {} ({}): {} observation(s) outside the support",
                    s + 1,
                    segments[s].family,
                    seg.invalid[n]
                ));
            }
        }
        if diagnostics.is_empty() {
            diagnostics.push("every location vector has zero likelihood".into());
        }
    }
    if log_ev.is_nan() {
        return Err(Error::Accuracy { achieved: f64::NAN, requested: 0.0 });
    }
    let mc_se = (method == EvidenceMethod::MonteCarlo).then(|| batch_se(&batch_totals));
    let location_posterior = if cfg.locations && k > 0 && log_ev.is_finite() {
        let support: Vec<LocationVector> = match k {
            1 => (1..n).map(|m| LocationVector::new(vec![m], n)).collect::<Result<_>>()?,
            _ => UniformLocationPrior::new(n, 2)?.enumerate().collect(),
        };
        Some(DiscretePrior::from_log_weights(support, &full_terms)?)
    } else {
        None
    };
    Ok(EvidenceResult { log_evidence: log_ev, method, mc_se, location_posterior, diagnostics })
}

/// Standard error of the mean of batch estimates.
fn batch_se(v: &[f64]) -> f64 {
    let b = v.len() as f64;
    if v.len() < 2 || v.iter().any(|x| !x.is_finite()) {
        return f64::NAN;
    }
    let mean = v.iter().sum::<f64>() / b;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Monte Carlo evidence with `draws` parameter draws per continuous prior.
pub fn mc_log_evidence(segments: &[SegmentPrior], data: &[f64], draws: usize, seed: u64) -> Result<EvidenceResult> {
    let cfg = EvidenceConfig { mode: EvidenceMode::MonteCarlo, draws, seed, ..Default::default() };
    log_evidence(segments, data, &cfg)
}

/// Pr(m | x, M_k) over every admissible location vector.
pub fn location_posterior(segments: &[SegmentPrior], data: &[f64], cfg: &EvidenceConfig) -> Result<DiscretePrior<LocationVector>> {
    if segments.len() < 2 {
        return Err(Error::Domain("location posterior needs at least one change point".into()));
    }
    let cfg = EvidenceConfig { locations: true, ..*cfg };
    let r = log_evidence(segments, data, &cfg)?;
    r.location_posterior.ok_or_else(|| {
        Error::PosteriorUndefined(format!("zero evidence, location posterior undefined: {}", r.diagnostics.join("; ")))
    })
}

/// Marginal posterior of each change point, indexed by location 1..n−1.
pub fn location_marginals(post: &DiscretePrior<LocationVector>) -> Vec<Vec<f64>> {
    let Some(first) = post.support().first() else { return Vec::new() };
    let (n, k) = (first.n(), first.k());
    let mut out = vec![vec![0.0; n]; k];
    for (m, w) in post.iter() {
        for (q, &loc) in m.locations().iter().enumerate() {
            out[q][loc] += w;
        }
    }
    out
}

/// Pr(M_i | x) from prior probabilities and log evidences, in log space.
pub fn posterior_model_probs(priors: &[f64], log_evidences: &[f64]) -> Result<Vec<f64>> {
    if priors.len() != log_evidences.len() || priors.len() < 2 {
        return Err(Error::Domain(format!(
            "need matching prior and evidence vectors of length >= 2, got {} and {}",
            priors.len(),
            log_evidences.len()
        )));
    }
    if priors.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::Domain("prior probabilities must be finite and non-negative".into()));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("prior probabilities sum to {total}, not 1")));
    }
    if log_evidences.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::PosteriorUndefined("log evidences must be finite or -inf".into()));
    }
    let terms: Vec<f64> = priors.iter().zip(log_evidences).map(|(p, e)| p.ln() + e).collect();
    let z = log_sum_exp(&terms);
    if z == f64::NEG_INFINITY {
        return Err(Error::PosteriorUndefined("every model has zero evidence (or zero prior mass)".into()));
    }
    Ok(terms.iter().map(|t| (t - z).exp()).collect())
}

/// Matrix of log B_ji = log Z_j − log Z_i.
pub fn log_bayes_factors(log_evidences: &[f64]) -> Vec<Vec<f64>> {
    log_evidences.iter().map(|zj| log_evidences.iter().map(|zi| zj - zi).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seg(family: Family, prior: &str) -> SegmentPrior {
        SegmentPrior::new(family, vec![prior.parse().unwrap()]).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        let g = DistributionSpec::gamma(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(conjugate_segment_log_marginal(Family::Poisson, &g, &[1.0]).unwrap(), 0.25f64.ln(), epsilon = 1e-12);
        let zeros = vec![0.0; 100];
        assert_abs_diff_eq!(
            conjugate_segment_log_marginal(Family::Poisson, &g, &zeros).unwrap(),
            -2.0 * 101f64.ln(),
            epsilon = 1e-12
        );
        let b = DistributionSpec::beta(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(conjugate_segment_log_marginal(Family::Geometric, &b, &[0.0]).unwrap(), 0.5f64.ln(), epsilon = 1e-12);
        assert!(conjugate_segment_log_marginal(Family::Poisson, &b, &[0.0]).is_err());
    }

    #[test]
    fn posterior_examples() {
        let p = posterior_model_probs(&[0.47, 0.53], &[12.39f64.ln(), 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], 1.0 / (1.0 + (0.53 / 0.47) / 12.39), epsilon = 1e-12);
        let p = posterior_model_probs(&[1.0 / 3.0; 3], &[-5.0; 3]).unwrap();
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
        assert!(posterior_model_probs(&[0.5, 0.5], &[f64::NEG_INFINITY; 2]).is_err());
    }

    #[test]
    fn single_location_point_mass() {
        let s = seg(Family::Poisson, "gamma:2,1");
        let post = location_posterior(&[s.clone(), s], &[1.0, 3.0], &EvidenceConfig::default()).unwrap();
        assert_eq!(post.len(), 1);
        assert_eq!(post.support()[0].locations(), &[1]);
    }

    #[test]
    fn out_of_support_gives_zero_evidence() {
        let s = SegmentPrior::fixed(&DistributionSpec::lognormal(0.0, 1.0).unwrap());
        let r = log_evidence(&[s], &[1.0, 0.0], &EvidenceConfig::default()).unwrap();
        assert_eq!(r.log_evidence, f64::NEG_INFINITY);
        assert!(!r.diagnostics.is_empty());
    }
}
