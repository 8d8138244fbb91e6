//! Loss-based prior probabilities over the number of change points.
//!
//! Models are nested: M_j has change points m₁ < … < m_j and segment
//! densities f₁, …, f_{j+1}, sharing the first j segments and locations with
//! M_{j−1}. For j ≠ i the divergence between the two models splits into
//! per-segment terms,
//!
//! ```text
//! D(M_j‖M_i) = Σ_{q=j+1}^{i} (m_{q+1} − m_q)·KL(f_{j+1}‖f_{q+1})   (i > j)
//! D(M_j‖M_i) = Σ_{q=i+1}^{j} (m_{q+1} − m_q)·KL(f_{q+1}‖f_{i+1})   (i < j)
//! ```
//!
//! with m_{max(i,j)+1} = n. The score of M_j is the minimum over competitors
//! i of E_{π_j}[inf D(M_j‖M_i)], where the infimum runs over i's free
//! parameters. Against a richer competitor the extra locations are free and
//! each run length drops to 1; against a poorer one M_j's own run lengths
//! stay inside the expectation. Pr(M_j) ∝ exp(score_j).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cp_priors::{shifted_binomial_prior, LocationVector, UniformLocationPrior};
use crate::distributions::{split_literal, DistributionSpec, Family};
use crate::divergence::{inf_kl, kl, Direction, InfKlConfig};
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::parallel::map_indexed;
use crate::rng::{substream, Rng, DEFAULT_SEED};

/// Prior on one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamPrior {
    Dist(DistributionSpec),
    /// offset + draw, e.g. 2 + Poisson(30) for Student-t degrees of freedom.
    Shifted { offset: f64, dist: DistributionSpec },
    /// Point mass.
    Fixed(f64),
}

impl ParamPrior {
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            ParamPrior::Dist(d) => d.sample_one(rng),
            ParamPrior::Shifted { offset, dist } => offset + dist.sample_one(rng),
            ParamPrior::Fixed(v) => *v,
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, ParamPrior::Fixed(_))
    }

    /// The distribution behind the prior, if not a point mass.
    pub fn dist(&self) -> Option<&DistributionSpec> {
        match self {
            ParamPrior::Dist(d) | ParamPrior::Shifted { dist: d, .. } => Some(d),
            ParamPrior::Fixed(_) => None,
        }
    }

    /// Finite list of (value, mass) covering all but `tail` of a count prior's
    /// mass, renormalised. None for continuous priors.
    pub fn atoms(&self, tail: f64) -> Option<Vec<(f64, f64)>> {
        let (offset, d) = match self {
            ParamPrior::Fixed(v) => return Some(vec![(*v, 1.0)]),
            ParamPrior::Dist(d) => (0.0, d),
            ParamPrior::Shifted { offset, dist } => (*offset, dist),
        };
        if !d.is_discrete() {
            return None;
        }
        let mean = d.mean().ok()?;
        let mut out = Vec::new();
        let mut covered = 0.0;
        let mut x = 0u64;
        while covered < 1.0 - tail || (x as f64) < mean {
            let w = d.log_density(x as f64).exp();
            if w > 0.0 {
                out.push((offset + x as f64, w));
            }
            covered += w;
            x += 1;
            if x > 10_000_000 {
                break;
            }
        }
        let total: f64 = out.iter().map(|a| a.1).sum();
        // drop negligible atoms on the far side of the mode
        out.retain(|a| a.1 > tail * 1e-3 * total);
        let total: f64 = out.iter().map(|a| a.1).sum();
        Some(out.into_iter().map(|(v, w)| (v, w / total)).collect())
    }
}

impl fmt::Display for ParamPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamPrior::Dist(d) => write!(f, "{d}"),
            ParamPrior::Shifted { offset, dist } => write!(f, "{offset}+{dist}"),
            ParamPrior::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl FromStr for ParamPrior {
    type Err = Error;

    /// `gamma:1.5,1`, `fixed:10` or `2+poisson:30`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, nums) = split_literal(s)?;
        if name.eq_ignore_ascii_case("fixed") {
            return match nums.as_slice() {
                [v] if v.is_finite() => Ok(ParamPrior::Fixed(*v)),
                _ => Err(Error::Parse(format!("'fixed' takes one finite value, got '{s}'"))),
            };
        }
        if let Some((off, rest)) = name.split_once('+') {
            let offset: f64 = off
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad offset '{}' in '{s}'", off.trim())))?;
            let dist = DistributionSpec::new(rest.trim().parse()?, &nums)?;
            return Ok(ParamPrior::Shifted { offset, dist });
        }
        Ok(ParamPrior::Dist(DistributionSpec::new(name.parse()?, &nums)?))
    }
}

impl Serialize for ParamPrior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ParamPrior {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A segment family with a prior on each of its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPrior {
    pub family: Family,
    pub params: Vec<ParamPrior>,
}

const MAX_REJECTIONS: usize = 10_000;

impl SegmentPrior {
    pub fn new(family: Family, params: Vec<ParamPrior>) -> Result<Self> {
        if params.len() != family.arity() {
            return Err(Error::ParameterDomain(format!(
                "{family} needs {} parameter prior(s), got {}",
                family.arity(),
                params.len()
            )));
        }
        let seg = SegmentPrior { family, params };
        if seg.is_fixed() {
            seg.fixed_spec()?;
        }
        Ok(seg)
    }

    /// Point masses at the parameters of `d`.
    pub fn fixed(d: &DistributionSpec) -> Self {
        SegmentPrior { family: d.family(), params: d.params().iter().map(|&v| ParamPrior::Fixed(v)).collect() }
    }

    pub fn is_fixed(&self) -> bool {
        self.params.iter().all(ParamPrior::is_fixed)
    }

    fn fixed_spec(&self) -> Result<DistributionSpec> {
        let v: Vec<f64> = self.params.iter().map(|p| if let ParamPrior::Fixed(v) = p { *v } else { f64::NAN }).collect();
        DistributionSpec::new(self.family, &v)
    }

    /// One parameter draw. Draws outside the family's parameter domain are
    /// rejected, which truncates the prior to the domain.
    pub fn draw(&self, rng: &mut Rng) -> Result<DistributionSpec> {
        for _ in 0..MAX_REJECTIONS {
            let v: Vec<f64> = self.params.iter().map(|p| p.sample(rng)).collect();
            if let Ok(d) = DistributionSpec::new(self.family, &v) {
                return Ok(d);
            }
        }
        Err(Error::PriorUndefined(format!(
            "prior on {} puts (almost) no mass on valid parameters",
            self.family
        )))
    }

    /// Exact atoms when every parameter prior is a point mass or a count
    /// distribution; None if any parameter prior is continuous.
    pub fn atoms(&self, tail: f64) -> Option<Vec<(DistributionSpec, f64)>> {
        let per: Vec<Vec<(f64, f64)>> = self.params.iter().map(|p| p.atoms(tail)).collect::<Option<_>>()?;
        let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for list in &per {
            out = out
                .iter()
                .flat_map(|(v, w)| {
                    list.iter().map(move |(x, wx)| {
                        let mut v2 = v.clone();
                        v2.push(*x);
                        (v2, w * wx)
                    })
                })
                .collect();
        }
        let mut res: Vec<(DistributionSpec, f64)> = out
            .into_iter()
            .filter_map(|(v, w)| DistributionSpec::new(self.family, &v).ok().map(|d| (d, w)))
            .collect();
        let total: f64 = res.iter().map(|a| a.1).sum();
        if total <= 0.0 {
            return None;
        }
        res.iter_mut().for_each(|a| a.1 /= total);
        Some(res)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationPriorKind {
    #[default]
    Uniform,
    ShiftedBinomial,
}

impl FromStr for LocationPriorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" => Ok(LocationPriorKind::Uniform),
            "shifted_binomial" => Ok(LocationPriorKind::ShiftedBinomial),
            other => Err(Error::Parse(format!("unknown location prior '{other}' (uniform | shifted_binomial)"))),
        }
    }
}

impl fmt::Display for LocationPriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocationPriorKind::Uniform => "uniform",
            LocationPriorKind::ShiftedBinomial => "shifted_binomial",
        })
    }
}

/// Models M₀ … M_K where M_j uses the first j+1 segment priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedModelSequence {
    pub segments: Vec<SegmentPrior>,
    pub location_prior: LocationPriorKind,
}

impl NestedModelSequence {
    pub fn new(segments: Vec<SegmentPrior>, location_prior: LocationPriorKind) -> Result<Self> {
        if segments.len() < 2 {
            return Err(Error::Domain("a model sequence needs at least two segments (K >= 1)".into()));
        }
        Ok(NestedModelSequence { segments, location_prior })
    }

    /// Largest number of change points, K.
    pub fn max_changes(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn families(&self) -> Vec<Family> {
        self.segments.iter().map(|s| s.family).collect()
    }

    pub fn all_families_equal(&self) -> bool {
        self.segments.windows(2).all(|w| w[0].family == w[1].family)
    }

    /// Expected run length E[m_{q+1} − m_q] under model j's location prior,
    /// for q = 1..=j with m_{j+1} = n.
    pub fn expected_run_length(&self, j: usize, q: usize, n: usize) -> Result<f64> {
        debug_assert!(q >= 1 && q <= j);
        match self.location_prior {
            LocationPriorKind::Uniform => Ok(UniformLocationPrior::new(n, j)?.expected_gap()),
            LocationPriorKind::ShiftedBinomial => {
                if j != 1 {
                    return Err(Error::Unsupported(
                        "the shifted binomial location prior is defined for a single change point only".into(),
                    ));
                }
                two_model_prior_coefficient(LocationPriorKind::ShiftedBinomial, n)
            }
        }
    }
}

/// E[n − m₁] under the single-location prior: n/2 for uniform and (2n−2)/n
/// for the shifted binomial, by exact summation.
pub fn two_model_prior_coefficient(kind: LocationPriorKind, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    match kind {
        LocationPriorKind::Uniform => {
            let s: u128 = (1..n as u128).map(|m| n as u128 - m).sum();
            Ok(s as f64 / (n - 1) as f64)
        }
        LocationPriorKind::ShiftedBinomial => {
            let p = shifted_binomial_prior(n)?;
            Ok(p.expectation(|&m| (n - m) as f64))
        }
    }
}

/// D(M_i‖M_j) for fixed segment densities and the locations `m` of the
/// larger of the two models.
pub fn kl_model_pair(i: usize, j: usize, segments: &[DistributionSpec], m: &LocationVector, tol: f64) -> Result<f64> {
    if i == j {
        return Err(Error::Domain("a model is not compared with itself (i = j)".into()));
    }
    let big = i.max(j);
    if m.k() != big {
        return Err(Error::Domain(format!("need the {big} locations of the larger model, got {}", m.k())));
    }
    if segments.len() < big + 1 {
        return Err(Error::Domain(format!("need {} segment densities, got {}", big + 1, segments.len())));
    }
    let n = m.n();
    // loc(q) = m_q with m_{big+1} = n, 1-based q
    let loc = |q: usize| if q == big + 1 { n } else { m.locations()[q - 1] };
    let small = i.min(j);
    let mut total = 0.0;
    for q in small + 1..=big {
        let run = (loc(q + 1) - loc(q)) as f64;
        let (p, r) = if i < j { (&segments[i], &segments[q]) } else { (&segments[q], &segments[j]) };
        if p != r {
            total += run * kl(p, r, tol)?.value;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    /// Parameter draws per segment.
    pub draws: usize,
    pub seed: u64,
    pub inf: InfKlConfig,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { draws: 5000, seed: DEFAULT_SEED, inf: InfKlConfig::default(), threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPriorResult {
    pub probs: Vec<f64>,
    /// Expected minimum divergence per model (log of the unnormalised prior).
    pub log_scores: Vec<f64>,
    /// exp(log_scores); may overflow to +∞ for large samples.
    pub raw_scores: Vec<f64>,
    /// Monte Carlo standard error of each log score.
    pub mc_se: Vec<f64>,
    /// Competitor attaining each model's minimum.
    pub nearest: Vec<Option<usize>>,
    /// False if any infimum inside a score stopped before convergence.
    pub converged: Vec<bool>,
    pub draws: usize,
}

/// Per-draw infima of KL from each segment density to every other segment
/// family, with the draw weights.
struct InfTable {
    /// weights[s][d]
    weights: Vec<Vec<f64>>,
    /// values[s][t][d] = inf over family t of KL(f_s(θ_d)‖·)
    values: Vec<Vec<Vec<f64>>>,
    converged: Vec<Vec<Vec<bool>>>,
    /// Raw draws behind each segment (0 when exact).
    raw_draws: Vec<usize>,
}

fn segment_draws(seg: &SegmentPrior, s: usize, cfg: &McConfig) -> Result<(Vec<DistributionSpec>, Vec<f64>, usize)> {
    if seg.is_fixed() {
        return Ok((vec![seg.fixed_spec()?], vec![1.0], 0));
    }
    let tag = format!("model-prior-seg{s}");
    let draws: Vec<DistributionSpec> =
        (0..cfg.draws).map(|d| seg.draw(&mut substream(cfg.seed, &tag, d as u64))).collect::<Result<_>>()?;
    // merge repeated draws (count-valued priors) into weighted atoms
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut specs = Vec::new();
    let mut weights = Vec::new();
    for d in draws {
        let key: Vec<u64> = d.params().iter().map(|v| v.to_bits()).collect();
        match index.get(&key) {
            Some(&i) => weights[i] += 1.0,
            None => {
                index.insert(key, specs.len());
                specs.push(d);
                weights.push(1.0);
            }
        }
    }
    let n = cfg.draws as f64;
    weights.iter_mut().for_each(|w| *w /= n);
    Ok((specs, weights, cfg.draws))
}

fn build_table(seq: &NestedModelSequence, cfg: &McConfig, needed: &[Vec<bool>]) -> Result<InfTable> {
    let k1 = seq.segments.len();
    let mut weights = Vec::with_capacity(k1);
    let mut values = Vec::with_capacity(k1);
    let mut converged = Vec::with_capacity(k1);
    let mut raw = Vec::with_capacity(k1);
    for (s, seg) in seq.segments.iter().enumerate() {
        let (specs, w, n_raw) = segment_draws(seg, s, cfg)?;
        let mut vs = vec![Vec::new(); k1];
        let mut cs = vec![Vec::new(); k1];
        for t in 0..k1 {
            if !needed[s][t] {
                continue;
            }
            let target = seq.segments[t].family;
            let res: Vec<Result<(f64, bool)>> = map_indexed(cfg.threads, specs.len(), |d| {
                let r = inf_kl(&specs[d], target, Direction::PToQ, &cfg.inf)?;
                Ok((r.value, r.converged))
            });
            let res: Vec<(f64, bool)> = res.into_iter().collect::<Result<_>>()?;
            vs[t] = res.iter().map(|r| r.0).collect();
            cs[t] = res.iter().map(|r| r.1).collect();
        }
        weights.push(w);
        values.push(vs);
        converged.push(cs);
        raw.push(n_raw);
    }
    Ok(InfTable { weights, values, converged, raw_draws: raw })
}

/// Weighted mean and standard error of a per-draw quantity on segment s.
fn weighted_mean_se(w: &[f64], v: &[f64], raw: usize) -> (f64, f64) {
    let mean: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
    if raw <= 1 || !mean.is_finite() {
        return (mean, 0.0);
    }
    let var: f64 = w.iter().zip(v).map(|(a, b)| a * (b - mean).powi(2)).sum::<f64>() * raw as f64 / (raw as f64 - 1.0);
    (mean, (var / raw as f64).sqrt())
}

/// Terms of E_{π_j}[inf D(M_j‖M_i)] as (run-length weight, source segment,
/// target segment) triples.
fn competitor_terms(seq: &NestedModelSequence, j: usize, i: usize, n: usize) -> Result<Vec<(f64, usize, usize)>> {
    let mut terms = Vec::new();
    if i > j {
        for q in j + 1..=i {
            terms.push((1.0, j, q));
        }
    } else {
        for q in i + 1..=j {
            terms.push((seq.expected_run_length(j, q, n)?, q, i));
        }
    }
    Ok(terms)
}

/// E_{π_j}[inf D(M_j‖M_i)] for every competitor i, and the minimum.
fn scores_from_table(seq: &NestedModelSequence, table: &InfTable, j: usize, n: usize) -> Result<(f64, f64, Option<usize>, bool)> {
    let k1 = seq.segments.len();
    let mut best: (f64, f64, Option<usize>, bool) = (f64::INFINITY, 0.0, None, true);
    for i in (0..k1).filter(|&i| i != j) {
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut conv = true;
        // Terms drawing on different segments are independent; terms on the
        // same source segment share draws, so combine them per draw first.
        let terms = competitor_terms(seq, j, i, n)?;
        let mut by_source: HashMap<usize, Vec<(f64, usize)>> = HashMap::new();
        for (w, s, t) in terms {
            by_source.entry(s).or_default().push((w, t));
        }
        let mut sources: Vec<_> = by_source.into_iter().collect();
        sources.sort_by_key(|e| e.0);
        for (s, list) in sources {
            let nd = table.weights[s].len();
            let per_draw: Vec<f64> = (0..nd)
                .map(|d| {
                    list.iter()
                        .map(|&(w, t)| {
                            if seq.segments[s].family == seq.segments[t].family {
                                0.0
                            } else {
                                w * table.values[s][t][d]
                            }
                        })
                        .sum()
                })
                .collect();
            for &(_, t) in &list {
                if !table.converged[s][t].is_empty() {
                    conv &= table.converged[s][t].iter().all(|c| *c);
                }
            }
            let (m, se) = weighted_mean_se(&table.weights[s], &per_draw, table.raw_draws[s]);
            mean += m;
            var += se * se;
        }
        if mean < best.0 || best.2.is_none() {
            best = (mean, var.sqrt(), Some(i), conv);
        }
    }
    Ok(best)
}

fn needed_pairs(seq: &NestedModelSequence) -> Vec<Vec<bool>> {
    let k1 = seq.segments.len();
    let mut need = vec![vec![false; k1]; k1];
    for j in 0..k1 {
        for i in (0..k1).filter(|&i| i != j) {
            let (lo, hi) = (i.min(j), i.max(j));
            for q in lo + 1..=hi {
                let (s, t) = if i > j { (j, q) } else { (q, i) };
                if seq.segments[s].family != seq.segments[t].family {
                    need[s][t] = true;
                }
            }
        }
    }
    need
}

/// Score of model j: min over competitors of E_{π_j}[inf D(M_j‖M_i)], with
/// its Monte Carlo standard error.
pub fn expected_min_inf_kl(j: usize, seq: &NestedModelSequence, n: usize, cfg: &McConfig) -> Result<(f64, f64)> {
    if j > seq.max_changes() {
        return Err(Error::Domain(format!("model index {j} exceeds K = {}", seq.max_changes())));
    }
    if cfg.draws < 100 && seq.segments.iter().any(|s| !s.is_fixed()) {
        return Err(Error::Domain(format!("need at least 100 parameter draws, got {}", cfg.draws)));
    }
    let table = build_table(seq, cfg, &needed_pairs(seq))?;
    let (score, se, _, _) = scores_from_table(seq, &table, j, n)?;
    Ok((score, se))
}

/// Normalised model prior probabilities, computed in log space.
pub fn model_prior_probabilities(seq: &NestedModelSequence, n: usize, cfg: &McConfig) -> Result<ModelPriorResult> {
    let k1 = seq.segments.len();
    if n < k1 {
        return Err(Error::Domain(format!("n = {n} is too small for {} change points", k1 - 1)));
    }
    if seq.all_families_equal() {
        let u = 1.0 / k1 as f64;
        return Ok(ModelPriorResult {
            probs: vec![u; k1],
            log_scores: vec![0.0; k1],
            raw_scores: vec![1.0; k1],
            mc_se: vec![0.0; k1],
            nearest: vec![None; k1],
            converged: vec![true; k1],
            draws: 0,
        });
    }
    if cfg.draws < 100 && seq.segments.iter().any(|s| !s.is_fixed()) {
        return Err(Error::Domain(format!("need at least 100 parameter draws, got {}", cfg.draws)));
    }
    let table = build_table(seq, cfg, &needed_pairs(seq))?;
    let mut log_scores = Vec::with_capacity(k1);
    let mut mc_se = Vec::with_capacity(k1);
    let mut nearest = Vec::with_capacity(k1);
    let mut converged = Vec::with_capacity(k1);
    for j in 0..k1 {
        let (s, se, i, c) = scores_from_table(seq, &table, j, n)?;
        log_scores.push(s);
        mc_se.push(se);
        nearest.push(i);
        converged.push(c);
    }
    let probs = normalise_log_scores(&log_scores);
    let draws = table.raw_draws.iter().copied().max().unwrap_or(0);
    Ok(ModelPriorResult {
        raw_scores: log_scores.iter().map(|s| s.exp()).collect(),
        probs,
        log_scores,
        mc_se,
        nearest,
        converged,
        draws,
    })
}

/// exp-normalise; any +∞ scores share all the mass equally.
pub fn normalise_log_scores(log_scores: &[f64]) -> Vec<f64> {
    let inf = log_scores.iter().filter(|s| **s == f64::INFINITY).count();
    if inf > 0 {
        return log_scores.iter().map(|s| if *s == f64::INFINITY { 1.0 / inf as f64 } else { 0.0 }).collect();
    }
    let z = log_sum_exp(log_scores);
    log_scores.iter().map(|s| (s - z).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn param_prior_literals() {
        let p: ParamPrior = "2+poisson:30".parse().unwrap();
        assert!(matches!(p, ParamPrior::Shifted { offset, .. } if offset == 2.0));
        assert_eq!(p.to_string(), "2+poisson:30");
        assert_eq!("fixed:10".parse::<ParamPrior>().unwrap(), ParamPrior::Fixed(10.0));
        assert!(matches!("gamma:1.5,1".parse::<ParamPrior>().unwrap(), ParamPrior::Dist(_)));
        assert!("fixed:1,2".parse::<ParamPrior>().is_err());
        let atoms = p.atoms(1e-14).unwrap();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(atoms.iter().all(|a| a.0 >= 2.0));
    }

    #[test]
    fn coefficients() {
        assert_eq!(two_model_prior_coefficient(LocationPriorKind::Uniform, 100).unwrap(), 50.0);
        assert_abs_diff_eq!(two_model_prior_coefficient(LocationPriorKind::ShiftedBinomial, 100).unwrap(), 1.98, epsilon = 1e-12);
        assert_eq!(two_model_prior_coefficient(LocationPriorKind::ShiftedBinomial, 2).unwrap(), 1.0);
    }

    #[test]
    fn model_pair_examples() {
        let segs: Vec<DistributionSpec> = vec!["weibull:1.5,5".parse().unwrap(), "lognormal:0.05,16".parse().unwrap()];
        let m = LocationVector::new(vec![50], 100).unwrap();
        let v = kl_model_pair(0, 1, &segs, &m, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 50.0 * kl(&segs[0], &segs[1], 1e-12).unwrap().value, epsilon = 1e-12);
        assert!(kl_model_pair(1, 1, &segs, &m, 1e-12).is_err());
        let p = DistributionSpec::poisson(2.0).unwrap();
        let m2 = LocationVector::new(vec![30, 60], 100).unwrap();
        assert_eq!(kl_model_pair(0, 2, &[p, p, p], &m2, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn equal_families_give_uniform() {
        let seg = |l: f64| SegmentPrior::new(Family::StudentT, vec![ParamPrior::Shifted { offset: 2.0, dist: DistributionSpec::poisson(l).unwrap() }]).unwrap();
        let seq = NestedModelSequence::new(vec![seg(30.0), seg(3.0), seg(8.0)], LocationPriorKind::Uniform).unwrap();
        let r = model_prior_probabilities(&seq, 300, &McConfig::default()).unwrap();
        assert_eq!(r.probs, vec![1.0 / 3.0; 3]);
        assert_eq!(r.draws, 0);
    }
}
