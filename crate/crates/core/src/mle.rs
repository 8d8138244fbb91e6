//! Segment maximum-likelihood fits and the Schwarz approximation to log
//! Bayes factors, with change-point locations profiled out by exhaustive
//! scan.

use serde::{Deserialize, Serialize};

use crate::cp_priors::LocationVector;
use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::numeric::{digamma, ln_factorial, ln_gamma};
use crate::optimize::brent_root;
use crate::parallel::map_indexed;

/// Prefix sums of the sufficient statistics used by the closed-form fits.
pub struct SuffStats {
    sum: Vec<f64>,
    sum_ln: Vec<f64>,
    sum_ln2: Vec<f64>,
    sum_ln_fact: Vec<f64>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    len: f64,
    sum: f64,
    sum_ln: f64,
    sum_ln2: f64,
    sum_ln_fact: f64,
}

impl SuffStats {
    pub fn new(data: &[f64]) -> Self {
        let n = data.len();
        let mut s = SuffStats {
            sum: Vec::with_capacity(n + 1),
            sum_ln: Vec::with_capacity(n + 1),
            sum_ln2: Vec::with_capacity(n + 1),
            sum_ln_fact: Vec::with_capacity(n + 1),
            data: data.to_vec(),
        };
        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        s.sum.push(a);
        s.sum_ln.push(b);
        s.sum_ln2.push(c);
        s.sum_ln_fact.push(d);
        for &x in data {
            a += x;
            if x > 0.0 {
                let l = x.ln();
                b += l;
                c += l * l;
            }
            if x >= 0.0 && x.fract() == 0.0 {
                d += ln_factorial(x);
            }
            s.sum.push(a);
            s.sum_ln.push(b);
            s.sum_ln2.push(c);
            s.sum_ln_fact.push(d);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn moments(&self, a: usize, b: usize) -> Moments {
        Moments {
            len: (b - a) as f64,
            sum: self.sum[b] - self.sum[a],
            sum_ln: self.sum_ln[b] - self.sum_ln[a],
            sum_ln2: self.sum_ln2[b] - self.sum_ln2[a],
            sum_ln_fact: self.sum_ln_fact[b] - self.sum_ln_fact[a],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentFit {
    pub spec: DistributionSpec,
    pub log_likelihood: f64,
}

/// MLE of `family` on data[a..b]. Segments whose MLE sits on the boundary of
/// the parameter space (zero variance, all-zero counts) are reported as
/// errors.
pub fn segment_mle_range(family: Family, stats: &SuffStats, a: usize, b: usize) -> Result<SegmentFit> {
    if b <= a {
        return Err(Error::Domain("empty segment".into()));
    }
    let seg = &stats.data[a..b];
    let support = crate::distributions::DistributionSpec::new(family, probe(family))?;
    if let Some(x) = seg.iter().find(|x| !support.in_support(**x)) {
        return Err(Error::Data(format!("{x} is outside the {family} support")));
    }
    let m = stats.moments(a, b);
    let l = m.len;
    let mean = m.sum / l;
    let degenerate = |what: &str| Error::Infeasible(format!("{family} MLE on a segment of {} points: {what}", b - a));
    match family {
        Family::Poisson => {
            if mean <= 0.0 {
                return Err(degenerate("all counts are zero"));
            }
            let ll = m.sum * mean.ln() - l * mean - m.sum_ln_fact;
            Ok(SegmentFit { spec: DistributionSpec::poisson(mean)?, log_likelihood: ll })
        }
        Family::Geometric => {
            if mean <= 0.0 {
                return Err(degenerate("all counts are zero"));
            }
            let p = 1.0 / (1.0 + mean);
            let ll = l * p.ln() + m.sum * (1.0 - p).ln();
            Ok(SegmentFit { spec: DistributionSpec::geometric(p)?, log_likelihood: ll })
        }
        Family::LogNormal => {
            let mu = m.sum_ln / l;
            let var = m.sum_ln2 / l - mu * mu;
            if !(var > 1e-12 * (1.0 + mu * mu)) {
                return Err(degenerate("log-values have zero variance"));
            }
            let tau = 1.0 / var;
            let ll = -0.5 * l * (2.0 * std::f64::consts::PI * var).ln() - m.sum_ln - 0.5 * l;
            Ok(SegmentFit { spec: DistributionSpec::lognormal(mu, tau)?, log_likelihood: ll })
        }
        Family::Gamma => {
            let mean_ln = m.sum_ln / l;
            let s = mean.ln() - mean_ln;
            if !(s > 1e-12) {
                return Err(degenerate("values are all equal"));
            }
            // ln α − ψ(α) = s is decreasing in α
            let f = |la: f64| {
                let a = la.exp();
                a.ln() - digamma(a) - s
            };
            let la = brent_root(f, -20.0, 30.0, 1e-13, 200)?;
            let alpha = la.exp();
            let beta = alpha / mean;
            let ll = l * (alpha * beta.ln() - ln_gamma(alpha)) + (alpha - 1.0) * m.sum_ln - beta * m.sum;
            Ok(SegmentFit { spec: DistributionSpec::gamma(alpha, beta)?, log_likelihood: ll })
        }
        Family::Weibull => weibull_mle(seg, m.sum_ln / l),
        other => Err(Error::Unsupported(format!("no maximum-likelihood fit for {other}"))),
    }
}

fn probe(family: Family) -> &'static [f64] {
    match family {
        Family::Geometric => &[0.5],
        Family::Poisson => &[1.0],
        Family::StudentT => &[3.0],
        Family::Normal => &[0.0, 1.0],
        _ => &[1.0, 1.0],
    }
}

/// Weibull MLE by a root in the shape κ of the profile score
/// Σ xᵏ ln x / Σ xᵏ − 1/κ − mean(ln x) = 0.
fn weibull_mle(seg: &[f64], mean_ln: f64) -> Result<SegmentFit> {
    let l = seg.len() as f64;
    let xmax = seg.iter().cloned().fold(0.0, f64::max);
    let ln_max = xmax.ln();
    // y = ln(x / xmax) ≤ 0 keeps every power bounded
    let ys: Vec<f64> = seg.iter().map(|x| x.ln() - ln_max).collect();
    let my = mean_ln - ln_max;
    if ys.iter().all(|y| (y - ys[0]).abs() < 1e-14) {
        return Err(Error::Infeasible(format!("Weibull MLE on a segment of {} equal points", seg.len())));
    }
    let sums = |k: f64| {
        let (mut s0, mut s1) = (0.0, 0.0);
        for &y in &ys {
            let e = (k * y).exp();
            s0 += e;
            s1 += e * y;
        }
        (s0, s1)
    };
    let score = |lk: f64| {
        let k = lk.exp();
        let (s0, s1) = sums(k);
        s1 / s0 - 1.0 / k - my
    };
    let lk = brent_root(score, (1e-3f64).ln(), (1e4f64).ln(), 1e-13, 300)?;
    let k = lk.exp();
    let (s0, _) = sums(k);
    // λ = xmax·(s0/L)^{1/κ}
    let ln_lambda = ln_max + (s0 / l).ln() / k;
    let ll = l * k.ln() - l * k * ln_lambda + (k - 1.0) * l * mean_ln - l;
    Ok(SegmentFit { spec: DistributionSpec::weibull(ln_lambda.exp(), k)?, log_likelihood: ll })
}

/// MLE of `family` on a whole sample.
pub fn segment_mle(family: Family, data: &[f64]) -> Result<SegmentFit> {
    let s = SuffStats::new(data);
    segment_mle_range(family, &s, 0, data.len())
}

/// Maximised log-likelihood of a segmented model over segment parameters and
/// locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub families: Vec<Family>,
    pub max_log_likelihood: f64,
    /// Continuous parameter count (locations excluded).
    pub dim: usize,
    pub locations: Option<LocationVector>,
    pub segments: Vec<DistributionSpec>,
}

/// Fit `families` (one per segment, at most three) to the data, scanning all
/// location vectors whose segments have at least `min_segment` points.
pub fn profile_fit(families: &[Family], data: &[f64], min_segment: usize, threads: usize) -> Result<ProfileFit> {
    let n = data.len();
    let k = families.len().checked_sub(1).ok_or_else(|| Error::Domain("no segment families given".into()))?;
    let min_segment = min_segment.max(1);
    if k > 2 {
        return Err(Error::Unsupported(format!("location scan supports at most 2 change points, got {k}")));
    }
    if n < (k + 1) * min_segment {
        return Err(Error::Domain(format!(
            "n = {n} cannot hold {} segments of at least {min_segment} points",
            k + 1
        )));
    }
    let stats = SuffStats::new(data);
    let dim = families.iter().map(|f| f.arity()).sum();
    let fit = |f: Family, a: usize, b: usize| segment_mle_range(f, &stats, a, b).ok();
    let finish = |ll: f64, m: Option<LocationVector>, segs: Vec<DistributionSpec>| {
        if ll.is_finite() {
            Ok(ProfileFit { families: families.to_vec(), max_log_likelihood: ll, dim, locations: m, segments: segs })
        } else {
            Err(Error::NonConvergence(format!("no admissible segmentation for {families:?}")))
        }
    };
    match k {
        0 => {
            let f = segment_mle_range(families[0], &stats, 0, n)?;
            finish(f.log_likelihood, None, vec![f.spec])
        }
        1 => {
            let mut best: Option<(f64, usize, Vec<DistributionSpec>)> = None;
            for m in min_segment..=n - min_segment {
                if let (Some(a), Some(b)) = (fit(families[0], 0, m), fit(families[1], m, n)) {
                    let ll = a.log_likelihood + b.log_likelihood;
                    if best.as_ref().is_none_or(|b| ll > b.0) {
                        best = Some((ll, m, vec![a.spec, b.spec]));
                    }
                }
            }
            let (ll, m, segs) = best.ok_or_else(|| Error::NonConvergence("no admissible single break".into()))?;
            finish(ll, Some(LocationVector::new(vec![m], n)?), segs)
        }
        _ => {
            let first: Vec<Option<SegmentFit>> = map_indexed(threads, n, |m| if m >= min_segment { fit(families[0], 0, m) } else { None });
            let last: Vec<Option<SegmentFit>> =
                map_indexed(threads, n, |m| if m > 0 && n - m >= min_segment { fit(families[2], m, n) } else { None });
            let hi = n - 2 * min_segment;
            let rows: Vec<Option<(f64, usize, usize, Vec<DistributionSpec>)>> =
                map_indexed(threads, hi + 1 - min_segment.min(hi + 1), |r| {
                    let m1 = r + min_segment;
                    let a = first[m1].as_ref()?;
                    let mut best: Option<(f64, usize, usize, Vec<DistributionSpec>)> = None;
                    for m2 in m1 + min_segment..=n - min_segment {
                        let Some(c) = last[m2].as_ref() else { continue };
                        let Some(b) = fit(families[1], m1, m2) else { continue };
                        let ll = a.log_likelihood + b.log_likelihood + c.log_likelihood;
                        if best.as_ref().is_none_or(|x| ll > x.0) {
                            best = Some((ll, m1, m2, vec![a.spec, b.spec, c.spec]));
                        }
                    }
                    best
                });
            let mut best: Option<(f64, usize, usize, Vec<DistributionSpec>)> = None;
            for r in rows.into_iter().flatten() {
                if best.as_ref().is_none_or(|b| r.0 > b.0) {
                    best = Some(r);
                }
            }
            let (ll, m1, m2, segs) = best.ok_or_else(|| Error::NonConvergence("no admissible pair of breaks".into()))?;
            finish(ll, Some(LocationVector::new(vec![m1, m2], n)?), segs)
        }
    }
}

/// log B̂_ij = (ℓ̂_i − ℓ̂_j) − ½ (d_i − d_j) ln n.
pub fn schwarz_from_fits(fit_i: &ProfileFit, fit_j: &ProfileFit, n: usize) -> f64 {
    let dd = fit_i.dim as f64 - fit_j.dim as f64;
    (fit_i.max_log_likelihood - fit_j.max_log_likelihood) - 0.5 * dd * (n as f64).ln()
}

/// Schwarz approximation to the log Bayes factor of model i against model j.
pub fn schwarz_log_bayes_factor(model_i: &[Family], model_j: &[Family], data: &[f64], min_segment: usize) -> Result<f64> {
    let fi = profile_fit(model_i, data, min_segment, 1)?;
    if model_i == model_j {
        return Ok(0.0);
    }
    let fj = profile_fit(model_j, data, min_segment, 1)?;
    Ok(schwarz_from_fits(&fi, &fj, data.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_abs_diff_eq;

    fn brute_ll(spec: &DistributionSpec, data: &[f64]) -> f64 {
        data.iter().map(|x| spec.log_density(*x)).sum()
    }

    #[test]
    fn fits_maximise_likelihood() {
        let mut rng = seeded(3);
        let cases = [
            (Family::Weibull, DistributionSpec::weibull(1.5, 5.0).unwrap()),
            (Family::Gamma, DistributionSpec::gamma(10.0, 2.0).unwrap()),
            (Family::LogNormal, DistributionSpec::lognormal(0.05, 16.0).unwrap()),
            (Family::Poisson, DistributionSpec::poisson(3.0).unwrap()),
            (Family::Geometric, DistributionSpec::geometric(0.3).unwrap()),
        ];
        for (fam, truth) in cases {
            let x = truth.sample(400, &mut rng);
            let fit = segment_mle(fam, &x).unwrap();
            assert_abs_diff_eq!(fit.log_likelihood, brute_ll(&fit.spec, &x), epsilon = 1e-8);
            // perturbing any parameter lowers the likelihood
            for i in 0..fam.arity() {
                for f in [0.99, 1.01] {
                    let mut p = fit.spec.params().to_vec();
                    p[i] *= f;
                    let q = DistributionSpec::new(fam, &p).unwrap();
                    assert!(brute_ll(&q, &x) < fit.log_likelihood, "{fam} param {i}");
                }
            }
        }
    }

    #[test]
    fn scan_finds_jump() {
        let mut rng = seeded(9);
        let mut x = DistributionSpec::lognormal(0.0, 4.0).unwrap().sample(60, &mut rng);
        x.extend(DistributionSpec::lognormal(3.0, 4.0).unwrap().sample(60, &mut rng));
        let f1 = profile_fit(&[Family::LogNormal, Family::LogNormal], &x, 5, 1).unwrap();
        assert_eq!(f1.locations.unwrap().locations(), &[60]);
        let lb = schwarz_log_bayes_factor(&[Family::LogNormal], &[Family::LogNormal, Family::LogNormal], &x, 5).unwrap();
        assert!(lb < -20.0);
        let back = schwarz_log_bayes_factor(&[Family::LogNormal, Family::LogNormal], &[Family::LogNormal], &x, 5).unwrap();
        assert_eq!(lb, -back);
        let f2 = profile_fit(&[Family::LogNormal; 3], &x, 5, 2).unwrap();
        assert!(f2.max_log_likelihood >= f1.max_log_likelihood);
    }
}
