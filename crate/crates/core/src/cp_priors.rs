//! Priors on change-point locations: the generic loss-based construction on a
//! discrete parameter, the uniform prior over k-subsets, and the shifted
//! binomial prior for a single change point.

use std::fmt;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::divergence::kl;
use crate::error::{Error, Result};
use crate::numeric::{choose_u128, ln_choose, log_sum_exp};
use crate::rng::Rng;

/// Strictly increasing change-point locations 1 ≤ m₁ < … < m_k < n.
///
/// Location m means observations 1..=m belong to the earlier segment and
/// m+1.. to the next. The empty vector is the no-change model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocationVector {
    m: Vec<usize>,
    n: usize,
}

impl LocationVector {
    pub fn new(m: Vec<usize>, n: usize) -> Result<Self> {
        if n < 2 && !m.is_empty() {
            return Err(Error::Domain(format!("need n >= 2 for change points, got n = {n}")));
        }
        for (i, &v) in m.iter().enumerate() {
            if v < 1 || v >= n {
                return Err(Error::Domain(format!("location {v} outside 1..{}", n.saturating_sub(1))));
            }
            if i > 0 && m[i - 1] >= v {
                return Err(Error::Domain(format!("locations must be strictly increasing: {m:?}")));
            }
        }
        Ok(LocationVector { m, n })
    }

    pub fn locations(&self) -> &[usize] {
        &self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.m.len()
    }

    /// Segment boundaries 0 = b₀ < m₁ < … < m_k < b_{k+1} = n.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut b = Vec::with_capacity(self.m.len() + 2);
        b.push(0);
        b.extend_from_slice(&self.m);
        b.push(self.n);
        b
    }

    /// Zero-based segment index of observation `i` (1-based).
    pub fn segment_of(&self, i: usize) -> usize {
        self.m.partition_point(|&v| v < i)
    }
}

impl fmt::Display for LocationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.m.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A finite probability mass function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePrior<T> {
    support: Vec<T>,
    mass: Vec<f64>,
}

impl<T> DiscretePrior<T> {
    /// Normalises non-negative weights.
    pub fn from_weights(support: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::Domain(format!(
                "support of size {} with {} weights",
                support.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::PriorUndefined("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::PriorUndefined("weights sum to zero".into()));
        }
        Ok(DiscretePrior { support, mass: weights.iter().map(|w| w / total).collect() })
    }

    /// Normalises weights given on the log scale.
    pub fn from_log_weights(support: Vec<T>, log_weights: &[f64]) -> Result<Self> {
        let z = log_sum_exp(log_weights);
        if !z.is_finite() {
            return Err(Error::PriorUndefined(format!("log normaliser is {z}")));
        }
        let w = log_weights.iter().map(|l| (l - z).exp()).collect();
        Self::from_weights(support, w)
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.support.iter().zip(self.mass.iter().copied())
    }

    /// Σ mass·f(point).
    pub fn expectation(&self, f: impl Fn(&T) -> f64) -> f64 {
        self.iter().map(|(t, w)| w * f(t)).sum()
    }

    /// Support point with the largest mass (first one on ties).
    pub fn mode(&self) -> &T {
        let mut best = 0;
        for (i, &w) in self.mass.iter().enumerate() {
            if w > self.mass[best] {
                best = i;
            }
        }
        &self.support[best]
    }
}

/// Masses ∝ exp(dᵢ) − 1 from each model's minimum divergence dᵢ to the others.
///
/// All-zero minima give the uniform prior; an infinite minimum leaves the
/// prior undefined.
pub fn loss_based_prior_from_min_kl(min_kl: &[f64]) -> Result<DiscretePrior<usize>> {
    if min_kl.len() < 2 {
        return Err(Error::Domain("a loss-based prior needs at least two models".into()));
    }
    if let Some(i) = min_kl.iter().position(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::PriorUndefined(format!(
            "model {i} has minimum divergence {} to the rest",
            min_kl[i]
        )));
    }
    let support: Vec<usize> = (0..min_kl.len()).collect();
    if min_kl.iter().all(|&d| d == 0.0) {
        return DiscretePrior::from_weights(support, vec![1.0; min_kl.len()]);
    }
    let w: Vec<f64> = min_kl.iter().map(|d| d.exp_m1()).collect();
    if w.iter().any(|x| x.is_infinite()) {
        // normalise in log space when exp overflows
        let lw: Vec<f64> = min_kl.iter().map(|&d| d + (-(-d).exp()).ln_1p()).collect();
        return DiscretePrior::from_log_weights(support, &lw);
    }
    DiscretePrior::from_weights(support, w)
}

/// Loss-based prior over a finite family indexed by position in `models`.
pub fn loss_based_prior(models: &[DistributionSpec], tol: f64) -> Result<DiscretePrior<usize>> {
    if models.len() < 2 {
        return Err(Error::Domain("a loss-based prior needs at least two models".into()));
    }
    let mut min_kl = vec![f64::INFINITY; models.len()];
    for (i, p) in models.iter().enumerate() {
        for (j, q) in models.iter().enumerate() {
            if i != j {
                let v = kl(p, q, tol)?.value;
                min_kl[i] = min_kl[i].min(v);
            }
        }
    }
    loss_based_prior_from_min_kl(&min_kl)
}

/// Uniform prior over all k-subsets of {1, …, n−1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformLocationPrior {
    n: usize,
    k: usize,
}

impl UniformLocationPrior {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need n >= 2, got {n}")));
        }
        if k == 0 || k > n - 1 {
            return Err(Error::Domain(format!("need 1 <= k <= n-1 = {}, got k = {k}", n - 1)));
        }
        Ok(UniformLocationPrior { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of admissible location vectors, C(n−1, k) (saturating).
    pub fn count(&self) -> u128 {
        choose_u128(self.n as u64 - 1, self.k as u64)
    }

    pub fn log_mass(&self) -> f64 {
        -ln_choose(self.n as u64 - 1, self.k as u64)
    }

    /// Mass of `m`; zero for vectors of the wrong shape.
    pub fn mass(&self, m: &LocationVector) -> f64 {
        if m.n() == self.n && m.k() == self.k {
            let c = self.count();
            if c < u128::MAX { 1.0 / c as f64 } else { self.log_mass().exp() }
        } else {
            0.0
        }
    }

    /// Lexicographic enumeration of every admissible vector.
    pub fn enumerate(&self) -> Combinations {
        Combinations { n: self.n, cur: (1..=self.k).collect(), done: false }
    }

    /// One draw: k distinct values from {1, …, n−1}, sorted.
    pub fn sample(&self, rng: &mut Rng) -> LocationVector {
        let mut m: Vec<usize> = index::sample(rng, self.n - 1, self.k).into_iter().map(|i| i + 1).collect();
        m.sort_unstable();
        LocationVector { m, n: self.n }
    }

    /// Explicit table; refuses supports beyond `limit` points.
    pub fn to_discrete(&self, limit: usize) -> Result<DiscretePrior<LocationVector>> {
        if self.count() > limit as u128 {
            return Err(Error::Domain(format!(
                "{} location vectors exceed the enumeration limit {limit}",
                self.count()
            )));
        }
        let support: Vec<LocationVector> = self.enumerate().collect();
        let w = vec![1.0; support.len()];
        DiscretePrior::from_weights(support, w)
    }

    /// E[m_{q+1} − m_q] for q = 0..=k with m₀ = 0 and m_{k+1} = n; every
    /// gap has expectation n/(k+1) by exchangeability of the spacings.
    pub fn expected_gap(&self) -> f64 {
        self.n as f64 / (self.k as f64 + 1.0)
    }
}

/// Iterator over increasing k-subsets of {1, …, n−1}.
pub struct Combinations {
    n: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Iterator for Combinations {
    type Item = LocationVector;

    fn next(&mut self) -> Option<LocationVector> {
        if self.done {
            return None;
        }
        let out = LocationVector { m: self.cur.clone(), n: self.n };
        let k = self.cur.len();
        let top = self.n - 1;
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cur[i] < top - (k - 1 - i) {
                self.cur[i] += 1;
                for j in i + 1..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Shifted binomial prior on a single location m₁ ∈ {1, …, n−1}:
/// mass ∝ C(n−2, m₁−1)·((n−1)/n)^{m₁−1}·(1/n)^{n−m₁−1}.
pub fn shifted_binomial_prior(n: usize) -> Result<DiscretePrior<usize>> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let lp = ((nf - 1.0) / nf).ln();
    let lq = -nf.ln();
    let support: Vec<usize> = (1..n).collect();
    let lw: Vec<f64> = support
        .iter()
        .map(|&m| ln_choose(n as u64 - 2, m as u64 - 1) + (m as f64 - 1.0) * lp + (nf - m as f64 - 1.0) * lq)
        .collect();
    DiscretePrior::from_log_weights(support, &lw)
}

/// KL between the joint laws of two segmentations that share segment
/// densities, summed over maximal runs of observations whose segment
/// assignments differ.
pub fn kl_between_location_vectors(
    a: &LocationVector,
    b: &LocationVector,
    segments: &[DistributionSpec],
    tol: f64,
) -> Result<f64> {
    if a.n() != b.n() || a.k() != b.k() {
        return Err(Error::Domain(format!(
            "location vectors differ in shape: k = {} vs {}, n = {} vs {}",
            a.k(),
            b.k(),
            a.n(),
            b.n()
        )));
    }
    if segments.len() != a.k() + 1 {
        return Err(Error::Domain(format!("{} change points need {} segments, got {}", a.k(), a.k() + 1, segments.len())));
    }
    segment_run_kl(a, segments, b, segments, tol)
}

/// Σᵢ KL(f^A_{s_A(i)} ‖ f^B_{s_B(i)}) grouped into runs of constant assignment pairs.
pub(crate) fn segment_run_kl(
    a: &LocationVector,
    seg_a: &[DistributionSpec],
    b: &LocationVector,
    seg_b: &[DistributionSpec],
    tol: f64,
) -> Result<f64> {
    let n = a.n();
    let mut cuts: Vec<usize> = a.locations().iter().chain(b.locations()).copied().collect();
    cuts.push(0);
    cuts.push(n);
    cuts.sort_unstable();
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (sa, sb) = (a.segment_of(lo + 1), b.segment_of(lo + 1));
        let (p, q) = (&seg_a[sa], &seg_b[sb]);
        if p != q {
            total += (hi - lo) as f64 * kl(p, q, tol)?.value;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_examples() {
        let u = UniformLocationPrior::new(100, 1).unwrap();
        let lv = LocationVector::new(vec![37], 100).unwrap();
        assert_abs_diff_eq!(u.mass(&lv), 1.0 / 99.0, epsilon = 1e-15);
        let u = UniformLocationPrior::new(5, 2).unwrap();
        let all: Vec<_> = u.enumerate().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].locations(), &[1, 2]);
        assert_eq!(all[5].locations(), &[3, 4]);
        assert_abs_diff_eq!(u.mass(&all[3]), 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(UniformLocationPrior::new(500, 2).unwrap().count(), 124_251);
        assert!(UniformLocationPrior::new(5, 5).is_err());
    }

    #[test]
    fn shifted_binomial_examples() {
        let p = shifted_binomial_prior(3).unwrap();
        assert_abs_diff_eq!(p.masses()[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.masses()[1], 2.0 / 3.0, epsilon = 1e-15);
        let p = shifted_binomial_prior(2).unwrap();
        assert_eq!(p.support(), &[1]);
        assert_eq!(p.masses(), &[1.0]);
        let p = shifted_binomial_prior(100).unwrap();
        assert_abs_diff_eq!(p.expectation(|&m| 100.0 - m as f64), 1.98, epsilon = 1e-12);
    }

    #[test]
    fn location_kl_example() {
        let segs = ["poisson:1".parse().unwrap(), "poisson:2".parse().unwrap()];
        let a = LocationVector::new(vec![2], 6).unwrap();
        let b = LocationVector::new(vec![4], 6).unwrap();
        let v = kl_between_location_vectors(&a, &b, &segs, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 2.0 * (2.0 * 2f64.ln() - 1.0), epsilon = 1e-14);
        assert_eq!(kl_between_location_vectors(&a, &a, &segs, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn loss_based_examples() {
        let fam: Vec<DistributionSpec> = (1..=3).map(|l| DistributionSpec::poisson(l as f64).unwrap()).collect();
        let p = loss_based_prior(&fam, 1e-12).unwrap();
        let k = |a: f64, b: f64| b - a + a * (a / b).ln();
        let w = [k(1.0, 2.0).exp_m1(), k(2.0, 1.0).min(k(2.0, 3.0)).exp_m1(), k(3.0, 2.0).exp_m1()];
        let t: f64 = w.iter().sum();
        for i in 0..3 {
            assert_abs_diff_eq!(p.masses()[i], w[i] / t, epsilon = 1e-14);
        }
        let same = vec![fam[0], fam[0]];
        assert_eq!(loss_based_prior(&same, 1e-12).unwrap().masses(), &[0.5, 0.5]);
    }
}
