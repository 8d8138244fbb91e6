//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's quadrature, divergence or evidence code.

#![allow(dead_code)]

use lbcp::distributions::DistributionSpec;

/// Composite Simpson rule on [a, b] with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// ∫₀^∞ g(x) dx through x = eᵘ on u ∈ [lo, hi].
pub fn simpson_positive(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    simpson(
        |u| {
            let x = u.exp();
            let v = g(x) * x;
            if v.is_finite() { v } else { 0.0 }
        },
        lo,
        hi,
        n,
    )
}

/// ∫ g over ℝ through x = sinh(u).
pub fn simpson_real(g: impl Fn(f64) -> f64, half_width: f64, n: usize) -> f64 {
    simpson(|u| g(u.sinh()) * u.cosh(), -half_width, half_width, n)
}

/// ∫₀¹ g through the logistic map.
pub fn simpson_unit(g: impl Fn(f64) -> f64, half_width: f64, n: usize) -> f64 {
    simpson(
        |u| {
            let x = 1.0 / (1.0 + (-u).exp());
            let v = g(x) * x * (1.0 - x);
            if v.is_finite() { v } else { 0.0 }
        },
        -half_width,
        half_width,
        n,
    )
}

/// Σ_{x=0}^{upper} p(x) ln(p(x)/q(x)) for count distributions.
pub fn brute_discrete_kl(p: &DistributionSpec, q: &DistributionSpec, upper: u64) -> f64 {
    (0..=upper)
        .map(|x| {
            let lp = p.log_density(x as f64);
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                lp.exp() * (lp - q.log_density(x as f64))
            }
        })
        .sum()
}

/// KL between two product laws on count vectors, where observation i has
/// law `a[i]` under the first and `b[i]` under the second. Enumerates the
/// joint sample space depth first, dropping paths whose probability under
/// `a` falls below `prune`.
pub fn brute_joint_kl(a: &[DistributionSpec], b: &[DistributionSpec], prune: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    // per coordinate, log-masses up to where the remaining tail is negligible
    let tables: Vec<(Vec<f64>, Vec<f64>)> = a
        .iter()
        .zip(b)
        .map(|(da, db)| {
            let (mut la, mut lb) = (Vec::new(), Vec::new());
            let mut cdf = 0.0;
            let mut x = 0u64;
            while (cdf < 1.0 - 1e-17 && x < 400) || la.len() < 5 {
                let v = da.log_density(x as f64);
                cdf += v.exp();
                la.push(v);
                lb.push(db.log_density(x as f64));
                x += 1;
            }
            (la, lb)
        })
        .collect();
    fn walk(i: usize, lp: f64, lq: f64, t: &[(Vec<f64>, Vec<f64>)], ln_prune: f64) -> f64 {
        if i == t.len() {
            return lp.exp() * (lp - lq);
        }
        let (la, lb) = &t[i];
        let mut total = 0.0;
        for x in 0..la.len() {
            let next = lp + la[x];
            if next >= ln_prune {
                total += walk(i + 1, next, lq + lb[x], t, ln_prune);
            }
        }
        total
    }
    walk(0, 0.0, 0.0, &tables, prune.ln())
}

/// Segment index (0-based) of observation i (1-based) under break points m.
pub fn segment_of(m: &[usize], i: usize) -> usize {
    m.iter().filter(|&&b| i > b).count()
}

/// Per-observation laws of a segmented model.
pub fn assign(m: &[usize], n: usize, segments: &[DistributionSpec]) -> Vec<DistributionSpec> {
    (1..=n).map(|i| segments[segment_of(m, i)]).collect()
}

/// Sample mean and unbiased variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Fourth central sample moment.
pub fn central4(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n
}
