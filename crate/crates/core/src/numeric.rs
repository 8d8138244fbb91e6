//! Small numerical helpers shared across modules: stable log-sum-exp,
//! special functions not covered by `statrs`, and log-space binomials.

pub use statrs::function::gamma::{digamma, ln_gamma};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// log(Σ exp(xᵢ)), or −∞ for an empty slice or all −∞ inputs.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// log((1/N) Σ exp(xᵢ)).
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NEG_INFINITY;
    }
    log_sum_exp(xs) - (xs.len() as f64).ln()
}

/// log(Σ wᵢ exp(xᵢ)) where the weights are given in log space.
pub fn log_sum_exp_weighted(xs: &[f64], log_w: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), log_w.len());
    let max = xs
        .iter()
        .zip(log_w)
        .map(|(x, w)| x + w)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.iter().zip(log_w).map(|(x, w)| (x + w - max).exp()).sum();
    max + s.ln()
}

/// Streaming log-sum-exp accumulator; summation order is the push order.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Trigamma ψ′(x) for x > 0 by upward recurrence and the asymptotic series.
pub fn trigamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let z = 1.0 / (x * x);
    // 1/x + 1/(2x²) + Σ B₂ₖ / x^{2k+1}
    let series = 1.0 / x
        + z / 2.0
        + (z / x)
            * (1.0 / 6.0
                - z * (1.0 / 30.0 - z * (1.0 / 42.0 - z * (1.0 / 30.0 - z * 5.0 / 66.0))));
    acc + series
}

/// ln C(n, k) for real-valued arguments.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Exact C(n, k) as u128, saturating on overflow.
pub fn choose_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// ln(x!) for a non-negative integer-valued real.
pub fn ln_factorial(x: f64) -> f64 {
    ln_gamma(x + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lse_matches_direct() {
        let xs = [-1.0, -2.0, -3.0];
        let direct = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert_relative_eq!(log_sum_exp(&xs), direct, epsilon = 1e-14);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert_relative_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln());
    }

    #[test]
    fn streaming_lse_agrees() {
        let xs = [3.0, -1.0, 700.0, 2.5, f64::NEG_INFINITY, 699.0];
        let mut acc = LogSumExp::new();
        xs.iter().for_each(|&x| acc.push(x));
        assert_relative_eq!(acc.value(), log_sum_exp(&xs), epsilon = 1e-12);
    }

    #[test]
    fn trigamma_known_values() {
        // ψ′(1) = π²/6, ψ′(1/2) = π²/2
        let pi2 = std::f64::consts::PI.powi(2);
        assert_relative_eq!(trigamma(1.0), pi2 / 6.0, epsilon = 1e-13);
        assert_relative_eq!(trigamma(0.5), pi2 / 2.0, epsilon = 1e-12);
        // recurrence ψ′(x+1) = ψ′(x) − 1/x²
        for &x in &[0.3, 2.7, 10.0, 55.5] {
            assert_relative_eq!(trigamma(x + 1.0), trigamma(x) - 1.0 / (x * x), epsilon = 1e-12);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(choose_u128(4, 2), 6);
        assert_eq!(choose_u128(499, 2), 124_251);
        assert_relative_eq!(ln_choose(499, 2), (124_251f64).ln(), epsilon = 1e-10);
    }
}
