//! Sampling families: validated parameters, densities, draws, moments and
//! moment matching.
//!
//! Parameter conventions:
//!
//! | family      | params            | notes                                   |
//! |-------------|-------------------|-----------------------------------------|
//! | `geometric` | p                 | failures before first success, 0, 1, …  |
//! | `poisson`   | λ                 |                                         |
//! | `gamma`     | α (shape), β (rate) |                                       |
//! | `weibull`   | λ (scale), κ (shape) |                                      |
//! | `lognormal` | μ, τ              | τ is the precision of ln X              |
//! | `studentt`  | ν                 | integer ν ≥ 2, location 0, scale 1      |
//! | `normal`    | μ, σ              | σ is the standard deviation             |
//! | `beta`      | a, b              |                                         |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::numeric::{digamma, ln_factorial, ln_gamma, trigamma, EULER_GAMMA};
use crate::optimize::brent_root;
use crate::rng::Rng;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Geometric,
    Poisson,
    Gamma,
    Weibull,
    LogNormal,
    StudentT,
    Normal,
    Beta,
}

/// Where a family puts its mass. Count families are measured against the
/// counting measure, the rest against Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Counts,
    /// (0, ∞)
    Positive,
    /// (0, 1)
    Unit,
    Real,
}

impl Support {
    /// True if every point of `self` lies in `other` under the same base measure.
    pub fn within(self, other: Support) -> bool {
        use Support::*;
        match (self, other) {
            (Counts, Counts) => true,
            (Counts, _) | (_, Counts) => false,
            (Unit, _) => true,
            (Positive, Positive) | (Positive, Real) => true,
            (Real, Real) => true,
            _ => false,
        }
    }
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Geometric,
        Family::Poisson,
        Family::Gamma,
        Family::Weibull,
        Family::LogNormal,
        Family::StudentT,
        Family::Normal,
        Family::Beta,
    ];

    pub fn arity(self) -> usize {
        match self {
            Family::Geometric | Family::Poisson | Family::StudentT => 1,
            _ => 2,
        }
    }

    pub fn support(self) -> Support {
        match self {
            Family::Geometric | Family::Poisson => Support::Counts,
            Family::Gamma | Family::Weibull | Family::LogNormal => Support::Positive,
            Family::StudentT | Family::Normal => Support::Real,
            Family::Beta => Support::Unit,
        }
    }

    pub fn is_discrete(self) -> bool {
        self.support() == Support::Counts
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Geometric => "geometric",
            Family::Poisson => "poisson",
            Family::Gamma => "gamma",
            Family::Weibull => "weibull",
            Family::LogNormal => "lognormal",
            Family::StudentT => "studentt",
            Family::Normal => "normal",
            Family::Beta => "beta",
        }
    }

    /// Parameter names in positional order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Geometric => &["p"],
            Family::Poisson => &["lambda"],
            Family::Gamma => &["alpha", "beta"],
            Family::Weibull => &["lambda", "kappa"],
            Family::LogNormal => &["mu", "tau"],
            Family::StudentT => &["nu"],
            Family::Normal => &["mu", "sigma"],
            Family::Beta => &["a", "b"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().to_ascii_lowercase().chars().filter(|c| *c != '-' && *c != '_').collect();
        Ok(match key.as_str() {
            "geometric" | "geom" => Family::Geometric,
            "poisson" | "pois" => Family::Poisson,
            "gamma" => Family::Gamma,
            "weibull" => Family::Weibull,
            "lognormal" | "lnorm" => Family::LogNormal,
            "studentt" | "t" | "student" => Family::StudentT,
            "normal" | "gaussian" => Family::Normal,
            "beta" => Family::Beta,
            _ => return Err(Error::Parse(format!("unknown family '{}'", s.trim()))),
        })
    }
}

/// A family together with a validated parameter vector. Construction fails
/// eagerly on any parameter outside the family's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    params: [f64; 2],
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParameterDomain(msg()))
    }
}

impl DistributionSpec {
    pub fn new(family: Family, params: &[f64]) -> Result<Self> {
        if params.len() != family.arity() {
            return Err(Error::ParameterDomain(format!(
                "{family} takes {} parameter(s), got {}",
                family.arity(),
                params.len()
            )));
        }
        let a = params[0];
        let b = params.get(1).copied().unwrap_or(0.0);
        let pos = |v: f64| v.is_finite() && v > 0.0;
        match family {
            Family::Geometric => check(a > 0.0 && a < 1.0, || format!("geometric p must lie in (0,1), got {a}"))?,
            Family::Poisson => check(pos(a), || format!("poisson rate must be > 0, got {a}"))?,
            Family::Gamma => check(pos(a) && pos(b), || format!("gamma shape and rate must be > 0, got ({a}, {b})"))?,
            Family::Weibull => check(pos(a) && pos(b), || format!("weibull scale and shape must be > 0, got ({a}, {b})"))?,
            Family::LogNormal => {
                check(a.is_finite() && pos(b), || format!("lognormal needs finite mu and tau > 0, got ({a}, {b})"))?
            }
            Family::StudentT => check(a.is_finite() && a >= 2.0 && a.fract() == 0.0, || {
                format!("student-t degrees of freedom must be an integer >= 2, got {a}")
            })?,
            Family::Normal => check(a.is_finite() && pos(b), || format!("normal needs finite mu and sigma > 0, got ({a}, {b})"))?,
            Family::Beta => check(pos(a) && pos(b), || format!("beta parameters must be > 0, got ({a}, {b})"))?,
        }
        Ok(DistributionSpec { family, params: [a, b] })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        Self::new(Family::Geometric, &[p])
    }
    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(Family::Poisson, &[lambda])
    }
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(Family::Gamma, &[shape, rate])
    }
    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        Self::new(Family::Weibull, &[scale, shape])
    }
    pub fn lognormal(mu: f64, tau: f64) -> Result<Self> {
        Self::new(Family::LogNormal, &[mu, tau])
    }
    pub fn student_t(nu: u32) -> Result<Self> {
        Self::new(Family::StudentT, &[nu as f64])
    }
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Normal, &[mu, sigma])
    }
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Beta, &[a, b])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params[..self.family.arity()]
    }

    pub fn support(&self) -> Support {
        self.family.support()
    }

    pub fn is_discrete(&self) -> bool {
        self.family.is_discrete()
    }

    /// True if `x` is a point of the support.
    pub fn in_support(&self, x: f64) -> bool {
        match self.support() {
            Support::Counts => x >= 0.0 && x.fract() == 0.0 && x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::Unit => x > 0.0 && x < 1.0,
            Support::Real => x.is_finite(),
        }
    }

    /// Natural log of the density (or mass) at `x`; −∞ outside the support.
    pub fn log_density(&self, x: f64) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        let [a, b] = self.params;
        match self.family {
            Family::Geometric => a.ln() + x * (-a).ln_1p(),
            Family::Poisson => x * a.ln() - a - ln_factorial(x),
            Family::Gamma => a * b.ln() - ln_gamma(a) + (a - 1.0) * x.ln() - b * x,
            Family::Weibull => {
                let z = x / a;
                b.ln() - a.ln() + (b - 1.0) * z.ln() - z.powf(b)
            }
            Family::LogNormal => {
                let lx = x.ln();
                -lx + 0.5 * b.ln() - LN_SQRT_2PI - 0.5 * b * (lx - a).powi(2)
            }
            Family::StudentT => {
                ln_gamma(0.5 * (a + 1.0)) - ln_gamma(0.5 * a) - 0.5 * (a * PI).ln()
                    - 0.5 * (a + 1.0) * (x * x / a).ln_1p()
            }
            Family::Normal => -b.ln() - LN_SQRT_2PI - 0.5 * ((x - a) / b).powi(2),
            Family::Beta => (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b),
        }
    }

    /// One draw.
    pub fn sample_one(&self, rng: &mut Rng) -> f64 {
        let [a, b] = self.params;
        // Parameters were validated at construction, so the constructors below
        // cannot fail.
        match self.family {
            Family::Geometric => rand_distr::Geometric::new(a).expect("validated").sample(rng) as f64,
            Family::Poisson => rand_distr::Poisson::new(a).expect("validated").sample(rng),
            Family::Gamma => rand_distr::Gamma::new(a, 1.0 / b).expect("validated").sample(rng),
            Family::Weibull => rand_distr::Weibull::new(a, b).expect("validated").sample(rng),
            Family::LogNormal => rand_distr::LogNormal::new(a, 1.0 / b.sqrt()).expect("validated").sample(rng),
            Family::StudentT => rand_distr::StudentT::new(a).expect("validated").sample(rng),
            Family::Normal => rand_distr::Normal::new(a, b).expect("validated").sample(rng),
            Family::Beta => {
                // guard the open interval against rounding to an endpoint
                let v: f64 = rand_distr::Beta::new(a, b).expect("validated").sample(rng);
                v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
            }
        }
    }

    /// `n` independent draws.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// Mean, if finite.
    pub fn mean(&self) -> Result<f64> {
        let [a, b] = self.params;
        Ok(match self.family {
            Family::Geometric => (1.0 - a) / a,
            Family::Poisson => a,
            Family::Gamma => a / b,
            Family::Weibull => a * ln_gamma(1.0 + 1.0 / b).exp(),
            Family::LogNormal => (a + 0.5 / b).exp(),
            Family::StudentT => 0.0,
            Family::Normal => a,
            Family::Beta => a / (a + b),
        })
    }

    /// Exact (mean, variance).
    pub fn moments(&self) -> Result<(f64, f64)> {
        let [a, b] = self.params;
        let mean = self.mean()?;
        let var = match self.family {
            Family::Geometric => (1.0 - a) / (a * a),
            Family::Poisson => a,
            Family::Gamma => a / (b * b),
            Family::Weibull => {
                let g1 = ln_gamma(1.0 + 1.0 / b).exp();
                let g2 = ln_gamma(1.0 + 2.0 / b).exp();
                a * a * (g2 - g1 * g1)
            }
            Family::LogNormal => (1.0 / b).exp_m1() * (2.0 * a + 1.0 / b).exp(),
            Family::StudentT => {
                if a <= 2.0 {
                    return Err(Error::MomentUndefined(format!(
                        "student-t variance requires nu >= 3, got nu = {a}"
                    )));
                }
                a / (a - 2.0)
            }
            Family::Normal => b * b,
            Family::Beta => a * b / ((a + b).powi(2) * (a + b + 1.0)),
        };
        Ok((mean, var))
    }

    /// E[ln X] for families on (0, ∞) or (0, 1).
    pub fn mean_ln(&self) -> Result<f64> {
        let [a, b] = self.params;
        match self.family {
            Family::Weibull => Ok(a.ln() - EULER_GAMMA / b),
            Family::Gamma => Ok(digamma(a) - b.ln()),
            Family::LogNormal => Ok(a),
            Family::Beta => Ok(digamma(a) - digamma(a + b)),
            f => Err(Error::MomentUndefined(format!("E[ln X] is not available for {f}"))),
        }
    }

    /// Var[ln X] for families on (0, ∞) or (0, 1).
    pub fn var_ln(&self) -> Result<f64> {
        let [a, b] = self.params;
        match self.family {
            Family::Weibull => Ok(PI * PI / (6.0 * b * b)),
            Family::Gamma => Ok(trigamma(a)),
            Family::LogNormal => Ok(1.0 / b),
            Family::Beta => Ok(trigamma(a) - trigamma(a + b)),
            f => Err(Error::MomentUndefined(format!("Var[ln X] is not available for {f}"))),
        }
    }

    /// ln E[X^s] for s > 0 on positive-support families.
    pub fn ln_raw_moment(&self, s: f64) -> Result<f64> {
        let [a, b] = self.params;
        match self.family {
            Family::Weibull => Ok(s * a.ln() + ln_gamma(1.0 + s / b)),
            Family::Gamma => Ok(ln_gamma(a + s) - ln_gamma(a) - s * b.ln()),
            Family::LogNormal => Ok(s * a + 0.5 * s * s / b),
            Family::Beta => Ok(ln_beta(a + s, b) - ln_beta(a, b)),
            f => Err(Error::MomentUndefined(format!("E[X^s] is not available in closed form for {f}"))),
        }
    }

    /// Differential entropy (or Shannon entropy for counts) when a closed
    /// form exists.
    pub fn entropy(&self) -> Option<f64> {
        let [a, b] = self.params;
        match self.family {
            Family::Geometric => Some(-(a.ln() + (1.0 - a) / a * (-a).ln_1p())),
            Family::Poisson => None,
            Family::Gamma => Some(a - b.ln() + ln_gamma(a) + (1.0 - a) * digamma(a)),
            Family::Weibull => Some(EULER_GAMMA * (1.0 - 1.0 / b) + (a / b).ln() + 1.0),
            Family::LogNormal => Some(a + 0.5 + 0.5 * (2.0 * PI / b).ln()),
            Family::StudentT => {
                let h = 0.5 * (a + 1.0);
                Some(h * (digamma(h) - digamma(0.5 * a)) + 0.5 * a.ln() + ln_beta(0.5 * a, 0.5))
            }
            Family::Normal => Some(0.5 * (2.0 * PI * std::f64::consts::E * b * b).ln()),
            Family::Beta => Some(
                ln_beta(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) + (a + b - 2.0) * digamma(a + b),
            ),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family)?;
        for (i, p) in self.params().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Splits a `family:p1,p2` literal into its family name and numbers.
pub(crate) fn split_literal(s: &str) -> Result<(&str, Vec<f64>)> {
    let (name, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("expected 'family:p1[,p2]', got '{s}'")))?;
    let params = rest
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{}' in '{s}'", t.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((name.trim(), params))
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `family:p1,p2`, e.g. `poisson:3` or `weibull:1.5,5`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = split_literal(s)?;
        DistributionSpec::new(name.parse()?, &params)
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters of `family` that reproduce the given mean and variance.
pub fn moment_match(family: Family, mean: f64, variance: f64) -> Result<DistributionSpec> {
    if !(mean > 0.0 && variance > 0.0 && mean.is_finite() && variance.is_finite()) {
        return Err(Error::Infeasible(format!(
            "moment matching needs mean > 0 and variance > 0, got ({mean}, {variance})"
        )));
    }
    let cv2 = variance / (mean * mean);
    match family {
        Family::Gamma => DistributionSpec::gamma(mean * mean / variance, mean / variance),
        Family::LogNormal => {
            let s2 = cv2.ln_1p();
            DistributionSpec::lognormal(mean.ln() - 0.5 * s2, 1.0 / s2)
        }
        Family::Weibull => {
            // ln Γ(1+2/κ) − 2 ln Γ(1+1/κ) is decreasing in κ
            let target = cv2.ln_1p();
            let g = |ln_k: f64| {
                let k = ln_k.exp();
                ln_gamma(1.0 + 2.0 / k) - 2.0 * ln_gamma(1.0 + 1.0 / k) - target
            };
            let ln_k = brent_root(g, (0.02f64).ln(), (1e4f64).ln(), 1e-15, 500)
                .map_err(|_| Error::Infeasible(format!("no weibull shape gives squared CV {cv2}")))?;
            let k = ln_k.exp();
            DistributionSpec::weibull(mean / ln_gamma(1.0 + 1.0 / k).exp(), k)
        }
        f => Err(Error::Infeasible(format!("moment matching is only defined for weibull, lognormal and gamma, not {f}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn density_examples() {
        let p = DistributionSpec::poisson(3.0).unwrap();
        assert_abs_diff_eq!(p.log_density(0.0), -3.0, epsilon = 1e-14);
        let g = DistributionSpec::geometric(0.8).unwrap();
        assert_abs_diff_eq!(g.log_density(0.0), 0.8f64.ln(), epsilon = 1e-14);
        let ln = DistributionSpec::lognormal(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(ln.log_density(1.0), -0.918_938_533_204_672_8, epsilon = 1e-14);
        assert_eq!(p.log_density(-1.0), f64::NEG_INFINITY);
        assert_eq!(p.log_density(1.5), f64::NEG_INFINITY);
        assert_eq!(ln.log_density(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn eager_validation() {
        assert!(DistributionSpec::geometric(1.0).is_err());
        assert!(DistributionSpec::poisson(0.0).is_err());
        assert!(DistributionSpec::gamma(1.0, -1.0).is_err());
        assert!(DistributionSpec::new(Family::StudentT, &[2.5]).is_err());
        assert!(DistributionSpec::new(Family::StudentT, &[1.0]).is_err());
        assert!(DistributionSpec::new(Family::Weibull, &[1.0]).is_err());
        assert!(DistributionSpec::lognormal(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn parse_literals() {
        let d: DistributionSpec = "Weibull:1.5, 5".parse().unwrap();
        assert_eq!(d.family(), Family::Weibull);
        assert_eq!(d.params(), &[1.5, 5.0]);
        assert_eq!("POISSON:3".parse::<DistributionSpec>().unwrap().to_string(), "poisson:3");
        assert!("poisson".parse::<DistributionSpec>().is_err());
        assert!("cauchy:1".parse::<DistributionSpec>().is_err());
        assert!("poisson:x".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn moment_examples() {
        let (m, v) = DistributionSpec::gamma(10.0, 2.0).unwrap().moments().unwrap();
        assert_relative_eq!(m, 5.0);
        assert_relative_eq!(v, 2.5);
        let ln = DistributionSpec::lognormal(0.3, 4.0).unwrap();
        assert_relative_eq!(ln.mean().unwrap(), (0.3f64 + 0.125).exp());
        assert!(matches!(
            DistributionSpec::student_t(2).unwrap().moments(),
            Err(Error::MomentUndefined(_))
        ));
    }

    #[test]
    fn moment_match_examples() {
        let g = moment_match(Family::Gamma, 5.0, 2.5).unwrap();
        assert_relative_eq!(g.params()[0], 10.0, epsilon = 1e-12);
        assert_relative_eq!(g.params()[1], 2.0, epsilon = 1e-12);
        let ln = moment_match(Family::LogNormal, 5.0, 2.5).unwrap();
        assert_relative_eq!(ln.params()[0], 5f64.ln() - 1.1f64.ln() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(ln.params()[1], 1.0 / 1.1f64.ln(), epsilon = 1e-12);
        let w = moment_match(Family::Weibull, 5.0, 2.5).unwrap();
        let (m, v) = w.moments().unwrap();
        assert_relative_eq!(m, 5.0, max_relative = 1e-10);
        assert_relative_eq!(v, 2.5, max_relative = 1e-10);
        assert!(moment_match(Family::Poisson, 5.0, 2.5).is_err());
        assert!(moment_match(Family::Gamma, -1.0, 2.5).is_err());
    }

    #[test]
    fn sampling_means() {
        let mut rng = seeded(2024);
        let n = 100_000;
        let xs = DistributionSpec::poisson(3.0).unwrap().sample(n, &mut rng);
        assert_abs_diff_eq!(xs.iter().sum::<f64>() / n as f64, 3.0, epsilon = 0.02);
        let xs = DistributionSpec::geometric(0.8).unwrap().sample(n, &mut rng);
        assert_abs_diff_eq!(xs.iter().sum::<f64>() / n as f64, 0.25, epsilon = 0.01);
        let mut xs = DistributionSpec::student_t(3).unwrap().sample(n, &mut rng);
        xs.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(xs[n / 2], 0.0, epsilon = 0.02);
    }
}
