//! Kullback–Leibler divergences, Hellinger distances and the infimum of KL
//! over a parametric family.
//!
//! Divergences across incompatible supports are returned as `+∞` values so
//! that minima over competitors stay total.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::numeric::{digamma, ln_gamma, EULER_GAMMA};
use crate::optimize::{brent_minimize, brent_root, nelder_mead, NelderMeadConfig};
use crate::quadrature::{integrate_real_line, QuadratureConfig};
use crate::rng::substream;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlMethod {
    ClosedForm,
    Quadrature,
    TruncatedSum,
}

impl fmt::Display for KlMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KlMethod::ClosedForm => "closed_form",
            KlMethod::Quadrature => "quadrature",
            KlMethod::TruncatedSum => "truncated_sum",
        })
    }
}

/// Which evaluation route `kl_with` may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    /// Closed form when registered, numeric otherwise.
    Auto,
    /// Closed form only; unregistered pairs are an error.
    Closed,
    /// Quadrature or truncated summation even when a closed form exists.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlResult {
    /// Divergence in nats; `+∞` when the supports are incompatible.
    pub value: f64,
    pub method: KlMethod,
    /// Absolute error bound; zero for closed forms.
    pub error_bound: f64,
}

impl KlResult {
    fn closed(value: f64) -> Self {
        KlResult { value, method: KlMethod::ClosedForm, error_bound: 0.0 }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// E_p[ln q(X)] for q ∈ {Gamma, Weibull, LogNormal}, from the log and power
/// moments of p.
fn expected_log_density(p: &DistributionSpec, q: &DistributionSpec) -> Result<f64> {
    let el = p.mean_ln()?;
    let qp = q.params();
    match q.family() {
        Family::Gamma => {
            let (a, b) = (qp[0], qp[1]);
            Ok(a * b.ln() - ln_gamma(a) + (a - 1.0) * el - b * p.mean()?)
        }
        Family::Weibull => {
            let (lam, k) = (qp[0], qp[1]);
            let ratio = (p.ln_raw_moment(k)? - k * lam.ln()).exp();
            Ok(k.ln() - k * lam.ln() + (k - 1.0) * el - ratio)
        }
        Family::LogNormal => {
            let (mu, tau) = (qp[0], qp[1]);
            let vl = p.var_ln()?;
            Ok(-el + 0.5 * tau.ln() - LN_SQRT_2PI - 0.5 * tau * (vl + (el - mu).powi(2)))
        }
        f => Err(Error::Unsupported(format!("no closed-form cross entropy against {f}"))),
    }
}

/// Closed-form KL(p‖q) when one is registered for the pair.
pub fn kl_closed_form(p: &DistributionSpec, q: &DistributionSpec) -> Option<f64> {
    use Family::*;
    if p == q {
        return Some(0.0);
    }
    let (a, b) = (p.params(), q.params());
    let v = match (p.family(), q.family()) {
        (Poisson, Poisson) => b[0] - a[0] + a[0] * (a[0] / b[0]).ln(),
        (Geometric, Geometric) => {
            let (p1, p2) = (a[0], b[0]);
            (p1 / p2).ln() + (1.0 - p1) / p1 * ((-p1).ln_1p() - (-p2).ln_1p())
        }
        (Gamma, Gamma) => {
            let (a1, b1, a2, b2) = (a[0], a[1], b[0], b[1]);
            (a1 - a2) * digamma(a1) - ln_gamma(a1) + ln_gamma(a2) + a2 * (b1.ln() - b2.ln()) + a1 * (b2 - b1) / b1
        }
        (LogNormal, LogNormal) => {
            let r = b[1] / a[1];
            0.5 * (r - 1.0 - r.ln() + b[1] * (a[0] - b[0]).powi(2))
        }
        (Weibull, Weibull) => {
            let (l1, k1, l2, k2) = (a[0], a[1], b[0], b[1]);
            (k1.ln() - k1 * l1.ln()) - (k2.ln() - k2 * l2.ln()) + (k1 - k2) * (l1.ln() - EULER_GAMMA / k1)
                + ((k2 * (l1 / l2).ln()) + ln_gamma(k2 / k1 + 1.0)).exp()
                - 1.0
        }
        (Normal, Normal) => {
            let (m1, s1, m2, s2) = (a[0], a[1], b[0], b[1]);
            (s2 / s1).ln() + (s1 * s1 + (m1 - m2).powi(2)) / (2.0 * s2 * s2) - 0.5
        }
        (Beta, Beta) => {
            let (a1, b1, a2, b2) = (a[0], a[1], b[0], b[1]);
            ln_beta(a2, b2) - ln_beta(a1, b1) + (a1 - a2) * digamma(a1) + (b1 - b2) * digamma(b1)
                + (a2 - a1 + b2 - b1) * digamma(a1 + b1)
        }
        (Weibull | Gamma | LogNormal, Weibull | Gamma | LogNormal) => {
            -p.entropy()? - expected_log_density(p, q).ok()?
        }
        _ => return None,
    };
    Some(v.max(0.0))
}

/// True if a closed form is registered for (family(p), family(q)).
pub fn has_closed_form(p: Family, q: Family) -> bool {
    use Family::*;
    matches!(
        (p, q),
        (Poisson, Poisson)
            | (Geometric, Geometric)
            | (Normal, Normal)
            | (Beta, Beta)
            | (Weibull | Gamma | LogNormal, Weibull | Gamma | LogNormal)
    )
}

#[derive(Debug, Clone, Copy)]
enum Frame {
    /// x = exp(u)
    Log,
    /// x = 1/(1+exp(−u))
    Logit,
    /// x = u
    Identity,
}

fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

impl Frame {
    fn map(self, u: f64) -> (f64, f64) {
        match self {
            Frame::Log => (u.exp(), u),
            Frame::Logit => {
                let x = if u >= 0.0 { 1.0 / (1.0 + (-u).exp()) } else { u.exp() / (1.0 + u.exp()) };
                (x, -softplus(-u) - softplus(u))
            }
            Frame::Identity => (u, 0.0),
        }
    }

    /// ln d(x) at x = map(u). On the logit frame the Beta density is
    /// evaluated from u, since 1 − x rounds to zero long before its mass does.
    fn log_density(self, d: &DistributionSpec, u: f64, x: f64) -> f64 {
        if let (Frame::Logit, Family::Beta) = (self, d.family()) {
            let [a, b] = [d.params()[0], d.params()[1]];
            return -(a - 1.0) * softplus(-u) - (b - 1.0) * softplus(u) - ln_beta(a, b);
        }
        d.log_density(x)
    }
}

/// Transform, centre and scale on which the mass of `p` is integrated.
fn frame_for(p: &DistributionSpec) -> (Frame, f64, f64) {
    let a = p.params();
    match p.family() {
        Family::Weibull | Family::Gamma | Family::LogNormal => {
            let c = p.mean_ln().unwrap_or(0.0);
            let s = p.var_ln().map(f64::sqrt).unwrap_or(1.0);
            (Frame::Log, c, s)
        }
        Family::Beta => {
            let c = digamma(a[0]) - digamma(a[1]);
            let s = (crate::numeric::trigamma(a[0]) + crate::numeric::trigamma(a[1])).sqrt();
            (Frame::Logit, c, s)
        }
        Family::Normal => (Frame::Identity, a[0], a[1]),
        _ => (Frame::Identity, 0.0, 1.0),
    }
}

fn quadrature_config(tol: f64) -> QuadratureConfig {
    QuadratureConfig { abs_tol: 0.5 * tol, rel_tol: 0.0, max_intervals: 20_000, initial_panels: 16 }
}

fn kl_quadrature(p: &DistributionSpec, q: &DistributionSpec, tol: f64) -> Result<KlResult> {
    let (frame, c, s) = frame_for(p);
    let integrand = |u: f64| {
        let (x, log_jac) = frame.map(u);
        let lp = frame.log_density(p, u, x);
        if lp == f64::NEG_INFINITY {
            return 0.0;
        }
        let w = (lp + log_jac).exp();
        if w == 0.0 {
            return 0.0;
        }
        w * (lp - frame.log_density(q, u, x))
    };
    let r = integrate_real_line(integrand, c, s, &quadrature_config(tol));
    if !r.converged || !r.value.is_finite() {
        return Err(Error::Accuracy { achieved: r.error, requested: tol });
    }
    Ok(KlResult { value: r.value.max(0.0), method: KlMethod::Quadrature, error_bound: r.error })
}

/// Log-mass of the count families written as c0 + c1·x − d·ln x!.
fn count_coefficients(d: &DistributionSpec) -> (f64, f64, f64) {
    let a = d.params()[0];
    match d.family() {
        Family::Poisson => (-a, a.ln(), 1.0),
        Family::Geometric => (a.ln(), (-a).ln_1p(), 0.0),
        f => unreachable!("{f} is not a count family"),
    }
}

/// Bound r on p(x+1)/p(x) valid for every x ≥ `at`, if one below 1 exists.
fn ratio_bound(d: &DistributionSpec, at: u64) -> Option<f64> {
    let a = d.params()[0];
    let r = match d.family() {
        Family::Poisson => a / (at as f64 + 1.0),
        Family::Geometric => 1.0 - a,
        _ => return None,
    };
    (r < 1.0).then_some(r)
}

const MAX_SUM_TERMS: u64 = 50_000_000;

/// Σ p(x) ln(p(x)/q(x)) over x = 0, 1, … truncated with a rigorous tail bound.
fn kl_truncated_sum(p: &DistributionSpec, q: &DistributionSpec, tol: f64) -> Result<KlResult> {
    let (pc0, pc1, pd) = count_coefficients(p);
    let (qc0, qc1, qd) = count_coefficients(q);
    let (a, b, dd) = ((pc0 - qc0).abs(), (pc1 - qc1).abs(), (pd - qd).abs());
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut x: u64 = 0;
    loop {
        let xf = x as f64;
        let lp = p.log_density(xf);
        if let Some(r) = ratio_bound(p, x) {
            // For j ≥ 0: p(x+j) ≤ p(x)·r^j and
            // |ln p − ln q|(x+j) ≤ a + c·x + (c + dd)·j + dd·j²/(x+1), c = b + dd·ln(x+1).
            let px = lp.exp();
            let c = b + dd * (xf + 1.0).ln();
            let s0 = 1.0 / (1.0 - r);
            let s1 = r / (1.0 - r).powi(2);
            let s2 = r * (1.0 + r) / (1.0 - r).powi(3);
            let tail = px * ((a + c * xf) * s0 + (c + dd) * s1 + dd / (xf + 1.0) * s2);
            let mass = px * s0;
            if tail <= 0.1 * tol && mass <= 0.1 * tol {
                return Ok(KlResult { value: sum.max(0.0), method: KlMethod::TruncatedSum, error_bound: tail });
            }
        }
        let term = lp.exp() * (lp - q.log_density(xf));
        // Kahan summation keeps long sums accurate to the tolerance.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        x += 1;
        if x > MAX_SUM_TERMS {
            return Err(Error::Accuracy { achieved: f64::INFINITY, requested: tol });
        }
    }
}

fn support_compatible(p: &DistributionSpec, q: &DistributionSpec) -> bool {
    p.support().within(q.support())
}

/// KL(p‖q) with absolute error at most `tol`, choosing the route automatically.
pub fn kl(p: &DistributionSpec, q: &DistributionSpec, tol: f64) -> Result<KlResult> {
    kl_with(p, q, tol, MethodChoice::Auto)
}

pub fn kl_with(p: &DistributionSpec, q: &DistributionSpec, tol: f64, method: MethodChoice) -> Result<KlResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !support_compatible(p, q) {
        return Ok(KlResult::closed(f64::INFINITY));
    }
    if method != MethodChoice::Numeric {
        if let Some(v) = kl_closed_form(p, q) {
            return Ok(KlResult::closed(v));
        }
        if method == MethodChoice::Closed {
            return Err(Error::Unsupported(format!(
                "no closed form registered for {}‖{}",
                p.family(),
                q.family()
            )));
        }
    }
    if p.is_discrete() {
        kl_truncated_sum(p, q, tol)
    } else {
        kl_quadrature(p, q, tol)
    }
}

/// Hellinger distance √(1 − ∫√(pq)) with absolute error at most `tol`.
pub fn hellinger(p: &DistributionSpec, q: &DistributionSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if p == q {
        return Ok(0.0);
    }
    if p.is_discrete() != q.is_discrete() {
        return Ok(1.0);
    }
    let bc_tol = 1e-14;
    let (bc, bc_err) = if p.is_discrete() {
        let mut sum = 0.0;
        let mut x: u64 = 0;
        loop {
            if let (Some(rp), Some(rq)) = (ratio_bound(p, x), ratio_bound(q, x)) {
                let xf = x as f64;
                let tail = 0.5 * (p.log_density(xf).exp() / (1.0 - rp) + q.log_density(xf).exp() / (1.0 - rq));
                if tail <= bc_tol {
                    break (sum, tail);
                }
            }
            let xf = x as f64;
            sum += (0.5 * (p.log_density(xf) + q.log_density(xf))).exp();
            x += 1;
            if x > MAX_SUM_TERMS {
                return Err(Error::Accuracy { achieved: f64::INFINITY, requested: tol });
            }
        }
    } else {
        // Integrate on the frame of the narrower support; the integrand is
        // bounded by both densities.
        let (p, q) = if q.support().within(p.support()) && !p.support().within(q.support()) { (q, p) } else { (p, q) };
        let (frame, c, s) = frame_for(p);
        let (_, cq, sq) = frame_for(q);
        let (c, s) = if matches!(frame, Frame::Log) && p.support() == q.support() {
            (0.5 * (c + cq), s.max(sq).max((c - cq).abs()))
        } else {
            (c, s)
        };
        let integrand = |u: f64| {
            let (x, log_jac) = frame.map(u);
            let l = 0.5 * (frame.log_density(p, u, x) + frame.log_density(q, u, x)) + log_jac;
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                l.exp()
            }
        };
        let r = integrate_real_line(integrand, c, s, &quadrature_config(bc_tol));
        if !r.value.is_finite() {
            return Err(Error::Accuracy { achieved: r.error, requested: tol });
        }
        (r.value, r.error)
    };
    let h = (1.0 - bc.min(1.0)).max(0.0).sqrt();
    let bound = if h > 0.0 { (bc_err / h).min(bc_err.sqrt()) } else { bc_err.sqrt() };
    if bound > tol {
        return Err(Error::Accuracy { achieved: bound, requested: tol });
    }
    Ok(h.min(1.0))
}

/// min{KL(p‖q), KL(q‖p)}; `+∞` only if both directions are infinite.
pub fn min_kl_direction_pair(p: &DistributionSpec, q: &DistributionSpec, tol: f64) -> Result<f64> {
    let a = kl(p, q, tol)?.value;
    let b = kl(q, p, tol)?.value;
    Ok(a.min(b))
}

/// Which argument of the divergence ranges over the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// inf over q of KL(p‖q)
    PToQ,
    /// inf over q of KL(q‖p)
    QToP,
}

#[derive(Debug, Clone, Copy)]
pub struct InfKlConfig {
    /// Accuracy requested from each KL evaluation.
    pub kl_tol: f64,
    /// Simplex-diameter tolerance for the Nelder–Mead fallback.
    pub x_tol: f64,
    pub max_evaluations: usize,
    pub starts: usize,
    /// Largest Student-t degrees of freedom searched.
    pub nu_max: u32,
    /// Seed for the random multi-starts.
    pub seed: u64,
}

impl Default for InfKlConfig {
    fn default() -> Self {
        InfKlConfig {
            kl_tol: 1e-10,
            x_tol: 1e-8,
            max_evaluations: 2000,
            starts: 8,
            nu_max: 200,
            seed: crate::rng::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfKlResult {
    pub value: f64,
    pub minimizer: DistributionSpec,
    pub converged: bool,
    pub evaluations: usize,
}

/// A representative member, reported as minimiser when every member is at
/// infinite divergence.
fn reference_member(family: Family) -> DistributionSpec {
    let params: &[f64] = match family {
        Family::Geometric => &[0.5],
        Family::Poisson => &[1.0],
        Family::StudentT => &[2.0],
        Family::LogNormal | Family::Normal => &[0.0, 1.0],
        _ => &[1.0, 1.0],
    };
    DistributionSpec::new(family, params).expect("reference parameters are valid")
}

/// inf over members q of `q_family` of KL(p‖q) or KL(q‖p).
pub fn inf_kl(p: &DistributionSpec, q_family: Family, direction: Direction, cfg: &InfKlConfig) -> Result<InfKlResult> {
    if p.family() == q_family {
        return Ok(InfKlResult { value: 0.0, minimizer: *p, converged: true, evaluations: 0 });
    }
    let compatible = match direction {
        Direction::PToQ => p.support().within(q_family.support()),
        Direction::QToP => q_family.support().within(p.support()),
    };
    if !compatible {
        return Ok(InfKlResult {
            value: f64::INFINITY,
            minimizer: reference_member(q_family),
            converged: true,
            evaluations: 0,
        });
    }
    if direction == Direction::PToQ {
        if let Some(r) = analytic_projection(p, q_family, cfg)? {
            return Ok(r);
        }
    }
    if q_family == Family::StudentT {
        return student_t_search(p, direction, cfg);
    }
    nelder_mead_search(p, q_family, direction, cfg)
}

fn finish(p: &DistributionSpec, q: DistributionSpec, cfg: &InfKlConfig, evaluations: usize, converged: bool) -> Result<InfKlResult> {
    let v = kl(p, &q, cfg.kl_tol)?;
    Ok(InfKlResult { value: v.value, minimizer: q, converged, evaluations: evaluations + 1 })
}

/// Moment projections that solve inf_q KL(p‖q) without iterating over q.
fn analytic_projection(p: &DistributionSpec, q_family: Family, cfg: &InfKlConfig) -> Result<Option<InfKlResult>> {
    match q_family {
        Family::LogNormal => {
            let (Ok(m), Ok(v)) = (p.mean_ln(), p.var_ln()) else { return Ok(None) };
            let q = DistributionSpec::lognormal(m, 1.0 / v)?;
            finish(p, q, cfg, 0, true).map(Some)
        }
        Family::Gamma => {
            let (Ok(m), Ok(ml)) = (p.mean(), p.mean_ln()) else { return Ok(None) };
            // β = α/E[X]; then ln α − ψ(α) = ln E[X] − E[ln X]
            let target = m.ln() - ml;
            if !(target > 0.0) {
                return Ok(None);
            }
            let mut evals = 0usize;
            let ln_a = brent_root(
                |la: f64| {
                    evals += 1;
                    let a = la.exp();
                    a.ln() - digamma(a) - target
                },
                (1e-10f64).ln(),
                (1e12f64).ln(),
                1e-14,
                400,
            )?;
            let a = ln_a.exp();
            let q = DistributionSpec::gamma(a, a / m)?;
            finish(p, q, cfg, evals, true).map(Some)
        }
        Family::Weibull => {
            let Ok(ml) = p.mean_ln() else { return Ok(None) };
            if p.ln_raw_moment(1.0).is_err() {
                return Ok(None);
            }
            // λ^κ = E[X^κ] leaves a convex objective in κ:
            // −ln κ + ln E[X^κ] − (κ−1) E[ln X] + 1 − H(p)
            let obj = |lk: f64| {
                let k = lk.exp();
                -k.ln() + p.ln_raw_moment(k).unwrap_or(f64::INFINITY) - (k - 1.0) * ml
            };
            let (lo, hi) = ((1e-3f64).ln(), (1e3f64).ln());
            let m = brent_minimize(obj, lo, hi, 1e-12, 500);
            let lk = m.x[0];
            let on_edge = (lk - lo).abs() < 1e-6 || (hi - lk).abs() < 1e-6;
            let k = lk.exp();
            let lam = (p.ln_raw_moment(k)? / k).exp();
            let q = DistributionSpec::weibull(lam, k)?;
            finish(p, q, cfg, m.evaluations, m.converged && !on_edge).map(Some)
        }
        Family::Poisson if p.is_discrete() => {
            let q = DistributionSpec::poisson(p.mean()?)?;
            finish(p, q, cfg, 0, true).map(Some)
        }
        Family::Geometric if p.is_discrete() => {
            let q = DistributionSpec::geometric(1.0 / (1.0 + p.mean()?))?;
            finish(p, q, cfg, 0, true).map(Some)
        }
        Family::Normal => match p.moments() {
            Ok((m, v)) => finish(p, DistributionSpec::normal(m, v.sqrt())?, cfg, 0, true).map(Some),
            // infinite variance: every normal is at infinite divergence
            Err(Error::MomentUndefined(_)) => Ok(Some(InfKlResult {
                value: f64::INFINITY,
                minimizer: reference_member(Family::Normal),
                converged: true,
                evaluations: 0,
            })),
            Err(e) => Err(e),
        },
        _ => Ok(None),
    }
}

fn directed(p: &DistributionSpec, q: &DistributionSpec, direction: Direction, tol: f64) -> Result<KlResult> {
    match direction {
        Direction::PToQ => kl(p, q, tol),
        Direction::QToP => kl(q, p, tol),
    }
}

fn student_t_search(p: &DistributionSpec, direction: Direction, cfg: &InfKlConfig) -> Result<InfKlResult> {
    let mut best: Option<(f64, DistributionSpec)> = None;
    let mut evaluations = 0;
    for nu in 2..=cfg.nu_max.max(2) {
        let q = DistributionSpec::student_t(nu)?;
        let v = directed(p, &q, direction, cfg.kl_tol)?.value;
        evaluations += 1;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, q));
        }
    }
    let (value, minimizer) = best.expect("at least one degree of freedom searched");
    Ok(InfKlResult { value, minimizer, converged: true, evaluations })
}

#[derive(Clone, Copy)]
enum Coord {
    Log,
    Logit,
    Free,
}

fn coords(family: Family) -> &'static [Coord] {
    match family {
        Family::Geometric => &[Coord::Logit],
        Family::Poisson => &[Coord::Log],
        Family::LogNormal | Family::Normal => &[Coord::Free, Coord::Log],
        Family::StudentT => &[],
        _ => &[Coord::Log, Coord::Log],
    }
}

fn from_unconstrained(family: Family, z: &[f64]) -> Option<DistributionSpec> {
    let params: Vec<f64> = coords(family)
        .iter()
        .zip(z)
        .map(|(c, &v)| match c {
            Coord::Log => v.exp(),
            Coord::Logit => 1.0 / (1.0 + (-v).exp()),
            Coord::Free => v,
        })
        .collect();
    DistributionSpec::new(family, &params).ok()
}

fn to_unconstrained(d: &DistributionSpec) -> Vec<f64> {
    coords(d.family())
        .iter()
        .zip(d.params())
        .map(|(c, &v)| match c {
            Coord::Log => v.ln(),
            Coord::Logit => (v / (1.0 - v)).ln(),
            Coord::Free => v,
        })
        .collect()
}

/// Deterministic first start: the member of `family` matching p's moments
/// where that is defined.
fn moment_start(p: &DistributionSpec, family: Family) -> Option<Vec<f64>> {
    let (m, v) = p.moments().ok()?;
    let d = match family {
        Family::Weibull | Family::Gamma | Family::LogNormal => crate::distributions::moment_match(family, m, v).ok()?,
        Family::Poisson => DistributionSpec::poisson(m).ok()?,
        Family::Geometric => DistributionSpec::geometric(1.0 / (1.0 + m)).ok()?,
        Family::Normal => DistributionSpec::normal(m, v.sqrt()).ok()?,
        _ => return None,
    };
    Some(to_unconstrained(&d))
}

fn nelder_mead_search(p: &DistributionSpec, q_family: Family, direction: Direction, cfg: &InfKlConfig) -> Result<InfKlResult> {
    use rand::Rng as _;
    let dim = coords(q_family).len();
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.starts);
    if let Some(s) = moment_start(p, q_family) {
        starts.push(s);
    }
    let mut rng = substream(cfg.seed, "inf-kl-start", q_family as u64);
    while starts.len() < cfg.starts.max(1) {
        // wide box: log-parameters in [−3, 3], free parameters in [−5, 5]
        let s = coords(q_family)
            .iter()
            .map(|c| match c {
                Coord::Free => rng.random_range(-5.0..5.0),
                _ => rng.random_range(-3.0..3.0),
            })
            .collect();
        starts.push(s);
    }
    let nm_cfg = NelderMeadConfig {
        x_tol: cfg.x_tol,
        f_tol: cfg.kl_tol,
        max_evaluations: cfg.max_evaluations,
        initial_step: 0.5,
    };
    let objective = |z: &[f64]| match from_unconstrained(q_family, z) {
        Some(q) => directed(p, &q, direction, cfg.kl_tol).map(|r| r.value).unwrap_or(f64::INFINITY),
        None => f64::INFINITY,
    };
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut evaluations = 0;
    for s in &starts {
        debug_assert_eq!(s.len(), dim);
        let m = nelder_mead(objective, s, &nm_cfg);
        evaluations += m.evaluations;
        if best.as_ref().is_none_or(|(b, _, _)| m.value < *b) {
            best = Some((m.value, m.x, m.converged));
        }
    }
    let (value, z, converged) = best.expect("at least one start");
    let minimizer = from_unconstrained(q_family, &z).unwrap_or_else(|| reference_member(q_family));
    Ok(InfKlResult { value, minimizer, converged: converged && value.is_finite(), evaluations })
}
