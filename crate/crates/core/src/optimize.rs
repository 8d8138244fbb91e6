//! Derivative-free minimisation and bracketed root finding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadConfig {
    /// Stop once the simplex diameter falls below this.
    pub x_tol: f64,
    /// ...and the spread of function values below this.
    pub f_tol: f64,
    pub max_evaluations: usize,
    /// Initial simplex edge length along each axis.
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig { x_tol: 1e-8, f_tol: 1e-12, max_evaluations: 2000, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead simplex with the standard coefficients (1, 2, ½, ½).
///
/// Non-finite objective values are treated as +∞ so the simplex moves away
/// from infeasible regions.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], cfg: &NelderMeadConfig) -> Minimum {
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += cfg.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();

    let mut converged = false;
    while evaluations < cfg.max_evaluations {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = values[dim] - values[0];
        if diameter <= cfg.x_tol && (spread <= cfg.f_tol || !spread.is_finite() && values[0].is_finite()) {
            converged = true;
            break;
        }
        if diameter <= cfg.x_tol * 1e-3 {
            converged = values[0].is_finite();
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[dim]).map(|(c, w)| c + t * (w - c)).collect()
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = eval(&expanded, &mut evaluations);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let (contracted, fc) = if fr < values[dim] {
                let c = along(-0.5);
                let v = eval(&c, &mut evaluations);
                (c, v)
            } else {
                let c = along(0.5);
                let v = eval(&c, &mut evaluations);
                (c, v)
            };
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..=dim {
                    let shrunk: Vec<f64> =
                        simplex[0].iter().zip(&simplex[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    values[i] = eval(&shrunk, &mut evaluations);
                    simplex[i] = shrunk;
                }
            }
        }
    }

    let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), value: values[best], evaluations, converged }
}

/// Brent's method for a one-dimensional minimum inside [a, b].
pub fn brent_minimize<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Minimum {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut evaluations = 1;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return Minimum { x: vec![x], value: fx, evaluations, converged: true };
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = {
            let v = f(u);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        evaluations += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum { x: vec![x], value: fx, evaluations, converged: false }
}

/// Root of a continuous function on a sign-changing bracket (Brent–Dekker).
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Infeasible(format!(
            "root not bracketed on [{lo}, {hi}] (f = {fa}, {fb})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NonConvergence(format!("root finding on [{lo}, {hi}] exceeded {max_iter} iterations")))
}
