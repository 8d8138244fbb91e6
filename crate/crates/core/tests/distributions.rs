mod common;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use lbcp::distributions::{moment_match, DistributionSpec, Family};
use lbcp::error::Error;
use lbcp::rng::seeded;
use proptest::prelude::*;

use common::{central4, mean_var, simpson_positive, simpson_real, simpson_unit};

fn lattice() -> Vec<DistributionSpec> {
    let mut v = Vec::new();
    for p in [0.05, 0.3, 0.8, 0.97] {
        v.push(DistributionSpec::geometric(p).unwrap());
    }
    for l in [0.1, 3.0, 40.0] {
        v.push(DistributionSpec::poisson(l).unwrap());
    }
    for (a, b) in [(0.7, 1.0), (10.0, 2.0), (2.0, 0.1)] {
        v.push(DistributionSpec::gamma(a, b).unwrap());
    }
    for (l, k) in [(1.5, 5.0), (5.556878, 3.502839), (2.0, 0.8)] {
        v.push(DistributionSpec::weibull(l, k).unwrap());
    }
    for (m, t) in [(0.05, 16.0), (1.561783, 10.492059), (-1.0, 0.5)] {
        v.push(DistributionSpec::lognormal(m, t).unwrap());
    }
    for nu in [2.0, 3.0, 30.0] {
        v.push(DistributionSpec::new(Family::StudentT, &[nu]).unwrap());
    }
    for (m, s) in [(0.05, 1.0), (-3.0, 0.2)] {
        v.push(DistributionSpec::normal(m, s).unwrap());
    }
    for (a, b) in [(2.0, 2.0), (0.7, 3.0), (20.0, 5.0)] {
        v.push(DistributionSpec::beta(a, b).unwrap());
    }
    v
}

fn total_mass(d: &DistributionSpec) -> f64 {
    let f = |x: f64| d.log_density(x).exp();
    match d.family() {
        Family::Geometric | Family::Poisson => (0..20_000).map(|x| f(x as f64)).sum(),
        Family::Gamma | Family::Weibull | Family::LogNormal => simpson_positive(f, -60.0, 8.0, 400_000),
        Family::StudentT | Family::Normal => simpson_real(f, 40.0, 400_000),
        Family::Beta => simpson_unit(f, 80.0, 400_000),
    }
}

#[test]
fn densities_integrate_to_one() {
    for d in lattice() {
        let z = total_mass(&d);
        assert!((z - 1.0).abs() < 1e-8, "{d}: total mass {z}");
    }
}

#[test]
fn sample_moments_within_four_standard_errors() {
    let n = 100_000;
    for (i, d) in lattice().into_iter().enumerate() {
        // Student-t with nu < 5 has no finite fourth moment
        if d.family() == Family::StudentT && d.params()[0] < 5.0 {
            continue;
        }
        let x = d.sample(n, &mut seeded(1000 + i as u64));
        let (m, v) = mean_var(&x);
        let (mu, var) = d.moments().unwrap();
        let se_mean = (var / n as f64).sqrt();
        assert!((m - mu).abs() < 4.0 * se_mean, "{d}: mean {m} vs {mu}");
        let se_var = ((central4(&x) - v * v) / n as f64).sqrt();
        assert!((v - var).abs() < 4.0 * se_var, "{d}: variance {v} vs {var} (se {se_var})");
    }
}

#[test]
fn sampling_examples() {
    let x = DistributionSpec::poisson(3.0).unwrap().sample(100_000, &mut seeded(7));
    assert_abs_diff_eq!(mean_var(&x).0, 3.0, epsilon = 0.02);
    let x = DistributionSpec::geometric(0.8).unwrap().sample(100_000, &mut seeded(7));
    assert_abs_diff_eq!(mean_var(&x).0, 0.25, epsilon = 0.01);
    let mut x = DistributionSpec::student_t(3).unwrap().sample(100_000, &mut seeded(7));
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_abs_diff_eq!(0.5 * (x[49_999] + x[50_000]), 0.0, epsilon = 0.02);
}

#[test]
fn sampling_is_reproducible() {
    for d in lattice() {
        assert_eq!(d.sample(50, &mut seeded(11)), d.sample(50, &mut seeded(11)), "{d}");
    }
}

#[test]
fn moment_examples() {
    let (m, v) = DistributionSpec::gamma(10.0, 2.0).unwrap().moments().unwrap();
    assert_abs_diff_eq!(m, 5.0, epsilon = 1e-14);
    assert_abs_diff_eq!(v, 2.5, epsilon = 1e-14);
    let ln = DistributionSpec::lognormal(0.3, 4.0).unwrap();
    assert_relative_eq!(ln.mean().unwrap(), (0.3f64 + 1.0 / 8.0).exp(), max_relative = 1e-15);
    let e = DistributionSpec::student_t(2).unwrap().moments().unwrap_err();
    assert!(matches!(e, Error::MomentUndefined(_)), "{e}");
}

#[test]
fn moment_match_examples() {
    let g = moment_match(Family::Gamma, 5.0, 2.5).unwrap();
    assert_abs_diff_eq!(g.params()[0], 10.0, epsilon = 1e-12);
    assert_abs_diff_eq!(g.params()[1], 2.0, epsilon = 1e-12);

    let ln = moment_match(Family::LogNormal, 5.0, 2.5).unwrap();
    let s2 = 1.1f64.ln();
    assert_abs_diff_eq!(ln.params()[0], 5f64.ln() - s2 / 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(ln.params()[0], 1.561783, epsilon = 1e-6);
    assert_abs_diff_eq!(ln.params()[1], 1.0 / s2, epsilon = 1e-9);

    // bisection on the shape over [0.1, 100]
    let cv = |k: f64| {
        let g1 = statrs::function::gamma::gamma(1.0 + 1.0 / k);
        statrs::function::gamma::gamma(1.0 + 2.0 / k) / (g1 * g1) - 1.1
    };
    let (mut lo, mut hi) = (0.1, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cv(mid) > 0.0 { lo = mid } else { hi = mid }
    }
    let w = moment_match(Family::Weibull, 5.0, 2.5).unwrap();
    assert_relative_eq!(w.params()[1], lo, max_relative = 1e-9);
    assert_relative_eq!(w.params()[0], 5.0 / statrs::function::gamma::gamma(1.0 + 1.0 / lo), max_relative = 1e-9);

    assert!(matches!(moment_match(Family::Poisson, 5.0, 2.5), Err(Error::Infeasible(_))));
    assert!(matches!(moment_match(Family::Gamma, -1.0, 2.5), Err(Error::Infeasible(_))));
}

#[test]
fn log_density_examples() {
    assert_abs_diff_eq!(DistributionSpec::poisson(3.0).unwrap().log_density(0.0), -3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(DistributionSpec::geometric(0.8).unwrap().log_density(0.0), -0.22314, epsilon = 1e-5);
    assert_abs_diff_eq!(
        DistributionSpec::lognormal(0.0, 1.0).unwrap().log_density(1.0),
        -0.5 * (2.0 * std::f64::consts::PI).ln(),
        epsilon = 1e-15
    );
    assert_eq!(DistributionSpec::gamma(2.0, 1.0).unwrap().log_density(-0.1), f64::NEG_INFINITY);
    assert!(matches!(DistributionSpec::poisson(-1.0), Err(Error::ParameterDomain(_))));
}

#[test]
fn literals_round_trip() {
    for d in lattice() {
        let back: DistributionSpec = d.to_string().parse().unwrap();
        assert_eq!(back, d);
    }
    assert_eq!("WEIBULL:1.5,5".parse::<DistributionSpec>().unwrap(), DistributionSpec::weibull(1.5, 5.0).unwrap());
}

proptest! {
    #[test]
    fn moment_match_round_trip(mean in 0.05f64..50.0, cv in 0.05f64..3.0) {
        let var = (cv * mean).powi(2);
        for f in [Family::Gamma, Family::LogNormal, Family::Weibull] {
            let d = moment_match(f, mean, var).unwrap();
            let (m, v) = d.moments().unwrap();
            prop_assert!(((m - mean) / mean).abs() < 1e-8, "{} mean {} vs {}", d, m, mean);
            prop_assert!(((v - var) / var).abs() < 1e-8, "{} variance {} vs {}", d, v, var);
        }
    }

    #[test]
    fn log_density_continuous_in_parameters(i in 0usize..24, x_raw in 0.01f64..0.99, dir in 0usize..2) {
        let d = lattice()[i];
        if d.family() == Family::StudentT {
            return Ok(());
        }
        let x = match d.family() {
            Family::Geometric | Family::Poisson => (x_raw * 10.0).floor(),
            Family::Beta => x_raw,
            Family::Normal => 6.0 * x_raw - 3.0,
            _ => 8.0 * x_raw + 0.05,
        };
        if dir >= d.params().len() {
            return Ok(());
        }
        let base = d.log_density(x);
        prop_assert!(base.is_finite());
        let mut prev = f64::INFINITY;
        for h in [1e-3, 1e-4, 1e-5] {
            let mut p = d.params().to_vec();
            p[dir] *= 1.0 + h;
            let e = DistributionSpec::new(d.family(), &p).unwrap();
            let diff = (e.log_density(x) - base).abs();
            prop_assert!(diff.is_finite());
            // first-order: shrinking the step by 10 shrinks the change by about 10
            prop_assert!(diff <= prev / 5.0 + 1e-12, "{} at {}: {} then {}", d, x, prev, diff);
            prev = diff;
        }
    }
}
