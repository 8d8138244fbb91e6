use approx::assert_abs_diff_eq;
use lbcp::distributions::{DistributionSpec, Family};
use lbcp::evidence::{
    conjugate_segment_log_marginal, location_marginals, location_posterior, log_bayes_factors, log_evidence, mc_log_evidence,
    posterior_model_probs, EvidenceConfig, EvidenceMethod, EvidenceMode,
};
use lbcp::experiments::{ingest_counts, ScenarioConfig};
use lbcp::mle::{profile_fit, schwarz_log_bayes_factor};
use lbcp::model_priors::SegmentPrior;
use lbcp::rng::{seeded, substream};
use proptest::prelude::*;
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

fn seg(family: Family, priors: &[&str]) -> SegmentPrior {
    SegmentPrior::new(family, priors.iter().map(|p| p.parse().unwrap()).collect()).unwrap()
}

/// Poisson data, Gamma(a, b) prior on the rate.
fn poisson_gamma(a: f64, b: f64, x: &[f64]) -> f64 {
    let (n, s) = (x.len() as f64, x.iter().sum::<f64>());
    a * b.ln() - ln_gamma(a) + ln_gamma(a + s) - (a + s) * (b + n).ln() - x.iter().map(|v| ln_gamma(v + 1.0)).sum::<f64>()
}

/// Geometric data (failures before success), Beta(a, b) prior on p.
fn geometric_beta(a: f64, b: f64, x: &[f64]) -> f64 {
    ln_beta(a + x.len() as f64, b + x.iter().sum::<f64>()) - ln_beta(a, b)
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Evidence by explicit enumeration of every location vector (k ≤ 2).
fn enumerated(seg_marg: &dyn Fn(usize, &[f64]) -> f64, x: &[f64], k: usize) -> f64 {
    let n = x.len();
    let mut terms = Vec::new();
    match k {
        0 => terms.push(seg_marg(0, x)),
        1 => {
            for m in 1..n {
                terms.push(seg_marg(0, &x[..m]) + seg_marg(1, &x[m..]));
            }
        }
        _ => {
            for a in 1..n {
                for b in a + 1..n {
                    terms.push(seg_marg(0, &x[..a]) + seg_marg(1, &x[a..b]) + seg_marg(2, &x[b..]));
                }
            }
        }
    }
    log_sum_exp(&terms) - (terms.len() as f64).ln()
}

#[test]
fn conjugate_examples() {
    let g = DistributionSpec::gamma(2.0, 1.0).unwrap();
    assert_abs_diff_eq!(conjugate_segment_log_marginal(Family::Poisson, &g, &[1.0]).unwrap(), 0.25f64.ln(), epsilon = 1e-14);
    let b = DistributionSpec::beta(1.0, 1.0).unwrap();
    assert_abs_diff_eq!(conjugate_segment_log_marginal(Family::Geometric, &b, &[0.0]).unwrap(), 0.5f64.ln(), epsilon = 1e-14);
    let zeros = vec![0.0; 100];
    assert_abs_diff_eq!(
        conjugate_segment_log_marginal(Family::Poisson, &g, &zeros).unwrap(),
        -2.0 * 101f64.ln(),
        epsilon = 1e-12
    );
    assert!(conjugate_segment_log_marginal(Family::Weibull, &g, &[1.0]).is_err());
    let mut rng = seeded(4);
    let x = DistributionSpec::poisson(2.5).unwrap().sample(40, &mut rng);
    assert_abs_diff_eq!(conjugate_segment_log_marginal(Family::Poisson, &g, &x).unwrap(), poisson_gamma(2.0, 1.0, &x), epsilon = 1e-10);
    let x = DistributionSpec::geometric(0.3).unwrap().sample(40, &mut rng);
    let b = DistributionSpec::beta(2.0, 2.0).unwrap();
    assert_abs_diff_eq!(conjugate_segment_log_marginal(Family::Geometric, &b, &x).unwrap(), geometric_beta(2.0, 2.0, &x), epsilon = 1e-10);
}

#[test]
fn exact_evidence_matches_enumeration() {
    let mut rng = seeded(21);
    let mut x = DistributionSpec::poisson(1.0).unwrap().sample(15, &mut rng);
    x.extend(DistributionSpec::poisson(4.0).unwrap().sample(12, &mut rng));
    x.extend(DistributionSpec::poisson(2.0).unwrap().sample(13, &mut rng));
    let priors = [(2.0, 1.0), (3.0, 1.0), (1.0, 0.5)];
    let segs: Vec<SegmentPrior> = priors.iter().map(|(a, b)| seg(Family::Poisson, &[&format!("gamma:{a},{b}")])).collect();
    let marg = |s: usize, d: &[f64]| poisson_gamma(priors[s].0, priors[s].1, d);
    for k in 0..=2 {
        let r = log_evidence(&segs[..=k], &x, &EvidenceConfig::default()).unwrap();
        assert_eq!(r.method, EvidenceMethod::ConjugateExact);
        assert!(r.mc_se.is_none());
        assert_abs_diff_eq!(r.log_evidence, enumerated(&marg, &x, k), epsilon = 1e-9);
    }
}

#[test]
fn monte_carlo_agrees_with_exact_across_seeds() {
    let segs = [seg(Family::Poisson, &["gamma:2,1"]), seg(Family::Poisson, &["gamma:2,1"]), seg(Family::Poisson, &["gamma:3,2"])];
    let geo = [seg(Family::Geometric, &["beta:2,2"]), seg(Family::Geometric, &["beta:1,1"])];
    let mut misses = 0;
    let mut total = 0;
    for seed in 1..=10u64 {
        let mut rng = substream(seed, "mc-vs-exact-data", 0);
        let mut x = DistributionSpec::poisson(1.5).unwrap().sample(20, &mut rng);
        x.extend(DistributionSpec::poisson(3.0).unwrap().sample(20, &mut rng));
        let mut y = DistributionSpec::geometric(0.6).unwrap().sample(15, &mut rng);
        y.extend(DistributionSpec::geometric(0.3).unwrap().sample(15, &mut rng));
        let cases: Vec<(&[SegmentPrior], &[f64])> = vec![(&segs[..1], &x), (&segs[..2], &x), (&segs[..3], &x), (&geo[..], &y)];
        for (s, data) in cases {
            let exact = log_evidence(s, data, &EvidenceConfig::default()).unwrap().log_evidence;
            let mc = mc_log_evidence(s, data, 2000, seed).unwrap();
            assert_eq!(mc.method, EvidenceMethod::MonteCarlo);
            let se = mc.mc_se.unwrap();
            assert!(se > 0.0);
            total += 1;
            if (mc.log_evidence - exact).abs() > 3.0 * se {
                misses += 1;
            }
            // a gross error would show up far outside the band
            assert!((mc.log_evidence - exact).abs() <= 6.0 * se, "seed {seed}: mc {} exact {exact} se {se}", mc.log_evidence);
        }
    }
    // 3-se coverage: allow the odd excursion among 40 comparisons
    assert!(misses <= 2, "{misses} of {total} comparisons outside 3 se");
}

#[test]
fn geometric_beta_toy() {
    let x = [0.0, 2.0, 1.0, 5.0];
    let segs = [seg(Family::Geometric, &["beta:2,2"]), seg(Family::Geometric, &["beta:1,1"])];
    let priors = [(2.0, 2.0), (1.0, 1.0)];
    let exact = enumerated(&|s, d| geometric_beta(priors[s].0, priors[s].1, d), &x, 1);
    let r = log_evidence(&segs, &x, &EvidenceConfig::default()).unwrap();
    assert_abs_diff_eq!(r.log_evidence, exact, epsilon = 1e-12);
    let mc = mc_log_evidence(&segs, &x, 4000, 8).unwrap();
    assert!((mc.log_evidence - exact).abs() <= 3.0 * mc.mc_se.unwrap(), "{} vs {exact}", mc.log_evidence);
}

#[test]
fn location_posterior_finds_rate_jump() {
    let mut rng = seeded(50);
    let mut x = DistributionSpec::poisson(2.0).unwrap().sample(50, &mut rng);
    x.extend(DistributionSpec::poisson(10.0).unwrap().sample(50, &mut rng));
    let segs = [seg(Family::Poisson, &["gamma:2,1"]), seg(Family::Poisson, &["gamma:2,1"])];
    let post = location_posterior(&segs, &x, &EvidenceConfig::default()).unwrap();
    assert_abs_diff_eq!(post.masses().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    let near: f64 = post.iter().filter(|(m, _)| (48..=52).contains(&m.locations()[0])).map(|(_, w)| w).sum();
    assert!(near >= 0.9, "mass near the jump {near}");
    // posterior against a hand enumeration
    let terms: Vec<f64> = (1..100).map(|m| poisson_gamma(2.0, 1.0, &x[..m]) + poisson_gamma(2.0, 1.0, &x[m..])).collect();
    let z = log_sum_exp(&terms);
    for (i, (_, w)) in post.iter().enumerate() {
        assert_abs_diff_eq!(w, (terms[i] - z).exp(), epsilon = 1e-12);
    }
}

#[test]
fn location_posterior_thread_invariant_and_normalised() {
    let mut rng = seeded(51);
    let mut x = DistributionSpec::lognormal(0.0, 4.0).unwrap().sample(30, &mut rng);
    x.extend(DistributionSpec::lognormal(1.0, 4.0).unwrap().sample(30, &mut rng));
    x.extend(DistributionSpec::lognormal(0.0, 1.0).unwrap().sample(30, &mut rng));
    let segs = [
        seg(Family::LogNormal, &["normal:0,1", "gamma:4,1"]),
        seg(Family::LogNormal, &["normal:0,1", "gamma:4,1"]),
        seg(Family::LogNormal, &["normal:0,1", "gamma:4,1"]),
    ];
    let base = EvidenceConfig { draws: 500, ..Default::default() };
    let one = location_posterior(&segs, &x, &EvidenceConfig { threads: 1, ..base }).unwrap();
    let four = location_posterior(&segs, &x, &EvidenceConfig { threads: 4, ..base }).unwrap();
    assert_eq!(one.masses(), four.masses());
    assert_abs_diff_eq!(one.masses().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    for marg in location_marginals(&one) {
        assert_abs_diff_eq!(marg.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
    let e1 = log_evidence(&segs, &x, &EvidenceConfig { threads: 1, ..base }).unwrap();
    let e4 = log_evidence(&segs, &x, &EvidenceConfig { threads: 4, ..base }).unwrap();
    assert_eq!(e1.log_evidence, e4.log_evidence);
    assert_eq!(e1.mc_se, e4.mc_se);
}

#[test]
fn two_points_one_change_is_a_point_mass() {
    let segs = [seg(Family::Poisson, &["gamma:2,1"]), seg(Family::Poisson, &["gamma:2,1"])];
    let post = location_posterior(&segs, &[1.0, 3.0], &EvidenceConfig::default()).unwrap();
    assert_eq!(post.len(), 1);
    assert_eq!(post.support()[0].locations(), &[1]);
    assert_eq!(post.masses(), &[1.0]);
}

#[test]
fn out_of_support_data_gives_zero_evidence() {
    let segs = [seg(Family::Poisson, &["gamma:2,1"])];
    let r = log_evidence(&segs, &[1.0, 2.5, 3.0], &EvidenceConfig::default()).unwrap();
    assert_eq!(r.log_evidence, f64::NEG_INFINITY);
    assert!(!r.diagnostics.is_empty());
    let w = [seg(Family::Weibull, &["gamma:1.5,1", "gamma:5,1"])];
    let r = log_evidence(&w, &[1.0, -2.0], &EvidenceConfig::default()).unwrap();
    assert_eq!(r.log_evidence, f64::NEG_INFINITY);
}

#[test]
fn posterior_examples() {
    let p = posterior_model_probs(&[0.47, 0.53], &[12.39f64.ln(), 0.0]).unwrap();
    assert_abs_diff_eq!(p[0], 1.0 / (1.0 + (0.53 / 0.47) / 12.39), epsilon = 1e-12);
    assert_abs_diff_eq!(p[0], 0.92, epsilon = 0.005);
    let p = posterior_model_probs(&[1.0 / 3.0; 3], &[-4.0; 3]).unwrap();
    for v in p {
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
    }
    let p = posterior_model_probs(&[0.5, 0.5], &[0.0, 6.20e12f64.ln()]).unwrap();
    assert!(p[1] > 1.0 - 1e-12);
    assert!(posterior_model_probs(&[0.5, 0.5], &[f64::NEG_INFINITY; 2]).is_err());
    let b = log_bayes_factors(&[-3.0, -1.0]);
    assert_eq!(b[1][0], 2.0);
    assert_eq!(b[0][1], -2.0);
}

proptest! {
    #[test]
    fn posterior_log_shift_invariant(w in proptest::collection::vec(0.01f64..1.0, 2..6), ev in proptest::collection::vec(-500.0f64..0.0, 6), shift in -1e4f64..1e4) {
        let z: f64 = w.iter().sum();
        let priors: Vec<f64> = w.iter().map(|v| v / z).collect();
        let ev = &ev[..priors.len()];
        let shifted: Vec<f64> = ev.iter().map(|e| e + shift).collect();
        let a = posterior_model_probs(&priors, ev).unwrap();
        let b = posterior_model_probs(&priors, &shifted).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
        }
    }

    #[test]
    fn schwarz_antisymmetric(seed in 0u64..1000, jump in 0.0f64..2.0) {
        let mut rng = seeded(seed);
        let mut x = DistributionSpec::lognormal(0.0, 4.0).unwrap().sample(40, &mut rng);
        x.extend(DistributionSpec::lognormal(jump, 4.0).unwrap().sample(40, &mut rng));
        let m0 = [Family::Weibull];
        let m1 = [Family::Weibull, Family::LogNormal];
        let m2 = [Family::LogNormal, Family::Gamma, Family::LogNormal];
        for (a, b) in [(&m0[..], &m1[..]), (&m1[..], &m2[..]), (&m0[..], &m2[..])] {
            let ab = schwarz_log_bayes_factor(a, b, &x, 10).unwrap();
            let ba = schwarz_log_bayes_factor(b, a, &x, 10).unwrap();
            prop_assert_eq!(ab, -ba);
        }
        prop_assert_eq!(schwarz_log_bayes_factor(&m1, &m1, &x, 10).unwrap(), 0.0);
    }
}

#[test]
fn schwarz_detects_extreme_jump() {
    let mut rng = seeded(77);
    let mut x = DistributionSpec::gamma(2.0, 2.0).unwrap().sample(100, &mut rng);
    x.extend(DistributionSpec::gamma(2.0, 0.05).unwrap().sample(100, &mut rng));
    let lb01 = schwarz_log_bayes_factor(&[Family::Gamma], &[Family::Gamma, Family::Gamma], &x, 10).unwrap();
    assert!(lb01 < -50.0, "log B01 = {lb01}");
    let fit = profile_fit(&[Family::Gamma, Family::Gamma], &x, 10, 2).unwrap();
    assert_eq!(fit.locations.unwrap().locations(), &[100]);
}

#[test]
fn coal_mining_posterior_mode() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/coal.csv");
    let data = ingest_counts(path).unwrap();
    assert_eq!(data.len(), 112);
    let segs = [seg(Family::Poisson, &["gamma:2,1"]), seg(Family::Poisson, &["gamma:2,1"])];
    let post = location_posterior(&segs, &data.values, &EvidenceConfig::default()).unwrap();
    let year: i32 = data.location_label(post.mode().locations()[0]).parse().unwrap();
    assert!((1889..=1895).contains(&year), "mode year {year}");
}

#[test]
fn scenario2_single_change_data_favours_m1() {
    // reference priors with evidences over the full location priors
    let cfg = ScenarioConfig::builtin(2, 100, Some(1)).unwrap();
    let x = cfg.simulate(0);
    let ev_cfg = EvidenceConfig { mode: EvidenceMode::Auto, draws: 2000, threads: 4, ..Default::default() };
    let ev: Vec<f64> =
        (0..3).map(|k| log_evidence(&cfg.evidence_segments[..=k], &x, &ev_cfg).unwrap().log_evidence).collect();
    let post = posterior_model_probs(&[0.27, 0.39, 0.34], &ev).unwrap();
    assert!(post[1] > post[0] && post[1] > post[2], "{post:?}");
    assert!(post[1] >= 0.8, "{post:?}");
}
