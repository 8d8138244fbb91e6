use std::fs;

use approx::assert_abs_diff_eq;
use lbcp::error::Error;
use lbcp::experiments::{
    abs_log_returns, coal_mining_analysis, compare_priors, ingest_counts, ingest_prices_to_abs_log_returns, ingest_values,
    run_scenario, sp500_analysis, write_analysis, write_frequency, AnalysisOptions, Sample, ScenarioConfig, RETURN_FLOOR,
};

fn manifest(path: &str) -> String {
    format!("{}/{path}", env!("CARGO_MANIFEST_DIR"))
}

fn small(id: u8, n: usize, r: usize, true_model: Option<usize>) -> ScenarioConfig {
    let mut c = ScenarioConfig::builtin(id, n, true_model).unwrap();
    c.replicates = r;
    c.prior_draws = 300;
    c.evidence_draws = 300;
    c
}

#[test]
fn reports_are_deterministic_and_thread_invariant() {
    let mut a = small(2, 60, 3, None);
    a.threads = 1;
    let mut b = a.clone();
    b.threads = 4;
    let ra = serde_json::to_string(&run_scenario(&a).unwrap()).unwrap();
    let ra2 = serde_json::to_string(&run_scenario(&a).unwrap()).unwrap();
    let rb = serde_json::to_string(&run_scenario(&b).unwrap()).unwrap();
    assert_eq!(ra, ra2);
    assert_eq!(ra, rb);
    let mut c = a.clone();
    c.seed = 99;
    assert_ne!(ra, serde_json::to_string(&run_scenario(&c).unwrap()).unwrap());
}

#[test]
fn frequency_accounting() {
    let cfg = small(3, 60, 4, None);
    let r = run_scenario(&cfg).unwrap();
    assert_eq!(r.records.len(), 4);
    assert_eq!(r.wins.iter().sum::<usize>(), 4);
    assert_eq!(r.true_model_frequency, r.wins[2]);
    for j in 0..3 {
        let mean = r.records.iter().map(|x| x.posteriors[j]).sum::<f64>() / 4.0;
        assert_abs_diff_eq!(r.mean_posterior[j], mean, epsilon = 1e-12);
        assert!((0.0..=1.0).contains(&r.mean_posterior[j]));
        assert!(r.var_posterior[j] >= 0.0);
    }
    for rec in &r.records {
        assert_abs_diff_eq!(rec.posteriors.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn scenario1_no_change_data_favours_m0() {
    let mut cfg = ScenarioConfig::builtin(1, 100, Some(0)).unwrap();
    cfg.replicates = 1;
    let r = run_scenario(&cfg).unwrap();
    assert!(r.records[0].posteriors[0] >= 0.8, "{:?}", r.records[0].posteriors);
}

#[test]
fn degenerate_two_point_run() {
    let cfg = small(1, 2, 1, None);
    let r = run_scenario(&cfg).unwrap();
    assert_eq!(r.records.len(), 1);
    let json = serde_json::to_string(&r).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["n"], 2);
}

#[test]
fn paired_design_single_replicate() {
    let mut cfg = ScenarioConfig::scenario4(150, lbcp::experiments::Scenario4Variant::MomentMatched).unwrap();
    cfg.replicates = 1;
    cfg.evidence_draws = 300;
    let p = compare_priors(&cfg).unwrap();
    assert!(p.same_datasets);
    assert_eq!(p.loss_based.records.len(), 1);
    assert_eq!(p.uniform.records.len(), 1);
    assert_eq!(p.loss_based.records[0].data_hash, p.uniform.records[0].data_hash);
    assert_eq!(p.loss_based.records[0].log_evidences, p.uniform.records[0].log_evidences);
    assert_eq!(p.uniform.model_priors, vec![1.0 / 3.0; 3]);
}

#[test]
fn scenario_validation() {
    assert!(ScenarioConfig::builtin(5, 100, None).is_err());
    assert!(ScenarioConfig::builtin(1, 100, Some(2)).is_err());
    let mut c = ScenarioConfig::builtin(2, 100, None).unwrap();
    c.replicates = 0;
    assert!(c.validate().is_err());
}

#[test]
fn returns_examples() {
    let (r, floored) = abs_log_returns(&[100.0, 100.0], RETURN_FLOOR);
    assert_eq!(r, vec![RETURN_FLOOR]);
    assert_eq!(floored, 1);
    let (r, _) = abs_log_returns(&[100.0, 110.0, 100.0], RETURN_FLOOR);
    assert_abs_diff_eq!(r[0], 0.09531, epsilon = 1e-5);
    assert_abs_diff_eq!(r[1], 1.1f64.ln(), epsilon = 1e-15);
}

#[test]
fn ingestion_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    fs::write(&p, "year,count\n1851,4\n1852,x\n").unwrap();
    let e = ingest_counts(&p).unwrap_err();
    assert!(matches!(e, Error::Parse(_)) && e.to_string().contains("line 3"), "{e}");
    fs::write(&p, "3\n-1\n").unwrap();
    let e = ingest_counts(&p).unwrap_err();
    assert!(e.to_string().contains("line 2"), "{e}");
    fs::write(&p, "3\n2.5\n").unwrap();
    assert!(ingest_counts(&p).is_err());
    fs::write(&p, "Date,Close\n2008-01-02,10\n2008-01-03,0\n").unwrap();
    let e = ingest_prices_to_abs_log_returns(&p, RETURN_FLOOR).unwrap_err();
    assert!(matches!(e, Error::Data(_)) && e.to_string().contains("line 3"), "{e}");
    fs::write(&p, "1,2,3\n").unwrap();
    assert!(ingest_values(&p).is_err());
    let missing = dir.path().join("missing.csv");
    let e = ingest_counts(&missing).unwrap_err();
    assert!(matches!(e, Error::Io(_)) && e.to_string().contains("missing.csv"), "{e}");
}

#[test]
fn vendored_data_files() {
    let coal = ingest_counts(manifest("data/coal.csv")).unwrap();
    assert_eq!(coal.len(), 112);
    assert_eq!(coal.label(0), "1851");
    assert_eq!(coal.label(111), "1962");
    let (sp, _) = ingest_prices_to_abs_log_returns(manifest("data/sp500.csv"), RETURN_FLOOR).unwrap();
    assert_eq!(sp.len(), 1001);
    assert!(sp.values.iter().all(|v| *v > 0.0));
}

#[test]
fn coal_report_and_outputs() {
    let coal = ingest_counts(manifest("data/coal.csv")).unwrap();
    let r = coal_mining_analysis(&coal).unwrap();
    assert_eq!(r.model_priors, vec![0.5, 0.5]);
    assert!(r.posteriors[1] > 0.999);
    let dir = tempfile::tempdir().unwrap();
    write_analysis(dir.path(), &r, &coal).unwrap();
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["method"], "conjugate_exact");
    let csv = fs::read_to_string(dir.path().join("location_posterior.csv")).unwrap();
    assert!(csv.starts_with("model,change_point,location,label,mass\n"));
    assert_eq!(csv.lines().count(), 1 + 111);
}

#[test]
fn constant_counts_favour_no_change() {
    let r = coal_mining_analysis(&Sample::new(vec![3.0; 60])).unwrap();
    assert!(r.posteriors[0] > 0.5, "{:?}", r.posteriors);
}

#[test]
fn sp500_prefix_smoke() {
    let (sp, _) = ingest_prices_to_abs_log_returns(manifest("data/sp500.csv"), RETURN_FLOOR).unwrap();
    let head = Sample { values: sp.values[..50].to_vec(), labels: sp.labels.as_ref().map(|l| l[..50].to_vec()) };
    let opts = AnalysisOptions { prior_draws: 500, threads: 2, ..Default::default() };
    let r = sp500_analysis(&head, &opts).unwrap();
    assert_eq!(r.posteriors.len(), 3);
    assert_abs_diff_eq!(r.posteriors.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    assert!(r.to_json().unwrap().contains("schwarz_bic"));
}

#[test]
fn frequency_outputs_written() {
    let cfg = small(3, 60, 2, None);
    let r = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_frequency(dir.path(), &r, &[&r], &cfg.simulate(0)).unwrap();
    let csv = fs::read_to_string(dir.path().join("replicates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("prior,replicate,data_hash,winner,log_evidence_0"));
    assert!(dir.path().join("data_replicate0.csv").exists());
}
