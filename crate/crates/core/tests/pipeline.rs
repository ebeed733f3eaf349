use std::path::Path;

use taxmerge::pipeline::synthetic::{generate_synthetic, SyntheticSpec};
use taxmerge::pipeline::{
    compare, diagnose_cross, diagnose_dataset, run_cycle1, run_cycle1a, run_cycle2, CycleArtifacts, CycleConfig,
    CycleSummary,
};
use taxmerge::{Dataset, Error};

const SPEC: SyntheticSpec = SyntheticSpec { n1: 300, n2: 200, n_pool: 400, seed: 3 };

fn suite(dir: &Path) -> CycleConfig {
    generate_synthetic(SPEC).unwrap().write(dir).unwrap();
    CycleConfig::load(&dir.join("config.json")).unwrap()
}

#[test]
fn identical_configs_give_identical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    let a = run_cycle1(&cfg).unwrap();
    let b = run_cycle1(&cfg).unwrap();
    assert_eq!(a.model.to_bytes(), b.model.to_bytes());
    assert_eq!(a.holdout_report, b.holdout_report);
    assert_eq!(a.summary_record(), b.summary_record());
}

#[test]
fn empty_directive_list_reproduces_cycle1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    let c1 = run_cycle1(&cfg).unwrap();
    let c1a = run_cycle1a(&cfg, &[]).unwrap();
    assert_eq!(c1.model.to_bytes(), c1a.model.to_bytes());
    assert_eq!(c1.holdout_report, c1a.holdout_report);
    assert_eq!(c1.stamp, c1a.stamp);
}

#[test]
fn cycle2_fuses_above_the_previous_predictions_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    let c1a = run_cycle1a(&cfg, &cfg.load_directives().unwrap()).unwrap();
    let c2 = run_cycle2(&cfg, &c1a).unwrap();
    let fused = c2.fused.as_ref().expect("cycle 2 keeps its fused dataset");
    let t = &c2.taxonomy;
    for r in &fused.records {
        let target = r.target_vector(t).unwrap();
        let pred = c1a.model.predict(t, &r.text).unwrap();
        assert!(target.scores().iter().zip(pred.scores()).all(|(s, p)| s >= p));
        assert!(target.scores().iter().zip(r.human_vector(t).unwrap().scores()).all(|(s, h)| s >= h));
    }

    let out = dir.path().join("c2");
    c2.save(&out).unwrap();
    let back = CycleArtifacts::load(&out).unwrap();
    assert_eq!(back.model, c2.model);
    assert_eq!(back.summary_record(), c2.summary_record());
    assert_eq!(back.fused.as_ref().map(Dataset::len), Some(fused.len()));
    let header = std::fs::read_to_string(out.join("holdout_report.tsv")).unwrap();
    assert!(header.starts_with(&format!("# cycle=cycle2 config={}", cfg.hash())));
}

#[test]
fn cycle2_refuses_artifacts_from_another_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    let c1 = run_cycle1(&cfg).unwrap();
    let mut other = cfg.clone();
    other.seed += 1;
    assert!(matches!(run_cycle2(&other, &c1), Err(Error::StampMismatch(..))));
}

#[test]
fn compare_rejects_mixed_stamps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    let a = run_cycle1(&cfg).unwrap().summary_record();
    let mut b: CycleSummary = a.clone();
    b.stamp.config_hash = "0".repeat(64);
    assert!(matches!(compare(&[a.clone(), b]), Err(Error::StampMismatch(..))));
    assert!(compare(&[]).is_err());
    let report = compare(&[a.clone(), a]).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.deltas[0].ets_f1, 0.0);
}

#[test]
fn empty_dataset1_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    std::fs::write(dir.path().join("dataset1.jsonl"), "").unwrap();
    assert!(matches!(run_cycle1(&cfg), Err(Error::EmptyDataset)));
}

#[test]
fn diagnosing_an_empty_dataset_yields_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    let c1 = run_cycle1(&cfg).unwrap();
    let d = diagnose_dataset(&cfg, &c1, &Dataset::default()).unwrap();
    assert_eq!(d.n_records, 0);
    assert!(d.report.is_none());
    assert!(d.outliers.is_empty());
    assert!(d.mislabels.is_empty());

    let full = diagnose_cross(&cfg, &c1).unwrap();
    assert_eq!(full.n_records, SPEC.n2 - full.mapping_report.emptied);
}

#[test]
fn config_rejects_unknown_fields_and_bad_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = suite(dir.path());
    let mut json: serde_json::Value = serde_json::from_str(&cfg.to_json()).unwrap();
    json["surprise"] = 1.into();
    assert!(CycleConfig::from_json(&json.to_string()).is_err());

    let mut bad = cfg.clone();
    bad.holdout_fraction = 1.0;
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
}
