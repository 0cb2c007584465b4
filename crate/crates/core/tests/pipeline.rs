mod common;

use std::path::Path;

use contour_hedge::contour::{surface_value, SurfaceSpec};
use contour_hedge::criteria::{evaluate_criterion, CriterionKind};
use contour_hedge::hedging::ResidualLedger;
use contour_hedge::report::{
    parse_report_kv, run_pipeline, run_pipeline_with, RunConfig, CONTOUR_TSV, DELTA_SAMPLES_TSV,
    REPORT_KV, REPORT_TXT, SURFACE_TSV,
};
use contour_hedge::{Error, Execution};
use proptest::prelude::*;

fn small_config(prices: &Path, out: &Path) -> RunConfig {
    let spec = SurfaceSpec::new(20, 1.0, 0.0).unwrap();
    let x0 = 100.0 * surface_value(&spec, 1.05, 0.95).unwrap();
    let mut config = RunConfig::new(prices, 100.0, x0, 100.0, 20, out);
    config.grid_size = 24;
    config.num_paths = 150;
    config.seed = 3;
    config
}

#[test]
fn writes_four_rows_and_five_files() {
    let dir = tempfile::tempdir().unwrap();
    let prices = common::calm_fixture(dir.path());
    let out = dir.path().join("out");
    let art = run_pipeline(&small_config(&prices, &out)).unwrap();
    assert_eq!(art.report.rows.len(), 4);
    assert_eq!(art.report.metadata.option_id, "calm");
    for name in [
        REPORT_TXT,
        REPORT_KV,
        CONTOUR_TSV,
        SURFACE_TSV,
        DELTA_SAMPLES_TSV,
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let samples = std::fs::read_to_string(out.join(DELTA_SAMPLES_TSV)).unwrap();
    assert_eq!(samples.lines().count(), 1 + 4 * 150);
    let contour = std::fs::read_to_string(out.join(CONTOUR_TSV)).unwrap();
    assert_eq!(contour.lines().count(), 1 + art.contour.len());
}

#[test]
fn kv_file_round_trips_at_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let prices = common::calm_fixture(dir.path());
    let out = dir.path().join("out");
    let art = run_pipeline(&small_config(&prices, &out)).unwrap();
    let text = std::fs::read_to_string(out.join(REPORT_KV)).unwrap();
    let parsed = parse_report_kv(&text).unwrap();
    assert_eq!(parsed, art.report);
    for row in &art.report.rows {
        assert!(
            text.contains(&format!("{:?}", row.value)),
            "{} not in kv",
            row.value
        );
    }
}

#[test]
fn option_above_surface_is_empty_contour() {
    let dir = tempfile::tempdir().unwrap();
    let prices = common::calm_fixture(dir.path());
    let mut config = small_config(&prices, &dir.path().join("out"));
    config.option_price = 60.0;
    let err = run_pipeline(&config).unwrap_err();
    assert!(matches!(err, Error::EmptyContour { .. }), "{err:?}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn malformed_csv_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("bad.csv");
    std::fs::write(&prices, "date,close\n2024-01-02,100\n2024-01-03,oops\n").unwrap();
    let err = run_pipeline(&small_config(&prices, &dir.path().join("out"))).unwrap_err();
    assert!(
        matches!(err, Error::InvalidRecord { line: 3, .. }),
        "{err:?}"
    );
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn sequential_and_parallel_agree() {
    let dir = tempfile::tempdir().unwrap();
    let prices = common::calm_fixture(dir.path());
    let out = dir.path().join("out");
    let config = small_config(&prices, &out);
    let a = run_pipeline_with(&config, Execution::Sequential).unwrap();
    let seq = std::fs::read(out.join(REPORT_KV)).unwrap();
    let b = run_pipeline_with(&config, Execution::Parallel).unwrap();
    let par = std::fs::read(out.join(REPORT_KV)).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.delta_samples, b.delta_samples);
    assert_eq!(seq, par);
}

#[test]
fn seed_changes_the_ensemble_not_the_contour() {
    let dir = tempfile::tempdir().unwrap();
    let prices = common::calm_fixture(dir.path());
    let mut config = small_config(&prices, &dir.path().join("a"));
    let a = run_pipeline(&config).unwrap();
    config.seed = 4;
    config.output_dir = dir.path().join("b");
    let b = run_pipeline(&config).unwrap();
    assert_eq!(a.contour, b.contour);
    assert_ne!(a.delta_samples, b.delta_samples);
}

fn ledger(accumulated: f64) -> ResidualLedger {
    ResidualLedger {
        u: 1.05,
        d: 0.95,
        r: 0.0,
        residuals: vec![accumulated],
        setup_costs: vec![0.0, 0.0],
        liquidations: vec![accumulated],
        positions: Vec::new(),
        accumulated,
        max_dual_gap: 0.0,
    }
}

proptest! {
    #[test]
    fn profit_probability_is_monotone_under_translation(
        totals in prop::collection::vec(-5.0f64..5.0, 1..60),
        shift in 0.0f64..3.0,
    ) {
        let base: Vec<_> = totals.iter().map(|&t| ledger(t)).collect();
        let moved: Vec<_> = totals.iter().map(|&t| ledger(t + shift)).collect();
        let kind = CriterionKind::ProbPositiveProfit;
        let before = evaluate_criterion(kind, &base, 0.0).unwrap().value;
        let after = evaluate_criterion(kind, &moved, 0.0).unwrap().value;
        prop_assert!(after >= before);
        prop_assert!((0.0..=1.0).contains(&after));
    }
}
