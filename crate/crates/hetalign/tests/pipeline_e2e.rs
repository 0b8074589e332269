//! End-to-end pipeline behavior beyond the acceptance criteria: degenerate
//! configurations, determinism of the report, and search-space accounting.

use hetalign::pipeline::{run_pipeline, PipelineConfig, PipelineInputs};
use hetalign::synthetic::{generate_synthetic, SyntheticConfig};

fn small_instance(anchor_fraction: f64) -> (PipelineInputs, Vec<(usize, usize)>) {
    let cfg = SyntheticConfig {
        n_users: 40,
        k_blocks: 2,
        p_in: 0.3,
        p_out: 0.0,
        n_posts_per_user: 2,
        attr_vocab: 40,
        anchor_fraction,
        noise: 0.0,
        seed: 5,
    };
    let data = generate_synthetic(&cfg).unwrap();
    let truth = data.true_anchors.clone();
    let test = data.held_out_anchors();
    (
        PipelineInputs {
            pair: data.pair,
            test_anchors: test,
        },
        truth,
    )
}

fn config(k: usize, s: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.partition.k = k;
    cfg.partition.max_iters = 40;
    cfg.top_s = Some(s);
    cfg.seed = 7;
    cfg.partition.seed = 7;
    cfg
}

#[test]
fn s_zero_prunes_everything() {
    let (inputs, _) = small_instance(0.5);
    let outcome = run_pipeline(&config(2, 0), &inputs, None).unwrap();
    assert!(outcome.prediction.positives.is_empty());
    assert_eq!(outcome.report.recall, 0.0);
    assert_eq!(outcome.report.coverage_ratio, 0.0);
    assert_eq!(outcome.report.candidate_space, 0);
}

#[test]
fn identical_runs_give_identical_reports_and_predictions() {
    let (inputs, _) = small_instance(0.5);
    let a = run_pipeline(&config(2, 2), &inputs, None).unwrap();
    let b = run_pipeline(&config(2, 2), &inputs, None).unwrap();
    assert_eq!(a.prediction.positives, b.prediction.positives);
    assert_eq!(a.prediction.candidates, b.prediction.candidates);
    assert_eq!(
        (a.report.precision, a.report.recall, a.report.f1),
        (b.report.precision, b.report.recall, b.report.f1)
    );
    assert_eq!(
        (a.report.tp, a.report.fp, a.report.fn_, a.report.coverage_ratio),
        (b.report.tp, b.report.fp, b.report.fn_, b.report.coverage_ratio)
    );
}

#[test]
fn no_labeled_anchors_still_runs_on_attribute_paths() {
    let (inputs, _) = small_instance(0.0);
    assert!(inputs.pair.labeled_anchors().is_empty());
    let outcome = run_pipeline(&config(2, 2), &inputs, None).unwrap();
    // With no labels there is nothing to bootstrap from: no positives.
    assert!(outcome.prediction.positives.is_empty());
    assert_eq!(outcome.report.recall, 0.0);
}

#[test]
fn fully_anchored_noiseless_instance_recovers_truth_exactly() {
    let (inputs, truth) = small_instance(1.0);
    assert!(inputs.test_anchors.is_empty());
    let outcome = run_pipeline(&config(2, 2), &inputs, None).unwrap();
    // Every stage is exact here: the prediction is the planted truth.
    assert_eq!(outcome.prediction.positives, truth);
}

#[test]
fn search_space_shrinks_when_partitioned() {
    let (inputs, _) = small_instance(0.5);
    let outcome = run_pipeline(&config(2, 2), &inputs, None).unwrap();
    let total = inputs.pair.net1.n_users() * inputs.pair.net2.n_users();
    assert_eq!(outcome.report.total_space, total);
    assert!(outcome.report.candidate_space <= total);
    // Proper 2-way matching on a 2-block instance is strictly smaller.
    assert!(outcome.report.candidate_space < total);
    let sum: usize = outcome.matched.iter().map(|m| m.candidate_space()).sum();
    assert_eq!(sum, outcome.report.candidate_space);
}

#[test]
fn stage_errors_carry_the_stage_tag() {
    let (inputs, _) = small_instance(0.5);
    let mut cfg = config(2, 2);
    cfg.partition.k = 1; // invalid: k must be at least 2
    let msg = match run_pipeline(&cfg, &inputs, None) {
        Err(e) => e.to_string(),
        Ok(_) => panic!("expected an error for k=1"),
    };
    assert!(msg.contains("partition"), "missing stage tag: {msg}");
}

#[test]
fn artifacts_are_written_and_well_formed() {
    let (inputs, _) = small_instance(0.5);
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_pipeline(&config(2, 2), &inputs, Some(dir.path())).unwrap();
    for name in [
        "clusters1.tsv",
        "clusters2.tsv",
        "trace.tsv",
        "pairs.tsv",
        "predictions.tsv",
        "convergence.tsv",
        "report.json",
    ] {
        let path = dir.path().join(name);
        assert!(path.exists(), "{name} missing");
        assert!(std::fs::metadata(&path).unwrap().len() > 0, "{name} empty");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report.get("f1").is_some());
    assert!(report.get("timings_secs").is_some());

    let predictions = std::fs::read_to_string(dir.path().join("predictions.tsv")).unwrap();
    let rows: Vec<&str> = predictions.lines().collect();
    assert_eq!(rows.len(), outcome.report.candidate_space);
    for row in rows {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols.len(), 4);
        assert!(cols[2] == "0" || cols[2] == "1");
        cols[3].parse::<f64>().unwrap();
    }
}
