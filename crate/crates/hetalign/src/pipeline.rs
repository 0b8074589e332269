//! End-to-end orchestration: proximity, partition, matching, parallel
//! alignment, aggregation, and evaluation, with TSV/JSON artifacts per stage.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::alignment::{
    aggregate, align_pair, extract_features, AlignmentParams, GlobalPrediction, PairPrediction,
};
use crate::error::{Error, Result};
use crate::graph::AlignedPair;
use crate::matching::{coverage_ratio, match_top_s, MatchedPair};
use crate::meta::{DiagramId, MetaScope};
use crate::partition::{
    cluster_subnetworks, extract_clusters, synergistic_partition, ClusterAssignment,
    PartitionConfig, PartitionState,
};
use crate::proximity::{
    default_inter_diagrams, default_intra_diagrams, inter_md_pro, intra_md_pro, DiagramWeights,
    ProximityScope,
};

/// Whole-pipeline configuration; every field has a default and every key can
/// come from a flat `key = value` config file.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub partition: PartitionConfig,
    pub intra_diagrams: Vec<DiagramId>,
    pub inter_diagrams: Vec<DiagramId>,
    /// Explicit weights; uniform over the diagram set when absent.
    pub intra_weights: Option<BTreeMap<DiagramId, f64>>,
    pub inter_weights: Option<BTreeMap<DiagramId, f64>>,
    /// Number of sub-network pairs to align; defaults to k.
    pub top_s: Option<usize>,
    pub align: AlignmentParams,
    /// Train fraction of a combined anchor set (file-based runs).
    pub split_ratio: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            partition: PartitionConfig::default(),
            intra_diagrams: default_intra_diagrams(),
            inter_diagrams: default_inter_diagrams(),
            intra_weights: None,
            inter_weights: None,
            top_s: None,
            align: AlignmentParams::default(),
            split_ratio: 0.5,
            seed: 0,
            threads: 1,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Usage(format!("config key '{key}': cannot parse '{v}'")))
}

fn parse_diagram_list(key: &str, v: &str) -> Result<Vec<DiagramId>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Usage(format!("config key '{key}': unknown diagram '{s}'")))
        })
        .collect()
}

type AnchorSplit = (Vec<(usize, usize)>, Vec<(usize, usize)>);

fn parse_weight_map(key: &str, v: &str) -> Result<BTreeMap<DiagramId, f64>> {
    let mut map = BTreeMap::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, w) = item.split_once(':').ok_or_else(|| {
            Error::Usage(format!("config key '{key}': expected NAME:WEIGHT, got '{item}'"))
        })?;
        let d: DiagramId = name
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("config key '{key}': unknown diagram '{name}'")))?;
        map.insert(d, parse_num(key, w.trim())?);
    }
    Ok(map)
}

impl PipelineConfig {
    /// Apply one `key = value` setting; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "k" => self.partition.k = parse_num(key, value)?,
            "alpha" => self.partition.alpha = parse_num(key, value)?,
            "beta" => self.partition.beta = parse_num(key, value)?,
            "theta" => self.partition.theta = parse_num(key, value)?,
            "rho1" => self.partition.rho1 = parse_num(key, value)?,
            "rho2" => self.partition.rho2 = parse_num(key, value)?,
            "rho" => {
                let v: f64 = parse_num(key, value)?;
                self.partition.rho1 = v;
                self.partition.rho2 = v;
            }
            "eta1" => self.partition.eta1 = parse_num(key, value)?,
            "eta2" => self.partition.eta2 = parse_num(key, value)?,
            "eta" => {
                let v: f64 = parse_num(key, value)?;
                self.partition.eta1 = v;
                self.partition.eta2 = v;
            }
            "partition_max_iters" => self.partition.max_iters = parse_num(key, value)?,
            "partition_tol" => self.partition.tol = parse_num(key, value)?,
            "backtracking" => self.partition.backtracking = parse_num(key, value)?,
            "intra_diagrams" => self.intra_diagrams = parse_diagram_list(key, value)?,
            "inter_diagrams" => self.inter_diagrams = parse_diagram_list(key, value)?,
            "intra_weights" => self.intra_weights = Some(parse_weight_map(key, value)?),
            "inter_weights" => self.inter_weights = Some(parse_weight_map(key, value)?),
            "top_s" => self.top_s = Some(parse_num(key, value)?),
            "c" => self.align.c = parse_num(key, value)?,
            "gamma" => self.align.gamma = parse_num(key, value)?,
            "threshold" => self.align.threshold = parse_num(key, value)?,
            "align_max_iters" => self.align.max_iters = parse_num(key, value)?,
            "split_ratio" => self.split_ratio = parse_num(key, value)?,
            "seed" => {
                self.seed = parse_num(key, value)?;
                self.partition.seed = self.seed;
            }
            "threads" => self.threads = parse_num(key, value)?,
            _ => return Err(Error::Usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Parse a flat key-value config file: `key = value` lines, `#` comments.
    pub fn from_kv_str(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: "<config>".into(),
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_kv_file(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)?;
        PipelineConfig::from_kv_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Usage(format!(
                "split_ratio must be in (0,1), got {}",
                self.split_ratio
            )));
        }
        if self.threads == 0 {
            return Err(Error::Usage("threads must be at least 1".into()));
        }
        if self
            .intra_diagrams
            .iter()
            .any(|d| d.scope() != MetaScope::Intra)
        {
            return Err(Error::Usage("intra_diagrams contains an inter diagram".into()));
        }
        if self
            .inter_diagrams
            .iter()
            .any(|d| d.scope() != MetaScope::Inter)
        {
            return Err(Error::Usage("inter_diagrams contains an intra diagram".into()));
        }
        Ok(())
    }

    fn intra_weights(&self) -> Result<DiagramWeights> {
        match &self.intra_weights {
            Some(m) => DiagramWeights::new(m.clone()),
            None => DiagramWeights::uniform(&self.intra_diagrams),
        }
    }

    fn inter_weights(&self) -> Result<DiagramWeights> {
        match &self.inter_weights {
            Some(m) => DiagramWeights::new(m.clone()),
            None => DiagramWeights::uniform(&self.inter_diagrams),
        }
    }
}

/// Evaluation metrics plus bookkeeping for one pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Fraction of test anchors inside some matched pair.
    pub coverage_ratio: f64,
    /// Candidate links scored inside matched pairs.
    pub candidate_space: usize,
    /// |U1| * |U2|.
    pub total_space: usize,
    pub search_space_ratio: f64,
    pub timings_secs: BTreeMap<String, f64>,
}

/// Precision/recall/F1 of inferred positives against held-out test anchors.
///
/// Labeled training anchors are excluded from the prediction set: they are
/// inputs, not inferences. Test anchors never predicted (including those
/// pruned away with their sub-networks) count as false negatives. Generic so
/// links can be index pairs or identifier pairs.
pub fn evaluate<T: Ord + Clone + std::fmt::Debug>(
    predicted_positives: &[T],
    train_anchors: &[T],
    test_anchors: &[T],
) -> Result<EvalReport> {
    let train: BTreeSet<_> = train_anchors.iter().cloned().collect();
    let test: BTreeSet<_> = test_anchors.iter().cloned().collect();
    if let Some(overlap) = train.intersection(&test).next() {
        return Err(Error::Validation(format!(
            "train/test anchor sets overlap at {overlap:?}"
        )));
    }
    let predicted: BTreeSet<_> = predicted_positives
        .iter()
        .filter(|p| !train.contains(*p))
        .cloned()
        .collect();
    let tp = predicted.intersection(&test).count();
    let fp = predicted.len() - tp;
    let fn_ = test.len() - tp;
    let precision = if predicted.is_empty() {
        0.0
    } else {
        tp as f64 / predicted.len() as f64
    };
    let recall = if test.is_empty() {
        0.0
    } else {
        tp as f64 / test.len() as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EvalReport {
        precision,
        recall,
        f1,
        tp,
        fp,
        fn_,
        coverage_ratio: 0.0,
        candidate_space: 0,
        total_space: 0,
        search_space_ratio: 0.0,
        timings_secs: BTreeMap::new(),
    })
}

/// Seeded uniform split of an anchor set into train/test at `ratio` train.
pub fn split_anchors(anchors: &[(usize, usize)], ratio: f64, seed: u64) -> AnchorSplit {
    let mut order: Vec<usize> = (0..anchors.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let n_train = ((anchors.len() as f64) * ratio).round() as usize;
    let mut train: Vec<_> = order[..n_train.min(anchors.len())]
        .iter()
        .map(|&i| anchors[i])
        .collect();
    let mut test: Vec<_> = order[n_train.min(anchors.len())..]
        .iter()
        .map(|&i| anchors[i])
        .collect();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Inputs of one run: the pair (its labeled anchors are the training set)
/// plus the held-out anchors used for evaluation only.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub pair: AlignedPair,
    pub test_anchors: Vec<(usize, usize)>,
}

/// Everything a run produced.
pub struct PipelineOutcome {
    pub report: EvalReport,
    pub prediction: GlobalPrediction,
    pub pair_results: Vec<PairPrediction>,
    pub matched: Vec<MatchedPair>,
    pub state: PartitionState,
    pub assignment: ClusterAssignment,
}

/// Solve every matched pair on a worker pool of the given size; results come
/// back in rank order regardless of scheduling, so the output is identical
/// for any thread count.
pub fn align_matched_pairs(
    matched: &[MatchedPair],
    inter_diagrams: &[DiagramId],
    params: AlignmentParams,
    threads: usize,
) -> Result<Vec<PairPrediction>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    pool.install(|| {
        matched
            .par_iter()
            .map(|mp| {
                let problem = extract_features(mp, inter_diagrams, params)?;
                let solution = align_pair(&problem)?;
                Ok(PairPrediction {
                    pair_rank: mp.rank,
                    candidates: problem.candidates,
                    solution,
                })
            })
            .collect()
    })
}

/// Run proximity -> partition -> match -> parallel align -> aggregate ->
/// evaluate, writing per-stage artifacts into `out_dir` when given.
pub fn run_pipeline(
    config: &PipelineConfig,
    inputs: &PipelineInputs,
    out_dir: Option<&Path>,
) -> Result<PipelineOutcome> {
    config.validate()?;
    let mut partition_cfg = config.partition.clone();
    partition_cfg.seed = config.seed;
    let pair = &inputs.pair;
    let mut timings = BTreeMap::new();

    let t = Instant::now();
    let s1 = intra_md_pro(
        &pair.net1,
        &config.intra_diagrams,
        &config.intra_weights()?,
        ProximityScope::IntraNet1,
    )
    .map_err(|e| e.in_stage("proximity"))?;
    let s2 = intra_md_pro(
        &pair.net2,
        &config.intra_diagrams,
        &config.intra_weights()?,
        ProximityScope::IntraNet2,
    )
    .map_err(|e| e.in_stage("proximity"))?;
    let s_inter = inter_md_pro(pair, &config.inter_diagrams, &config.inter_weights()?)
        .map_err(|e| e.in_stage("proximity"))?;
    timings.insert("proximity".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let state = synergistic_partition(&s1.matrix, &s2.matrix, &s_inter.matrix, &partition_cfg)
        .map_err(|e| e.in_stage("partition"))?;
    let assignment = extract_clusters(&state, partition_cfg.k, config.seed)
        .map_err(|e| e.in_stage("partition"))?;
    timings.insert("partition".to_string(), t.elapsed().as_secs_f64());

    if let Some(dir) = out_dir {
        write_clusters(dir, pair, &assignment)?;
        write_trace(dir, &state)?;
    }

    let t = Instant::now();
    let subs1 = cluster_subnetworks(&pair.net1, &assignment.assign1, assignment.k);
    let subs2 = cluster_subnetworks(&pair.net2, &assignment.assign2, assignment.k);
    let s = config
        .top_s
        .unwrap_or(assignment.k)
        .min(assignment.k);
    let matched = match_top_s(&subs1, &subs2, pair.labeled_anchors(), s)
        .map_err(|e| e.in_stage("match"))?;
    timings.insert("match".to_string(), t.elapsed().as_secs_f64());

    if let Some(dir) = out_dir {
        write_pairs(dir, &matched)?;
    }

    let t = Instant::now();
    let pair_results = align_matched_pairs(
        &matched,
        &config.inter_diagrams,
        config.align,
        config.threads,
    )
    .map_err(|e| e.in_stage("align"))?;
    timings.insert("align".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let prediction = aggregate(&pair_results).map_err(|e| e.in_stage("aggregate"))?;
    timings.insert("aggregate".to_string(), t.elapsed().as_secs_f64());

    if let Some(dir) = out_dir {
        write_predictions(dir, pair, &pair_results)?;
        write_convergence(dir, &pair_results)?;
    }

    let t = Instant::now();
    let mut report = evaluate(
        &prediction.positives,
        pair.labeled_anchors(),
        &inputs.test_anchors,
    )
    .map_err(|e| e.in_stage("evaluate"))?;
    report.coverage_ratio = coverage_ratio(&matched, &inputs.test_anchors);
    report.candidate_space = matched.iter().map(|m| m.candidate_space()).sum();
    report.total_space = pair.net1.n_users() * pair.net2.n_users();
    report.search_space_ratio = if report.total_space > 0 {
        report.candidate_space as f64 / report.total_space as f64
    } else {
        0.0
    };
    timings.insert("evaluate".to_string(), t.elapsed().as_secs_f64());
    report.timings_secs = timings;

    if let Some(dir) = out_dir {
        let f = File::create(dir.join("report.json"))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &report)
            .map_err(|e| Error::Validation(format!("report serialization: {e}")))?;
    }

    Ok(PipelineOutcome {
        report,
        prediction,
        pair_results,
        matched,
        state,
        assignment,
    })
}

pub fn write_clusters(dir: &Path, pair: &AlignedPair, assignment: &ClusterAssignment) -> Result<()> {
    for (name, net, assign) in [
        ("clusters1.tsv", &pair.net1, &assignment.assign1),
        ("clusters2.tsv", &pair.net2, &assignment.assign2),
    ] {
        let mut w = BufWriter::new(File::create(dir.join(name))?);
        for (u, &c) in assign.iter().enumerate() {
            writeln!(w, "{}\t{}", net.user_ids()[u], c)?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_trace(dir: &Path, state: &PartitionState) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("trace.tsv"))?);
    for row in &state.objective_trace {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            row.iter, row.objective, row.ncut1, row.ncut2, row.discrepancy
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairs(dir: &Path, matched: &[MatchedPair]) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("pairs.tsv"))?);
    for m in matched {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            m.rank,
            m.sub1_id,
            m.sub2_id,
            m.m_score,
            m.known_anchors.len()
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_predictions(
    dir: &Path,
    pair: &AlignedPair,
    results: &[PairPrediction],
) -> Result<()> {
    let mut rows: Vec<(usize, usize, bool, f64)> = Vec::new();
    for r in results {
        for (l, &(a, b)) in r.candidates.iter().enumerate() {
            rows.push((a, b, r.solution.y[l], r.solution.y_hat[l]));
        }
    }
    rows.sort_by_key(|&(a, b, _, _)| (a, b));
    let mut w = BufWriter::new(File::create(dir.join("predictions.tsv"))?);
    for (a, b, label, score) in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            pair.net1.user_ids()[a],
            pair.net2.user_ids()[b],
            u8::from(label),
            score
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence(dir: &Path, results: &[PairPrediction]) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("convergence.tsv"))?);
    let mut by_rank: Vec<&PairPrediction> = results.iter().collect();
    by_rank.sort_by_key(|r| r.pair_rank);
    for r in by_rank {
        for (i, d) in r.solution.delta_trace.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}", r.pair_rank, i + 1, d)?;
        }
    }
    w.flush()?;
    Ok(())
}
