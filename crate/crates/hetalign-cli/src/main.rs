//! Command-line front end for the heterogeneous network alignment pipeline.
//!
//! Subcommands mirror the pipeline stages: `gen` produces synthetic aligned
//! networks, `partition`/`match`/`align` run individual stages against TSV
//! artifacts, `pipeline` runs everything end to end, and `eval` scores a
//! predictions file against held-out anchors.

use std::collections::HashSet;
use std::fs;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hetalign::alignment::{aggregate, AlignmentParams};
use hetalign::graph::{
    load_aligned_pair, load_network, read_anchor_file, write_network, AlignedPair,
    HeterogeneousNetwork, SubNetwork,
};
use hetalign::matching::{coverage_ratio, match_top_s, MatchedPair};
use hetalign::meta::DiagramId;
use hetalign::partition::{cluster_subnetworks, extract_clusters, synergistic_partition};
use hetalign::pipeline::{
    align_matched_pairs, evaluate, run_pipeline, split_anchors, write_clusters, write_convergence,
    write_pairs, write_predictions, write_trace, PipelineConfig, PipelineInputs,
};
use hetalign::proximity::{inter_md_pro, intra_md_pro, DiagramWeights, ProximityScope};
use hetalign::synthetic::{generate_synthetic, SyntheticConfig};

#[derive(Parser)]
#[command(
    name = "hetalign",
    about = "Two-stage alignment of attributed heterogeneous social networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic aligned network pair with planted ground truth.
    Gen(GenArgs),
    /// Synergistic partition of two networks into k clusters each.
    Partition(PartitionArgs),
    /// Rank and select sub-network pairs by M-Score.
    Match(MatchArgs),
    /// Infer anchor links inside previously matched sub-network pairs.
    Align(AlignArgs),
    /// Run the whole pipeline and write a JSON report.
    Pipeline(PipelineArgs),
    /// Score a predictions file against held-out anchors.
    Eval(EvalArgs),
}

#[derive(Args)]
struct NetworkFiles {
    /// Node TSV of network 1 (`kind<TAB>id`).
    #[arg(long)]
    net1_nodes: PathBuf,
    /// Edge TSV of network 1 (`relation<TAB>src<TAB>dst`).
    #[arg(long)]
    net1_edges: PathBuf,
    /// Node TSV of network 2.
    #[arg(long)]
    net2_nodes: PathBuf,
    /// Edge TSV of network 2.
    #[arg(long)]
    net2_edges: PathBuf,
    /// Labeled (training) anchor TSV (`user_id_net1<TAB>user_id_net2`).
    #[arg(long)]
    anchors: PathBuf,
}

impl NetworkFiles {
    fn load(&self) -> Result<AlignedPair> {
        let net1 = load_network(&self.net1_nodes, &self.net1_edges)?;
        let net2 = load_network(&self.net2_nodes, &self.net2_edges)?;
        Ok(load_aligned_pair(net1, net2, &self.anchors)?)
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    n_users: usize,
    #[arg(long, default_value_t = 4)]
    k_blocks: usize,
    #[arg(long, default_value_t = 0.2)]
    p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    p_out: f64,
    #[arg(long, default_value_t = 3)]
    posts_per_user: usize,
    #[arg(long, default_value_t = 200)]
    attr_vocab: usize,
    /// Fraction of true anchors revealed as the labeled training set.
    #[arg(long, default_value_t = 0.5)]
    anchor_fraction: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    nets: NetworkFiles,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 80.0)]
    theta: f64,
    /// Orthogonality penalty weight (both networks).
    #[arg(long, default_value_t = 1e3)]
    rho: f64,
    /// Gradient step length (both networks), backtracking start.
    #[arg(long, default_value_t = 1e-3)]
    eta: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated intra diagram names (default set otherwise).
    #[arg(long)]
    intra_diagrams: Option<String>,
    /// Comma-separated inter diagram names.
    #[arg(long)]
    inter_diagrams: Option<String>,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    nets: NetworkFiles,
    #[arg(long)]
    clusters1: PathBuf,
    #[arg(long)]
    clusters2: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    top_s: usize,
    /// Held-out anchors; used only to report coverage.
    #[arg(long)]
    held_out: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    nets: NetworkFiles,
    #[arg(long)]
    clusters1: PathBuf,
    #[arg(long)]
    clusters2: PathBuf,
    /// pairs.tsv from the match stage.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    c: f64,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    inter_diagrams: Option<String>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    nets: NetworkFiles,
    #[arg(long)]
    out: PathBuf,
    /// Flat key=value config file; command-line settings override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set theta=40 --set k=8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Held-out anchors for evaluation. Without this, the anchor file is
    /// split train/test at the configured ratio.
    #[arg(long)]
    test_anchors: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    top_s: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    split_ratio: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// predictions.tsv from the align or pipeline stage.
    #[arg(long)]
    predictions: PathBuf,
    /// Labeled anchors the model was trained on (excluded from scoring).
    #[arg(long)]
    train_anchors: PathBuf,
    /// Held-out anchors to score against.
    #[arg(long)]
    test_anchors: PathBuf,
    /// Write the metrics JSON here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Match(args) => cmd_match(args),
        Command::Align(args) => cmd_align(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn write_anchor_file(
    path: &Path,
    net1: &HeterogeneousNetwork,
    net2: &HeterogeneousNetwork,
    anchors: &[(usize, usize)],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &(a, b) in anchors {
        writeln!(w, "{}\t{}", net1.user_ids()[a], net2.user_ids()[b])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        n_users: args.n_users,
        k_blocks: args.k_blocks,
        p_in: args.p_in,
        p_out: args.p_out,
        n_posts_per_user: args.posts_per_user,
        attr_vocab: args.attr_vocab,
        anchor_fraction: args.anchor_fraction,
        noise: args.noise,
        seed: args.seed,
    };
    let data = generate_synthetic(&cfg)?;
    fs::create_dir_all(&args.out)?;
    let out = |name: &str| args.out.join(name);
    write_network(&data.pair.net1, &out("net1.nodes.tsv"), &out("net1.edges.tsv"))?;
    write_network(&data.pair.net2, &out("net2.nodes.tsv"), &out("net2.edges.tsv"))?;
    let (net1, net2) = (&data.pair.net1, &data.pair.net2);
    write_anchor_file(&out("anchors_train.tsv"), net1, net2, data.pair.labeled_anchors())?;
    write_anchor_file(&out("anchors_test.tsv"), net1, net2, &data.held_out_anchors())?;
    write_anchor_file(&out("anchors_all.tsv"), net1, net2, &data.true_anchors)?;
    println!(
        "generated {} users/side, {} labeled anchors, {} held out -> {}",
        cfg.n_users,
        data.pair.labeled_anchors().len(),
        data.held_out_anchors().len(),
        args.out.display()
    );
    Ok(())
}

fn parse_diagrams(spec: &Option<String>, default: Vec<DiagramId>) -> Result<Vec<DiagramId>> {
    match spec {
        None => Ok(default),
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<DiagramId>().map_err(Into::into))
            .collect(),
    }
}

fn cmd_partition(args: PartitionArgs) -> Result<()> {
    let pair = args.nets.load()?;
    let intra = parse_diagrams(
        &args.intra_diagrams,
        hetalign::proximity::default_intra_diagrams(),
    )?;
    let inter = parse_diagrams(
        &args.inter_diagrams,
        hetalign::proximity::default_inter_diagrams(),
    )?;
    let wi = DiagramWeights::uniform(&intra)?;
    let wa = DiagramWeights::uniform(&inter)?;
    let s1 = intra_md_pro(&pair.net1, &intra, &wi, ProximityScope::IntraNet1)?;
    let s2 = intra_md_pro(&pair.net2, &intra, &wi, ProximityScope::IntraNet2)?;
    let s_inter = inter_md_pro(&pair, &inter, &wa)?;

    let config = hetalign::partition::PartitionConfig {
        k: args.k,
        alpha: args.alpha,
        beta: args.beta,
        theta: args.theta,
        rho1: args.rho,
        rho2: args.rho,
        eta1: args.eta,
        eta2: args.eta,
        max_iters: args.max_iters,
        tol: args.tol,
        seed: args.seed,
        backtracking: true,
    };
    let state = synergistic_partition(&s1.matrix, &s2.matrix, &s_inter.matrix, &config)?;
    let assignment = extract_clusters(&state, args.k, args.seed)?;

    fs::create_dir_all(&args.out)?;
    write_clusters(&args.out, &pair, &assignment)?;
    write_trace(&args.out, &state)?;
    let last = state.objective_trace.last().expect("trace never empty");
    println!(
        "partitioned into k={} after {} iterations (objective {:.6}, discrepancy {:.6}) -> {}",
        args.k,
        state.objective_trace.len() - 1,
        last.objective,
        last.discrepancy,
        args.out.display()
    );
    Ok(())
}

/// Parse a clusters.tsv back into per-user assignments for a loaded network.
fn read_clusters(path: &Path, net: &HeterogeneousNetwork) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading clusters file {}", path.display()))?;
    let mut assign = vec![usize::MAX; net.n_users()];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, cluster) = line.split_once('\t').with_context(|| {
            format!("{}:{}: expected `user_id<TAB>cluster`", path.display(), i + 1)
        })?;
        let u = net
            .user_index(id)
            .with_context(|| format!("{}:{}: unknown user '{id}'", path.display(), i + 1))?;
        assign[u] = cluster.parse().with_context(|| {
            format!("{}:{}: bad cluster id '{cluster}'", path.display(), i + 1)
        })?;
    }
    if let Some(u) = assign.iter().position(|&c| c == usize::MAX) {
        bail!(
            "user '{}' has no cluster in {}",
            net.user_ids()[u],
            path.display()
        );
    }
    Ok(assign)
}

fn load_clustered(
    nets: &NetworkFiles,
    clusters1: &Path,
    clusters2: &Path,
) -> Result<(AlignedPair, Vec<SubNetwork>, Vec<SubNetwork>)> {
    let pair = nets.load()?;
    let assign1 = read_clusters(clusters1, &pair.net1)?;
    let assign2 = read_clusters(clusters2, &pair.net2)?;
    let k = assign1.iter().chain(&assign2).max().map_or(0, |&m| m + 1);
    let subs1 = cluster_subnetworks(&pair.net1, &assign1, k);
    let subs2 = cluster_subnetworks(&pair.net2, &assign2, k);
    Ok((pair, subs1, subs2))
}

fn cmd_match(args: MatchArgs) -> Result<()> {
    let (pair, subs1, subs2) = load_clustered(&args.nets, &args.clusters1, &args.clusters2)?;
    let matched = match_top_s(&subs1, &subs2, pair.labeled_anchors(), args.top_s)?;
    fs::create_dir_all(&args.out)?;
    write_pairs(&args.out, &matched)?;
    println!(
        "selected {} sub-network pairs -> {}",
        matched.len(),
        args.out.join("pairs.tsv").display()
    );
    if let Some(held_out) = &args.held_out {
        let test = read_anchor_file(held_out, &pair.net1, &pair.net2)?;
        println!(
            "held-out coverage ratio: {:.4}",
            coverage_ratio(&matched, &test)
        );
    }
    Ok(())
}

/// Rebuild matched pairs from a pairs.tsv and cluster assignments.
fn read_pairs(
    path: &Path,
    subs1: &[SubNetwork],
    subs2: &[SubNetwork],
    anchors: &[(usize, usize)],
) -> Result<Vec<MatchedPair>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading pairs file {}", path.display()))?;
    let mut matched = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            bail!(
                "{}:{}: expected `rank sub1 sub2 m_score n_known`",
                path.display(),
                i + 1
            );
        }
        let rank: usize = cols[0].parse()?;
        let sub1_id: usize = cols[1].parse()?;
        let sub2_id: usize = cols[2].parse()?;
        let m_score: f64 = cols[3].parse()?;
        if sub1_id >= subs1.len() || sub2_id >= subs2.len() {
            bail!("{}:{}: cluster id out of range", path.display(), i + 1);
        }
        let sub1 = subs1[sub1_id].clone();
        let sub2 = subs2[sub2_id].clone();
        let u1: HashSet<usize> = sub1.users_global.iter().copied().collect();
        let u2: HashSet<usize> = sub2.users_global.iter().copied().collect();
        let known_anchors: Vec<(usize, usize)> = anchors
            .iter()
            .copied()
            .filter(|(a, b)| u1.contains(a) && u2.contains(b))
            .collect();
        matched.push(MatchedPair {
            rank,
            sub1_id,
            sub2_id,
            sub1,
            sub2,
            known_anchors,
            m_score,
        });
    }
    Ok(matched)
}

fn cmd_align(args: AlignArgs) -> Result<()> {
    let (pair, subs1, subs2) = load_clustered(&args.nets, &args.clusters1, &args.clusters2)?;
    let matched = read_pairs(&args.pairs, &subs1, &subs2, pair.labeled_anchors())?;
    let inter = parse_diagrams(
        &args.inter_diagrams,
        hetalign::proximity::default_inter_diagrams(),
    )?;
    let params = AlignmentParams {
        c: args.c,
        gamma: 1.0,
        threshold: args.threshold,
        max_iters: args.max_iters,
    };
    let results = align_matched_pairs(&matched, &inter, params, args.threads)?;
    let prediction = aggregate(&results)?;
    fs::create_dir_all(&args.out)?;
    write_predictions(&args.out, &pair, &results)?;
    write_convergence(&args.out, &results)?;
    println!(
        "aligned {} pairs, {} positive links -> {}",
        results.len(),
        prediction.positives.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_kv_file(path)?,
        None => PipelineConfig::default(),
    };
    for setting in &args.sets {
        let (key, value) = setting
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got '{setting}'"))?;
        config.set(key.trim(), value.trim())?;
    }
    if let Some(k) = args.k {
        config.partition.k = k;
    }
    if let Some(theta) = args.theta {
        config.partition.theta = theta;
    }
    if let Some(s) = args.top_s {
        config.top_s = Some(s);
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
        config.partition.seed = seed;
    }
    if let Some(r) = args.split_ratio {
        config.split_ratio = r;
    }

    let pair = args.nets.load()?;
    let inputs = match &args.test_anchors {
        Some(path) => {
            let test = read_anchor_file(path, &pair.net1, &pair.net2)?;
            PipelineInputs {
                pair,
                test_anchors: test,
            }
        }
        None => {
            // The anchor file holds every known anchor: split it.
            let (train, test) =
                split_anchors(pair.labeled_anchors(), config.split_ratio, config.seed);
            let pair = pair.with_anchors(train)?;
            PipelineInputs {
                pair,
                test_anchors: test,
            }
        }
    };

    fs::create_dir_all(&args.out)?;
    let outcome = run_pipeline(&config, &inputs, Some(&args.out))?;
    let json = serde_json::to_string_pretty(&outcome.report)?;
    println!("{json}");
    Ok(())
}

fn read_string_anchor_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading anchor file {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, b) = line.split_once('\t').with_context(|| {
            format!("{}:{}: expected two tab-separated ids", path.display(), i + 1)
        })?;
        out.push((a.to_string(), b.to_string()));
    }
    Ok(out)
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let text = fs::read_to_string(&args.predictions)
        .with_context(|| format!("reading {}", args.predictions.display()))?;
    let mut positives = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            bail!(
                "{}:{}: expected `u1 u2 label score`",
                args.predictions.display(),
                i + 1
            );
        }
        if cols[2] == "1" {
            positives.push((cols[0].to_string(), cols[1].to_string()));
        }
    }
    let train = read_string_anchor_file(&args.train_anchors)?;
    let test = read_string_anchor_file(&args.test_anchors)?;
    let report = evaluate(&positives, &train, &test)?;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out)?);
        writeln!(w, "{json}")?;
        w.flush()?;
    }
    println!("{json}");
    Ok(())
}
