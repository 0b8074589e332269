//! Brute-force reference implementations used exclusively by the test
//! suites, plus seeded random-instance generators.
//!
//! Nothing here shares arithmetic with the production code paths it checks:
//! path counting is exhaustive typed-walk DFS over raw edge lists instead of
//! sparse matrix products, proximity scores are per-pair scalar evaluations,
//! gradients come from central finite differences, and constrained labeling
//! is exact enumeration with branch-and-bound. Everything is budget-guarded
//! and intentionally naive.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hetalign::graph::{AlignedPair, HeterogeneousNetwork, Relation};
use hetalign::meta::{DiagramId, MetaInput, MetaPathId, MetaScope};
use hetalign::proximity::DiagramWeights;
use hetalign::sparse::CsrMatrix;

/// Caps for the exhaustive routines; inputs above them are refused.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_users: usize,
    pub max_edges: usize,
    pub max_candidates: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_users: 20,
            max_edges: 60,
            max_candidates: 26,
        }
    }
}

#[derive(Debug)]
pub struct BudgetExceeded(pub String);

impl fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "oracle budget exceeded: {}", self.0)
    }
}

impl std::error::Error for BudgetExceeded {}

pub type OracleResult<T> = std::result::Result<T, BudgetExceeded>;

fn check_network(net: &HeterogeneousNetwork, budget: &OracleBudget) -> OracleResult<()> {
    if net.n_users() > budget.max_users {
        return Err(BudgetExceeded(format!(
            "{} users > {}",
            net.n_users(),
            budget.max_users
        )));
    }
    let edges = net.follow_edges().len()
        + net.write_edges().len()
        + net.checkin_edges().len()
        + net.at_edges().len();
    if edges > budget.max_edges {
        return Err(BudgetExceeded(format!(
            "{edges} edges > {}",
            budget.max_edges
        )));
    }
    Ok(())
}

fn check_input(input: MetaInput<'_>, budget: &OracleBudget) -> OracleResult<()> {
    match input {
        MetaInput::Network(net) => check_network(net, budget),
        MetaInput::Pair(pair) => {
            check_network(&pair.net1, budget)?;
            check_network(&pair.net2, budget)
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Dir {
    Fwd,
    Bwd,
}

#[derive(Clone, Copy, PartialEq)]
enum Net {
    N1,
    N2,
}

#[derive(Clone, Copy)]
enum Step {
    Rel(Relation, Dir, Net),
    Anchor,
    SharedLocation,
    SharedTimestamp,
}

fn template(path: MetaPathId) -> Vec<Step> {
    use Dir::*;
    use Net::*;
    use Relation::*;
    use Step::*;
    match path {
        MetaPathId::Pi1 => vec![Rel(Follow, Fwd, N1)],
        MetaPathId::Pi2 => vec![Rel(Follow, Fwd, N1), Rel(Follow, Fwd, N1)],
        MetaPathId::Pi3 => vec![Rel(Follow, Fwd, N1), Rel(Follow, Bwd, N1)],
        MetaPathId::Pi4 => vec![Rel(Follow, Bwd, N1), Rel(Follow, Fwd, N1)],
        MetaPathId::Pi5 => vec![
            Rel(Write, Fwd, N1),
            Rel(At, Fwd, N1),
            Rel(At, Bwd, N1),
            Rel(Write, Bwd, N1),
        ],
        MetaPathId::Pi6 => vec![
            Rel(Write, Fwd, N1),
            Rel(Checkin, Fwd, N1),
            Rel(Checkin, Bwd, N1),
            Rel(Write, Bwd, N1),
        ],
        MetaPathId::Pa1 => vec![Rel(Follow, Fwd, N1), Anchor, Rel(Follow, Bwd, N2)],
        MetaPathId::Pa2 => vec![Rel(Follow, Bwd, N1), Anchor, Rel(Follow, Fwd, N2)],
        MetaPathId::Pa3 => vec![Rel(Follow, Fwd, N1), Anchor, Rel(Follow, Fwd, N2)],
        MetaPathId::Pa4 => vec![Rel(Follow, Bwd, N1), Anchor, Rel(Follow, Bwd, N2)],
        MetaPathId::Pa5 => vec![
            Rel(Write, Fwd, N1),
            Rel(At, Fwd, N1),
            SharedTimestamp,
            Rel(At, Bwd, N2),
            Rel(Write, Bwd, N2),
        ],
        MetaPathId::Pa6 => vec![
            Rel(Write, Fwd, N1),
            Rel(Checkin, Fwd, N1),
            SharedLocation,
            Rel(Checkin, Bwd, N2),
            Rel(Write, Bwd, N2),
        ],
    }
}

struct Walker<'a> {
    net1: &'a HeterogeneousNetwork,
    net2: Option<&'a HeterogeneousNetwork>,
    anchors: &'a [(usize, usize)],
}

impl Walker<'_> {
    fn net(&self, which: Net) -> &HeterogeneousNetwork {
        match which {
            Net::N1 => self.net1,
            Net::N2 => self.net2.expect("inter path on a single network"),
        }
    }

    fn edges(&self, which: Net, rel: Relation) -> &[(usize, usize)] {
        let n = self.net(which);
        match rel {
            Relation::Follow => n.follow_edges(),
            Relation::Write => n.write_edges(),
            Relation::Checkin => n.checkin_edges(),
            Relation::At => n.at_edges(),
        }
    }

    /// Node indices reachable from `idx` through one template step; the
    /// step itself says which network and relation it walks.
    fn step(&self, idx: usize, step: Step) -> Vec<usize> {
        match step {
            Step::Rel(rel, dir, net) => self
                .edges(net, rel)
                .iter()
                .filter_map(|&(a, b)| match dir {
                    Dir::Fwd if a == idx => Some(b),
                    Dir::Bwd if b == idx => Some(a),
                    _ => None,
                })
                .collect(),
            Step::Anchor => self
                .anchors
                .iter()
                .filter_map(|&(a, b)| if a == idx { Some(b) } else { None })
                .collect(),
            Step::SharedLocation => {
                let id = &self.net(Net::N1).location_ids()[idx];
                self.net(Net::N2)
                    .location_ids()
                    .iter()
                    .enumerate()
                    .filter(|(_, other)| *other == id)
                    .map(|(i, _)| i)
                    .collect()
            }
            Step::SharedTimestamp => {
                let id = &self.net(Net::N1).timestamp_ids()[idx];
                self.net(Net::N2)
                    .timestamp_ids()
                    .iter()
                    .enumerate()
                    .filter(|(_, other)| *other == id)
                    .map(|(i, _)| i)
                    .collect()
            }
        }
    }

    fn collect(&self, idx: usize, steps: &[Step], counts: &mut [u64]) {
        match steps.split_first() {
            None => counts[idx] += 1,
            Some((head, rest)) => {
                for next in self.step(idx, *head) {
                    self.collect(next, rest, counts);
                }
            }
        }
    }
}

/// Exhaustive typed-walk counts of a catalogued meta path from user `x` to
/// every target user, by depth-first traversal of the template over the raw
/// edge lists. For intra paths the convention mirrors production counting:
/// self-pairs (`x == y`) count 0.
pub fn enumerate_from(
    input: MetaInput<'_>,
    path: MetaPathId,
    x: usize,
    budget: &OracleBudget,
) -> OracleResult<Vec<u64>> {
    check_input(input, budget)?;
    let (walker, targets) = match (input, path.scope()) {
        (MetaInput::Network(net), MetaScope::Intra) => (
            Walker {
                net1: net,
                net2: None,
                anchors: &[],
            },
            net.n_users(),
        ),
        (MetaInput::Pair(pair), MetaScope::Inter) => (
            Walker {
                net1: &pair.net1,
                net2: Some(&pair.net2),
                anchors: pair.labeled_anchors(),
            },
            pair.net2.n_users(),
        ),
        _ => {
            return Err(BudgetExceeded(format!(
                "scope mismatch for {path} (oracle input)"
            )))
        }
    };
    let steps = template(path);
    let mut counts = vec![0u64; targets];
    walker.collect(x, &steps, &mut counts);
    if path.scope() == MetaScope::Intra {
        counts[x] = 0;
    }
    Ok(counts)
}

/// Count of one meta path from `x` to `y`.
pub fn enumerate_paths(
    input: MetaInput<'_>,
    path: MetaPathId,
    x: usize,
    y: usize,
    budget: &OracleBudget,
) -> OracleResult<u64> {
    Ok(enumerate_from(input, path, x, budget)?[y])
}

/// Full count matrix of a path, one traversal per source user.
pub fn enumerate_count_matrix(
    input: MetaInput<'_>,
    path: MetaPathId,
    budget: &OracleBudget,
) -> OracleResult<DMatrix<f64>> {
    let (rows, cols) = match (input, path.scope()) {
        (MetaInput::Network(net), MetaScope::Intra) => (net.n_users(), net.n_users()),
        (MetaInput::Pair(pair), MetaScope::Inter) => (pair.net1.n_users(), pair.net2.n_users()),
        _ => return Err(BudgetExceeded("scope mismatch".into())),
    };
    let mut m = DMatrix::zeros(rows, cols);
    for x in 0..rows {
        let counts = enumerate_from(input, path, x, budget)?;
        for (y, &c) in counts.iter().enumerate() {
            m[(x, y)] = c as f64;
        }
    }
    Ok(m)
}

/// Diagram count by per-pair multiplication of enumerated factor counts.
pub fn enumerate_diagram_matrix(
    input: MetaInput<'_>,
    diagram: DiagramId,
    budget: &OracleBudget,
) -> OracleResult<DMatrix<f64>> {
    let spec = diagram.spec();
    let mut acc: Option<DMatrix<f64>> = None;
    for &factor in &spec.factors {
        let m = enumerate_count_matrix(input, factor, budget)?;
        acc = Some(match acc {
            None => m,
            Some(a) => a.component_mul(&m),
        });
    }
    Ok(acc.expect("diagram has at least one factor"))
}

/// Scalar-definition evaluation of the intra proximity:
/// `sum_i w_i (cnt_i(x,y) + cnt_i(y,x)) / (out_i(x) + out_i(y))`.
pub fn oracle_intra_md_pro(
    net: &HeterogeneousNetwork,
    diagrams: &[DiagramId],
    weights: &DiagramWeights,
    budget: &OracleBudget,
) -> OracleResult<DMatrix<f64>> {
    let n = net.n_users();
    let mut acc = DMatrix::zeros(n, n);
    let mut ds = diagrams.to_vec();
    ds.sort_by_key(|d| d.name());
    for d in ds {
        let w = weights.get(d).expect("weights cover the diagram set");
        let cnt = enumerate_diagram_matrix(MetaInput::Network(net), d, budget)?;
        let out: Vec<f64> = (0..n).map(|x| cnt.row(x).sum()).collect();
        for x in 0..n {
            for y in 0..n {
                let denom = out[x] + out[y];
                if denom > 0.0 {
                    acc[(x, y)] += w * (cnt[(x, y)] + cnt[(y, x)]) / denom;
                }
            }
        }
    }
    Ok(acc)
}

/// Scalar-definition evaluation of the cross-network proximity:
/// `sum_i w_i * 2 cnt_i(x,y) / (out_i(x) + in_i(y))`.
pub fn oracle_inter_md_pro(
    pair: &AlignedPair,
    diagrams: &[DiagramId],
    weights: &DiagramWeights,
    budget: &OracleBudget,
) -> OracleResult<DMatrix<f64>> {
    let (n1, n2) = (pair.net1.n_users(), pair.net2.n_users());
    let mut acc = DMatrix::zeros(n1, n2);
    let mut ds = diagrams.to_vec();
    ds.sort_by_key(|d| d.name());
    for d in ds {
        let w = weights.get(d).expect("weights cover the diagram set");
        let cnt = enumerate_diagram_matrix(MetaInput::Pair(pair), d, budget)?;
        let out: Vec<f64> = (0..n1).map(|x| cnt.row(x).sum()).collect();
        let into: Vec<f64> = (0..n2).map(|y| cnt.column(y).sum()).collect();
        for x in 0..n1 {
            for y in 0..n2 {
                let denom = out[x] + into[y];
                if denom > 0.0 {
                    acc[(x, y)] += w * 2.0 * cnt[(x, y)] / denom;
                }
            }
        }
    }
    Ok(acc)
}

/// Central finite differences of a scalar matrix function, entry by entry.
pub fn finite_difference_gradient(
    f: impl Fn(&DMatrix<f64>) -> f64,
    point: &DMatrix<f64>,
    h: f64,
) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(point.nrows(), point.ncols());
    let mut p = point.clone();
    for i in 0..point.nrows() {
        for j in 0..point.ncols() {
            let orig = p[(i, j)];
            p[(i, j)] = orig + h;
            let up = f(&p);
            p[(i, j)] = orig - h;
            let down = f(&p);
            p[(i, j)] = orig;
            g[(i, j)] = (up - down) / (2.0 * h);
        }
    }
    g
}

/// Exact minimizer of `|Xw - y|^2` over feasible labelings: `y` binary,
/// labeled entries forced to 1, at most one positive per user on each side.
/// Enumeration with branch-and-bound over candidates sorted by gain.
pub fn exhaustive_alignment(
    x: &DMatrix<f64>,
    labeled_mask: &[bool],
    a1: &CsrMatrix,
    a2: &CsrMatrix,
    w: &DVector<f64>,
    budget: &OracleBudget,
) -> OracleResult<Vec<bool>> {
    let n = x.nrows();
    if n > budget.max_candidates {
        return Err(BudgetExceeded(format!(
            "{n} candidates > {}",
            budget.max_candidates
        )));
    }
    // The incidence matrices have exactly one nonzero per column.
    let mut u1_of = vec![usize::MAX; n];
    for (u, l, _) in a1.iter() {
        u1_of[l] = u;
    }
    let mut u2_of = vec![usize::MAX; n];
    for (u, l, _) in a2.iter() {
        u2_of[l] = u;
    }

    let y_hat = x * w;
    // |yh - y|^2 = sum yh^2 - sum_{selected} (2 yh - 1): maximize the gain.
    let gain: Vec<f64> = (0..n).map(|l| 2.0 * y_hat[l] - 1.0).collect();

    let mut used1 = vec![false; a1.rows()];
    let mut used2 = vec![false; a2.rows()];
    let mut base = 0.0;
    for l in 0..n {
        if labeled_mask[l] {
            used1[u1_of[l]] = true;
            used2[u2_of[l]] = true;
            base += gain[l];
        }
    }

    let mut free: Vec<usize> = (0..n).filter(|&l| !labeled_mask[l]).collect();
    free.sort_by(|&a, &b| gain[b].total_cmp(&gain[a]).then(a.cmp(&b)));
    // Suffix sums of positive gains bound what any completion can add.
    let mut optimistic = vec![0.0; free.len() + 1];
    for i in (0..free.len()).rev() {
        optimistic[i] = optimistic[i + 1] + gain[free[i]].max(0.0);
    }

    struct Search<'a> {
        free: &'a [usize],
        gain: &'a [f64],
        u1_of: &'a [usize],
        u2_of: &'a [usize],
        optimistic: &'a [f64],
        best_gain: f64,
        best_sel: Vec<usize>,
        sel: Vec<usize>,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, acc: f64, used1: &mut [bool], used2: &mut [bool]) {
            if acc + self.optimistic[i] <= self.best_gain {
                return;
            }
            if i == self.free.len() {
                if acc > self.best_gain {
                    self.best_gain = acc;
                    self.best_sel = self.sel.clone();
                }
                return;
            }
            let l = self.free[i];
            let (a, b) = (self.u1_of[l], self.u2_of[l]);
            if !used1[a] && !used2[b] {
                used1[a] = true;
                used2[b] = true;
                self.sel.push(l);
                self.run(i + 1, acc + self.gain[l], used1, used2);
                self.sel.pop();
                used1[a] = false;
                used2[b] = false;
            }
            self.run(i + 1, acc, used1, used2);
        }
    }

    let mut search = Search {
        free: &free,
        gain: &gain,
        u1_of: &u1_of,
        u2_of: &u2_of,
        optimistic: &optimistic,
        best_gain: f64::NEG_INFINITY,
        best_sel: Vec::new(),
        sel: Vec::new(),
    };
    search.run(0, base, &mut used1, &mut used2);

    let mut y = labeled_mask.to_vec();
    for &l in &search.best_sel {
        y[l] = true;
    }
    Ok(y)
}

/// Plain spectral clustering: bottom-k eigenvectors of the normalized
/// Laplacian, rows rescaled by `D^{-1/2}`, clustered with the oracle's own
/// seeded Lloyd iteration.
pub fn spectral_clustering(s: &DMatrix<f64>, k: usize, seed: u64) -> Vec<usize> {
    let n = s.nrows();
    let d: Vec<f64> = (0..n).map(|i| s.row(i).sum()).collect();
    let dis: Vec<f64> = d
        .iter()
        .map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 })
        .collect();
    let mut lsym = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let ident = if i == j { 1.0 } else { 0.0 };
            lsym[(i, j)] = ident - dis[i] * s[(i, j)] * dis[j];
        }
    }
    let eig = SymmetricEigen::new(lsym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut embed = DMatrix::zeros(n, k);
    for (j, &col) in order.iter().take(k).enumerate() {
        for i in 0..n {
            embed[(i, j)] = dis[i] * eig.eigenvectors[(i, col)];
        }
    }
    lloyd(&embed, k, seed)
}

fn lloyd(data: &DMatrix<f64>, k: usize, seed: u64) -> Vec<usize> {
    let n = data.nrows();
    let dim = data.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist2 = |i: usize, c: &[f64]| -> f64 {
        (0..dim)
            .map(|j| {
                let d = data[(i, j)] - c[j];
                d * d
            })
            .sum()
    };

    let mut best_assign = vec![0; n];
    let mut best_inertia = f64::INFINITY;
    for _restart in 0..10 {
        let mut centers: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let i = rng.random_range(0..n);
                data.row(i).iter().copied().collect()
            })
            .collect();
        let mut assign = vec![0usize; n];
        for _ in 0..100 {
            let mut changed = false;
            for (i, slot) in assign.iter_mut().enumerate() {
                let c = (0..k)
                    .min_by(|&a, &b| dist2(i, &centers[a]).total_cmp(&dist2(i, &centers[b])))
                    .unwrap();
                if *slot != c {
                    *slot = c;
                    changed = true;
                }
            }
            for (c, center) in centers.iter_mut().enumerate() {
                let members: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
                if members.is_empty() {
                    continue;
                }
                for (j, slot) in center.iter_mut().enumerate() {
                    *slot = members.iter().map(|&i| data[(i, j)]).sum::<f64>()
                        / members.len() as f64;
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = (0..n).map(|i| dist2(i, &centers[assign[i]])).sum();
        if inertia < best_inertia {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    best_assign
}

/// Connected components of a symmetric nonnegative adjacency/proximity matrix.
pub fn connected_components(s: &DMatrix<f64>) -> Vec<usize> {
    let n = s.nrows();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if comp[j] == usize::MAX && (s[(i, j)] > 0.0 || s[(j, i)] > 0.0) {
                    comp[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Two partitions agree up to label permutation.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if (a[i] == a[j]) != (b[i] == b[j]) {
                return false;
            }
        }
    }
    true
}

/// Random attributed network within the default oracle budget.
pub fn random_network(rng: &mut ChaCha8Rng, max_users: usize, max_edges: usize) -> HeterogeneousNetwork {
    let n_users = rng.random_range(2..=max_users.max(2));
    let n_posts = rng.random_range(0..=n_users);
    let n_locs = rng.random_range(1..=4);
    let n_ts = rng.random_range(1..=4);
    let ids = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();

    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let budget = rng.random_range(0..=max_edges);
    for _ in 0..budget {
        let kind = rng.random_range(0..4);
        let e = match kind {
            0 => {
                let a = rng.random_range(0..n_users);
                let b = rng.random_range(0..n_users);
                if a == b {
                    continue;
                }
                (Relation::Follow, format!("u{a}"), format!("u{b}"))
            }
            1 if n_posts > 0 => {
                let a = rng.random_range(0..n_users);
                let b = rng.random_range(0..n_posts);
                (Relation::Write, format!("u{a}"), format!("p{b}"))
            }
            2 if n_posts > 0 => {
                let a = rng.random_range(0..n_posts);
                let b = rng.random_range(0..n_locs);
                (Relation::Checkin, format!("p{a}"), format!("l{b}"))
            }
            3 if n_posts > 0 => {
                let a = rng.random_range(0..n_posts);
                let b = rng.random_range(0..n_ts);
                (Relation::At, format!("p{a}"), format!("t{b}"))
            }
            _ => continue,
        };
        if seen.insert(e.clone()) {
            edges.push(e);
        }
    }
    HeterogeneousNetwork::new(
        ids("u", n_users),
        ids("p", n_posts),
        ids("l", n_locs),
        ids("t", n_ts),
        edges,
    )
    .expect("generated network is valid")
}

/// Random aligned pair with a random one-to-one labeled anchor set. The two
/// networks share location/timestamp token vocabularies so attribute paths
/// can cross.
pub fn random_aligned_pair(
    rng: &mut ChaCha8Rng,
    max_users: usize,
    max_edges: usize,
) -> AlignedPair {
    let net1 = random_network(rng, max_users, max_edges);
    let net2 = random_network(rng, max_users, max_edges);
    let max_anchors = net1.n_users().min(net2.n_users());
    let n_anchors = rng.random_range(0..=max_anchors);
    let mut left: Vec<usize> = (0..net1.n_users()).collect();
    let mut right: Vec<usize> = (0..net2.n_users()).collect();
    for i in (1..left.len()).rev() {
        let j = rng.random_range(0..=i);
        left.swap(i, j);
    }
    for i in (1..right.len()).rev() {
        let j = rng.random_range(0..=i);
        right.swap(i, j);
    }
    let anchors: Vec<(usize, usize)> = left
        .into_iter()
        .zip(right)
        .take(n_anchors)
        .collect();
    AlignedPair::new(net1, net2, anchors).expect("one-to-one by construction")
}
