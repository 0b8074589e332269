//! Synergistic partition of two aligned networks.
//!
//! Both networks are clustered at once by descending a relaxed joint
//! objective over the user-cluster belonging confidence matrices `H1`, `H2`:
//!
//! ```text
//! alpha * Tr(H1' L1 H1) + beta * Tr(H2' L2 H2)          (normalized cuts)
//! + theta * ( |Hb1 Hb1' - H1 H1'|_F^2                    (discrepancy,
//!           + |Hb2 Hb2' - H2 H2'|_F^2 )                   Hb1 = S H2,
//! + rho1 * |H1' D1 H1 - I|_F^2                            Hb2 = S' H1)
//! + rho2 * |H2' D2 H2 - I|_F^2                           (orthogonality)
//! ```
//!
//! where `L = D - S` is the Laplacian of an intra proximity matrix and `S`
//! (no subscript) is the inter proximity matrix. The hard constraints
//! `H' D H = I` are relaxed into the `rho` penalties; each iteration takes one
//! gradient step on `H1` and one on `H2`, by default with a backtracking
//! (halving) line search so the objective never increases. Clusters are then
//! read off the rows of `H` with seeded K-means.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{induced_subnetwork, HeterogeneousNetwork, SubNetwork};

/// Which network's confidence matrix an operation applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkSide {
    One,
    Two,
}

#[derive(Debug, Clone)]
pub struct PartitionConfig {
    /// Cluster count, shared by both networks.
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub max_iters: usize,
    /// Stop when the relative objective decrease falls below this.
    pub tol: f64,
    pub seed: u64,
    /// Halve the step length until it decreases the objective. Disabling this
    /// takes raw `eta` steps and reports divergence if the objective keeps
    /// rising.
    pub backtracking: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            k: 2,
            alpha: 1.0,
            beta: 1.0,
            theta: 80.0,
            // Nominal penalty weight is much larger (1e9); at small problem
            // sizes that stalls the descent, so desk-scale runs default lower.
            rho1: 1e3,
            rho2: 1e3,
            eta1: 1e-3,
            eta2: 1e-3,
            max_iters: 200,
            tol: 1e-6,
            seed: 0,
            backtracking: true,
        }
    }
}

impl PartitionConfig {
    pub fn validate(&self, n1: usize, n2: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Usage("k must be at least 2".into()));
        }
        if self.k > n1.min(n2) {
            return Err(Error::Usage(format!(
                "k={} exceeds the smaller user count {}",
                self.k,
                n1.min(n2)
            )));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        // theta = 0 is allowed: it decouples the networks into two plain
        // penalized Ncut problems, which is a useful baseline.
        if self.theta.is_nan() || self.theta < 0.0 || self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Usage("theta and tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One row of the per-iteration objective trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub ncut1: f64,
    pub ncut2: f64,
    pub discrepancy: f64,
}

/// Confidence matrices plus the fixed Laplacians they descend over.
#[derive(Debug, Clone)]
pub struct PartitionState {
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    pub l1: DMatrix<f64>,
    pub d1: DVector<f64>,
    pub l2: DMatrix<f64>,
    pub d2: DVector<f64>,
    pub objective_trace: Vec<TraceRow>,
}

/// `L = D - S` with `D(i,i) = sum_j S(i,j)`.
pub fn laplacian(s: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = s.nrows();
    let d = DVector::from_fn(n, |i, _| s.row(i).sum());
    let mut l = -s.clone();
    for i in 0..n {
        l[(i, i)] = d[i] - s[(i, i)];
    }
    (l, d)
}

/// Normalized-cut cost `Tr(H' L H)`.
pub fn ncut_value(h: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<f64> {
    if l.nrows() != l.ncols() || l.nrows() != h.nrows() {
        return Err(Error::Usage(format!(
            "ncut dimension mismatch: L is {}x{}, H has {} rows",
            l.nrows(),
            l.ncols(),
            h.nrows()
        )));
    }
    let lh = l * h;
    Ok(h.iter().zip(lh.iter()).map(|(a, b)| a * b).sum())
}

/// Transport cluster confidences through the inter proximity matrix:
/// `Hb1 = S_inter * H2` (and `Hb2 = S_inter' * H1` via the symmetric call).
pub fn transition_confidence(
    s_inter: &DMatrix<f64>,
    h_other: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if s_inter.ncols() != h_other.nrows() {
        return Err(Error::Usage(format!(
            "transition dimension mismatch: S is {}x{}, H has {} rows",
            s_inter.nrows(),
            s_inter.ncols(),
            h_other.nrows()
        )));
    }
    Ok(s_inter * h_other)
}

/// Partition disagreement between the networks:
/// `|Hb1 Hb1' - H1 H1'|_F^2 + |Hb2 Hb2' - H2 H2'|_F^2`.
pub fn discrepancy(
    h1: &DMatrix<f64>,
    h2: &DMatrix<f64>,
    s_inter: &DMatrix<f64>,
) -> Result<f64> {
    if s_inter.nrows() != h1.nrows() || s_inter.ncols() != h2.nrows() {
        return Err(Error::Usage(format!(
            "discrepancy dimension mismatch: S is {}x{}, H1/H2 have {}/{} rows",
            s_inter.nrows(),
            s_inter.ncols(),
            h1.nrows(),
            h2.nrows()
        )));
    }
    if h1.ncols() != h2.ncols() {
        return Err(Error::Usage("H1 and H2 must share k".into()));
    }
    let hb1 = s_inter * h2;
    let hb2 = s_inter.transpose() * h1;
    let t1 = (&hb1 * hb1.transpose() - h1 * h1.transpose()).norm_squared();
    let t2 = (&hb2 * hb2.transpose() - h2 * h2.transpose()).norm_squared();
    Ok(t1 + t2)
}

fn scale_rows(d: &DVector<f64>, h: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = h.clone();
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            out[(i, j)] *= d[i];
        }
    }
    out
}

/// `|H' D H - I|_F^2`.
fn orthogonality_residual(h: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    let k = h.ncols();
    let q = h.transpose() * scale_rows(d, h) - DMatrix::identity(k, k);
    q.norm_squared()
}

/// The fixed data of one synergistic-partition problem.
pub struct JointProblem<'a> {
    pub l1: &'a DMatrix<f64>,
    pub d1: &'a DVector<f64>,
    pub l2: &'a DMatrix<f64>,
    pub d2: &'a DVector<f64>,
    pub s_inter: &'a DMatrix<f64>,
    pub config: &'a PartitionConfig,
}

#[derive(Debug, Clone, Copy)]
pub struct ObjectiveParts {
    pub objective: f64,
    pub ncut1: f64,
    pub ncut2: f64,
    pub discrepancy: f64,
}

impl JointProblem<'_> {
    pub fn parts(&self, h1: &DMatrix<f64>, h2: &DMatrix<f64>) -> Result<ObjectiveParts> {
        let c = self.config;
        let ncut1 = ncut_value(h1, self.l1)?;
        let ncut2 = ncut_value(h2, self.l2)?;
        let disc = discrepancy(h1, h2, self.s_inter)?;
        let pen1 = c.rho1 * orthogonality_residual(h1, self.d1);
        let pen2 = c.rho2 * orthogonality_residual(h2, self.d2);
        Ok(ObjectiveParts {
            objective: c.alpha * ncut1 + c.beta * ncut2 + c.theta * disc + pen1 + pen2,
            ncut1,
            ncut2,
            discrepancy: disc,
        })
    }

    pub fn objective(&self, h1: &DMatrix<f64>, h2: &DMatrix<f64>) -> Result<f64> {
        Ok(self.parts(h1, h2)?.objective)
    }

    /// Analytic gradient of the joint objective with respect to one side's H,
    /// the other held fixed. Derived symbolically from the objective and
    /// validated against central finite differences in the test suite.
    pub fn gradient(
        &self,
        h1: &DMatrix<f64>,
        h2: &DMatrix<f64>,
        side: NetworkSide,
    ) -> Result<DMatrix<f64>> {
        if s_dims_bad(self.s_inter, h1, h2) {
            return Err(Error::Usage("gradient dimension mismatch".into()));
        }
        let c = self.config;
        let s = self.s_inter;
        match side {
            NetworkSide::One => {
                // theta * |S H2 H2' S' - H1 H1'|^2  ->  M = Hb1 Hb1' - H1 H1'
                let hb1 = s * h2;
                let m = &hb1 * hb1.transpose() - h1 * h1.transpose();
                // theta * |S' H1 H1' S - H2 H2'|^2  ->  N = U U' - H2 H2', U = S' H1
                let u = s.transpose() * h1;
                let n = &u * u.transpose() - h2 * h2.transpose();

                let g_ncut = (self.l1 * h1 + self.l1.transpose() * h1) * c.alpha;
                let g_disc = ((&m + m.transpose()) * h1) * (-2.0 * c.theta)
                    + (s * ((&n + n.transpose()) * &u)) * (2.0 * c.theta);
                let dh = scale_rows(self.d1, h1);
                let q = h1.transpose() * &dh - DMatrix::identity(h1.ncols(), h1.ncols());
                let g_pen = &dh * (&q + q.transpose()) * (2.0 * c.rho1);
                Ok(g_ncut + g_disc + g_pen)
            }
            NetworkSide::Two => {
                let u = s * h2;
                let m = &u * u.transpose() - h1 * h1.transpose();
                let hb2 = s.transpose() * h1;
                let n = &hb2 * hb2.transpose() - h2 * h2.transpose();

                let g_ncut = (self.l2 * h2 + self.l2.transpose() * h2) * c.beta;
                let g_disc = (s.transpose() * ((&m + m.transpose()) * &u)) * (2.0 * c.theta)
                    + ((&n + n.transpose()) * h2) * (-2.0 * c.theta);
                let dh = scale_rows(self.d2, h2);
                let q = h2.transpose() * &dh - DMatrix::identity(h2.ncols(), h2.ncols());
                let g_pen = &dh * (&q + q.transpose()) * (2.0 * c.rho2);
                Ok(g_ncut + g_disc + g_pen)
            }
        }
    }
}

fn s_dims_bad(s: &DMatrix<f64>, h1: &DMatrix<f64>, h2: &DMatrix<f64>) -> bool {
    s.nrows() != h1.nrows() || s.ncols() != h2.nrows() || h1.ncols() != h2.ncols()
}

/// Warm-start at the plain spectral solution: `H = D^{-1/2} V` with `V` the k
/// bottom eigenvectors of the normalized Laplacian. Falls back to seeded
/// uniform random entries in `[0, 1/sqrt(k))` when the eigensolve is unusable.
pub(crate) fn spectral_init(
    s: &DMatrix<f64>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let n = s.nrows();
    let random_fallback = |rng: &mut ChaCha8Rng| {
        let scale = 1.0 / (k as f64).sqrt();
        DMatrix::from_fn(n, k, |_, _| rng.random::<f64>() * scale)
    };
    let d = DVector::from_fn(n, |i, _| s.row(i).sum());
    if d.iter().all(|&x| x <= 0.0) {
        return random_fallback(rng);
    }
    let dis = DVector::from_fn(n, |i, _| if d[i] > 0.0 { 1.0 / d[i].sqrt() } else { 0.0 });
    let mut lsym = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j { 1.0 } else { 0.0 };
            lsym[(i, j)] = v - dis[i] * s[(i, j)] * dis[j];
        }
    }
    let eig = SymmetricEigen::new(lsym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut h = DMatrix::zeros(n, k);
    for (j, &col) in order.iter().take(k).enumerate() {
        for i in 0..n {
            h[(i, j)] = dis[i] * eig.eigenvectors[(i, col)];
        }
    }
    if h.iter().any(|v| !v.is_finite()) {
        return random_fallback(rng);
    }
    h
}

fn backtrack_step(
    h: &DMatrix<f64>,
    grad: &DMatrix<f64>,
    eta0: f64,
    obj_before: f64,
    eval: impl Fn(&DMatrix<f64>) -> Result<f64>,
) -> Result<(DMatrix<f64>, f64)> {
    let mut eta = eta0;
    for _ in 0..60 {
        let cand = h - grad * eta;
        let obj = eval(&cand)?;
        if obj < obj_before {
            return Ok((cand, obj));
        }
        eta *= 0.5;
    }
    // No decreasing step found; stay put (counts as converged).
    Ok((h.clone(), obj_before))
}

/// Alternating gradient descent on the joint objective.
///
/// Each iteration takes one descent step on `H1`, then one on `H2`; the trace
/// records the objective parts after every iteration (row 0 is the
/// initialization). Stops when the relative objective decrease drops below
/// `config.tol` or `config.max_iters` is reached. Without backtracking, ten
/// consecutive objective increases abort with a divergence error.
pub fn synergistic_partition(
    s1: &DMatrix<f64>,
    s2: &DMatrix<f64>,
    s_inter: &DMatrix<f64>,
    config: &PartitionConfig,
) -> Result<PartitionState> {
    let (n1, n2) = (s1.nrows(), s2.nrows());
    if s1.ncols() != n1 || s2.ncols() != n2 {
        return Err(Error::Usage("intra proximity matrices must be square".into()));
    }
    if s_inter.nrows() != n1 || s_inter.ncols() != n2 {
        return Err(Error::Usage(format!(
            "inter proximity is {}x{}, expected {}x{}",
            s_inter.nrows(),
            s_inter.ncols(),
            n1,
            n2
        )));
    }
    config.validate(n1, n2)?;

    let (l1, d1) = laplacian(s1);
    let (l2, d2) = laplacian(s2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut h1 = spectral_init(s1, config.k, &mut rng);
    let mut h2 = spectral_init(s2, config.k, &mut rng);

    let problem = JointProblem {
        l1: &l1,
        d1: &d1,
        l2: &l2,
        d2: &d2,
        s_inter,
        config,
    };

    let mut trace = Vec::with_capacity(config.max_iters + 1);
    let parts0 = problem.parts(&h1, &h2)?;
    trace.push(TraceRow {
        iter: 0,
        objective: parts0.objective,
        ncut1: parts0.ncut1,
        ncut2: parts0.ncut2,
        discrepancy: parts0.discrepancy,
    });

    let mut prev = parts0.objective;
    let mut rising = 0usize;
    for it in 1..=config.max_iters {
        let g1 = problem.gradient(&h1, &h2, NetworkSide::One)?;
        if config.backtracking {
            let obj = problem.objective(&h1, &h2)?;
            let (new_h1, _) =
                backtrack_step(&h1, &g1, config.eta1, obj, |cand| problem.objective(cand, &h2))?;
            h1 = new_h1;
        } else {
            h1 -= &g1 * config.eta1;
        }

        let g2 = problem.gradient(&h1, &h2, NetworkSide::Two)?;
        if config.backtracking {
            let obj = problem.objective(&h1, &h2)?;
            let (new_h2, _) =
                backtrack_step(&h2, &g2, config.eta2, obj, |cand| problem.objective(&h1, cand))?;
            h2 = new_h2;
        } else {
            h2 -= &g2 * config.eta2;
        }

        let parts = problem.parts(&h1, &h2)?;
        trace.push(TraceRow {
            iter: it,
            objective: parts.objective,
            ncut1: parts.ncut1,
            ncut2: parts.ncut2,
            discrepancy: parts.discrepancy,
        });

        if !config.backtracking {
            // NaN counts as divergence too.
            if parts.objective.is_nan() || parts.objective > prev {
                rising += 1;
                if rising >= 10 {
                    return Err(Error::Divergence { iters: it, rising });
                }
            } else {
                rising = 0;
            }
        }

        let decrease = prev - parts.objective;
        prev = parts.objective;
        if decrease >= 0.0 && decrease < config.tol * prev.abs().max(1.0) {
            break;
        }
    }

    Ok(PartitionState {
        h1,
        h2,
        l1,
        d1,
        l2,
        d2,
        objective_trace: trace,
    })
}

/// Per-network cluster labels for every user.
#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub k: usize,
    pub assign1: Vec<usize>,
    pub assign2: Vec<usize>,
}

impl ClusterAssignment {
    /// User index lists per cluster, for one network's assignment.
    pub fn users_of(assign: &[usize], k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); k];
        for (u, &c) in assign.iter().enumerate() {
            out[c].push(u);
        }
        out
    }
}

/// K-means over the rows of each confidence matrix.
pub fn extract_clusters(state: &PartitionState, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let assign1 = kmeans(&state.h1, k, seed)?;
    let assign2 = kmeans(&state.h2, k, seed.wrapping_add(1))?;
    Ok(ClusterAssignment {
        k,
        assign1,
        assign2,
    })
}

/// Build the induced sub-network of every cluster: the cluster's users, their
/// posts, and those posts' attributes.
pub fn cluster_subnetworks(
    net: &HeterogeneousNetwork,
    assign: &[usize],
    k: usize,
) -> Vec<SubNetwork> {
    ClusterAssignment::users_of(assign, k)
        .iter()
        .map(|users| induced_subnetwork(net, users))
        .collect()
}

/// Seeded K-means over the rows of `data`: k-means++ initialization, Lloyd
/// iteration capped at 300 rounds, ten restarts keeping the lowest-inertia
/// assignment. An emptied cluster is re-seeded from the point farthest from
/// its assigned centroid.
pub fn kmeans(data: &DMatrix<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(Error::Usage(format!(
            "kmeans needs 1 <= k <= {n}, got k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _restart in 0..10 {
        let (assign, inertia) = kmeans_single(data, k, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, assign));
        }
    }
    Ok(best.expect("at least one restart").1)
}

fn kmeans_single(data: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = data.nrows();
    let dim = data.ncols();
    let dist2 = |i: usize, center: &[f64]| -> f64 {
        (0..dim)
            .map(|j| {
                let d = data[(i, j)] - center[j];
                d * d
            })
            .sum()
    };

    // k-means++ seeding.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    centers.push(data.row(first).iter().copied().collect());
    let mut best = vec![f64::INFINITY; n];
    while centers.len() < k {
        let last = centers.last().unwrap();
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.min(dist2(i, last));
        }
        let total: f64 = best.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in best.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(data.row(next).iter().copied().collect());
    }

    let mut assign = vec![0usize; n];
    for _round in 0..300 {
        // Assignment step; ties go to the lowest cluster index.
        let mut changed = false;
        for (i, slot) in assign.iter_mut().enumerate() {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = dist2(i, center);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if *slot != best_c {
                *slot = best_c;
                changed = true;
            }
        }

        // Update step.
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; dim]; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            for j in 0..dim {
                sums[assign[i]][j] += data[(i, j)];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed from the point farthest from its assigned centroid.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(a, &centers[assign[a]])
                            .total_cmp(&dist2(b, &centers[assign[b]]))
                    })
                    .unwrap();
                log::warn!("kmeans: cluster {c} emptied, re-seeding from point {far}");
                centers[c] = data.row(far).iter().copied().collect();
                assign[far] = c;
                changed = true;
            } else {
                for j in 0..dim {
                    centers[c][j] = sums[c][j] / counts[c] as f64;
                }
            }
        }

        if !changed {
            break;
        }
    }
    let inertia = (0..n).map(|i| dist2(i, &centers[assign[i]])).sum();
    (assign, inertia)
}
