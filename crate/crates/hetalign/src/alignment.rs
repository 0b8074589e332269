//! Anchor-link inference inside one matched sub-network pair.
//!
//! Every user pair of the matched sub-networks is a candidate link with a
//! feature row of per-diagram cross-network proximity scores plus a dummy-one
//! bias column. Inference alternates two steps until the label vector stops
//! changing:
//!
//! 1. ridge regression `w = c (I + c X'X)^{-1} X' y` in closed form, and
//! 2. greedy label selection: candidates in descending score order, a
//!    candidate becomes positive iff its score clears the threshold and both
//!    of its users are still unconsumed (the one-to-one cardinality
//!    constraint, `A1 y <= 1` and `A2 y <= 1` on the node-link incidence
//!    matrices).
//!
//! Known anchors keep label 1 throughout and consume their users first. The
//! first regression is fit on the labeled rows alone: the unlabeled rows have
//! no trustworthy target yet, and folding them in as zeros pins the fitted
//! scores of true-but-unlabeled links strictly below the selection threshold.
//! From the second iteration on, the full label vector is the target.

use std::collections::HashSet;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matching::MatchedPair;
use crate::meta::DiagramId;
use crate::proximity::inter_diagram_score;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy)]
pub struct AlignmentParams {
    /// Regression trade-off between fit and the `|w|^2` penalty.
    pub c: f64,
    /// Scale of the `|w|^2` penalty; 1 reproduces the closed form above.
    pub gamma: f64,
    /// Minimum score for an unlabeled candidate to be selected.
    pub threshold: f64,
    pub max_iters: usize,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            c: 10.0,
            gamma: 1.0,
            threshold: 0.5,
            max_iters: 50,
        }
    }
}

/// Candidate links of one matched pair with their features and constraints.
#[derive(Debug, Clone)]
pub struct AlignmentProblem {
    /// Global (net1, net2) user index per candidate, row-major over the
    /// matched pair's local user grid.
    pub candidates: Vec<(usize, usize)>,
    /// `|H| x (f+1)` feature matrix; the trailing column is the dummy 1.
    pub x: DMatrix<f64>,
    /// Candidates that are known anchors (label fixed to 1).
    pub labeled_mask: Vec<bool>,
    /// Local side-1 user per candidate (the nonzero row of A1's column).
    pub u1_of: Vec<usize>,
    /// Local side-2 user per candidate.
    pub u2_of: Vec<usize>,
    pub n_users1: usize,
    pub n_users2: usize,
    pub params: AlignmentParams,
}

impl AlignmentProblem {
    /// Materialize the binary node-link incidence matrices
    /// `A1 in {0,1}^{n1 x |H|}` and `A2 in {0,1}^{n2 x |H|}`.
    pub fn incidence_matrices(&self) -> (CsrMatrix, CsrMatrix) {
        let n = self.candidates.len();
        let a1 = CsrMatrix::from_triplets(
            self.n_users1,
            n,
            self.u1_of.iter().enumerate().map(|(l, &u)| (u, l, 1.0)),
        );
        let a2 = CsrMatrix::from_triplets(
            self.n_users2,
            n,
            self.u2_of.iter().enumerate().map(|(l, &u)| (u, l, 1.0)),
        );
        (a1, a2)
    }
}

/// Result of [`align_pair`].
#[derive(Debug, Clone)]
pub struct AlignmentSolution {
    pub w: DVector<f64>,
    /// Final labels, one-to-one feasible, labeled candidates kept at 1.
    pub y: Vec<bool>,
    pub y_hat: DVector<f64>,
    /// `|y_i - y_{i-1}|_1` per iteration.
    pub delta_trace: Vec<f64>,
    pub converged: bool,
    /// Label vector revisited without converging; the best-objective iterate
    /// was returned instead.
    pub oscillated: bool,
}

/// Extract per-candidate features for a matched pair: one column per inter
/// diagram (sorted by name) holding the diagram's cross-network proximity
/// score on the pair restricted to the matched users, plus the dummy column.
///
/// Anchor-dependent diagram scores of a labeled candidate are recomputed with
/// that candidate's own anchor left out, so a training link never feeds its
/// own feature.
pub fn extract_features(
    pair: &MatchedPair,
    inter_diagrams: &[DiagramId],
    params: AlignmentParams,
) -> Result<AlignmentProblem> {
    let n1 = pair.sub1.n_users();
    let n2 = pair.sub2.n_users();
    let mut diagrams = inter_diagrams.to_vec();
    diagrams.sort_by_key(|d| d.name());
    let f = diagrams.len();

    // Local anchor index pairs inside this matched pair.
    let local_of = |users: &[usize], g: usize| users.iter().position(|&x| x == g);
    let mut local_anchors = Vec::with_capacity(pair.known_anchors.len());
    for &(ga, gb) in &pair.known_anchors {
        let la = local_of(&pair.sub1.users_global, ga);
        let lb = local_of(&pair.sub2.users_global, gb);
        match (la, lb) {
            (Some(a), Some(b)) => local_anchors.push((a, b)),
            _ => {
                return Err(Error::Validation(format!(
                    "known anchor ({ga},{gb}) is not inside the matched pair"
                )))
            }
        }
    }

    let restricted = crate::graph::AlignedPair::new(
        pair.sub1.network.clone(),
        pair.sub2.network.clone(),
        local_anchors.clone(),
    )?;

    let n_cand = n1 * n2;
    let mut x = DMatrix::zeros(n_cand, f + 1);
    for row in 0..n_cand {
        x[(row, f)] = 1.0;
    }
    for (j, &d) in diagrams.iter().enumerate() {
        let s = inter_diagram_score(&restricted, d)?;
        for lx in 0..n1 {
            for ly in 0..n2 {
                x[(lx * n2 + ly, j)] = s[(lx, ly)];
            }
        }
    }

    // Leave-one-out recount for labeled candidates on anchor-dependent diagrams.
    let anchor_cols: Vec<usize> = diagrams
        .iter()
        .enumerate()
        .filter(|(_, d)| d.uses_anchors())
        .map(|(j, _)| j)
        .collect();
    if !anchor_cols.is_empty() {
        for &(la, lb) in &local_anchors {
            let reduced: Vec<(usize, usize)> = local_anchors
                .iter()
                .copied()
                .filter(|&p| p != (la, lb))
                .collect();
            let loo = restricted.with_anchors(reduced)?;
            let row = la * n2 + lb;
            for &j in &anchor_cols {
                let s = inter_diagram_score(&loo, diagrams[j])?;
                x[(row, j)] = s[(la, lb)];
            }
        }
    }

    let anchor_set: HashSet<(usize, usize)> = local_anchors.iter().copied().collect();
    let mut candidates = Vec::with_capacity(n_cand);
    let mut labeled_mask = Vec::with_capacity(n_cand);
    let mut u1_of = Vec::with_capacity(n_cand);
    let mut u2_of = Vec::with_capacity(n_cand);
    for lx in 0..n1 {
        for ly in 0..n2 {
            candidates.push((pair.sub1.users_global[lx], pair.sub2.users_global[ly]));
            labeled_mask.push(anchor_set.contains(&(lx, ly)));
            u1_of.push(lx);
            u2_of.push(ly);
        }
    }

    Ok(AlignmentProblem {
        candidates,
        x,
        labeled_mask,
        u1_of,
        u2_of,
        n_users1: n1,
        n_users2: n2,
        params,
    })
}

/// Closed-form minimizer of `(c/2)|Xw - y|^2 + (1/2)|w|^2`:
/// `w = c (I + c X'X)^{-1} X' y`.
pub fn solve_w(x: &DMatrix<f64>, y: &DVector<f64>, c: f64) -> DVector<f64> {
    solve_w_regularized(x, y, c, 1.0)
}

/// As [`solve_w`] with the penalty scaled by `gamma`: minimizes
/// `(c/2)|Xw - y|^2 + (gamma/2)|w|^2`.
pub fn solve_w_regularized(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    c: f64,
    gamma: f64,
) -> DVector<f64> {
    let d = x.ncols();
    if x.nrows() == 0 {
        return DVector::zeros(d);
    }
    let a = DMatrix::identity(d, d) * gamma + x.transpose() * x * c;
    let rhs = x.transpose() * y * c;
    // gamma > 0 makes A positive definite, so the factorization cannot fail.
    Cholesky::new(a)
        .expect("I*gamma + c X'X is positive definite")
        .solve(&rhs)
}

/// Greedy one-to-one label selection.
///
/// Labeled candidates are forced to 1 first and consume their users; the rest
/// are scanned in descending `y_hat` (ties by candidate index) and selected
/// iff `y_hat >= threshold` with both users unconsumed. Scanning in that
/// order makes this the coordinate-wise minimizer of `|y_hat - y|^2` under
/// the degree constraints, with a 1/2-approximation guarantee on the selected
/// score mass.
pub fn greedy_select(
    y_hat: &DVector<f64>,
    u1_of: &[usize],
    u2_of: &[usize],
    n_users1: usize,
    n_users2: usize,
    labeled_mask: &[bool],
    threshold: f64,
) -> Result<Vec<bool>> {
    let n = y_hat.len();
    let mut y = vec![false; n];
    let mut used1 = vec![false; n_users1];
    let mut used2 = vec![false; n_users2];

    for l in 0..n {
        if labeled_mask[l] {
            if used1[u1_of[l]] || used2[u2_of[l]] {
                return Err(Error::Validation(
                    "labeled candidates violate the one-to-one constraint".into(),
                ));
            }
            used1[u1_of[l]] = true;
            used2[u2_of[l]] = true;
            y[l] = true;
        }
    }

    let mut order: Vec<usize> = (0..n).filter(|&l| !labeled_mask[l]).collect();
    order.sort_by(|&a, &b| y_hat[b].total_cmp(&y_hat[a]).then(a.cmp(&b)));
    for l in order {
        if y_hat[l] < threshold {
            break;
        }
        if !used1[u1_of[l]] && !used2[u2_of[l]] {
            used1[u1_of[l]] = true;
            used2[u2_of[l]] = true;
            y[l] = true;
        }
    }
    Ok(y)
}

/// The lowest-objective iterate seen so far: (objective, w, y, y_hat).
type BestIterate = (f64, DVector<f64>, Vec<bool>, DVector<f64>);

fn to_f64(y: &[bool]) -> DVector<f64> {
    DVector::from_iterator(y.len(), y.iter().map(|&b| if b { 1.0 } else { 0.0 }))
}

fn step1_objective(x: &DMatrix<f64>, w: &DVector<f64>, y: &DVector<f64>, c: f64, gamma: f64) -> f64 {
    0.5 * c * (x * w - y).norm_squared() + 0.5 * gamma * w.norm_squared()
}

/// Alternate the closed-form regression and greedy selection until the label
/// vector is stable (`delta_y = 0`) or `max_iters` is hit. A revisited label
/// vector means a cycle; the best-objective iterate is returned, flagged.
pub fn align_pair(problem: &AlignmentProblem) -> Result<AlignmentSolution> {
    let p = problem.params;
    let n = problem.candidates.len();
    let d = problem.x.ncols();
    if problem.labeled_mask.len() != n || problem.u1_of.len() != n || problem.u2_of.len() != n {
        return Err(Error::Usage("alignment problem arrays disagree on |H|".into()));
    }
    if problem.x.nrows() != n {
        return Err(Error::Usage("feature matrix rows != candidate count".into()));
    }
    if problem.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite feature value".into()));
    }

    let mut y: Vec<bool> = problem.labeled_mask.clone();

    // First regression: labeled rows only (see module docs).
    let labeled_rows: Vec<usize> = (0..n).filter(|&l| problem.labeled_mask[l]).collect();
    let mut w = if labeled_rows.is_empty() {
        DVector::zeros(d)
    } else {
        let mut xl = DMatrix::zeros(labeled_rows.len(), d);
        for (r, &l) in labeled_rows.iter().enumerate() {
            xl.set_row(r, &problem.x.row(l));
        }
        let yl = DVector::from_element(labeled_rows.len(), 1.0);
        solve_w_regularized(&xl, &yl, p.c, p.gamma)
    };

    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    seen.insert(y.clone());

    let mut y_hat = &problem.x * &w;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut oscillated = false;
    let mut best: Option<BestIterate> = None;

    for _it in 1..=p.max_iters {
        let y_new = greedy_select(
            &y_hat,
            &problem.u1_of,
            &problem.u2_of,
            problem.n_users1,
            problem.n_users2,
            &problem.labeled_mask,
            p.threshold,
        )?;
        debug_assert!(feasible(&y_new, problem));

        let delta = y_new
            .iter()
            .zip(&y)
            .filter(|(a, b)| a != b)
            .count() as f64;
        trace.push(delta);

        let obj = step1_objective(&problem.x, &w, &to_f64(&y_new), p.c, p.gamma);
        if best.as_ref().is_none_or(|(b, _, _, _)| obj < *b) {
            best = Some((obj, w.clone(), y_new.clone(), y_hat.clone()));
        }

        if delta == 0.0 {
            y = y_new;
            converged = true;
            break;
        }
        if !seen.insert(y_new.clone()) {
            oscillated = true;
            let (_, bw, by, byh) = best.expect("at least one iterate");
            return Ok(AlignmentSolution {
                w: bw,
                y: by,
                y_hat: byh,
                delta_trace: trace,
                converged: false,
                oscillated,
            });
        }
        y = y_new;
        w = solve_w_regularized(&problem.x, &to_f64(&y), p.c, p.gamma);
        y_hat = &problem.x * &w;
    }

    Ok(AlignmentSolution {
        w,
        y,
        y_hat,
        delta_trace: trace,
        converged,
        oscillated,
    })
}

fn feasible(y: &[bool], problem: &AlignmentProblem) -> bool {
    let mut deg1 = vec![0u32; problem.n_users1];
    let mut deg2 = vec![0u32; problem.n_users2];
    for (l, &set) in y.iter().enumerate() {
        if set {
            deg1[problem.u1_of[l]] += 1;
            deg2[problem.u2_of[l]] += 1;
        }
    }
    deg1.iter().all(|&d| d <= 1) && deg2.iter().all(|&d| d <= 1)
}

/// One matched pair's solved problem, ready for aggregation.
#[derive(Debug, Clone)]
pub struct PairPrediction {
    pub pair_rank: usize,
    pub candidates: Vec<(usize, usize)>,
    pub solution: AlignmentSolution,
}

/// Union of per-pair results over the original networks.
#[derive(Debug, Clone)]
pub struct GlobalPrediction {
    /// Predicted-positive links, sorted; includes the labeled anchors.
    pub positives: Vec<(usize, usize)>,
    /// Every candidate link that was scored (inside some matched pair),
    /// sorted. Pairs outside are pruned negative.
    pub candidates: Vec<(usize, usize)>,
}

/// Preserve every pair's result as the final prediction; candidate links not
/// inside any matched pair are implicitly negative. One-to-one sub-network
/// matching makes cross-pair conflicts impossible; they are still checked.
pub fn aggregate(results: &[PairPrediction]) -> Result<GlobalPrediction> {
    let mut by_rank: Vec<&PairPrediction> = results.iter().collect();
    by_rank.sort_by_key(|r| r.pair_rank);

    let mut used1 = HashSet::new();
    let mut used2 = HashSet::new();
    let mut positives = Vec::new();
    let mut candidates = Vec::new();
    for r in by_rank {
        if r.candidates.len() != r.solution.y.len() {
            return Err(Error::Usage("prediction arrays disagree on |H|".into()));
        }
        for (l, &(a, b)) in r.candidates.iter().enumerate() {
            candidates.push((a, b));
            if r.solution.y[l] {
                if !used1.insert(a) || !used2.insert(b) {
                    return Err(Error::Validation(format!(
                        "cross-pair one-to-one conflict at ({a},{b})"
                    )));
                }
                positives.push((a, b));
            }
        }
    }
    positives.sort_unstable();
    candidates.sort_unstable();
    Ok(GlobalPrediction {
        positives,
        candidates,
    })
}
