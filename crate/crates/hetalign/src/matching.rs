//! M-Score ranking and selection of sub-network pairs for alignment.
//!
//! A pair's M-Score is `|A|^2 / (|U1_i| * |U2_j|)` where `A` is the set of
//! known anchors with both endpoints inside the pair: the anchor count times
//! the fraction of the pair's candidate space already known positive. Pairs
//! are selected greedily in descending score with each sub-network used at
//! most once, so one giant cluster cannot absorb every pair.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::SubNetwork;

/// One matched sub-network pair queued for alignment.
#[derive(Debug, Clone)]
pub struct MatchedPair {
    /// 0-based selection order (descending M-Score).
    pub rank: usize,
    pub sub1_id: usize,
    pub sub2_id: usize,
    pub sub1: SubNetwork,
    pub sub2: SubNetwork,
    /// Labeled anchors with both endpoints inside the pair, as global indices.
    pub known_anchors: Vec<(usize, usize)>,
    pub m_score: f64,
}

impl MatchedPair {
    /// Candidate-link count of the pair.
    pub fn candidate_space(&self) -> usize {
        self.sub1.n_users() * self.sub2.n_users()
    }
}

fn anchors_inside(
    sub1: &SubNetwork,
    sub2: &SubNetwork,
    labeled_anchors: &[(usize, usize)],
) -> Vec<(usize, usize)> {
    let u1: HashSet<usize> = sub1.users_global.iter().copied().collect();
    let u2: HashSet<usize> = sub2.users_global.iter().copied().collect();
    labeled_anchors
        .iter()
        .copied()
        .filter(|(a, b)| u1.contains(a) && u2.contains(b))
        .collect()
}

/// `|A|^2 / (|U1| * |U2|)`; empty sub-networks score 0.
pub fn m_score(sub1: &SubNetwork, sub2: &SubNetwork, labeled_anchors: &[(usize, usize)]) -> f64 {
    let (n1, n2) = (sub1.n_users(), sub2.n_users());
    if n1 == 0 || n2 == 0 {
        log::warn!("m_score of an empty sub-network is 0 by convention");
        return 0.0;
    }
    let a = anchors_inside(sub1, sub2, labeled_anchors).len() as f64;
    a * a / (n1 as f64 * n2 as f64)
}

/// Score all cluster pairs and greedily select the top `s` in descending
/// M-Score, each sub-network used at most once; ties break by
/// `(sub1_id, sub2_id)`. Zero-score pairs fill out the selection if fewer
/// than `s` pairs score positive.
pub fn match_top_s(
    clusters1: &[SubNetwork],
    clusters2: &[SubNetwork],
    labeled_anchors: &[(usize, usize)],
    s: usize,
) -> Result<Vec<MatchedPair>> {
    if s > clusters1.len().min(clusters2.len()) {
        return Err(Error::Usage(format!(
            "top-s {} exceeds cluster count {}",
            s,
            clusters1.len().min(clusters2.len())
        )));
    }
    let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(clusters1.len() * clusters2.len());
    for (i, c1) in clusters1.iter().enumerate() {
        for (j, c2) in clusters2.iter().enumerate() {
            scored.push((m_score(c1, c2, labeled_anchors), i, j));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used1 = vec![false; clusters1.len()];
    let mut used2 = vec![false; clusters2.len()];
    let mut out = Vec::with_capacity(s);
    for (score, i, j) in scored {
        if out.len() == s {
            break;
        }
        if used1[i] || used2[j] {
            continue;
        }
        used1[i] = true;
        used2[j] = true;
        out.push(MatchedPair {
            rank: out.len(),
            sub1_id: i,
            sub2_id: j,
            sub1: clusters1[i].clone(),
            sub2: clusters2[j].clone(),
            known_anchors: anchors_inside(&clusters1[i], &clusters2[j], labeled_anchors),
            m_score: score,
        });
    }
    Ok(out)
}

/// Fraction of the given anchors with both endpoints inside some selected
/// pair. Anchors outside every pair can never be predicted positive.
pub fn coverage_ratio(pairs: &[MatchedPair], anchors: &[(usize, usize)]) -> f64 {
    if anchors.is_empty() {
        return 0.0;
    }
    let sets: Vec<(HashSet<usize>, HashSet<usize>)> = pairs
        .iter()
        .map(|p| {
            (
                p.sub1.users_global.iter().copied().collect(),
                p.sub2.users_global.iter().copied().collect(),
            )
        })
        .collect();
    let covered = anchors
        .iter()
        .filter(|(a, b)| sets.iter().any(|(u1, u2)| u1.contains(a) && u2.contains(b)))
        .count();
    covered as f64 / anchors.len() as f64
}
