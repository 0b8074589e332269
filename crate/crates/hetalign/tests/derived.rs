//! Cross-checks of named cases against the brute-force reference
//! implementations.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hetalign::alignment::{extract_features, AlignmentParams};
use hetalign::graph::{induced_subnetwork, AlignedPair, HeterogeneousNetwork, Relation};
use hetalign::matching::{match_top_s, MatchedPair};
use hetalign::meta::{DiagramId, MetaPathId};
use hetalign::partition::{synergistic_partition, PartitionConfig};
use hetalign::proximity::{
    inter_md_pro, intra_md_pro, DiagramWeights, ProximityScope,
};
use hetalign::synthetic::{generate_synthetic, SyntheticConfig};
use hetalign_oracles::{oracle_inter_md_pro, oracle_intra_md_pro, OracleBudget};

fn follow_net(n: usize, follows: &[(usize, usize)]) -> HeterogeneousNetwork {
    let edges = follows
        .iter()
        .map(|&(a, b)| (Relation::Follow, format!("u{a}"), format!("u{b}")))
        .collect();
    HeterogeneousNetwork::new(
        (0..n).map(|i| format!("u{i}")).collect(),
        vec![],
        vec![],
        vec![],
        edges,
    )
    .unwrap()
}

#[test]
fn intra_proximity_matches_def6_oracle_on_named_graph() {
    // 4-user follow graph {(0,1),(1,0),(0,2),(2,3)} under PI1.
    let net = follow_net(4, &[(0, 1), (1, 0), (0, 2), (2, 3)]);
    let ds = [DiagramId::Path(MetaPathId::Pi1)];
    let w = DiagramWeights::uniform(&ds).unwrap();
    let s = intra_md_pro(&net, &ds, &w, ProximityScope::IntraNet1)
        .unwrap()
        .matrix;
    let oracle = oracle_intra_md_pro(&net, &ds, &w, &OracleBudget::default()).unwrap();
    assert!((&s - &oracle).abs().max() <= 1e-12, "{s} vs {oracle}");
}

fn attr_pair() -> AlignedPair {
    // Small planted pair: users write posts sharing tokens across networks.
    let post_net = |tag: &str, user_tokens: &[usize]| {
        let n = user_tokens.len();
        let mut edges = Vec::new();
        for (u, &tok) in user_tokens.iter().enumerate() {
            edges.push((Relation::Write, format!("u{u}"), format!("{tag}p{u}")));
            edges.push((Relation::Checkin, format!("{tag}p{u}"), format!("L{tok}")));
            edges.push((Relation::At, format!("{tag}p{u}"), format!("T{tok}")));
        }
        edges.push((Relation::Follow, "u0".into(), "u1".into()));
        HeterogeneousNetwork::new(
            (0..n).map(|i| format!("u{i}")).collect(),
            (0..n).map(|i| format!("{tag}p{i}")).collect(),
            (0..4).map(|i| format!("L{i}")).collect(),
            (0..4).map(|i| format!("T{i}")).collect(),
            edges,
        )
        .unwrap()
    };
    let net1 = post_net("a", &[0, 1, 2, 3, 0]);
    let net2 = post_net("b", &[0, 1, 2, 0, 3]);
    AlignedPair::new(net1, net2, vec![(0, 0), (1, 1)]).unwrap()
}

#[test]
fn inter_proximity_matches_def7_oracle_on_planted_pair() {
    let pair = attr_pair();
    let ds = [
        DiagramId::Path(MetaPathId::Pa1),
        DiagramId::Path(MetaPathId::Pa5),
        DiagramId::Path(MetaPathId::Pa6),
        DiagramId::PsiA2,
    ];
    let w = DiagramWeights::uniform(&ds).unwrap();
    let s = inter_md_pro(&pair, &ds, &w).unwrap().matrix;
    let oracle = oracle_inter_md_pro(&pair, &ds, &w, &OracleBudget::default()).unwrap();
    assert!((&s - &oracle).abs().max() <= 1e-12);
}

#[test]
fn single_chain_pa5_scores_one() {
    // One shared-timestamp chain between (a, b) and no other chain from a or
    // into b: 2*1/(1+1) = 1.
    let mk = |tag: &str| {
        HeterogeneousNetwork::new(
            vec!["u0".into()],
            vec![format!("{tag}p0")],
            vec![],
            vec!["T0".into()],
            vec![
                (Relation::Write, "u0".into(), format!("{tag}p0")),
                (Relation::At, format!("{tag}p0"), "T0".into()),
            ],
        )
        .unwrap()
    };
    let pair = AlignedPair::new(mk("a"), mk("b"), vec![]).unwrap();
    let ds = [DiagramId::Path(MetaPathId::Pa5)];
    let w = DiagramWeights::uniform(&ds).unwrap();
    let s = inter_md_pro(&pair, &ds, &w).unwrap().matrix;
    assert_eq!(s[(0, 0)], 1.0);
}

#[test]
fn feature_rows_equal_per_diagram_proximity_scores() {
    // Features of a matched pair are the per-diagram cross-network scores on
    // the restricted pair; compare against the scalar oracle per diagram.
    let pair = attr_pair();
    let sub1 = induced_subnetwork(&pair.net1, &[0, 1, 2, 3, 4]);
    let sub2 = induced_subnetwork(&pair.net2, &[0, 1, 2, 3, 4]);
    let matched = MatchedPair {
        rank: 0,
        sub1_id: 0,
        sub2_id: 0,
        sub1,
        sub2,
        known_anchors: pair.labeled_anchors().to_vec(),
        m_score: 0.0,
    };
    let mut diagrams = vec![
        DiagramId::Path(MetaPathId::Pa5),
        DiagramId::Path(MetaPathId::Pa6),
        DiagramId::Path(MetaPathId::Pa1),
    ];
    let problem = extract_features(&matched, &diagrams, AlignmentParams::default()).unwrap();
    assert_eq!(problem.x.ncols(), diagrams.len() + 1);

    diagrams.sort_by_key(|d| d.name());
    let budget = OracleBudget::default();
    let labeled: HashSet<(usize, usize)> = pair.labeled_anchors().iter().copied().collect();
    for (j, &d) in diagrams.iter().enumerate() {
        let w = DiagramWeights::uniform(&[d]).unwrap();
        let full = oracle_inter_md_pro(&pair, &[d], &w, &budget).unwrap();
        for (row, &(a, b)) in problem.candidates.iter().enumerate() {
            assert_eq!(problem.x[(row, diagrams.len())], 1.0, "dummy column");
            if labeled.contains(&(a, b)) {
                // Labeled candidates use the leave-one-out anchor set for
                // anchor-dependent diagrams.
                let reduced: Vec<(usize, usize)> = pair
                    .labeled_anchors()
                    .iter()
                    .copied()
                    .filter(|&p| p != (a, b))
                    .collect();
                let loo_pair = pair.with_anchors(reduced).unwrap();
                let loo = oracle_inter_md_pro(&loo_pair, &[d], &w, &budget).unwrap();
                assert!(
                    (problem.x[(row, j)] - loo[(a, b)]).abs() <= 1e-12,
                    "labeled candidate ({a},{b}), diagram {d}"
                );
            } else {
                assert!(
                    (problem.x[(row, j)] - full[(a, b)]).abs() <= 1e-12,
                    "candidate ({a},{b}), diagram {d}: {} vs {}",
                    problem.x[(row, j)],
                    full[(a, b)]
                );
            }
        }
    }
}

#[test]
fn match_selection_agrees_with_independent_greedy_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        // Random 5x5 cluster structure over 25 users per side.
        let net1 = follow_net(25, &[]);
        let net2 = follow_net(25, &[]);
        let assign = |rng: &mut ChaCha8Rng| -> Vec<usize> {
            (0..25).map(|_| rng.random_range(0..5)).collect()
        };
        let a1 = assign(&mut rng);
        let a2 = assign(&mut rng);
        let clusters1: Vec<_> = (0..5)
            .map(|c| {
                let users: Vec<usize> = (0..25).filter(|&u| a1[u] == c).collect();
                induced_subnetwork(&net1, &users)
            })
            .collect();
        let clusters2: Vec<_> = (0..5)
            .map(|c| {
                let users: Vec<usize> = (0..25).filter(|&u| a2[u] == c).collect();
                induced_subnetwork(&net2, &users)
            })
            .collect();
        let mut anchors = Vec::new();
        for u in 0..25 {
            if rng.random::<f64>() < 0.4 {
                anchors.push((u, u));
            }
        }
        let s = rng.random_range(0..=5);

        // Independent replay of the selection rule from raw set arithmetic.
        let mut scored: Vec<(f64, usize, usize)> = Vec::new();
        for (i, c1) in clusters1.iter().enumerate() {
            for (j, c2) in clusters2.iter().enumerate() {
                let u1: HashSet<usize> = c1.users_global.iter().copied().collect();
                let u2: HashSet<usize> = c2.users_global.iter().copied().collect();
                let a = anchors
                    .iter()
                    .filter(|(x, y)| u1.contains(x) && u2.contains(y))
                    .count() as f64;
                let score = if u1.is_empty() || u2.is_empty() {
                    0.0
                } else {
                    a * a / (u1.len() as f64 * u2.len() as f64)
                };
                scored.push((score, i, j));
            }
        }
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut used1 = [false; 5];
        let mut used2 = [false; 5];
        let mut expect = Vec::new();
        for (_, i, j) in scored {
            if expect.len() == s {
                break;
            }
            if !used1[i] && !used2[j] {
                used1[i] = true;
                used2[j] = true;
                expect.push((i, j));
            }
        }

        let pairs = match_top_s(&clusters1, &clusters2, &anchors, s).unwrap();
        let got: Vec<(usize, usize)> = pairs.iter().map(|p| (p.sub1_id, p.sub2_id)).collect();
        assert_eq!(got, expect);
    }
}

#[test]
fn synergy_reduces_discrepancy_on_consistent_planted_pair() {
    // Two planted 2-block networks with all cross anchors consistent: the
    // descent must leave the discrepancy below its initial value.
    let cfg = SyntheticConfig {
        n_users: 30,
        k_blocks: 2,
        p_in: 0.4,
        p_out: 0.05,
        n_posts_per_user: 2,
        attr_vocab: 30,
        anchor_fraction: 1.0,
        noise: 0.1,
        seed: 3,
    };
    let data = generate_synthetic(&cfg).unwrap();
    let intra = hetalign::proximity::default_intra_diagrams();
    let inter = hetalign::proximity::default_inter_diagrams();
    let wi = DiagramWeights::uniform(&intra).unwrap();
    let wa = DiagramWeights::uniform(&inter).unwrap();
    let s1 = intra_md_pro(&data.pair.net1, &intra, &wi, ProximityScope::IntraNet1)
        .unwrap()
        .matrix;
    let s2 = intra_md_pro(&data.pair.net2, &intra, &wi, ProximityScope::IntraNet2)
        .unwrap()
        .matrix;
    let s_inter = inter_md_pro(&data.pair, &inter, &wa).unwrap().matrix;
    let config = PartitionConfig {
        k: 2,
        theta: 80.0,
        max_iters: 80,
        seed: 9,
        ..PartitionConfig::default()
    };
    let state = synergistic_partition(&s1, &s2, &s_inter, &config).unwrap();
    let first = state.objective_trace.first().unwrap().discrepancy;
    let last = state.objective_trace.last().unwrap().discrepancy;
    assert!(
        last < first,
        "discrepancy did not decrease: {first} -> {last}"
    );
}
