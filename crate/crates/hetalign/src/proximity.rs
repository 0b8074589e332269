//! Weighted meta-diagram proximity between users.
//!
//! Per diagram, a pair's score is its normalized instance count; the final
//! proximity is the weight-combined sum over the configured diagram set.
//! For a pair inside one network the numerator counts instances in both
//! directions and the denominator sums the instances leaving either user; for
//! a cross-network pair the numerator is twice the forward count and the
//! denominator sums the instances leaving the first user and entering the
//! second. Pairs with a zero denominator score 0: no connectivity context
//! means maximal dissimilarity.
//!
//! Every per-diagram ratio lies in [0, 1] (instances between the pair are a
//! subset of instances touching the pair) and weights sum to one, so all
//! proximity entries lie in [0, 1].

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{AlignedPair, HeterogeneousNetwork};
use crate::meta::{count_diagram, DiagramId, MetaInput, MetaScope};

/// Normalized diagram weights: nonnegative, summing to one.
#[derive(Debug, Clone)]
pub struct DiagramWeights {
    weights: BTreeMap<DiagramId, f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-9;

impl DiagramWeights {
    pub fn new(weights: BTreeMap<DiagramId, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Usage("empty weight set".into()));
        }
        if let Some((d, &w)) = weights.iter().find(|(_, &w)| w.is_nan() || w < 0.0) {
            return Err(Error::Usage(format!("negative weight {w} for {d}")));
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Usage(format!(
                "diagram weights sum to {sum}, expected 1"
            )));
        }
        Ok(DiagramWeights { weights })
    }

    /// Uniform weights over a diagram set.
    pub fn uniform(diagrams: &[DiagramId]) -> Result<Self> {
        if diagrams.is_empty() {
            return Err(Error::Usage("empty diagram set".into()));
        }
        let w = 1.0 / diagrams.len() as f64;
        let map: BTreeMap<DiagramId, f64> = diagrams.iter().map(|&d| (d, w)).collect();
        if map.len() != diagrams.len() {
            return Err(Error::Usage("duplicate diagram in set".into()));
        }
        // Uniform weights sum to 1 up to rounding, inside the tolerance.
        Ok(DiagramWeights { weights: map })
    }

    pub fn get(&self, d: DiagramId) -> Option<f64> {
        self.weights.get(&d).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DiagramId, f64)> + '_ {
        self.weights.iter().map(|(&d, &w)| (d, w))
    }

    /// Ensures the weight keys are exactly the requested diagram set.
    fn check_cover(&self, diagrams: &[DiagramId]) -> Result<()> {
        let set: std::collections::BTreeSet<DiagramId> = diagrams.iter().copied().collect();
        if set.len() != diagrams.len() {
            return Err(Error::Usage("duplicate diagram in set".into()));
        }
        let keys: std::collections::BTreeSet<DiagramId> =
            self.weights.keys().copied().collect();
        if keys != set {
            return Err(Error::Usage(
                "weights do not cover exactly the requested diagram set".into(),
            ));
        }
        Ok(())
    }
}

/// Which proximity a matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProximityScope {
    IntraNet1,
    IntraNet2,
    Inter,
}

/// Dense nonnegative proximity matrix with entries in [0, 1]; intra matrices
/// are symmetric with zero diagonal.
#[derive(Debug, Clone)]
pub struct ProximityMatrix {
    pub scope: ProximityScope,
    pub matrix: DMatrix<f64>,
}

impl ProximityMatrix {
    /// Write nonzero entries as `row<TAB>col<TAB>value` triples.
    pub fn export_tsv(&self, mut w: impl Write) -> Result<()> {
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                let v = self.matrix[(r, c)];
                if v != 0.0 {
                    writeln!(w, "{r}\t{c}\t{v}")?;
                }
            }
        }
        Ok(())
    }
}

fn sorted_by_name(diagrams: &[DiagramId]) -> Vec<DiagramId> {
    let mut ds = diagrams.to_vec();
    ds.sort_by_key(|d| d.name());
    ds
}

/// Normalized score matrix of a single intra diagram:
/// `(count(x,y) + count(y,x)) / (out(x) + out(y))`, 0 on zero denominators.
pub fn intra_diagram_score(
    net: &HeterogeneousNetwork,
    diagram: DiagramId,
) -> Result<DMatrix<f64>> {
    if diagram.scope() != MetaScope::Intra {
        return Err(Error::Usage(format!("{diagram} is not an intra diagram")));
    }
    let counts = count_diagram(MetaInput::Network(net), diagram)?;
    let out = counts.row_sums();
    let n = net.n_users();
    let mut s = DMatrix::zeros(n, n);
    let sym = counts.add(&counts.transpose())?;
    for (x, y, v) in sym.iter() {
        let denom = out[x] + out[y];
        if denom > 0.0 {
            s[(x, y)] = v / denom;
        }
    }
    Ok(s)
}

/// Normalized score matrix of a single inter diagram:
/// `2 * count(x,y) / (out(x) + in(y))`, 0 on zero denominators.
pub fn inter_diagram_score(pair: &AlignedPair, diagram: DiagramId) -> Result<DMatrix<f64>> {
    if diagram.scope() != MetaScope::Inter {
        return Err(Error::Usage(format!("{diagram} is not an inter diagram")));
    }
    let counts = count_diagram(MetaInput::Pair(pair), diagram)?;
    let out = counts.row_sums();
    let into = counts.col_sums();
    let mut s = DMatrix::zeros(pair.net1.n_users(), pair.net2.n_users());
    for (x, y, v) in counts.iter() {
        let denom = out[x] + into[y];
        if denom > 0.0 {
            s[(x, y)] = 2.0 * v / denom;
        }
    }
    Ok(s)
}

/// Weighted intra-network proximity over a diagram set.
pub fn intra_md_pro(
    net: &HeterogeneousNetwork,
    diagrams: &[DiagramId],
    weights: &DiagramWeights,
    scope: ProximityScope,
) -> Result<ProximityMatrix> {
    if scope == ProximityScope::Inter {
        return Err(Error::Usage("intra_md_pro with inter scope tag".into()));
    }
    weights.check_cover(diagrams)?;
    let n = net.n_users();
    let mut acc = DMatrix::zeros(n, n);
    // Deterministic summation order: diagrams sorted by name.
    for d in sorted_by_name(diagrams) {
        let w = weights.get(d).expect("covered");
        let s = intra_diagram_score(net, d)?;
        acc += s * w;
    }
    Ok(ProximityMatrix {
        scope,
        matrix: acc,
    })
}

/// Weighted cross-network proximity over a diagram set.
pub fn inter_md_pro(
    pair: &AlignedPair,
    diagrams: &[DiagramId],
    weights: &DiagramWeights,
) -> Result<ProximityMatrix> {
    weights.check_cover(diagrams)?;
    let mut acc = DMatrix::zeros(pair.net1.n_users(), pair.net2.n_users());
    for d in sorted_by_name(diagrams) {
        let w = weights.get(d).expect("covered");
        let s = inter_diagram_score(pair, d)?;
        acc += s * w;
    }
    Ok(ProximityMatrix {
        scope: ProximityScope::Inter,
        matrix: acc,
    })
}

/// Default intra diagram set: both social and attribute families without the
/// most expensive triple compositions.
pub fn default_intra_diagrams() -> Vec<DiagramId> {
    use crate::meta::MetaPathId::*;
    vec![
        DiagramId::Path(Pi1),
        DiagramId::Path(Pi3),
        DiagramId::Path(Pi4),
        DiagramId::Path(Pi5),
        DiagramId::Path(Pi6),
        DiagramId::PsiI1,
    ]
}

/// Default inter diagram set.
pub fn default_inter_diagrams() -> Vec<DiagramId> {
    use crate::meta::MetaPathId::*;
    vec![
        DiagramId::Path(Pa1),
        DiagramId::Path(Pa2),
        DiagramId::Path(Pa5),
        DiagramId::Path(Pa6),
        DiagramId::PsiA1,
        DiagramId::PsiA2,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Relation;
    use crate::meta::MetaPathId;
    use approx::assert_relative_eq;

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
    fn mutual_follow_saturates_at_one() {
        let net = follow_net(2, &[(0, 1), (1, 0)]);
        let w = DiagramWeights::uniform(&[DiagramId::Path(MetaPathId::Pi1)]).unwrap();
        let s = intra_md_pro(
            &net,
            &[DiagramId::Path(MetaPathId::Pi1)],
            &w,
            ProximityScope::IntraNet1,
        )
        .unwrap();
        assert_relative_eq!(s.matrix[(0, 1)], 1.0);
        assert_relative_eq!(s.matrix[(1, 0)], 1.0);
    }

    #[test]
    fn empty_network_gives_zero_matrix() {
        let net = follow_net(3, &[]);
        let ds = default_intra_diagrams();
        let w = DiagramWeights::uniform(&ds).unwrap();
        let s = intra_md_pro(&net, &ds, &w, ProximityScope::IntraNet1).unwrap();
        assert_eq!(s.matrix, DMatrix::zeros(3, 3));
    }

    #[test]
    fn intra_matrix_is_exactly_symmetric_with_zero_diagonal() {
        let net = follow_net(4, &[(0, 1), (1, 0), (0, 2), (2, 3), (3, 1)]);
        let ds = vec![
            DiagramId::Path(MetaPathId::Pi1),
            DiagramId::Path(MetaPathId::Pi3),
            DiagramId::PsiI1,
        ];
        let w = DiagramWeights::uniform(&ds).unwrap();
        let s = intra_md_pro(&net, &ds, &w, ProximityScope::IntraNet1)
            .unwrap()
            .matrix;
        assert_eq!(s, s.transpose());
        for i in 0..4 {
            assert_eq!(s[(i, i)], 0.0);
            for j in 0..4 {
                assert!((0.0..=1.0).contains(&s[(i, j)]));
            }
        }
    }

    #[test]
    fn weight_linearity_over_diagrams() {
        let net = follow_net(4, &[(0, 1), (1, 2), (2, 0), (3, 0), (1, 3)]);
        let d1 = DiagramId::Path(MetaPathId::Pi1);
        let d2 = DiagramId::Path(MetaPathId::Pi3);
        let mut map = BTreeMap::new();
        map.insert(d1, 0.3);
        map.insert(d2, 0.7);
        let w = DiagramWeights::new(map).unwrap();
        let combined = intra_md_pro(&net, &[d1, d2], &w, ProximityScope::IntraNet1)
            .unwrap()
            .matrix;
        let s1 = intra_diagram_score(&net, d1).unwrap();
        let s2 = intra_diagram_score(&net, d2).unwrap();
        let expect = s1 * 0.3 + s2 * 0.7;
        assert_relative_eq!(combined, expect, epsilon = 1e-14);
    }

    #[test]
    fn no_anchors_zeroes_anchor_dependent_inter_proximity() {
        let net = follow_net(2, &[(0, 1)]);
        let pair = AlignedPair::new(net.clone(), net, vec![]).unwrap();
        let ds = vec![DiagramId::Path(MetaPathId::Pa1)];
        let w = DiagramWeights::uniform(&ds).unwrap();
        let s = inter_md_pro(&pair, &ds, &w).unwrap();
        assert_eq!(s.matrix, DMatrix::zeros(2, 2));
    }

    #[test]
    fn weight_cover_mismatch_is_usage_error() {
        let net = follow_net(2, &[(0, 1)]);
        let w = DiagramWeights::uniform(&[DiagramId::Path(MetaPathId::Pi1)]).unwrap();
        let err = intra_md_pro(
            &net,
            &[DiagramId::Path(MetaPathId::Pi3)],
            &w,
            ProximityScope::IntraNet1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn export_tsv_writes_nonzero_triples() {
        let net = follow_net(3, &[(0, 1), (1, 0)]);
        let ds = [DiagramId::Path(MetaPathId::Pi1)];
        let w = DiagramWeights::uniform(&ds).unwrap();
        let s = intra_md_pro(&net, &ds, &w, ProximityScope::IntraNet1).unwrap();
        let mut buf = Vec::new();
        s.export_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "0\t1\t1\n1\t0\t1\n");
    }

    #[test]
    fn weights_validate_sum_and_sign() {
        let mut map = BTreeMap::new();
        map.insert(DiagramId::Path(MetaPathId::Pi1), 0.5);
        assert!(DiagramWeights::new(map.clone()).is_err());
        map.insert(DiagramId::Path(MetaPathId::Pi3), 0.5);
        assert!(DiagramWeights::new(map.clone()).is_ok());
        map.insert(DiagramId::Path(MetaPathId::Pi4), -0.1);
        assert!(DiagramWeights::new(map).is_err());
    }
}
