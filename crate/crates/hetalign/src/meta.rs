//! Catalogued meta paths and meta diagrams, counted as sparse matrices.
//!
//! A meta path is a typed walk template between two users; its count matrix
//! holds the number of instances per user pair, computed as the product of the
//! relation adjacency matrices along the template (transposed where an arrow
//! reverses). A meta diagram composes several factor paths that must join the
//! same endpoint pair simultaneously; its count matrix is the elementwise
//! (Hadamard) product of the factor count matrices.
//!
//! Intra-network count matrices have their diagonal zeroed before use: a
//! user's proximity to itself carries no information for partitioning, and
//! zeroing the product diagonal is what turns walk counts into path counts
//! for templates like the follower-of-follower.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{AlignedPair, HeterogeneousNetwork};
use crate::sparse::CsrMatrix;

/// Sparse nonnegative matrix of meta path/diagram instance counts.
pub type CountMatrix = CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetaScope {
    Intra,
    Inter,
}

/// The twelve catalogued meta paths.
///
/// `Pa*` run between the users of two aligned networks (the anchor step uses
/// labeled anchors only); `Pi*` stay inside one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetaPathId {
    /// follow, anchor, follow back: common anchored followee.
    Pa1,
    /// inverse follow, anchor, follow: common anchored follower.
    Pa2,
    /// follow, anchor, follow: followee on one side, follower on the other.
    Pa3,
    /// inverse follow, anchor, inverse follow.
    Pa4,
    /// write, at, shared timestamp bucket, inverse at, inverse write.
    Pa5,
    /// write, checkin, shared location, inverse checkin, inverse write.
    Pa6,
    /// follow.
    Pi1,
    /// follower of follower (two hops).
    Pi2,
    /// common out-neighbor.
    Pi3,
    /// common in-neighbor.
    Pi4,
    /// posts sharing a timestamp bucket.
    Pi5,
    /// posts sharing a location checkin.
    Pi6,
}

impl MetaPathId {
    pub const ALL: [MetaPathId; 12] = [
        MetaPathId::Pa1,
        MetaPathId::Pa2,
        MetaPathId::Pa3,
        MetaPathId::Pa4,
        MetaPathId::Pa5,
        MetaPathId::Pa6,
        MetaPathId::Pi1,
        MetaPathId::Pi2,
        MetaPathId::Pi3,
        MetaPathId::Pi4,
        MetaPathId::Pi5,
        MetaPathId::Pi6,
    ];

    pub fn scope(self) -> MetaScope {
        match self {
            MetaPathId::Pa1
            | MetaPathId::Pa2
            | MetaPathId::Pa3
            | MetaPathId::Pa4
            | MetaPathId::Pa5
            | MetaPathId::Pa6 => MetaScope::Inter,
            _ => MetaScope::Intra,
        }
    }

    /// Social (follow/anchor based) versus attribute (location/timestamp) paths.
    pub fn is_social(self) -> bool {
        !matches!(
            self,
            MetaPathId::Pa5 | MetaPathId::Pa6 | MetaPathId::Pi5 | MetaPathId::Pi6
        )
    }

    /// Whether the path consumes the labeled anchor relation.
    pub fn uses_anchors(self) -> bool {
        matches!(
            self,
            MetaPathId::Pa1 | MetaPathId::Pa2 | MetaPathId::Pa3 | MetaPathId::Pa4
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MetaPathId::Pa1 => "PA1",
            MetaPathId::Pa2 => "PA2",
            MetaPathId::Pa3 => "PA3",
            MetaPathId::Pa4 => "PA4",
            MetaPathId::Pa5 => "PA5",
            MetaPathId::Pa6 => "PA6",
            MetaPathId::Pi1 => "PI1",
            MetaPathId::Pi2 => "PI2",
            MetaPathId::Pi3 => "PI3",
            MetaPathId::Pi4 => "PI4",
            MetaPathId::Pi5 => "PI5",
            MetaPathId::Pi6 => "PI6",
        }
    }
}

impl fmt::Display for MetaPathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A catalogued diagram: either a single path or one of the named compositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiagramId {
    Path(MetaPathId),
    /// PA1 x PA2: common anchored followee and follower.
    PsiA1,
    /// PA5 x PA6: shared timestamp and shared location.
    PsiA2,
    /// PA1 x PA5 x PA6.
    PsiA3,
    /// PI1 x PI1.
    PsiI1,
    /// PI5 x PI6.
    PsiI2,
    /// PI1 x PI5 x PI6.
    PsiI3,
}

impl DiagramId {
    pub fn name(self) -> &'static str {
        match self {
            DiagramId::Path(p) => p.name(),
            DiagramId::PsiA1 => "PSI_A1",
            DiagramId::PsiA2 => "PSI_A2",
            DiagramId::PsiA3 => "PSI_A3",
            DiagramId::PsiI1 => "PSI_I1",
            DiagramId::PsiI2 => "PSI_I2",
            DiagramId::PsiI3 => "PSI_I3",
        }
    }

    pub fn spec(self) -> MetaDiagramSpec {
        let factors = match self {
            DiagramId::Path(p) => vec![p],
            DiagramId::PsiA1 => vec![MetaPathId::Pa1, MetaPathId::Pa2],
            DiagramId::PsiA2 => vec![MetaPathId::Pa5, MetaPathId::Pa6],
            DiagramId::PsiA3 => vec![MetaPathId::Pa1, MetaPathId::Pa5, MetaPathId::Pa6],
            DiagramId::PsiI1 => vec![MetaPathId::Pi1, MetaPathId::Pi1],
            DiagramId::PsiI2 => vec![MetaPathId::Pi5, MetaPathId::Pi6],
            DiagramId::PsiI3 => vec![MetaPathId::Pi1, MetaPathId::Pi5, MetaPathId::Pi6],
        };
        let scope = factors[0].scope();
        MetaDiagramSpec { scope, factors }
    }

    pub fn scope(self) -> MetaScope {
        match self {
            DiagramId::Path(p) => p.scope(),
            DiagramId::PsiA1 | DiagramId::PsiA2 | DiagramId::PsiA3 => MetaScope::Inter,
            DiagramId::PsiI1 | DiagramId::PsiI2 | DiagramId::PsiI3 => MetaScope::Intra,
        }
    }

    pub fn uses_anchors(self) -> bool {
        self.spec().factors.iter().any(|p| p.uses_anchors())
    }
}

impl fmt::Display for DiagramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiagramId {
    type Err = Error;

    fn from_str(s: &str) -> Result<DiagramId> {
        for p in MetaPathId::ALL {
            if p.name() == s {
                return Ok(DiagramId::Path(p));
            }
        }
        match s {
            "PSI_A1" => Ok(DiagramId::PsiA1),
            "PSI_A2" => Ok(DiagramId::PsiA2),
            "PSI_A3" => Ok(DiagramId::PsiA3),
            "PSI_I1" => Ok(DiagramId::PsiI1),
            "PSI_I2" => Ok(DiagramId::PsiI2),
            "PSI_I3" => Ok(DiagramId::PsiI3),
            _ => Err(Error::Usage(format!(
                "unknown diagram '{s}' (expected PI1..PI6, PA1..PA6 or PSI_A1..PSI_I3)"
            ))),
        }
    }
}

/// A diagram as a validated factor list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaDiagramSpec {
    pub scope: MetaScope,
    pub factors: Vec<MetaPathId>,
}

impl MetaDiagramSpec {
    /// Checks scope consistency and that the factor multiset falls into one of
    /// the catalogued composition classes: a single path, social x social,
    /// attribute x attribute, social x attribute, social x attribute^2, or
    /// social^2 x attribute^2.
    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::Usage("diagram with no factors".into()));
        }
        if self.factors.iter().any(|f| f.scope() != self.scope) {
            return Err(Error::Usage(format!(
                "diagram factors {:?} do not all match scope {:?}",
                self.factors, self.scope
            )));
        }
        let social = self.factors.iter().filter(|f| f.is_social()).count();
        let attr = self.factors.len() - social;
        let ok = matches!(
            (social, attr),
            (1, 0) | (0, 1) | (2, 0) | (0, 2) | (1, 1) | (1, 2) | (2, 2)
        );
        if !ok {
            return Err(Error::Usage(format!(
                "factor multiset ({social} social, {attr} attribute) is not a catalogued composition class"
            )));
        }
        Ok(())
    }
}

/// Input selector for counting: one network for intra paths, an aligned pair
/// for inter paths.
#[derive(Clone, Copy)]
pub enum MetaInput<'a> {
    Network(&'a HeterogeneousNetwork),
    Pair(&'a AlignedPair),
}

/// Count instances of a catalogued meta path between every user pair.
///
/// Entry `(x, y)` is the number of template instances from user `x` to user
/// `y`. Intra matrices are square with zero diagonal; inter matrices are
/// `|U1| x |U2|` and the anchor step of PA1..PA4 uses labeled anchors only.
pub fn count_meta_path(input: MetaInput<'_>, path: MetaPathId) -> Result<CountMatrix> {
    match (input, path.scope()) {
        (MetaInput::Network(net), MetaScope::Intra) => count_intra(net, path),
        (MetaInput::Pair(pair), MetaScope::Inter) => count_inter(pair, path),
        (MetaInput::Network(_), MetaScope::Inter) => Err(Error::Usage(format!(
            "{path} is an inter-network path; pass an aligned pair"
        ))),
        (MetaInput::Pair(_), MetaScope::Intra) => Err(Error::Usage(format!(
            "{path} is an intra-network path; pass a single network"
        ))),
    }
}

fn count_intra(net: &HeterogeneousNetwork, path: MetaPathId) -> Result<CountMatrix> {
    let f = net.follow_adjacency();
    let m = match path {
        MetaPathId::Pi1 => f,
        MetaPathId::Pi2 => f.matmul(&f)?,
        MetaPathId::Pi3 => f.matmul(&f.transpose())?,
        MetaPathId::Pi4 => f.transpose().matmul(&f)?,
        MetaPathId::Pi5 => {
            let w = net.write_adjacency();
            let t = net.at_adjacency();
            w.matmul(&t)?.matmul(&t.transpose())?.matmul(&w.transpose())?
        }
        MetaPathId::Pi6 => {
            let w = net.write_adjacency();
            let c = net.checkin_adjacency();
            w.matmul(&c)?.matmul(&c.transpose())?.matmul(&w.transpose())?
        }
        _ => unreachable!("inter path routed to count_intra"),
    };
    Ok(m.without_diagonal())
}

fn count_inter(pair: &AlignedPair, path: MetaPathId) -> Result<CountMatrix> {
    let anchors = pair.anchor_matrix();
    let f1 = pair.net1.follow_adjacency();
    let f2 = pair.net2.follow_adjacency();
    let m = match path {
        MetaPathId::Pa1 => f1.matmul(&anchors)?.matmul(&f2.transpose())?,
        MetaPathId::Pa2 => f1.transpose().matmul(&anchors)?.matmul(&f2)?,
        MetaPathId::Pa3 => f1.matmul(&anchors)?.matmul(&f2)?,
        MetaPathId::Pa4 => f1
            .transpose()
            .matmul(&anchors)?
            .matmul(&f2.transpose())?,
        MetaPathId::Pa5 => {
            let chain = pair
                .net1
                .at_adjacency()
                .matmul(&pair.shared_timestamp_matrix())?
                .matmul(&pair.net2.at_adjacency().transpose())?;
            pair.net1
                .write_adjacency()
                .matmul(&chain)?
                .matmul(&pair.net2.write_adjacency().transpose())?
        }
        MetaPathId::Pa6 => {
            let chain = pair
                .net1
                .checkin_adjacency()
                .matmul(&pair.shared_location_matrix())?
                .matmul(&pair.net2.checkin_adjacency().transpose())?;
            pair.net1
                .write_adjacency()
                .matmul(&chain)?
                .matmul(&pair.net2.write_adjacency().transpose())?
        }
        _ => unreachable!("intra path routed to count_inter"),
    };
    Ok(m)
}

/// Hadamard-compose factor count matrices into a diagram count matrix.
///
/// Entry `(x, y)` counts the combinations of factor-path instances that share
/// the endpoints `x, y`; a singleton factor list is the identity.
pub fn compose_diagram(factor_counts: &[CountMatrix]) -> Result<CountMatrix> {
    let first = factor_counts
        .first()
        .ok_or_else(|| Error::Usage("compose_diagram with no factors".into()))?;
    let mut acc = first.clone();
    for m in &factor_counts[1..] {
        acc = acc.hadamard(m)?;
    }
    Ok(acc)
}

/// Count a named diagram: count each factor path, then compose.
pub fn count_diagram(input: MetaInput<'_>, diagram: DiagramId) -> Result<CountMatrix> {
    let spec = diagram.spec();
    spec.validate()?;
    let factors = spec
        .factors
        .iter()
        .map(|&p| count_meta_path(input, p))
        .collect::<Result<Vec<_>>>()?;
    compose_diagram(&factors)
}
