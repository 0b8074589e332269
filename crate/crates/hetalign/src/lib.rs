//! Two-stage alignment of attributed heterogeneous social networks.
//!
//! The pipeline identifies anchor links (accounts of the same person) between
//! two partially aligned networks in two stages:
//!
//! 1. **Synergistic partition** — both networks are split into `k` clusters by
//!    minimizing a joint objective: per-network normalized cut over meta-diagram
//!    proximity, plus a cross-network discrepancy penalty that pulls anchored
//!    users into corresponding clusters.
//! 2. **Parallel sub-network alignment** — cluster pairs are matched by M-Score
//!    and anchor links are inferred inside each matched pair independently, via
//!    alternating closed-form ridge regression and greedy one-to-one label
//!    selection. Candidate links outside matched pairs are pruned as negative.
//!
//! The crate also ships a stochastic-block-model synthetic generator and an
//! evaluation harness so the whole pipeline can be exercised end to end
//! without any external dataset.

pub mod alignment;
pub mod error;
pub mod graph;
pub mod matching;
pub mod meta;
pub mod partition;
pub mod pipeline;
pub mod proximity;
pub mod sparse;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{AlignedPair, HeterogeneousNetwork, SubNetwork};
pub use meta::{CountMatrix, DiagramId, MetaDiagramSpec, MetaPathId, MetaScope};
pub use proximity::{DiagramWeights, ProximityMatrix};
