//! Data model and TSV ingestion for attributed heterogeneous social networks.
//!
//! A network has two node types (users, posts), two attribute types (locations,
//! timestamp buckets) and four typed directed relations:
//!
//! ```text
//! follow:  user -> user        write: user -> post
//! checkin: post -> location    at:    post -> timestamp
//! ```
//!
//! Identifiers are re-indexed densely in file order; user `i` of a loaded
//! network corresponds to the i-th `user` row of its node file, and every
//! downstream matrix uses that indexing. Networks are immutable after
//! construction and safe to share across threads.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    User,
    Post,
    Location,
    Timestamp,
}

impl NodeKind {
    fn parse(s: &str) -> Option<NodeKind> {
        match s {
            "user" => Some(NodeKind::User),
            "post" => Some(NodeKind::Post),
            "location" => Some(NodeKind::Location),
            "timestamp" => Some(NodeKind::Timestamp),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            NodeKind::User => "user",
            NodeKind::Post => "post",
            NodeKind::Location => "location",
            NodeKind::Timestamp => "timestamp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Follow,
    Write,
    Checkin,
    At,
}

impl Relation {
    fn parse(s: &str) -> Option<Relation> {
        match s {
            "follow" => Some(Relation::Follow),
            "write" => Some(Relation::Write),
            "checkin" => Some(Relation::Checkin),
            "at" => Some(Relation::At),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::Follow => "follow",
            Relation::Write => "write",
            Relation::Checkin => "checkin",
            Relation::At => "at",
        }
    }

    /// (source kind, destination kind) of the relation schema.
    pub fn endpoints(self) -> (NodeKind, NodeKind) {
        match self {
            Relation::Follow => (NodeKind::User, NodeKind::User),
            Relation::Write => (NodeKind::User, NodeKind::Post),
            Relation::Checkin => (NodeKind::Post, NodeKind::Location),
            Relation::At => (NodeKind::Post, NodeKind::Timestamp),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ingestion knobs. Numeric timestamp identifiers (epoch seconds) are
/// discretized into buckets of `timestamp_bucket_secs`; non-numeric
/// identifiers are kept as opaque categorical tokens.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub timestamp_bucket_secs: u64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            timestamp_bucket_secs: 3600,
        }
    }
}

fn bucket_timestamp(id: &str, width: u64) -> String {
    match id.parse::<u64>() {
        Ok(t) if width > 0 => (t - t % width).to_string(),
        _ => id.to_string(),
    }
}

/// An attributed heterogeneous social network.
#[derive(Debug, Clone)]
pub struct HeterogeneousNetwork {
    user_ids: Vec<String>,
    post_ids: Vec<String>,
    location_ids: Vec<String>,
    timestamp_ids: Vec<String>,
    follow_edges: Vec<(usize, usize)>,
    write_edges: Vec<(usize, usize)>,
    checkin_edges: Vec<(usize, usize)>,
    at_edges: Vec<(usize, usize)>,
    user_index: HashMap<String, usize>,
}

impl HeterogeneousNetwork {
    /// Assemble and validate a network from identifier lists and edges given
    /// as identifier pairs. Duplicate edges are deduplicated with a warning;
    /// dangling endpoints and duplicate node identifiers are rejected.
    pub fn new(
        user_ids: Vec<String>,
        post_ids: Vec<String>,
        location_ids: Vec<String>,
        timestamp_ids: Vec<String>,
        edges: Vec<(Relation, String, String)>,
    ) -> Result<Self> {
        let user_index = index_of(&user_ids, "user")?;
        let post_index = index_of(&post_ids, "post")?;
        let location_index = index_of(&location_ids, "location")?;
        let timestamp_index = index_of(&timestamp_ids, "timestamp")?;

        let mut net = HeterogeneousNetwork {
            user_ids,
            post_ids,
            location_ids,
            timestamp_ids,
            follow_edges: Vec::new(),
            write_edges: Vec::new(),
            checkin_edges: Vec::new(),
            at_edges: Vec::new(),
            user_index,
        };

        let mut seen: HashSet<(Relation, usize, usize)> = HashSet::new();
        let mut dupes = 0usize;
        for (rel, src_id, dst_id) in edges {
            let (src_kind, dst_kind) = rel.endpoints();
            let resolve = |kind: NodeKind, id: &str| -> Result<usize> {
                let map = match kind {
                    NodeKind::User => &net.user_index,
                    NodeKind::Post => &post_index,
                    NodeKind::Location => &location_index,
                    NodeKind::Timestamp => &timestamp_index,
                };
                map.get(id).copied().ok_or_else(|| {
                    Error::Validation(format!(
                        "edge {rel} {src_id} -> {dst_id} references undeclared {} '{id}'",
                        kind.name()
                    ))
                })
            };
            let src = resolve(src_kind, &src_id)?;
            let dst = resolve(dst_kind, &dst_id)?;
            if !seen.insert((rel, src, dst)) {
                dupes += 1;
                continue;
            }
            match rel {
                Relation::Follow => net.follow_edges.push((src, dst)),
                Relation::Write => net.write_edges.push((src, dst)),
                Relation::Checkin => net.checkin_edges.push((src, dst)),
                Relation::At => net.at_edges.push((src, dst)),
            }
        }
        if dupes > 0 {
            log::warn!("deduplicated {dupes} repeated edges");
        }
        Ok(net)
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_posts(&self) -> usize {
        self.post_ids.len()
    }

    pub fn n_locations(&self) -> usize {
        self.location_ids.len()
    }

    pub fn n_timestamps(&self) -> usize {
        self.timestamp_ids.len()
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn location_ids(&self) -> &[String] {
        &self.location_ids
    }

    pub fn timestamp_ids(&self) -> &[String] {
        &self.timestamp_ids
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.user_index.get(id).copied()
    }

    pub fn follow_edges(&self) -> &[(usize, usize)] {
        &self.follow_edges
    }

    pub fn write_edges(&self) -> &[(usize, usize)] {
        &self.write_edges
    }

    pub fn checkin_edges(&self) -> &[(usize, usize)] {
        &self.checkin_edges
    }

    pub fn at_edges(&self) -> &[(usize, usize)] {
        &self.at_edges
    }

    /// user x user follow adjacency.
    pub fn follow_adjacency(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.n_users(),
            self.n_users(),
            self.follow_edges.iter().map(|&(a, b)| (a, b, 1.0)),
        )
    }

    /// user x post write adjacency.
    pub fn write_adjacency(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.n_users(),
            self.n_posts(),
            self.write_edges.iter().map(|&(a, b)| (a, b, 1.0)),
        )
    }

    /// post x location checkin adjacency.
    pub fn checkin_adjacency(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.n_posts(),
            self.n_locations(),
            self.checkin_edges.iter().map(|&(a, b)| (a, b, 1.0)),
        )
    }

    /// post x timestamp adjacency.
    pub fn at_adjacency(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.n_posts(),
            self.n_timestamps(),
            self.at_edges.iter().map(|&(a, b)| (a, b, 1.0)),
        )
    }
}

fn index_of(ids: &[String], kind: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(Error::Validation(format!("duplicate {kind} id '{id}'")));
        }
    }
    Ok(map)
}

/// Load a network from a node TSV (`kind<TAB>id`) and an edge TSV
/// (`relation<TAB>src_id<TAB>dst_id`) with default ingestion options.
pub fn load_network(node_file: &Path, edge_file: &Path) -> Result<HeterogeneousNetwork> {
    load_network_with(node_file, edge_file, &LoadOptions::default())
}

pub fn load_network_with(
    node_file: &Path,
    edge_file: &Path,
    opts: &LoadOptions,
) -> Result<HeterogeneousNetwork> {
    let mut users = Vec::new();
    let mut posts = Vec::new();
    let mut locations = Vec::new();
    let mut timestamps = Vec::new();
    let mut seen_ts = HashSet::new();

    for_each_line(node_file, |line_no, line| {
        let mut cols = line.split('\t');
        let (kind, id) = match (cols.next(), cols.next(), cols.next()) {
            (Some(k), Some(id), None) => (k, id),
            _ => {
                return Err(parse_err(node_file, line_no, "expected `kind<TAB>id`"));
            }
        };
        let kind = NodeKind::parse(kind)
            .ok_or_else(|| parse_err(node_file, line_no, &format!("unknown node kind '{kind}'")))?;
        match kind {
            NodeKind::User => users.push(id.to_string()),
            NodeKind::Post => posts.push(id.to_string()),
            NodeKind::Location => locations.push(id.to_string()),
            NodeKind::Timestamp => {
                // Bucketing may merge distinct raw timestamps into one node.
                let bucket = bucket_timestamp(id, opts.timestamp_bucket_secs);
                if seen_ts.insert(bucket.clone()) {
                    timestamps.push(bucket);
                }
            }
        }
        Ok(())
    })?;

    let mut edges = Vec::new();
    for_each_line(edge_file, |line_no, line| {
        let mut cols = line.split('\t');
        let (rel, src, dst) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
            (Some(r), Some(s), Some(d), None) => (r, s, d),
            _ => {
                return Err(parse_err(
                    edge_file,
                    line_no,
                    "expected `relation<TAB>src_id<TAB>dst_id`",
                ));
            }
        };
        let rel = Relation::parse(rel)
            .ok_or_else(|| parse_err(edge_file, line_no, &format!("unknown relation '{rel}'")))?;
        let dst = if rel == Relation::At {
            bucket_timestamp(dst, opts.timestamp_bucket_secs)
        } else {
            dst.to_string()
        };
        edges.push((rel, src.to_string(), dst));
        Ok(())
    })?;

    HeterogeneousNetwork::new(users, posts, locations, timestamps, edges)
}

/// Write a network back out in the node/edge TSV formats accepted by
/// [`load_network`]; loading the result reproduces the same typed edge multiset.
pub fn write_network(
    net: &HeterogeneousNetwork,
    node_file: &Path,
    edge_file: &Path,
) -> Result<()> {
    let mut nodes = BufWriter::new(File::create(node_file)?);
    for id in &net.user_ids {
        writeln!(nodes, "user\t{id}")?;
    }
    for id in &net.post_ids {
        writeln!(nodes, "post\t{id}")?;
    }
    for id in &net.location_ids {
        writeln!(nodes, "location\t{id}")?;
    }
    for id in &net.timestamp_ids {
        writeln!(nodes, "timestamp\t{id}")?;
    }
    nodes.flush()?;

    let mut edges = BufWriter::new(File::create(edge_file)?);
    for &(a, b) in &net.follow_edges {
        writeln!(edges, "follow\t{}\t{}", net.user_ids[a], net.user_ids[b])?;
    }
    for &(a, b) in &net.write_edges {
        writeln!(edges, "write\t{}\t{}", net.user_ids[a], net.post_ids[b])?;
    }
    for &(a, b) in &net.checkin_edges {
        writeln!(
            edges,
            "checkin\t{}\t{}",
            net.post_ids[a], net.location_ids[b]
        )?;
    }
    for &(a, b) in &net.at_edges {
        writeln!(edges, "at\t{}\t{}", net.post_ids[a], net.timestamp_ids[b])?;
    }
    edges.flush()?;
    Ok(())
}

fn parse_err(path: &Path, line: usize, msg: &str) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.to_string(),
    }
}

fn for_each_line(
    path: &Path,
    mut f: impl FnMut(usize, &str) -> Result<()>,
) -> Result<()> {
    let reader = BufReader::new(File::open(path)?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        f(i + 1, trimmed)?;
    }
    Ok(())
}

/// Two networks plus the labeled (known positive) anchor links between them.
///
/// Anchor links are undirected; they are stored as ordered pairs
/// `(user index in net1, user index in net2)`.
#[derive(Debug, Clone)]
pub struct AlignedPair {
    pub net1: HeterogeneousNetwork,
    pub net2: HeterogeneousNetwork,
    labeled_anchors: Vec<(usize, usize)>,
}

impl AlignedPair {
    /// Validates ranges and the one-to-one property of the labeled set.
    /// Exact duplicate anchor rows are deduplicated with a warning.
    pub fn new(
        net1: HeterogeneousNetwork,
        net2: HeterogeneousNetwork,
        anchors: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut left = HashSet::new();
        let mut right = HashSet::new();
        let mut labeled = Vec::with_capacity(anchors.len());
        let mut dupes = 0usize;
        for (a, b) in anchors {
            if a >= net1.n_users() || b >= net2.n_users() {
                return Err(Error::Validation(format!(
                    "anchor ({a},{b}) out of range ({} x {} users)",
                    net1.n_users(),
                    net2.n_users()
                )));
            }
            if !seen.insert((a, b)) {
                dupes += 1;
                continue;
            }
            if !left.insert(a) {
                return Err(Error::Validation(format!(
                    "one-to-one violation: net1 user {a} appears in two anchors"
                )));
            }
            if !right.insert(b) {
                return Err(Error::Validation(format!(
                    "one-to-one violation: net2 user {b} appears in two anchors"
                )));
            }
            labeled.push((a, b));
        }
        if dupes > 0 {
            log::warn!("deduplicated {dupes} repeated anchor rows");
        }
        Ok(AlignedPair {
            net1,
            net2,
            labeled_anchors: labeled,
        })
    }

    pub fn labeled_anchors(&self) -> &[(usize, usize)] {
        &self.labeled_anchors
    }

    /// Replace the labeled set (validated); used to restrict features to
    /// training anchors or to leave one anchor out.
    pub fn with_anchors(&self, anchors: Vec<(usize, usize)>) -> Result<AlignedPair> {
        AlignedPair::new(self.net1.clone(), self.net2.clone(), anchors)
    }

    /// |U1| x |U2| binary matrix of the labeled anchors.
    pub fn anchor_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.net1.n_users(),
            self.net2.n_users(),
            self.labeled_anchors.iter().map(|&(a, b)| (a, b, 1.0)),
        )
    }

    /// |L1| x |L2| identity matching of location tokens shared by both networks.
    pub fn shared_location_matrix(&self) -> CsrMatrix {
        shared_token_matrix(self.net1.location_ids(), self.net2.location_ids())
    }

    /// |T1| x |T2| identity matching of timestamp buckets shared by both networks.
    pub fn shared_timestamp_matrix(&self) -> CsrMatrix {
        shared_token_matrix(self.net1.timestamp_ids(), self.net2.timestamp_ids())
    }
}

fn shared_token_matrix(a: &[String], b: &[String]) -> CsrMatrix {
    let index: HashMap<&str, usize> = b.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    CsrMatrix::from_triplets(
        a.len(),
        b.len(),
        a.iter()
            .enumerate()
            .filter_map(|(i, s)| index.get(s.as_str()).map(|&j| (i, j, 1.0))),
    )
}

/// Load an anchor TSV (`user_id_net1<TAB>user_id_net2`, identifiers as declared
/// in each network's node file) and assemble a validated [`AlignedPair`].
pub fn load_aligned_pair(
    net1: HeterogeneousNetwork,
    net2: HeterogeneousNetwork,
    anchor_file: &Path,
) -> Result<AlignedPair> {
    let anchors = read_anchor_file(anchor_file, &net1, &net2)?;
    AlignedPair::new(net1, net2, anchors)
}

/// Parse an anchor TSV against two existing networks, returning index pairs.
pub fn read_anchor_file(
    path: &Path,
    net1: &HeterogeneousNetwork,
    net2: &HeterogeneousNetwork,
) -> Result<Vec<(usize, usize)>> {
    let mut anchors = Vec::new();
    for_each_line(path, |line_no, line| {
        let mut cols = line.split('\t');
        let (a, b) = match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(parse_err(
                    path,
                    line_no,
                    "expected `user_id_net1<TAB>user_id_net2`",
                ));
            }
        };
        let ai = net1.user_index(a).ok_or_else(|| {
            Error::Validation(format!("anchor references unknown net1 user '{a}'"))
        })?;
        let bi = net2.user_index(b).ok_or_else(|| {
            Error::Validation(format!("anchor references unknown net2 user '{b}'"))
        })?;
        anchors.push((ai, bi));
        Ok(())
    })?;
    Ok(anchors)
}

/// A cluster's induced sub-network together with the map from local user
/// indices back to the parent network's user indices.
#[derive(Debug, Clone)]
pub struct SubNetwork {
    pub network: HeterogeneousNetwork,
    /// `users_global[local] = global user index in the parent network`.
    pub users_global: Vec<usize>,
}

impl SubNetwork {
    pub fn n_users(&self) -> usize {
        self.users_global.len()
    }
}

/// Extract the sub-network induced by a set of users: the users themselves,
/// every post they wrote, those posts' attributes, and all edges among the
/// retained nodes.
pub fn induced_subnetwork(net: &HeterogeneousNetwork, users: &[usize]) -> SubNetwork {
    let mut users_global: Vec<usize> = users.to_vec();
    users_global.sort_unstable();
    users_global.dedup();
    let user_local: HashMap<usize, usize> = users_global
        .iter()
        .enumerate()
        .map(|(l, &g)| (g, l))
        .collect();

    let mut post_set: Vec<usize> = net
        .write_edges()
        .iter()
        .filter(|(u, _)| user_local.contains_key(u))
        .map(|&(_, p)| p)
        .collect();
    post_set.sort_unstable();
    post_set.dedup();
    let post_local: HashMap<usize, usize> = post_set
        .iter()
        .enumerate()
        .map(|(l, &g)| (g, l))
        .collect();

    let mut loc_set: Vec<usize> = net
        .checkin_edges()
        .iter()
        .filter(|(p, _)| post_local.contains_key(p))
        .map(|&(_, l)| l)
        .collect();
    loc_set.sort_unstable();
    loc_set.dedup();
    let loc_local: HashMap<usize, usize> =
        loc_set.iter().enumerate().map(|(l, &g)| (g, l)).collect();

    let mut ts_set: Vec<usize> = net
        .at_edges()
        .iter()
        .filter(|(p, _)| post_local.contains_key(p))
        .map(|&(_, t)| t)
        .collect();
    ts_set.sort_unstable();
    ts_set.dedup();
    let ts_local: HashMap<usize, usize> =
        ts_set.iter().enumerate().map(|(l, &g)| (g, l)).collect();

    let user_ids = users_global
        .iter()
        .map(|&g| net.user_ids[g].clone())
        .collect();
    let post_ids = post_set.iter().map(|&g| net.post_ids[g].clone()).collect();
    let location_ids = loc_set
        .iter()
        .map(|&g| net.location_ids[g].clone())
        .collect();
    let timestamp_ids = ts_set
        .iter()
        .map(|&g| net.timestamp_ids[g].clone())
        .collect();

    let mut network = HeterogeneousNetwork {
        user_ids,
        post_ids,
        location_ids,
        timestamp_ids,
        follow_edges: Vec::new(),
        write_edges: Vec::new(),
        checkin_edges: Vec::new(),
        at_edges: Vec::new(),
        user_index: HashMap::new(),
    };
    network.user_index = network
        .user_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();

    for &(a, b) in net.follow_edges() {
        if let (Some(&la), Some(&lb)) = (user_local.get(&a), user_local.get(&b)) {
            network.follow_edges.push((la, lb));
        }
    }
    for &(u, p) in net.write_edges() {
        if let (Some(&lu), Some(&lp)) = (user_local.get(&u), post_local.get(&p)) {
            network.write_edges.push((lu, lp));
        }
    }
    for &(p, l) in net.checkin_edges() {
        if let (Some(&lp), Some(&ll)) = (post_local.get(&p), loc_local.get(&l)) {
            network.checkin_edges.push((lp, ll));
        }
    }
    for &(p, t) in net.at_edges() {
        if let (Some(&lp), Some(&lt)) = (post_local.get(&p), ts_local.get(&t)) {
            network.at_edges.push((lp, lt));
        }
    }

    SubNetwork {
        network,
        users_global,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::NamedTempFile;

    fn tmp(content: &str) -> NamedTempFile {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_basic_network() {
        let nodes = tmp("user\t0\nuser\t1\nuser\t2\n");
        let edges = tmp("follow\t0\t1\nfollow\t1\t2\n");
        let net = load_network(nodes.path(), edges.path()).unwrap();
        assert_eq!(net.n_users(), 3);
        assert_eq!(net.follow_edges(), &[(0, 1), (1, 2)]);
        // Index stability: user i is the i-th user row of the node file.
        assert_eq!(net.user_ids(), &["0", "1", "2"]);
        assert_eq!(net.user_index("2"), Some(2));
    }

    #[test]
    fn dangling_endpoint_is_validation_error() {
        let nodes = tmp("user\t0\nuser\t1\n");
        let edges = tmp("follow\t0\t9\n");
        let err = load_network(nodes.path(), edges.path()).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("'9'"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_edge_file_gives_edgeless_network() {
        let nodes = tmp("user\ta\nuser\tb\n");
        let edges = tmp("");
        let net = load_network(nodes.path(), edges.path()).unwrap();
        assert_eq!(net.n_users(), 2);
        assert!(net.follow_edges().is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let nodes = tmp("user\t0\nbogus line without tab\n");
        let edges = tmp("");
        let err = load_network(nodes.path(), edges.path()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_edges_are_deduplicated() {
        let nodes = tmp("user\t0\nuser\t1\n");
        let edges = tmp("follow\t0\t1\nfollow\t0\t1\n");
        let net = load_network(nodes.path(), edges.path()).unwrap();
        assert_eq!(net.follow_edges().len(), 1);
    }

    #[test]
    fn numeric_timestamps_are_bucketed() {
        let nodes = tmp("user\tu\npost\tp\ntimestamp\t3600\ntimestamp\t3700\ntimestamp\t7300\n");
        let edges = tmp("write\tu\tp\nat\tp\t3700\n");
        let net = load_network(nodes.path(), edges.path()).unwrap();
        // 3600 and 3700 fall in the same 1-hour bucket.
        assert_eq!(net.n_timestamps(), 2);
        assert_eq!(net.timestamp_ids(), &["3600".to_string(), "7200".to_string()]);
        assert_eq!(net.at_edges(), &[(0, 0)]);
    }

    #[test]
    fn round_trip_preserves_edge_multiset() {
        let nodes = tmp(
            "user\ta\nuser\tb\npost\tp1\npost\tp2\nlocation\tL\ntimestamp\tT\n",
        );
        let edges = tmp(
            "follow\ta\tb\nwrite\ta\tp1\nwrite\tb\tp2\ncheckin\tp1\tL\nat\tp2\tT\n",
        );
        let net = load_network(nodes.path(), edges.path()).unwrap();
        let out_nodes = NamedTempFile::new().unwrap();
        let out_edges = NamedTempFile::new().unwrap();
        write_network(&net, out_nodes.path(), out_edges.path()).unwrap();
        let net2 = load_network(out_nodes.path(), out_edges.path()).unwrap();
        assert_eq!(net.follow_edges(), net2.follow_edges());
        assert_eq!(net.write_edges(), net2.write_edges());
        assert_eq!(net.checkin_edges(), net2.checkin_edges());
        assert_eq!(net.at_edges(), net2.at_edges());
    }

    fn three_user_net() -> HeterogeneousNetwork {
        let nodes = tmp("user\t0\nuser\t1\nuser\t2\n");
        let edges = tmp("");
        load_network(nodes.path(), edges.path()).unwrap()
    }

    #[test]
    fn aligned_pair_accepts_one_to_one_anchors() {
        let anchors = tmp("0\t0\n1\t1\n");
        let pair = load_aligned_pair(three_user_net(), three_user_net(), anchors.path()).unwrap();
        assert_eq!(pair.labeled_anchors(), &[(0, 0), (1, 1)]);
    }

    #[test]
    fn aligned_pair_rejects_repeated_endpoint() {
        let anchors = tmp("0\t0\n0\t1\n");
        let err =
            load_aligned_pair(three_user_net(), three_user_net(), anchors.path()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn empty_anchor_file_is_fine() {
        let anchors = tmp("");
        let pair = load_aligned_pair(three_user_net(), three_user_net(), anchors.path()).unwrap();
        assert!(pair.labeled_anchors().is_empty());
    }

    #[test]
    fn induced_subnetwork_keeps_incident_posts_and_attributes() {
        let nodes = tmp(
            "user\ta\nuser\tb\nuser\tc\npost\tp1\npost\tp2\nlocation\tL1\nlocation\tL2\ntimestamp\tT1\n",
        );
        let edges = tmp(
            "follow\ta\tb\nfollow\tb\tc\nwrite\ta\tp1\nwrite\tc\tp2\ncheckin\tp1\tL1\ncheckin\tp2\tL2\nat\tp1\tT1\n",
        );
        let net = load_network(nodes.path(), edges.path()).unwrap();
        let sub = induced_subnetwork(&net, &[0, 1]);
        assert_eq!(sub.users_global, vec![0, 1]);
        assert_eq!(sub.network.n_users(), 2);
        assert_eq!(sub.network.n_posts(), 1); // p1 only
        assert_eq!(sub.network.n_locations(), 1); // L1 only
        assert_eq!(sub.network.n_timestamps(), 1);
        assert_eq!(sub.network.follow_edges(), &[(0, 1)]);
    }
}
