//! Directed graphs with dense per-node features, plus the on-disk formats.
//!
//! Edge lists are text, one `src dst` pair per line. Feature files are raw
//! row-major little-endian `f32` blobs with no header; the caller supplies the
//! node count and dimension.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
}

impl Edge {
    pub const fn new(src: NodeId, dst: NodeId) -> Self {
        Self { src, dst }
    }
}

impl From<(NodeId, NodeId)> for Edge {
    fn from((src, dst): (NodeId, NodeId)) -> Self {
        Self { src, dst }
    }
}

/// Immutable directed graph. The in-neighbor index is a CSR over destinations
/// that keeps sources in edge-list order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
}

impl Graph {
    /// Validates node ranges and rejects duplicate edges.
    pub fn new(num_nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        if num_nodes > NodeId::MAX as usize {
            return Err(Error::Parameter(format!(
                "{num_nodes} nodes exceed the 32-bit node id space"
            )));
        }
        for e in &edges {
            for node in [e.src, e.dst] {
                if node as usize >= num_nodes {
                    return Err(Error::NodeRange {
                        node: node.into(),
                        num_nodes,
                    });
                }
            }
        }
        if let Some(dup) = first_duplicate(&edges) {
            return Err(Error::Validation(format!(
                "duplicate edge ({}, {})",
                dup.src, dup.dst
            )));
        }

        let mut in_offsets = vec![0usize; num_nodes + 1];
        for e in &edges {
            in_offsets[e.dst as usize + 1] += 1;
        }
        for v in 0..num_nodes {
            in_offsets[v + 1] += in_offsets[v];
        }
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0; edges.len()];
        for e in &edges {
            let slot = &mut cursor[e.dst as usize];
            in_sources[*slot] = e.src;
            *slot += 1;
        }

        Ok(Self {
            num_nodes,
            edges,
            in_offsets,
            in_sources,
        })
    }

    pub fn from_pairs(num_nodes: usize, pairs: &[(NodeId, NodeId)]) -> Result<Self> {
        Self::new(num_nodes, pairs.iter().copied().map(Edge::from).collect())
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn in_neighbors(&self, v: NodeId) -> Result<&[NodeId]> {
        self.check_node(v)?;
        let v = v as usize;
        Ok(&self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]])
    }

    pub fn in_degree(&self, v: NodeId) -> Result<usize> {
        Ok(self.in_neighbors(v)?.len())
    }

    /// In-degrees of all nodes, indexed by node id.
    pub fn in_degrees(&self) -> Vec<usize> {
        self.in_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.num_nodes {
            Ok(())
        } else {
            Err(Error::NodeRange {
                node: v.into(),
                num_nodes: self.num_nodes,
            })
        }
    }
}

fn first_duplicate(edges: &[Edge]) -> Option<Edge> {
    let mut sorted = edges.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
}

/// Counts describing a loaded dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub feature_dim: usize,
}

impl DatasetMeta {
    pub fn of(name: impl Into<String>, graph: &Graph, features: &FeatureMatrix) -> Result<Self> {
        if features.num_nodes() != graph.num_nodes() {
            return Err(Error::Validation(format!(
                "feature matrix has {} rows but the graph has {} nodes",
                features.num_nodes(),
                graph.num_nodes()
            )));
        }
        Ok(Self {
            name: name.into(),
            num_nodes: graph.num_nodes(),
            num_edges: graph.num_edges(),
            feature_dim: features.dim(),
        })
    }

    /// Well-known citation datasets; the edge counts are directed (both
    /// directions of every undirected link).
    pub fn cora() -> Self {
        Self::known("cora", 2708, 10556, 1433)
    }

    pub fn citeseer() -> Self {
        Self::known("citeseer", 3327, 9104, 3703)
    }

    pub fn pubmed() -> Self {
        Self::known("pubmed", 19717, 88648, 500)
    }

    fn known(name: &str, num_nodes: usize, num_edges: usize, feature_dim: usize) -> Self {
        Self {
            name: name.to_string(),
            num_nodes,
            num_edges,
            feature_dim,
        }
    }

    pub fn check(&self, graph: &Graph, features: &FeatureMatrix) -> Result<()> {
        let loaded = Self::of(self.name.clone(), graph, features)?;
        if &loaded != self {
            return Err(Error::Validation(format!(
                "{}: expected {} nodes / {} edges / dim {}, loaded {} / {} / {}",
                self.name,
                self.num_nodes,
                self.num_edges,
                self.feature_dim,
                loaded.num_nodes,
                loaded.num_edges,
                loaded.feature_dim
            )));
        }
        Ok(())
    }
}

pub fn load_graph(path: impl AsRef<Path>, num_nodes: usize) -> Result<Graph> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let mut fields = trimmed.split_whitespace();
        let mut next_id = |what: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(format!("missing {what} node id")))?;
            tok.parse::<u64>()
                .map_err(|_| parse_err(format!("`{tok}` is not a non-negative integer")))
        };
        let src = next_id("source")?;
        let dst = next_id("destination")?;
        if let Some(extra) = fields.next() {
            return Err(parse_err(format!("unexpected trailing field `{extra}`")));
        }
        for node in [src, dst] {
            if node >= num_nodes as u64 {
                return Err(Error::NodeRange { node, num_nodes });
            }
        }
        edges.push(Edge::new(src as NodeId, dst as NodeId));
    }
    Graph::new(num_nodes, edges)
}

pub fn write_graph(path: impl AsRef<Path>, graph: &Graph) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in graph.edges() {
        writeln!(w, "{} {}", e.src, e.dst).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn decode_features(bytes: &[u8], num_nodes: usize, dim: usize) -> Result<FeatureMatrix> {
    let expected = num_nodes * dim * 4;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "feature blob is {} bytes, expected {num_nodes} x {dim} x 4 = {expected}",
            bytes.len()
        )));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Validation(format!(
            "non-finite feature value at node {}, dim {}",
            i / dim.max(1),
            i % dim.max(1)
        )));
    }
    FeatureMatrix::from_vec(num_nodes, dim, values)
}

pub fn load_features(path: impl AsRef<Path>, num_nodes: usize, dim: usize) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(&bytes, num_nodes, dim)
}

pub fn write_features(path: impl AsRef<Path>, features: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, features.to_le_bytes()).map_err(|e| Error::io(path, e))
}

/// Directed Erdős–Rényi graph without self-loops: each ordered pair is an
/// edge with probability `avg_degree / (num_nodes - 1)`. Uses geometric
/// skipping, so cost is linear in the number of edges generated.
pub fn erdos_renyi(num_nodes: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if !avg_degree.is_finite() || avg_degree < 0.0 {
        return Err(Error::Parameter(format!("average degree {avg_degree}")));
    }
    if num_nodes < 2 || avg_degree == 0.0 {
        return Graph::new(num_nodes, Vec::new());
    }
    let p = (avg_degree / (num_nodes - 1) as f64).min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = (num_nodes * (num_nodes - 1)) as u64;
    let mut edges = Vec::new();
    if p >= 1.0 {
        for u in 0..num_nodes {
            for v in 0..num_nodes {
                if u != v {
                    edges.push(Edge::new(u as NodeId, v as NodeId));
                }
            }
        }
    } else {
        let log_q = (1.0 - p).ln();
        let mut slot: i64 = -1;
        loop {
            let r: f64 = rng.gen();
            let skip = ((1.0 - r).ln() / log_q).floor() as i64;
            slot += 1 + skip;
            if slot as u64 >= slots {
                break;
            }
            // slot enumerates ordered pairs with u != v
            let u = slot as u64 / (num_nodes as u64 - 1);
            let mut v = slot as u64 % (num_nodes as u64 - 1);
            if v >= u {
                v += 1;
            }
            edges.push(Edge::new(u as NodeId, v as NodeId));
        }
    }
    Graph::new(num_nodes, edges)
}

/// Uniform features in `[-1, 1)`.
pub fn random_features(num_nodes: usize, dim: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..num_nodes * dim)
        .map(|_| rng.gen_range(-1.0f32..1.0))
        .collect();
    FeatureMatrix::from_vec(num_nodes, dim, values).expect("sized above")
}

/// How raw edge lists are normalized before loading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrepOptions {
    /// Emit both directions of every input pair.
    pub symmetrize: bool,
    /// Keep `(v, v)` pairs instead of dropping them.
    pub keep_self_loops: bool,
}

/// Normalizes a raw pair list: optional symmetrization, self-loop handling,
/// then de-duplication keeping first occurrences in input order.
pub fn prepare_edges(pairs: &[(NodeId, NodeId)], opts: PrepOptions) -> Vec<Edge> {
    let mut seen = std::collections::HashSet::with_capacity(pairs.len() * 2);
    let mut out = Vec::with_capacity(pairs.len() * 2);
    let mut push = |e: Edge| {
        if (opts.keep_self_loops || e.src != e.dst) && seen.insert(e) {
            out.push(e);
        }
    };
    for &(u, v) in pairs {
        push(Edge::new(u, v));
        if opts.symmetrize {
            push(Edge::new(v, u));
        }
    }
    out
}

/// Reads a raw edge list that may contain duplicates or one-directional
/// links, for use with [`prepare_edges`]. Returns the pairs and the largest
/// node id seen plus one.
pub fn read_raw_pairs(path: impl AsRef<Path>) -> Result<(Vec<(NodeId, NodeId)>, usize)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    let mut max_id = None::<NodeId>;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let ids: Vec<&str> = trimmed.split_whitespace().collect();
        let parsed = match ids.as_slice() {
            [a, b] => a.parse::<NodeId>().ok().zip(b.parse::<NodeId>().ok()),
            _ => None,
        };
        let (u, v) = parsed.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("expected two node ids, got `{trimmed}`"),
        })?;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        pairs.push((u, v));
    }
    Ok((pairs, max_id.map_or(0, |m| m as usize + 1)))
}
