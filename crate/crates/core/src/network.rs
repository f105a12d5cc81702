//! GNN workload descriptions and the dense reference implementation.
//!
//! A layer is an aggregation stage and a feature-extraction stage in either
//! order. The reference path (`oracle_*`) is written for clarity, not speed:
//! neighbors are visited in ascending node id with the node itself last, and
//! every product sums its inner index in ascending order.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::matrix::{FeatureMatrix, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOrder {
    /// Aggregate first; the dense engine consumes aggregated features.
    GraphFirst,
    /// Extract first; the graph engine aggregates extracted features.
    DenseFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    MeanIncludeSelf,
    MaxIncludeSelf,
}

impl Aggregator {
    #[inline]
    pub fn identity(self) -> f32 {
        match self {
            Aggregator::MeanIncludeSelf => 0.0,
            Aggregator::MaxIncludeSelf => f32::NEG_INFINITY,
        }
    }

    #[inline]
    pub fn reduce(self, acc: f32, x: f32) -> f32 {
        match self {
            Aggregator::MeanIncludeSelf => acc + x,
            Aggregator::MaxIncludeSelf => acc.max(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    #[default]
    None,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f32) -> f32 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::None => x,
        }
    }
}

/// Divisor used by mean aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanDenominator {
    /// `in_degree + 1`: a true mean over the neighborhood and the node.
    #[default]
    IncludeSelf,
    /// `in_degree` (1 for isolated nodes), with the node still summed in.
    NeighborsOnly,
}

impl MeanDenominator {
    pub fn scale(self, in_degree: usize) -> f32 {
        let count = match self {
            MeanDenominator::IncludeSelf => in_degree + 1,
            MeanDenominator::NeighborsOnly => in_degree.max(1),
        };
        1.0 / count as f32
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub stage_order: StageOrder,
    pub aggregator: Aggregator,
    pub concat_self: bool,
    /// `(agg_dim [+ in_dim]) x out_dim`; aggregated rows first, then self rows.
    pub weights: Matrix,
    /// `in_dim x pool_dim`, applied with ReLU before aggregation.
    pub pool_weights: Option<Matrix>,
    pub activation: Activation,
    pub mean_denominator: MeanDenominator,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl LayerSpec {
    /// Width of the features the graph engine aggregates.
    pub fn agg_dim(&self) -> usize {
        self.pool_weights.as_ref().map_or(self.in_dim, Matrix::cols)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(Error::Shape("layer dimensions must be at least 1".into()));
        }
        let uses_pool = self.stage_order == StageOrder::DenseFirst;
        match (&self.pool_weights, uses_pool) {
            (Some(p), true) => {
                if p.rows() != self.in_dim || p.cols() == 0 {
                    return Err(Error::Shape(format!(
                        "pool weights are {}x{}, expected {}xP",
                        p.rows(),
                        p.cols(),
                        self.in_dim
                    )));
                }
            }
            (None, false) => {}
            (Some(_), false) => {
                return Err(Error::Shape("pool weights on a graph-first layer".into()))
            }
            (None, true) => return Err(Error::Shape("dense-first layer without pool weights".into())),
        }
        let rows = self.agg_dim() + if self.concat_self { self.in_dim } else { 0 };
        if self.weights.rows() != rows || self.weights.cols() != self.out_dim {
            return Err(Error::Shape(format!(
                "weights are {}x{}, expected {rows}x{}",
                self.weights.rows(),
                self.weights.cols(),
                self.out_dim
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub name: String,
    pub seed: u64,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate().map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::Shape(format!(
                    "layer {i} emits {} dims but layer {} expects {}",
                    pair[0].out_dim,
                    i + 1,
                    pair[1].in_dim
                )));
            }
        }
        Ok(())
    }

    pub fn in_dim(&self) -> Option<usize> {
        self.layers.first().map(|l| l.in_dim)
    }

    /// The structural description; weights are regenerated from the seed.
    pub fn config(&self) -> NetworkConfig {
        NetworkConfig {
            name: self.name.clone(),
            seed: self.seed,
            in_dim: self.in_dim().unwrap_or(0),
            layers: self
                .layers
                .iter()
                .map(|l| LayerConfig {
                    out_dim: l.out_dim,
                    stage_order: l.stage_order,
                    aggregator: l.aggregator,
                    concat_self: l.concat_self,
                    activation: l.activation,
                    pool_dim: l.pool_weights.as_ref().map(Matrix::cols),
                    mean_denominator: l.mean_denominator,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Gcn,
    Graphsage,
    Graphsagepool,
}

impl FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(NetworkKind::Gcn),
            "graphsage" => Ok(NetworkKind::Graphsage),
            "graphsagepool" | "graphsage-pool" => Ok(NetworkKind::Graphsagepool),
            other => Err(Error::Parameter(format!("unknown network `{other}`"))),
        }
    }
}

impl std::fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NetworkKind::Gcn => "gcn",
            NetworkKind::Graphsage => "graphsage",
            NetworkKind::Graphsagepool => "graphsagepool",
        })
    }
}

pub const DEFAULT_HIDDEN_DIM: usize = 16;

/// Serializable layer structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub out_dim: usize,
    pub stage_order: StageOrder,
    pub aggregator: Aggregator,
    pub concat_self: bool,
    #[serde(default)]
    pub activation: Activation,
    /// Width of the pool extraction; required for dense-first layers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_dim: Option<usize>,
    #[serde(default)]
    pub mean_denominator: MeanDenominator,
}

/// Serializable network structure. Weights are drawn uniformly from
/// `[-0.1, 0.1]` by a ChaCha8 stream seeded with `seed`, layer by layer, pool
/// weights before extraction weights, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub name: String,
    pub seed: u64,
    pub in_dim: usize,
    pub layers: Vec<LayerConfig>,
}

impl NetworkConfig {
    pub fn builtin(kind: NetworkKind, in_dim: usize, hidden_dim: usize, out_dim: usize, seed: u64) -> Self {
        let layer = |out_dim, in_dim: usize, activation| {
            let (stage_order, aggregator, concat_self, pool_dim) = match kind {
                NetworkKind::Gcn => (StageOrder::GraphFirst, Aggregator::MeanIncludeSelf, false, None),
                NetworkKind::Graphsage => (StageOrder::GraphFirst, Aggregator::MeanIncludeSelf, true, None),
                NetworkKind::Graphsagepool => {
                    (StageOrder::DenseFirst, Aggregator::MaxIncludeSelf, true, Some(in_dim))
                }
            };
            LayerConfig {
                out_dim,
                stage_order,
                aggregator,
                concat_self,
                activation,
                pool_dim,
                mean_denominator: MeanDenominator::default(),
            }
        };
        Self {
            name: kind.to_string(),
            seed,
            in_dim,
            layers: vec![
                layer(hidden_dim, in_dim, Activation::Relu),
                layer(out_dim, hidden_dim, Activation::None),
            ],
        }
    }

    pub fn build(&self) -> Result<NetworkSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut draw = |rows: usize, cols: usize| {
            let data = (0..rows * cols).map(|_| rng.gen_range(-0.1f32..=0.1)).collect();
            Matrix::from_vec(rows, cols, data).expect("sized above")
        };
        let mut in_dim = self.in_dim;
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, lc) in self.layers.iter().enumerate() {
            if in_dim == 0 || lc.out_dim == 0 {
                return Err(Error::Parameter(format!("layer {i}: dimensions must be at least 1")));
            }
            let pool_weights = match (lc.stage_order, lc.pool_dim) {
                (StageOrder::DenseFirst, Some(p)) if p > 0 => Some(draw(in_dim, p)),
                (StageOrder::DenseFirst, _) => {
                    return Err(Error::Parameter(format!("layer {i}: dense-first layer needs pool_dim")))
                }
                (StageOrder::GraphFirst, None) => None,
                (StageOrder::GraphFirst, Some(_)) => {
                    return Err(Error::Parameter(format!("layer {i}: pool_dim on a graph-first layer")))
                }
            };
            let agg_dim = pool_weights.as_ref().map_or(in_dim, Matrix::cols);
            let rows = agg_dim + if lc.concat_self { in_dim } else { 0 };
            let weights = draw(rows, lc.out_dim);
            layers.push(LayerSpec {
                stage_order: lc.stage_order,
                aggregator: lc.aggregator,
                concat_self: lc.concat_self,
                weights,
                pool_weights,
                activation: lc.activation,
                mean_denominator: lc.mean_denominator,
                in_dim,
                out_dim: lc.out_dim,
            });
            in_dim = lc.out_dim;
        }
        let spec = NetworkSpec {
            name: self.name.clone(),
            seed: self.seed,
            layers,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("network config always serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Two-layer builtin network: `in_dim -> hidden_dim` (ReLU), then
/// `hidden_dim -> out_dim` (no activation).
pub fn make_builtin(kind: NetworkKind, in_dim: usize, hidden_dim: usize, out_dim: usize, seed: u64) -> Result<NetworkSpec> {
    NetworkConfig::builtin(kind, in_dim, hidden_dim, out_dim, seed).build()
}

/// Applies `activation(x · W)` to every row.
fn extract(x: &Matrix, w: &Matrix, activation: Activation) -> Result<Matrix> {
    if x.cols() != w.rows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            x.rows(),
            x.cols(),
            w.rows(),
            w.cols()
        )));
    }
    let mut out = Matrix::zeros(x.rows(), w.cols());
    for i in 0..x.rows() {
        for j in 0..w.cols() {
            let dot: f64 = (0..x.cols()).map(|k| x.get(i, k) as f64 * w.get(k, j) as f64).sum();
            out.set(i, j, activation.apply(dot as f32));
        }
    }
    Ok(out)
}

/// Aggregates `src` over each node's in-neighborhood plus itself.
pub fn oracle_aggregate(
    graph: &Graph,
    src: &FeatureMatrix,
    aggregator: Aggregator,
    denominator: MeanDenominator,
) -> Result<FeatureMatrix> {
    if src.num_nodes() != graph.num_nodes() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} nodes",
            src.num_nodes(),
            graph.num_nodes()
        )));
    }
    let dim = src.dim();
    let mut out = Matrix::zeros(graph.num_nodes(), dim);
    let mut neighbors: Vec<NodeId> = Vec::new();
    for u in 0..graph.num_nodes() as NodeId {
        neighbors.clear();
        neighbors.extend_from_slice(graph.in_neighbors(u)?);
        neighbors.sort_unstable();
        let mut acc = vec![aggregator.identity(); dim];
        for &v in neighbors.iter().chain(std::iter::once(&u)) {
            for (a, &x) in acc.iter_mut().zip(src.row(v as usize)) {
                *a = aggregator.reduce(*a, x);
            }
        }
        if aggregator == Aggregator::MeanIncludeSelf {
            let scale = denominator.scale(neighbors.len());
            acc.iter_mut().for_each(|a| *a *= scale);
        }
        out.row_mut(u as usize).copy_from_slice(&acc);
    }
    Ok(out)
}

pub fn oracle_layer(graph: &Graph, h: &FeatureMatrix, layer: &LayerSpec) -> Result<FeatureMatrix> {
    layer.validate()?;
    if h.dim() != layer.in_dim {
        return Err(Error::Shape(format!(
            "features have dim {} but the layer expects {}",
            h.dim(),
            layer.in_dim
        )));
    }
    let pooled;
    let src = match &layer.pool_weights {
        Some(wp) => {
            pooled = extract(h, wp, Activation::Relu)?;
            &pooled
        }
        None => h,
    };
    let z = oracle_aggregate(graph, src, layer.aggregator, layer.mean_denominator)?;
    let x = if layer.concat_self { z.hstack(h)? } else { z };
    extract(&x, &layer.weights, layer.activation)
}

pub fn oracle_network(graph: &Graph, h: &FeatureMatrix, net: &NetworkSpec) -> Result<FeatureMatrix> {
    net.layers
        .iter()
        .try_fold(h.clone(), |acc, layer| oracle_layer(graph, &acc, layer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, random_features, Edge};
    use proptest::prelude::*;

    fn layer_with(aggregator: Aggregator, concat_self: bool, weights: Matrix, in_dim: usize) -> LayerSpec {
        LayerSpec {
            stage_order: StageOrder::GraphFirst,
            aggregator,
            concat_self,
            out_dim: weights.cols(),
            weights,
            pool_weights: None,
            activation: Activation::None,
            mean_denominator: MeanDenominator::IncludeSelf,
            in_dim,
        }
    }

    /// Triple-loop reference written independently of `oracle_layer`.
    #[allow(clippy::needless_range_loop)]
    fn naive_graphsage(graph: &Graph, h: &Matrix, w: &Matrix, act: Activation) -> Matrix {
        let n = graph.num_nodes();
        let d = h.dim();
        let mut out = Matrix::zeros(n, w.cols());
        for u in 0..n {
            let mut z = vec![0.0f64; d];
            let mut count = 1usize;
            for k in 0..d {
                z[k] += h.get(u, k) as f64;
            }
            for e in graph.edges() {
                if e.dst as usize == u {
                    count += 1;
                    for k in 0..d {
                        z[k] += h.get(e.src as usize, k) as f64;
                    }
                }
            }
            for j in 0..w.cols() {
                let mut s = 0.0f64;
                for k in 0..d {
                    s += z[k] / count as f64 * w.get(k, j) as f64;
                    s += h.get(u, k) as f64 * w.get(d + k, j) as f64;
                }
                out.set(u, j, act.apply(s as f32));
            }
        }
        out
    }

    #[test]
    fn mean_of_neighbors_and_self() {
        let g = Graph::from_pairs(3, &[(1, 0), (2, 0)]).unwrap();
        let h = Matrix::from_rows(&[vec![0.0], vec![2.0], vec![4.0]]).unwrap();
        let z = oracle_aggregate(&g, &h, Aggregator::MeanIncludeSelf, MeanDenominator::IncludeSelf).unwrap();
        assert_eq!(z.get(0, 0), 2.0);
        let literal = oracle_aggregate(&g, &h, Aggregator::MeanIncludeSelf, MeanDenominator::NeighborsOnly).unwrap();
        assert_eq!(literal.get(0, 0), 3.0);
    }

    #[test]
    fn elementwise_max() {
        let g = Graph::from_pairs(2, &[(1, 0)]).unwrap();
        let h = Matrix::from_rows(&[vec![1.0, -3.0], vec![2.0, 0.0]]).unwrap();
        let z = oracle_aggregate(&g, &h, Aggregator::MaxIncludeSelf, MeanDenominator::IncludeSelf).unwrap();
        assert_eq!(z.row(0), &[2.0, 0.0]);
    }

    #[test]
    fn graphsage_matches_naive_loop() {
        let g = erdos_renyi(50, 4.0, 11).unwrap();
        let h = random_features(50, 12, 12);
        let net = make_builtin(NetworkKind::Graphsage, 12, 6, 3, 5).unwrap();
        let layer = &net.layers[0];
        let got = oracle_layer(&g, &h, layer).unwrap();
        let want = naive_graphsage(&g, &h, &layer.weights, layer.activation);
        assert!(got.max_abs_diff(&want) <= 1e-6, "{}", got.max_abs_diff(&want));
    }

    #[test]
    fn builtin_shapes() {
        let sage = make_builtin(NetworkKind::Graphsage, 1433, DEFAULT_HIDDEN_DIM, 7, 1).unwrap();
        let l0 = &sage.layers[0];
        assert_eq!(l0.stage_order, StageOrder::GraphFirst);
        assert_eq!(l0.aggregator, Aggregator::MeanIncludeSelf);
        assert!(l0.concat_self);
        assert_eq!((l0.weights.rows(), l0.weights.cols()), (2 * 1433, 16));
        assert_eq!(l0.activation, Activation::Relu);
        assert_eq!(sage.layers[1].activation, Activation::None);

        let pool = make_builtin(NetworkKind::Graphsagepool, 8, 4, 2, 1).unwrap();
        let p0 = &pool.layers[0];
        assert_eq!(p0.stage_order, StageOrder::DenseFirst);
        assert_eq!(p0.aggregator, Aggregator::MaxIncludeSelf);
        assert_eq!(p0.pool_weights.as_ref().map(|m| (m.rows(), m.cols())), Some((8, 8)));

        let gcn = make_builtin(NetworkKind::Gcn, 8, 4, 2, 1).unwrap();
        assert!(!gcn.layers[0].concat_self);
        assert_eq!(gcn.layers[0].weights.rows(), 8);
    }

    #[test]
    fn builtin_is_seed_deterministic() {
        let a = make_builtin(NetworkKind::Graphsagepool, 10, 4, 3, 77).unwrap();
        let b = make_builtin(NetworkKind::Graphsagepool, 10, 4, 3, 77).unwrap();
        let c = make_builtin(NetworkKind::Graphsagepool, 10, 4, 3, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.layers[0].weights.as_slice().iter().all(|w| w.abs() <= 0.1));
    }

    #[test]
    fn unknown_network_kind() {
        assert!(matches!("gat".parse::<NetworkKind>(), Err(Error::Parameter(_))));
    }

    #[test]
    fn config_round_trip() {
        let net = make_builtin(NetworkKind::Graphsagepool, 10, 4, 3, 5).unwrap();
        let text = net.config().to_toml();
        let back = NetworkConfig::from_toml(&text).unwrap().build().unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn dimension_mismatch() {
        let net = make_builtin(NetworkKind::Gcn, 4, 3, 2, 0).unwrap();
        let g = Graph::from_pairs(2, &[]).unwrap();
        let h = Matrix::zeros(2, 5);
        assert!(matches!(oracle_layer(&g, &h, &net.layers[0]), Err(Error::Shape(_))));
    }

    #[test]
    fn empty_and_single_layer_folds() {
        let g = erdos_renyi(10, 2.0, 1).unwrap();
        let h = random_features(10, 4, 1);
        let empty = NetworkSpec { name: "none".into(), seed: 0, layers: vec![] };
        assert_eq!(oracle_network(&g, &h, &empty).unwrap(), h);
        let net = make_builtin(NetworkKind::Graphsage, 4, 3, 2, 0).unwrap();
        let one = NetworkSpec { layers: vec![net.layers[0].clone()], ..net.clone() };
        assert_eq!(oracle_network(&g, &h, &one).unwrap(), oracle_layer(&g, &h, &net.layers[0]).unwrap());
    }

    #[test]
    fn two_layer_gcn_on_cycle_hand_unrolled() {
        // 4-cycle 0->1->2->3->0: each node's neighborhood is {prev, self}.
        let g = Graph::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let h = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 1.0], vec![-1.0, 4.0]]).unwrap();
        let w0 = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0]]).unwrap();
        let w1 = Matrix::from_rows(&[vec![2.0], vec![1.0]]).unwrap();
        let mut l0 = layer_with(Aggregator::MeanIncludeSelf, false, w0, 2);
        l0.activation = Activation::Relu;
        let l1 = layer_with(Aggregator::MeanIncludeSelf, false, w1, 2);
        let net = NetworkSpec { name: "gcn".into(), seed: 0, layers: vec![l0, l1] };

        // Step 1: z = mean(prev, self) then relu(z W0).
        // z0=(0,2) z1=(.5,1) z2=(1.5,1.5) z3=(1,2.5)
        // zW0: (1,4) (1,1.5) (2.25,1.5) (2.25,4) -> all positive
        // Step 2: means of those rows: (1.625,4) (1,2.75) (1.625,1.5) (2.25,2.75)
        // times W1 = [2,1]^T: 7.25, 4.75, 4.75, 7.25
        let out = oracle_network(&g, &h, &net).unwrap();
        assert_eq!(out.as_slice(), &[7.25, 4.75, 4.75, 7.25]);
    }

    proptest! {
        #[test]
        fn no_edges_mean_is_identity(n in 1usize..20, d in 1usize..6, seed in any::<u64>()) {
            let g = Graph::from_pairs(n, &[]).unwrap();
            let h = random_features(n, d, seed);
            let z = oracle_aggregate(&g, &h, Aggregator::MeanIncludeSelf, MeanDenominator::IncludeSelf).unwrap();
            prop_assert_eq!(z, h);
        }

        #[test]
        fn max_dominates_self(n in 1usize..40, deg in 0.0f64..5.0, seed in any::<u64>()) {
            let g = erdos_renyi(n, deg, seed).unwrap();
            let h = random_features(n, 3, seed ^ 1);
            let z = oracle_aggregate(&g, &h, Aggregator::MaxIncludeSelf, MeanDenominator::IncludeSelf).unwrap();
            for u in 0..n {
                for k in 0..3 {
                    prop_assert!(z.get(u, k) >= h.get(u, k));
                }
            }
        }

        #[test]
        fn edge_order_does_not_matter(n in 2usize..40, deg in 0.5f64..5.0, seed in any::<u64>()) {
            let g = erdos_renyi(n, deg, seed).unwrap();
            let mut shuffled: Vec<Edge> = g.edges().to_vec();
            shuffled.reverse();
            let g2 = Graph::new(n, shuffled).unwrap();
            let h = random_features(n, 5, seed ^ 3);
            for agg in [Aggregator::MeanIncludeSelf, Aggregator::MaxIncludeSelf] {
                let a = oracle_aggregate(&g, &h, agg, MeanDenominator::IncludeSelf).unwrap();
                let b = oracle_aggregate(&g2, &h, agg, MeanDenominator::IncludeSelf).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
