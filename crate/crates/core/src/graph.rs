//! Labeled directed graphs (Kripke models with one proposition per node),
//! datasets of them, and small generators used by tests and benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node index inside one graph.
pub type NodeId = u32;
/// Index into a dataset's label alphabet.
pub type LabelId = u32;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} has neighbor {neighbor} but the graph has {node_count} nodes")]
    NeighborOutOfRange { node: usize, neighbor: u32, node_count: usize },
    #[error("{labels} labels for {nodes} adjacency lists")]
    LengthMismatch { labels: usize, nodes: usize },
    #[error("node {node} has label {label} outside an alphabet of size {label_count}")]
    LabelOutOfRange { node: usize, label: u32, label_count: u32 },
    #[error("point {point} outside a graph of {node_count} nodes")]
    PointOutOfRange { point: usize, node_count: usize },
    #[error("graphs use different label alphabets ({0} vs {1} labels)")]
    AlphabetMismatch(u32, u32),
}

/// A finite directed graph with one label per node.
///
/// Self-loops and asymmetric edges are allowed. Adjacency lists keep their
/// input order (and duplicates, if the source had any); no semantic
/// operation depends on that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct LabeledGraph {
    adjacency: Vec<Vec<NodeId>>,
    labels: Vec<LabelId>,
    label_count: u32,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    labels: Vec<LabelId>,
    adjacency: Vec<Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label_count: Option<u32>,
}

impl TryFrom<RawGraph> for LabeledGraph {
    type Error = GraphError;

    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        let label_count = raw
            .label_count
            .unwrap_or_else(|| raw.labels.iter().max().map_or(1, |m| m + 1));
        LabeledGraph::new(raw.labels, raw.adjacency, label_count)
    }
}

impl From<LabeledGraph> for RawGraph {
    fn from(g: LabeledGraph) -> Self {
        RawGraph { labels: g.labels, adjacency: g.adjacency, label_count: Some(g.label_count) }
    }
}

impl LabeledGraph {
    pub fn new(
        labels: Vec<LabelId>,
        adjacency: Vec<Vec<NodeId>>,
        label_count: u32,
    ) -> Result<Self, GraphError> {
        if labels.len() != adjacency.len() {
            return Err(GraphError::LengthMismatch { labels: labels.len(), nodes: adjacency.len() });
        }
        let n = labels.len();
        for (node, nbrs) in adjacency.iter().enumerate() {
            if let Some(&bad) = nbrs.iter().find(|&&u| u as usize >= n) {
                return Err(GraphError::NeighborOutOfRange { node, neighbor: bad, node_count: n });
            }
        }
        if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= label_count) {
            return Err(GraphError::LabelOutOfRange { node, label, label_count });
        }
        Ok(Self { adjacency, labels, label_count })
    }

    /// Builds a graph from an edge list.
    pub fn from_edges(
        labels: Vec<LabelId>,
        edges: &[(NodeId, NodeId)],
        label_count: u32,
    ) -> Result<Self, GraphError> {
        let mut adjacency = vec![Vec::new(); labels.len()];
        for &(u, v) in edges {
            let slot = adjacency.get_mut(u as usize).ok_or(GraphError::NeighborOutOfRange {
                node: v as usize,
                neighbor: u,
                node_count: labels.len(),
            })?;
            slot.push(v);
        }
        Self::new(labels, adjacency, label_count)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn label_count(&self) -> u32 {
        self.label_count
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> LabelId {
        self.labels[v]
    }

    pub fn neighbors(&self, v: usize) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[Vec<NodeId>] {
        &self.adjacency
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_out_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().map(move |&v| (u as NodeId, v)))
    }

    /// True when every edge `(u, v)` has its reverse `(v, u)`.
    pub fn is_symmetric(&self) -> bool {
        let mut fwd: Vec<(NodeId, NodeId)> = self.edges().collect();
        let mut rev: Vec<(NodeId, NodeId)> = fwd.iter().map(|&(u, v)| (v, u)).collect();
        fwd.sort_unstable();
        rev.sort_unstable();
        fwd == rev
    }

    /// Same graph with a different alphabet size (labels must still fit).
    pub fn with_label_count(mut self, label_count: u32) -> Result<Self, GraphError> {
        if let Some((node, &label)) = self.labels.iter().enumerate().find(|(_, &l)| l >= label_count)
        {
            return Err(GraphError::LabelOutOfRange { node, label, label_count });
        }
        self.label_count = label_count;
        Ok(self)
    }

    /// Relabels nodes: old node `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[NodeId]) -> LabeledGraph {
        let n = self.node_count();
        assert_eq!(perm.len(), n, "permutation length");
        let mut labels = vec![0; n];
        let mut adjacency = vec![Vec::new(); n];
        for v in 0..n {
            let pv = perm[v] as usize;
            labels[pv] = self.labels[v];
            adjacency[pv] = self.adjacency[v].iter().map(|&u| perm[u as usize]).collect();
        }
        LabeledGraph { adjacency, labels, label_count: self.label_count }
    }
}

/// Disjoint union: nodes of `g2` are shifted by `g1.node_count()`.
pub fn disjoint_union(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<LabeledGraph, GraphError> {
    if g1.label_count != g2.label_count {
        return Err(GraphError::AlphabetMismatch(g1.label_count, g2.label_count));
    }
    let shift = g1.node_count() as NodeId;
    let mut adjacency = g1.adjacency.clone();
    adjacency.extend(g2.adjacency.iter().map(|nbrs| nbrs.iter().map(|&u| u + shift).collect()));
    let mut labels = g1.labels.clone();
    labels.extend_from_slice(&g2.labels);
    Ok(LabeledGraph { adjacency, labels, label_count: g1.label_count })
}

/// Relabels every node by its out-degree. Returns the new graph and its
/// alphabet: the distinct degrees, sorted numerically, as text.
pub fn assign_degree_labels(g: &LabeledGraph) -> (LabeledGraph, Vec<String>) {
    let degrees: Vec<usize> = (0..g.node_count()).map(|v| g.out_degree(v)).collect();
    let mut distinct = degrees.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let labels = degrees
        .iter()
        .map(|d| distinct.binary_search(d).expect("degree present") as LabelId)
        .collect();
    let graph = LabeledGraph {
        adjacency: g.adjacency.clone(),
        labels,
        label_count: distinct.len().max(1) as u32,
    };
    (graph, distinct.iter().map(ToString::to_string).collect())
}

/// A graph with a distinguished node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedModel {
    pub graph: LabeledGraph,
    pub point: usize,
}

impl PointedModel {
    pub fn new(graph: LabeledGraph, point: usize) -> Result<Self, GraphError> {
        if point >= graph.node_count() {
            return Err(GraphError::PointOutOfRange { point, node_count: graph.node_count() });
        }
        Ok(Self { graph, point })
    }
}

/// A labeled graph dataset: graphs, one class per graph, and the shared
/// label alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub name: String,
    pub graphs: Vec<LabeledGraph>,
    /// Class id per graph (index into `class_values`).
    pub graph_class: Vec<usize>,
    /// Raw class values in first-appearance order.
    pub class_values: Vec<String>,
    /// Raw node-label values; label id `i` denotes `label_alphabet[i]`.
    pub label_alphabet: Vec<String>,
}

impl DatasetBundle {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_values.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.graphs.iter().map(LabeledGraph::node_count).sum()
    }

    pub fn max_out_degree(&self) -> usize {
        self.graphs.iter().map(LabeledGraph::max_out_degree).max().unwrap_or(0)
    }

    pub fn mean_nodes(&self) -> f64 {
        if self.graphs.is_empty() {
            return 0.0;
        }
        self.total_nodes() as f64 / self.graphs.len() as f64
    }

    /// Label id whose raw value is `raw` (numeric comparison when both parse
    /// as integers, textual otherwise).
    pub fn label_id_of_raw(&self, raw: i64) -> Option<LabelId> {
        self.label_alphabet
            .iter()
            .position(|s| s.trim().parse::<i64>().ok() == Some(raw))
            .map(|i| i as LabelId)
    }

    /// Replaces every node label by the node's out-degree. The alphabet
    /// becomes the sorted distinct degrees over the whole dataset.
    pub fn with_degree_labels(&self) -> DatasetBundle {
        let mut distinct: Vec<usize> = self
            .graphs
            .iter()
            .flat_map(|g| (0..g.node_count()).map(move |v| g.out_degree(v)))
            .collect();
        distinct.sort_unstable();
        distinct.dedup();
        let label_count = distinct.len().max(1) as u32;
        let graphs = self
            .graphs
            .iter()
            .map(|g| LabeledGraph {
                adjacency: g.adjacency.clone(),
                labels: (0..g.node_count())
                    .map(|v| distinct.binary_search(&g.out_degree(v)).expect("present") as LabelId)
                    .collect(),
                label_count,
            })
            .collect();
        DatasetBundle {
            name: self.name.clone(),
            graphs,
            graph_class: self.graph_class.clone(),
            class_values: self.class_values.clone(),
            label_alphabet: if distinct.is_empty() {
                vec!["0".to_string()]
            } else {
                distinct.iter().map(ToString::to_string).collect()
            },
        }
    }

    /// Subset of graphs in the given order (used for permutation tests).
    pub fn select(&self, order: &[usize]) -> DatasetBundle {
        DatasetBundle {
            name: self.name.clone(),
            graphs: order.iter().map(|&i| self.graphs[i].clone()).collect(),
            graph_class: order.iter().map(|&i| self.graph_class[i]).collect(),
            class_values: self.class_values.clone(),
            label_alphabet: self.label_alphabet.clone(),
        }
    }
}

/// Erdős-Rényi style directed graph: each ordered pair `(u, v)`, `u != v`,
/// is an edge with probability `edge_prob`; labels are uniform. Identical
/// seeds give identical graphs on every platform.
pub fn random_graph(n: usize, edge_prob: f64, label_count: u32, seed: u64) -> LabeledGraph {
    assert!(n >= 1, "random_graph needs at least one node");
    assert!((0.0..=1.0).contains(&edge_prob), "edge probability outside [0, 1]");
    assert!(label_count >= 1, "at least one label");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<LabelId> = (0..n).map(|_| rng.random_range(0..label_count)).collect();
    let mut adjacency = vec![Vec::new(); n];
    for (u, nbrs) in adjacency.iter_mut().enumerate() {
        for v in 0..n {
            if u != v && rng.random_bool(edge_prob) {
                nbrs.push(v as NodeId);
            }
        }
    }
    LabeledGraph { adjacency, labels, label_count }
}

/// Uniform random permutation of `0..n` (test helper).
pub fn random_permutation(n: usize, seed: u64) -> Vec<NodeId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<NodeId> = (0..n as NodeId).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}
