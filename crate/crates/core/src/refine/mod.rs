//! Quantifier-parameterized Weisfeiler-Leman refinement.
//!
//! Each round computes every node's canonical signature in parallel, then
//! sorts the distinct signatures and hands out fresh color ids in that
//! order. Colors are shared by all graphs refined in one run, so equal
//! colors mean equivalent nodes across the whole dataset.

mod key;
mod signature;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::ExecMode;
use crate::graph::{disjoint_union, GraphError, LabeledGraph, PointedModel};
use crate::quantifier::{Quantifier, QuantifierSet};

pub use key::{KeySink, SigKey, WordSink, EXACT_LIMIT};
pub use signature::{Record, Signature};
use signature::{encode, Budget, Mode, SigError};

pub const DEFAULT_ROUND_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RefineError {
    #[error("round {round}: node {node} has {found} relevant colors for {quantifier}, cap is {cap}")]
    Size { round: usize, node: usize, quantifier: String, found: usize, cap: usize },
    #[error("round {round} exceeded the {limit:?} budget")]
    Timeout { round: usize, limit: Duration },
    #[error("a quantifier family needs at least one input graph")]
    NoGraphs,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
pub struct RefineOptions {
    /// Largest pruned color set a non-monotone quantifier may tabulate
    /// (width-2 quantifiers get half of it).
    pub size_cap: usize,
    pub round_timeout: Option<Duration>,
    pub exec: ExecMode,
    /// Refine with the color multiset when the counting family is present.
    pub counting_fast_path: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            size_cap: crate::types::DEFAULT_SIZE_CAP,
            round_timeout: Some(DEFAULT_ROUND_TIMEOUT),
            exec: ExecMode::default(),
            counting_fast_path: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorInfo {
    pub round: usize,
    pub signature_rendering: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementResult {
    /// `rounds[r]` holds the round-`r` color of every node, graphs concatenated.
    pub rounds: Vec<Vec<u32>>,
    pub registry: BTreeMap<u32, ColorInfo>,
    pub stable_round: Option<usize>,
    /// Start of each graph's nodes in the concatenated order, plus the total.
    pub graph_offsets: Vec<usize>,
}

impl RefinementResult {
    pub fn depth(&self) -> usize {
        self.rounds.len() - 1
    }

    pub fn colors(&self, round: usize, graph: usize) -> &[u32] {
        &self.rounds[round][self.graph_offsets[graph]..self.graph_offsets[graph + 1]]
    }

    /// Number of classes at each round.
    pub fn class_counts(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| distinct(r)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

fn distinct(colors: &[u32]) -> usize {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Incremental refinement over a fixed list of graphs.
pub struct RefinementRun<'a> {
    graphs: &'a [LabeledGraph],
    offsets: Vec<usize>,
    quantifiers: Vec<Quantifier>,
    ids: Vec<String>,
    counting: bool,
    opts: RefineOptions,
    rounds: Vec<Vec<u32>>,
    class_counts: Vec<usize>,
    registry: BTreeMap<u32, ColorInfo>,
    next_id: u32,
    stable_round: Option<usize>,
}

impl<'a> RefinementRun<'a> {
    pub fn new(graphs: &'a [LabeledGraph], qset: &QuantifierSet, opts: RefineOptions) -> Result<Self, RefineError> {
        if qset.family().is_some() && graphs.is_empty() {
            return Err(RefineError::NoGraphs);
        }
        let counting = opts.counting_fast_path && qset.family().is_some();
        let max_degree = graphs.iter().map(LabeledGraph::max_out_degree).max().unwrap_or(0);
        let quantifiers = if counting { Vec::new() } else { qset.expanded(max_degree).members().to_vec() };
        let ids = quantifiers.iter().map(|q| q.id().to_string()).collect();
        let mut offsets = Vec::with_capacity(graphs.len() + 1);
        offsets.push(0);
        for g in graphs {
            offsets.push(offsets.last().expect("nonempty") + g.node_count());
        }
        let label_count = graphs.iter().map(LabeledGraph::label_count).max().unwrap_or(0);
        let round0: Vec<u32> = graphs.iter().flat_map(|g| g.labels().iter().copied()).collect();
        let registry = (0..label_count)
            .map(|l| (l, ColorInfo { round: 0, signature_rendering: format!("label {l}") }))
            .collect();
        Ok(Self {
            graphs,
            offsets,
            quantifiers,
            ids,
            counting,
            opts,
            class_counts: vec![distinct(&round0)],
            rounds: vec![round0],
            registry,
            next_id: label_count,
            stable_round: None,
        })
    }

    /// Number of completed refinement rounds.
    pub fn depth(&self) -> usize {
        self.rounds.len() - 1
    }

    pub fn colors(&self, round: usize) -> &[u32] {
        &self.rounds[round]
    }

    pub fn class_count(&self, round: usize) -> usize {
        self.class_counts[round]
    }

    pub fn stable_round(&self) -> Option<usize> {
        self.stable_round
    }

    pub fn registry(&self) -> &BTreeMap<u32, ColorInfo> {
        &self.registry
    }

    pub fn graph_offsets(&self) -> &[usize] {
        &self.offsets
    }

    fn locate(&self, node: usize) -> (usize, usize) {
        let g = self.offsets.partition_point(|&o| o <= node) - 1;
        (g, node - self.offsets[g])
    }

    fn mode(&self) -> Mode<'_> {
        if self.counting {
            Mode::Counting
        } else {
            Mode::Generic(&self.quantifiers)
        }
    }

    fn node_key(&self, node: usize, budget: &Budget) -> Result<SigKey, SigError> {
        let prev = self.rounds.last().expect("round 0");
        let (g, v) = self.locate(node);
        let base = self.offsets[g];
        let mut nbrs: Vec<u32> = self.graphs[g].neighbors(v).iter().map(|&u| prev[base + u as usize]).collect();
        let mut sink = KeySink::new();
        encode(prev[node], &mut nbrs, self.mode(), self.opts.size_cap, budget, &mut sink)?;
        Ok(sink.finish())
    }

    /// Computes the next round.
    pub fn step(&mut self) -> Result<(), RefineError> {
        let round = self.rounds.len();
        let started = Instant::now();
        let budget = Budget { deadline: self.opts.round_timeout.map(|t| started + t) };
        let total = *self.offsets.last().expect("nonempty");
        let prev = self.rounds.last().expect("round 0");
        let keys = self
            .opts
            .exec
            .try_map_range(total, |i| {
                budget.check().and_then(|_| self.node_key(i, &budget)).map(|k| (prev[i], k)).map_err(|e| (i, e))
            })
            .map_err(|(node, e)| self.lift(e, round, node))?;

        let mut order: Vec<u32> = (0..total as u32).collect();
        let by_key = |a: &u32, b: &u32| keys[*a as usize].cmp(&keys[*b as usize]).then(a.cmp(b));
        #[cfg(feature = "parallel")]
        if self.opts.exec == ExecMode::Parallel {
            use rayon::slice::ParallelSliceMut;
            order.par_sort_unstable_by(by_key);
        } else {
            order.sort_unstable_by(by_key);
        }
        #[cfg(not(feature = "parallel"))]
        order.sort_unstable_by(by_key);

        let mut next = vec![0u32; total];
        let mut last: Option<usize> = None;
        let mut classes = 0;
        for &i in &order {
            let i = i as usize;
            let fresh = last.is_none_or(|l| keys[l] != keys[i]);
            if fresh {
                let id = self.next_id;
                self.next_id += 1;
                classes += 1;
                self.registry.insert(id, ColorInfo { round, signature_rendering: self.render(&keys[i]) });
                last = Some(i);
            }
            next[i] = self.next_id - 1;
        }
        if self.stable_round.is_none() && classes == *self.class_counts.last().expect("round 0") {
            self.stable_round = Some(round - 1);
        }
        self.class_counts.push(classes);
        self.rounds.push(next);
        Ok(())
    }

    fn lift(&self, e: SigError, round: usize, node: usize) -> RefineError {
        match e {
            SigError::Timeout => RefineError::Timeout { round, limit: self.opts.round_timeout.unwrap_or_default() },
            SigError::Size { quantifier, found, cap } => RefineError::Size { round, node, quantifier, found, cap },
        }
    }

    fn render(&self, key: &(u32, SigKey)) -> String {
        const MAX_RENDERING: usize = 2000;
        match &key.1 {
            SigKey::Exact(words) => {
                let ids: Vec<&str> = self.ids.iter().map(String::as_str).collect();
                let mut s = Signature::from_words(words).map(|s| s.render(&ids)).unwrap_or_default();
                if s.len() > MAX_RENDERING {
                    let cut = (0..=MAX_RENDERING).rev().find(|&i| s.is_char_boundary(i)).unwrap_or(0);
                    s.truncate(cut);
                    s.push_str(" ...");
                }
                s
            }
            SigKey::Digest(d) => {
                let hex: String = d.iter().take(8).map(|b| format!("{b:02x}")).collect();
                format!("c{} | sha256:{hex}", key.0)
            }
        }
    }

    /// Drops rounds after `depth` (and their registry entries).
    fn truncate(&mut self, depth: usize) {
        self.rounds.truncate(depth + 1);
        self.class_counts.truncate(depth + 1);
        self.registry.retain(|_, info| info.round <= depth);
    }

    pub fn into_result(self) -> RefinementResult {
        RefinementResult {
            rounds: self.rounds,
            registry: self.registry,
            stable_round: self.stable_round,
            graph_offsets: self.offsets,
        }
    }
}

/// Refines all graphs jointly for `d` rounds.
pub fn refine(
    graphs: &[LabeledGraph],
    d: usize,
    qset: &QuantifierSet,
    opts: &RefineOptions,
) -> Result<RefinementResult, RefineError> {
    let mut run = RefinementRun::new(graphs, qset, opts.clone())?;
    for _ in 0..d {
        run.step()?;
    }
    Ok(run.into_result())
}

/// Refines until the partition stops changing; the result ends at the
/// stable round.
pub fn refine_to_stability(
    graphs: &[LabeledGraph],
    qset: &QuantifierSet,
    opts: &RefineOptions,
) -> Result<RefinementResult, RefineError> {
    let mut run = RefinementRun::new(graphs, qset, opts.clone())?;
    while run.stable_round().is_none() {
        run.step()?;
    }
    let stable = run.stable_round().expect("loop exit");
    run.truncate(stable);
    Ok(run.into_result())
}

/// Smallest `r` whose partition equals the partition of round `r + 1`.
pub fn stable_depth(graphs: &[LabeledGraph], qset: &QuantifierSet, opts: &RefineOptions) -> Result<usize, RefineError> {
    Ok(refine_to_stability(graphs, qset, opts)?.depth())
}

/// Whether the two points get different round-`d` colors when their models
/// are refined as one disjoint union.
pub fn separated(
    m1: &PointedModel,
    m2: &PointedModel,
    d: usize,
    qset: &QuantifierSet,
    opts: &RefineOptions,
) -> Result<bool, RefineError> {
    let union = disjoint_union(&m1.graph, &m2.graph)?;
    let result = refine(std::slice::from_ref(&union), d, qset, opts)?;
    let colors = &result.rounds[d];
    Ok(colors[m1.point] != colors[m1.graph.node_count() + m2.point])
}

/// Canonical signature of `v` under the given round colors.
pub fn node_signature(
    g: &LabeledGraph,
    v: usize,
    colors: &[u32],
    qset: &QuantifierSet,
    opts: &RefineOptions,
) -> Result<Signature, RefineError> {
    let counting = opts.counting_fast_path && qset.family().is_some();
    let expanded = qset.expanded(g.max_out_degree());
    let mode = if counting { Mode::Counting } else { Mode::Generic(expanded.members()) };
    let mut nbrs: Vec<u32> = g.neighbors(v).iter().map(|&u| colors[u as usize]).collect();
    let mut words = Vec::new();
    encode(colors[v], &mut nbrs, mode, opts.size_cap, &Budget::unlimited(), &mut words).map_err(|e| match e {
        SigError::Size { quantifier, found, cap } => RefineError::Size { round: 0, node: v, quantifier, found, cap },
        SigError::Timeout => RefineError::Timeout { round: 0, limit: Duration::ZERO },
    })?;
    Ok(Signature::from_words(&words).expect("encoder output decodes"))
}
