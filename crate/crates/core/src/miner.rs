//! Brute-force mining of global-rooted modal formulas as graph classifiers.
//!
//! Candidates are enumerated in nondecreasing size. Node-level subformulas
//! are represented by their extension over all nodes of the dataset (one
//! bitset over the concatenated node order) and graph-level formulas by one
//! bit per graph; candidates whose extension was already seen are dropped,
//! keeping the first (smallest) representative.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::eval::Evaluator;
use crate::exec::ExecMode;
use crate::formula::{Formula, Node};
use crate::graph::{DatasetBundle, LabeledGraph};
use crate::quantifier::{Quantifier, VennProfile};
use crate::syntax::render_with;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinerError {
    #[error("formula {0} is not global-rooted")]
    NotGlobalRooted(String),
    #[error("invalid miner configuration: {0}")]
    InvalidConfig(String),
    #[error("the dataset has no graphs")]
    EmptyBundle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Op {
    Diamond,
    Maj,
    GlobalDiamond,
    GlobalMaj,
    Not,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpSet(Vec<Op>);

impl OpSet {
    pub fn new(mut ops: Vec<Op>) -> Self {
        ops.sort_by_key(|o| *o as u8);
        ops.dedup();
        OpSet(ops)
    }

    pub fn all() -> Self {
        use Op::*;
        OpSet::new(vec![Diamond, Maj, GlobalDiamond, GlobalMaj, Not, And, Or])
    }

    /// Comma-separated tokens: `exists`, `maj`, `gexists`, `gmaj`, `globals`
    /// (both global modalities), `not`, `and`, `or`, `bool` (all three).
    /// Without any Boolean token all Boolean connectives are included.
    pub fn parse(spec: &str) -> Result<Self, MinerError> {
        use Op::*;
        let mut ops = Vec::new();
        let mut boolean = false;
        for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "exists" | "diamond" => ops.push(Diamond),
                "maj" => ops.push(Maj),
                "gexists" => ops.push(GlobalDiamond),
                "gmaj" => ops.push(GlobalMaj),
                "globals" => ops.extend([GlobalDiamond, GlobalMaj]),
                "not" | "and" | "or" | "bool" => {
                    boolean = true;
                    match tok {
                        "not" => ops.push(Not),
                        "and" => ops.push(And),
                        "or" => ops.push(Or),
                        _ => ops.extend([Not, And, Or]),
                    }
                }
                other => return Err(MinerError::InvalidConfig(format!("unknown operator {other:?}"))),
            }
        }
        if !boolean {
            ops.extend([Not, And, Or]);
        }
        Ok(OpSet::new(ops))
    }

    pub fn contains(&self, op: Op) -> bool {
        self.0.contains(&op)
    }

    pub fn ops(&self) -> &[Op] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct MinerConfig {
    pub ops: OpSet,
    /// Largest formula size; n-ary connectives count once.
    pub max_size: u64,
    pub max_depth: usize,
    /// Class treated as positive (one-vs-rest).
    pub target_class: usize,
    pub time_budget: Option<Duration>,
    /// Maximal number of distinct graph-level formulas scored.
    pub candidate_budget: Option<u64>,
    pub top_k: usize,
    /// Offset added to raw label values when rendering atoms.
    pub label_base: i64,
    pub exec: ExecMode,
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self {
            ops: OpSet::all(),
            max_size: 6,
            max_depth: 6,
            target_class: 0,
            time_budget: None,
            candidate_budget: None,
            top_k: 10,
            label_base: 0,
            exec: ExecMode::default(),
        }
    }
}

impl MinerConfig {
    fn validate(&self) -> Result<(), MinerError> {
        if self.max_size < 1 {
            return Err(MinerError::InvalidConfig("max_size must be at least 1".into()));
        }
        if self.ops.ops().is_empty() {
            return Err(MinerError::InvalidConfig("no operators".into()));
        }
        if !self.ops.contains(Op::GlobalDiamond) && !self.ops.contains(Op::GlobalMaj) {
            return Err(MinerError::InvalidConfig("a global modality is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinedFormula {
    #[serde(skip)]
    pub formula: Formula,
    pub rendering: String,
    pub size: u64,
    pub accuracy: f64,
    /// Whether satisfying graphs are predicted to be in the target class
    /// (otherwise the complement prediction is the scored one).
    pub satisfied_means_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinedResult {
    pub target_class: usize,
    pub ranked: Vec<MinedFormula>,
    pub candidates_evaluated: u64,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    /// Percentage of graphs with `satisfies <=> class == positive`.
    pub accuracy: f64,
    /// `max(accuracy, 100 - accuracy)`.
    pub oriented_accuracy: f64,
    pub satisfied_means_positive: bool,
}

/// Graph-level truth of a global-rooted formula.
pub fn graph_satisfies(g: &LabeledGraph, f: &Formula) -> Result<bool, MinerError> {
    if !f.is_global_rooted() {
        return Err(MinerError::NotGlobalRooted(crate::syntax::render(f)));
    }
    let mut ev = Evaluator::new(g);
    let value = global_value(&mut ev, f);
    debug_assert!((0..g.node_count()).all(|v| ev.check(v, f) == value));
    Ok(value)
}

fn global_value(ev: &mut Evaluator<'_>, f: &Formula) -> bool {
    match f.node() {
        Node::Bot => false,
        Node::Not(a) => !global_value(ev, a),
        Node::And(fs) => fs.iter().all(|a| global_value(ev, a)),
        Node::Or(fs) => fs.iter().any(|a| global_value(ev, a)),
        Node::Global(q, args) => {
            let n = ev.graph().node_count();
            if q.width() == 1 {
                let e = ev.extension(&args[0]);
                q.accepts(n, e.iter().filter(|&&b| b).count())
            } else {
                let e1 = ev.extension(&args[0]);
                let e2 = ev.extension(&args[1]);
                let mut p = VennProfile::default();
                for (a, b) in e1.iter().zip(e2.iter()) {
                    match (a, b) {
                        (true, true) => p.both += 1,
                        (true, false) => p.first_only += 1,
                        (false, true) => p.second_only += 1,
                        (false, false) => p.neither += 1,
                    }
                }
                q.accepts_venn(p)
            }
        }
        Node::Prop(_) | Node::Modal(..) => unreachable!("checked global-rooted"),
    }
}

pub fn score(bundle: &DatasetBundle, f: &Formula, positive_class: usize) -> Result<Score, MinerError> {
    if bundle.is_empty() {
        return Err(MinerError::EmptyBundle);
    }
    let sat = ExecMode::default().try_map_range(bundle.len(), |g| graph_satisfies(&bundle.graphs[g], f))?;
    let correct = sat.iter().zip(&bundle.graph_class).filter(|(&s, &c)| s == (c == positive_class)).count();
    let accuracy = 100.0 * correct as f64 / bundle.len() as f64;
    Ok(Score {
        accuracy,
        oriented_accuracy: accuracy.max(100.0 - accuracy),
        satisfied_means_positive: 2 * correct >= bundle.len(),
    })
}

/// Rewrites `l<k>` atoms (as written by a user) to label ids: `l<k>` is the
/// raw label value `k - base`. Values absent from the alphabet become `false`.
pub fn resolve_labels(f: &Formula, bundle: &DatasetBundle, base: i64) -> Formula {
    f.map_props(&|k| match bundle.label_id_of_raw(k as i64 - base) {
        Some(id) => Formula::prop(id),
        None => Formula::bot(),
    })
}

/// Renders label ids as `l<raw + base>`.
pub fn render_labels(f: &Formula, bundle: &DatasetBundle, base: i64) -> String {
    render_with(f, &|id| match bundle.label_alphabet.get(id as usize).and_then(|s| s.trim().parse::<i64>().ok()) {
        Some(raw) => format!("l{}", raw + base),
        None => format!("l{id}"),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    And,
    Or,
    Other,
}

fn shape(f: &Formula) -> Shape {
    match f.node() {
        Node::And(_) => Shape::And,
        Node::Or(_) => Shape::Or,
        _ => Shape::Other,
    }
}

/// Size a formula contributes as a member of an n-ary `op` node.
fn contribution(f: &Formula, op: Shape) -> u64 {
    if shape(f) == op {
        f.size() - 1
    } else {
        f.size()
    }
}

fn members(f: &Formula, op: Shape) -> Vec<Formula> {
    match (op, f.node()) {
        (Shape::And, Node::And(fs)) | (Shape::Or, Node::Or(fs)) => fs.clone(),
        _ => vec![f.clone()],
    }
}

fn combine(a: &Formula, b: &Formula, op: Shape) -> Formula {
    let mut fs = members(a, op);
    fs.extend(members(b, op));
    if op == Shape::And {
        Formula::and_canonical(fs)
    } else {
        Formula::or_canonical(fs)
    }
}

fn hash128(words: &[u64]) -> u128 {
    let mix = |mut h: u64, w: u64, k: u64| {
        h ^= w.wrapping_mul(k);
        h = h.rotate_left(29).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h ^ (h >> 31)
    };
    let (mut a, mut b) = (0x243f_6a88_85a3_08d3u64, 0x1319_8a2e_0370_7344u64);
    for &w in words {
        a = mix(a, w, 0xbf58_476d_1ce4_e5b9);
        b = mix(b, w, 0x94d0_49bb_1331_11eb);
    }
    (a as u128) << 64 | b as u128
}

/// Dataset-wide node indexing.
struct Space {
    nodes: usize,
    graphs: usize,
    graph_words: usize,
    labels: Vec<u32>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    ranges: Vec<(usize, usize)>,
}

impl Space {
    fn new(bundle: &DatasetBundle) -> Self {
        let mut labels = Vec::new();
        let mut adj_start = vec![0u32];
        let mut adj = Vec::new();
        let mut ranges = Vec::new();
        for g in &bundle.graphs {
            let base = labels.len();
            ranges.push((base, base + g.node_count()));
            labels.extend_from_slice(g.labels());
            for v in 0..g.node_count() {
                adj.extend(g.neighbors(v).iter().map(|&u| base as u32 + u));
                adj_start.push(adj.len() as u32);
            }
        }
        Space {
            nodes: labels.len(),
            graphs: bundle.len(),
            graph_words: bundle.len().div_ceil(64),
            labels,
            adj_start,
            adj,
            ranges,
        }
    }

    fn bit(bits: &[u64], i: usize) -> bool {
        bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Vec<u64> {
        let mut out = vec![0u64; n.div_ceil(64)];
        for i in 0..n {
            if f(i) {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    fn complement(bits: &[u64], n: usize) -> Vec<u64> {
        let mut out: Vec<u64> = bits.iter().map(|w| !w).collect();
        if !n.is_multiple_of(64) {
            if let Some(last) = out.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
        out
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[self.adj_start[v] as usize..self.adj_start[v + 1] as usize]
    }

    fn local(&self, op: LocalOp, a: &[u64], b: Option<&[u64]>) -> Vec<u64> {
        match op {
            LocalOp::Not => Space::complement(a, self.nodes),
            LocalOp::And => a.iter().zip(b.expect("binary")).map(|(x, y)| x & y).collect(),
            LocalOp::Or => a.iter().zip(b.expect("binary")).map(|(x, y)| x | y).collect(),
            LocalOp::Diamond => {
                Space::from_fn(self.nodes, |v| self.neighbors(v).iter().any(|&u| Space::bit(a, u as usize)))
            }
            LocalOp::Maj => Space::from_fn(self.nodes, |v| {
                let nb = self.neighbors(v);
                2 * nb.iter().filter(|&&u| Space::bit(a, u as usize)).count() > nb.len()
            }),
        }
    }

    fn count_range(bits: &[u64], start: usize, end: usize) -> usize {
        let mut count = 0;
        let mut i = start;
        while i < end {
            let word = i / 64;
            let lo = i % 64;
            let hi = (end - word * 64).min(64);
            let mask = if hi - lo == 64 { u64::MAX } else { ((1u64 << (hi - lo)) - 1) << lo };
            count += (bits[word] & mask).count_ones() as usize;
            i = word * 64 + hi;
        }
        count
    }

    fn global(&self, q: &Quantifier, a: &[u64]) -> Vec<u64> {
        Space::from_fn(self.graphs, |g| {
            let (s, e) = self.ranges[g];
            q.accepts(e - s, Space::count_range(a, s, e))
        })
    }
}

#[derive(Clone, Copy)]
enum LocalOp {
    Not,
    And,
    Or,
    Diamond,
    Maj,
}

#[derive(Clone, Copy)]
enum Desc {
    Atom(u32),
    Unary(LocalOp, usize),
    Binary(LocalOp, usize, usize),
}

struct Entry {
    formula: Formula,
    bits: Vec<u64>,
}

struct Ranked {
    correct: usize,
    formula: Formula,
    rendering: String,
    satisfied_means_target: bool,
}

struct Miner<'a> {
    bundle: &'a DatasetBundle,
    cfg: &'a MinerConfig,
    space: Space,
    positive: Vec<u64>,
    locals: Vec<Entry>,
    local_by_size: Vec<Vec<usize>>,
    local_seen: HashMap<u128, Vec<usize>>,
    globals: Vec<Entry>,
    global_by_size: Vec<Vec<usize>>,
    global_seen: HashSet<Vec<u64>>,
    top: Vec<Ranked>,
    evaluated: u64,
    exhausted: bool,
    deadline: Option<Instant>,
}

const CHUNK: usize = 4096;

impl Miner<'_> {
    fn out_of_time(&mut self) -> bool {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.exhausted = true;
        }
        self.exhausted
    }

    fn local_descs(&self, size: u64) -> Vec<Desc> {
        let mut out = Vec::new();
        if size == 1 {
            let labels = self.bundle.label_alphabet.len() as u32;
            out.extend((0..labels).map(Desc::Atom));
            return out;
        }
        let ops = &self.cfg.ops;
        let prev = self.local_by_size.get(size as usize - 1).cloned().unwrap_or_default();
        for &i in &prev {
            let f = &self.locals[i].formula;
            if ops.contains(Op::Not) && !matches!(f.node(), Node::Not(_)) {
                out.push(Desc::Unary(LocalOp::Not, i));
            }
            if ops.contains(Op::Diamond) {
                out.push(Desc::Unary(LocalOp::Diamond, i));
            }
            if ops.contains(Op::Maj) {
                out.push(Desc::Unary(LocalOp::Maj, i));
            }
        }
        for (op, shape, local_op) in [(Op::Or, Shape::Or, LocalOp::Or), (Op::And, Shape::And, LocalOp::And)] {
            if !ops.contains(op) {
                continue;
            }
            let stored: Vec<usize> = self.local_by_size.iter().flatten().copied().collect();
            let mut groups: HashMap<u64, Vec<usize>> = HashMap::new();
            for i in stored {
                groups.entry(contribution(&self.locals[i].formula, shape)).or_default().push(i);
            }
            pairs(&groups, size - 1, |a, b| out.push(Desc::Binary(local_op, a, b)));
        }
        out
    }

    fn build_local(&self, d: Desc, size: u64) -> Option<Entry> {
        let maj = || Quantifier::majority();
        let (formula, bits) = match d {
            Desc::Atom(l) => {
                let bits = Space::from_fn(self.space.nodes, |v| self.space.labels[v] == l);
                (Formula::prop(l), bits)
            }
            Desc::Unary(op, i) => {
                let a = &self.locals[i];
                let f = match op {
                    LocalOp::Not => Formula::not(a.formula.clone()),
                    LocalOp::Diamond => Formula::diamond(a.formula.clone()),
                    _ => Formula::modal(maj(), a.formula.clone()),
                };
                if f.modal_depth() + 1 > self.cfg.max_depth {
                    return None;
                }
                (f, self.space.local(op, &a.bits, None))
            }
            Desc::Binary(op, i, j) => {
                let shape = if matches!(op, LocalOp::And) { Shape::And } else { Shape::Or };
                let (a, b) = (&self.locals[i], &self.locals[j]);
                let f = combine(&a.formula, &b.formula, shape);
                if f.size() != size {
                    return None;
                }
                (f, self.space.local(op, &a.bits, Some(&b.bits)))
            }
        };
        Some(Entry { formula, bits })
    }

    fn store_local(&mut self, e: Entry, size: u64) {
        let h = hash128(&e.bits);
        let bucket = self.local_seen.entry(h).or_default();
        if bucket.iter().any(|&i| self.locals[i].bits == e.bits) {
            return;
        }
        bucket.push(self.locals.len());
        while self.local_by_size.len() <= size as usize {
            self.local_by_size.push(Vec::new());
        }
        self.local_by_size[size as usize].push(self.locals.len());
        self.locals.push(e);
    }

    fn global_quantifiers(&self) -> Vec<Quantifier> {
        let mut qs = Vec::new();
        if self.cfg.ops.contains(Op::GlobalDiamond) {
            qs.push(Quantifier::exists());
        }
        if self.cfg.ops.contains(Op::GlobalMaj) {
            qs.push(Quantifier::majority());
        }
        qs
    }

    /// Scores a graph-level candidate unless its extension was seen before.
    /// Returns false once the candidate budget is used up.
    fn offer_global(&mut self, formula: Formula, bits: Vec<u64>, store: bool) -> bool {
        if self.exhausted {
            return false;
        }
        if self.global_seen.contains(&bits) {
            return true;
        }
        self.evaluated += 1;
        let agree = bits.iter().zip(&self.positive).map(|(a, p)| (!(a ^ p)).count_ones() as usize).sum::<usize>()
            - (self.space.graph_words * 64 - self.space.graphs);
        let (correct, satisfied_means_target) =
            if 2 * agree >= self.space.graphs { (agree, true) } else { (self.space.graphs - agree, false) };
        self.rank(Ranked { correct, rendering: String::new(), formula: formula.clone(), satisfied_means_target });
        if store {
            let size = formula.size() as usize;
            while self.global_by_size.len() <= size {
                self.global_by_size.push(Vec::new());
            }
            self.global_by_size[size].push(self.globals.len());
            self.globals.push(Entry { formula, bits: bits.clone() });
        }
        self.global_seen.insert(bits);
        if self.cfg.candidate_budget.is_some_and(|b| self.evaluated >= b) {
            self.exhausted = true;
            return false;
        }
        true
    }

    fn rank(&mut self, mut r: Ranked) {
        let k = self.cfg.top_k.max(1);
        let beats = |a: &Ranked, b: &Ranked| -> std::cmp::Ordering {
            b.correct
                .cmp(&a.correct)
                .then(a.formula.size().cmp(&b.formula.size()))
                .then_with(|| a.rendering.cmp(&b.rendering))
        };
        if self.top.len() >= k {
            let worst = self.top.last().expect("nonempty");
            if r.correct < worst.correct || (r.correct == worst.correct && r.formula.size() > worst.formula.size()) {
                return;
            }
        }
        r.rendering = render_labels(&r.formula, self.bundle, self.cfg.label_base);
        let pos = self.top.partition_point(|x| beats(x, &r) != std::cmp::Ordering::Greater);
        self.top.insert(pos, r);
        self.top.truncate(k);
    }

    /// Wraps node-level formulas in every global modality and offers them.
    fn globals_from_locals(&mut self, entries: &[Entry], store: bool) -> bool {
        let qs = self.global_quantifiers();
        let space = &self.space;
        let max_depth = self.cfg.max_depth;
        let cands: Vec<(Formula, Vec<u64>)> = self
            .cfg
            .exec
            .map_slice(entries, |e| {
                qs.iter()
                    .filter(|_| e.formula.modal_depth() < max_depth)
                    .map(|q| (Formula::global(q.clone(), e.formula.clone()), space.global(q, &e.bits)))
                    .collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
        for (f, bits) in cands {
            if !self.offer_global(f, bits, store) {
                return false;
            }
        }
        true
    }

    fn run(&mut self) {
        let max = self.cfg.max_size;
        for size in 1..=max {
            if self.out_of_time() {
                return;
            }
            let store = size < max;
            // graph-level candidates of this size
            if size >= 2 && size - 1 <= max.saturating_sub(2) {
                let prev: Vec<usize> = self.local_by_size.get(size as usize - 1).cloned().unwrap_or_default();
                let entries: Vec<Entry> = prev
                    .iter()
                    .map(|&i| Entry { formula: self.locals[i].formula.clone(), bits: self.locals[i].bits.clone() })
                    .collect();
                for chunk in entries.chunks(CHUNK) {
                    if self.out_of_time() || !self.globals_from_locals(chunk, store) {
                        return;
                    }
                }
            }
            if !self.global_boolean(size, store) {
                return;
            }
            // node-level formulas of this size
            if size < max {
                let descs = self.local_descs(size);
                let streamed = size + 1 == max;
                for chunk in descs.chunks(CHUNK) {
                    if self.out_of_time() {
                        return;
                    }
                    let built: Vec<Option<Entry>> = self.cfg.exec.map_slice(chunk, |&d| self.build_local(d, size));
                    if streamed {
                        let mut fresh = Vec::new();
                        for e in built.into_iter().flatten() {
                            if self.local_seen.insert(hash128(&e.bits), Vec::new()).is_none() {
                                fresh.push(e);
                            }
                        }
                        if !self.globals_from_locals(&fresh, false) {
                            return;
                        }
                    } else {
                        for e in built.into_iter().flatten() {
                            self.store_local(e, size);
                        }
                    }
                }
            }
        }
    }

    /// Negations and Boolean combinations of stored graph-level formulas.
    fn global_boolean(&mut self, size: u64, store: bool) -> bool {
        let n = self.space.graphs;
        let mut cands: Vec<(Formula, Vec<u64>)> = Vec::new();
        if self.cfg.ops.contains(Op::Not) && size >= 2 {
            for &i in self.global_by_size.get(size as usize - 1).map(Vec::as_slice).unwrap_or(&[]) {
                let g = &self.globals[i];
                if !matches!(g.formula.node(), Node::Not(_)) {
                    cands.push((Formula::not(g.formula.clone()), Space::complement(&g.bits, n)));
                }
            }
        }
        for (op, shape) in [(Op::Or, Shape::Or), (Op::And, Shape::And)] {
            if !self.cfg.ops.contains(op) {
                continue;
            }
            let mut groups: HashMap<u64, Vec<usize>> = HashMap::new();
            for &i in self.global_by_size.iter().flatten() {
                groups.entry(contribution(&self.globals[i].formula, shape)).or_default().push(i);
            }
            let mut found = Vec::new();
            pairs(&groups, size - 1, |a, b| found.push((a, b)));
            for (a, b) in found {
                let (x, y) = (&self.globals[a], &self.globals[b]);
                let f = combine(&x.formula, &y.formula, shape);
                if f.size() != size {
                    continue;
                }
                let bits = x
                    .bits
                    .iter()
                    .zip(&y.bits)
                    .map(|(p, q)| if shape == Shape::And { p & q } else { p | q })
                    .collect();
                cands.push((f, bits));
            }
        }
        for (f, bits) in cands {
            if f.modal_depth() <= self.cfg.max_depth && !self.offer_global(f, bits, store) {
                return false;
            }
        }
        true
    }
}

/// Unordered pairs of distinct members whose group keys sum to `total`.
fn pairs(groups: &HashMap<u64, Vec<usize>>, total: u64, mut emit: impl FnMut(usize, usize)) {
    for ca in 1..=total / 2 {
        let cb = total - ca;
        let (Some(ga), Some(gb)) = (groups.get(&ca), groups.get(&cb)) else {
            continue;
        };
        if ca == cb {
            for (x, &a) in ga.iter().enumerate() {
                for &b in &ga[x + 1..] {
                    emit(a, b);
                }
            }
        } else {
            for &a in ga {
                for &b in gb {
                    emit(a, b);
                }
            }
        }
    }
}

/// Enumerates global-rooted formulas up to `cfg.max_size` and returns the
/// best classifiers for `cfg.target_class`.
pub fn mine(bundle: &DatasetBundle, cfg: &MinerConfig) -> Result<MinedResult, MinerError> {
    cfg.validate()?;
    if bundle.is_empty() {
        return Err(MinerError::EmptyBundle);
    }
    let space = Space::new(bundle);
    let positive = Space::from_fn(space.graphs, |g| bundle.graph_class[g] == cfg.target_class);
    let mut m = Miner {
        bundle,
        cfg,
        space,
        positive,
        locals: Vec::new(),
        local_by_size: Vec::new(),
        local_seen: HashMap::new(),
        globals: Vec::new(),
        global_by_size: Vec::new(),
        global_seen: HashSet::new(),
        top: Vec::new(),
        evaluated: 0,
        exhausted: false,
        deadline: cfg.time_budget.map(|t| Instant::now() + t),
    };
    m.run();
    let total = bundle.len() as f64;
    Ok(MinedResult {
        target_class: cfg.target_class,
        ranked: m
            .top
            .into_iter()
            .map(|r| MinedFormula {
                size: r.formula.size(),
                formula: r.formula,
                rendering: r.rendering,
                accuracy: 100.0 * r.correct as f64 / total,
                satisfied_means_target: r.satisfied_means_target,
            })
            .collect(),
        candidates_evaluated: m.evaluated,
        budget_exhausted: m.exhausted,
    })
}
