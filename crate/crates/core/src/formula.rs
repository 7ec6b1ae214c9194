//! Formula AST for propositional logic extended with generalized-quantifier
//! modalities (local and global).
//!
//! Formulas are immutable, reference counted DAGs: cloning is O(1) and type
//! formulas share their subtypes. Every node caches a structural hash, its
//! modal depth and its tree size, so equality, ordering and depth queries do
//! not re-walk shared structure.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::LabelId;
use crate::quantifier::Quantifier;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("quantifier {quantifier} has width {width} but got {args} argument(s)")]
pub struct ArityError {
    pub quantifier: String,
    pub width: usize,
    pub args: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Node {
    Bot,
    Prop(LabelId),
    Not(Formula),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// Quantifier over the out-neighbors of the evaluation node.
    Modal(Quantifier, Vec<Formula>),
    /// Quantifier over all nodes of the evaluation node's graph.
    Global(Quantifier, Vec<Formula>),
}

struct Inner {
    node: Node,
    hash: u64,
    depth: u32,
    size: u64,
}

#[derive(Clone)]
pub struct Formula(Arc<Inner>);

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn mix(h: u64, x: u64) -> u64 {
    let mut z = (h ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z ^= z >> 29;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^ (z >> 32)
}

fn str_hash(s: &str) -> u64 {
    s.bytes().fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

impl Formula {
    fn build(node: Node) -> Formula {
        let (hash, depth, size) = match &node {
            Node::Bot => (mix(1, 0), 0, 1),
            Node::Prop(p) => (mix(2, *p as u64), 0, 1),
            Node::Not(f) => (mix(3, f.0.hash), f.0.depth, f.0.size.saturating_add(1)),
            Node::And(fs) | Node::Or(fs) => {
                let tag = if matches!(node, Node::And(_)) { 4 } else { 5 };
                let h = fs.iter().fold(mix(tag, fs.len() as u64), |h, f| mix(h, f.0.hash));
                let d = fs.iter().map(|f| f.0.depth).max().unwrap_or(0);
                let s = fs.iter().fold(1u64, |s, f| s.saturating_add(f.0.size));
                (h, d, s)
            }
            Node::Modal(q, fs) | Node::Global(q, fs) => {
                let tag = if matches!(node, Node::Modal(..)) { 6 } else { 7 };
                let h = fs.iter().fold(mix(tag, str_hash(q.id())), |h, f| mix(h, f.0.hash));
                let d = fs.iter().map(|f| f.0.depth).max().unwrap_or(0) + 1;
                let s = fs.iter().fold(1u64, |s, f| s.saturating_add(f.0.size));
                (h, d, s)
            }
        };
        Formula(Arc::new(Inner { node, hash, depth, size }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn bot() -> Formula {
        Formula::build(Node::Bot)
    }

    /// `!false`.
    pub fn top() -> Formula {
        Formula::not(Formula::bot())
    }

    pub fn prop(label: LabelId) -> Formula {
        Formula::build(Node::Prop(label))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::build(Node::Not(f))
    }

    /// Conjunction; the empty conjunction is `!false`, a singleton is its
    /// only member.
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::top(),
            1 => fs.pop().expect("one element"),
            _ => Formula::build(Node::And(fs)),
        }
    }

    /// Disjunction; the empty disjunction is `false`.
    pub fn or(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::bot(),
            1 => fs.pop().expect("one element"),
            _ => Formula::build(Node::Or(fs)),
        }
    }

    /// Conjunction in canonical form, assuming the members already are:
    /// nested conjunctions are spliced in, members sorted and deduplicated.
    pub fn and_canonical(fs: Vec<Formula>) -> Formula {
        Formula::and(splice(fs, true))
    }

    /// Disjunction counterpart of [`Formula::and_canonical`].
    pub fn or_canonical(fs: Vec<Formula>) -> Formula {
        Formula::or(splice(fs, false))
    }

    pub fn try_modal(q: Quantifier, args: Vec<Formula>) -> Result<Formula, ArityError> {
        check_arity(&q, &args)?;
        Ok(Formula::build(Node::Modal(q, args)))
    }

    pub fn try_global(q: Quantifier, args: Vec<Formula>) -> Result<Formula, ArityError> {
        check_arity(&q, &args)?;
        Ok(Formula::build(Node::Global(q, args)))
    }

    /// Width-1 local modality. Panics on a width-2 quantifier.
    pub fn modal(q: Quantifier, arg: Formula) -> Formula {
        Formula::try_modal(q, vec![arg]).expect("width-1 quantifier")
    }

    /// Width-1 global modality. Panics on a width-2 quantifier.
    pub fn global(q: Quantifier, arg: Formula) -> Formula {
        Formula::try_global(q, vec![arg]).expect("width-1 quantifier")
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::modal(Quantifier::exists(), f)
    }

    /// `[]f`, stored as `!<>!f`.
    pub fn boxed(f: Formula) -> Formula {
        Formula::not(Formula::diamond(Formula::not(f)))
    }

    pub fn at_least(k: usize, f: Formula) -> Formula {
        Formula::modal(Quantifier::at_least(k), f)
    }

    /// `<>^{=k} f`, stored expanded as `<>^{>=k} f & !<>^{>=k+1} f`.
    pub fn exactly(k: usize, f: Formula) -> Formula {
        Formula::and(vec![
            Formula::at_least(k, f.clone()),
            Formula::not(Formula::at_least(k + 1, f)),
        ])
    }

    pub fn modal_depth(&self) -> usize {
        self.0.depth as usize
    }

    /// Node count with n-ary connectives counted once: `!<U>(l4 | l8 | l20)`
    /// has size 6.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn ptr_eq(a: &Formula, b: &Formula) -> bool {
        Arc::ptr_eq(&a.0, &b.0)
    }

    pub(crate) fn ptr_key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Canonical form: nested conjunctions and disjunctions are flattened,
    /// their members sorted and deduplicated, singletons unwrapped.
    pub fn normalized(&self) -> Formula {
        let mut memo = HashMap::new();
        normalize(self, &mut memo)
    }

    /// True when every proposition and every local modality occurs beneath
    /// some global modality, so the value does not depend on the node.
    pub fn is_global_rooted(&self) -> bool {
        match self.node() {
            Node::Bot | Node::Global(..) => true,
            Node::Prop(_) | Node::Modal(..) => false,
            Node::Not(f) => f.is_global_rooted(),
            Node::And(fs) | Node::Or(fs) => fs.iter().all(Formula::is_global_rooted),
        }
    }

    /// Largest proposition id occurring in the formula.
    pub fn max_prop(&self) -> Option<LabelId> {
        let mut memo = HashMap::new();
        max_prop(self, &mut memo)
    }

    /// Rewrites every proposition.
    pub fn map_props(&self, f: &impl Fn(LabelId) -> Formula) -> Formula {
        match self.node() {
            Node::Bot => self.clone(),
            Node::Prop(p) => f(*p),
            Node::Not(g) => Formula::not(g.map_props(f)),
            Node::And(gs) => Formula::and(gs.iter().map(|g| g.map_props(f)).collect()),
            Node::Or(gs) => Formula::or(gs.iter().map(|g| g.map_props(f)).collect()),
            Node::Modal(q, gs) => {
                Formula::build(Node::Modal(q.clone(), gs.iter().map(|g| g.map_props(f)).collect()))
            }
            Node::Global(q, gs) => {
                Formula::build(Node::Global(q.clone(), gs.iter().map(|g| g.map_props(f)).collect()))
            }
        }
    }
}

fn splice(fs: Vec<Formula>, is_and: bool) -> Vec<Formula> {
    let mut flat = Vec::with_capacity(fs.len());
    for f in fs {
        match (is_and, f.node()) {
            (true, Node::And(inner)) | (false, Node::Or(inner)) => flat.extend(inner.iter().cloned()),
            _ => flat.push(f),
        }
    }
    flat.sort();
    flat.dedup();
    flat
}

fn check_arity(q: &Quantifier, args: &[Formula]) -> Result<(), ArityError> {
    if q.width() != args.len() {
        return Err(ArityError { quantifier: q.id().to_string(), width: q.width(), args: args.len() });
    }
    Ok(())
}

fn normalize(f: &Formula, memo: &mut HashMap<usize, Formula>) -> Formula {
    if let Some(done) = memo.get(&f.ptr_key()) {
        return done.clone();
    }
    let out = match f.node() {
        Node::Bot | Node::Prop(_) => f.clone(),
        Node::Not(g) => Formula::not(normalize(g, memo)),
        Node::And(gs) | Node::Or(gs) => {
            let is_and = matches!(f.node(), Node::And(_));
            let mut flat = Vec::with_capacity(gs.len());
            for g in gs {
                let n = normalize(g, memo);
                match (is_and, n.node()) {
                    (true, Node::And(inner)) | (false, Node::Or(inner)) => {
                        flat.extend(inner.iter().cloned())
                    }
                    _ => flat.push(n),
                }
            }
            flat.sort();
            flat.dedup();
            if is_and {
                Formula::and(flat)
            } else {
                Formula::or(flat)
            }
        }
        Node::Modal(q, gs) => {
            Formula::build(Node::Modal(q.clone(), gs.iter().map(|g| normalize(g, memo)).collect()))
        }
        Node::Global(q, gs) => {
            Formula::build(Node::Global(q.clone(), gs.iter().map(|g| normalize(g, memo)).collect()))
        }
    };
    memo.insert(f.ptr_key(), out.clone());
    out
}

fn max_prop(f: &Formula, memo: &mut HashMap<usize, Option<LabelId>>) -> Option<LabelId> {
    if let Some(&m) = memo.get(&f.ptr_key()) {
        return m;
    }
    let m = match f.node() {
        Node::Bot => None,
        Node::Prop(p) => Some(*p),
        Node::Not(g) => max_prop(g, memo),
        Node::And(gs) | Node::Or(gs) | Node::Modal(_, gs) | Node::Global(_, gs) => {
            gs.iter().filter_map(|g| max_prop(g, memo)).max()
        }
    };
    memo.insert(f.ptr_key(), m);
    m
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}
impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order by structural hash, then structure. Deterministic but not
/// meant to be human-meaningful.
impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.hash.cmp(&other.0.hash).then_with(|| self.0.node.cmp(&other.0.node))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size() <= 200 {
            write!(f, "{}", crate::syntax::render(self))
        } else {
            write!(f, "Formula(size={}, depth={})", self.size(), self.modal_depth())
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::render(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: u32) -> Formula {
        Formula::prop(i)
    }

    #[test]
    fn modal_depth_rules() {
        assert_eq!(p(0).modal_depth(), 0);
        assert_eq!(Formula::bot().modal_depth(), 0);
        let nested = Formula::diamond(Formula::modal(Quantifier::majority(), p(0)));
        assert_eq!(nested.modal_depth(), 2);
        assert_eq!(Formula::and(vec![p(0), Formula::diamond(p(1))]).modal_depth(), 1);
        let g = Formula::global(Quantifier::exists(), Formula::diamond(p(0)));
        assert_eq!(g.modal_depth(), 2);
    }

    #[test]
    fn size_counts_nary_once() {
        let f = Formula::not(Formula::global(
            Quantifier::exists(),
            Formula::or(vec![p(4), p(8), p(20)]),
        ));
        assert_eq!(f.size(), 6);
    }

    #[test]
    fn arity_is_checked() {
        assert!(Formula::try_modal(Quantifier::more(), vec![p(0)]).is_err());
        assert!(Formula::try_modal(Quantifier::more(), vec![p(0), p(1)]).is_ok());
        assert!(Formula::try_global(Quantifier::exists(), vec![]).is_err());
    }

    #[test]
    fn normalization_flattens_and_sorts() {
        let a = Formula::and(vec![p(2), Formula::and(vec![p(1), p(0)]), p(1)]);
        let b = Formula::and(vec![p(0), p(1), p(2)]);
        assert_eq!(a.normalized(), b.normalized());
        assert_ne!(a, b);
        let single = Formula::or(vec![p(3), p(3)]).normalized();
        assert_eq!(single, p(3));
    }

    #[test]
    fn empty_connectives() {
        assert_eq!(Formula::and(vec![]), Formula::top());
        assert_eq!(Formula::or(vec![]), Formula::bot());
    }

    #[test]
    fn global_rootedness() {
        let g = Formula::global(Quantifier::exists(), p(1));
        assert!(Formula::not(g.clone()).is_global_rooted());
        assert!(!Formula::and(vec![g, p(0)]).is_global_rooted());
        assert!(!Formula::diamond(p(0)).is_global_rooted());
    }
}
