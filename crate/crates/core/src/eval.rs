//! Model checking over a single labeled graph.
//!
//! [`Evaluator`] computes the extension of a formula (the set of nodes where
//! it holds) bottom-up and memoizes every subformula it meets, so checking
//! many formulas that share structure costs one pass per distinct node.

use std::collections::HashMap;
use std::sync::Arc;

use crate::formula::{Formula, Node};
use crate::graph::LabeledGraph;
use crate::quantifier::VennProfile;

pub type Extension = Arc<Vec<bool>>;

pub struct Evaluator<'g> {
    graph: &'g LabeledGraph,
    // The formula is kept alongside its extension so the pointer key stays
    // valid for the evaluator's lifetime.
    memo: HashMap<usize, (Formula, Extension)>,
}

impl<'g> Evaluator<'g> {
    pub fn new(graph: &'g LabeledGraph) -> Self {
        Self { graph, memo: HashMap::new() }
    }

    pub fn graph(&self) -> &'g LabeledGraph {
        self.graph
    }

    pub fn check(&mut self, v: usize, f: &Formula) -> bool {
        self.extension(f)[v]
    }

    pub fn extension(&mut self, f: &Formula) -> Extension {
        if let Some((_, ext)) = self.memo.get(&f.ptr_key()) {
            return ext.clone();
        }
        let g = self.graph;
        let n = g.node_count();
        let ext: Vec<bool> = match f.node() {
            Node::Bot => vec![false; n],
            Node::Prop(p) => g.labels().iter().map(|l| l == p).collect(),
            Node::Not(a) => self.extension(a).iter().map(|b| !b).collect(),
            Node::And(fs) => {
                let mut acc = vec![true; n];
                for sub in fs {
                    let e = self.extension(sub);
                    acc.iter_mut().zip(e.iter()).for_each(|(a, b)| *a &= *b);
                }
                acc
            }
            Node::Or(fs) => {
                let mut acc = vec![false; n];
                for sub in fs {
                    let e = self.extension(sub);
                    acc.iter_mut().zip(e.iter()).for_each(|(a, b)| *a |= *b);
                }
                acc
            }
            Node::Modal(q, args) => {
                if q.width() == 1 {
                    let e = self.extension(&args[0]);
                    (0..n)
                        .map(|v| {
                            let nb = g.neighbors(v);
                            let sel = nb.iter().filter(|&&u| e[u as usize]).count();
                            q.accepts(nb.len(), sel)
                        })
                        .collect()
                } else {
                    let e1 = self.extension(&args[0]);
                    let e2 = self.extension(&args[1]);
                    (0..n)
                        .map(|v| q.accepts_venn(venn(g.neighbors(v).iter().map(|&u| u as usize), &e1, &e2)))
                        .collect()
                }
            }
            Node::Global(q, args) => {
                let value = if q.width() == 1 {
                    let e = self.extension(&args[0]);
                    q.accepts(n, e.iter().filter(|&&b| b).count())
                } else {
                    let e1 = self.extension(&args[0]);
                    let e2 = self.extension(&args[1]);
                    q.accepts_venn(venn(0..n, &e1, &e2))
                };
                vec![value; n]
            }
        };
        let ext = Arc::new(ext);
        self.memo.insert(f.ptr_key(), (f.clone(), ext.clone()));
        ext
    }
}

fn venn(domain: impl Iterator<Item = usize>, e1: &[bool], e2: &[bool]) -> VennProfile {
    let mut p = VennProfile::default();
    for u in domain {
        match (e1[u], e2[u]) {
            (true, true) => p.both += 1,
            (true, false) => p.first_only += 1,
            (false, true) => p.second_only += 1,
            (false, false) => p.neither += 1,
        }
    }
    p
}

/// `g, v |= f`.
pub fn check(g: &LabeledGraph, v: usize, f: &Formula) -> bool {
    Evaluator::new(g).check(v, f)
}

pub fn modal_depth(f: &Formula) -> usize {
    f.modal_depth()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantifier::Quantifier;
    use crate::syntax::parse_formula;

    fn triangle() -> LabeledGraph {
        LabeledGraph::from_edges(vec![0, 0, 0], &[(0, 1), (1, 2), (2, 0), (1, 0), (2, 1), (0, 2)], 2).unwrap()
    }

    #[test]
    fn spec_examples() {
        let t = triangle();
        let f = Formula::diamond(Formula::prop(0));
        assert!((0..3).all(|v| check(&t, v, &f)));

        let sink = LabeledGraph::new(vec![0], vec![vec![]], 1).unwrap();
        assert!(!check(&sink, 0, &Formula::modal(Quantifier::majority(), Formula::top())));
        assert!(check(&sink, 0, &Formula::boxed(Formula::bot())));

        let star = LabeledGraph::from_edges(vec![0, 0, 0, 1], &[(0, 1), (0, 2), (0, 3)], 2).unwrap();
        let more = Formula::try_modal(Quantifier::more(), vec![Formula::prop(0), Formula::prop(1)]).unwrap();
        assert!(check(&star, 0, &more));
        let less = Formula::try_modal(Quantifier::more(), vec![Formula::prop(1), Formula::prop(0)]).unwrap();
        assert!(!check(&star, 0, &less));
    }

    #[test]
    fn global_modalities_are_node_independent() {
        let g = LabeledGraph::from_edges(vec![0, 1, 0], &[(0, 1), (1, 2)], 2).unwrap();
        assert!(check(&g, 0, &parse_formula("<U> l1").unwrap()));
        let f = parse_formula("[maj,U] <> true").unwrap();
        // 2 of 3 nodes have a successor.
        assert!((0..3).all(|v| check(&g, v, &f)));
        let h = parse_formula("[maj,U] <> <> l0").unwrap();
        assert!((0..3).all(|v| !check(&g, v, &h)));
    }

    #[test]
    fn duplicate_edges_count_twice() {
        let g = LabeledGraph::new(vec![0, 1, 0], vec![vec![1, 1, 2], vec![], vec![]], 2).unwrap();
        assert!(check(&g, 0, &Formula::modal(Quantifier::majority(), Formula::prop(1))));
        assert!(check(&g, 0, &Formula::at_least(2, Formula::prop(1))));
    }

    #[test]
    fn memo_is_shared_across_queries() {
        let t = triangle();
        let mut ev = Evaluator::new(&t);
        let inner = Formula::diamond(Formula::prop(0));
        let outer = Formula::and(vec![inner.clone(), Formula::boxed(inner.clone())]);
        assert!(ev.check(0, &outer));
        assert!(ev.check(1, &inner));
    }
}
