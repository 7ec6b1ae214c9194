//! Type formulas: graded modal types, majority types and characteristic
//! formulas for arbitrary finite quantifier sets.
//!
//! Everything here is built from the logic side only (formulas and the
//! model checker), independently of the refinement engine, so the two can
//! be cross-checked.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::antichain::minimal_subsets;
use crate::eval::Evaluator;
use crate::formula::Formula;
use crate::graph::{LabelId, LabeledGraph};
use crate::quantifier::{Quantifier, QuantifierSet, VennProfile};

pub const DEFAULT_SIZE_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{found} pruned realized classes exceed the cap of {cap}")]
pub struct SizeError {
    pub found: usize,
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    Graded,
    Majority,
    QCharacteristic,
}

#[derive(Debug, Clone)]
pub struct TypeFormula {
    pub formula: Formula,
    pub depth: usize,
    pub kind: TypeKind,
    pub quantifier_set: Option<QuantifierSet>,
    /// Majority types: the minimal neighbor-type sets `J` with a
    /// `Maj(OR J)` conjunct.
    pub antichain: Vec<Vec<Formula>>,
    expanded: Option<Formula>,
}

impl TypeFormula {
    /// The type with every implicit conjunct spelled out. For majority types
    /// this adds `!Maj(OR J)` for the maximal rejected `J` at every level;
    /// `None` when a level had more than 16 realized neighbor types.
    pub fn expanded(&self) -> Option<&Formula> {
        match self.kind {
            TypeKind::Majority => self.expanded.as_ref(),
            _ => Some(&self.formula),
        }
    }
}

/// `p & !q & ...` over the whole alphabet, true exactly at nodes labeled `label`.
pub fn zero_type(label: LabelId, label_count: u32) -> Formula {
    let mut parts = vec![Formula::prop(label)];
    parts.extend((0..label_count).filter(|&p| p != label).map(|p| Formula::not(Formula::prop(p))));
    Formula::and_canonical(parts)
}

fn zero_types(g: &LabeledGraph) -> Vec<Formula> {
    let by_label: Vec<Formula> = (0..g.label_count()).map(|l| zero_type(l, g.label_count())).collect();
    g.labels().iter().map(|&l| by_label[l as usize].clone()).collect()
}

/// Neighbor classes of `v` with multiplicities, ordered by class index.
fn neighbor_classes(g: &LabeledGraph, v: usize, class_of: &[usize]) -> Vec<(usize, u64)> {
    let mut counts: Vec<(usize, u64)> = Vec::new();
    let mut cs: Vec<usize> = g.neighbors(v).iter().map(|&u| class_of[u as usize]).collect();
    cs.sort_unstable();
    for c in cs {
        match counts.last_mut() {
            Some((last, n)) if *last == c => *n += 1,
            _ => counts.push((c, 1)),
        }
    }
    counts
}

/// Interns equal formulas to one allocation and numbers the classes in
/// first-seen order.
fn classify(level: &mut [Formula]) -> Vec<usize> {
    let mut seen: HashMap<Formula, usize> = HashMap::new();
    let mut reps: Vec<Formula> = Vec::new();
    let mut class_of = Vec::with_capacity(level.len());
    for f in level.iter_mut() {
        let c = *seen.entry(f.clone()).or_insert_with(|| {
            reps.push(f.clone());
            reps.len() - 1
        });
        *f = reps[c].clone();
        class_of.push(c);
    }
    class_of
}

/// Graded modal types of every node at depths `0..=d`; `result[i][v]` is the
/// `i`-type of `v`. Equal types share one allocation.
pub fn graded_types(g: &LabeledGraph, d: usize) -> Vec<Vec<Formula>> {
    let mut rounds = vec![zero_types(g)];
    let zero = rounds[0].clone();
    let mut class_of = classify(&mut rounds[0]);
    for _ in 0..d {
        let prev = rounds.last().expect("round 0");
        let mut next: Vec<Formula> = (0..g.node_count())
            .map(|v| {
                let realized = neighbor_classes(g, v, &class_of);
                let mut parts = vec![zero[v].clone()];
                let mut members = Vec::with_capacity(realized.len());
                for &(c, n) in &realized {
                    let tau = prev[rep_node(&class_of, c)].clone();
                    parts.push(Formula::and_canonical(vec![
                        Formula::at_least(n as usize, tau.clone()),
                        Formula::not(Formula::at_least(n as usize + 1, tau.clone())),
                    ]));
                    members.push(tau);
                }
                parts.push(Formula::boxed(Formula::or_canonical(members)));
                Formula::and_canonical(parts)
            })
            .collect();
        class_of = classify(&mut next);
        rounds.push(next);
    }
    rounds
}

fn rep_node(class_of: &[usize], c: usize) -> usize {
    class_of.iter().position(|&x| x == c).expect("class has a member")
}

pub fn graded_type(g: &LabeledGraph, v: usize, d: usize) -> TypeFormula {
    let formula = graded_types(g, d).swap_remove(d).swap_remove(v);
    TypeFormula { formula, depth: d, kind: TypeKind::Graded, quantifier_set: None, antichain: vec![], expanded: None }
}

/// Majority types of every node at depths `0..=d`.
pub fn majority_types(g: &LabeledGraph, d: usize) -> Vec<Vec<TypeFormula>> {
    let zero = zero_types(g);
    let wrap = |formula: Formula, expanded: Option<Formula>, antichain, depth| TypeFormula {
        formula,
        depth,
        kind: TypeKind::Majority,
        quantifier_set: None,
        antichain,
        expanded,
    };
    let mut compact = zero.clone();
    let mut full: Vec<Option<Formula>> = zero.iter().cloned().map(Some).collect();
    let mut class_of = classify(&mut compact);
    let mut out = vec![compact
        .iter()
        .zip(&full)
        .map(|(c, f)| wrap(c.clone(), f.clone(), vec![], 0))
        .collect::<Vec<_>>()];
    let maj = Quantifier::majority();
    for depth in 1..=d {
        let mut next_compact = Vec::with_capacity(g.node_count());
        let mut next_full = Vec::with_capacity(g.node_count());
        let mut antichains = Vec::with_capacity(g.node_count());
        for v in 0..g.node_count() {
            let realized = neighbor_classes(g, v, &class_of);
            let reps: Vec<usize> = realized.iter().map(|&(c, _)| rep_node(&class_of, c)).collect();
            let weights: Vec<u64> = realized.iter().map(|&(_, n)| n).collect();
            let degree = g.out_degree(v) as u64;
            let threshold = degree / 2 + 1;
            let family = minimal_subsets(&weights, threshold);

            let build = |types: &dyn Fn(usize) -> Formula, negatives: &[Vec<usize>]| {
                let mut parts = vec![zero[v].clone()];
                parts.extend(reps.iter().map(|&u| Formula::diamond(types(u))));
                parts.push(Formula::boxed(Formula::or_canonical(reps.iter().map(|&u| types(u)).collect())));
                for j in &family {
                    let arg = Formula::or_canonical(j.iter().map(|&i| types(reps[i])).collect());
                    parts.push(Formula::modal(maj.clone(), arg));
                }
                for j in negatives {
                    let arg = Formula::or_canonical(j.iter().map(|&i| types(reps[i])).collect());
                    parts.push(Formula::not(Formula::modal(maj.clone(), arg)));
                }
                Formula::and_canonical(parts)
            };
            next_compact.push(build(&|u| compact[u].clone(), &[]));
            let expandable = reps.len() <= DEFAULT_SIZE_CAP && reps.iter().all(|&u| full[u].is_some());
            next_full.push(expandable.then(|| {
                let rejected = maximal_rejected(&weights, threshold);
                build(&|u| full[u].clone().expect("checked"), &rejected)
            }));
            antichains.push(
                family
                    .iter()
                    .map(|j| j.iter().map(|&i| compact[reps[i]].clone()).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            );
        }
        class_of = classify(&mut next_compact);
        out.push(
            next_compact
                .iter()
                .zip(&next_full)
                .zip(antichains)
                .map(|((c, f), a)| wrap(c.clone(), f.clone(), a, depth))
                .collect(),
        );
        compact = next_compact;
        full = next_full;
    }
    out
}

/// Inclusion-maximal index sets with weight below `threshold`.
fn maximal_rejected(weights: &[u64], threshold: u64) -> Vec<Vec<usize>> {
    let m = weights.len();
    let sum = |mask: u32| (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| weights[i]).sum::<u64>();
    (0..1u32 << m)
        .filter(|&mask| sum(mask) < threshold && (0..m).all(|i| mask >> i & 1 == 1 || sum(mask | 1 << i) >= threshold))
        .map(|mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect())
        .collect()
}

pub fn majority_type(g: &LabeledGraph, v: usize, d: usize) -> TypeFormula {
    majority_types(g, d).swap_remove(d).swap_remove(v)
}

/// Largest realized-class count for which relevance is decided by brute
/// force over subsets (pairs of subsets for width 2: half of it).
const RELEVANCE_LIMIT: usize = 20;

/// Builds characteristic formulas level by level for all nodes of one model.
pub struct QCharBuilder<'g> {
    graph: &'g LabeledGraph,
    quantifiers: Vec<Quantifier>,
    qset: QuantifierSet,
    cap: usize,
    evaluator: Evaluator<'g>,
    levels: Vec<Vec<Formula>>,
}

/// Per-node view of the previous level used while building the next one.
struct Level {
    /// Class ids (indices into `reps`) whose formula holds at each node.
    member_of: Vec<Vec<usize>>,
    /// `relevant[x][qi]`: relevant classes at `x` for quantifier `qi`, ascending.
    relevant: Vec<Vec<Vec<usize>>>,
    reps: Vec<Formula>,
}

impl<'g> QCharBuilder<'g> {
    /// Infinite families are expanded against the model's maximum out-degree.
    pub fn new(graph: &'g LabeledGraph, qset: &QuantifierSet, cap: usize) -> Self {
        let expanded = qset.expanded(graph.max_out_degree());
        Self {
            graph,
            quantifiers: expanded.members().to_vec(),
            qset: qset.clone(),
            cap,
            evaluator: Evaluator::new(graph),
            levels: vec![zero_types(graph)],
        }
    }

    /// Characteristic formulas of all nodes at depth `d`.
    pub fn level(&mut self, d: usize) -> Result<&[Formula], SizeError> {
        while self.levels.len() <= d {
            let next = self.next_level()?;
            self.levels.push(next);
        }
        Ok(&self.levels[d])
    }

    pub fn type_formula(&mut self, v: usize, d: usize) -> Result<TypeFormula, SizeError> {
        let formula = self.level(d)?[v].clone();
        Ok(TypeFormula {
            formula,
            depth: d,
            kind: TypeKind::QCharacteristic,
            quantifier_set: Some(self.qset.clone()),
            antichain: vec![],
            expanded: None,
        })
    }

    fn analyse(&mut self) -> Result<Level, SizeError> {
        let g = self.graph;
        let mut prev = self.levels.last().expect("level 0").clone();
        let class_of = classify(&mut prev);
        let class_count = class_of.iter().max().map_or(0, |&c| c + 1);
        let reps: Vec<Formula> = (0..class_count).map(|c| prev[rep_node(&class_of, c)].clone()).collect();
        let exts: Vec<_> = reps.iter().map(|f| self.evaluator.extension(f)).collect();
        let member_of: Vec<Vec<usize>> =
            (0..g.node_count()).map(|y| (0..class_count).filter(|&c| exts[c][y]).collect()).collect();
        let mut relevant = Vec::with_capacity(g.node_count());
        for x in 0..g.node_count() {
            let realized: Vec<usize> = g
                .neighbors(x)
                .iter()
                .flat_map(|&y| member_of[y as usize].iter().copied())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let per_q = self
                .quantifiers
                .iter()
                .map(|q| relevant_classes(g, x, q, &realized, &member_of))
                .collect::<Result<Vec<_>, _>>()?;
            relevant.push(per_q);
        }
        Ok(Level { member_of, relevant, reps })
    }

    fn next_level(&mut self) -> Result<Vec<Formula>, SizeError> {
        let g = self.graph;
        let level = self.analyse()?;
        let zero = &self.levels[0];
        let mut out = Vec::with_capacity(g.node_count());
        for w in 0..g.node_count() {
            let mut parts = vec![zero[w].clone()];
            for (qi, q) in self.quantifiers.iter().enumerate() {
                let mut families: BTreeSet<Vec<usize>> = BTreeSet::new();
                for u in (0..g.node_count()).filter(|&u| zero[u] == zero[w]) {
                    let s: BTreeSet<usize> =
                        level.relevant[u][qi].iter().chain(&level.relevant[w][qi]).copied().collect();
                    let limit = if q.width() == 2 { self.cap / 2 } else { self.cap };
                    if s.len() > limit {
                        return Err(SizeError { found: s.len(), cap: limit });
                    }
                    families.insert(s.into_iter().collect());
                }
                let mut literals: BTreeSet<Vec<u64>> = BTreeSet::new();
                for s in &families {
                    for_each_selection(s, q.width(), |sel| {
                        literals.insert(sel);
                    });
                }
                for sel in literals {
                    parts.push(literal(g, w, q, &sel, &level));
                }
            }
            out.push(Formula::and_canonical(parts));
        }
        Ok(out)
    }
}

/// Enumerates subset selections over `s` as sorted `class << 1 | arg` codes
/// (`arg` is the argument slot for width 2, always 0 for width 1).
fn for_each_selection(s: &[usize], width: usize, mut f: impl FnMut(Vec<u64>)) {
    let m = s.len();
    if width == 1 {
        for mask in 0..1u64 << m {
            f((0..m).filter(|&i| mask >> i & 1 == 1).map(|i| (s[i] as u64) << 1).collect());
        }
    } else {
        for mask in 0..1u64 << (2 * m) {
            let mut sel: Vec<u64> = (0..2 * m)
                .filter(|&b| mask >> b & 1 == 1)
                .map(|b| (s[b / 2] as u64) << 1 | (b % 2) as u64)
                .collect();
            sel.sort_unstable();
            f(sel);
        }
    }
}

fn literal(g: &LabeledGraph, w: usize, q: &Quantifier, sel: &[u64], level: &Level) -> Formula {
    let arg = |slot: u64| -> Vec<usize> {
        sel.iter().filter(|&&code| code & 1 == slot).map(|&code| (code >> 1) as usize).collect()
    };
    let hits = |y: usize, classes: &[usize]| level.member_of[y].iter().any(|c| classes.contains(c));
    let nb = g.neighbors(w);
    let (formula, holds) = if q.width() == 1 {
        let c = arg(0);
        let selected = nb.iter().filter(|&&y| hits(y as usize, &c)).count();
        let f = Formula::modal(q.clone(), Formula::or_canonical(c.iter().map(|&i| level.reps[i].clone()).collect()));
        (f, q.accepts(nb.len(), selected))
    } else {
        let (c1, c2) = (arg(0), arg(1));
        let mut p = VennProfile::default();
        for &y in nb {
            match (hits(y as usize, &c1), hits(y as usize, &c2)) {
                (true, true) => p.both += 1,
                (true, false) => p.first_only += 1,
                (false, true) => p.second_only += 1,
                (false, false) => p.neither += 1,
            }
        }
        let or = |cs: &[usize]| Formula::or_canonical(cs.iter().map(|&i| level.reps[i].clone()).collect());
        let f = Formula::try_modal(q.clone(), vec![or(&c1), or(&c2)]).expect("width 2");
        (f, q.accepts_venn(p))
    };
    if holds {
        formula
    } else {
        Formula::not(formula)
    }
}

/// Classes among `realized` whose membership in some argument can flip the
/// acceptance of `q` at `x`, found by brute force over subsets.
fn relevant_classes(
    g: &LabeledGraph,
    x: usize,
    q: &Quantifier,
    realized: &[usize],
    member_of: &[Vec<usize>],
) -> Result<Vec<usize>, SizeError> {
    let m = realized.len();
    let limit = if q.width() == 2 { RELEVANCE_LIMIT / 2 } else { RELEVANCE_LIMIT };
    if m > limit {
        return Err(SizeError { found: m, cap: limit });
    }
    let masks: Vec<u32> = g
        .neighbors(x)
        .iter()
        .map(|&y| {
            realized
                .iter()
                .enumerate()
                .filter(|(_, c)| member_of[y as usize].contains(c))
                .fold(0u32, |acc, (i, _)| acc | 1 << i)
        })
        .collect();
    let degree = masks.len();
    let mut relevant = vec![false; m];
    if q.width() == 1 {
        let accepted: Vec<bool> = (0..1u32 << m)
            .map(|c| q.accepts(degree, masks.iter().filter(|&&y| y & c != 0).count()))
            .collect();
        for (i, flag) in relevant.iter_mut().enumerate() {
            *flag = (0..1u32 << m).any(|c| c >> i & 1 == 0 && accepted[c as usize] != accepted[(c | 1 << i) as usize]);
        }
    } else {
        let accept = |c1: u32, c2: u32| {
            let mut p = VennProfile::default();
            for &y in &masks {
                match (y & c1 != 0, y & c2 != 0) {
                    (true, true) => p.both += 1,
                    (true, false) => p.first_only += 1,
                    (false, true) => p.second_only += 1,
                    (false, false) => p.neither += 1,
                }
            }
            q.accepts_venn(p)
        };
        for (i, flag) in relevant.iter_mut().enumerate() {
            let bit = 1u32 << i;
            'search: for c1 in (0..1u32 << m).filter(|c| c & bit == 0) {
                for c2 in (0..1u32 << m).filter(|c| c & bit == 0) {
                    let base = accept(c1, c2);
                    if accept(c1 | bit, c2) != base || accept(c1, c2 | bit) != base || accept(c1 | bit, c2 | bit) != base {
                        *flag = true;
                        break 'search;
                    }
                }
            }
        }
    }
    Ok(realized.iter().zip(relevant).filter(|(_, r)| *r).map(|(&c, _)| c).collect())
}

/// Characteristic formula of `v` at depth `d` with respect to `qset`.
pub fn q_characteristic(
    g: &LabeledGraph,
    v: usize,
    d: usize,
    qset: &QuantifierSet,
) -> Result<TypeFormula, SizeError> {
    QCharBuilder::new(g, qset, DEFAULT_SIZE_CAP).type_formula(v, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::check;

    fn path3() -> LabeledGraph {
        LabeledGraph::from_edges(vec![0, 0, 0], &[(0, 1), (1, 2)], 1).unwrap()
    }

    #[test]
    fn zero_type_spells_out_alphabet() {
        let g = LabeledGraph::new(vec![0], vec![vec![]], 2).unwrap();
        let t = graded_type(&g, 0, 0);
        let expected = Formula::and_canonical(vec![Formula::prop(0), Formula::not(Formula::prop(1))]);
        assert_eq!(t.formula, expected);
        assert_eq!(crate::syntax::render(&Formula::and(vec![Formula::prop(0), Formula::not(Formula::prop(1))])), "l0 & !l1");
    }

    #[test]
    fn graded_path_middle() {
        let g = path3();
        let types = graded_types(&g, 1);
        let sigma = zero_type(0, 1);
        let expected = Formula::and_canonical(vec![
            sigma.clone(),
            Formula::at_least(1, sigma.clone()),
            Formula::not(Formula::at_least(2, sigma.clone())),
            Formula::boxed(sigma.clone()),
        ]);
        assert_eq!(types[1][1], expected);
        assert_eq!(types[1][0], types[1][1]);
        assert_ne!(types[1][1], types[1][2]);
        assert_eq!(types[1][2], Formula::and_canonical(vec![sigma.clone(), Formula::boxed(Formula::bot())]));
    }

    #[test]
    fn majority_antichain_example() {
        // center with neighbor types a:2, b:1, c:1 (labels 1, 2, 3)
        let g = LabeledGraph::from_edges(vec![0, 1, 1, 2, 3], &[(0, 1), (0, 2), (0, 3), (0, 4)], 4).unwrap();
        let t = majority_type(&g, 0, 1);
        let a = zero_type(1, 4);
        let b = zero_type(2, 4);
        let c = zero_type(3, 4);
        let mut got: Vec<BTreeSet<Formula>> = t.antichain.iter().map(|j| j.iter().cloned().collect()).collect();
        got.sort();
        let mut want: Vec<BTreeSet<Formula>> =
            vec![[a.clone(), b].into_iter().collect(), [a, c].into_iter().collect()];
        want.sort();
        assert_eq!(got, want);

        let sink = majority_type(&g, 1, 1);
        assert!(sink.antichain.is_empty());
        for v in 0..5 {
            let m = majority_type(&g, v, 1);
            assert!(check(&g, v, &m.formula));
            assert!(check(&g, v, m.expanded().unwrap()));
        }
    }

    #[test]
    fn uniform_star_antichain() {
        let g = LabeledGraph::from_edges(vec![0, 1, 1, 1], &[(0, 1), (0, 2), (0, 3)], 2).unwrap();
        let t = majority_type(&g, 0, 1);
        assert_eq!(t.antichain, vec![vec![zero_type(1, 2)]]);
    }

    #[test]
    fn qchar_star_with_exists() {
        let g = LabeledGraph::from_edges(vec![0, 0, 0, 0], &[(0, 1), (0, 2), (0, 3)], 1).unwrap();
        let q = QuantifierSet::parse("exists").unwrap();
        let t = q_characteristic(&g, 0, 1, &q).unwrap();
        let sigma = zero_type(0, 1);
        let expected = Formula::and_canonical(vec![
            sigma.clone(),
            Formula::diamond(sigma),
            Formula::not(Formula::diamond(Formula::bot())),
        ]);
        assert_eq!(t.formula, expected);
        assert!(check(&g, 0, &t.formula));
        assert!(!check(&g, 1, &t.formula));
    }

    #[test]
    fn qchar_self_realization() {
        let g = crate::graph::random_graph(7, 0.4, 2, 11);
        for spec in ["exists", "exists,maj", "counting", "more", "pct>20"] {
            let q = QuantifierSet::parse(spec).unwrap();
            let mut b = QCharBuilder::new(&g, &q, DEFAULT_SIZE_CAP);
            for d in 0..=2 {
                let level = b.level(d).unwrap().to_vec();
                for (v, f) in level.iter().enumerate() {
                    assert!(check(&g, v, f), "{spec} d={d} v={v}");
                }
            }
        }
    }
}
