//! Canonical pruned node signatures.
//!
//! A node's signature records its prior color and, for every quantifier, the
//! acceptance behavior over unions of its neighbors' colors. Colors whose
//! presence never changes acceptance are pruned, so two nodes get equal
//! signatures exactly when they are equivalent for the quantifier set.
//!
//! Encoding (one `u64` per word):
//!
//! ```text
//! counting: prior FAST m (color count){m}
//! generic:  prior GENERIC record* REALIZED k color{k}
//! record:   ANTICHAIN (len color{len})* END
//!         | TABLE k color{k} n word{n}        (2^k acceptance bits)
//!         | PAIR_TABLE k color{k} n word{n}   (4^k acceptance bits)
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use crate::antichain::for_each_minimal;
use crate::quantifier::{Quantifier, VennProfile};

use super::key::WordSink;

const FAST: u64 = 1;
const GENERIC: u64 = 2;
const ANTICHAIN: u64 = 10;
const TABLE: u64 = 11;
const PAIR_TABLE: u64 = 12;
const REALIZED: u64 = 20;
const END: u64 = u64::MAX;

/// Loop iterations between deadline checks.
const CHECK_EVERY: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum SigError {
    Size { quantifier: String, found: usize, cap: usize },
    Timeout,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Budget {
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { deadline: None }
    }

    pub fn check(&self) -> Result<(), SigError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(SigError::Timeout),
            _ => Ok(()),
        }
    }
}

/// How neighbor colors are summarized.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Mode<'q> {
    /// Color multiset; equivalent to every finite counting representation.
    Counting,
    Generic(&'q [Quantifier]),
}

/// Run-length encodes sorted neighbor colors.
pub(crate) fn color_counts(neighbor_colors: &mut [u32]) -> (Vec<u32>, Vec<u64>) {
    neighbor_colors.sort_unstable();
    let mut colors = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for &c in neighbor_colors.iter() {
        if colors.last() == Some(&c) {
            *counts.last_mut().expect("parallel vectors") += 1;
        } else {
            colors.push(c);
            counts.push(1);
        }
    }
    (colors, counts)
}

pub(crate) fn encode<S: WordSink>(
    prior: u32,
    neighbor_colors: &mut [u32],
    mode: Mode<'_>,
    cap: usize,
    budget: &Budget,
    out: &mut S,
) -> Result<(), SigError> {
    let (colors, counts) = color_counts(neighbor_colors);
    out.word(prior as u64);
    let quantifiers = match mode {
        Mode::Counting => {
            out.word(FAST);
            out.word(colors.len() as u64);
            for (&c, &n) in colors.iter().zip(&counts) {
                out.word(c as u64);
                out.word(n);
            }
            return Ok(());
        }
        Mode::Generic(qs) => qs,
    };
    out.word(GENERIC);
    let degree = neighbor_colors.len();
    let mut relevant = vec![false; colors.len()];
    for q in quantifiers {
        if q.width() == 2 {
            let rel = pair_relevance(q, &counts, degree, budget)?;
            let idx: Vec<usize> = (0..colors.len()).filter(|&i| rel[i]).collect();
            if idx.len() > cap / 2 {
                return Err(SigError::Size { quantifier: q.id().into(), found: idx.len(), cap: cap / 2 });
            }
            out.word(PAIR_TABLE);
            emit_colors(out, &colors, &idx);
            let bits = pair_table(q, &counts, &idx, degree, budget)?;
            emit_bits(out, &bits);
            idx.iter().for_each(|&i| relevant[i] = true);
        } else if q.is_monotone() {
            out.word(ANTICHAIN);
            if let Some(t) = q.threshold(degree) {
                for_each_minimal(
                    &counts,
                    t as u64,
                    || budget.check(),
                    |member| {
                        out.word(member.len() as u64);
                        for &i in member {
                            out.word(colors[i] as u64);
                            relevant[i] = true;
                        }
                        Ok(())
                    },
                )?;
            }
            out.word(END);
        } else {
            let accepted: Vec<bool> = (0..=degree).map(|s| q.accepts(degree, s)).collect();
            let rel = single_relevance(&accepted, &counts, budget)?;
            let idx: Vec<usize> = (0..colors.len()).filter(|&i| rel[i]).collect();
            if idx.len() > cap {
                return Err(SigError::Size { quantifier: q.id().into(), found: idx.len(), cap });
            }
            out.word(TABLE);
            emit_colors(out, &colors, &idx);
            let mut bits = Vec::with_capacity(1 << idx.len());
            for mask in 0..1usize << idx.len() {
                if mask % CHECK_EVERY == CHECK_EVERY - 1 {
                    budget.check()?;
                }
                let s: u64 = (0..idx.len()).filter(|b| mask >> b & 1 == 1).map(|b| counts[idx[b]]).sum();
                bits.push(accepted[s as usize]);
            }
            emit_bits(out, &bits);
            idx.iter().for_each(|&i| relevant[i] = true);
        }
    }
    out.word(REALIZED);
    let idx: Vec<usize> = (0..colors.len()).filter(|&i| relevant[i]).collect();
    emit_colors(out, &colors, &idx);
    Ok(())
}

fn emit_colors<S: WordSink>(out: &mut S, colors: &[u32], idx: &[usize]) {
    out.word(idx.len() as u64);
    for &i in idx {
        out.word(colors[i] as u64);
    }
}

fn emit_bits<S: WordSink>(out: &mut S, bits: &[bool]) {
    let words = bits.len().div_ceil(64);
    out.word(words as u64);
    for chunk in bits.chunks(64) {
        out.word(chunk.iter().enumerate().fold(0u64, |w, (i, &b)| w | (b as u64) << i));
    }
}

/// For each color: does adding it to some union of the other colors change
/// acceptance? Decided from the reachable subset sums of the other colors.
fn single_relevance(accepted: &[bool], counts: &[u64], budget: &Budget) -> Result<Vec<bool>, SigError> {
    let degree = accepted.len() - 1;
    let mut out = vec![false; counts.len()];
    for (i, flag) in out.iter_mut().enumerate() {
        budget.check()?;
        let mut reach = vec![false; degree + 1];
        reach[0] = true;
        for (j, &n) in counts.iter().enumerate() {
            if j == i {
                continue;
            }
            for s in (n as usize..=degree).rev() {
                if reach[s - n as usize] {
                    reach[s] = true;
                }
            }
        }
        let n = counts[i] as usize;
        *flag = (0..=degree - n).any(|s| reach[s] && accepted[s] != accepted[s + n]);
    }
    Ok(out)
}

fn profile(cells: [u64; 3], degree: usize) -> VennProfile {
    let [both, first_only, second_only] = cells.map(|c| c as usize);
    VennProfile { both, first_only, second_only, neither: degree - both - first_only - second_only }
}

/// Width-2 relevance: a color is relevant when, for some placement of the
/// other colors into the four Venn cells, moving it between cells changes
/// acceptance.
fn pair_relevance(q: &Quantifier, counts: &[u64], degree: usize, budget: &Budget) -> Result<Vec<bool>, SigError> {
    let mut out = vec![false; counts.len()];
    for (i, flag) in out.iter_mut().enumerate() {
        let mut reach: HashSet<[u64; 3]> = HashSet::from([[0, 0, 0]]);
        for (j, &n) in counts.iter().enumerate() {
            if j == i {
                continue;
            }
            budget.check()?;
            let mut next = HashSet::with_capacity(reach.len() * 4);
            for s in &reach {
                next.insert(*s);
                for cell in 0..3 {
                    let mut t = *s;
                    t[cell] += n;
                    next.insert(t);
                }
            }
            reach = next;
        }
        let n = counts[i];
        for (k, s) in reach.iter().enumerate() {
            if k % CHECK_EVERY == CHECK_EVERY - 1 {
                budget.check()?;
            }
            let base = q.accepts_venn(profile(*s, degree));
            let moved = (0..3).any(|cell| {
                let mut t = *s;
                t[cell] += n;
                q.accepts_venn(profile(t, degree)) != base
            });
            if moved {
                *flag = true;
                break;
            }
        }
    }
    Ok(out)
}

/// Acceptance over all placements of the relevant colors, one base-4 digit
/// per color (0 neither, 1 first only, 2 second only, 3 both).
fn pair_table(
    q: &Quantifier,
    counts: &[u64],
    idx: &[usize],
    degree: usize,
    budget: &Budget,
) -> Result<Vec<bool>, SigError> {
    let total = 1usize << (2 * idx.len());
    let mut bits = Vec::with_capacity(total);
    for a in 0..total {
        if a % CHECK_EVERY == CHECK_EVERY - 1 {
            budget.check()?;
        }
        let mut cells = [0u64; 3];
        for (b, &i) in idx.iter().enumerate() {
            match (a >> (2 * b)) & 3 {
                1 => cells[1] += counts[i],
                2 => cells[2] += counts[i],
                3 => cells[0] += counts[i],
                _ => {}
            }
        }
        bits.push(q.accepts_venn(profile(cells, degree)));
    }
    Ok(bits)
}

/// Per-quantifier part of a [`Signature`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    /// Neighbor color multiset as `(color, count)`, ascending by color.
    Counts(Vec<(u32, u64)>),
    /// Minimal accepted color sets of a monotone width-1 quantifier.
    Antichain(Vec<Vec<u32>>),
    /// Acceptance of every subset of `colors`; bit `i` of the mask indexes `colors[i]`.
    Table { colors: Vec<u32>, accepted: Vec<bool> },
    /// Acceptance of every pair of subsets of `colors`, two bits per color.
    PairTable { colors: Vec<u32>, accepted: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub prior_color: u32,
    /// Union of the colors relevant to some quantifier, ascending.
    pub realized_pruned: Vec<u32>,
    pub records: Vec<Record>,
}

impl Signature {
    /// Decodes a word encoding produced by the refinement engine.
    pub fn from_words(words: &[u64]) -> Option<Signature> {
        let mut it = words.iter().copied();
        let prior_color = it.next()? as u32;
        match it.next()? {
            FAST => {
                let m = it.next()? as usize;
                let mut pairs = Vec::with_capacity(m);
                for _ in 0..m {
                    pairs.push((it.next()? as u32, it.next()?));
                }
                let realized_pruned = pairs.iter().map(|p| p.0).collect();
                Some(Signature { prior_color, realized_pruned, records: vec![Record::Counts(pairs)] })
            }
            GENERIC => {
                let mut records = Vec::new();
                loop {
                    match it.next()? {
                        ANTICHAIN => {
                            let mut members = Vec::new();
                            loop {
                                let len = it.next()?;
                                if len == END {
                                    break;
                                }
                                members.push((0..len).map(|_| it.next().map(|c| c as u32)).collect::<Option<_>>()?);
                            }
                            records.push(Record::Antichain(members));
                        }
                        tag @ (TABLE | PAIR_TABLE) => {
                            let colors = read_colors(&mut it)?;
                            let per = if tag == TABLE { 1 } else { 2 };
                            let entries = 1usize << (per * colors.len());
                            let n = it.next()? as usize;
                            let words: Vec<u64> = (0..n).map(|_| it.next()).collect::<Option<_>>()?;
                            let accepted = (0..entries).map(|i| words[i / 64] >> (i % 64) & 1 == 1).collect();
                            records.push(if tag == TABLE {
                                Record::Table { colors, accepted }
                            } else {
                                Record::PairTable { colors, accepted }
                            });
                        }
                        REALIZED => {
                            let realized_pruned = read_colors(&mut it)?;
                            return Some(Signature { prior_color, realized_pruned, records });
                        }
                        _ => return None,
                    }
                }
            }
            _ => None,
        }
    }

    /// Acceptance of `<q>(OR C)` for the width-1 record `record`, for any
    /// set `C` of colors.
    pub fn accepts(&self, record: usize, c: &BTreeSet<u32>) -> Option<bool> {
        match &self.records[record] {
            Record::Antichain(members) => Some(members.iter().any(|m| m.iter().all(|x| c.contains(x)))),
            Record::Table { colors, accepted } => {
                let mask = colors.iter().enumerate().filter(|(_, x)| c.contains(x)).fold(0usize, |m, (i, _)| m | 1 << i);
                Some(accepted[mask])
            }
            _ => None,
        }
    }

    /// Acceptance of `<q>(OR C1; OR C2)` for the width-2 record `record`.
    pub fn accepts_pair(&self, record: usize, c1: &BTreeSet<u32>, c2: &BTreeSet<u32>) -> Option<bool> {
        match &self.records[record] {
            Record::PairTable { colors, accepted } => {
                let a = colors.iter().enumerate().fold(0usize, |a, (i, x)| {
                    let digit = match (c1.contains(x), c2.contains(x)) {
                        (false, false) => 0,
                        (true, false) => 1,
                        (false, true) => 2,
                        (true, true) => 3,
                    };
                    a | digit << (2 * i)
                });
                Some(accepted[a])
            }
            _ => None,
        }
    }

    /// Human-readable form; `ids` names the quantifier of each record.
    pub fn render(&self, ids: &[&str]) -> String {
        let mut s = format!("c{}", self.prior_color);
        let set = |cs: &[u32]| cs.iter().map(|c| format!("c{c}")).collect::<Vec<_>>().join(",");
        for (i, r) in self.records.iter().enumerate() {
            let id = ids.get(i).copied().unwrap_or("?");
            match r {
                Record::Counts(pairs) => {
                    let body = pairs.iter().map(|(c, n)| format!("c{c}:{n}")).collect::<Vec<_>>().join(", ");
                    let _ = write!(s, " | {{{body}}}");
                }
                Record::Antichain(members) => {
                    let body = members.iter().map(|m| format!("{{{}}}", set(m))).collect::<Vec<_>>().join(" ");
                    let _ = write!(s, " | {id}: {body}");
                }
                Record::Table { colors, accepted } | Record::PairTable { colors, accepted } => {
                    let bits: String = accepted.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    let _ = write!(s, " | {id}: [{}] {bits}", set(colors));
                }
            }
        }
        s
    }
}

fn read_colors(it: &mut impl Iterator<Item = u64>) -> Option<Vec<u32>> {
    let k = it.next()? as usize;
    (0..k).map(|_| it.next().map(|c| c as u32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantifier::builtin;

    fn sig(prior: u32, nbrs: &[u32], qs: &[Quantifier]) -> Signature {
        let mut words = Vec::new();
        let mut nb = nbrs.to_vec();
        encode(prior, &mut nb, Mode::Generic(qs), 16, &Budget::unlimited(), &mut words).unwrap();
        Signature::from_words(&words).unwrap()
    }

    #[test]
    fn geq5_prunes_everything() {
        let q = [builtin("geq:5").unwrap()];
        let a = sig(0, &[1, 2], &q);
        let b = sig(0, &[1], &q);
        assert!(a.realized_pruned.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn exists_keeps_realized_colors() {
        let q = [builtin("exists").unwrap()];
        let s = sig(3, &[7, 5, 7], &q);
        assert_eq!(s.realized_pruned, vec![5, 7]);
        assert_eq!(s.records, vec![Record::Antichain(vec![vec![5], vec![7]])]);
    }

    #[test]
    fn majority_antichains() {
        let q = [builtin("maj").unwrap()];
        assert_eq!(sig(0, &[1, 2], &q).records, vec![Record::Antichain(vec![vec![1, 2]])]);
        let s = sig(0, &[1, 1, 2, 3], &q);
        assert_eq!(s.records, vec![Record::Antichain(vec![vec![1, 2], vec![1, 3]])]);
        assert_eq!(s.render(&["maj"]), "c0 | maj: {c1,c2} {c1,c3}");
    }

    #[test]
    fn general_and_pair_tables() {
        let even = Quantifier::custom_unary("even", false, |_, s| s % 2 == 0);
        let s = sig(0, &[1, 2, 2], &[even]);
        // color 2 appears twice, so it never changes parity
        assert_eq!(s.realized_pruned, vec![1]);
        assert_eq!(s.records, vec![Record::Table { colors: vec![1], accepted: vec![true, false] }]);

        let more = builtin("more").unwrap();
        let s = sig(0, &[1, 2], &[more]);
        assert_eq!(s.realized_pruned, vec![1, 2]);
        let c = |xs: &[u32]| xs.iter().copied().collect::<BTreeSet<u32>>();
        assert_eq!(s.accepts_pair(0, &c(&[1]), &c(&[])), Some(true));
        assert_eq!(s.accepts_pair(0, &c(&[1]), &c(&[2])), Some(false));
        assert_eq!(s.accepts_pair(0, &c(&[1, 2]), &c(&[2])), Some(true));
    }

    #[test]
    fn size_cap_is_enforced() {
        let odd = Quantifier::custom_unary("odd", false, |_, s| s % 2 == 1);
        let nbrs: Vec<u32> = (0..20).collect();
        let mut words = Vec::new();
        let r = encode(0, &mut nbrs.clone(), Mode::Generic(&[odd]), 16, &Budget::unlimited(), &mut words);
        assert!(matches!(r, Err(SigError::Size { found: 20, cap: 16, .. })));
    }

    #[test]
    fn counting_encoding_round_trips() {
        let mut words = Vec::new();
        encode(4, &mut [9, 8, 9], Mode::Counting, 16, &Budget::unlimited(), &mut words).unwrap();
        let s = Signature::from_words(&words).unwrap();
        assert_eq!(s.records, vec![Record::Counts(vec![(8, 1), (9, 2)])]);
        assert_eq!(s.render(&[]), "c4 | {c8:1, c9:2}");
    }
}
