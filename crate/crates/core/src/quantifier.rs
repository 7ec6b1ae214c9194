//! Generalized quantifiers as predicates over cardinality profiles.
//!
//! A width-1 quantifier sees `(domain size, selected size)`; a width-2
//! quantifier sees the four Venn-cell sizes of its two selected sets. Since
//! acceptance is computed from cardinalities only, every quantifier here is
//! closed under isomorphism by construction.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("unknown quantifier spec {0:?} (expected exists, maj, geq:K, pct>Q, more or counting)")]
    Unknown(String),
    #[error("bad parameter in quantifier spec {0:?}")]
    BadParameter(String),
    #[error("quantifier {0:?} listed twice")]
    Duplicate(String),
    #[error("empty quantifier set")]
    Empty,
}

/// Cell sizes of two subsets `P1`, `P2` of a domain `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VennProfile {
    pub both: usize,
    pub first_only: usize,
    pub second_only: usize,
    pub neither: usize,
}

impl VennProfile {
    pub fn domain(&self) -> usize {
        self.both + self.first_only + self.second_only + self.neither
    }
    pub fn first(&self) -> usize {
        self.both + self.first_only
    }
    pub fn second(&self) -> usize {
        self.both + self.second_only
    }
}

type UnaryFn = dyn Fn(usize, usize) -> bool + Send + Sync;
type BinaryFn = dyn Fn(VennProfile) -> bool + Send + Sync;

#[derive(Clone)]
enum Kind {
    Exists,
    Majority,
    AtLeast(usize),
    PercentAbove(f64),
    More,
    Unary(Arc<UnaryFn>),
    Binary(Arc<BinaryFn>),
}

/// An isomorphism-closed acceptance predicate of width 1 or 2.
///
/// Equality, ordering and hashing go by `id`.
#[derive(Clone)]
pub struct Quantifier {
    id: String,
    width: u8,
    monotone: bool,
    kind: Kind,
}

impl fmt::Debug for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quantifier({})", self.id)
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

impl PartialEq for Quantifier {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Quantifier {}
impl Hash for Quantifier {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}
impl PartialOrd for Quantifier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Quantifier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

fn format_number(q: f64) -> String {
    if q.fract() == 0.0 {
        format!("{}", q as i64)
    } else {
        format!("{q}")
    }
}

impl Quantifier {
    pub fn exists() -> Self {
        Self { id: "exists".into(), width: 1, monotone: true, kind: Kind::Exists }
    }

    pub fn majority() -> Self {
        Self { id: "maj".into(), width: 1, monotone: true, kind: Kind::Majority }
    }

    pub fn at_least(k: usize) -> Self {
        Self { id: format!("geq:{k}"), width: 1, monotone: true, kind: Kind::AtLeast(k) }
    }

    /// Accepts when strictly more than `q` percent of the domain is selected.
    pub fn percent_above(q: f64) -> Self {
        Self {
            id: format!("pct>{}", format_number(q)),
            width: 1,
            monotone: true,
            kind: Kind::PercentAbove(q),
        }
    }

    /// Rescher's quantifier: `|P1| > |P2|`.
    pub fn more() -> Self {
        Self { id: "more".into(), width: 2, monotone: false, kind: Kind::More }
    }

    /// A user-defined width-1 quantifier over `(domain, selected)`.
    pub fn custom_unary(
        id: impl Into<String>,
        monotone: bool,
        accept: impl Fn(usize, usize) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), width: 1, monotone, kind: Kind::Unary(Arc::new(accept)) }
    }

    /// A user-defined width-2 quantifier over Venn-cell sizes.
    pub fn custom_binary(
        id: impl Into<String>,
        accept: impl Fn(VennProfile) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), width: 2, monotone: false, kind: Kind::Binary(Arc::new(accept)) }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// Declared upward closure in the selected set (width 1 only).
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Width-1 acceptance. `selected <= domain` is the caller's contract.
    pub fn accepts(&self, domain: usize, selected: usize) -> bool {
        debug_assert!(selected <= domain);
        match &self.kind {
            Kind::Exists => selected >= 1,
            Kind::Majority => 2 * selected > domain,
            Kind::AtLeast(k) => selected >= *k,
            Kind::PercentAbove(q) => selected as f64 * 100.0 > q * domain as f64,
            Kind::Unary(f) => f(domain, selected),
            Kind::More | Kind::Binary(_) => {
                panic!("width-2 quantifier {} evaluated with a width-1 profile", self.id)
            }
        }
    }

    /// Width-2 acceptance.
    pub fn accepts_venn(&self, profile: VennProfile) -> bool {
        match &self.kind {
            Kind::More => profile.first() > profile.second(),
            Kind::Binary(f) => f(profile),
            _ => panic!("width-1 quantifier {} evaluated with a width-2 profile", self.id),
        }
    }

    /// Smallest accepted selection size at this domain size, for monotone
    /// quantifiers.
    pub fn threshold(&self, domain: usize) -> Option<usize> {
        (0..=domain).find(|&s| self.accepts(domain, s))
    }
}

/// `{s in 0..=degree | accepts(degree, s)}`, ascending.
pub fn accepted_size_set(q: &Quantifier, degree: usize) -> Vec<usize> {
    (0..=degree).filter(|&s| q.accepts(degree, s)).collect()
}

/// Parses one built-in spec: `exists`, `maj`, `geq:K`, `pct>Q` or `more`.
pub fn builtin(spec: &str) -> Result<Quantifier, SpecError> {
    let spec = spec.trim();
    match spec {
        "exists" => return Ok(Quantifier::exists()),
        "maj" => return Ok(Quantifier::majority()),
        "more" => return Ok(Quantifier::more()),
        _ => {}
    }
    if let Some(k) = spec.strip_prefix("geq:") {
        let k = k.parse::<usize>().map_err(|_| SpecError::BadParameter(spec.into()))?;
        return Ok(Quantifier::at_least(k));
    }
    if let Some(q) = spec.strip_prefix("pct>") {
        let q = q.parse::<f64>().map_err(|_| SpecError::BadParameter(spec.into()))?;
        if !(0.0..100.0).contains(&q) {
            return Err(SpecError::BadParameter(spec.into()));
        }
        return Ok(Quantifier::percent_above(q));
    }
    Err(SpecError::Unknown(spec.into()))
}

/// Infinite quantifier families with a finite representation per degree bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `{geq:k | k in N}`, represented at degree bound `N` by `geq:0..=geq:N`.
    Counting,
}

impl Family {
    pub fn id(&self) -> &'static str {
        match self {
            Family::Counting => "counting",
        }
    }

    pub fn representation(&self, max_degree: usize) -> Vec<Quantifier> {
        match self {
            Family::Counting => (0..=max_degree).map(Quantifier::at_least).collect(),
        }
    }
}

/// An ordered set of quantifiers, optionally including an effectively
/// finite family that is expanded against the input's maximum out-degree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuantifierSet {
    members: Vec<Quantifier>,
    family: Option<Family>,
}

impl QuantifierSet {
    pub fn new(members: Vec<Quantifier>) -> Result<Self, SpecError> {
        Self::with_family(members, None)
    }

    pub fn with_family(members: Vec<Quantifier>, family: Option<Family>) -> Result<Self, SpecError> {
        let mut seen = std::collections::HashSet::new();
        for q in &members {
            if !seen.insert(q.id.clone()) {
                return Err(SpecError::Duplicate(q.id.clone()));
            }
        }
        if members.is_empty() && family.is_none() {
            return Err(SpecError::Empty);
        }
        Ok(Self { members, family })
    }

    /// The counting family (standard WL).
    pub fn counting() -> Self {
        Self { members: Vec::new(), family: Some(Family::Counting) }
    }

    /// `{exists, maj}` (crude WL).
    pub fn crude() -> Self {
        Self { members: vec![Quantifier::exists(), Quantifier::majority()], family: None }
    }

    /// Comma-separated list of built-in specs; `counting` selects the family.
    pub fn parse(spec: &str) -> Result<Self, SpecError> {
        let mut members = Vec::new();
        let mut family = None;
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if part == "counting" {
                if family.is_some() {
                    return Err(SpecError::Duplicate(part.into()));
                }
                family = Some(Family::Counting);
            } else {
                members.push(builtin(part)?);
            }
        }
        Self::with_family(members, family)
    }

    pub fn members(&self) -> &[Quantifier] {
        &self.members
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn is_finite(&self) -> bool {
        self.family.is_none()
    }

    /// Canonical textual form, parseable by [`QuantifierSet::parse`] for
    /// built-in members.
    pub fn spec(&self) -> String {
        let mut parts: Vec<&str> = self.family.iter().map(Family::id).collect();
        parts.extend(self.members.iter().map(Quantifier::id));
        parts.join(",")
    }

    /// A finite set equivalent to this one on nodes of out-degree at most
    /// `max_degree`: the family representation followed by the explicit
    /// members not already in it.
    pub fn expanded(&self, max_degree: usize) -> QuantifierSet {
        let mut members = self.family.map(|f| f.representation(max_degree)).unwrap_or_default();
        for q in &self.members {
            if !members.contains(q) {
                members.push(q.clone());
            }
        }
        QuantifierSet { members, family: None }
    }
}

/// `f(N) = {geq:0, ..., geq:N}`, the counting family's representation at
/// degree bound `N`, as an explicit finite set.
pub fn counting_representation(max_degree: usize) -> QuantifierSet {
    QuantifierSet { members: Family::Counting.representation(max_degree), family: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(spec: &str) -> Quantifier {
        builtin(spec).unwrap()
    }

    #[test]
    fn builtin_examples() {
        assert!(!q("maj").accepts(4, 2));
        assert!(q("maj").accepts(3, 2));
        assert!(q("geq:3").accepts(5, 3));
        assert!(!q("exists").accepts(0, 0));
        let p = VennProfile { both: 0, first_only: 3, second_only: 1, neither: 1 };
        assert!(q("more").accepts_venn(p));
        assert!(q("pct>20").accepts(10, 3));
        assert!(!q("pct>20").accepts(10, 2));
        assert!(!q("pct>20").accepts(0, 0));
        assert_eq!(q("pct>12.5").id(), "pct>12.5");
    }

    #[test]
    fn spec_errors() {
        assert_eq!(builtin("most"), Err(SpecError::Unknown("most".into())));
        assert!(matches!(builtin("geq:x"), Err(SpecError::BadParameter(_))));
        assert!(matches!(builtin("pct>100"), Err(SpecError::BadParameter(_))));
        assert!(matches!(QuantifierSet::parse("exists,exists"), Err(SpecError::Duplicate(_))));
        assert_eq!(QuantifierSet::parse(""), Err(SpecError::Empty));
    }

    #[test]
    fn accepted_sizes() {
        assert_eq!(accepted_size_set(&q("maj"), 4), vec![3, 4]);
        assert_eq!(accepted_size_set(&q("exists"), 3), vec![1, 2, 3]);
        assert!(accepted_size_set(&q("geq:2"), 1).is_empty());
    }

    #[test]
    fn counting_representation_members() {
        let ids = |n| {
            counting_representation(n).members().iter().map(|q| q.id().to_string()).collect::<Vec<_>>()
        };
        assert_eq!(ids(0), vec!["geq:0"]);
        assert_eq!(ids(2), vec!["geq:0", "geq:1", "geq:2"]);
    }

    #[test]
    fn counting_representation_saturates() {
        // at degree <= N every geq:M with M > N rejects everything, so adding
        // it to f(N) cannot separate anything
        for n in 0..=6 {
            for degree in 0..=n {
                for selected in 0..=degree {
                    for m in n + 1..=n + 8 {
                        assert!(!Quantifier::at_least(m).accepts(degree, selected));
                    }
                }
                let profile = |s: usize| -> Vec<bool> {
                    counting_representation(n).members().iter().map(|q| q.accepts(degree, s)).collect()
                };
                for a in 0..=degree {
                    for b in 0..=degree {
                        assert_eq!(profile(a) == profile(b), a == b);
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_flags_hold() {
        let flagged = ["exists", "maj", "geq:0", "geq:3", "pct>20", "pct>90", "pct>0"];
        for spec in flagged {
            let qq = q(spec);
            assert!(qq.is_monotone());
            for d in 0..=32 {
                for s in 0..=d {
                    if qq.accepts(d, s) {
                        assert!((s..=d).all(|t| qq.accepts(d, t)), "{spec} at ({d},{s})");
                    }
                }
            }
        }
        assert!(!q("more").is_monotone());
    }

    #[test]
    fn set_parsing_and_expansion() {
        let set = QuantifierSet::parse("counting, maj").unwrap();
        assert_eq!(set.spec(), "counting,maj");
        let exp = set.expanded(2);
        let ids: Vec<_> = exp.members().iter().map(Quantifier::id).collect();
        assert_eq!(ids, vec!["geq:0", "geq:1", "geq:2", "maj"]);
        assert!(exp.is_finite());
        assert_eq!(QuantifierSet::parse("exists,pct>20,pct>90").unwrap().members().len(), 3);
    }
}
