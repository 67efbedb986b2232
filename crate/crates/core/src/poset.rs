//! Finite posets, monotone maps, and sieve/cosieve decompositions.
//!
//! Elements carry opaque text identifiers. Internally an element is its
//! position in the element list; the order is stored as a full reflexive
//! transitive closure together with the covering (Hasse) relation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("cycle detected: {0} <= {1} and {1} <= {0}")]
    CycleDetected(String, String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("assignment has no value for `{0}`")]
    MissingAssignment(String),
    #[error("map is not monotone: {0} <= {1} but {2} </= {3}")]
    NotMonotone(String, String, String, String),
    #[error("target of the map must be a two-element chain")]
    NotTwoChain,
    #[error("subset is not downward closed: {0} lies below {1}")]
    NotSieve(String, String),
    #[error("subset is not upward closed: {0} lies above {1}")]
    NotCosieve(String, String),
}

/// Verdict of [`FinPoset::classify_subset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetKind {
    Sieve,
    Cosieve,
    Both,
    Neither,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FinPoset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    leq: Vec<bool>,
    covers: Vec<(usize, usize)>,
    up_covers: Vec<Vec<usize>>,
    down_covers: Vec<Vec<usize>>,
    linear: Vec<usize>,
}

impl fmt::Debug for FinPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let covers: Vec<String> = self
            .covers
            .iter()
            .map(|&(a, b)| format!("{}<{}", self.names[a], self.names[b]))
            .collect();
        f.debug_struct("FinPoset")
            .field("elements", &self.names)
            .field("covers", &covers)
            .finish()
    }
}

/// Serialized form: `{"elements": [...], "leq": [[a, b], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetDoc {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
}

impl FinPoset {
    /// Validates a list of identifiers and generating pairs, applying the
    /// reflexive-transitive closure.
    pub fn new<S: AsRef<str>>(elements: &[S], pairs: &[(S, S)]) -> Result<Self, PosetError> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(PosetError::DuplicateElement(n.clone()));
            }
        }
        let mut idx_pairs = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(b.as_ref().to_string()))?;
            idx_pairs.push((ia, ib));
        }
        Self::from_indices(names, &idx_pairs)
    }

    pub fn from_doc(doc: &PosetDoc) -> Result<Self, PosetError> {
        let pairs: Vec<(&str, &str)> = doc.leq.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let elems: Vec<&str> = doc.elements.iter().map(|s| s.as_str()).collect();
        Self::new(&elems, &pairs)
    }

    /// Emits the covering pairs only; closure is re-applied on read.
    pub fn to_doc(&self) -> PosetDoc {
        PosetDoc {
            elements: self.names.clone(),
            leq: self
                .covers
                .iter()
                .map(|&(a, b)| (self.names[a].clone(), self.names[b].clone()))
                .collect(),
        }
    }

    /// Builds from names and index pairs; names must already be distinct.
    pub fn from_indices(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self, PosetError> {
        let n = names.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in pairs {
            leq[a * n + b] = true;
        }
        // Warshall closure
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i * n + j] && leq[j * n + i] {
                    return Err(PosetError::CycleDetected(names[i].clone(), names[j].clone()));
                }
            }
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self::from_closure(names, index, leq))
    }

    /// Builds from names and an order predicate that is already reflexive,
    /// antisymmetric and transitive (e.g. inclusion of sets).
    pub fn from_order_fn(names: Vec<String>, leq_fn: impl Fn(usize, usize) -> bool) -> Self {
        let n = names.len();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = a == b || leq_fn(a, b);
            }
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self::from_closure(names, index, leq)
    }

    fn from_closure(names: Vec<String>, index: HashMap<String, usize>, leq: Vec<bool>) -> Self {
        let n = names.len();
        let lt = |a: usize, b: usize| a != b && leq[a * n + b];
        let mut covers = Vec::new();
        let mut up_covers = vec![Vec::new(); n];
        let mut down_covers = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)) {
                    covers.push((a, b));
                    up_covers[a].push(b);
                    down_covers[b].push(a);
                }
            }
        }
        // linear extension: order by number of elements below, ties by index
        let mut linear: Vec<usize> = (0..n).collect();
        let below: Vec<usize> = (0..n).map(|b| (0..n).filter(|&a| leq[a * n + b]).count()).collect();
        linear.sort_by_key(|&a| (below[a], a));
        FinPoset { names, index, leq, covers, up_covers, down_covers, linear }
    }

    /// The chain 0 < 1 < ... < n (the simplex Δⁿ as a poset).
    pub fn chain(n: usize) -> Self {
        let names: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
        let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i + 1)).collect();
        Self::from_indices(names, &pairs).expect("chain is acyclic")
    }

    pub fn antichain(k: usize) -> Self {
        let names: Vec<String> = (0..k).map(|i| i.to_string()).collect();
        Self::from_indices(names, &[]).expect("antichain is acyclic")
    }

    pub fn point() -> Self {
        Self::chain(0)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PosetError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| PosetError::UnknownElement(name.to_string()))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// Covering pairs (a, b): a < b with nothing strictly between.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn upper_covers(&self, a: usize) -> &[usize] {
        &self.up_covers[a]
    }

    pub fn lower_covers(&self, a: usize) -> &[usize] {
        &self.down_covers[a]
    }

    /// Elements in an order compatible with the partial order.
    pub fn linear_extension(&self) -> &[usize] {
        &self.linear
    }

    /// All strict relations a < b, in index order.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.lt(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// All strict triples a < b < c.
    pub fn strict_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (a, b) in self.strict_pairs() {
            for c in 0..self.len() {
                if self.lt(b, c) {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    /// All strict quadruples a < b < c < d.
    pub fn strict_quadruples(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for (a, b, c) in self.strict_triples() {
            for d in 0..self.len() {
                if self.lt(c, d) {
                    out.push((a, b, c, d));
                }
            }
        }
        out
    }

    pub fn up_set(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.leq(a, b)).collect()
    }

    pub fn down_set(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.leq(b, a)).collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.down_covers[a].is_empty()).collect()
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.up_covers[a].is_empty()).collect()
    }

    /// Same elements with the reversed order.
    pub fn opposite(&self) -> Self {
        let n = self.len();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self.leq(b, a);
            }
        }
        Self::from_closure(self.names.clone(), self.index.clone(), leq)
    }

    /// Full subposet on `subset` (kept in the given order), with the
    /// embedding into `self` as the second component.
    pub fn subposet(&self, subset: &[usize]) -> (FinPoset, Vec<usize>) {
        let names: Vec<String> = subset.iter().map(|&a| self.names[a].clone()).collect();
        let k = subset.len();
        let mut leq = vec![false; k * k];
        for (i, &a) in subset.iter().enumerate() {
            for (j, &b) in subset.iter().enumerate() {
                leq[i * k + j] = self.leq(a, b);
            }
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        (Self::from_closure(names, index, leq), subset.to_vec())
    }

    /// Parses a comma separated list of identifiers.
    pub fn parse_subset(&self, list: &str) -> Result<Vec<usize>, PosetError> {
        let mut out = Vec::new();
        for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let i = self.index_of(tok)?;
            if !out.contains(&i) {
                out.push(i);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn mask(&self, subset: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.len()];
        for &a in subset {
            m[a] = true;
        }
        m
    }

    pub fn is_down_closed(&self, mask: &[bool]) -> bool {
        self.sieve_witness(mask).is_none()
    }

    pub fn is_up_closed(&self, mask: &[bool]) -> bool {
        self.cosieve_witness(mask).is_none()
    }

    fn sieve_witness(&self, mask: &[bool]) -> Option<(usize, usize)> {
        self.covers.iter().copied().find(|&(a, b)| mask[b] && !mask[a])
    }

    fn cosieve_witness(&self, mask: &[bool]) -> Option<(usize, usize)> {
        self.covers.iter().copied().find(|&(a, b)| mask[a] && !mask[b])
    }

    pub fn classify_subset(&self, subset: &[usize]) -> SubsetKind {
        let m = self.mask(subset);
        match (self.is_down_closed(&m), self.is_up_closed(&m)) {
            (true, true) => SubsetKind::Both,
            (true, false) => SubsetKind::Sieve,
            (false, true) => SubsetKind::Cosieve,
            (false, false) => SubsetKind::Neither,
        }
    }

    pub fn classify_names<S: AsRef<str>>(&self, subset: &[S]) -> Result<SubsetKind, PosetError> {
        let idx = subset
            .iter()
            .map(|s| self.index_of(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.classify_subset(&idx))
    }

    /// Every upward closed subset, each sorted by index. Output order:
    /// by size, then lexicographic.
    pub fn cosieves(&self) -> Vec<Vec<usize>> {
        let order: Vec<usize> = self.linear.iter().rev().copied().collect();
        let mut mask = vec![false; self.len()];
        let mut out = Vec::new();
        self.cosieves_rec(&order, 0, &mut mask, &mut out);
        for c in out.iter_mut() {
            c.sort_unstable();
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    fn cosieves_rec(&self, order: &[usize], pos: usize, mask: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if pos == order.len() {
            out.push((0..self.len()).filter(|&a| mask[a]).collect());
            return;
        }
        let a = order[pos];
        self.cosieves_rec(order, pos + 1, mask, out);
        // elements above `a` come earlier in `order`, so their membership is decided
        if self.up_covers[a].iter().all(|&b| mask[b]) {
            mask[a] = true;
            self.cosieves_rec(order, pos + 1, mask, out);
            mask[a] = false;
        }
    }

    pub fn sieves(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.len()).collect();
        let mut out: Vec<Vec<usize>> = self
            .cosieves()
            .into_iter()
            .map(|c| all.iter().copied().filter(|a| !c.contains(a)).collect())
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// The poset of cosieves ordered by inclusion, i.e. the open sets of the
    /// Alexandroff topology. Returned with the cosieve each element names.
    pub fn cosieve_lattice(&self) -> (FinPoset, Vec<Vec<usize>>) {
        let cs = self.cosieves();
        let names: Vec<String> = cs.iter().map(|c| self.subset_label(c)).collect();
        let mut pairs = Vec::new();
        for (i, a) in cs.iter().enumerate() {
            for (j, b) in cs.iter().enumerate() {
                if i != j && a.iter().all(|x| b.contains(x)) {
                    pairs.push((i, j));
                }
            }
        }
        let lattice = FinPoset::from_indices(names, &pairs).expect("inclusion is a partial order");
        (lattice, cs)
    }

    pub fn subset_label(&self, subset: &[usize]) -> String {
        let inner: Vec<&str> = subset.iter().map(|&a| self.name(a)).collect();
        format!("{{{}}}", inner.join(","))
    }

    /// Hasse diagram in Graphviz DOT syntax, edges pointing upward.
    pub fn to_dot(&self, graph_name: &str) -> String {
        let mut out = format!("digraph \"{graph_name}\" {{\n  rankdir=BT;\n");
        for n in &self.names {
            out.push_str(&format!("  \"{n}\";\n"));
        }
        for &(a, b) in &self.covers {
            out.push_str(&format!("  \"{}\" -> \"{}\";\n", self.names[a], self.names[b]));
        }
        out.push_str("}\n");
        out
    }
}

/// A monotone map between finite posets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneMap {
    source: FinPoset,
    target: FinPoset,
    assignment: Vec<usize>,
}

/// Serialized form: `{"assignment": {a: x, ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDoc {
    pub assignment: BTreeMap<String, String>,
}

impl MonotoneMap {
    pub fn new(source: FinPoset, target: FinPoset, assignment: Vec<usize>) -> Result<Self, PosetError> {
        if assignment.len() != source.len() {
            let missing = source.names().get(assignment.len()).cloned().unwrap_or_default();
            return Err(PosetError::MissingAssignment(missing));
        }
        if let Some(&bad) = assignment.iter().find(|&&x| x >= target.len()) {
            return Err(PosetError::UnknownElement(bad.to_string()));
        }
        for &(a, b) in source.covers() {
            let (fa, fb) = (assignment[a], assignment[b]);
            if !target.leq(fa, fb) {
                return Err(PosetError::NotMonotone(
                    source.name(a).to_string(),
                    source.name(b).to_string(),
                    target.name(fa).to_string(),
                    target.name(fb).to_string(),
                ));
            }
        }
        Ok(MonotoneMap { source, target, assignment })
    }

    pub fn from_names(
        source: FinPoset,
        target: FinPoset,
        assignment: &BTreeMap<String, String>,
    ) -> Result<Self, PosetError> {
        let mut out = Vec::with_capacity(source.len());
        for a in source.names() {
            let img = assignment
                .get(a)
                .ok_or_else(|| PosetError::MissingAssignment(a.clone()))?;
            out.push(target.index_of(img)?);
        }
        for k in assignment.keys() {
            source.index_of(k)?;
        }
        Self::new(source, target, out)
    }

    pub fn identity(p: &FinPoset) -> Self {
        MonotoneMap { source: p.clone(), target: p.clone(), assignment: (0..p.len()).collect() }
    }

    pub fn to_doc(&self) -> MapDoc {
        MapDoc {
            assignment: (0..self.source.len())
                .map(|a| (self.source.name(a).to_string(), self.target.name(self.assignment[a]).to_string()))
                .collect(),
        }
    }

    pub fn source(&self) -> &FinPoset {
        &self.source
    }

    pub fn target(&self) -> &FinPoset {
        &self.target
    }

    pub fn apply(&self, a: usize) -> usize {
        self.assignment[a]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn fiber(&self, x: usize) -> Vec<usize> {
        (0..self.source.len()).filter(|&a| self.assignment[a] == x).collect()
    }

    /// Preimage of a subset of the target.
    pub fn preimage(&self, subset: &[usize]) -> Vec<usize> {
        (0..self.source.len()).filter(|&a| subset.contains(&self.assignment[a])).collect()
    }

    pub fn compose(&self, after: &MonotoneMap) -> MonotoneMap {
        let assignment = self.assignment.iter().map(|&x| after.assignment[x]).collect();
        MonotoneMap { source: self.source.clone(), target: after.target.clone(), assignment }
    }
}

/// A sieve together with its complementary cosieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    base: FinPoset,
    in_sieve: Vec<bool>,
}

impl Decomposition {
    pub fn from_sieve(base: &FinPoset, sieve: &[usize]) -> Result<Self, PosetError> {
        let mask = base.mask(sieve);
        if let Some((a, b)) = base.sieve_witness(&mask) {
            return Err(PosetError::NotSieve(base.name(a).to_string(), base.name(b).to_string()));
        }
        Ok(Decomposition { base: base.clone(), in_sieve: mask })
    }

    pub fn from_cosieve(base: &FinPoset, cosieve: &[usize]) -> Result<Self, PosetError> {
        let mask = base.mask(cosieve);
        if let Some((a, b)) = base.cosieve_witness(&mask) {
            return Err(PosetError::NotCosieve(base.name(b).to_string(), base.name(a).to_string()));
        }
        Ok(Decomposition { base: base.clone(), in_sieve: mask.iter().map(|m| !m).collect() })
    }

    /// Fibers over 0 and 1 of a monotone map to the two-element chain.
    pub fn from_map(pi: &MonotoneMap) -> Result<Self, PosetError> {
        let t = pi.target();
        if t.len() != 2 || !t.lt(0, 1) {
            return Err(PosetError::NotTwoChain);
        }
        let in_sieve = (0..pi.source().len()).map(|a| pi.apply(a) == 0).collect();
        Ok(Decomposition { base: pi.source().clone(), in_sieve })
    }

    pub fn base(&self) -> &FinPoset {
        &self.base
    }

    pub fn in_sieve(&self, a: usize) -> bool {
        self.in_sieve[a]
    }

    pub fn in_cosieve(&self, a: usize) -> bool {
        !self.in_sieve[a]
    }

    pub fn sieve(&self) -> Vec<usize> {
        (0..self.base.len()).filter(|&a| self.in_sieve[a]).collect()
    }

    pub fn cosieve(&self) -> Vec<usize> {
        (0..self.base.len()).filter(|&a| !self.in_sieve[a]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_circle() -> FinPoset {
        FinPoset::new(
            &["a", "b", "u", "v"],
            &[("a", "u"), ("a", "v"), ("b", "u"), ("b", "v")],
        )
        .unwrap()
    }

    #[test]
    fn closure_adds_transitive_pair() {
        let p = FinPoset::new(&["0", "1", "2"], &[("0", "1"), ("1", "2")]).unwrap();
        assert!(p.leq(0, 2));
        assert_eq!(p.covers(), &[(0, 1), (1, 2)]);
        assert_eq!(p, FinPoset::chain(2));
    }

    #[test]
    fn one_point_and_cycles() {
        let p = FinPoset::new::<&str>(&["a"], &[]).unwrap();
        assert_eq!(p.len(), 1);
        let err = FinPoset::new(&["a", "b"], &[("a", "b"), ("b", "a")]).unwrap_err();
        assert!(matches!(err, PosetError::CycleDetected(_, _)));
        assert!(matches!(
            FinPoset::new(&["a", "a"], &[]).unwrap_err(),
            PosetError::DuplicateElement(_)
        ));
        assert!(matches!(
            FinPoset::new(&["a"], &[("a", "z")]).unwrap_err(),
            PosetError::UnknownElement(_)
        ));
    }

    #[test]
    fn classify_examples() {
        let p = FinPoset::chain(2);
        assert_eq!(p.classify_names(&["0", "1"]).unwrap(), SubsetKind::Sieve);
        assert_eq!(p.classify_names(&["1"]).unwrap(), SubsetKind::Neither);
        assert_eq!(p.classify_names::<&str>(&[]).unwrap(), SubsetKind::Both);
        assert_eq!(p.classify_names(&["2"]).unwrap(), SubsetKind::Cosieve);
        assert!(p.classify_names(&["7"]).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let d2 = FinPoset::chain(2);
        let d1 = FinPoset::chain(1);
        let pi = MonotoneMap::new(d2.clone(), d1.clone(), vec![0, 0, 1]).unwrap();
        let d = Decomposition::from_map(&pi).unwrap();
        assert_eq!(d.sieve(), vec![0, 1]);
        assert_eq!(d.cosieve(), vec![2]);
        let c0 = MonotoneMap::new(d2.clone(), d1.clone(), vec![0, 0, 0]).unwrap();
        let d = Decomposition::from_map(&c0).unwrap();
        assert_eq!(d.sieve(), vec![0, 1, 2]);
        assert!(d.cosieve().is_empty());

        let q = pseudo_circle();
        let pi = MonotoneMap::new(q.clone(), d1, vec![0, 0, 1, 1]).unwrap();
        let d = Decomposition::from_map(&pi).unwrap();
        assert_eq!(d.sieve(), vec![0, 1]);
        assert_eq!(d.cosieve(), vec![2, 3]);
        assert_eq!(q.classify_subset(&d.sieve()), SubsetKind::Sieve);
        assert_eq!(q.classify_subset(&d.cosieve()), SubsetKind::Cosieve);
    }

    #[test]
    fn non_monotone_rejected() {
        let d1 = FinPoset::chain(1);
        assert!(matches!(
            MonotoneMap::new(d1.clone(), d1, vec![1, 0]).unwrap_err(),
            PosetError::NotMonotone(..)
        ));
    }

    #[test]
    fn cosieve_lattice_examples() {
        let (l, cs) = FinPoset::chain(1).cosieve_lattice();
        assert_eq!(cs, vec![vec![], vec![1], vec![0, 1]]);
        assert_eq!(l.len(), 3);
        assert!(l.lt(0, 1) && l.lt(1, 2));

        let (l, _) = FinPoset::point().cosieve_lattice();
        assert_eq!(l.len(), 2);
        assert!(l.lt(0, 1));

        let (l, cs) = FinPoset::antichain(2).cosieve_lattice();
        assert_eq!(cs.len(), 4);
        assert_eq!(l.covers().len(), 4);
    }

    #[test]
    fn opposite_reverses() {
        let p = FinPoset::chain(2).opposite();
        assert!(p.leq(2, 0));
        assert!(!p.leq(0, 2));
        assert_eq!(p.linear_extension(), &[2, 1, 0]);
    }

    #[test]
    fn doc_round_trip() {
        let q = pseudo_circle();
        let doc = q.to_doc();
        let json = serde_json::to_string(&doc).unwrap();
        let back: PosetDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(FinPoset::from_doc(&back).unwrap(), q);
    }
}
