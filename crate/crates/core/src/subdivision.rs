//! Barycentric subdivision of a finite poset and the subposets of it that
//! the gluing formulas consume: chains originating in a sieve, the index
//! posets J_x, the spine sd1(Δⁿ) and the cubes Q_σ.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::poset::{Decomposition, FinPoset};

/// Default cap on the number of chains a subdivision may hold.
pub const DEFAULT_CHAIN_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubdivisionError {
    #[error("subdivision has more than {limit} chains")]
    SizeLimit { limit: usize },
    #[error("elements {0:?} do not form a chain")]
    NotAChain(Vec<usize>),
    #[error("{0} is not contained in {1}")]
    NotIncluded(String, String),
    #[error("chain {0} does not lie in the cosieve")]
    ChainNotInCosieve(String),
    #[error("chain {0} does not originate in the sieve")]
    NotOriginating(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("inclusion {0} <= {1} does not preserve the maximum")]
    MaxMismatch(String, String),
}

/// A nonempty chain of a poset, stored in increasing order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain(Vec<usize>);

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Chain {
    /// Sorts `elems` along the order of `p`; fails unless they are pairwise
    /// comparable and distinct.
    pub fn new(p: &FinPoset, mut elems: Vec<usize>) -> Result<Self, SubdivisionError> {
        if elems.is_empty() {
            return Err(SubdivisionError::NotAChain(elems));
        }
        for i in 0..elems.len() {
            for j in (i + 1)..elems.len() {
                if elems[i] == elems[j] || !p.comparable(elems[i], elems[j]) {
                    return Err(SubdivisionError::NotAChain(elems));
                }
            }
        }
        elems.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if p.leq(a, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        Ok(Chain(elems))
    }

    pub fn singleton(a: usize) -> Self {
        Chain(vec![a])
    }

    /// Trusts the caller that `elems` is strictly increasing.
    pub fn from_sorted(elems: Vec<usize>) -> Self {
        debug_assert!(!elems.is_empty());
        Chain(elems)
    }

    pub fn parse(p: &FinPoset, list: &str) -> Result<Self, SubdivisionError> {
        let elems = list
            .split([',', '<'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| p.index_of(t).map_err(|_| SubdivisionError::OutOfRange(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Chain::new(p, elems)
    }

    pub fn elems(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bottom(&self) -> usize {
        self.0[0]
    }

    pub fn top(&self) -> usize {
        *self.0.last().expect("chains are nonempty")
    }

    pub fn contains(&self, a: usize) -> bool {
        self.0.contains(&a)
    }

    pub fn is_subchain_of(&self, other: &Chain) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }

    /// Inserts `a`, keeping the order of `p`.
    pub fn with(&self, p: &FinPoset, a: usize) -> Chain {
        let mut v = self.0.clone();
        let pos = v.iter().position(|&b| p.lt(a, b)).unwrap_or(v.len());
        v.insert(pos, a);
        Chain(v)
    }

    pub fn without(&self, a: usize) -> Chain {
        Chain(self.0.iter().copied().filter(|&b| b != a).collect())
    }

    pub fn union(&self, p: &FinPoset, other: &Chain) -> Result<Chain, SubdivisionError> {
        let mut v = self.0.clone();
        for &a in &other.0 {
            if !v.contains(&a) {
                v.push(a);
            }
        }
        Chain::new(p, v)
    }

    pub fn label(&self, p: &FinPoset) -> String {
        let parts: Vec<&str> = self.0.iter().map(|&a| p.name(a)).collect();
        format!("[{}]", parts.join("<"))
    }
}

/// A full subposet of sd(P) on a set of chains, with max labels and the
/// marking of cocartesian (top-appending) covering edges.
#[derive(Clone)]
pub struct SdPoset {
    base: FinPoset,
    chains: Vec<Chain>,
    index: HashMap<Chain, usize>,
    poset: FinPoset,
    cocart: Vec<(usize, usize)>,
}

impl fmt::Debug for SdPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdPoset")
            .field("chains", &self.poset.names())
            .field("cocartesian", &self.cocart)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SdDoc {
    pub chains: Vec<String>,
    pub order: Vec<(String, String)>,
    pub max_label: Vec<(String, String)>,
    pub cocartesian: Vec<(String, String)>,
}

impl SdPoset {
    pub fn from_chains(base: &FinPoset, chains: Vec<Chain>) -> Self {
        let names: Vec<String> = chains.iter().map(|c| c.label(base)).collect();
        let poset = FinPoset::from_order_fn(names, |a, b| chains[a].is_subchain_of(&chains[b]));
        let index = chains.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        let cocart = poset
            .covers()
            .iter()
            .copied()
            .filter(|&(a, b)| is_top_append(base, &chains[a], &chains[b]))
            .collect();
        SdPoset { base: base.clone(), chains, index, poset, cocart }
    }

    pub fn base(&self) -> &FinPoset {
        &self.base
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn chain(&self, i: usize) -> &Chain {
        &self.chains[i]
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn index_of(&self, c: &Chain) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// The chains as an abstract poset ordered by inclusion.
    pub fn poset(&self) -> &FinPoset {
        &self.poset
    }

    pub fn max_label(&self, i: usize) -> usize {
        self.chains[i].top()
    }

    pub fn cocartesian_edges(&self) -> &[(usize, usize)] {
        &self.cocart
    }

    pub fn is_cocartesian(&self, a: usize, b: usize) -> bool {
        self.cocart.contains(&(a, b))
    }

    pub fn to_doc(&self) -> SdDoc {
        let name = |i: usize| self.poset.name(i).to_string();
        SdDoc {
            chains: self.poset.names().to_vec(),
            order: self.poset.covers().iter().map(|&(a, b)| (name(a), name(b))).collect(),
            max_label: (0..self.len())
                .map(|i| (name(i), self.base.name(self.max_label(i)).to_string()))
                .collect(),
            cocartesian: self.cocart.iter().map(|&(a, b)| (name(a), name(b))).collect(),
        }
    }
}

impl SdPoset {
    /// DOT rendering of the inclusion order; cocartesian edges are bold.
    pub fn to_dot(&self, graph_name: &str) -> String {
        let name = |i: usize| self.poset.name(i);
        let mut out = format!("digraph \"{graph_name}\" {{\n  rankdir=BT;\n");
        for i in 0..self.len() {
            out.push_str(&format!("  \"{}\" [xlabel=\"{}\"];\n", name(i), self.base.name(self.max_label(i))));
        }
        for &(a, b) in self.poset.covers() {
            let style = if self.is_cocartesian(a, b) { " [style=bold]" } else { "" };
            out.push_str(&format!("  \"{}\" -> \"{}\"{style};\n", name(a), name(b)));
        }
        out.push_str("}\n");
        out
    }
}

fn is_top_append(p: &FinPoset, small: &Chain, big: &Chain) -> bool {
    big.len() == small.len() + 1 && small.is_subchain_of(big) && p.lt(small.top(), big.top())
}

/// All nonempty chains of `p`, in lexicographic order of index lists.
pub fn all_chains(p: &FinPoset, limit: usize) -> Result<Vec<Chain>, SubdivisionError> {
    let mut out = Vec::new();
    let order = p.linear_extension().to_vec();
    let mut stack = Vec::new();
    fn rec(
        p: &FinPoset,
        order: &[usize],
        start: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Chain>,
        limit: usize,
    ) -> Result<(), SubdivisionError> {
        for (pos, &a) in order.iter().enumerate().skip(start) {
            if stack.last().is_none_or(|&t| p.lt(t, a)) {
                stack.push(a);
                if out.len() >= limit {
                    return Err(SubdivisionError::SizeLimit { limit });
                }
                out.push(Chain(stack.clone()));
                rec(p, order, pos + 1, stack, out, limit)?;
                stack.pop();
            }
        }
        Ok(())
    }
    rec(p, &order, 0, &mut stack, &mut out, limit)?;
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// sd(P): every nonempty chain, ordered by inclusion.
pub fn subdivide(p: &FinPoset, limit: usize) -> Result<SdPoset, SubdivisionError> {
    Ok(SdPoset::from_chains(p, all_chains(p, limit)?))
}

/// The full subposet of sd(P) on chains whose minimum lies in the sieve.
pub fn sd_originating(sd: &SdPoset, d: &Decomposition) -> SdPoset {
    let chains = sd.chains().iter().filter(|c| d.in_sieve(c.bottom())).cloned().collect();
    SdPoset::from_chains(sd.base(), chains)
}

/// Splitting of an inclusion σ ⊆ τ into a part adding sieve elements
/// followed by a part adding cosieve elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LRFactorization {
    pub source: Chain,
    pub through: Chain,
    pub target: Chain,
}

impl LRFactorization {
    pub fn left_is_identity(&self) -> bool {
        self.source == self.through
    }

    pub fn right_is_identity(&self) -> bool {
        self.through == self.target
    }
}

pub fn lr_factorize(
    sigma: &Chain,
    tau: &Chain,
    d: &Decomposition,
) -> Result<LRFactorization, SubdivisionError> {
    let p = d.base();
    if !sigma.is_subchain_of(tau) {
        return Err(SubdivisionError::NotIncluded(sigma.label(p), tau.label(p)));
    }
    let through: Vec<usize> = tau
        .elems()
        .iter()
        .copied()
        .filter(|&t| sigma.contains(t) || d.in_sieve(t))
        .collect();
    Ok(LRFactorization { source: sigma.clone(), through: Chain(through), target: tau.clone() })
}

/// Chains τ₀ ∪ x with τ₀ a nonempty chain of the sieve lying below min(x).
pub fn jx_chains(d: &Decomposition, x: &Chain) -> Result<Vec<Chain>, SubdivisionError> {
    let p = d.base();
    if x.elems().iter().any(|&a| d.in_sieve(a)) {
        return Err(SubdivisionError::ChainNotInCosieve(x.label(p)));
    }
    let below: Vec<usize> = d.sieve().into_iter().filter(|&a| p.lt(a, x.bottom())).collect();
    let (sub, emb) = p.subposet(&below);
    let mut out: Vec<Chain> = all_chains(&sub, usize::MAX)?
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.elems().iter().map(|&i| emb[i]).collect();
            v.extend_from_slice(x.elems());
            Chain(v)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// J_x as a poset of chains under inclusion. Empty when nothing in the
/// sieve lies below x.
pub fn jx(d: &Decomposition, x: &Chain) -> Result<SdPoset, SubdivisionError> {
    Ok(SdPoset::from_chains(d.base(), jx_chains(d, x)?))
}

/// sd1(Δⁿ): the chains [k] and [k<k+1].
pub fn sd1(n: usize) -> SdPoset {
    let base = FinPoset::chain(n);
    let mut chains = Vec::new();
    for k in 0..=n {
        chains.push(Chain(vec![k]));
        if k < n {
            chains.push(Chain(vec![k, k + 1]));
        }
    }
    SdPoset::from_chains(&base, chains)
}

/// Q_σ for σ = [i < i+k] in Δⁿ: chains from i to i+k through any subset
/// of the interior points, a (k−1)-cube with σ minimal.
pub fn cube(n: usize, i: usize, k: usize) -> Result<SdPoset, SubdivisionError> {
    if k == 0 || i + k > n {
        return Err(SubdivisionError::OutOfRange(format!("[{} < {}] in Δ^{}", i, i + k, n)));
    }
    let base = FinPoset::chain(n);
    let interior: Vec<usize> = ((i + 1)..(i + k)).collect();
    let mut chains = Vec::with_capacity(1 << interior.len());
    for mask in 0u32..(1u32 << interior.len()) {
        let mut v = vec![i];
        for (b, &a) in interior.iter().enumerate() {
            if mask & (1 << b) != 0 {
                v.push(a);
            }
        }
        v.push(i + k);
        chains.push(Chain(v));
    }
    chains.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(SdPoset::from_chains(&base, chains))
}

/// One step of an elementary factorization of a max-preserving inclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Adds `elem` below the current minimum.
    Prepend { from: Chain, elem: usize },
    /// Adds `elem` strictly between `below` and `above`.
    Interior { from: Chain, elem: usize, below: usize, above: usize },
}

impl Move {
    pub fn from(&self) -> &Chain {
        match self {
            Move::Prepend { from, .. } | Move::Interior { from, .. } => from,
        }
    }

    pub fn elem(&self) -> usize {
        match self {
            Move::Prepend { elem, .. } | Move::Interior { elem, .. } => *elem,
        }
    }
}

/// Factors σ ⊆ τ (same maximum) into single insertions, smallest new
/// element first.
pub fn elementary_factorize(p: &FinPoset, sigma: &Chain, tau: &Chain) -> Result<Vec<Move>, SubdivisionError> {
    let mut added: Vec<usize> = tau.elems().iter().copied().filter(|&a| !sigma.contains(a)).collect();
    added.sort_by(|&a, &b| if p.lt(a, b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
    factorize_in_order(p, sigma, tau, &added)
}

/// Factors σ ⊆ τ inserting the new elements in the given order.
pub fn factorize_in_order(
    p: &FinPoset,
    sigma: &Chain,
    tau: &Chain,
    order: &[usize],
) -> Result<Vec<Move>, SubdivisionError> {
    if !sigma.is_subchain_of(tau) {
        return Err(SubdivisionError::NotIncluded(sigma.label(p), tau.label(p)));
    }
    if sigma.top() != tau.top() {
        return Err(SubdivisionError::MaxMismatch(sigma.label(p), tau.label(p)));
    }
    let mut cur = sigma.clone();
    let mut moves = Vec::with_capacity(order.len());
    for &a in order {
        if cur.contains(a) || !tau.contains(a) {
            return Err(SubdivisionError::NotIncluded(p.name(a).to_string(), tau.label(p)));
        }
        let mv = if p.lt(a, cur.bottom()) {
            Move::Prepend { from: cur.clone(), elem: a }
        } else {
            let pos = cur.elems().iter().position(|&b| p.lt(a, b)).expect("max is preserved");
            Move::Interior { from: cur.clone(), elem: a, below: cur.elems()[pos - 1], above: cur.elems()[pos] }
        };
        cur = cur.with(p, a);
        moves.push(mv);
    }
    if cur != *tau {
        return Err(SubdivisionError::NotIncluded(tau.label(p), cur.label(p)));
    }
    Ok(moves)
}

/// Every max-preserving proper inclusion σ ⊊ τ with |τ| ≤ `max_len`.
pub fn max_preserving_inclusions(
    p: &FinPoset,
    max_len: usize,
    limit: usize,
) -> Result<Vec<(Chain, Chain)>, SubdivisionError> {
    let mut out = Vec::new();
    for tau in all_chains(p, limit)? {
        if tau.len() > max_len || tau.len() < 2 {
            continue;
        }
        let lower = &tau.elems()[..tau.len() - 1];
        for mask in 0..(1u32 << lower.len()) - 1 {
            let mut v: Vec<usize> = (0..lower.len()).filter(|i| mask >> i & 1 == 1).map(|i| lower[i]).collect();
            v.push(tau.top());
            out.push((Chain(v), tau.clone()));
        }
    }
    Ok(out)
}

/// Every order in which the elements of τ \ σ can be inserted.
pub fn insertion_orders(sigma: &Chain, tau: &Chain) -> Vec<Vec<usize>> {
    let added: Vec<usize> = tau.elems().iter().copied().filter(|&a| !sigma.contains(a)).collect();
    let mut out = Vec::new();
    permute(&mut added.clone(), 0, &mut out);
    out
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(v: &[usize]) -> Chain {
        Chain::from_sorted(v.to_vec())
    }

    #[test]
    fn sd_delta1_shape() {
        let sd = subdivide(&FinPoset::chain(1), DEFAULT_CHAIN_LIMIT).unwrap();
        assert_eq!(sd.poset().names(), &["[0]", "[0<1]", "[1]"]);
        assert_eq!(sd.poset().covers(), &[(0, 1), (2, 1)]);
        // [0] -> [0<1] raises the max; [1] -> [0<1] does not
        assert_eq!(sd.cocartesian_edges(), &[(0, 1)]);
    }

    #[test]
    fn inclusions_and_orders_on_delta_two() {
        let p = FinPoset::chain(2);
        let incl = max_preserving_inclusions(&p, 5, DEFAULT_CHAIN_LIMIT).unwrap();
        assert_eq!(incl.len(), 6);
        assert!(incl.iter().all(|(s, t)| s.top() == t.top() && s.is_subchain_of(t) && s != t));
        assert_eq!(insertion_orders(&ch(&[2]), &ch(&[0, 1, 2])).len(), 2);
        assert!(p.to_dot("d2").contains("\"0\" -> \"1\""));
    }

    #[test]
    fn sd_counts() {
        for n in 0..=6 {
            let sd = subdivide(&FinPoset::chain(n), DEFAULT_CHAIN_LIMIT).unwrap();
            assert_eq!(sd.len(), (1 << (n + 1)) - 1);
        }
        assert!(matches!(
            subdivide(&FinPoset::chain(4), 10),
            Err(SubdivisionError::SizeLimit { .. })
        ));
    }

    #[test]
    fn originating_examples() {
        let p = FinPoset::chain(2);
        let sd = subdivide(&p, DEFAULT_CHAIN_LIMIT).unwrap();
        let d = Decomposition::from_sieve(&p, &[0, 1]).unwrap();
        let o = sd_originating(&sd, &d);
        assert_eq!(o.len(), 6);
        assert!(o.index_of(&ch(&[2])).is_none());
        assert_eq!(sd_originating(&sd, &Decomposition::from_sieve(&p, &[0, 1, 2]).unwrap()).len(), 7);
        assert!(sd_originating(&sd, &Decomposition::from_sieve(&p, &[]).unwrap()).is_empty());
    }

    #[test]
    fn lr_examples() {
        let p = FinPoset::chain(2);
        let d01 = Decomposition::from_sieve(&p, &[0, 1]).unwrap();
        let f = lr_factorize(&ch(&[2]), &ch(&[0, 1, 2]), &d01).unwrap();
        assert_eq!(f.through, ch(&[0, 1, 2]));
        assert!(f.right_is_identity());
        let f = lr_factorize(&ch(&[0, 1]), &ch(&[0, 1]), &d01).unwrap();
        assert!(f.left_is_identity() && f.right_is_identity());
        let d0 = Decomposition::from_sieve(&p, &[0]).unwrap();
        let f = lr_factorize(&ch(&[1]), &ch(&[0, 1, 2]), &d0).unwrap();
        assert_eq!(f.through, ch(&[0, 1]));
    }

    #[test]
    fn jx_examples() {
        let p = FinPoset::chain(2);
        let d01 = Decomposition::from_sieve(&p, &[0, 1]).unwrap();
        let j = jx(&d01, &ch(&[2])).unwrap();
        assert_eq!(j.poset().names(), &["[0<1<2]", "[0<2]", "[1<2]"]);
        assert_eq!(j.poset().covers(), &[(1, 0), (2, 0)]);
        let empty = Decomposition::from_sieve(&p, &[]).unwrap();
        assert!(jx(&empty, &ch(&[2])).unwrap().is_empty());
        let d0 = Decomposition::from_sieve(&p, &[0]).unwrap();
        let j = jx(&d0, &ch(&[1, 2])).unwrap();
        assert_eq!(j.chains(), &[ch(&[0, 1, 2])]);
        assert!(matches!(jx(&d0, &ch(&[0, 2])), Err(SubdivisionError::ChainNotInCosieve(_))));
    }

    #[test]
    fn sd1_and_cubes() {
        let s = sd1(2);
        assert_eq!(s.len(), 5);
        assert_eq!(s.poset().covers().len(), 4);
        assert_eq!(s.cocartesian_edges().len(), 2);
        assert_eq!(cube(1, 0, 1).unwrap().len(), 1);
        let c = cube(3, 0, 3).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.poset().covers().len(), 4);
        assert_eq!(c.chain(c.poset().minimal_elements()[0]), &ch(&[0, 3]));
        assert!(cube(2, 1, 2).is_err());
    }

    #[test]
    fn elementary_examples() {
        let p = FinPoset::chain(3);
        let m = elementary_factorize(&p, &ch(&[2]), &ch(&[0, 1, 2])).unwrap();
        assert_eq!(m.len(), 2);
        assert!(matches!(m[0], Move::Prepend { elem: 0, .. }));
        assert!(matches!(m[1], Move::Interior { elem: 1, below: 0, above: 2, .. }));
        assert!(elementary_factorize(&p, &ch(&[1, 2]), &ch(&[1, 2])).unwrap().is_empty());
        let m = elementary_factorize(&p, &ch(&[0, 3]), &ch(&[0, 1, 2, 3])).unwrap();
        assert!(matches!(m[0], Move::Interior { elem: 1, below: 0, above: 3, .. }));
        assert!(matches!(m[1], Move::Interior { elem: 2, below: 1, above: 3, .. }));
        assert!(matches!(
            elementary_factorize(&p, &ch(&[1]), &ch(&[1, 2])),
            Err(SubdivisionError::MaxMismatch(..))
        ));
    }
}
