//! Sections over Δⁿ with vector-space fibers and multiplicity pushforwards
//! τ^q_p(V) = F^{m_pq} ⊗ V. Spines on sd_1(Δⁿ), 1-generation,
//! extendability, the staircase recollement and the norm sequences.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concretecats::{Category, Cone, Matrix, ShapedDiagram, VectCat};
use crate::laxdiagram::LaxDiagram;
use crate::poset::FinPoset;
use crate::rlaxsections::{eval_chain, eval_inclusion, validate_section, CheckResult, Section, SectionError, SectionOf};
use crate::subdivision::Chain;

#[derive(Debug, Error)]
pub enum ExtendError {
    #[error("shape mismatch at {0}")]
    Shape(String),
    #[error("cocycle fails at {0}")]
    Cocycle(String),
    #[error("not extendable: canonical maps at {0:?} are not invertible")]
    NotExtendable(Vec<(usize, usize, usize)>),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Section(#[from] SectionError),
}

/// A lax diagram over Δⁿ whose pushforwards are multiplicity functors and
/// whose cells are can_pqr = M_pqr ⊗ I.
#[derive(Debug, Clone)]
pub struct MultiplicityDiagram {
    n: usize,
    base: FinPoset,
    cat: VectCat,
    mult: Vec<Vec<usize>>,
    can: BTreeMap<(usize, usize, usize), Matrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityDoc {
    pub n: usize,
    #[serde(default = "default_field")]
    pub field: u32,
    pub mult: BTreeMap<String, usize>,
    #[serde(default)]
    pub can: BTreeMap<String, Vec<Vec<i64>>>,
}

fn default_field() -> u32 {
    2
}

fn parse_key(key: &str, len: usize) -> Result<Vec<usize>, ExtendError> {
    let parts: Result<Vec<usize>, _> = key.split('<').map(|s| s.trim().parse::<usize>()).collect();
    match parts {
        Ok(v) if v.len() == len && v.windows(2).all(|w| w[0] < w[1]) => Ok(v),
        _ => Err(ExtendError::Parse(format!("bad key {key:?}"))),
    }
}

impl MultiplicityDiagram {
    pub fn new(
        n: usize,
        field: u32,
        mult: &BTreeMap<(usize, usize), usize>,
        can: BTreeMap<(usize, usize, usize), Matrix>,
    ) -> Result<Self, ExtendError> {
        let d = Self::new_unchecked(n, field, mult, can)?;
        d.check_cocycle()?;
        Ok(d)
    }

    /// Checks shapes only; the cocycle is left to the caller.
    pub fn new_unchecked(
        n: usize,
        field: u32,
        mult: &BTreeMap<(usize, usize), usize>,
        can: BTreeMap<(usize, usize, usize), Matrix>,
    ) -> Result<Self, ExtendError> {
        let base = FinPoset::chain(n);
        let mut m = vec![vec![0; n + 1]; n + 1];
        for (p, q) in base.strict_pairs() {
            m[p][q] = *mult.get(&(p, q)).ok_or_else(|| ExtendError::Shape(format!("multiplicity {p}<{q}")))?;
        }
        for (p, q, r) in base.strict_triples() {
            let c = can.get(&(p, q, r)).ok_or_else(|| ExtendError::Shape(format!("can {p}<{q}<{r}")))?;
            if (c.rows(), c.cols()) != (m[q][r] * m[p][q], m[p][r]) || c.field() != field {
                return Err(ExtendError::Shape(format!("can {p}<{q}<{r}")));
            }
        }
        Ok(MultiplicityDiagram { n, base, cat: VectCat::new(field), mult: m, can })
    }

    /// All multiplicities 1 and all cells identities.
    pub fn strict(n: usize, field: u32) -> Self {
        let base = FinPoset::chain(n);
        let mult = base.strict_pairs().into_iter().map(|k| (k, 1)).collect();
        let can = base.strict_triples().into_iter().map(|t| (t, Matrix::identity(1, field))).collect();
        Self::new(n, field, &mult, can).expect("identity cells satisfy the cocycle")
    }

    pub fn check_cocycle(&self) -> Result<(), ExtendError> {
        for (p, q, r, s) in self.base.strict_quadruples() {
            if !self.cocycle_holds(p, q, r, s) {
                return Err(ExtendError::Cocycle(format!("{p}<{q}<{r}<{s}")));
            }
        }
        Ok(())
    }

    /// (I_{m_rs} ⊗ M_pqr) M_prs = (M_qrs ⊗ I_{m_pq}) M_pqs.
    fn cocycle_holds(&self, p: usize, q: usize, r: usize, s: usize) -> bool {
        let f = self.field();
        let lhs = Matrix::identity(self.mult[r][s], f).kron(&self.can[&(p, q, r)]).mul(&self.can[&(p, r, s)]);
        let rhs = self.can[&(q, r, s)].kron(&Matrix::identity(self.mult[p][q], f)).mul(&self.can[&(p, q, s)]);
        lhs == rhs
    }

    pub fn from_doc(doc: &MultiplicityDoc) -> Result<Self, ExtendError> {
        if !(2..doc.field).take_while(|d| d * d <= doc.field).all(|d| doc.field % d != 0) || doc.field < 2 {
            return Err(ExtendError::Parse(format!("{} is not prime", doc.field)));
        }
        let mut mult = BTreeMap::new();
        for (k, &m) in &doc.mult {
            let v = parse_key(k, 2)?;
            mult.insert((v[0], v[1]), m);
        }
        let mut can = BTreeMap::new();
        for (k, rows) in &doc.can {
            let v = parse_key(k, 3)?;
            let cols = *mult.get(&(v[0], v[2])).ok_or_else(|| ExtendError::Shape(format!("multiplicity {}<{}", v[0], v[2])))?;
            let m = Matrix::from_rows(doc.field, cols, rows).ok_or_else(|| ExtendError::Shape(k.clone()))?;
            can.insert((v[0], v[1], v[2]), m);
        }
        // missing cells default to the identity where that is well-shaped
        for (p, q, r) in FinPoset::chain(doc.n).strict_triples() {
            if can.contains_key(&(p, q, r)) {
                continue;
            }
            let (a, b, c) = (mult.get(&(p, q)), mult.get(&(q, r)), mult.get(&(p, r)));
            if let (Some(&a), Some(&b), Some(&c)) = (a, b, c) {
                if a * b == c {
                    can.insert((p, q, r), Matrix::identity(c, doc.field));
                }
            }
        }
        Self::new(doc.n, doc.field, &mult, can)
    }

    pub fn to_doc(&self) -> MultiplicityDoc {
        MultiplicityDoc {
            n: self.n,
            field: self.field(),
            mult: self.base.strict_pairs().into_iter().map(|(p, q)| (format!("{p}<{q}"), self.mult[p][q])).collect(),
            can: self
                .can
                .iter()
                .map(|(&(p, q, r), m)| {
                    let rows = m.to_rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect();
                    (format!("{p}<{q}<{r}"), rows)
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> u32 {
        self.cat.field()
    }

    pub fn mult(&self, p: usize, q: usize) -> usize {
        self.mult[p][q]
    }

    pub fn can_matrix(&self, p: usize, q: usize, r: usize) -> &Matrix {
        &self.can[&(p, q, r)]
    }

    /// Replaces one cell, re-checking the cocycle.
    pub fn with_can(&self, t: (usize, usize, usize), m: Matrix) -> Result<Self, ExtendError> {
        let mut can = self.can.clone();
        can.insert(t, m);
        Self::new(self.n, self.field(), &self.mult_map(), can)
    }

    fn mult_map(&self) -> BTreeMap<(usize, usize), usize> {
        self.base.strict_pairs().into_iter().map(|(p, q)| ((p, q), self.mult[p][q])).collect()
    }

    /// The restriction to [a : b], reindexed over Δ^{b−a}.
    pub fn interval(&self, a: usize, b: usize) -> Self {
        assert!(a <= b && b <= self.n);
        let sub = FinPoset::chain(b - a);
        let mult = sub.strict_pairs().into_iter().map(|(p, q)| ((p, q), self.mult[p + a][q + a])).collect();
        let can = sub
            .strict_triples()
            .into_iter()
            .map(|(p, q, r)| ((p, q, r), self.can[&(p + a, q + a, r + a)].clone()))
            .collect();
        Self::new(b - a, self.field(), &mult, can).expect("restriction of a valid diagram")
    }
}

impl LaxDiagram for MultiplicityDiagram {
    type Cat = VectCat;

    fn base(&self) -> &FinPoset {
        &self.base
    }

    fn fiber(&self, _p: usize) -> &VectCat {
        &self.cat
    }

    fn push(&self, p: usize, q: usize, x: &usize) -> usize {
        self.mult[p][q] * x
    }

    fn push_mor(&self, p: usize, q: usize, f: &Matrix) -> Matrix {
        Matrix::identity(self.mult[p][q], self.field()).kron(f)
    }

    fn can(&self, p: usize, q: usize, r: usize, x: &usize) -> Matrix {
        self.can[&(p, q, r)].kron(&Matrix::identity(*x, self.field()))
    }
}

/// Every multiplicity diagram over Δⁿ with multiplicities ≤ `max_mult`, in a
/// fixed order. Cells are assigned triple by triple and each 4-chain is
/// checked as soon as its cells are known.
pub fn for_each_diagram(
    n: usize,
    max_mult: usize,
    field: u32,
    f: &mut dyn FnMut(&MultiplicityDiagram) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let base = FinPoset::chain(n);
    let pairs = base.strict_pairs();
    let triples = base.strict_triples();
    let tindex: HashMap<(usize, usize, usize), usize> = triples.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    // quadruples grouped by the last of their four cells
    let mut due: Vec<Vec<(usize, usize, usize, usize)>> = vec![Vec::new(); triples.len()];
    for (p, q, r, s) in base.strict_quadruples() {
        let last = [(p, q, r), (p, r, s), (q, r, s), (p, q, s)].iter().map(|t| tindex[t]).max().expect("four cells");
        due[last].push((p, q, r, s));
    }
    let mut ms = vec![0usize; pairs.len()];
    loop {
        let mult: BTreeMap<(usize, usize), usize> = pairs.iter().copied().zip(ms.iter().copied()).collect();
        let mut can = BTreeMap::new();
        assign_cells(n, field, &mult, &triples, &due, 0, &mut can, f)?;
        let mut i = 0;
        while i < ms.len() && ms[i] == max_mult {
            ms[i] = 0;
            i += 1;
        }
        if i == ms.len() {
            return ControlFlow::Continue(());
        }
        ms[i] += 1;
    }
}

/// The number of multiplicity diagrams over Δⁿ, n ≤ 3, with multiplicities
/// ≤ `max_mult`. For n = 3 the single cocycle is linear in (M_023, M_013)
/// once M_012 and M_123 are fixed, so each pair contributes p^nullity.
pub fn count_diagrams(n: usize, max_mult: usize, field: u32) -> Option<u128> {
    if n > 3 {
        return None;
    }
    let base = FinPoset::chain(n);
    let pairs = base.strict_pairs();
    let p = field as u128;
    let mut total = 0u128;
    let mut ms = vec![0usize; pairs.len()];
    loop {
        let m = |a: usize, b: usize| ms[pairs.iter().position(|&k| k == (a, b)).expect("pair")];
        if n < 3 {
            let cells: usize = base.strict_triples().iter().map(|&(a, b, c)| m(b, c) * m(a, b) * m(a, c)).sum();
            total += p.checked_pow(cells as u32)?;
        } else {
            for m012 in Matrix::all(m(1, 2) * m(0, 1), m(0, 2), field) {
                for m123 in Matrix::all(m(2, 3) * m(1, 2), m(1, 3), field) {
                    let a = Matrix::identity(m(2, 3), field).kron(&m012);
                    let b = m123.kron(&Matrix::identity(m(0, 1), field));
                    let nullity = a.cols() + b.cols() - a.hstack(&b.neg()).rank();
                    total = total.checked_add(p.checked_pow((nullity * m(0, 3)) as u32)?)?;
                }
            }
        }
        let mut i = 0;
        while i < ms.len() && ms[i] == max_mult {
            ms[i] = 0;
            i += 1;
        }
        if i == ms.len() {
            return Some(total);
        }
        ms[i] += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn assign_cells(
    n: usize,
    field: u32,
    mult: &BTreeMap<(usize, usize), usize>,
    triples: &[(usize, usize, usize)],
    due: &[Vec<(usize, usize, usize, usize)>],
    idx: usize,
    can: &mut BTreeMap<(usize, usize, usize), Matrix>,
    f: &mut dyn FnMut(&MultiplicityDiagram) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if idx == triples.len() {
        let d = MultiplicityDiagram::new_unchecked(n, field, mult, can.clone()).expect("well-shaped cells");
        return f(&d);
    }
    let (p, q, r) = triples[idx];
    for m in Matrix::all(mult[&(q, r)] * mult[&(p, q)], mult[&(p, r)], field) {
        can.insert((p, q, r), m);
        let ok = due[idx].iter().all(|&(a, b, c, e)| {
            let lhs = Matrix::identity(mult[&(c, e)], field).kron(&can[&(a, b, c)]).mul(&can[&(a, c, e)]);
            let rhs = can[&(b, c, e)].kron(&Matrix::identity(mult[&(a, b)], field)).mul(&can[&(a, b, e)]);
            lhs == rhs
        });
        if ok {
            assign_cells(n, field, mult, triples, due, idx + 1, can, f)?;
        }
    }
    can.remove(&(p, q, r));
    ControlFlow::Continue(())
}

/// Every section with all dimensions ≤ `max_dim`. The spine arrows range
/// over all matrices; each φ_pr with r > p + 1 ranges over the solutions of
/// its cocycle with middle p + 1 and is then checked against the others.
pub fn for_each_section(
    d: &MultiplicityDiagram,
    max_dim: usize,
    f: &mut dyn FnMut(&SectionOf<MultiplicityDiagram>) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let mut pairs = d.base.strict_pairs();
    pairs.sort_by_key(|&(p, q)| (q - p, p));
    let mut e = SectionEnum { d, pairs, cache: HashMap::new() };
    let mut dims = vec![0usize; d.n + 1];
    loop {
        let mut s = Section { x: dims.iter().copied().enumerate().collect(), phi: BTreeMap::new() };
        e.assign(0, &mut s, f)?;
        let mut i = 0;
        while i < dims.len() && dims[i] == max_dim {
            dims[i] = 0;
            i += 1;
        }
        if i == dims.len() {
            return ControlFlow::Continue(());
        }
        dims[i] += 1;
    }
}

struct SectionEnum<'a> {
    d: &'a MultiplicityDiagram,
    pairs: Vec<(usize, usize)>,
    cache: HashMap<(usize, usize), Vec<Matrix>>,
}

impl SectionEnum<'_> {
    fn all(&mut self, rows: usize, cols: usize) -> Vec<Matrix> {
        let p = self.d.field();
        self.cache.entry((rows, cols)).or_insert_with(|| Matrix::all(rows, cols, p)).clone()
    }

    fn assign(
        &mut self,
        idx: usize,
        s: &mut SectionOf<MultiplicityDiagram>,
        f: &mut dyn FnMut(&SectionOf<MultiplicityDiagram>) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some(&(p, r)) = self.pairs.get(idx) else {
            return f(s);
        };
        let d = self.d;
        let (xp, xr) = (s.x[&p], s.x[&r]);
        let candidates = if r == p + 1 {
            self.all(d.push(p, r, &xp), xr)
        } else {
            let a = d.can(p, p + 1, r, &xp);
            let b = d.push_mor(p + 1, r, &s.phi[&(p, p + 1)]).mul(&s.phi[&(p + 1, r)]);
            let Some(x0) = a.solve(&b) else {
                return ControlFlow::Continue(());
            };
            let k = a.kernel();
            self.all(k.cols(), xr).into_iter().map(|y| x0.add(&k.mul(&y))).collect()
        };
        for phi in candidates {
            let ok = (p + 2..r).all(|q| {
                d.can(p, q, r, &xp).mul(&phi) == d.push_mor(q, r, &s.phi[&(p, q)]).mul(&s.phi[&(q, r)])
            });
            if !ok {
                continue;
            }
            s.phi.insert((p, r), phi);
            self.assign(idx + 1, s, f)?;
        }
        s.phi.remove(&(p, r));
        ControlFlow::Continue(())
    }
}

/// A functor sd_1(Δⁿ) → C preserving marked edges: objects V_k and arrows
/// `w[k]`: V_{k+1} → τ^{k+1}_k V_k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sd1Section {
    pub v: Vec<usize>,
    pub w: Vec<Matrix>,
}

impl Sd1Section {
    pub fn new(d: &MultiplicityDiagram, v: Vec<usize>, w: Vec<Matrix>) -> Result<Self, ExtendError> {
        if v.len() != d.n + 1 || w.len() != d.n {
            return Err(ExtendError::Shape("spine length".into()));
        }
        for (k, m) in w.iter().enumerate() {
            if (m.rows(), m.cols()) != (d.push(k, k + 1, &v[k]), v[k + 1]) || m.field() != d.field() {
                return Err(ExtendError::Shape(format!("w at {}<{}", k, k + 1)));
            }
        }
        Ok(Sd1Section { v, w })
    }

    pub fn terminal(d: &MultiplicityDiagram) -> Self {
        Sd1Section { v: vec![0; d.n + 1], w: (0..d.n).map(|_| Matrix::zeros(0, 0, d.field())).collect() }
    }

    /// Levels `a..=b`, as a spine over Δ^{b−a}.
    pub fn slice(&self, a: usize, b: usize) -> Self {
        Sd1Section { v: self.v[a..=b].to_vec(), w: self.w[a..b].to_vec() }
    }

    /// The point (w_n, …, w_1, V_0) of Ar(C_n) ×_{C_n} ⋯ ×_{C_1} C_0.
    pub fn to_fiber_product(&self) -> FiberProductPoint {
        let arrows = self.w.iter().rev().map(|m| Arrow { source: m.cols(), target: m.rows(), map: m.clone() }).collect();
        FiberProductPoint { arrows, base: self.v[0] }
    }

    pub fn from_fiber_product(d: &MultiplicityDiagram, pt: &FiberProductPoint) -> Result<Self, ExtendError> {
        if !pt.is_compatible(d) {
            return Err(ExtendError::Shape("fiber product compatibility".into()));
        }
        let mut v = vec![pt.base];
        let mut w = Vec::new();
        for a in pt.arrows.iter().rev() {
            v.push(a.source);
            w.push(a.map.clone());
        }
        Self::new(d, v, w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
    pub map: Matrix,
}

/// `arrows[0]` lies in Ar(C_n), the last in Ar(C_1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberProductPoint {
    pub arrows: Vec<Arrow>,
    pub base: usize,
}

impl FiberProductPoint {
    /// The target of each arrow in Ar(C_k) is τ^k_{k−1} of the next source.
    pub fn is_compatible(&self, d: &MultiplicityDiagram) -> bool {
        let n = self.arrows.len();
        n == d.n
            && (0..n).all(|i| {
                let k = n - i;
                let below = if i + 1 < n { self.arrows[i + 1].source } else { self.base };
                let a = &self.arrows[i];
                a.target == d.push(k - 1, k, &below) && (a.map.rows(), a.map.cols()) == (a.target, a.source)
            })
    }
}

/// γ_n^*: keep V_k = x_k and w_k = φ_{k−1,k}.
pub fn gamma_restrict(s: &SectionOf<MultiplicityDiagram>) -> Sd1Section {
    let n = s.x.len() - 1;
    Sd1Section { v: (0..=n).map(|k| s.x[&k]).collect(), w: (0..n).map(|k| s.phi[&(k, k + 1)].clone()).collect() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extendability {
    /// Strings [i < i+1 < i+k] whose canonical map at V_i is not invertible.
    pub failing: Vec<(usize, usize, usize)>,
}

impl Extendability {
    pub fn is_ok(&self) -> bool {
        self.failing.is_empty()
    }
}

pub fn is_extendable(d: &MultiplicityDiagram, t: &Sd1Section) -> Extendability {
    let mut failing = Vec::new();
    for i in 0..d.n {
        for top in i + 2..=d.n {
            if !d.can(i, i + 1, top, &t.v[i]).is_invertible() {
                failing.push((i, i + 1, top));
            }
        }
    }
    Extendability { failing }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneGeneration {
    /// Every cube F|Q_σ is a limit diagram.
    pub method_a: bool,
    /// Every edge [i < i+k] → [i < i+1 < i+k] goes to an isomorphism.
    pub method_b: bool,
    pub failing_a: Vec<(usize, usize)>,
    pub failing_b: Vec<(usize, usize)>,
}

/// Strings σ = [i < i+k] with k ≥ 2; for k = 1 the cube is a point and
/// imposes nothing.
pub fn is_one_generated(
    d: &MultiplicityDiagram,
    s: &SectionOf<MultiplicityDiagram>,
) -> Result<OneGeneration, ExtendError> {
    let mut failing_a = Vec::new();
    let mut failing_b = Vec::new();
    for i in 0..d.n {
        for top in i + 2..=d.n {
            let sigma = Chain::from_sorted(vec![i, top]);
            let edge = eval_inclusion(d, s, &sigma, &Chain::from_sorted(vec![i, i + 1, top]))?;
            if !edge.is_invertible() {
                failing_b.push((i, top));
            }
            if !cube_is_limit(d, s, i, top)? {
                failing_a.push((i, top));
            }
        }
    }
    Ok(OneGeneration { method_a: failing_a.is_empty(), method_b: failing_b.is_empty(), failing_a, failing_b })
}

/// Whether F(σ) → lim over the punctured cube Q_σ \ {σ} is invertible.
fn cube_is_limit(
    d: &MultiplicityDiagram,
    s: &SectionOf<MultiplicityDiagram>,
    i: usize,
    top: usize,
) -> Result<bool, ExtendError> {
    let mids: Vec<usize> = (i + 1..top).collect();
    let chains: Vec<Chain> = (1..1usize << mids.len())
        .map(|bits| {
            let mut e = vec![i];
            e.extend(mids.iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).map(|(_, &m)| m));
            e.push(top);
            Chain::from_sorted(e)
        })
        .collect();
    let names = chains.iter().map(|c| format!("{c:?}")).collect();
    let shape = FinPoset::from_order_fn(names, |a, b| chains[a].is_subchain_of(&chains[b]));
    let values = chains.iter().map(|c| eval_chain(d, s, c)).collect::<Result<Vec<_>, _>>()?;
    let edges = shape
        .covers()
        .iter()
        .map(|&(a, b)| eval_inclusion(d, s, &chains[a], &chains[b]))
        .collect::<Result<Vec<_>, _>>()?;
    let diagram = ShapedDiagram { shape, values, edges };
    let lim = d.cat.limit(&diagram);
    let sigma = Chain::from_sorted(vec![i, top]);
    let legs = chains.iter().map(|c| eval_inclusion(d, s, &sigma, c)).collect::<Result<Vec<_>, _>>()?;
    let cone = Cone { apex: eval_chain(d, s, &sigma)?, legs };
    Ok(d.cat.factor(&lim, &cone).is_some_and(|m| m.is_invertible()))
}

/// The inverse of γ_n^* on extendable spines: φ_pr for r > p + 1 is
/// can_{p,p+1,r}⁻¹ ∘ τ^r_{p+1}(φ_{p,p+1}) ∘ φ_{p+1,r}.
pub fn extend(d: &MultiplicityDiagram, t: &Sd1Section) -> Result<SectionOf<MultiplicityDiagram>, ExtendError> {
    let ext = is_extendable(d, t);
    if !ext.is_ok() {
        return Err(ExtendError::NotExtendable(ext.failing));
    }
    let mut s = Section { x: t.v.iter().copied().enumerate().collect(), phi: BTreeMap::new() };
    for (k, w) in t.w.iter().enumerate() {
        s.phi.insert((k, k + 1), w.clone());
    }
    for gap in 2..=d.n {
        for p in 0..=d.n - gap {
            let r = p + gap;
            let inv = d.can(p, p + 1, r, &t.v[p]).inverse().expect("certified invertible");
            let phi = inv.mul(&d.push_mor(p + 1, r, &s.phi[&(p, p + 1)])).mul(&s.phi[&(p + 1, r)]);
            s.phi.insert((p, r), phi);
        }
    }
    validate_section(d, &s)?;
    Ok(s)
}

/// A map of spines: ψ_k: V_k → V′_k with τ(ψ_k) w_k = w′_k ψ_{k+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sd1Map {
    pub psi: Vec<Matrix>,
}

impl Sd1Map {
    pub fn is_iso(&self) -> bool {
        self.psi.iter().all(Matrix::is_invertible)
    }
}

pub fn sd1_is_map(d: &MultiplicityDiagram, a: &Sd1Section, b: &Sd1Section, f: &Sd1Map) -> bool {
    f.psi.len() == a.v.len()
        && f.psi.iter().enumerate().all(|(k, m)| (m.rows(), m.cols()) == (b.v[k], a.v[k]))
        && (0..d.n).all(|k| d.push_mor(k, k + 1, &f.psi[k]).mul(&a.w[k]) == b.w[k].mul(&f.psi[k + 1]))
}

pub fn sd1_homs(d: &MultiplicityDiagram, a: &Sd1Section, b: &Sd1Section) -> Vec<Sd1Map> {
    fn rec(d: &MultiplicityDiagram, a: &Sd1Section, b: &Sd1Section, acc: &mut Vec<Matrix>, out: &mut Vec<Sd1Map>) {
        let k = acc.len();
        if k == a.v.len() {
            out.push(Sd1Map { psi: acc.clone() });
            return;
        }
        for m in Matrix::all(b.v[k], a.v[k], d.field()) {
            if k > 0 && d.push_mor(k - 1, k, &acc[k - 1]).mul(&a.w[k - 1]) != b.w[k - 1].mul(&m) {
                continue;
            }
            acc.push(m);
            rec(d, a, b, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, a, b, &mut Vec::new(), &mut out);
    out
}

/// Every spine with dimensions ≤ `max_dim`.
pub fn all_sd1(d: &MultiplicityDiagram, max_dim: usize) -> Vec<Sd1Section> {
    let mut out = Vec::new();
    let mut dims = vec![0usize; d.n + 1];
    loop {
        let mut acc: Vec<Vec<Matrix>> = vec![Vec::new()];
        for k in 0..d.n {
            let ms = Matrix::all(d.push(k, k + 1, &dims[k]), dims[k + 1], d.field());
            acc = acc.into_iter().flat_map(|w| ms.iter().map(move |m| [w.clone(), vec![m.clone()]].concat())).collect();
        }
        out.extend(acc.into_iter().map(|w| Sd1Section { v: dims.clone(), w }));
        let mut i = 0;
        while i < dims.len() && dims[i] == max_dim {
            dims[i] = 0;
            i += 1;
        }
        if i == dims.len() {
            return out;
        }
        dims[i] += 1;
    }
}

/// j_* for the split [0:k] | [k+1:n]: push the top of u upward with
/// identity arrows.
pub fn sd1_j_star(d: &MultiplicityDiagram, k: usize, u: &Sd1Section) -> Sd1Section {
    let mut v = u.v.clone();
    let mut w = u.w.clone();
    for l in k..d.n {
        let next = d.push(l, l + 1, &v[l]);
        v.push(next);
        w.push(Matrix::identity(next, d.field()));
    }
    Sd1Section { v, w }
}

/// i_*: zero on [0:k], z above.
pub fn sd1_i_star(d: &MultiplicityDiagram, k: usize, z: &Sd1Section) -> Sd1Section {
    let f = d.field();
    let mut v = vec![0; k + 1];
    let mut w: Vec<Matrix> = (0..k).map(|_| Matrix::zeros(0, 0, f)).collect();
    w.push(Matrix::zeros(0, z.v[0], f));
    v.extend(z.v.iter().copied());
    w.extend(z.w.iter().cloned());
    Sd1Section { v, w }
}

/// The unit t → j_* j^* t.
pub fn sd1_j_unit(d: &MultiplicityDiagram, k: usize, t: &Sd1Section) -> Sd1Map {
    let f = d.field();
    let mut psi: Vec<Matrix> = (0..=k).map(|l| Matrix::identity(t.v[l], f)).collect();
    for l in k..d.n {
        let next = d.push_mor(l, l + 1, &psi[l]).mul(&t.w[l]);
        psi.push(next);
    }
    Sd1Map { psi }
}

/// The unit t → i_* i^* t.
pub fn sd1_i_unit(d: &MultiplicityDiagram, k: usize, t: &Sd1Section) -> Sd1Map {
    let f = d.field();
    let psi = (0..=d.n)
        .map(|l| if l <= k { Matrix::zeros(0, t.v[l], f) } else { Matrix::identity(t.v[l], f) })
        .collect();
    Sd1Map { psi }
}

#[derive(Debug, Clone, Serialize)]
pub struct StaircaseReport {
    pub k: usize,
    pub checks: Vec<CheckResult>,
}

impl StaircaseReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

/// Checks the recollement of spines split into [0:k] and [k+1:n] on every
/// spine with dimensions ≤ `max_dim`; hom bijections use at most `partners`
/// objects on each side.
pub fn staircase_recollement(d: &MultiplicityDiagram, k: usize, max_dim: usize, partners: usize) -> StaircaseReport {
    assert!(k < d.n, "split point must lie below n");
    let (lo, hi) = (d.interval(0, k), d.interval(k + 1, d.n));
    let all = all_sd1(d, max_dim);
    let lows = all_sd1(&lo, max_dim);
    let highs = all_sd1(&hi, max_dim);
    let mut jj = CheckResult::new("j^*j_* = id");
    for u in &lows {
        jj.record(sd1_j_star(d, k, u).slice(0, k) == *u, || format!("{u:?}"));
    }
    let mut ii = CheckResult::new("i^*i_* = id");
    let mut ji = CheckResult::new("j^*i_* terminal");
    for z in &highs {
        let iz = sd1_i_star(d, k, z);
        ii.record(iz.slice(k + 1, d.n) == *z, || format!("{z:?}"));
        ji.record(iz.v[..=k].iter().all(|&x| x == 0), || format!("{z:?}"));
    }
    let mut image = CheckResult::new("j_* image");
    let mut frac = CheckResult::new("fracture");
    let mut cons = CheckResult::new("joint conservativity");
    for t in &all {
        let unit = sd1_j_unit(d, k, t);
        let arrows_invertible = (k..d.n).all(|l| t.w[l].is_invertible());
        image.record(unit.is_iso() == arrows_invertible, || format!("{t:?}"));
        frac.record(fracture_is_iso(d, k, t), || format!("{t:?}"));
        // a map is an iso iff its restrictions to both parts are
        for f in sd1_homs(d, t, t).into_iter().take(partners) {
            let parts = f.psi[..=k].iter().chain(&f.psi[k + 1..]).all(Matrix::is_invertible);
            cons.record(parts == f.is_iso(), || format!("{t:?}"));
        }
    }
    let mut jadj = CheckResult::new("j^* -| j_* bijection");
    let mut iadj = CheckResult::new("i^* -| i_* bijection");
    for y in all.iter().take(partners) {
        let (ly, hy) = (y.slice(0, k), y.slice(k + 1, d.n));
        for u in lows.iter().take(partners) {
            let up = sd1_homs(d, y, &sd1_j_star(d, k, u));
            let down = sd1_homs(&lo, &ly, u);
            let restricted: Vec<Vec<Matrix>> = up.iter().map(|f| f.psi[..=k].to_vec()).collect();
            let ok = up.len() == down.len() && down.iter().all(|g| restricted.contains(&g.psi));
            jadj.record(ok, || format!("{y:?} / {u:?}"));
        }
        for z in highs.iter().take(partners) {
            let up = sd1_homs(d, y, &sd1_i_star(d, k, z));
            let down = sd1_homs(&hi, &hy, z);
            let restricted: Vec<Vec<Matrix>> = up.iter().map(|f| f.psi[k + 1..].to_vec()).collect();
            let ok = up.len() == down.len() && down.iter().all(|g| restricted.contains(&g.psi));
            iadj.record(ok, || format!("{y:?} / {z:?}"));
        }
    }
    StaircaseReport { k, checks: vec![jj, ii, ji, image, cons, jadj, iadj, frac] }
}

/// t → j_*j^*t ×_{i_*i^*j_*j^*t} i_*i^*t, levelwise.
fn fracture_is_iso(d: &MultiplicityDiagram, k: usize, t: &Sd1Section) -> bool {
    let f = d.field();
    let a = sd1_j_star(d, k, &t.slice(0, k));
    let eta = sd1_j_unit(d, k, t);
    (0..=d.n).all(|l| {
        let (al, bl) = (a.v[l], if l > k { t.v[l] } else { 0 });
        let cl = if l > k { al } else { 0 };
        let a_to_c = if l > k { Matrix::identity(al, f) } else { Matrix::zeros(0, al, f) };
        let b_to_c = if l > k { eta.psi[l].clone() } else { Matrix::zeros(0, 0, f) };
        let s_to_b = if l > k { Matrix::identity(t.v[l], f) } else { Matrix::zeros(0, t.v[l], f) };
        let cospan = ShapedDiagram::cospan(al, bl, cl, a_to_c.clone(), b_to_c);
        let lim = d.cat.limit(&cospan);
        let legs = vec![eta.psi[l].clone(), s_to_b, a_to_c.mul(&eta.psi[l])];
        d.cat.factor(&lim, &Cone { apex: t.v[l], legs }).is_some_and(|m| m.is_invertible())
    })
}

/// One row or column A → B → C of the norm grid at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactSequence {
    pub name: String,
    pub level: usize,
    pub dims: [usize; 3],
    pub injective: bool,
    pub exact_middle: bool,
    pub surjective: bool,
}

impl ExactSequence {
    fn new(name: &str, level: usize, f: &Matrix, g: &Matrix) -> Self {
        let (rf, rg) = (f.rank(), g.rank());
        ExactSequence {
            name: name.to_string(),
            level,
            dims: [f.cols(), f.rows(), g.rows()],
            injective: rf == f.cols(),
            exact_middle: g.mul(f).is_zero() && rf == f.rows() - rg,
            surjective: rg == g.rows(),
        }
    }

    pub fn left_exact(&self) -> bool {
        self.injective && self.exact_middle
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    /// dim i^! s = dim ker α.
    pub kernel_dim: usize,
    pub rank_alpha: usize,
    pub sequences: Vec<ExactSequence>,
}

impl NormReport {
    /// In Vect the grid is only left exact; surjectivity is reported
    /// separately and fails wherever α is not onto.
    pub fn left_exact(&self) -> bool {
        self.sequences.iter().all(ExactSequence::left_exact)
    }

    pub fn short_exact(&self) -> bool {
        self.left_exact() && self.sequences.iter().all(|s| s.surjective)
    }
}

/// The grid of fiber sequences around id ≅ j_*j^* ×_{i_*i^*j_*j^*} i_*i^*
/// for s = [u, z, α] over Δ¹, with i^! s = ker α.
pub fn norm_fiber_sequences(
    d: &MultiplicityDiagram,
    s: &SectionOf<MultiplicityDiagram>,
) -> Result<NormReport, ExtendError> {
    if d.n != 1 {
        return Err(ExtendError::Shape("norm sequences need Δ¹".into()));
    }
    validate_section(d, s)?;
    let f = d.field();
    let (u, z) = (s.x[&0], s.x[&1]);
    let tu = d.push(0, 1, &u);
    let alpha = &s.phi[&(0, 1)];
    let kappa = alpha.kernel();
    let kd = kappa.cols();
    let id = |n: usize| Matrix::identity(n, f);
    let zero = |r: usize, c: usize| Matrix::zeros(r, c, f);
    let mut seq = Vec::new();
    // level 0: i_*i^! = 0, id = u, i_*i^* = 0, j_!j^* = u, j_*j^* = u, i_*i^*j_*j^* = 0
    seq.push(ExactSequence::new("0 -> i_*i^! -> i_*i^!", 0, &zero(0, 0), &zero(0, 0)));
    seq.push(ExactSequence::new("j_!j^* -> id -> i_*i^*", 0, &id(u), &zero(0, u)));
    seq.push(ExactSequence::new("j_!j^* -> j_*j^* -> i_*i^*j_*j^*", 0, &id(u), &zero(0, u)));
    seq.push(ExactSequence::new("0 -> j_!j^* -> j_!j^*", 0, &zero(u, 0), &id(u)));
    seq.push(ExactSequence::new("i_*i^! -> id -> j_*j^*", 0, &zero(u, 0), &id(u)));
    seq.push(ExactSequence::new("i_*i^! -> i_*i^* -> i_*i^*j_*j^*", 0, &zero(0, 0), &zero(0, 0)));
    // level 1: i_*i^! = ker α, id = z, i_*i^* = z, j_!j^* = 0, j_*j^* = τu, i_*i^*j_*j^* = τu
    seq.push(ExactSequence::new("0 -> i_*i^! -> i_*i^!", 1, &zero(kd, 0), &id(kd)));
    seq.push(ExactSequence::new("j_!j^* -> id -> i_*i^*", 1, &zero(z, 0), &id(z)));
    seq.push(ExactSequence::new("j_!j^* -> j_*j^* -> i_*i^*j_*j^*", 1, &zero(tu, 0), &id(tu)));
    seq.push(ExactSequence::new("0 -> j_!j^* -> j_!j^*", 1, &zero(0, 0), &zero(0, 0)));
    seq.push(ExactSequence::new("i_*i^! -> id -> j_*j^*", 1, &kappa, alpha));
    seq.push(ExactSequence::new("i_*i^! -> i_*i^* -> i_*i^*j_*j^*", 1, &kappa, alpha));
    Ok(NormReport { kernel_dim: kd, rank_alpha: alpha.rank(), sequences: seq })
}
