//! Sections of the right-lax limit as cocycle data (x_p, φ_qp), evaluation
//! on chains and inclusions, and the recollement attached to a sieve.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::concretecats::{Category, Cone, ShapedDiagram};
use crate::laxdiagram::{LaxDiagram, Mor, Obj};
use crate::poset::Decomposition;
use crate::subdivision::{elementary_factorize, factorize_in_order, insertion_orders, jx, Chain, Move, SdPoset, SubdivisionError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectionError {
    #[error("no value at {0}")]
    NotInDomain(String),
    #[error("{0}: morphism has the wrong endpoints")]
    Endpoints(String),
    #[error("cocycle fails at {0}")]
    Cocycle(String),
    #[error("naturality fails at {0}")]
    NotNatural(String),
    #[error("limit hypothesis fails at {0}")]
    LimitHypothesisFailed(String),
    #[error("cone does not factor at {0}")]
    ConeMismatch(String),
    #[error("section is not defined on exactly the {0}")]
    WrongDomain(String),
    #[error(transparent)]
    Subdivision(#[from] SubdivisionError),
}

/// Cocycle data over a subset of the base: objects x_p and, for p < q in
/// the domain, φ_qp: x_q → τ^q_p(x_p) stored under the key (p, q).
#[derive(Debug, Clone, PartialEq)]
pub struct Section<O, M> {
    pub x: BTreeMap<usize, O>,
    pub phi: BTreeMap<(usize, usize), M>,
}

pub type SectionOf<D> = Section<Obj<D>, Mor<D>>;

/// Components ψ_p: x_p → y_p.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionMap<M> {
    pub psi: BTreeMap<usize, M>,
}

pub type SectionMapOf<D> = SectionMap<Mor<D>>;

impl<O: Clone, M: Clone> Section<O, M> {
    pub fn domain(&self) -> Vec<usize> {
        self.x.keys().copied().collect()
    }

    /// The sub-data on a subset of the domain (j^* for a sieve, i^* for a cosieve).
    pub fn restrict(&self, subset: &[usize]) -> Self {
        let x = self.x.iter().filter(|(p, _)| subset.contains(p)).map(|(&p, v)| (p, v.clone())).collect();
        let phi = self
            .phi
            .iter()
            .filter(|((p, q), _)| subset.contains(p) && subset.contains(q))
            .map(|(&k, v)| (k, v.clone()))
            .collect();
        Section { x, phi }
    }
}

impl<M: Clone> SectionMap<M> {
    pub fn restrict(&self, subset: &[usize]) -> Self {
        SectionMap { psi: self.psi.iter().filter(|(p, _)| subset.contains(p)).map(|(&p, m)| (p, m.clone())).collect() }
    }
}

fn name<D: LaxDiagram>(d: &D, p: usize) -> String {
    d.base().name(p).to_string()
}

fn get<'a, T>(m: &'a BTreeMap<usize, T>, d: &impl LaxDiagram, p: usize) -> Result<&'a T, SectionError> {
    m.get(&p).ok_or_else(|| SectionError::NotInDomain(d.base().name(p).to_string()))
}

fn get_phi<'a, D: LaxDiagram>(s: &'a SectionOf<D>, d: &D, p: usize, q: usize) -> Result<&'a Mor<D>, SectionError> {
    s.phi.get(&(p, q)).ok_or_else(|| SectionError::NotInDomain(format!("{}<{}", name(d, p), name(d, q))))
}

/// Checks endpoints of every φ and the cocycle on every triple of the domain.
pub fn validate_section<D: LaxDiagram>(d: &D, s: &SectionOf<D>) -> Result<(), SectionError> {
    let base = d.base();
    let dom = s.domain();
    for &q in &dom {
        for &p in &dom {
            if !base.lt(p, q) {
                continue;
            }
            let f = get_phi(s, d, p, q)?;
            let c = d.fiber(q);
            if c.source(f) != s.x[&q] || c.target(f) != d.push(p, q, &s.x[&p]) {
                return Err(SectionError::Endpoints(format!("phi.{}<{}", name(d, p), name(d, q))));
            }
        }
    }
    for (p, q, r) in base.strict_triples() {
        if !(s.x.contains_key(&p) && s.x.contains_key(&q) && s.x.contains_key(&r)) {
            continue;
        }
        let c = d.fiber(r);
        let lhs = c.compose(&d.can(p, q, r, &s.x[&p]), &s.phi[&(p, r)]);
        let rhs = c.compose(&d.push_mor(q, r, &s.phi[&(p, q)]), &s.phi[&(q, r)]);
        if lhs != rhs {
            return Err(SectionError::Cocycle(format!("{}<{}<{}", name(d, p), name(d, q), name(d, r))));
        }
    }
    Ok(())
}

/// Checks τ^q_p(ψ_p) ∘ φ^x_qp = φ^y_qp ∘ ψ_q and endpoints of every ψ_p.
pub fn validate_map<D: LaxDiagram>(
    d: &D,
    x: &SectionOf<D>,
    y: &SectionOf<D>,
    f: &SectionMapOf<D>,
) -> Result<(), SectionError> {
    for (&p, xp) in &x.x {
        let m = get(&f.psi, d, p)?;
        let c = d.fiber(p);
        if c.source(m) != *xp || c.target(m) != *get(&y.x, d, p)? {
            return Err(SectionError::Endpoints(format!("psi.{}", name(d, p))));
        }
    }
    for &(p, q) in x.phi.keys() {
        let c = d.fiber(q);
        let lhs = c.compose(&d.push_mor(p, q, &f.psi[&p]), &x.phi[&(p, q)]);
        let rhs = c.compose(get_phi(y, d, p, q)?, &f.psi[&q]);
        if lhs != rhs {
            return Err(SectionError::NotNatural(format!("{}<{}", name(d, p), name(d, q))));
        }
    }
    Ok(())
}

pub fn identity_map<D: LaxDiagram>(d: &D, s: &SectionOf<D>) -> SectionMapOf<D> {
    SectionMap { psi: s.x.iter().map(|(&p, v)| (p, d.fiber(p).identity(v))).collect() }
}

/// `g ∘ f`.
pub fn compose_maps<D: LaxDiagram>(d: &D, g: &SectionMapOf<D>, f: &SectionMapOf<D>) -> SectionMapOf<D> {
    SectionMap { psi: f.psi.iter().map(|(&p, fp)| (p, d.fiber(p).compose(&g.psi[&p], fp))).collect() }
}

/// A map of sections is invertible exactly when every component is.
pub fn is_iso_map<D: LaxDiagram>(d: &D, f: &SectionMapOf<D>) -> bool {
    f.psi.iter().all(|(&p, m)| d.fiber(p).is_iso(m))
}

pub fn inverse_map<D: LaxDiagram>(d: &D, f: &SectionMapOf<D>) -> Option<SectionMapOf<D>> {
    let mut psi = BTreeMap::new();
    for (&p, m) in &f.psi {
        psi.insert(p, d.fiber(p).inverse(m)?);
    }
    Some(SectionMap { psi })
}

/// Iterated pushforward of an object of fiber chain[0] along the chain.
pub fn push_along<D: LaxDiagram>(d: &D, chain: &[usize], x: &Obj<D>) -> Obj<D> {
    chain.windows(2).fold(x.clone(), |acc, w| d.push(w[0], w[1], &acc))
}

pub fn push_mor_along<D: LaxDiagram>(d: &D, chain: &[usize], f: &Mor<D>) -> Mor<D> {
    chain.windows(2).fold(f.clone(), |acc, w| d.push_mor(w[0], w[1], &acc))
}

/// τ^{p_n}_{p_{n-1}} ⋯ τ^{p_1}_{p_0}(x_{p_0}).
pub fn eval_chain<D: LaxDiagram>(d: &D, s: &SectionOf<D>, sigma: &Chain) -> Result<Obj<D>, SectionError> {
    Ok(push_along(d, sigma.elems(), get(&s.x, d, sigma.bottom())?))
}

/// The value of a map of sections on a chain: its bottom component pushed along.
pub fn eval_map_on_chain<D: LaxDiagram>(
    d: &D,
    f: &SectionMapOf<D>,
    sigma: &Chain,
) -> Result<Mor<D>, SectionError> {
    Ok(push_mor_along(d, sigma.elems(), get(&f.psi, d, sigma.bottom())?))
}

fn move_map<D: LaxDiagram>(d: &D, s: &SectionOf<D>, mv: &Move) -> Result<Mor<D>, SectionError> {
    match mv {
        Move::Prepend { from, elem } => {
            let phi = get_phi(s, d, *elem, from.bottom())?;
            Ok(push_mor_along(d, from.elems(), phi))
        }
        Move::Interior { from, elem, below, above } => {
            let elems = from.elems();
            let i = elems.iter().position(|x| x == below).expect("move lies in its chain");
            let prefix = push_along(d, &elems[..=i], get(&s.x, d, elems[0])?);
            let can = d.can(*below, *elem, *above, &prefix);
            Ok(push_mor_along(d, &elems[i + 1..], &can))
        }
    }
}

fn compose_moves<D: LaxDiagram>(
    d: &D,
    s: &SectionOf<D>,
    sigma: &Chain,
    moves: &[Move],
) -> Result<Mor<D>, SectionError> {
    let c = d.fiber(sigma.top());
    let mut acc = c.identity(&eval_chain(d, s, sigma)?);
    for mv in moves {
        acc = c.compose(&move_map(d, s, mv)?, &acc);
    }
    Ok(acc)
}

/// eval(σ) → eval(τ) for a max-preserving inclusion, composed over the
/// smallest-first elementary factorization.
pub fn eval_inclusion<D: LaxDiagram>(
    d: &D,
    s: &SectionOf<D>,
    sigma: &Chain,
    tau: &Chain,
) -> Result<Mor<D>, SectionError> {
    let moves = elementary_factorize(d.base(), sigma, tau)?;
    compose_moves(d, s, sigma, &moves)
}

/// As [`eval_inclusion`], inserting the new elements in the given order.
pub fn eval_inclusion_in_order<D: LaxDiagram>(
    d: &D,
    s: &SectionOf<D>,
    sigma: &Chain,
    tau: &Chain,
    order: &[usize],
) -> Result<Mor<D>, SectionError> {
    let moves = factorize_in_order(d.base(), sigma, tau, order)?;
    compose_moves(d, s, sigma, &moves)
}

/// Insertion orders of σ ⊆ τ whose composite differs from the
/// smallest-first one; empty when evaluation is confluent there.
pub fn confluence_defects<D: LaxDiagram>(
    d: &D,
    s: &SectionOf<D>,
    sigma: &Chain,
    tau: &Chain,
) -> Result<Vec<Vec<usize>>, SectionError> {
    let reference = eval_inclusion(d, s, sigma, tau)?;
    let mut bad = Vec::new();
    for order in insertion_orders(sigma, tau) {
        if eval_inclusion_in_order(d, s, sigma, tau, &order)? != reference {
            bad.push(order);
        }
    }
    Ok(bad)
}

/// The value of the unique cocartesian extension of a section over the
/// sieve at a chain originating in the sieve.
pub fn bar_extension<D: LaxDiagram>(
    d: &D,
    dec: &Decomposition,
    s0: &SectionOf<D>,
    tau: &Chain,
) -> Result<Obj<D>, SectionError> {
    if !dec.in_sieve(tau.bottom()) {
        return Err(SubdivisionError::NotOriginating(tau.label(d.base())).into());
    }
    eval_chain(d, s0, tau)
}

/// The diagram σ ↦ eval(σ) over a set of chains sharing one maximum,
/// with eval_inclusion on covering inclusions.
pub fn chain_diagram<D: LaxDiagram>(
    d: &D,
    s: &SectionOf<D>,
    chains: &SdPoset,
) -> Result<ShapedDiagram<Obj<D>, Mor<D>>, SectionError> {
    let values = chains.chains().iter().map(|c| eval_chain(d, s, c)).collect::<Result<Vec<_>, _>>()?;
    let edges = chains
        .poset()
        .covers()
        .iter()
        .map(|&(a, b)| eval_inclusion(d, s, chains.chain(a), chains.chain(b)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ShapedDiagram { shape: chains.poset().clone(), values, edges })
}

/// Given a limit cone over `diag` in fiber p and a cone over τ^q_p(diag)
/// in fiber q, the map from the cone's apex into τ^q_p(limit apex).
fn factor_through_pushed<D: LaxDiagram>(
    d: &D,
    p: usize,
    q: usize,
    diag: &ShapedDiagram<Obj<D>, Mor<D>>,
    lim: &Cone<Obj<D>, Mor<D>>,
    cone: &Cone<Obj<D>, Mor<D>>,
) -> Result<Mor<D>, SectionError> {
    let cq = d.fiber(q);
    let locus = || format!("{}<{}", name(d, p), name(d, q));
    let pushed = ShapedDiagram {
        shape: diag.shape.clone(),
        values: diag.values.iter().map(|v| d.push(p, q, v)).collect(),
        edges: diag.edges.iter().map(|e| d.push_mor(p, q, e)).collect(),
    };
    let limq = cq.limit(&pushed);
    let pushed_cone = Cone { apex: d.push(p, q, &lim.apex), legs: lim.legs.iter().map(|l| d.push_mor(p, q, l)).collect() };
    let m = cq.factor(&limq, &pushed_cone).ok_or_else(|| SectionError::LimitHypothesisFailed(locus()))?;
    let minv = cq.inverse(&m).ok_or_else(|| SectionError::LimitHypothesisFailed(locus()))?;
    let n = cq.factor(&limq, cone).ok_or_else(|| SectionError::ConeMismatch(locus()))?;
    Ok(cq.compose(&minv, &n))
}

fn check_domain<D: LaxDiagram>(
    s: &SectionOf<D>,
    part: &[usize],
    what: &str,
) -> Result<(), SectionError> {
    if s.domain() != part {
        return Err(SectionError::WrongDomain(what.to_string()));
    }
    Ok(())
}

/// The limit data of j_* at one cosieve element.
#[derive(Debug, Clone)]
pub struct Level<O, M> {
    pub chains: SdPoset,
    pub diagram: ShapedDiagram<O, M>,
    pub limit: Cone<O, M>,
}

/// j_* u together with the limit cones it was built from.
#[derive(Debug, Clone)]
pub struct OpenPushforward<O, M> {
    pub section: Section<O, M>,
    pub levels: BTreeMap<usize, Level<O, M>>,
}

pub type OpenPushforwardOf<D> = OpenPushforward<Obj<D>, Mor<D>>;

/// j_*: at p in the cosieve, the limit over J_[p] of the bar extension.
pub fn j_lower_star<D: LaxDiagram>(
    d: &D,
    dec: &Decomposition,
    u: &SectionOf<D>,
) -> Result<OpenPushforwardOf<D>, SectionError> {
    check_domain::<D>(u, &dec.sieve(), "sieve")?;
    let base = d.base();
    let mut out = u.clone();
    let mut levels = BTreeMap::new();
    for p in dec.cosieve() {
        let chains = jx(dec, &Chain::singleton(p))?;
        let diagram = chain_diagram(d, u, &chains)?;
        let limit = d.fiber(p).limit(&diagram);
        for (i, c) in chains.chains().iter().enumerate() {
            if c.len() == 2 {
                out.phi.insert((c.bottom(), p), limit.legs[i].clone());
            }
        }
        out.x.insert(p, limit.apex.clone());
        levels.insert(p, Level { chains, diagram, limit });
    }
    for (p, q) in base.strict_pairs() {
        if dec.in_sieve(p) || dec.in_sieve(q) {
            continue;
        }
        let (lp, lq) = (&levels[&p], &levels[&q]);
        let cq = d.fiber(q);
        // leg at τ₀∪[p]: project to τ₀∪[q], then insert p below q
        let mut legs = Vec::with_capacity(lp.chains.len());
        for c in lp.chains.chains() {
            let t0 = c.without(p);
            let via_q = t0.with(base, q);
            let j = lq.chains.index_of(&via_q).expect("J_[q] contains every sieve chain below p");
            let insert = eval_inclusion(d, u, &via_q, &via_q.with(base, p))?;
            legs.push(cq.compose(&insert, &lq.limit.legs[j]));
        }
        let cone = Cone { apex: lq.limit.apex.clone(), legs };
        let phi = factor_through_pushed(d, p, q, &lp.diagram, &lp.limit, &cone)?;
        out.phi.insert((p, q), phi);
    }
    validate_section(d, &out)?;
    Ok(OpenPushforward { section: out, levels })
}

impl<O: Clone + PartialEq + std::fmt::Debug, M: Clone + PartialEq + std::fmt::Debug> OpenPushforward<O, M> {
    /// The transpose y → j_* u of a map χ: j^* y → u.
    pub fn transpose<D>(
        &self,
        d: &D,
        y: &Section<O, M>,
        chi: &SectionMap<M>,
    ) -> Result<SectionMap<M>, SectionError>
    where
        D: LaxDiagram,
        D::Cat: Category<Obj = O, Mor = M>,
    {
        let mut psi = chi.psi.clone();
        for (&p, lvl) in &self.levels {
            let c = d.fiber(p);
            let top = Chain::singleton(p);
            let mut legs = Vec::with_capacity(lvl.chains.len());
            for ch in lvl.chains.chains() {
                let into = eval_inclusion(d, y, &top, ch)?;
                legs.push(c.compose(&eval_map_on_chain(d, chi, ch)?, &into));
            }
            let cone = Cone { apex: get(&y.x, d, p)?.clone(), legs };
            let m = c.factor(&lvl.limit, &cone).ok_or_else(|| SectionError::ConeMismatch(name(d, p)))?;
            psi.insert(p, m);
        }
        Ok(SectionMap { psi })
    }
}

fn unique_hom<C: Category>(c: &C, x: &C::Obj, y: &C::Obj) -> Option<C::Mor> {
    let hs = c.homs(x, y);
    (hs.len() == 1).then(|| hs.into_iter().next().expect("one"))
}

/// i_*: terminal objects on the sieve, unique maps into their pushforwards.
pub fn i_lower_star<D: LaxDiagram>(
    d: &D,
    dec: &Decomposition,
    w: &SectionOf<D>,
) -> Result<SectionOf<D>, SectionError> {
    check_domain::<D>(w, &dec.cosieve(), "cosieve")?;
    let mut out = w.clone();
    for p in dec.sieve() {
        out.x.insert(p, d.fiber(p).terminal());
    }
    for (p, q) in d.base().strict_pairs() {
        if dec.in_sieve(p) {
            let c = d.fiber(q);
            let t = d.push(p, q, &out.x[&p]);
            let f = unique_hom(c, &out.x[&q], &t).ok_or_else(|| {
                SectionError::LimitHypothesisFailed(format!("terminal at {}<{}", name(d, p), name(d, q)))
            })?;
            out.phi.insert((p, q), f);
        }
    }
    validate_section(d, &out)?;
    Ok(out)
}

/// The transpose y → i_* w of a map χ: i^* y → w.
pub fn i_star_transpose<D: LaxDiagram>(
    d: &D,
    dec: &Decomposition,
    y: &SectionOf<D>,
    chi: &SectionMapOf<D>,
) -> SectionMapOf<D> {
    let mut psi = chi.psi.clone();
    for p in dec.sieve() {
        psi.insert(p, d.fiber(p).to_terminal(&y.x[&p]));
    }
    SectionMap { psi }
}

/// j_!: initial objects on the cosieve, unique maps out of them.
pub fn j_lower_shriek<D: LaxDiagram>(
    d: &D,
    dec: &Decomposition,
    u: &SectionOf<D>,
) -> Result<SectionOf<D>, SectionError> {
    check_domain::<D>(u, &dec.sieve(), "sieve")?;
    let mut out = u.clone();
    for q in dec.cosieve() {
        out.x.insert(q, d.fiber(q).initial());
    }
    for (p, q) in d.base().strict_pairs() {
        if !dec.in_sieve(q) {
            let t = d.push(p, q, &out.x[&p]);
            out.phi.insert((p, q), d.fiber(q).from_initial(&t));
        }
    }
    validate_section(d, &out)?;
    Ok(out)
}

/// The transpose j_! u → y of a map χ: u → j^* y.
pub fn j_shriek_transpose<D: LaxDiagram>(
    d: &D,
    dec: &Decomposition,
    y: &SectionOf<D>,
    chi: &SectionMapOf<D>,
) -> SectionMapOf<D> {
    let mut psi = chi.psi.clone();
    for q in dec.cosieve() {
        psi.insert(q, d.fiber(q).from_initial(&y.x[&q]));
    }
    SectionMap { psi }
}

fn search_maps<D: LaxDiagram>(
    d: &D,
    x: &SectionOf<D>,
    y: &SectionOf<D>,
    isos_only: bool,
    first_only: bool,
) -> Vec<SectionMapOf<D>> {
    let base = d.base();
    let order: Vec<usize> = base.linear_extension().iter().copied().filter(|p| x.x.contains_key(p)).collect();
    if order.iter().any(|p| !y.x.contains_key(p)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: BTreeMap<usize, Mor<D>> = BTreeMap::new();
    #[allow(clippy::too_many_arguments)]
    fn rec<D: LaxDiagram>(
        d: &D,
        x: &SectionOf<D>,
        y: &SectionOf<D>,
        order: &[usize],
        pos: usize,
        isos_only: bool,
        first_only: bool,
        cur: &mut BTreeMap<usize, Mor<D>>,
        out: &mut Vec<SectionMapOf<D>>,
    ) {
        if pos == order.len() {
            out.push(SectionMap { psi: cur.clone() });
            return;
        }
        let q = order[pos];
        let c = d.fiber(q);
        let cands = if isos_only { c.isos(&x.x[&q], &y.x[&q]) } else { c.homs(&x.x[&q], &y.x[&q]) };
        // precompute the constraint sides that do not depend on ψ_q
        let lower: Vec<(usize, Mor<D>)> = order[..pos]
            .iter()
            .filter(|&&p| d.base().lt(p, q))
            .map(|&p| (p, c.compose(&d.push_mor(p, q, &cur[&p]), &x.phi[&(p, q)])))
            .collect();
        for m in cands {
            if lower.iter().all(|(p, lhs)| c.compose(&y.phi[&(*p, q)], &m) == *lhs) {
                cur.insert(q, m);
                rec(d, x, y, order, pos + 1, isos_only, first_only, cur, out);
                cur.remove(&q);
                if first_only && !out.is_empty() {
                    return;
                }
            }
        }
    }
    rec(d, x, y, &order, 0, isos_only, first_only, &mut cur, &mut out);
    out
}

/// Every map of sections x → y.
pub fn section_homs<D: LaxDiagram>(d: &D, x: &SectionOf<D>, y: &SectionOf<D>) -> Vec<SectionMapOf<D>> {
    search_maps(d, x, y, false, false)
}

/// Some isomorphism x → y, found by exhaustive search.
pub fn section_iso<D: LaxDiagram>(d: &D, x: &SectionOf<D>, y: &SectionOf<D>) -> Option<SectionMapOf<D>> {
    search_maps(d, x, y, true, true).into_iter().next()
}

pub fn is_terminal_section<D: LaxDiagram>(d: &D, s: &SectionOf<D>) -> bool {
    s.x.iter().all(|(&p, v)| d.fiber(p).is_terminal(v))
}

/// Corners and comparison of the fracture square of one section.
#[derive(Debug, Clone)]
pub struct Fracture<O, M> {
    pub open_part: Section<O, M>,
    pub closed_part: Section<O, M>,
    pub glued: Section<O, M>,
    pub pullback: Section<O, M>,
    pub comparison: SectionMap<M>,
    pub is_iso: bool,
}

pub type FractureOf<D> = Fracture<Obj<D>, Mor<D>>;

/// s → j_*j^*s ×_{i_*i^*j_*j^*s} i_*i^*s, with pullbacks and φ-maps computed levelwise.
pub fn fracture<D: LaxDiagram>(d: &D, dec: &Decomposition, s: &SectionOf<D>) -> Result<FractureOf<D>, SectionError> {
    let sieve = dec.sieve();
    let cosieve = dec.cosieve();
    let jp = j_lower_star(d, dec, &s.restrict(&sieve))?;
    let a = &jp.section;
    let eta = jp.transpose(d, s, &identity_map(d, &s.restrict(&sieve)))?;
    let b = i_lower_star(d, dec, &s.restrict(&cosieve))?;
    let c = i_lower_star(d, dec, &a.restrict(&cosieve))?;
    // b → c is i_* i^* η; a → c is the unit of i^* ⊣ i_*
    let b_to_c = i_star_transpose(d, dec, &b, &eta.restrict(&cosieve));
    let a_to_c = i_star_transpose(d, dec, a, &identity_map(d, &a.restrict(&cosieve)));
    let s_to_b = i_star_transpose(d, dec, s, &identity_map(d, &s.restrict(&cosieve)));

    let mut pb = Section { x: BTreeMap::new(), phi: BTreeMap::new() };
    let mut cones = BTreeMap::new();
    for p in 0..d.base().len() {
        let cat = d.fiber(p);
        let diag = ShapedDiagram::cospan(
            a.x[&p].clone(),
            b.x[&p].clone(),
            c.x[&p].clone(),
            a_to_c.psi[&p].clone(),
            b_to_c.psi[&p].clone(),
        );
        let lim = cat.limit(&diag);
        pb.x.insert(p, lim.apex.clone());
        cones.insert(p, (diag, lim));
    }
    for (p, q) in d.base().strict_pairs() {
        let cq = d.fiber(q);
        let (_, limq) = &cones[&q];
        let legs = [a, &b, &c]
            .iter()
            .zip(&limq.legs)
            .map(|(corner, leg)| cq.compose(&corner.phi[&(p, q)], leg))
            .collect();
        let cone = Cone { apex: limq.apex.clone(), legs };
        let (diag, lim) = &cones[&p];
        pb.phi.insert((p, q), factor_through_pushed(d, p, q, diag, lim, &cone)?);
    }
    validate_section(d, &pb)?;

    let mut psi = BTreeMap::new();
    for p in 0..d.base().len() {
        let cat = d.fiber(p);
        let la = eta.psi[&p].clone();
        let lb = s_to_b.psi[&p].clone();
        let lc = cat.compose(&a_to_c.psi[&p], &la);
        let cone = Cone { apex: s.x[&p].clone(), legs: vec![la, lb, lc] };
        let m = cat.factor(&cones[&p].1, &cone).ok_or_else(|| SectionError::ConeMismatch(name(d, p)))?;
        psi.insert(p, m);
    }
    let comparison = SectionMap { psi };
    validate_map(d, s, &pb, &comparison)?;
    let is_iso = is_iso_map(d, &comparison);
    Ok(Fracture { open_part: a.clone(), closed_part: b, glued: c, pullback: pb, comparison, is_iso })
}

/// Outcome of one named family of checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    /// Locus of the first failure.
    pub first_failure: Option<String>,
}

impl CheckResult {
    pub fn new(name: &str) -> Self {
        CheckResult { name: name.to_string(), instances: 0, failures: 0, first_failure: None }
    }

    pub fn record(&mut self, ok: bool, locus: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(locus());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecollementReport {
    pub checks: Vec<CheckResult>,
}

impl RecollementReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Restriction along hom-sets is a bijection onto `target`, and `transpose`
/// inverts it on both sides.
fn bijection_witness<M: Clone + PartialEq>(
    source: &[SectionMap<M>],
    target: &[SectionMap<M>],
    restrict: impl Fn(&SectionMap<M>) -> SectionMap<M>,
    transpose: impl Fn(&SectionMap<M>) -> Option<SectionMap<M>>,
) -> bool {
    if source.len() != target.len() {
        return false;
    }
    let images: Vec<SectionMap<M>> = source.iter().map(&restrict).collect();
    if !images.iter().all(|i| target.contains(i)) {
        return false;
    }
    for (s, i) in source.iter().zip(&images) {
        if transpose(i).as_ref() != Some(s) {
            return false;
        }
    }
    target.iter().all(|t| transpose(t).is_some_and(|s| restrict(&s) == *t))
}

/// The recollement checks for a sieve on sample sections; `partners` are
/// the test objects on the other side of each hom-set bijection.
pub fn recollement_report<D: LaxDiagram>(
    d: &D,
    dec: &Decomposition,
    samples: &[SectionOf<D>],
    partners: &[SectionOf<D>],
) -> RecollementReport {
    let sieve = dec.sieve();
    let cosieve = dec.cosieve();
    let mut jj = CheckResult::new("j^*j_* = id");
    let mut ii = CheckResult::new("i^*i_* = id");
    let mut ji = CheckResult::new("j^*i_* terminal");
    let mut cons = CheckResult::new("joint conservativity");
    let mut adj_j = CheckResult::new("j^* -| j_* bijection");
    let mut adj_i = CheckResult::new("i^* -| i_* bijection");
    let mut adj_s = CheckResult::new("j_! -| j^* bijection");
    let mut build = CheckResult::new("constructions");
    for (k, s) in samples.iter().enumerate() {
        let u = s.restrict(&sieve);
        let w = s.restrict(&cosieve);
        let (jp, is, js) = match (j_lower_star(d, dec, &u), i_lower_star(d, dec, &w), j_lower_shriek(d, dec, &u)) {
            (Ok(a), Ok(b), Ok(c)) => {
                build.record(true, String::new);
                (a, b, c)
            }
            (a, b, c) => {
                let err = [a.err(), b.err(), c.err()].into_iter().flatten().next().expect("one failed");
                build.record(false, || format!("sample {k}: {err}"));
                continue;
            }
        };
        jj.record(jp.section.restrict(&sieve) == u, || format!("sample {k}"));
        ii.record(is.restrict(&cosieve) == w, || format!("sample {k}"));
        ji.record(is_terminal_section(d, &is.restrict(&sieve)), || format!("sample {k}"));

        for (l, y) in partners.iter().enumerate() {
            let locus = || format!("sample {k}, partner {l}");
            let jy = y.restrict(&sieve);
            let iy = y.restrict(&cosieve);
            let ok = bijection_witness(
                &section_homs(d, y, &jp.section),
                &section_homs(d, &jy, &u),
                |f| f.restrict(&sieve),
                |g| jp.transpose(d, y, g).ok(),
            );
            adj_j.record(ok, locus);
            let ok = bijection_witness(
                &section_homs(d, y, &is),
                &section_homs(d, &iy, &w),
                |f| f.restrict(&cosieve),
                |g| Some(i_star_transpose(d, dec, y, g)),
            );
            adj_i.record(ok, locus);
            let ok = bijection_witness(
                &section_homs(d, &js, y),
                &section_homs(d, &u, &jy),
                |f| f.restrict(&sieve),
                |g| Some(j_shriek_transpose(d, dec, y, g)),
            );
            adj_s.record(ok, locus);
            for f in section_homs(d, s, y) {
                let restricted_iso =
                    is_iso_map(d, &f.restrict(&sieve)) && is_iso_map(d, &f.restrict(&cosieve));
                cons.record(!restricted_iso || is_iso_map(d, &f), locus);
            }
        }
    }
    RecollementReport { checks: vec![build, jj, ii, ji, cons, adj_j, adj_i, adj_s] }
}

/// Options for section enumeration.
#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    /// Pointwise size (or dimension) bound on the objects x_p.
    pub bound: usize,
    /// Stop after this many sections.
    pub limit: usize,
}

fn enumerate_rec<D: LaxDiagram, R: Rng>(
    d: &D,
    objects: &[Vec<Obj<D>>],
    fixed: Option<&SectionOf<D>>,
    order: &[usize],
    pos: usize,
    cur: &mut SectionOf<D>,
    out: &mut Vec<SectionOf<D>>,
    limit: usize,
    rng: &mut Option<&mut R>,
) {
    if out.len() >= limit {
        return;
    }
    if pos == order.len() {
        out.push(cur.clone());
        return;
    }
    let q = order[pos];
    let base = d.base();
    let below: Vec<usize> = order[..pos].iter().rev().copied().filter(|&p| base.lt(p, q)).collect();
    if let Some(f) = fixed.filter(|f| f.x.contains_key(&q)) {
        cur.x.insert(q, f.x[&q].clone());
        for &p in &below {
            if let Some(m) = f.phi.get(&(p, q)) {
                cur.phi.insert((p, q), m.clone());
            }
        }
        assign_phis(d, objects, fixed, order, pos, &below, 0, cur, out, limit, rng);
        cur.x.remove(&q);
        for &p in &below {
            cur.phi.remove(&(p, q));
        }
        return;
    }
    let mut cands: Vec<usize> = (0..objects[q].len()).collect();
    if let Some(r) = rng.as_mut() {
        cands.shuffle(*r);
    }
    for i in cands {
        cur.x.insert(q, objects[q][i].clone());
        assign_phis(d, objects, fixed, order, pos, &below, 0, cur, out, limit, rng);
        cur.x.remove(&q);
        if out.len() >= limit {
            return;
        }
    }
}

/// Chooses φ_qp for the elements below q, largest first, so every cocycle
/// constraint involving φ_qp can be checked when it is chosen.
#[allow(clippy::too_many_arguments)]
fn assign_phis<D: LaxDiagram, R: Rng>(
    d: &D,
    objects: &[Vec<Obj<D>>],
    fixed: Option<&SectionOf<D>>,
    order: &[usize],
    pos: usize,
    below: &[usize],
    k: usize,
    cur: &mut SectionOf<D>,
    out: &mut Vec<SectionOf<D>>,
    limit: usize,
    rng: &mut Option<&mut R>,
) {
    if out.len() >= limit {
        return;
    }
    let q = order[pos];
    if k == below.len() {
        enumerate_rec(d, objects, fixed, order, pos + 1, cur, out, limit, rng);
        return;
    }
    let p = below[k];
    let c = d.fiber(q);
    let base = d.base();
    let mids: Vec<usize> = below[..k].iter().copied().filter(|&m| base.lt(p, m)).collect();
    let check = |f: &Mor<D>, cur: &SectionOf<D>| {
        mids.iter().all(|&m| {
            let lhs = c.compose(&d.can(p, m, q, &cur.x[&p]), f);
            let rhs = c.compose(&d.push_mor(m, q, &cur.phi[&(p, m)]), &cur.phi[&(m, q)]);
            lhs == rhs
        })
    };
    if let Some(f) = cur.phi.get(&(p, q)).cloned() {
        if check(&f, cur) {
            assign_phis(d, objects, fixed, order, pos, below, k + 1, cur, out, limit, rng);
        }
        return;
    }
    let mut cands = c.homs(&cur.x[&q], &d.push(p, q, &cur.x[&p]));
    if let Some(r) = rng.as_mut() {
        cands.shuffle(*r);
    }
    for f in cands {
        if !check(&f, cur) {
            continue;
        }
        cur.phi.insert((p, q), f);
        assign_phis(d, objects, fixed, order, pos, below, k + 1, cur, out, limit, rng);
        cur.phi.remove(&(p, q));
        if out.len() >= limit {
            return;
        }
    }
}

/// Every section with pointwise bound `opts.bound` (up to `opts.limit`),
/// optionally extending fixed data on part of the base.
pub fn enumerate_sections<D: LaxDiagram>(
    d: &D,
    opts: EnumOptions,
    fixed: Option<&SectionOf<D>>,
) -> Vec<SectionOf<D>> {
    let objects: Vec<Vec<Obj<D>>> = (0..d.base().len()).map(|p| d.fiber(p).objects(opts.bound)).collect();
    let order = d.base().linear_extension().to_vec();
    let mut out = Vec::new();
    let mut cur = Section { x: BTreeMap::new(), phi: BTreeMap::new() };
    enumerate_rec::<D, rand_chacha::ChaCha8Rng>(d, &objects, fixed, &order, 0, &mut cur, &mut out, opts.limit, &mut None);
    out
}

/// `count` sections drawn by randomized backtracking (duplicates removed,
/// so fewer may be returned when few sections exist).
pub fn random_sections<D: LaxDiagram, R: Rng>(
    d: &D,
    bound: usize,
    count: usize,
    rng: &mut R,
) -> Vec<SectionOf<D>> {
    let objects: Vec<Vec<Obj<D>>> = (0..d.base().len()).map(|p| d.fiber(p).objects(bound)).collect();
    let order = d.base().linear_extension().to_vec();
    let mut out: Vec<SectionOf<D>> = Vec::new();
    for _ in 0..count * 4 {
        if out.len() >= count {
            break;
        }
        let mut found = Vec::new();
        let mut cur = Section { x: BTreeMap::new(), phi: BTreeMap::new() };
        enumerate_rec(d, &objects, None, &order, 0, &mut cur, &mut found, 1, &mut Some(&mut *rng));
        if let Some(s) = found.pop() {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// A section over Δ¹ read as a triple [u, z, α: z → τ(u)].
#[derive(Debug, Clone, PartialEq)]
pub struct Triple<O, M> {
    pub u: O,
    pub z: O,
    pub alpha: M,
}

pub fn to_triple<O: Clone, M: Clone>(s: &Section<O, M>) -> Triple<O, M> {
    Triple { u: s.x[&0].clone(), z: s.x[&1].clone(), alpha: s.phi[&(0, 1)].clone() }
}

pub fn from_triple<O: Clone, M: Clone>(t: &Triple<O, M>) -> Section<O, M> {
    Section {
        x: BTreeMap::from([(0, t.u.clone()), (1, t.z.clone())]),
        phi: BTreeMap::from([((0, 1), t.alpha.clone())]),
    }
}

/// Morphisms of triples: pairs (f: u → u′, g: z → z′) with τ(f) ∘ α = α′ ∘ g.
pub fn triple_homs<D: LaxDiagram>(d: &D, a: &Triple<Obj<D>, Mor<D>>, b: &Triple<Obj<D>, Mor<D>>) -> Vec<(Mor<D>, Mor<D>)> {
    let (c0, c1) = (d.fiber(0), d.fiber(1));
    let mut out = Vec::new();
    for f in c0.homs(&a.u, &b.u) {
        let lhs = d.push_mor(0, 1, &f);
        for g in c1.homs(&a.z, &b.z) {
            if c1.compose(&lhs, &a.alpha) == c1.compose(&b.alpha, &g) {
                out.push((f.clone(), g));
            }
        }
    }
    out
}
