//! Stratified finite spaces π: Q → P. Sheaves on the Alexandroff space Q
//! are copresheaves on Q; the strata, their embeddings ρ_p, the gluing
//! diagram over P^op and the reconstruction Θ_P are computed explicitly.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concretecats::{CatError, Category, Cone, CoPresheaf, CopshCat, PresheafMap, ShapeMap, ShapedDiagram};
use crate::laxdiagram::{preserves_pullback, Ambient, LaxDiagram, Pipeline, SetCan, SetDiagram, Stage};
use crate::poset::{FinPoset, MonotoneMap, PosetDoc, PosetError, SubsetKind};
use crate::rlaxsections::{
    eval_chain, eval_inclusion, section_iso, validate_map, validate_section, CheckResult, Section, SectionError,
    SectionMap, SectionMapOf, SectionOf,
};
use crate::subdivision::{subdivide, SdPoset, SubdivisionError, DEFAULT_CHAIN_LIMIT};

#[derive(Debug, Error)]
pub enum StratError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    Subdivision(#[from] SubdivisionError),
    #[error("{0} is not a cosieve of the stratifying poset")]
    NotCosieve(String),
    #[error("map does not commute with the stratifications at {0}")]
    NotOverBase(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub space: PosetDoc,
    pub strat_poset: PosetDoc,
    pub pi: BTreeMap<String, String>,
}

/// A finite poset Q with a monotone map π: Q → P.
#[derive(Debug, Clone)]
pub struct StratSpace {
    space: Arc<FinPoset>,
    strat: FinPoset,
    pi: Vec<usize>,
    /// ρ_p: extension by singletons from Q_p to π⁻¹(P^{≥p}), then right Kan extension to Q.
    embed: Vec<Pipeline>,
}

impl StratSpace {
    pub fn new(space: FinPoset, strat: FinPoset, pi: Vec<usize>) -> Result<Self, StratError> {
        MonotoneMap::new(space.clone(), strat.clone(), pi.clone())?;
        let space = Arc::new(space);
        let mut embed = Vec::with_capacity(strat.len());
        for p in 0..strat.len() {
            let up: Vec<usize> = (0..space.len()).filter(|&z| strat.leq(p, pi[z])).collect();
            let outer = ShapeMap::inclusion(&space, &up);
            let inside: Vec<usize> = (0..up.len()).filter(|&i| pi[up[i]] == p).collect();
            let inner = ShapeMap::inclusion(outer.source(), &inside);
            let domain = inner.source().clone();
            embed.push(Pipeline::new(&domain, vec![Stage::ExtendBySingleton(inner), Stage::Rke(outer)])?);
        }
        Ok(StratSpace { space, strat, pi, embed })
    }

    pub fn from_doc(doc: &SpaceDoc) -> Result<Self, StratError> {
        let space = FinPoset::from_doc(&doc.space)?;
        let strat = FinPoset::from_doc(&doc.strat_poset)?;
        let map = MonotoneMap::from_names(space.clone(), strat.clone(), &doc.pi)?;
        Self::new(space, strat, map.assignment().to_vec())
    }

    pub fn to_doc(&self) -> SpaceDoc {
        SpaceDoc {
            space: self.space.to_doc(),
            strat_poset: self.strat.to_doc(),
            pi: (0..self.space.len())
                .map(|z| (self.space.name(z).to_string(), self.strat.name(self.pi[z]).to_string()))
                .collect(),
        }
    }

    /// Q = P stratified by the identity.
    pub fn trivial(p: FinPoset) -> Self {
        let pi = (0..p.len()).collect();
        Self::new(p.clone(), p, pi).expect("identity is monotone")
    }

    /// a, b < u, v over Δ¹ with a, b ↦ 0 and u, v ↦ 1.
    pub fn pseudo_circle() -> Self {
        let q = FinPoset::new(&["a", "b", "u", "v"], &[("a", "u"), ("a", "v"), ("b", "u"), ("b", "v")])
            .expect("pseudo-circle");
        Self::new(q, FinPoset::chain(2 - 1), vec![0, 0, 1, 1]).expect("monotone")
    }

    /// A cone point c below two edges e, e′, both below one cell f, over Δ².
    pub fn cone_over_interval() -> Self {
        let q = FinPoset::new(&["c", "e", "e'", "f"], &[("c", "e"), ("c", "e'"), ("e", "f"), ("e'", "f")])
            .expect("cone");
        Self::new(q, FinPoset::chain(2), vec![0, 1, 1, 2]).expect("monotone")
    }

    pub fn space(&self) -> &Arc<FinPoset> {
        &self.space
    }

    pub fn strat(&self) -> &FinPoset {
        &self.strat
    }

    pub fn pi(&self, z: usize) -> usize {
        self.pi[z]
    }

    pub fn stratum(&self, p: usize) -> &Arc<FinPoset> {
        self.embed[p].domain()
    }

    /// The inclusion Q_p ⊆ Q.
    pub fn stratum_map(&self, p: usize) -> ShapeMap {
        self.embed[p].embedding_map()
    }

    pub fn embedding(&self, p: usize) -> &Pipeline {
        &self.embed[p]
    }

    /// π⁻¹(O) as a sorted list of points.
    pub fn preimage(&self, o: &[usize]) -> Vec<usize> {
        (0..self.space.len()).filter(|&z| o.contains(&self.pi[z])).collect()
    }

    /// Φ^p: restriction to the stratum.
    pub fn phi(&self, p: usize, x: &CoPresheaf) -> CoPresheaf {
        x.restrict(&self.stratum_map(p))
    }

    pub fn phi_mor(&self, p: usize, f: &PresheafMap) -> PresheafMap {
        f.restrict(&self.stratum_map(p))
    }

    pub fn rho(&self, p: usize, y: &CoPresheaf) -> CoPresheaf {
        self.embed[p].apply(y)
    }

    pub fn rho_mor(&self, p: usize, f: &PresheafMap) -> PresheafMap {
        self.embed[p].apply_mor(f)
    }

    /// x → ρ_p Φ^p x.
    pub fn unit(&self, p: usize, x: &CoPresheaf) -> PresheafMap {
        self.embed[p].unit(x)
    }

    /// Φ^p ρ_p y → y.
    pub fn counit(&self, p: usize, y: &CoPresheaf) -> PresheafMap {
        self.embed[p].counit(y)
    }

    /// The lax diagram over P^op with fibers the strata, Γ^q_p = Φ^q ρ_p
    /// for q < p in P, and cells Φ^r(η^q at ρ_p x).
    pub fn gluing_diagram(&self) -> Result<SetDiagram, StratError> {
        let base = self.strat.opposite();
        let fibers: Vec<Arc<FinPoset>> = (0..self.strat.len()).map(|p| self.stratum(p).clone()).collect();
        let mut push = std::collections::HashMap::new();
        for (a, b) in base.strict_pairs() {
            let restrict = Pipeline::new(&self.space, vec![Stage::Restrict(self.stratum_map(b))])?;
            push.insert((a, b), self.embed[a].then(&restrict)?);
        }
        let cans = base.strict_triples().into_iter().map(|t| (t, SetCan::UnitOfAdjunction)).collect();
        let ambient = Ambient { shape: self.space.clone(), embed: self.embed.clone() };
        Ok(SetDiagram::new(base, fibers, push, cans, Some(ambient))?)
    }

    /// The section p ↦ Φ^p x with φ = Φ^q of the unit x → ρ_p Φ^p x.
    pub fn transport(&self, x: &CoPresheaf) -> SectionOf<SetDiagram> {
        let base = self.strat.opposite();
        let xs = (0..self.strat.len()).map(|p| (p, self.phi(p, x))).collect();
        let phi = base.strict_pairs().into_iter().map(|(a, b)| ((a, b), self.phi_mor(b, &self.unit(a, x)))).collect();
        Section { x: xs, phi }
    }

    pub fn transport_mor(&self, f: &PresheafMap) -> SectionMapOf<SetDiagram> {
        SectionMap { psi: (0..self.strat.len()).map(|p| (p, self.phi_mor(p, f))).collect() }
    }

    /// Θ_P: the limit over sd(P^op) of σ ↦ ρ_{max σ}(eval σ).
    pub fn theta(&self, d: &SetDiagram, s: &SectionOf<SetDiagram>) -> Result<Theta, StratError> {
        let sd = subdivide(d.base(), DEFAULT_CHAIN_LIMIT)?;
        let mut values = Vec::with_capacity(sd.len());
        for c in sd.chains() {
            values.push(self.rho(c.top(), &eval_chain(d, s, c)?));
        }
        let mut edges = Vec::with_capacity(sd.poset().covers().len());
        for &(a, b) in sd.poset().covers() {
            let (ca, cb) = (sd.chain(a), sd.chain(b));
            if ca.top() == cb.top() {
                edges.push(self.rho_mor(ca.top(), &eval_inclusion(d, s, ca, cb)?));
            } else {
                edges.push(self.unit(cb.top(), &values[a]));
            }
        }
        let diagram = ShapedDiagram { shape: sd.poset().clone(), values, edges };
        let cat = CopshCat::new(self.space.clone());
        let cone = cat.limit(&diagram);
        Ok(Theta { sheaf: cone.apex.clone(), sd, diagram, cone })
    }

    /// x → Θ(transport x), legs the composite units along each chain.
    pub fn theta_unit(&self, d: &SetDiagram, x: &CoPresheaf) -> Result<(Theta, PresheafMap), StratError> {
        let th = self.theta(d, &self.transport(x))?;
        let mut legs = Vec::with_capacity(th.sd.len());
        for c in th.sd.chains() {
            let mut leg = PresheafMap::identity(x);
            for &p in c.elems() {
                leg = self.unit(p, leg.target()).after(&leg);
            }
            legs.push(leg);
        }
        let cat = CopshCat::new(self.space.clone());
        let m = cat
            .factor(&th.cone, &Cone { apex: x.clone(), legs })
            .ok_or_else(|| SectionError::ConeMismatch("theta unit".into()))?;
        Ok((th, m))
    }

    /// transport(Θ s) → s: Φ^p of the limit leg at [p], then the counit.
    pub fn theta_counit(
        &self,
        d: &SetDiagram,
        s: &SectionOf<SetDiagram>,
        th: &Theta,
    ) -> Result<SectionMapOf<SetDiagram>, StratError> {
        let mut psi = BTreeMap::new();
        for p in 0..self.strat.len() {
            let i = th.sd.index_of(&crate::subdivision::Chain::singleton(p)).expect("singleton chain");
            let leg = self.phi_mor(p, &th.cone.legs[i]);
            psi.insert(p, self.counit(p, &s.x[&p]).after(&leg));
        }
        let m = SectionMap { psi };
        validate_map(d, &self.transport(&th.sheaf), s, &m)?;
        Ok(m)
    }

    /// The subterminal section U_O (terminal over O, initial elsewhere) and
    /// whether Θ(U_O) is the characteristic subterminal of π⁻¹(O).
    pub fn recover_stratification(&self, d: &SetDiagram, o: &[usize]) -> Result<Recovery, StratError> {
        if !matches!(self.strat.classify_subset(o), SubsetKind::Cosieve | SubsetKind::Both) {
            return Err(StratError::NotCosieve(self.strat.subset_label(o)));
        }
        let mut x = BTreeMap::new();
        for p in 0..self.strat.len() {
            let c = d.fiber(p);
            x.insert(p, if o.contains(&p) { c.terminal() } else { c.initial() });
        }
        let mut phi = BTreeMap::new();
        for (a, b) in d.base().strict_pairs() {
            let t = d.push(a, b, &x[&a]);
            let hs = d.fiber(b).homs(&x[&b], &t);
            if hs.len() != 1 {
                return Err(SectionError::LimitHypothesisFailed(format!("U_O at {}<{}", a, b)).into());
            }
            phi.insert((a, b), hs.into_iter().next().expect("one"));
        }
        let section = Section { x, phi };
        validate_section(d, &section)?;
        let theta = self.theta(d, &section)?.sheaf;
        let incl = ShapeMap::inclusion(&self.space, &self.preimage(o));
        let expected = CoPresheaf::terminal(incl.source()).extend_by_empty(&incl)?;
        Ok(Recovery { subterminal: theta.is_subterminal(), matches: theta == expected, section, theta, expected })
    }

    /// f(p) = π⁻¹(P^{≥p}) are open, cover Q, and ⋃_{r ≥ p,q} f(r) = f(p) ∩ f(q).
    pub fn stratification_axioms(&self) -> Vec<CheckResult> {
        let n = self.strat.len();
        let f: Vec<Vec<bool>> =
            (0..n).map(|p| (0..self.space.len()).map(|z| self.strat.leq(p, self.pi[z])).collect()).collect();
        let mut open = CheckResult::new("f(p) open");
        for p in 0..n {
            open.record(self.space.is_up_closed(&f[p]), || self.strat.name(p).to_string());
        }
        let mut cover = CheckResult::new("union of f(p) is Q");
        cover.record((0..self.space.len()).all(|z| (0..n).any(|p| f[p][z])), || "Q".into());
        let mut meet = CheckResult::new("meets");
        for p in 0..n {
            for q in 0..n {
                let ok = (0..self.space.len()).all(|z| {
                    let join = (0..n).any(|r| self.strat.leq(p, r) && self.strat.leq(q, r) && f[r][z]);
                    join == (f[p][z] && f[q][z])
                });
                meet.record(ok, || format!("{},{}", self.strat.name(p), self.strat.name(q)));
            }
        }
        vec![open, cover, meet]
    }

    /// Φ^q ρ_p is terminal for every p ≱ q, on all objects of pointwise size ≤ bound.
    pub fn out_of_position(&self, bound: usize) -> CheckResult {
        let mut res = CheckResult::new("out of position");
        for p in 0..self.strat.len() {
            let ys = CopshCat::new(self.stratum(p).clone()).objects(bound);
            for q in 0..self.strat.len() {
                if self.strat.leq(q, p) {
                    continue;
                }
                for y in &ys {
                    let v = self.phi(q, &self.rho(p, y));
                    res.record(v.sizes().iter().all(|&s| s == 1), || {
                        format!("{} vs {}: {:?}", self.strat.name(p), self.strat.name(q), y)
                    });
                }
            }
        }
        res
    }
}

/// Θ_P of a section with the data it was computed from.
#[derive(Debug, Clone)]
pub struct Theta {
    pub sheaf: CoPresheaf,
    pub sd: SdPoset,
    pub diagram: ShapedDiagram<CoPresheaf, PresheafMap>,
    pub cone: Cone<CoPresheaf, PresheafMap>,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub section: SectionOf<SetDiagram>,
    pub theta: CoPresheaf,
    pub expected: CoPresheaf,
    pub subterminal: bool,
    pub matches: bool,
}

/// A monotone g: Q → Q′ with π′ ∘ g = π.
#[derive(Debug, Clone)]
pub struct StratMap {
    pub source: StratSpace,
    pub target: StratSpace,
    map: ShapeMap,
}

impl StratMap {
    pub fn new(source: StratSpace, target: StratSpace, assignment: Vec<usize>) -> Result<Self, StratError> {
        if source.strat != target.strat {
            return Err(StratError::NotOverBase("stratifying posets differ".into()));
        }
        let map = ShapeMap::new(source.space.clone(), target.space.clone(), assignment)?;
        for z in 0..source.space.len() {
            if target.pi[map.apply(z)] != source.pi[z] {
                return Err(StratError::NotOverBase(source.space.name(z).to_string()));
            }
        }
        Ok(StratMap { source, target, map })
    }

    /// The pseudo-circle collapsed onto Δ¹ stratified by the identity.
    pub fn collapse_pseudo_circle() -> Self {
        Self::new(StratSpace::pseudo_circle(), StratSpace::trivial(FinPoset::chain(1)), vec![0, 0, 1, 1])
            .expect("collapse lies over Δ¹")
    }

    /// g_*: the value at q′ is the limit over g⁻¹(Q′^{≥q′}).
    pub fn direct_image(&self, x: &CoPresheaf) -> CoPresheaf {
        x.rke(&self.map)
    }

    pub fn direct_image_mor(&self, f: &PresheafMap) -> PresheafMap {
        f.rke(&self.map)
    }

    /// 𝒢(g_*) on the fiber over p: Φ′^p g_* ρ_p.
    pub fn fiber_functor(&self, p: usize, y: &CoPresheaf) -> CoPresheaf {
        self.target.phi(p, &self.direct_image(&self.source.rho(p, y)))
    }

    pub fn fiber_functor_mor(&self, p: usize, f: &PresheafMap) -> PresheafMap {
        self.target.phi_mor(p, &self.direct_image_mor(&self.source.rho_mor(p, f)))
    }

    /// Whether g_* ρ_p y lies in the image of ρ′_p (its unit is invertible).
    pub fn lands_in_stratum(&self, p: usize, y: &CoPresheaf) -> bool {
        self.target.unit(p, &self.direct_image(&self.source.rho(p, y))).is_iso()
    }

    /// Γ′^b_a F_a y → F_b Γ^b_a y for a P^op-relation a < b; invertible
    /// exactly when the locally cocartesian edge at y is preserved.
    pub fn comparison(&self, a: usize, b: usize, y: &CoPresheaf) -> Option<PresheafMap> {
        let gy = self.direct_image(&self.source.rho(a, y));
        let left = self.target.phi_mor(b, &self.target.unit(a, &gy)).inverse()?;
        let right = self.target.phi_mor(b, &self.direct_image_mor(&self.source.unit(b, &self.source.rho(a, y))));
        Some(right.after(&left))
    }

    /// 𝒢(g_*) applied to a section of 𝒢(X).
    pub fn apply_section(
        &self,
        dy: &SetDiagram,
        s: &SectionOf<SetDiagram>,
    ) -> Result<SectionOf<SetDiagram>, StratError> {
        let x = s.x.iter().map(|(&p, v)| (p, self.fiber_functor(p, v))).collect();
        let mut phi = BTreeMap::new();
        for (&(a, b), f) in &s.phi {
            let c = self
                .comparison(a, b, &s.x[&a])
                .and_then(|c| c.inverse())
                .ok_or_else(|| SectionError::LimitHypothesisFailed(format!("cocartesian edge {a}<{b}")))?;
            phi.insert((a, b), c.after(&self.fiber_functor_mor(b, f)));
        }
        let out = Section { x, phi };
        validate_section(dy, &out)?;
        Ok(out)
    }

    /// Instance checks that 𝒢(g_*) is a morphism of toposic lax diagrams
    /// compatible with transport.
    pub fn functoriality_report(&self, bound: usize, max_objects: usize) -> Result<Vec<CheckResult>, StratError> {
        let dx = self.source.gluing_diagram()?;
        let dy = self.target.gluing_diagram()?;
        let n = self.source.strat.len();
        let objs: Vec<Vec<CoPresheaf>> = (0..n)
            .map(|p| dx.fiber(p).objects(bound).into_iter().take(max_objects).collect())
            .collect();
        let mut lands = CheckResult::new("g_* preserves strata");
        let mut cocart = CheckResult::new("locally cocartesian edges preserved");
        let mut lex = CheckResult::new("fiber functors left exact");
        for p in 0..n {
            for y in &objs[p] {
                lands.record(self.lands_in_stratum(p, y), || format!("{p}: {y:?}"));
            }
            let t = self.fiber_functor(p, &dx.fiber(p).terminal());
            lex.record(dy.fiber(p).is_terminal(&t), || format!("terminal at {p}"));
            let cat = dx.fiber(p);
            for (i, x) in objs[p].iter().enumerate().take(4) {
                for z in objs[p].iter().skip(i).take(4) {
                    let hx = cat.homs(x, z);
                    for f in hx.iter().take(2) {
                        for g in hx.iter().skip(1).take(2) {
                            let ok = preserves_pullback(
                                cat,
                                dy.fiber(p),
                                |o| self.fiber_functor(p, o),
                                |m| self.fiber_functor_mor(p, m),
                                f,
                                g,
                            );
                            lex.record(ok, || format!("pullback at {p}"));
                        }
                    }
                }
            }
        }
        for (a, b) in dx.base().strict_pairs() {
            for y in &objs[a] {
                let ok = self.comparison(a, b, y).is_some_and(|c| c.is_iso());
                cocart.record(ok, || format!("{a}<{b}: {y:?}"));
            }
        }
        let mut sections = CheckResult::new("transport compatibility");
        let sheaves = CopshCat::new(self.source.space.clone()).objects(bound);
        for x in sheaves.iter().take(max_objects) {
            let ok = self
                .apply_section(&dy, &self.source.transport(x))
                .ok()
                .and_then(|s| section_iso(&dy, &s, &self.target.transport(&self.direct_image(x))))
                .is_some();
            sections.record(ok, || format!("{x:?}"));
        }
        Ok(vec![lands, cocart, lex, sections])
    }
}
