//! Left-lax diagrams over a finite poset: a fiber category per element, a
//! pushforward τ^q_p per strict relation p < q, and a comparison cell
//! can_pqr(x): τ^r_p x → τ^r_q τ^q_p x per chain p < q < r.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::concretecats::sets::{rke_counit, rke_unit, singleton_counit, singleton_unit};
use crate::concretecats::{CatError, Category, CoPresheaf, CopshCat, PresheafMap, ShapeMap, ShapedDiagram};
use crate::poset::{FinPoset, PosetDoc};

pub type Obj<D> = <<D as LaxDiagram>::Cat as Category>::Obj;
pub type Mor<D> = <<D as LaxDiagram>::Cat as Category>::Mor;

/// The unstraightened data of a left-lax diagram of categories.
pub trait LaxDiagram {
    type Cat: Category;

    fn base(&self) -> &FinPoset;
    fn fiber(&self, p: usize) -> &Self::Cat;
    /// τ^q_p on objects, for p < q.
    fn push(&self, p: usize, q: usize, x: &Obj<Self>) -> Obj<Self>;
    /// τ^q_p on morphisms, for p < q.
    fn push_mor(&self, p: usize, q: usize, f: &Mor<Self>) -> Mor<Self>;
    /// can_pqr(x): τ^r_p x → τ^r_q τ^q_p x, for p < q < r.
    fn can(&self, p: usize, q: usize, r: usize, x: &Obj<Self>) -> Mor<Self>;
}

/// The same diagram over a full subposet of the base.
pub struct Restricted<'a, D: LaxDiagram> {
    parent: &'a D,
    base: FinPoset,
    emb: Vec<usize>,
}

impl<'a, D: LaxDiagram> Restricted<'a, D> {
    pub fn new(parent: &'a D, subset: &[usize]) -> Self {
        let (base, emb) = parent.base().subposet(subset);
        Restricted { parent, base, emb }
    }

    /// Base element of the parent for a local index.
    pub fn embedding(&self) -> &[usize] {
        &self.emb
    }
}

impl<D: LaxDiagram> LaxDiagram for Restricted<'_, D> {
    type Cat = D::Cat;

    fn base(&self) -> &FinPoset {
        &self.base
    }

    fn fiber(&self, p: usize) -> &D::Cat {
        self.parent.fiber(self.emb[p])
    }

    fn push(&self, p: usize, q: usize, x: &Obj<Self>) -> Obj<Self> {
        self.parent.push(self.emb[p], self.emb[q], x)
    }

    fn push_mor(&self, p: usize, q: usize, f: &Mor<Self>) -> Mor<Self> {
        self.parent.push_mor(self.emb[p], self.emb[q], f)
    }

    fn can(&self, p: usize, q: usize, r: usize, x: &Obj<Self>) -> Mor<Self> {
        self.parent.can(self.emb[p], self.emb[q], self.emb[r], x)
    }
}

/// A primitive functor between copresheaf categories.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    /// Along a monotone map K′ → K: sends objects on K to objects on K′.
    Restrict(ShapeMap),
    /// Right Kan extension along an inclusion Z ⊆ K.
    Rke(ShapeMap),
    /// Extension by singletons along an inclusion of a sieve Z ⊆ K.
    ExtendBySingleton(ShapeMap),
    /// Extension by empty sets along an inclusion of a cosieve Z ⊆ K.
    ExtendByEmpty(ShapeMap),
}

impl Stage {
    pub fn domain(&self) -> &Arc<FinPoset> {
        match self {
            Stage::Restrict(m) => m.target(),
            Stage::Rke(m) | Stage::ExtendBySingleton(m) | Stage::ExtendByEmpty(m) => m.source(),
        }
    }

    pub fn codomain(&self) -> &Arc<FinPoset> {
        match self {
            Stage::Restrict(m) => m.source(),
            Stage::Rke(m) | Stage::ExtendBySingleton(m) | Stage::ExtendByEmpty(m) => m.target(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Restrict(_) => "restrict",
            Stage::Rke(_) => "rke",
            Stage::ExtendBySingleton(_) => "extend-by-singleton",
            Stage::ExtendByEmpty(_) => "extend-by-empty",
        }
    }

    pub fn map(&self) -> &ShapeMap {
        match self {
            Stage::Restrict(m) | Stage::Rke(m) | Stage::ExtendBySingleton(m) | Stage::ExtendByEmpty(m) => m,
        }
    }

    fn check(&self) -> Result<(), CatError> {
        let m = self.map();
        if !matches!(self, Stage::Restrict(_)) && !m.is_injective() {
            return Err(CatError::Invalid(format!("{} needs an inclusion", self.name())));
        }
        // orientation is a property of the inclusion; test it on the terminal object
        let t = CoPresheaf::terminal(m.source());
        match self {
            Stage::ExtendBySingleton(m) => t.extend_by_singleton(m).map(|_| ()),
            Stage::ExtendByEmpty(m) => t.extend_by_empty(m).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, x: &CoPresheaf) -> CoPresheaf {
        match self {
            Stage::Restrict(m) => x.restrict(m),
            Stage::Rke(m) => x.rke(m),
            Stage::ExtendBySingleton(m) => x.extend_by_singleton(m).expect("checked orientation"),
            Stage::ExtendByEmpty(m) => x.extend_by_empty(m).expect("checked orientation"),
        }
    }

    pub fn apply_mor(&self, f: &PresheafMap) -> PresheafMap {
        match self {
            Stage::Restrict(m) => f.restrict(m),
            Stage::Rke(m) => f.rke(m),
            Stage::ExtendBySingleton(m) => f.extend_by_singleton(m).expect("checked orientation"),
            Stage::ExtendByEmpty(m) => f.extend_by_empty(m).expect("checked orientation"),
        }
    }
}

/// A composite of stages, applied left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    domain: Arc<FinPoset>,
    stages: Vec<Stage>,
}

impl Pipeline {
    pub fn identity(shape: &Arc<FinPoset>) -> Self {
        Pipeline { domain: shape.clone(), stages: Vec::new() }
    }

    pub fn new(domain: &Arc<FinPoset>, stages: Vec<Stage>) -> Result<Self, CatError> {
        let mut cur = domain.clone();
        for (i, s) in stages.iter().enumerate() {
            if **s.domain() != *cur {
                return Err(CatError::Invalid(format!("stage {i} ({}) has the wrong domain", s.name())));
            }
            s.check()?;
            cur = s.codomain().clone();
        }
        Ok(Pipeline { domain: domain.clone(), stages })
    }

    pub fn domain(&self) -> &Arc<FinPoset> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FinPoset> {
        self.stages.last().map_or(&self.domain, |s| s.codomain())
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn then(&self, other: &Pipeline) -> Result<Pipeline, CatError> {
        let mut stages = self.stages.clone();
        stages.extend(other.stages.iter().cloned());
        Pipeline::new(&self.domain, stages)
    }

    pub fn apply(&self, x: &CoPresheaf) -> CoPresheaf {
        self.stages.iter().fold(x.clone(), |acc, s| s.apply(&acc))
    }

    pub fn apply_mor(&self, f: &PresheafMap) -> PresheafMap {
        self.stages.iter().fold(f.clone(), |acc, s| s.apply_mor(&acc))
    }

    /// Whether every stage is a right adjoint to restriction along its
    /// inclusion (right Kan extension or extension by singletons).
    pub fn is_embedding(&self) -> bool {
        self.stages.iter().all(|s| matches!(s, Stage::Rke(_) | Stage::ExtendBySingleton(_)))
    }

    /// The inclusion of the domain into the codomain, for embeddings.
    pub fn embedding_map(&self) -> ShapeMap {
        self.stages
            .iter()
            .fold(ShapeMap::identity(&self.domain), |acc, s| acc.then(s.map()))
    }

    /// Unit y → E(y|_Z) of restriction ⊣ E for an embedding pipeline E.
    pub fn unit(&self, y: &CoPresheaf) -> PresheafMap {
        assert!(self.is_embedding(), "unit needs an embedding pipeline");
        let Some((last, init)) = self.stages.split_last() else {
            return PresheafMap::identity(y);
        };
        let incl = last.map();
        let inner = Pipeline { domain: self.domain.clone(), stages: init.to_vec() };
        let y_sub = y.restrict(incl);
        let eta = match last {
            Stage::Rke(m) => rke_unit(y, m),
            Stage::ExtendBySingleton(m) => singleton_unit(y, m).expect("checked orientation"),
            _ => unreachable!(),
        };
        last.apply_mor(&inner.unit(&y_sub)).after(&eta)
    }

    /// Counit E(F)|_Z → F of restriction ⊣ E for an embedding pipeline E.
    pub fn counit(&self, f: &CoPresheaf) -> PresheafMap {
        assert!(self.is_embedding(), "counit needs an embedding pipeline");
        let Some((last, init)) = self.stages.split_last() else {
            return PresheafMap::identity(f);
        };
        let inner = Pipeline { domain: self.domain.clone(), stages: init.to_vec() };
        let ef = inner.apply(f);
        let eps = match last {
            Stage::Rke(m) => rke_counit(&ef, m),
            Stage::ExtendBySingleton(m) => singleton_counit(&ef, m).expect("checked orientation"),
            _ => unreachable!(),
        };
        let down = inner.embedding_map();
        inner.counit(f).after(&eps.restrict(&down))
    }
}

/// How the comparison cell of a triple is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum SetCan {
    /// τ^r_p x and τ^r_q τ^q_p x coincide; the cell is the identity.
    Identity,
    /// τ^q_p = R_q ∘ E_p through an ambient shape, and the cell is
    /// R_r applied to the unit of R_q ⊣ E_q at E_p x.
    UnitOfAdjunction,
}

/// Ambient data for unit-generated cells: per fiber an embedding pipeline
/// into the ambient shape, whose inclusion doubles as the restriction.
#[derive(Debug, Clone)]
pub struct Ambient {
    pub shape: Arc<FinPoset>,
    pub embed: Vec<Pipeline>,
}

impl Ambient {
    pub fn restriction(&self, p: usize) -> Stage {
        Stage::Restrict(self.embed[p].embedding_map())
    }
}

/// A lax diagram whose fibers are copresheaf categories and whose
/// pushforwards are pipelines.
#[derive(Debug, Clone)]
pub struct SetDiagram {
    base: FinPoset,
    cats: Vec<CopshCat>,
    push: HashMap<(usize, usize), Pipeline>,
    cans: HashMap<(usize, usize, usize), SetCan>,
    ambient: Option<Ambient>,
}

impl SetDiagram {
    /// Pushforwards for every strict pair; every triple gets the given cell.
    pub fn new(
        base: FinPoset,
        fibers: Vec<Arc<FinPoset>>,
        push: HashMap<(usize, usize), Pipeline>,
        cans: HashMap<(usize, usize, usize), SetCan>,
        ambient: Option<Ambient>,
    ) -> Result<Self, CatError> {
        if fibers.len() != base.len() {
            return Err(CatError::Invalid("one fiber shape per base element required".into()));
        }
        for (p, q) in base.strict_pairs() {
            let pl = push
                .get(&(p, q))
                .ok_or_else(|| CatError::Invalid(format!("push.{}<{}: missing", base.name(p), base.name(q))))?;
            if **pl.domain() != *fibers[p] || **pl.codomain() != *fibers[q] {
                return Err(CatError::Invalid(format!(
                    "push.{}<{}: pipeline does not run between the fibers",
                    base.name(p),
                    base.name(q)
                )));
            }
        }
        for (p, q, r) in base.strict_triples() {
            let c = cans.get(&(p, q, r)).ok_or_else(|| {
                CatError::Invalid(format!("can.{}<{}<{}: missing", base.name(p), base.name(q), base.name(r)))
            })?;
            if *c == SetCan::UnitOfAdjunction {
                let amb = ambient.as_ref().ok_or_else(|| {
                    CatError::Invalid("unit-of-adjunction cells need ambient embeddings".into())
                })?;
                for &(a, b) in &[(p, q), (q, r), (p, r)] {
                    let expect = Pipeline::new(&fibers[a], {
                        let mut s = amb.embed[a].stages().to_vec();
                        s.push(amb.restriction(b));
                        s
                    })?;
                    if push[&(a, b)] != expect {
                        return Err(CatError::Invalid(format!(
                            "push.{}<{}: not of the form restrict ∘ embed",
                            base.name(a),
                            base.name(b)
                        )));
                    }
                }
            }
        }
        let cats = fibers.into_iter().map(CopshCat::new).collect();
        Ok(SetDiagram { base, cats, push, cans, ambient })
    }

    /// A strict diagram over the chain Δⁿ from consecutive pushforwards;
    /// longer pushforwards are the composite pipelines.
    pub fn strict_chain(fibers: Vec<Arc<FinPoset>>, steps: Vec<Pipeline>) -> Result<Self, CatError> {
        let n = fibers.len().saturating_sub(1);
        if steps.len() != n {
            return Err(CatError::Invalid("need one pipeline per consecutive pair".into()));
        }
        let base = FinPoset::chain(n);
        let mut push = HashMap::new();
        for p in 0..n {
            let mut acc = steps[p].clone();
            push.insert((p, p + 1), acc.clone());
            for q in (p + 2)..=n {
                acc = acc.then(&steps[q - 1])?;
                push.insert((p, q), acc.clone());
            }
        }
        let cans = base.strict_triples().into_iter().map(|t| (t, SetCan::Identity)).collect();
        Self::new(base, fibers, push, cans, None)
    }

    /// A strict diagram with τ^q_p = restriction along maps g_pq: K_q → K_p,
    /// given on covering pairs and composed along paths (which must agree).
    pub fn restriction_diagram(
        base: FinPoset,
        fibers: Vec<Arc<FinPoset>>,
        cover_maps: &HashMap<(usize, usize), Vec<usize>>,
    ) -> Result<Self, CatError> {
        let n = base.len();
        // g[p][q]: assignment K_q → K_p
        let mut g: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for &q in base.linear_extension() {
            for &c in base.lower_covers(q) {
                let step = cover_maps.get(&(c, q)).ok_or_else(|| {
                    CatError::Invalid(format!("map {}<{}: missing", base.name(c), base.name(q)))
                })?;
                ShapeMap::new(fibers[q].clone(), fibers[c].clone(), step.clone())?;
                for p in 0..n {
                    if !base.lt(p, q) || !base.leq(p, c) {
                        continue;
                    }
                    let via: Vec<usize> = if p == c {
                        step.clone()
                    } else {
                        step.iter().map(|&k| g[&(p, c)][k]).collect()
                    };
                    if let Some(prev) = g.get(&(p, q)) {
                        if *prev != via {
                            return Err(CatError::NotFunctorial(base.name(p).into(), base.name(q).into()));
                        }
                    } else {
                        g.insert((p, q), via);
                    }
                }
            }
        }
        let mut push = HashMap::new();
        for ((p, q), a) in g {
            let m = ShapeMap::new(fibers[q].clone(), fibers[p].clone(), a)?;
            push.insert((p, q), Pipeline::new(&fibers[p], vec![Stage::Restrict(m)])?);
        }
        let cans = base.strict_triples().into_iter().map(|t| (t, SetCan::Identity)).collect();
        Self::new(base, fibers, push, cans, None)
    }

    pub fn pipeline(&self, p: usize, q: usize) -> &Pipeline {
        &self.push[&(p, q)]
    }

    pub fn can_kind(&self, p: usize, q: usize, r: usize) -> &SetCan {
        &self.cans[&(p, q, r)]
    }

    pub fn ambient(&self) -> Option<&Ambient> {
        self.ambient.as_ref()
    }

    pub fn fiber_shape(&self, p: usize) -> &Arc<FinPoset> {
        self.cats[p].shape()
    }
}

/// A shape given inline or by name: `"fiber:<p>"` or `"ambient"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeRef {
    Named(String),
    Inline(PosetDoc),
}

/// One pipeline stage. `shape` is the far end of the map: its source for
/// `restrict`, its target otherwise. `map` sends source names to target names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDoc {
    pub op: String,
    pub shape: ShapeRef,
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientDoc {
    pub shape: PosetDoc,
    pub embed: BTreeMap<String, Vec<StageDoc>>,
}

/// JSON form of a [`SetDiagram`]. Pairs missing from `push` are composed
/// along covers; cells default to `"identity"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDiagramDoc {
    pub base: PosetDoc,
    pub fibers: BTreeMap<String, PosetDoc>,
    #[serde(default)]
    pub push: BTreeMap<String, Vec<StageDoc>>,
    #[serde(default)]
    pub can: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<AmbientDoc>,
}

struct Shapes<'a> {
    base: &'a FinPoset,
    fibers: &'a [Arc<FinPoset>],
    ambient: Option<&'a Arc<FinPoset>>,
}

impl Shapes<'_> {
    fn resolve(&self, r: &ShapeRef, locus: &str) -> Result<Arc<FinPoset>, CatError> {
        match r {
            ShapeRef::Inline(d) => {
                Ok(Arc::new(FinPoset::from_doc(d).map_err(|e| CatError::Invalid(format!("{locus}.shape: {e}")))?))
            }
            ShapeRef::Named(n) if n == "ambient" => {
                self.ambient.cloned().ok_or_else(|| CatError::Invalid(format!("{locus}.shape: no ambient shape")))
            }
            ShapeRef::Named(n) => {
                let p = n
                    .strip_prefix("fiber:")
                    .and_then(|p| self.base.index_of(p).ok())
                    .ok_or_else(|| CatError::Invalid(format!("{locus}.shape: unknown shape `{n}`")))?;
                Ok(self.fibers[p].clone())
            }
        }
    }

    fn pipeline(&self, start: &Arc<FinPoset>, docs: &[StageDoc], locus: &str) -> Result<Pipeline, CatError> {
        let mut cur = start.clone();
        let mut stages = Vec::with_capacity(docs.len());
        for (i, sd) in docs.iter().enumerate() {
            let loc = format!("{locus}[{i}]");
            let far = self.resolve(&sd.shape, &loc)?;
            let (src, tgt) = if sd.op == "restrict" { (far.clone(), cur.clone()) } else { (cur.clone(), far.clone()) };
            let mut assign = Vec::with_capacity(src.len());
            for a in src.names() {
                let t = sd.map.get(a).ok_or_else(|| CatError::Invalid(format!("{loc}.map: `{a}` unassigned")))?;
                assign.push(tgt.index_of(t).map_err(|_| CatError::Invalid(format!("{loc}.map: unknown `{t}`")))?);
            }
            let m = ShapeMap::new(src, tgt, assign).map_err(|e| CatError::Invalid(format!("{loc}: {e}")))?;
            let stage = match sd.op.as_str() {
                "restrict" => Stage::Restrict(m),
                "rke" => Stage::Rke(m),
                "extend-by-singleton" => Stage::ExtendBySingleton(m),
                "extend-by-empty" => Stage::ExtendByEmpty(m),
                other => return Err(CatError::Invalid(format!("{loc}.op: unknown stage `{other}`"))),
            };
            stages.push(stage);
            cur = far;
        }
        Pipeline::new(start, stages).map_err(|e| CatError::Invalid(format!("{locus}: {e}")))
    }
}

fn pair_key(base: &FinPoset, key: &str, len: usize, locus: &str) -> Result<Vec<usize>, CatError> {
    let parts: Vec<&str> = key.split('<').map(str::trim).collect();
    if parts.len() != len {
        return Err(CatError::Invalid(format!("{locus}.{key}: expected {len} elements")));
    }
    let v = parts
        .iter()
        .map(|p| base.index_of(p).map_err(|_| CatError::Invalid(format!("{locus}.{key}: unknown element `{p}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if v.windows(2).any(|w| !base.lt(w[0], w[1])) {
        return Err(CatError::Invalid(format!("{locus}.{key}: not a strict chain")));
    }
    Ok(v)
}

impl SetDiagram {
    pub fn from_doc(doc: &SetDiagramDoc) -> Result<Self, CatError> {
        let base = FinPoset::from_doc(&doc.base).map_err(|e| CatError::Invalid(format!("base: {e}")))?;
        let mut fibers = Vec::with_capacity(base.len());
        for name in base.names() {
            let d = doc.fibers.get(name).ok_or_else(|| CatError::Invalid(format!("fibers.{name}: missing")))?;
            fibers.push(Arc::new(FinPoset::from_doc(d).map_err(|e| CatError::Invalid(format!("fibers.{name}: {e}")))?));
        }
        for key in doc.fibers.keys() {
            base.index_of(key).map_err(|_| CatError::Invalid(format!("fibers.{key}: unknown element")))?;
        }
        let amb_shape = match &doc.ambient {
            Some(a) => Some(Arc::new(FinPoset::from_doc(&a.shape).map_err(|e| CatError::Invalid(format!("ambient.shape: {e}")))?)),
            None => None,
        };
        let shapes = Shapes { base: &base, fibers: &fibers, ambient: amb_shape.as_ref() };
        let mut push = HashMap::new();
        for (key, stages) in &doc.push {
            let v = pair_key(&base, key, 2, "push")?;
            push.insert((v[0], v[1]), shapes.pipeline(&fibers[v[0]], stages, &format!("push.{key}"))?);
        }
        for &q in base.linear_extension() {
            for p in 0..base.len() {
                if !base.lt(p, q) || push.contains_key(&(p, q)) {
                    continue;
                }
                let c = *base
                    .lower_covers(q)
                    .iter()
                    .find(|&&c| base.leq(p, c))
                    .expect("a lower cover of q lies above p");
                let first = if c == p {
                    None
                } else {
                    Some(push.get(&(p, c)).cloned().ok_or_else(|| {
                        CatError::Invalid(format!("push.{}<{}: missing", base.name(p), base.name(c)))
                    })?)
                };
                let step = push.get(&(c, q)).cloned().ok_or_else(|| {
                    CatError::Invalid(format!("push.{}<{}: missing", base.name(c), base.name(q)))
                })?;
                let pl = match first {
                    Some(f) => f.then(&step)?,
                    None => step,
                };
                push.insert((p, q), pl);
            }
        }
        let mut cans = HashMap::new();
        for (key, kind) in &doc.can {
            let v = pair_key(&base, key, 3, "can")?;
            let c = match kind.as_str() {
                "identity" => SetCan::Identity,
                "unit-of-adjunction" => SetCan::UnitOfAdjunction,
                other => return Err(CatError::Invalid(format!("can.{key}: unknown cell `{other}`"))),
            };
            cans.insert((v[0], v[1], v[2]), c);
        }
        for t in base.strict_triples() {
            cans.entry(t).or_insert(SetCan::Identity);
        }
        let ambient = match (&doc.ambient, amb_shape.clone()) {
            (Some(a), Some(shape)) => {
                let mut embed = Vec::with_capacity(base.len());
                for (p, name) in base.names().iter().enumerate() {
                    let st = a.embed.get(name).ok_or_else(|| CatError::Invalid(format!("ambient.embed.{name}: missing")))?;
                    embed.push(shapes.pipeline(&fibers[p], st, &format!("ambient.embed.{name}"))?);
                }
                Some(Ambient { shape, embed })
            }
            _ => None,
        };
        Self::new(base, fibers, push, cans, ambient)
    }
}

impl LaxDiagram for SetDiagram {
    type Cat = CopshCat;

    fn base(&self) -> &FinPoset {
        &self.base
    }

    fn fiber(&self, p: usize) -> &CopshCat {
        &self.cats[p]
    }

    fn push(&self, p: usize, q: usize, x: &CoPresheaf) -> CoPresheaf {
        self.push[&(p, q)].apply(x)
    }

    fn push_mor(&self, p: usize, q: usize, f: &PresheafMap) -> PresheafMap {
        self.push[&(p, q)].apply_mor(f)
    }

    fn can(&self, p: usize, q: usize, r: usize, x: &CoPresheaf) -> PresheafMap {
        match self.cans[&(p, q, r)] {
            SetCan::Identity => PresheafMap::identity(&self.push(p, r, x)),
            SetCan::UnitOfAdjunction => {
                let amb = self.ambient.as_ref().expect("checked at construction");
                let y = amb.embed[p].apply(x);
                let eta = amb.embed[q].unit(&y);
                amb.restriction(r).apply_mor(&eta)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Functoriality,
    CellEndpoints,
    Naturality,
    Cocycle,
    Terminal,
    Pullback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub locus: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, kind: ViolationKind, locus: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(Violation { kind, locus: locus() });
        }
    }
}

/// Budget for [`validate`].
#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    /// Pointwise size (or dimension) bound for sampled fiber objects.
    pub object_bound: usize,
    /// Maximum number of sampled objects per fiber.
    pub max_objects: usize,
    /// Maximum number of sampled morphisms per pair of objects.
    pub max_morphisms: usize,
    /// Also check preservation of terminal objects and pullbacks.
    pub toposic: bool,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { object_bound: 1, max_objects: 12, max_morphisms: 4, toposic: true, seed: 0 }
    }
}

fn sample<T: Clone>(mut v: Vec<T>, k: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    if v.len() > k {
        v.shuffle(rng);
        v.truncate(k);
    }
    v
}

/// Checks functoriality of the pushforwards, endpoints and naturality of the
/// cells, the cocycle on every 4-chain, and (optionally) left exactness, all
/// on sampled fiber objects.
pub fn validate<D: LaxDiagram>(d: &D, opts: &ValidateOptions) -> ValidationReport {
    let base = d.base();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rep = ValidationReport::default();
    let samples: Vec<Vec<Obj<D>>> = (0..base.len())
        .map(|p| sample(d.fiber(p).objects(opts.object_bound), opts.max_objects, &mut rng))
        .collect();
    let name = |p: usize| base.name(p).to_string();

    // sampled morphisms per fiber: pairs of samples, a few maps each
    let mut morphisms: Vec<Vec<Mor<D>>> = Vec::with_capacity(base.len());
    for p in 0..base.len() {
        let cat = d.fiber(p);
        let mut ms = Vec::new();
        for x in &samples[p] {
            for y in samples[p].iter().take(4) {
                ms.extend(sample(cat.homs(x, y), opts.max_morphisms, &mut rng));
            }
        }
        morphisms.push(ms);
    }

    for (p, q) in base.strict_pairs() {
        let (cp, cq) = (d.fiber(p), d.fiber(q));
        for x in &samples[p] {
            let ok = d.push_mor(p, q, &cp.identity(x)) == cq.identity(&d.push(p, q, x));
            rep.record(ok, ViolationKind::Functoriality, || format!("identity under τ {}<{}", name(p), name(q)));
        }
        for f in &morphisms[p] {
            for g in morphisms[p].iter().filter(|g| cp.source(g) == cp.target(f)).take(2) {
                let lhs = d.push_mor(p, q, &cp.compose(g, f));
                let rhs = cq.compose(&d.push_mor(p, q, g), &d.push_mor(p, q, f));
                rep.record(lhs == rhs, ViolationKind::Functoriality, || {
                    format!("composite under τ {}<{}", name(p), name(q))
                });
            }
        }
    }

    for (p, q, r) in base.strict_triples() {
        let cr = d.fiber(r);
        let locus = || format!("{}<{}<{}", name(p), name(q), name(r));
        for x in &samples[p] {
            let c = d.can(p, q, r, x);
            let ok = cr.source(&c) == d.push(p, r, x) && cr.target(&c) == d.push(q, r, &d.push(p, q, x));
            rep.record(ok, ViolationKind::CellEndpoints, locus);
        }
        for f in &morphisms[p] {
            let cp = d.fiber(p);
            let (x, y) = (cp.source(f), cp.target(f));
            let lhs = cr.compose(&d.can(p, q, r, &y), &d.push_mor(p, r, f));
            let rhs = cr.compose(&d.push_mor(q, r, &d.push_mor(p, q, f)), &d.can(p, q, r, &x));
            rep.record(lhs == rhs, ViolationKind::Naturality, locus);
        }
    }

    for (p, q, r, s) in base.strict_quadruples() {
        let cs = d.fiber(s);
        for x in &samples[p] {
            let left = cs.compose(&d.push_mor(r, s, &d.can(p, q, r, x)), &d.can(p, r, s, x));
            let right = cs.compose(&d.can(q, r, s, &d.push(p, q, x)), &d.can(p, q, s, x));
            rep.record(left == right, ViolationKind::Cocycle, || {
                format!("{}<{}<{}<{}", name(p), name(q), name(r), name(s))
            });
        }
    }

    if opts.toposic {
        for (p, q) in base.strict_pairs() {
            let (cp, cq) = (d.fiber(p), d.fiber(q));
            let t = d.push(p, q, &cp.terminal());
            rep.record(cq.is_terminal(&t), ViolationKind::Terminal, || format!("τ {}<{}", name(p), name(q)));
            // sampled cospans a → c ← b
            let mut tested = 0;
            for f in &morphisms[p] {
                for g in morphisms[p].iter().filter(|g| cp.target(g) == cp.target(f)) {
                    if tested >= 2 * opts.max_objects {
                        break;
                    }
                    tested += 1;
                    let ok = preserves_pullback(cp, cq, |v| d.push(p, q, v), |e| d.push_mor(p, q, e), f, g);
                    rep.record(ok, ViolationKind::Pullback, || format!("τ {}<{}", name(p), name(q)));
                }
            }
        }
    }
    rep
}

/// Whether F sends the pullback of the cospan f, g (common target) to a pullback.
pub fn preserves_pullback<C1: Category, C2: Category>(
    c1: &C1,
    c2: &C2,
    obj: impl Fn(&C1::Obj) -> C2::Obj,
    mor: impl Fn(&C1::Mor) -> C2::Mor,
    f: &C1::Mor,
    g: &C1::Mor,
) -> bool {
    let dp = ShapedDiagram::cospan(c1.source(f), c1.source(g), c1.target(f), f.clone(), g.clone());
    let lim = c1.limit(&dp);
    let dq = ShapedDiagram {
        shape: dp.shape.clone(),
        values: dp.values.iter().map(&obj).collect(),
        edges: dp.edges.iter().map(&mor).collect(),
    };
    let limq = c2.limit(&dq);
    let pushed = crate::concretecats::Cone { apex: obj(&lim.apex), legs: lim.legs.iter().map(&mor).collect() };
    c2.factor(&limq, &pushed).is_some_and(|m| c2.is_iso(&m))
}
