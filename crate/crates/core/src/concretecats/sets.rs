//! Copresheaves of finite sets on a finite poset (functors K → FinSet).
//!
//! The set at a point is `{0, .., size-1}`; transitions are stored for every
//! pair a ≤ b. Functoriality is validated once at construction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CatError, Category, Cone, ShapedDiagram};
use crate::poset::{FinPoset, PosetDoc};

/// A monotone map between shapes; inclusions of full subposets are the
/// injective ones.
#[derive(Clone, PartialEq, Eq)]
pub struct ShapeMap {
    source: Arc<FinPoset>,
    target: Arc<FinPoset>,
    assign: Vec<usize>,
}

impl fmt::Debug for ShapeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .assign
            .iter()
            .enumerate()
            .map(|(a, &b)| format!("{}->{}", self.source.name(a), self.target.name(b)))
            .collect();
        write!(f, "ShapeMap{pairs:?}")
    }
}

impl ShapeMap {
    pub fn new(source: Arc<FinPoset>, target: Arc<FinPoset>, assign: Vec<usize>) -> Result<Self, CatError> {
        if assign.len() != source.len() || assign.iter().any(|&b| b >= target.len()) {
            return Err(CatError::Invalid("shape map assignment has wrong length or range".into()));
        }
        for &(a, b) in source.covers() {
            if !target.leq(assign[a], assign[b]) {
                return Err(CatError::Invalid(format!(
                    "shape map not monotone at {} <= {}",
                    source.name(a),
                    source.name(b)
                )));
            }
        }
        Ok(ShapeMap { source, target, assign })
    }

    /// Inclusion of the full subposet on `subset` (kept in increasing index order).
    pub fn inclusion(target: &Arc<FinPoset>, subset: &[usize]) -> Self {
        let mut subset = subset.to_vec();
        subset.sort_unstable();
        subset.dedup();
        let (sub, emb) = target.subposet(&subset);
        ShapeMap { source: Arc::new(sub), target: target.clone(), assign: emb }
    }

    pub fn identity(shape: &Arc<FinPoset>) -> Self {
        ShapeMap { source: shape.clone(), target: shape.clone(), assign: (0..shape.len()).collect() }
    }

    pub fn source(&self) -> &Arc<FinPoset> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinPoset> {
        &self.target
    }

    pub fn apply(&self, a: usize) -> usize {
        self.assign[a]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    /// Position of a target point in the source, for injective maps.
    pub fn preimage_of(&self, b: usize) -> Option<usize> {
        self.assign.iter().position(|&x| x == b)
    }

    pub fn image_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.target.len()];
        for &b in &self.assign {
            m[b] = true;
        }
        m
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        self.assign.iter().all(|&b| !std::mem::replace(&mut seen[b], true))
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &ShapeMap) -> ShapeMap {
        ShapeMap {
            source: self.source.clone(),
            target: after.target.clone(),
            assign: self.assign.iter().map(|&b| after.assign[b]).collect(),
        }
    }
}

fn same_shape(a: &Arc<FinPoset>, b: &Arc<FinPoset>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

struct Inner {
    shape: Arc<FinPoset>,
    sizes: Vec<usize>,
    trans: Vec<Vec<usize>>,
}

#[derive(Clone)]
pub struct CoPresheaf(Arc<Inner>);

impl PartialEq for CoPresheaf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.sizes == other.0.sizes
                && self.0.trans == other.0.trans
                && same_shape(&self.0.shape, &other.0.shape))
    }
}

impl Eq for CoPresheaf {}

impl fmt::Debug for CoPresheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.shape();
        let mut m = f.debug_map();
        for a in 0..s.len() {
            m.entry(&s.name(a), &self.size(a));
        }
        for &(a, b) in s.covers() {
            m.entry(&format!("{}<={}", s.name(a), s.name(b)), &self.map(a, b));
        }
        m.finish()
    }
}

/// Compatible families of a set-valued diagram on `shape`, sorted
/// lexicographically. `edge(a, b)` is the function on a covering pair.
pub fn set_limit<'a>(shape: &FinPoset, sizes: &[usize], edge: impl Fn(usize, usize) -> &'a [usize]) -> Vec<Vec<usize>> {
    let order = shape.linear_extension();
    let n = shape.len();
    let mut fam = vec![usize::MAX; n];
    let mut out = Vec::new();
    fn rec<'a>(
        shape: &FinPoset,
        order: &[usize],
        pos: usize,
        sizes: &[usize],
        edge: &impl Fn(usize, usize) -> &'a [usize],
        fam: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pos == order.len() {
            out.push(fam.clone());
            return;
        }
        let v = order[pos];
        let lower = shape.lower_covers(v);
        if lower.is_empty() {
            for x in 0..sizes[v] {
                fam[v] = x;
                rec(shape, order, pos + 1, sizes, edge, fam, out);
            }
        } else {
            let forced = edge(lower[0], v)[fam[lower[0]]];
            if lower[1..].iter().all(|&c| edge(c, v)[fam[c]] == forced) {
                fam[v] = forced;
                rec(shape, order, pos + 1, sizes, edge, fam, out);
            }
        }
        fam[v] = usize::MAX;
    }
    rec(shape, order, 0, sizes, &edge, &mut fam, &mut out);
    out.sort();
    out
}

fn find_family(fams: &[Vec<usize>], f: &[usize]) -> Option<usize> {
    fams.binary_search_by(|probe| probe.as_slice().cmp(f)).ok()
}

impl CoPresheaf {
    /// Builds from sizes and one function per covering pair (in the order of
    /// `shape.covers()`), checking ranges and functoriality.
    pub fn new(shape: Arc<FinPoset>, sizes: Vec<usize>, cover_maps: Vec<Vec<usize>>) -> Result<Self, CatError> {
        let n = shape.len();
        if sizes.len() != n || cover_maps.len() != shape.covers().len() {
            return Err(CatError::Invalid("copresheaf data does not match its shape".into()));
        }
        for (&(a, b), m) in shape.covers().iter().zip(&cover_maps) {
            if m.len() != sizes[a] || m.iter().any(|&t| t >= sizes[b]) {
                return Err(CatError::Invalid(format!(
                    "map {}<={} is not a function between the given sets",
                    shape.name(a),
                    shape.name(b)
                )));
            }
        }
        let mut trans = vec![Vec::new(); n * n];
        for a in 0..n {
            trans[a * n + a] = (0..sizes[a]).collect();
            for &b in shape.linear_extension() {
                if !shape.lt(a, b) {
                    continue;
                }
                let mut val: Option<Vec<usize>> = None;
                for &c in shape.lower_covers(b) {
                    if !shape.leq(a, c) {
                        continue;
                    }
                    let ci = shape.covers().iter().position(|&e| e == (c, b)).expect("cover");
                    let via: Vec<usize> = trans[a * n + c].iter().map(|&e| cover_maps[ci][e]).collect();
                    match &val {
                        None => val = Some(via),
                        Some(prev) if *prev != via => {
                            return Err(CatError::NotFunctorial(shape.name(a).into(), shape.name(b).into()));
                        }
                        _ => {}
                    }
                }
                trans[a * n + b] = val.expect("a < b has a covering path");
            }
        }
        Ok(CoPresheaf(Arc::new(Inner { shape, sizes, trans })))
    }

    /// Builds from a transition function defined for every a ≤ b; the
    /// caller guarantees functoriality.
    fn from_fn(shape: Arc<FinPoset>, sizes: Vec<usize>, f: impl Fn(usize, usize, usize) -> usize) -> Self {
        let n = shape.len();
        let mut trans = vec![Vec::new(); n * n];
        for a in 0..n {
            for b in 0..n {
                if shape.leq(a, b) {
                    trans[a * n + b] = (0..sizes[a]).map(|e| f(a, b, e)).collect();
                }
            }
        }
        let out = CoPresheaf(Arc::new(Inner { shape, sizes, trans }));
        debug_assert!(out.is_functorial());
        out
    }

    fn is_functorial(&self) -> bool {
        let s = self.shape();
        let n = s.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                (0..n).all(|c| {
                    !(s.leq(a, b) && s.leq(b, c))
                        || (0..self.size(a)).all(|e| self.map(b, c)[self.map(a, b)[e]] == self.map(a, c)[e])
                })
            })
        })
    }

    pub fn constant(shape: &Arc<FinPoset>, size: usize) -> Self {
        Self::from_fn(shape.clone(), vec![size; shape.len()], |_, _, e| e)
    }

    pub fn terminal(shape: &Arc<FinPoset>) -> Self {
        Self::constant(shape, 1)
    }

    pub fn initial(shape: &Arc<FinPoset>) -> Self {
        Self::constant(shape, 0)
    }

    pub fn shape(&self) -> &Arc<FinPoset> {
        &self.0.shape
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0.sizes
    }

    pub fn size(&self, a: usize) -> usize {
        self.0.sizes[a]
    }

    /// Transition function for a ≤ b.
    pub fn map(&self, a: usize, b: usize) -> &[usize] {
        debug_assert!(self.shape().leq(a, b));
        &self.0.trans[a * self.shape().len() + b]
    }

    pub fn is_subterminal(&self) -> bool {
        self.sizes().iter().all(|&s| s <= 1)
    }

    /// Pullback along a monotone map into this shape.
    pub fn restrict(&self, along: &ShapeMap) -> CoPresheaf {
        debug_assert!(same_shape(along.target(), self.shape()));
        let sizes = along.assignment().iter().map(|&b| self.size(b)).collect();
        Self::from_fn(along.source().clone(), sizes, |a, b, e| self.map(along.apply(a), along.apply(b))[e])
    }

    /// Right Kan extension along a monotone map out of this shape: the value
    /// at t is the limit over the z with t ≤ map(z).
    pub fn rke(&self, incl: &ShapeMap) -> CoPresheaf {
        self.rke_table(incl).object.clone()
    }

    fn rke_table(&self, incl: &ShapeMap) -> RkeTable {
        debug_assert!(same_shape(incl.source(), self.shape()));
        let k = incl.target();
        let src = incl.source();
        let mut idx = Vec::with_capacity(k.len());
        let mut fams = Vec::with_capacity(k.len());
        for t in 0..k.len() {
            let over: Vec<usize> = (0..src.len()).filter(|&z| k.leq(t, incl.apply(z))).collect();
            let (sub, _) = src.subposet(&over);
            let sizes: Vec<usize> = over.iter().map(|&z| self.size(z)).collect();
            let f = set_limit(&sub, &sizes, |a, b| self.map(over[a], over[b]));
            idx.push(over);
            fams.push(f);
        }
        let sizes = fams.iter().map(|f| f.len()).collect();
        let object = Self::from_fn(k.clone(), sizes, |a, b, e| {
            // restrict the family at a to the (smaller) index set at b
            let fa = &fams[a][e];
            let fb: Vec<usize> = idx[b]
                .iter()
                .map(|z| fa[idx[a].iter().position(|y| y == z).expect("index sets shrink upward")])
                .collect();
            find_family(&fams[b], &fb).expect("restricted family is compatible")
        });
        RkeTable { idx, fams, object }
    }

    /// Values of `self` on the inclusion's image, singletons elsewhere.
    /// Requires the complement of the image to be upward closed.
    pub fn extend_by_singleton(&self, incl: &ShapeMap) -> Result<CoPresheaf, CatError> {
        let k = incl.target();
        let inside = incl.image_mask();
        if let Some(&(a, b)) = k.covers().iter().find(|&&(a, b)| !inside[a] && inside[b]) {
            return Err(CatError::OrientationViolation(format!("{} <= {}", k.name(a), k.name(b))));
        }
        let pos: Vec<Option<usize>> = (0..k.len()).map(|t| incl.preimage_of(t)).collect();
        let sizes = pos.iter().map(|p| p.map_or(1, |z| self.size(z))).collect();
        Ok(Self::from_fn(k.clone(), sizes, |a, b, e| match (pos[a], pos[b]) {
            (Some(za), Some(zb)) => self.map(za, zb)[e],
            _ => 0,
        }))
    }

    /// Values of `self` on the inclusion's image, empty elsewhere. Requires
    /// the complement of the image to be downward closed.
    pub fn extend_by_empty(&self, incl: &ShapeMap) -> Result<CoPresheaf, CatError> {
        let k = incl.target();
        let inside = incl.image_mask();
        if let Some(&(a, b)) = k.covers().iter().find(|&&(a, b)| inside[a] && !inside[b]) {
            return Err(CatError::OrientationViolation(format!("{} <= {}", k.name(a), k.name(b))));
        }
        let pos: Vec<Option<usize>> = (0..k.len()).map(|t| incl.preimage_of(t)).collect();
        let sizes = pos.iter().map(|p| p.map_or(0, |z| self.size(z))).collect();
        Ok(Self::from_fn(k.clone(), sizes, |a, b, e| match (pos[a], pos[b]) {
            (Some(za), Some(zb)) => self.map(za, zb)[e],
            _ => unreachable!("no elements off the image"),
        }))
    }

    pub fn to_doc(&self, with_shape: bool) -> CopshDoc {
        let s = self.shape();
        let label = |e: usize| e.to_string();
        let sets = (0..s.len()).map(|a| (s.name(a).to_string(), (0..self.size(a)).map(label).collect())).collect();
        let maps = s
            .covers()
            .iter()
            .map(|&(a, b)| {
                let m = self.map(a, b).iter().enumerate().map(|(e, &t)| (label(e), label(t))).collect();
                (format!("{}<={}", s.name(a), s.name(b)), m)
            })
            .collect();
        CopshDoc { shape: with_shape.then(|| s.to_doc()), sets, maps }
    }

    /// Parses a document; `shape` is used when the document carries none.
    pub fn from_doc(doc: &CopshDoc, shape: Option<&Arc<FinPoset>>) -> Result<Self, CatError> {
        let shape = match (&doc.shape, shape) {
            (Some(d), _) => Arc::new(FinPoset::from_doc(d).map_err(|e| CatError::Invalid(format!("shape: {e}")))?),
            (None, Some(s)) => s.clone(),
            (None, None) => return Err(CatError::Invalid("shape: missing".into())),
        };
        let mut labels: Vec<Vec<String>> = Vec::with_capacity(shape.len());
        for a in 0..shape.len() {
            let l = doc
                .sets
                .get(shape.name(a))
                .cloned()
                .ok_or_else(|| CatError::Invalid(format!("sets.{}: missing", shape.name(a))))?;
            labels.push(l);
        }
        for key in doc.sets.keys() {
            shape.index_of(key).map_err(|_| CatError::Invalid(format!("sets.{key}: unknown point")))?;
        }
        let lookup = |a: usize, l: &str, key: &str| -> Result<usize, CatError> {
            labels[a]
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| CatError::Invalid(format!("maps.{key}: `{l}` not in sets.{}", shape.name(a))))
        };
        let mut given: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (key, m) in &doc.maps {
            let (sa, sb) = key
                .split_once("<=")
                .ok_or_else(|| CatError::Invalid(format!("maps.{key}: expected `a<=b`")))?;
            let a = shape.index_of(sa.trim()).map_err(|_| CatError::Invalid(format!("maps.{key}: unknown point")))?;
            let b = shape.index_of(sb.trim()).map_err(|_| CatError::Invalid(format!("maps.{key}: unknown point")))?;
            if !shape.leq(a, b) {
                return Err(CatError::Invalid(format!("maps.{key}: not a relation of the shape")));
            }
            let mut f = vec![usize::MAX; labels[a].len()];
            for (s, t) in m {
                f[lookup(a, s, key)?] = lookup(b, t, key)?;
            }
            if f.contains(&usize::MAX) {
                return Err(CatError::Invalid(format!("maps.{key}: not total")));
            }
            given.insert((a, b), f);
        }
        let sizes = labels.iter().map(|l| l.len()).collect();
        let mut cover_maps = Vec::new();
        for &(a, b) in shape.covers() {
            let f = given.get(&(a, b)).cloned().ok_or_else(|| {
                CatError::Invalid(format!("maps.{}<={}: missing", shape.name(a), shape.name(b)))
            })?;
            cover_maps.push(f);
        }
        let out = Self::new(shape.clone(), sizes, cover_maps)?;
        for (&(a, b), f) in &given {
            if out.map(a, b) != f.as_slice() {
                return Err(CatError::NotFunctorial(shape.name(a).into(), shape.name(b).into()));
            }
        }
        Ok(out)
    }
}

struct RkeTable {
    idx: Vec<Vec<usize>>,
    fams: Vec<Vec<Vec<usize>>>,
    object: CoPresheaf,
}

/// JSON form `{"shape": .., "sets": {q: [..]}, "maps": {"q<=q'": {s: t}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopshDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<PosetDoc>,
    pub sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub maps: BTreeMap<String, BTreeMap<String, String>>,
}

/// A natural transformation between copresheaves on the same shape.
#[derive(Clone, PartialEq, Eq)]
pub struct PresheafMap {
    src: CoPresheaf,
    tgt: CoPresheaf,
    comps: Vec<Vec<usize>>,
}

impl fmt::Debug for PresheafMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PresheafMap{:?}", self.comps)
    }
}

impl PresheafMap {
    pub fn new(src: CoPresheaf, tgt: CoPresheaf, comps: Vec<Vec<usize>>) -> Result<Self, CatError> {
        let s = src.shape().clone();
        if !same_shape(&s, tgt.shape()) || comps.len() != s.len() {
            return Err(CatError::Invalid("map between copresheaves on different shapes".into()));
        }
        for a in 0..s.len() {
            if comps[a].len() != src.size(a) || comps[a].iter().any(|&t| t >= tgt.size(a)) {
                return Err(CatError::Invalid(format!("component at {} is not a function", s.name(a))));
            }
        }
        let out = PresheafMap { src, tgt, comps };
        if let Some(&(a, b)) = s.covers().iter().find(|&&(a, b)| !out.natural_at(a, b)) {
            return Err(CatError::Invalid(format!("not natural at {} <= {}", s.name(a), s.name(b))));
        }
        Ok(out)
    }

    fn trusted(src: CoPresheaf, tgt: CoPresheaf, comps: Vec<Vec<usize>>) -> Self {
        let out = PresheafMap { src, tgt, comps };
        debug_assert!(out.src.shape().covers().iter().all(|&(a, b)| out.natural_at(a, b)));
        out
    }

    fn natural_at(&self, a: usize, b: usize) -> bool {
        (0..self.src.size(a)).all(|e| self.tgt.map(a, b)[self.comps[a][e]] == self.comps[b][self.src.map(a, b)[e]])
    }

    pub fn identity(x: &CoPresheaf) -> Self {
        let comps = x.sizes().iter().map(|&n| (0..n).collect()).collect();
        PresheafMap { src: x.clone(), tgt: x.clone(), comps }
    }

    pub fn source(&self) -> &CoPresheaf {
        &self.src
    }

    pub fn target(&self) -> &CoPresheaf {
        &self.tgt
    }

    pub fn component(&self, a: usize) -> &[usize] {
        &self.comps[a]
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &PresheafMap) -> PresheafMap {
        debug_assert!(f.tgt == self.src, "composing non-composable maps");
        let comps = f
            .comps
            .iter()
            .zip(&self.comps)
            .map(|(fa, ga)| fa.iter().map(|&e| ga[e]).collect())
            .collect();
        PresheafMap { src: f.src.clone(), tgt: self.tgt.clone(), comps }
    }

    pub fn is_iso(&self) -> bool {
        self.src.sizes() == self.tgt.sizes()
            && self.comps.iter().enumerate().all(|(a, c)| {
                let mut seen = vec![false; self.tgt.size(a)];
                c.iter().all(|&t| !std::mem::replace(&mut seen[t], true))
            })
    }

    pub fn inverse(&self) -> Option<PresheafMap> {
        if !self.is_iso() {
            return None;
        }
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut inv = vec![0; c.len()];
                for (e, &t) in c.iter().enumerate() {
                    inv[t] = e;
                }
                inv
            })
            .collect();
        Some(PresheafMap { src: self.tgt.clone(), tgt: self.src.clone(), comps })
    }

    pub fn restrict(&self, along: &ShapeMap) -> PresheafMap {
        let comps = along.assignment().iter().map(|&b| self.comps[b].clone()).collect();
        PresheafMap::trusted(self.src.restrict(along), self.tgt.restrict(along), comps)
    }

    pub fn rke(&self, incl: &ShapeMap) -> PresheafMap {
        let ts = self.src.rke_table(incl);
        let tt = self.tgt.rke_table(incl);
        let comps = (0..incl.target().len())
            .map(|k| {
                ts.fams[k]
                    .iter()
                    .map(|fam| {
                        let img: Vec<usize> = ts.idx[k].iter().zip(fam).map(|(&z, &e)| self.comps[z][e]).collect();
                        find_family(&tt.fams[k], &img).expect("image of a family is a family")
                    })
                    .collect()
            })
            .collect();
        PresheafMap::trusted(ts.object, tt.object, comps)
    }

    pub fn extend_by_singleton(&self, incl: &ShapeMap) -> Result<PresheafMap, CatError> {
        let src = self.src.extend_by_singleton(incl)?;
        let tgt = self.tgt.extend_by_singleton(incl)?;
        let comps = (0..incl.target().len())
            .map(|k| match incl.preimage_of(k) {
                Some(z) => self.comps[z].clone(),
                None => vec![0],
            })
            .collect();
        Ok(PresheafMap::trusted(src, tgt, comps))
    }

    pub fn extend_by_empty(&self, incl: &ShapeMap) -> Result<PresheafMap, CatError> {
        let src = self.src.extend_by_empty(incl)?;
        let tgt = self.tgt.extend_by_empty(incl)?;
        let comps = (0..incl.target().len())
            .map(|k| match incl.preimage_of(k) {
                Some(z) => self.comps[z].clone(),
                None => Vec::new(),
            })
            .collect();
        Ok(PresheafMap::trusted(src, tgt, comps))
    }

    pub fn to_doc(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        let s = self.src.shape();
        (0..s.len())
            .map(|a| {
                let m = self.comps[a].iter().enumerate().map(|(e, &t)| (e.to_string(), t.to_string())).collect();
                (s.name(a).to_string(), m)
            })
            .collect()
    }

    /// Parses components labelled by element indices, as written by [`PresheafMap::to_doc`].
    pub fn from_doc(
        src: &CoPresheaf,
        tgt: &CoPresheaf,
        doc: &BTreeMap<String, BTreeMap<String, String>>,
    ) -> Result<Self, CatError> {
        let s = src.shape();
        let mut comps = Vec::with_capacity(s.len());
        for a in 0..s.len() {
            let empty = BTreeMap::new();
            let m = doc.get(s.name(a)).unwrap_or(&empty);
            let mut c = vec![usize::MAX; src.size(a)];
            for (k, v) in m {
                let e: usize = k.parse().map_err(|_| CatError::Invalid(format!("{}: bad element `{k}`", s.name(a))))?;
                let t: usize = v.parse().map_err(|_| CatError::Invalid(format!("{}: bad element `{v}`", s.name(a))))?;
                if e >= c.len() {
                    return Err(CatError::Invalid(format!("{}: element `{k}` out of range", s.name(a))));
                }
                c[e] = t;
            }
            if c.contains(&usize::MAX) {
                return Err(CatError::Invalid(format!("{}: component not total", s.name(a))));
            }
            comps.push(c);
        }
        PresheafMap::new(src.clone(), tgt.clone(), comps)
    }
}

/// Unit y → rke(y|_Z) of restriction ⊣ right Kan extension along an inclusion.
pub fn rke_unit(y: &CoPresheaf, incl: &ShapeMap) -> PresheafMap {
    let table = y.restrict(incl).rke_table(incl);
    let comps = (0..incl.target().len())
        .map(|k| {
            (0..y.size(k))
                .map(|e| {
                    let fam: Vec<usize> = table.idx[k].iter().map(|&z| y.map(k, incl.apply(z))[e]).collect();
                    find_family(&table.fams[k], &fam).expect("unit family is compatible")
                })
                .collect()
        })
        .collect();
    PresheafMap::trusted(y.clone(), table.object, comps)
}

/// Counit rke(F)|_Z → F, projecting each family to its own coordinate.
pub fn rke_counit(f: &CoPresheaf, incl: &ShapeMap) -> PresheafMap {
    let table = f.rke_table(incl);
    let restricted = table.object.restrict(incl);
    let comps = (0..incl.source().len())
        .map(|z| {
            let k = incl.apply(z);
            let pos = table.idx[k].iter().position(|&w| w == z).expect("z lies over itself");
            table.fams[k].iter().map(|fam| fam[pos]).collect()
        })
        .collect();
    PresheafMap::trusted(restricted, f.clone(), comps)
}

/// Unit w → ext(w|_Z) of restriction ⊣ extension by singletons.
pub fn singleton_unit(w: &CoPresheaf, incl: &ShapeMap) -> Result<PresheafMap, CatError> {
    let tgt = w.restrict(incl).extend_by_singleton(incl)?;
    let comps = (0..incl.target().len())
        .map(|k| match incl.preimage_of(k) {
            Some(_) => (0..w.size(k)).collect(),
            None => vec![0; w.size(k)],
        })
        .collect();
    Ok(PresheafMap::trusted(w.clone(), tgt, comps))
}

/// Counit ext(F)|_Z → F, which is the identity.
pub fn singleton_counit(f: &CoPresheaf, incl: &ShapeMap) -> Result<PresheafMap, CatError> {
    let src = f.extend_by_singleton(incl)?.restrict(incl);
    Ok(PresheafMap::trusted(src, f.clone(), f.sizes().iter().map(|&n| (0..n).collect()).collect()))
}

/// The category of copresheaves of finite sets on a fixed shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopshCat {
    shape: Arc<FinPoset>,
}

impl CopshCat {
    pub fn new(shape: Arc<FinPoset>) -> Self {
        CopshCat { shape }
    }

    pub fn shape(&self) -> &Arc<FinPoset> {
        &self.shape
    }

    /// All natural maps x → y; with `bijective`, only isomorphisms.
    fn search(&self, x: &CoPresheaf, y: &CoPresheaf, bijective: bool, first_only: bool) -> Vec<PresheafMap> {
        let s = &self.shape;
        if bijective && x.sizes() != y.sizes() {
            return Vec::new();
        }
        let order = s.linear_extension().to_vec();
        let mut comps: Vec<Vec<usize>> = vec![Vec::new(); s.len()];
        let mut out = Vec::new();
        #[allow(clippy::too_many_arguments)]
        fn rec(
            s: &FinPoset,
            order: &[usize],
            pos: usize,
            x: &CoPresheaf,
            y: &CoPresheaf,
            bijective: bool,
            first_only: bool,
            comps: &mut Vec<Vec<usize>>,
            out: &mut Vec<PresheafMap>,
        ) {
            if first_only && !out.is_empty() {
                return;
            }
            if pos == order.len() {
                out.push(PresheafMap::trusted(x.clone(), y.clone(), comps.clone()));
                return;
            }
            let q = order[pos];
            let (nx, ny) = (x.size(q), y.size(q));
            if nx > 0 && ny == 0 {
                return;
            }
            // elements of x(q) hit by some lower cover force their image
            let mut forced = vec![usize::MAX; nx];
            for &c in s.lower_covers(q) {
                for e in 0..x.size(c) {
                    let src = x.map(c, q)[e];
                    let img = y.map(c, q)[comps[c][e]];
                    if forced[src] == usize::MAX {
                        forced[src] = img;
                    } else if forced[src] != img {
                        return;
                    }
                }
            }
            let free: Vec<usize> = (0..nx).filter(|&e| forced[e] == usize::MAX).collect();
            let total = ny.checked_pow(free.len() as u32).expect("hom enumeration too large");
            for code in 0..total {
                let mut f = forced.clone();
                let mut c = code;
                for &e in &free {
                    f[e] = c % ny;
                    c /= ny;
                }
                if bijective {
                    let mut seen = vec![false; ny];
                    if !f.iter().all(|&t| !std::mem::replace(&mut seen[t], true)) {
                        continue;
                    }
                }
                comps[q] = f;
                rec(s, order, pos + 1, x, y, bijective, first_only, comps, out);
                if first_only && !out.is_empty() {
                    return;
                }
            }
            comps[q] = Vec::new();
        }
        rec(s, &order, 0, x, y, bijective, first_only, &mut comps, &mut out);
        out
    }
}

impl Category for CopshCat {
    type Obj = CoPresheaf;
    type Mor = PresheafMap;

    fn identity(&self, x: &CoPresheaf) -> PresheafMap {
        PresheafMap::identity(x)
    }

    fn compose(&self, g: &PresheafMap, f: &PresheafMap) -> PresheafMap {
        g.after(f)
    }

    fn source(&self, f: &PresheafMap) -> CoPresheaf {
        f.src.clone()
    }

    fn target(&self, f: &PresheafMap) -> CoPresheaf {
        f.tgt.clone()
    }

    fn terminal(&self) -> CoPresheaf {
        CoPresheaf::terminal(&self.shape)
    }

    fn initial(&self) -> CoPresheaf {
        CoPresheaf::initial(&self.shape)
    }

    fn to_terminal(&self, x: &CoPresheaf) -> PresheafMap {
        let comps = x.sizes().iter().map(|&n| vec![0; n]).collect();
        PresheafMap::trusted(x.clone(), self.terminal(), comps)
    }

    fn from_initial(&self, x: &CoPresheaf) -> PresheafMap {
        PresheafMap::trusted(self.initial(), x.clone(), vec![Vec::new(); self.shape.len()])
    }

    fn is_terminal(&self, x: &CoPresheaf) -> bool {
        x.sizes().iter().all(|&n| n == 1)
    }

    fn is_iso(&self, f: &PresheafMap) -> bool {
        f.is_iso()
    }

    fn inverse(&self, f: &PresheafMap) -> Option<PresheafMap> {
        f.inverse()
    }

    fn limit(&self, d: &ShapedDiagram<CoPresheaf, PresheafMap>) -> Cone<CoPresheaf, PresheafMap> {
        let q = &self.shape;
        let j = &d.shape;
        let fams: Vec<Vec<Vec<usize>>> = (0..q.len())
            .map(|t| {
                let sizes: Vec<usize> = d.values.iter().map(|v| v.size(t)).collect();
                set_limit(j, &sizes, |a, b| d.edge(a, b).expect("cover").component(t))
            })
            .collect();
        let sizes = fams.iter().map(|f| f.len()).collect();
        let apex = CoPresheaf::from_fn(q.clone(), sizes, |a, b, e| {
            let img: Vec<usize> = fams[a][e].iter().enumerate().map(|(v, &x)| d.values[v].map(a, b)[x]).collect();
            find_family(&fams[b], &img).expect("transition of a family is a family")
        });
        let legs = (0..j.len())
            .map(|v| {
                let comps = (0..q.len()).map(|t| fams[t].iter().map(|f| f[v]).collect()).collect();
                PresheafMap::trusted(apex.clone(), d.values[v].clone(), comps)
            })
            .collect();
        Cone { apex, legs }
    }

    fn factor(
        &self,
        limit: &Cone<CoPresheaf, PresheafMap>,
        cone: &Cone<CoPresheaf, PresheafMap>,
    ) -> Option<PresheafMap> {
        let q = &self.shape;
        let mut comps = Vec::with_capacity(q.len());
        for t in 0..q.len() {
            let fams: Vec<Vec<usize>> =
                (0..limit.apex.size(t)).map(|i| limit.legs.iter().map(|l| l.comps[t][i]).collect()).collect();
            let mut c = Vec::with_capacity(cone.apex.size(t));
            for e in 0..cone.apex.size(t) {
                let fam: Vec<usize> = cone.legs.iter().map(|l| l.comps[t][e]).collect();
                c.push(fams.iter().position(|f| *f == fam)?);
            }
            comps.push(c);
        }
        PresheafMap::new(cone.apex.clone(), limit.apex.clone(), comps).ok()
    }

    fn homs(&self, x: &CoPresheaf, y: &CoPresheaf) -> Vec<PresheafMap> {
        self.search(x, y, false, false)
    }

    fn isos(&self, x: &CoPresheaf, y: &CoPresheaf) -> Vec<PresheafMap> {
        self.search(x, y, true, false)
    }

    fn find_iso(&self, x: &CoPresheaf, y: &CoPresheaf) -> Option<PresheafMap> {
        self.search(x, y, true, true).into_iter().next()
    }

    fn objects(&self, bound: usize) -> Vec<CoPresheaf> {
        let s = self.shape.clone();
        let order = s.linear_extension().to_vec();
        let mut sizes = vec![0; s.len()];
        let mut maps: Vec<Option<Vec<usize>>> = vec![None; s.covers().len()];
        let mut out = Vec::new();
        #[allow(clippy::too_many_arguments)]
        fn rec(
            s: &Arc<FinPoset>,
            order: &[usize],
            pos: usize,
            bound: usize,
            sizes: &mut Vec<usize>,
            maps: &mut Vec<Option<Vec<usize>>>,
            out: &mut Vec<CoPresheaf>,
        ) {
            if pos == order.len() {
                let cm = maps.iter().map(|m| m.clone().expect("assigned")).collect();
                if let Ok(c) = CoPresheaf::new(s.clone(), sizes.clone(), cm) {
                    out.push(c);
                }
                return;
            }
            let q = order[pos];
            let incoming: Vec<usize> =
                s.covers().iter().enumerate().filter(|(_, &(_, b))| b == q).map(|(i, _)| i).collect();
            for n in 0..=bound {
                sizes[q] = n;
                let dom: Vec<usize> = incoming.iter().map(|&i| sizes[s.covers()[i].0]).collect();
                let counts: Vec<usize> = dom.iter().map(|&d| n.checked_pow(d as u32).expect("too many maps")).collect();
                let total: usize = counts.iter().product();
                for code in 0..total {
                    let mut c = code;
                    for (k, &i) in incoming.iter().enumerate() {
                        let mut f = Vec::with_capacity(dom[k]);
                        let mut cc = c % counts[k];
                        c /= counts[k];
                        for _ in 0..dom[k] {
                            f.push(cc % n.max(1));
                            cc /= n.max(1);
                        }
                        maps[i] = Some(f);
                    }
                    if paths_agree(s, q, sizes, maps) {
                        rec(s, order, pos + 1, bound, sizes, maps, out);
                    }
                }
                for &i in &incoming {
                    maps[i] = None;
                }
            }
        }
        rec(&s, &order, 0, bound, &mut sizes, &mut maps, &mut out);
        out
    }
}

/// Whether all covering paths into `q` from below induce the same functions,
/// given maps assigned on every cover whose target precedes or equals q.
fn paths_agree(s: &FinPoset, q: usize, sizes: &[usize], maps: &[Option<Vec<usize>>]) -> bool {
    let cover_idx = |a: usize, b: usize| s.covers().iter().position(|&e| e == (a, b)).expect("cover");
    for a in 0..s.len() {
        if !s.lt(a, q) || s.lower_covers(q).iter().filter(|&&c| s.leq(a, c)).count() < 2 {
            continue;
        }
        for e in 0..sizes[a] {
            let mut image: Option<usize> = None;
            for &c in s.lower_covers(q) {
                if !s.leq(a, c) {
                    continue;
                }
                // transport e from a to c along any path, then across c -> q
                let mut cur = a;
                let mut x = e;
                while cur != c {
                    let next = *s.upper_covers(cur).iter().find(|&&m| s.leq(m, c)).expect("path");
                    x = maps[cover_idx(cur, next)].as_ref().expect("assigned")[x];
                    cur = next;
                }
                let y = maps[cover_idx(c, q)].as_ref().expect("assigned")[x];
                match image {
                    None => image = Some(y),
                    Some(prev) if prev != y => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_circle() -> Arc<FinPoset> {
        Arc::new(
            FinPoset::new(&["a", "b", "u", "v"], &[("a", "u"), ("a", "v"), ("b", "u"), ("b", "v")]).unwrap(),
        )
    }

    fn discrete(n: usize) -> Arc<FinPoset> {
        Arc::new(FinPoset::antichain(n))
    }

    #[test]
    fn limits_of_sets() {
        let cat = CopshCat::new(Arc::new(FinPoset::point()));
        let pt = cat.shape().clone();
        let c = |n: usize| CoPresheaf::constant(&pt, n);
        let prod = ShapedDiagram { shape: FinPoset::antichain(2), values: vec![c(2), c(3)], edges: vec![] };
        assert_eq!(cat.limit(&prod).apex.size(0), 6);
        let empty = ShapedDiagram { shape: FinPoset::antichain(0), values: vec![], edges: vec![] };
        assert!(cat.is_terminal(&cat.limit(&empty).apex));
        let cospan_shape = FinPoset::new(&["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
        let to_c = |n: usize| PresheafMap::new(c(n), c(1), vec![vec![0; n]]).unwrap();
        let d = ShapedDiagram { shape: cospan_shape, values: vec![c(2), c(2), c(1)], edges: vec![to_c(2), to_c(2)] };
        d.check(&cat).unwrap();
        let lim = cat.limit(&d);
        assert_eq!(lim.apex.size(0), 4);
        assert!(lim.commutes(&cat, &d));
    }

    #[test]
    fn restrict_examples() {
        let q = pseudo_circle();
        let f = CoPresheaf::new(q.clone(), vec![1, 2, 2, 1], vec![vec![0], vec![0], vec![1, 0], vec![0, 0]]).unwrap();
        assert_eq!(f.restrict(&ShapeMap::identity(&q)), f);
        let uv = ShapeMap::inclusion(&q, &[2, 3]);
        let r = f.restrict(&uv);
        assert_eq!(r.sizes(), &[2, 1]);
        assert!(r.shape().covers().is_empty());
    }

    #[test]
    fn rke_examples() {
        let d1 = Arc::new(FinPoset::chain(1));
        let top = ShapeMap::inclusion(&d1, &[1]);
        let s = CoPresheaf::constant(top.source(), 3);
        let e = s.rke(&top);
        assert_eq!(e.sizes(), &[3, 3]);
        assert_eq!(e.map(0, 1), &[0, 1, 2]);

        let q = pseudo_circle();
        let uv = ShapeMap::inclusion(&q, &[2, 3]);
        let y = CoPresheaf::new(uv.source().clone(), vec![2, 3], vec![]).unwrap();
        let r = y.rke(&uv);
        assert_eq!(r.sizes(), &[6, 6, 2, 3]);
        // restrict ∘ rke is the identity on the subshape
        assert_eq!(r.restrict(&uv), y);
        assert!(rke_counit(&y, &uv).is_iso());
    }

    #[test]
    fn extension_examples() {
        let q = pseudo_circle();
        let ab = ShapeMap::inclusion(&q, &[0, 1]);
        let y = CoPresheaf::new(ab.source().clone(), vec![2, 0], vec![]).unwrap();
        let e = y.extend_by_singleton(&ab).unwrap();
        assert_eq!(e.sizes(), &[2, 0, 1, 1]);
        assert!(y.extend_by_empty(&ab).is_err());
        let uv = ShapeMap::inclusion(&q, &[2, 3]);
        let z = CoPresheaf::constant(uv.source(), 2);
        assert!(z.extend_by_singleton(&uv).is_err());
        assert_eq!(z.extend_by_empty(&uv).unwrap().sizes(), &[0, 0, 2, 2]);
        let none = ShapeMap::inclusion(&q, &[]);
        let init = CoPresheaf::initial(none.source()).extend_by_empty(&none).unwrap();
        assert_eq!(init, CoPresheaf::initial(&q));
    }

    #[test]
    fn units_satisfy_triangle_identity() {
        let q = pseudo_circle();
        let uv = ShapeMap::inclusion(&q, &[2, 3]);
        let cat = CopshCat::new(q.clone());
        for y in cat.objects(2).into_iter().step_by(7) {
            let unit = rke_unit(&y, &uv);
            let counit = rke_counit(&y.restrict(&uv), &uv);
            // ε_{y|Z} ∘ (η_y)|_Z = id
            assert_eq!(counit.after(&unit.restrict(&uv)), PresheafMap::identity(&y.restrict(&uv)));
        }
    }

    #[test]
    fn iso_search_examples() {
        let q = pseudo_circle();
        let cat = CopshCat::new(q.clone());
        let f = CoPresheaf::new(q.clone(), vec![2, 1, 2, 1], vec![vec![0, 1], vec![0, 0], vec![0], vec![0]]).unwrap();
        let w = cat.find_iso(&f, &f).unwrap();
        assert!(w.is_iso());
        let g = CoPresheaf::constant(&q, 2);
        assert!(cat.find_iso(&f, &g).is_none());
        // two presentations of the same pullback: swap the labels at a
        let f2 = CoPresheaf::new(q.clone(), vec![2, 1, 2, 1], vec![vec![1, 0], vec![0, 0], vec![1], vec![0]]).unwrap();
        assert!(f2 != f);
        assert!(cat.find_iso(&f, &f2).is_some());
    }

    #[test]
    fn object_enumeration_counts() {
        // discrete shapes: sum over sizes of 1 = (bound+1)^n
        assert_eq!(CopshCat::new(discrete(2)).objects(2).len(), 9);
        // Δ¹ with sizes ≤ 2: Σ_{m,n} n^m = 1+1+1 + 0+1+2 + 0+1+4 = 11
        assert_eq!(CopshCat::new(Arc::new(FinPoset::chain(1))).objects(2).len(), 11);
        // hom counts on the pseudo-circle agree with a direct count
        let q = pseudo_circle();
        let cat = CopshCat::new(q.clone());
        let t = cat.terminal();
        let two = CoPresheaf::constant(&q, 2);
        assert_eq!(cat.homs(&t, &two).len(), 2);
        assert_eq!(cat.homs(&two, &two).len(), 4);
    }
}
