//! Computable fiber categories: copresheaves of finite sets on a finite
//! poset, and finite-dimensional vector spaces over F_p.

pub mod linalg;
pub mod sets;
pub mod vect;

use std::fmt::Debug;

use thiserror::Error;

use crate::poset::FinPoset;

pub use linalg::Matrix;
pub use sets::{CoPresheaf, CopshCat, PresheafMap, ShapeMap};
pub use vect::VectCat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatError {
    #[error("diagram is not functorial between {0} and {1}")]
    NotFunctorial(String, String),
    #[error("diagram edge {0} -> {1} has mismatched endpoints")]
    EdgeMismatch(String, String),
    #[error("inclusion orientation violated at {0}")]
    OrientationViolation(String),
    #[error("invalid data: {0}")]
    Invalid(String),
}

/// A finite category with the structure the gluing constructions need.
pub trait Category {
    type Obj: Clone + PartialEq + Debug;
    type Mor: Clone + PartialEq + Debug;

    fn identity(&self, x: &Self::Obj) -> Self::Mor;
    /// `g ∘ f`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor;
    fn source(&self, f: &Self::Mor) -> Self::Obj;
    fn target(&self, f: &Self::Mor) -> Self::Obj;

    fn terminal(&self) -> Self::Obj;
    fn initial(&self) -> Self::Obj;
    fn to_terminal(&self, x: &Self::Obj) -> Self::Mor;
    fn from_initial(&self, x: &Self::Obj) -> Self::Mor;
    fn is_terminal(&self, x: &Self::Obj) -> bool;

    fn is_iso(&self, f: &Self::Mor) -> bool;
    fn inverse(&self, f: &Self::Mor) -> Option<Self::Mor>;

    /// Limit of a poset-shaped diagram with its projection cone.
    fn limit(&self, d: &ShapedDiagram<Self::Obj, Self::Mor>) -> Cone<Self::Obj, Self::Mor>;
    /// The mediating map from the apex of `cone` into the limit apex, if
    /// `cone` is a cone over the same diagram.
    fn factor(&self, limit: &Cone<Self::Obj, Self::Mor>, cone: &Cone<Self::Obj, Self::Mor>) -> Option<Self::Mor>;

    /// Every morphism x → y.
    fn homs(&self, x: &Self::Obj, y: &Self::Obj) -> Vec<Self::Mor>;
    /// Every isomorphism x → y.
    fn isos(&self, x: &Self::Obj, y: &Self::Obj) -> Vec<Self::Mor> {
        self.homs(x, y).into_iter().filter(|f| self.is_iso(f)).collect()
    }
    /// Some isomorphism x → y, searched exhaustively.
    fn find_iso(&self, x: &Self::Obj, y: &Self::Obj) -> Option<Self::Mor>;
    /// Every object whose pointwise cardinality (or dimension) is at most `bound`.
    fn objects(&self, bound: usize) -> Vec<Self::Obj>;
}

/// A diagram indexed by a finite poset, given on covering relations.
#[derive(Debug, Clone)]
pub struct ShapedDiagram<O, M> {
    pub shape: FinPoset,
    pub values: Vec<O>,
    /// One morphism per covering pair of `shape`, in the order of `shape.covers()`.
    pub edges: Vec<M>,
}

impl<O: Clone + PartialEq + Debug, M: Clone + PartialEq + Debug> ShapedDiagram<O, M> {
    /// The cospan a → c ← b, vertices in that order.
    pub fn cospan(a: O, b: O, c: O, f: M, g: M) -> Self {
        let shape = FinPoset::new(&["a", "b", "c"], &[("a", "c"), ("b", "c")]).expect("cospan shape");
        let edges = shape.covers().iter().map(|&(x, _)| if x == 0 { f.clone() } else { g.clone() }).collect();
        ShapedDiagram { shape, values: vec![a, b, c], edges }
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&M> {
        self.shape.covers().iter().position(|&e| e == (a, b)).map(|i| &self.edges[i])
    }

    /// Checks endpoints of every edge and that all covering paths between
    /// two vertices compose to the same morphism.
    pub fn check<C: Category<Obj = O, Mor = M> + ?Sized>(&self, cat: &C) -> Result<(), CatError> {
        let s = &self.shape;
        let n = s.len();
        for (i, &(a, b)) in s.covers().iter().enumerate() {
            let f = &self.edges[i];
            if cat.source(f) != self.values[a] || cat.target(f) != self.values[b] {
                return Err(CatError::EdgeMismatch(s.name(a).into(), s.name(b).into()));
            }
        }
        for a in 0..n {
            let mut comp: Vec<Option<M>> = vec![None; n];
            comp[a] = Some(cat.identity(&self.values[a]));
            for &b in s.linear_extension() {
                if b == a || !s.lt(a, b) {
                    continue;
                }
                for &c in s.lower_covers(b) {
                    if !s.leq(a, c) {
                        continue;
                    }
                    let via = cat.compose(self.edge(c, b).expect("cover"), comp[c].as_ref().expect("ordered"));
                    match &comp[b] {
                        None => comp[b] = Some(via),
                        Some(prev) if *prev != via => {
                            return Err(CatError::NotFunctorial(s.name(a).into(), s.name(b).into()));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// The composite morphism from `a` to `b` along some covering path.
    pub fn transition<C: Category<Obj = O, Mor = M> + ?Sized>(&self, cat: &C, a: usize, b: usize) -> Option<M> {
        let s = &self.shape;
        if !s.leq(a, b) {
            return None;
        }
        let mut cur = a;
        let mut f = cat.identity(&self.values[a]);
        while cur != b {
            let next = *s.upper_covers(cur).iter().find(|&&c| s.leq(c, b))?;
            f = cat.compose(self.edge(cur, next)?, &f);
            cur = next;
        }
        Some(f)
    }
}

/// A cone: an apex with one leg per vertex of a diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone<O, M> {
    pub apex: O,
    pub legs: Vec<M>,
}

impl<O: Clone + PartialEq + Debug, M: Clone + PartialEq + Debug> Cone<O, M> {
    /// Whether the legs commute with every edge of `d`.
    pub fn commutes<C: Category<Obj = O, Mor = M> + ?Sized>(&self, cat: &C, d: &ShapedDiagram<O, M>) -> bool {
        d.shape
            .covers()
            .iter()
            .zip(&d.edges)
            .all(|(&(a, b), e)| cat.compose(e, &self.legs[a]) == self.legs[b])
    }
}
