#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use lax_glue::concretecats::ShapeMap;
use lax_glue::laxdiagram::{validate, Pipeline, SetDiagram, Stage, ValidateOptions};
use lax_glue::poset::FinPoset;
use lax_glue::strattopos::{StratMap, StratSpace};

pub fn point_chain(n: usize) -> SetDiagram {
    let pt = Arc::new(FinPoset::point());
    let steps = (0..n).map(|_| Pipeline::identity(&pt)).collect();
    SetDiagram::strict_chain(vec![pt; n + 1], steps).unwrap()
}

fn arrow() -> Arc<FinPoset> {
    Arc::new(FinPoset::new(&["a", "b"], &[("a", "b")]).unwrap())
}

/// Δ¹ with fibers {b} and {a < b}, pushed forward by right Kan extension.
pub fn interval() -> SetDiagram {
    let k0 = Arc::new(FinPoset::new::<&str>(&["b"], &[]).unwrap());
    let k1 = arrow();
    let step = Pipeline::new(&k0, vec![Stage::Rke(ShapeMap::inclusion(&k1, &[1]))]).unwrap();
    SetDiagram::strict_chain(vec![k0, k1], vec![step]).unwrap()
}

/// Δ² with fibers {c}, {b < c}, {a < b < c} and right Kan extensions.
pub fn rke_chain() -> SetDiagram {
    let k0 = Arc::new(FinPoset::new::<&str>(&["c"], &[]).unwrap());
    let k1 = Arc::new(FinPoset::new(&["b", "c"], &[("b", "c")]).unwrap());
    let k2 = Arc::new(FinPoset::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap());
    let s0 = Pipeline::new(&k0, vec![Stage::Rke(ShapeMap::inclusion(&k1, &[1]))]).unwrap();
    let s1 = Pipeline::new(&k1, vec![Stage::Rke(ShapeMap::inclusion(&k2, &[1, 2]))]).unwrap();
    SetDiagram::strict_chain(vec![k0, k1, k2], vec![s0, s1]).unwrap()
}

/// Base 0 < 2 > 1 with fibers {u, v}, {w}, {u, v}; restriction along a swap
/// and along the constant map.
pub fn restriction_v() -> SetDiagram {
    let base = FinPoset::new(&["0", "1", "2"], &[("0", "2"), ("1", "2")]).unwrap();
    let two = Arc::new(FinPoset::antichain(2));
    let pt = Arc::new(FinPoset::point());
    let maps = HashMap::from([((0, 2), vec![1, 0]), ((1, 2), vec![0, 0])]);
    SetDiagram::restriction_diagram(base, vec![two.clone(), pt, two], &maps).unwrap()
}

pub fn v_poset() -> FinPoset {
    FinPoset::new(&["0", "1", "2"], &[("0", "2"), ("1", "2")]).unwrap()
}

pub fn lambda_poset() -> FinPoset {
    FinPoset::new(&["0", "1", "2"], &[("0", "1"), ("0", "2")]).unwrap()
}

pub fn diamond() -> FinPoset {
    FinPoset::new(&["0", "1", "2", "3"], &[("0", "1"), ("0", "2"), ("1", "3"), ("2", "3")]).unwrap()
}

/// The cone over the interval with its strata named so that the gluing
/// diagram lives over Δ² = {0 < 1 < 2}.
pub fn cone_on_delta_two() -> StratSpace {
    let q = FinPoset::new(&["c", "e", "e'", "f"], &[("c", "e"), ("c", "e'"), ("e", "f"), ("e'", "f")]).unwrap();
    let p = FinPoset::new(&["0", "1", "2"], &[("2", "1"), ("1", "0")]).unwrap();
    // c ↦ "2", e, e′ ↦ "1", f ↦ "0"
    StratSpace::new(q, p, vec![2, 1, 1, 0]).unwrap()
}

/// Stratified spaces for the reconstruction checks.
pub fn spaces() -> Vec<(&'static str, StratSpace)> {
    vec![
        ("pseudo-circle over Δ¹", StratSpace::pseudo_circle()),
        ("cone over the interval over Δ²", StratSpace::cone_over_interval()),
        ("Q = P = Δ¹", StratSpace::trivial(FinPoset::chain(1))),
        ("Q = P = Δ²", StratSpace::trivial(FinPoset::chain(2))),
        ("Q = P = V", StratSpace::trivial(v_poset())),
        ("Q = P = Λ", StratSpace::trivial(lambda_poset())),
    ]
}

/// Toposic set-valued diagrams over bases with at most four elements.
pub fn set_diagrams() -> Vec<(String, SetDiagram)> {
    let mut out: Vec<(String, SetDiagram)> = vec![
        ("point fibers over Δ¹".into(), point_chain(1)),
        ("point fibers over Δ²".into(), point_chain(2)),
        ("point fibers over Δ³".into(), point_chain(3)),
        ("Kan extension over Δ¹".into(), interval()),
        ("Kan extensions over Δ²".into(), rke_chain()),
        ("restrictions over V".into(), restriction_v()),
    ];
    let mut spaces = spaces();
    spaces.push(("Q = P = diamond", StratSpace::trivial(diamond())));
    for (name, s) in spaces {
        out.push((format!("gluing diagram of {name}"), s.gluing_diagram().unwrap()));
    }
    out.push(("gluing diagram of the relabelled cone".into(), cone_on_delta_two().gluing_diagram().unwrap()));
    for (name, d) in &out {
        let rep = validate(d, &ValidateOptions::default());
        assert!(rep.is_ok(), "{name}: {:?}", rep.violations);
    }
    out
}

/// a < u, v over Δ¹ (a ↦ 0; u, v ↦ 1) collapsed onto Δ¹. The fiber {a} is
/// coinitial under each point, so g_* commutes with closed restriction.
pub fn collapse_lambda() -> StratMap {
    let q = FinPoset::new(&["a", "u", "v"], &[("a", "u"), ("a", "v")]).unwrap();
    let src = StratSpace::new(q, FinPoset::chain(1), vec![0, 1, 1]).unwrap();
    StratMap::new(src, StratSpace::trivial(FinPoset::chain(1)), vec![0, 1, 1]).unwrap()
}
