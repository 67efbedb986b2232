//! Pushing forward along stratified maps. For the collapse of the
//! pseudo-circle onto Δ¹ the comparison on the closed stratum is the diagonal
//! y(u)·y(v) → (y(u)·y(v))², so it is invertible only on small stalks.

#[path = "../tests/common/mod.rs"]
mod common;

use lax_glue::concretecats::{Category, CopshCat};
use lax_glue::strattopos::StratMap;

fn main() {
    for (name, g) in [("pseudo-circle", StratMap::collapse_pseudo_circle()), ("Λ", common::collapse_lambda())] {
        println!("collapse of the {name}:");
        for c in g.functoriality_report(2, 20).unwrap() {
            println!("  {:<44} {}/{}", c.name, c.instances - c.failures, c.instances);
        }
    }
    let g = StratMap::collapse_pseudo_circle();
    let stratum = g.source.stratum(1).clone();
    for y in CopshCat::new(stratum).objects(2) {
        if let Some(c) = g.comparison(1, 0, &y) {
            println!("y = {:?}: {:?} → {:?}, iso {}", y.sizes(), c.source().sizes(), c.target().sizes(), c.is_iso());
        }
    }
}
