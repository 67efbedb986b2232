//! Sheaves on the pseudo-circle as right-lax sections of its gluing diagram,
//! and the strata recovered from the diagram alone.

use lax_glue::concretecats::{Category, CopshCat};
use lax_glue::strattopos::StratSpace;

fn main() {
    let sp = StratSpace::pseudo_circle();
    let d = sp.gluing_diagram().unwrap();
    let sheaves = CopshCat::new(sp.space().clone()).objects(2);
    let mut units = 0;
    for x in &sheaves {
        let (_, unit) = sp.theta_unit(&d, x).unwrap();
        units += unit.is_iso() as usize;
    }
    println!("{units}/{} sheaves come back from their sections", sheaves.len());

    for o in sp.strat().cosieves() {
        let r = sp.recover_stratification(&d, &o).unwrap();
        println!("cosieve {o:?}: subterminal {}, matches {}", r.subterminal, r.matches);
    }
    for c in sp.stratification_axioms() {
        println!("{:<40} {}/{}", c.name, c.instances - c.failures, c.instances);
    }
}
