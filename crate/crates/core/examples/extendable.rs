//! Sections of a multiplicity diagram over Δ³: one-generation, restriction to
//! the spine, and extension back from spine data.

use std::collections::BTreeMap;

use lax_glue::concretecats::Matrix;
use lax_glue::extendable::{extend, gamma_restrict, is_extendable, is_one_generated, MultiplicityDiagram};
use lax_glue::rlaxsections::{random_sections, section_iso};
use lax_glue::poset::FinPoset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // multiplicity 2 on the long edge 0 < 3, with cells that duplicate
    let base = FinPoset::chain(3);
    let mult: BTreeMap<_, _> = base.strict_pairs().into_iter().map(|k| (k, if k == (0, 3) { 2 } else { 1 })).collect();
    let can = base
        .strict_triples()
        .into_iter()
        .map(|(p, q, r)| {
            let (rows, cols) = (mult[&(q, r)] * mult[&(p, q)], mult[&(p, r)]);
            ((p, q, r), Matrix::from_fn(rows, cols, 2, |_, _| 1))
        })
        .collect();
    let d = MultiplicityDiagram::new(3, 2, &mult, can).expect("cocycle");

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut generated, mut recovered) = (0, 0);
    let samples = random_sections(&d, 2, 40, &mut rng);
    for s in &samples {
        let g = is_one_generated(&d, s).unwrap();
        let t = gamma_restrict(s);
        assert_eq!(g.method_a, g.method_b);
        assert_eq!(g.method_b, is_extendable(&d, &t).is_ok());
        if g.method_b {
            generated += 1;
            if section_iso(&d, &extend(&d, &t).unwrap(), s).is_some() {
                recovered += 1;
            }
        }
    }
    println!("{} sections, {generated} one-generated, {recovered} recovered from their spine", samples.len());
}
