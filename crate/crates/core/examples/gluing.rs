//! Recollement of sections over Δ¹ with fibers {b} and {a < b}: the functors
//! j_*, j_!, i_* and the adjunction checks on random sections.

#[path = "../tests/common/mod.rs"]
mod common;

use lax_glue::poset::Decomposition;
use lax_glue::laxdiagram::LaxDiagram;
use lax_glue::rlaxsections::{i_lower_star, j_lower_shriek, j_lower_star, random_sections, recollement_report};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = common::interval();
    let dec = Decomposition::from_sieve(d.base(), &[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples = random_sections(&d, 2, 6, &mut rng);

    let s = &samples[0];
    let u = s.restrict(&dec.sieve());
    let z = s.restrict(&dec.cosieve());
    let show = |name: &str, sec: &lax_glue::rlaxsections::SectionOf<lax_glue::laxdiagram::SetDiagram>| {
        let sizes: Vec<_> = sec.x.iter().map(|(p, x)| format!("{p}: {:?}", x.sizes())).collect();
        println!("{name:>6} {}", sizes.join(", "));
    };
    show("s", s);
    show("j_* u", &j_lower_star(&d, &dec, &u).unwrap().section);
    show("j_! u", &j_lower_shriek(&d, &dec, &u).unwrap());
    show("i_* z", &i_lower_star(&d, &dec, &z).unwrap());

    let partners = random_sections(&d, 2, 3, &mut rng);
    for c in recollement_report(&d, &dec, &samples, &partners).checks {
        println!("{:<32} {}/{}", c.name, c.instances - c.failures, c.instances);
    }
}
