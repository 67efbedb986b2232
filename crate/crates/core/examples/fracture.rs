//! The fracture square s ≅ j_*j^*s ×_{i_*i^*j_*j^*s} i_*i^*s for every sieve of Δ².

#[path = "../tests/common/mod.rs"]
mod common;

use lax_glue::laxdiagram::LaxDiagram;
use lax_glue::poset::Decomposition;
use lax_glue::rlaxsections::{fracture, random_sections};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = common::rke_chain();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = random_sections(&d, 2, 10, &mut rng);
    for sieve in d.base().sieves() {
        let dec = Decomposition::from_sieve(d.base(), &sieve).unwrap();
        let iso = samples.iter().filter(|s| fracture(&d, &dec, s).unwrap().is_iso).count();
        println!("sieve {sieve:?}: {iso}/{} squares are pullbacks", samples.len());
    }
}
