//! Evaluating a right-lax section on a chain inclusion does not depend on the
//! order in which the missing elements are inserted.

#[path = "../tests/common/mod.rs"]
mod common;

use lax_glue::laxdiagram::LaxDiagram;
use lax_glue::rlaxsections::{confluence_defects, random_sections};
use lax_glue::subdivision::{max_preserving_inclusions, DEFAULT_CHAIN_LIMIT};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, d) in [("Kan extensions over Δ²", common::rke_chain()), ("restrictions over V", common::restriction_v())] {
        let inclusions = max_preserving_inclusions(d.base(), 5, DEFAULT_CHAIN_LIMIT).unwrap();
        let mut defects = 0;
        for s in random_sections(&d, 2, 4, &mut rng) {
            for (sigma, tau) in &inclusions {
                defects += confluence_defects(&d, &s, sigma, tau).unwrap().len();
            }
        }
        println!("{name}: {} inclusions, {defects} defects", inclusions.len());
    }
}
