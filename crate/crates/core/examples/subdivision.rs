//! Barycentric subdivision of Δ² and the chain category J_x for x = [2].

use lax_glue::poset::{Decomposition, FinPoset};
use lax_glue::subdivision::{jx, subdivide, Chain, DEFAULT_CHAIN_LIMIT};

fn main() {
    let p = FinPoset::chain(2);
    let sd = subdivide(&p, DEFAULT_CHAIN_LIMIT).unwrap();
    println!("sd(Δ²) has {} chains:", sd.len());
    for c in sd.chains() {
        println!("  {}", c.label(&p));
    }
    println!("{} locally cocartesian edges", sd.cocartesian_edges().len());

    let dec = Decomposition::from_sieve(&p, &[0, 1]).unwrap();
    let j = jx(&dec, &Chain::singleton(2)).unwrap();
    println!("J_[2] over the sieve {{0, 1}}:");
    for c in j.chains() {
        println!("  {}", c.label(&p));
    }
    println!("{}", sd.to_dot("sd"));
}
