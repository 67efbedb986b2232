mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lax_glue::concretecats::{Category, CoPresheaf, CopshCat, Matrix, PresheafMap, ShapeMap, ShapedDiagram};
use lax_glue::extendable::{
    all_sd1, extend, for_each_diagram, gamma_restrict, is_extendable, is_one_generated, MultiplicityDiagram,
    Sd1Section,
};
use lax_glue::laxdiagram::{LaxDiagram, SetDiagram};
use lax_glue::poset::{Decomposition, FinPoset, SubsetKind};
use lax_glue::rlaxsections::{
    confluence_defects, eval_inclusion, random_sections, recollement_report, section_iso, validate_section,
};
use lax_glue::strattopos::StratSpace;
use lax_glue::subdivision::{
    all_chains, elementary_factorize, lr_factorize, max_preserving_inclusions, subdivide, DEFAULT_CHAIN_LIMIT,
};

/// A poset on 1..=max elements, ordered compatibly with the index order.
fn poset(max: usize) -> impl Strategy<Value = FinPoset> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut pairs = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        pairs.push((i, j));
                    }
                    k += 1;
                }
            }
            FinPoset::from_indices((0..n).map(|i| i.to_string()).collect(), &pairs).unwrap()
        })
    })
}

fn is_chain(p: &FinPoset, elems: &[usize]) -> bool {
    elems.iter().all(|&a| elems.iter().all(|&b| p.comparable(a, b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn complements_of_cosieves_are_sieves(p in poset(5)) {
        let cos = p.cosieves();
        prop_assert_eq!(cos.len(), p.sieves().len());
        for o in &cos {
            let rest: Vec<usize> = (0..p.len()).filter(|a| !o.contains(a)).collect();
            prop_assert!(matches!(p.classify_subset(&rest), SubsetKind::Sieve | SubsetKind::Both));
            let dec = Decomposition::from_cosieve(&p, o).unwrap();
            prop_assert!(matches!(p.classify_subset(&dec.sieve()), SubsetKind::Sieve | SubsetKind::Both));
            prop_assert!(matches!(p.classify_subset(&dec.cosieve()), SubsetKind::Cosieve | SubsetKind::Both));
        }
    }

    #[test]
    fn cosieves_form_a_lattice(p in poset(5)) {
        let cos: Vec<Vec<bool>> = p.cosieves().iter().map(|o| p.mask(o)).collect();
        for a in &cos {
            for b in &cos {
                let join: Vec<bool> = a.iter().zip(b).map(|(x, y)| *x || *y).collect();
                let meet: Vec<bool> = a.iter().zip(b).map(|(x, y)| *x && *y).collect();
                prop_assert!(cos.contains(&join) && cos.contains(&meet));
            }
        }
    }

    #[test]
    fn chains_match_brute_force(p in poset(6)) {
        let n = p.len();
        let brute = (1u32..1 << n)
            .filter(|bits| {
                let elems: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
                is_chain(&p, &elems)
            })
            .count();
        prop_assert_eq!(all_chains(&p, DEFAULT_CHAIN_LIMIT).unwrap().len(), brute);
    }

    #[test]
    fn cocartesian_edges_append_a_new_maximum(p in poset(5)) {
        let sd = subdivide(&p, DEFAULT_CHAIN_LIMIT).unwrap();
        for &(a, b) in sd.cocartesian_edges() {
            let (ca, cb) = (sd.chain(a), sd.chain(b));
            prop_assert!(p.lt(sd.max_label(a), sd.max_label(b)));
            prop_assert_eq!(&ca.with(&p, cb.top()), cb);
        }
    }

    #[test]
    fn elementary_factorizations_reassemble(p in poset(5)) {
        for (sigma, tau) in max_preserving_inclusions(&p, 5, DEFAULT_CHAIN_LIMIT).unwrap() {
            let moves = elementary_factorize(&p, &sigma, &tau).unwrap();
            let mut cur = sigma.clone();
            for mv in &moves {
                prop_assert_eq!(mv.from(), &cur);
                cur = cur.with(&p, mv.elem());
            }
            prop_assert_eq!(cur, tau);
        }
    }

    #[test]
    fn lr_factorization_splits_by_side(p in poset(5), pick in any::<prop::sample::Index>()) {
        let cos = p.cosieves();
        let dec = Decomposition::from_cosieve(&p, &cos[pick.index(cos.len())]).unwrap();
        let chains = all_chains(&p, DEFAULT_CHAIN_LIMIT).unwrap();
        for tau in &chains {
            for sigma in chains.iter().filter(|s| s.is_subchain_of(tau)) {
                let f = lr_factorize(sigma, tau, &dec).unwrap();
                prop_assert!(sigma.is_subchain_of(&f.through) && f.through.is_subchain_of(tau));
                for &a in f.through.elems().iter().filter(|a| !sigma.contains(**a)) {
                    prop_assert!(dec.in_sieve(a));
                }
                for &a in tau.elems().iter().filter(|a| !f.through.contains(**a)) {
                    prop_assert!(dec.in_cosieve(a));
                }
            }
        }
    }
}

// ------------------------------------------------------------------ limits

fn as_set_diagram(x: &CoPresheaf) -> (CopshCat, ShapedDiagram<CoPresheaf, PresheafMap>) {
    let pt = Arc::new(FinPoset::point());
    let shape = x.shape();
    let values: Vec<CoPresheaf> = (0..shape.len()).map(|a| CoPresheaf::constant(&pt, x.size(a))).collect();
    let edges = shape
        .covers()
        .iter()
        .map(|&(a, b)| PresheafMap::new(values[a].clone(), values[b].clone(), vec![x.map(a, b).to_vec()]).unwrap())
        .collect();
    (CopshCat::new(pt), ShapedDiagram { shape: (**shape).clone(), values, edges })
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: u32) -> Matrix {
    let cells: Vec<u32> = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
    Matrix::from_fn(rows, cols, p, |i, j| cells[i * cols + j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn limits_are_universal(shape in poset(4), pick in any::<prop::sample::Index>(), apex in 0usize..3, seed in any::<u64>()) {
        let shape = Arc::new(shape);
        let objs = CopshCat::new(shape.clone()).objects(2);
        let x = &objs[pick.index(objs.len())];
        let (cat, diagram) = as_set_diagram(x);
        let lim = cat.limit(&diagram);
        let l = lim.apex.size(0);
        prop_assume!(l > 0 || apex == 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = Arc::new(FinPoset::point());
        let a = CoPresheaf::constant(&pt, apex);
        let h = PresheafMap::new(a.clone(), lim.apex.clone(), vec![(0..apex).map(|_| rng.gen_range(0..l)).collect()]).unwrap();
        let legs: Vec<PresheafMap> = lim.legs.iter().map(|g| cat.compose(g, &h)).collect();
        let cone = lax_glue::concretecats::Cone { apex: a.clone(), legs: legs.clone() };
        prop_assert!(cone.commutes(&cat, &diagram));
        prop_assert_eq!(cat.factor(&lim, &cone), Some(h));
        let mediating = cat
            .homs(&a, &lim.apex)
            .into_iter()
            .filter(|m| lim.legs.iter().zip(&legs).all(|(g, l)| cat.compose(g, m) == *l))
            .count();
        prop_assert_eq!(mediating, 1);
    }

    #[test]
    fn rke_then_restrict_is_the_identity(shape in poset(5), mask in any::<u8>(), pick in any::<prop::sample::Index>()) {
        let shape = Arc::new(shape);
        let subset: Vec<usize> = (0..shape.len()).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!subset.is_empty() && subset.len() <= 3);
        let incl = ShapeMap::inclusion(&shape, &subset);
        let objs = CopshCat::new(incl.source().clone()).objects(2);
        let x = &objs[pick.index(objs.len())];
        prop_assert_eq!(&x.rke(&incl).restrict(&incl), x);
    }

    #[test]
    fn linear_algebra_identities(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = [2u32, 3, 5][rng.gen_range(0..3)];
        let a = random_matrix(&mut rng, rows, cols, p);
        let k = a.kernel();
        prop_assert_eq!(a.rank() + k.cols(), cols);
        prop_assert!(a.mul(&k).is_zero());
        let x = random_matrix(&mut rng, cols, 1, p);
        let b = a.mul(&x);
        let y = a.solve(&b).expect("b lies in the image");
        prop_assert_eq!(a.mul(&y), b);
        if let Some(inv) = a.inverse() {
            prop_assert_eq!(a.mul(&inv), Matrix::identity(rows, p));
        }
    }
}

// ------------------------------------------------------------------ sections

fn fixtures() -> Vec<(String, SetDiagram)> {
    let mut v = common::set_diagrams();
    v.push(("point fibers over Δ⁴".into(), common::point_chain(4)));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lax_evaluation_is_confluent(pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let all = fixtures();
        let (name, d) = &all[pick.index(all.len())];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in random_sections(d, 2, 2, &mut rng) {
            prop_assert!(validate_section(d, &s).is_ok());
            for (sigma, tau) in max_preserving_inclusions(d.base(), 5, DEFAULT_CHAIN_LIMIT).unwrap() {
                let bad = confluence_defects(d, &s, &sigma, &tau).unwrap();
                prop_assert!(bad.is_empty(), "{}: {:?} ⊆ {:?} orders {:?}", name, sigma, tau, bad);
            }
        }
    }

    #[test]
    fn lax_evaluation_is_functorial(pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let all = fixtures();
        let (name, d) = &all[pick.index(all.len())];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let incl = max_preserving_inclusions(d.base(), 4, DEFAULT_CHAIN_LIMIT).unwrap();
        for s in random_sections(d, 2, 2, &mut rng) {
            for (rho, tau) in &incl {
                for (sigma, r) in incl.iter().filter(|(_, r)| r == rho) {
                    let c = d.fiber(tau.top());
                    let direct = eval_inclusion(d, &s, sigma, tau).unwrap();
                    let composite = c.compose(&eval_inclusion(d, &s, r, tau).unwrap(), &eval_inclusion(d, &s, sigma, r).unwrap());
                    prop_assert!(direct == composite, "{}: {:?} ⊆ {:?} ⊆ {:?}", name, sigma, rho, tau);
                }
            }
        }
    }

    #[test]
    fn recollement_on_random_sieves(pick in any::<prop::sample::Index>(), sieve in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let all = common::set_diagrams();
        let (name, d) = &all[pick.index(all.len())];
        let sieves = d.base().sieves();
        let sv = &sieves[sieve.index(sieves.len())];
        let dec = Decomposition::from_sieve(d.base(), sv).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = random_sections(d, 2, 3, &mut rng);
        let partners = random_sections(d, 2, 2, &mut rng);
        let rep = recollement_report(d, &dec, &samples, &partners);
        prop_assert!(rep.passed(), "{}: {:?}", name, rep.checks);
    }
}

// ------------------------------------------------------------------ extendability

/// A multiplicity diagram over Δ³ with multiplicities ≤ 2 and random cells,
/// redrawn until the cocycle holds.
fn random_multiplicity_diagram(rng: &mut ChaCha8Rng) -> MultiplicityDiagram {
    let base = FinPoset::chain(3);
    loop {
        let mult: BTreeMap<(usize, usize), usize> = base.strict_pairs().into_iter().map(|k| (k, rng.gen_range(0..=2))).collect();
        let can = base
            .strict_triples()
            .into_iter()
            .map(|(p, q, r)| {
                let m = random_matrix(rng, mult[&(q, r)] * mult[&(p, q)], mult[&(p, r)], 2);
                ((p, q, r), m)
            })
            .collect();
        if let Ok(d) = MultiplicityDiagram::new(3, 2, &mult, can) {
            return d;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_generation_matches_extendability(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_multiplicity_diagram(&mut rng);
        for s in random_sections(&d, 2, 8, &mut rng) {
            let g = is_one_generated(&d, &s).unwrap();
            let t = gamma_restrict(&s);
            prop_assert_eq!(g.method_a, g.method_b);
            prop_assert_eq!(g.method_b, is_extendable(&d, &t).is_ok());
            if g.method_b {
                let back = extend(&d, &t).unwrap();
                prop_assert!(section_iso(&d, &back, &s).is_some());
            }
        }
    }

    #[test]
    fn spines_are_fiber_product_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_multiplicity_diagram(&mut rng).interval(0, 2);
        for t in all_sd1(&d, 1) {
            let pt = t.to_fiber_product();
            prop_assert!(pt.is_compatible(&d));
            prop_assert_eq!(Sd1Section::from_fiber_product(&d, &pt).unwrap(), t.clone());
            if is_extendable(&d, &t).is_ok() {
                prop_assert_eq!(gamma_restrict(&extend(&d, &t).unwrap()), t);
            }
        }
    }
}

#[test]
fn some_low_dimensional_diagrams_are_enumerated() {
    let mut count = 0;
    let _ = for_each_diagram(2, 2, 2, &mut |_| {
        count += 1;
        std::ops::ControlFlow::Continue(())
    });
    assert_eq!(count, 337);
}

// ------------------------------------------------------------------ strata

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn phi_is_left_adjoint_to_rho(space in any::<prop::sample::Index>(), px in any::<prop::sample::Index>(), py in any::<prop::sample::Index>(), stratum in any::<prop::sample::Index>()) {
        let spaces = common::spaces();
        let (_, sp) = &spaces[space.index(spaces.len())];
        let p = stratum.index(sp.strat().len());
        let xs = CopshCat::new(sp.space().clone()).objects(2);
        let ys = CopshCat::new(sp.stratum(p).clone()).objects(2);
        let (x, y) = (&xs[px.index(xs.len())], &ys[py.index(ys.len())]);
        let left = CopshCat::new(sp.stratum(p).clone()).homs(&sp.phi(p, x), y).len();
        let right = CopshCat::new(sp.space().clone()).homs(x, &sp.rho(p, y)).len();
        prop_assert_eq!(left, right);
        prop_assert_eq!(&sp.phi(p, &sp.rho(p, y)), y);
    }

    #[test]
    fn transport_round_trips(space in any::<prop::sample::Index>(), px in any::<prop::sample::Index>()) {
        let spaces = common::spaces();
        let (_, sp): &(&str, StratSpace) = &spaces[space.index(spaces.len())];
        let d = sp.gluing_diagram().unwrap();
        let xs = CopshCat::new(sp.space().clone()).objects(2);
        let x = &xs[px.index(xs.len())];
        let (th, unit) = sp.theta_unit(&d, x).unwrap();
        prop_assert!(unit.is_iso());
        let s = sp.transport(x);
        let counit = sp.theta_counit(&d, &s, &sp.theta(&d, &s).unwrap()).unwrap();
        prop_assert!(counit.psi.values().all(|m| m.is_iso()));
        prop_assert_eq!(th.sheaf.sizes(), x.sizes());
    }
}
