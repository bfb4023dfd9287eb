//! Property tests for the module invariants: character algebra, transform
//! identities, set operations, Bohr nesting, and file-format round trips.

use aplab::bohr;
use aplab::density::{count_3aps, dilate_set, lo, normalized_measure, random_set, SubsetG};
use aplab::grp::{Elem, Group};
use aplab::harmonic::{self, GFunc, Side};
use aplab::io;
use num_complex::Complex64;
use proptest::prelude::*;

fn small_group() -> impl Strategy<Value = Group> {
    prop_oneof![
        (2u64..=96).prop_map(|n| Group::cyclic(n).unwrap()),
        (1u32..=6).prop_map(|n| Group::vector_space(2, n).unwrap()),
        (1u32..=4).prop_map(|n| Group::vector_space(3, n).unwrap()),
        (1u32..=2).prop_map(|n| Group::vector_space(5, n).unwrap()),
        Just(Group::vector_space(7, 2).unwrap()),
    ]
}

/// Group together with a uniformly chosen element triple.
fn group_with_elems() -> impl Strategy<Value = (Group, Elem, Elem, Elem)> {
    small_group().prop_flat_map(|g| {
        let n = g.order() as u32;
        (Just(g), 0..n, 0..n, 0..n)
    })
}

fn group_with_values() -> impl Strategy<Value = (Group, Vec<(f64, f64)>)> {
    small_group().prop_flat_map(|g| {
        let n = g.order() as usize;
        (
            Just(g),
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n..=n),
        )
    })
}

fn to_gfunc(g: Group, values: &[(f64, f64)]) -> GFunc {
    GFunc::new(
        g,
        Side::Physical,
        values.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
    )
    .unwrap()
}

fn max_diff(a: &GFunc, b: &GFunc) -> f64 {
    a.values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn characters_are_multiplicative((g, gamma, x, y) in group_with_elems()) {
        let lhs = g.char_eval(gamma, g.add(x, y));
        let rhs = g.char_eval(gamma, x) * g.char_eval(gamma, y);
        prop_assert!((lhs - rhs).norm() < 1e-10);
        prop_assert!((g.char_eval(gamma, x).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn add_neg_encode_consistent((g, x, y, _z) in group_with_elems()) {
        prop_assert_eq!(g.add(x, g.neg(x)), 0);
        prop_assert_eq!(g.sub(g.add(x, y), y), x);
        prop_assert_eq!(g.encode(&g.decode(x)), x);
    }

    #[test]
    fn transform_round_trip((g, values) in group_with_values()) {
        let f = to_gfunc(g, &values);
        let back = harmonic::idft(&harmonic::dft(&f).unwrap()).unwrap();
        prop_assert!(max_diff(&f, &back) < 1e-9);
    }

    #[test]
    fn parseval((g, values) in group_with_values()) {
        let f = to_gfunc(g, &values);
        let fh = harmonic::dft(&f).unwrap();
        let phys: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / g.order() as f64;
        let four: f64 = fh.values().iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((phys - four).abs() < 1e-9);
    }

    #[test]
    fn convolution_commutes_and_reflects(
        (g, va) in group_with_values(),
        seed in 0u64..1000,
    ) {
        let f = to_gfunc(g, &va);
        let h = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<Complex64> = (0..g.order())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            GFunc::new(g, Side::Physical, vals).unwrap()
        };
        let fg = harmonic::convolve(&f, &h).unwrap();
        let gf = harmonic::convolve(&h, &f).unwrap();
        prop_assert!(max_diff(&fg, &gf) < 1e-9, "∗ commutes");
        let lhs = harmonic::diff_convolve(&f, &h).unwrap();
        let rhs = harmonic::convolve(&f, &h.reflect_conj()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-9, "f∘g = f∗g̃");
    }

    #[test]
    fn translation_is_invertible_isometry(
        (g, values) in group_with_values(),
        t_raw in 0u32..4096,
    ) {
        let t = (t_raw as u64 % g.order()) as Elem;
        let f = to_gfunc(g, &values);
        let tf = harmonic::translate(&f, t);
        prop_assert!((tf.linf() - f.linf()).abs() < 1e-12);
        let back = harmonic::translate(&tf, g.neg(t));
        prop_assert!(max_diff(&f, &back) < 1e-15);
    }

    #[test]
    fn spectrum_monotone_in_threshold((g, values) in group_with_values(), e1 in 0.05f64..0.5, e2 in 0.05f64..0.5) {
        let f = to_gfunc(g, &values);
        let (lo_eta, hi_eta) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let big = harmonic::spectrum(&f, lo_eta).unwrap();
        let small = harmonic::spectrum(&f, hi_eta).unwrap();
        let big_set: std::collections::HashSet<u32> = big.dual_elems().into_iter().collect();
        prop_assert!(small.dual_elems().iter().all(|d| big_set.contains(d)));
    }

    #[test]
    fn lo_strictly_decreasing(d1 in 0.001f64..1.0, d2 in 0.001f64..1.0) {
        prop_assume!(d1 < d2);
        prop_assert!(lo(d1).unwrap() > lo(d2).unwrap());
    }

    #[test]
    fn dilate_preserves_cardinality(n in 3u64..400, k in 1u64..400, seed in 0u64..100) {
        let g = Group::cyclic(n).unwrap();
        let s = random_set(g, 0.4, seed).unwrap();
        let d = dilate_set(k, &s);
        if aplab::grp::gcd(k % n, n) == 1 {
            prop_assert_eq!(d.unwrap().len(), s.len());
        } else {
            prop_assert!(d.is_err());
        }
    }

    #[test]
    fn raw_minus_nontrivial_is_cardinality(seed in 0u64..200, alpha in 0.05f64..0.9) {
        // odd-order groups only
        let g = Group::cyclic(2 * (seed % 40) + 31).unwrap();
        let a = random_set(g, alpha, seed).unwrap();
        let rep = count_3aps(&a).unwrap();
        prop_assert_eq!(rep.raw_triples - rep.nontrivial_triples, a.len() as u64);
    }

    #[test]
    fn measure_correlation_at_zero(seed in 0u64..200, alpha in 0.05f64..1.0) {
        let g = Group::cyclic(128).unwrap();
        let a = random_set(g, alpha, seed).unwrap();
        prop_assume!(!a.is_empty());
        let mu = normalized_measure(&a).unwrap();
        prop_assert!((mu.l1() - 1.0).abs() < 1e-9);
        let w = harmonic::diff_convolve(&mu, &mu).unwrap();
        prop_assert!((w.at(0).re - 1.0 / a.density()).abs() < 1e-7);
        // the single-measure key cancellation
        let l1f = harmonic::l1_fourier(&w).unwrap();
        prop_assert!(l1f <= 1.0 / a.density() + 1e-9);
    }

    #[test]
    fn bohr_shrink_nests_and_join_constrains(
        n in 31u64..500,
        f1 in 1u32..500,
        f2 in 1u32..500,
        rho in 0.1f64..1.9,
        c in 0.05f64..1.0,
    ) {
        let g = Group::cyclic(n).unwrap();
        let b = bohr::bohr_set(g, &[f1 % n as u32], rho).unwrap();
        let s = bohr::shrink(&b, c).unwrap();
        prop_assert!(s.is_subset_of(&b));
        let j = bohr::bohr_join(&b, &[f2 % n as u32], rho / 2.0).unwrap();
        prop_assert!(j.is_subset_of(&b));
        for &t in j.elements().members() {
            for &(f, w) in j.freqs() {
                prop_assert!(g.chord(f, t) <= w + 1e-12);
            }
        }
    }

    #[test]
    fn set_file_round_trip(n in 2u64..300, alpha in 0.05f64..1.0, seed in 0u64..50) {
        let g = Group::cyclic(n).unwrap();
        let s = random_set(g, alpha, seed).unwrap();
        let mut buf = Vec::new();
        io::write_set(&mut buf, &s).unwrap();
        let back = io::read_set(&buf[..]).unwrap();
        prop_assert_eq!(back.members(), s.members());
    }

    #[test]
    fn gfunc_file_round_trip((g, values) in group_with_values()) {
        let f = to_gfunc(g, &values);
        let mut buf = Vec::new();
        io::write_gfunc(&mut buf, &f).unwrap();
        let back = io::read_gfunc(&buf[..]).unwrap();
        prop_assert_eq!(back.values(), f.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn almost_period_scan_triangle_inequality(seed in 0u64..100, k in 2u32..6) {
        // the defining guarantee of the exact scan: X at ε/k smooths to ε
        let g = Group::cyclic(64).unwrap();
        let a = random_set(g, 0.5, seed).unwrap();
        prop_assume!(!a.is_empty());
        let s = random_set(g, 0.3, seed + 1).unwrap();
        let mu = normalized_measure(&a).unwrap();
        let f0 = harmonic::convolve(
            &harmonic::diff_convolve(&mu, &mu).unwrap(),
            &s.indicator(),
        ).unwrap();
        let eps = 0.3;
        let x = aplab::increment::almost_period_set(
            &f0,
            &SubsetG::full(g),
            eps / k as f64,
        ).unwrap();
        prop_assert!(x.contains(0));
        let defect = aplab::increment::verify_linf_ap(&x, k, &f0).unwrap();
        prop_assert!(defect <= eps + 1e-9);
    }
}
