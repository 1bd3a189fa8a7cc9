use std::collections::BTreeMap;

use dse_core::asymptotics::richardson;
use dse_core::mp::BigComplex;
use dse_core::oracle::{connected_to_moments, moments_to_connected};
use dse_core::solver::{poly_from_roots, roots_univariate, set_distance, SolverConfig};
use dse_core::symbolic::{complete_bell, GaussianRational, Monomial, MultiPoly};
use dse_core::tower::{self, TheorySpec};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

fn gaussian() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, -6i64..=6, 1i64..=4).prop_map(|(a, b, d)| {
        GaussianRational::new(Rational::from((a, d)), Rational::from((b, d)))
    })
}

fn monomial() -> impl Strategy<Value = Monomial> {
    proptest::collection::vec((1u32..=4, 0u32..=2), 0..3).prop_map(Monomial::from_pairs)
}

fn poly() -> impl Strategy<Value = MultiPoly> {
    proptest::collection::vec((gaussian(), monomial()), 0..5).prop_map(MultiPoly::from_terms)
}

fn numeric_point() -> impl Strategy<Value = BTreeMap<u32, BigComplex>> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 6).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(k, (a, b))| (k as u32 + 1, BigComplex::from_f64(256, a, b)))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn text_form_round_trips(a in poly()) {
        let back: MultiPoly = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn bell_polynomials_are_weight_homogeneous(k in 1u32..12) {
        for (m, c) in complete_bell(k).terms() {
            prop_assert_eq!(m.weighted_degree(), k);
            prop_assert!(c.is_real());
        }
    }

    #[test]
    fn j_derivative_raises_weight(a in poly()) {
        let d = a.j_derivative();
        for (m, _) in d.terms() {
            let from_some_source = a.terms().any(|(src, _)| src.weighted_degree() + 1 == m.weighted_degree());
            prop_assert!(from_some_source);
        }
        // homogeneous inputs stay homogeneous
        let h = complete_bell(4);
        for (m, _) in h.j_derivative().terms() {
            prop_assert_eq!(m.weighted_degree(), 5);
        }
    }

    #[test]
    fn j_derivative_is_a_derivation(a in poly(), b in poly()) {
        let lhs = (&a * &b).j_derivative();
        let rhs = &(&a.j_derivative() * &b) + &(&a * &b.j_derivative());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_is_a_homomorphism(a in poly(), b in poly(), r in poly()) {
        // the replacement for G4 may only involve lower indices
        let r = r.zero_symbols(|k| k >= 4);
        let sa = a.substitute(4, &r).unwrap();
        let sb = b.substitute(4, &r).unwrap();
        prop_assert_eq!((&a * &b).substitute(4, &r).unwrap(), &sa * &sb);
        prop_assert_eq!((&a + &b).substitute(4, &r).unwrap(), &sa + &sb);
    }

    #[test]
    fn bell_source_derivative_matches_moment_recursion(k in 1u32..6, point in numeric_point()) {
        // d/dJ of a moment: B_{k+1} = dB_k/dJ + G_1 B_k
        let lhs = complete_bell(k + 1);
        let rhs = &complete_bell(k).j_derivative() + &(&MultiPoly::var(1) * &complete_bell(k));
        prop_assert_eq!(&lhs, &rhs);
        // and numerically, the cumulant recursion inverts the Bell form
        let greens: Vec<BigComplex> = std::iter::once(BigComplex::zero(256))
            .chain((1..=k + 1).map(|i| point[&i].clone()))
            .collect();
        let moments = connected_to_moments(&greens);
        let want = lhs.eval_big(256, &point);
        prop_assert!(moments[(k + 1) as usize].dist(&want) < 1e-60);
        let back = moments_to_connected(&moments, (k + 1) as usize).unwrap();
        for i in 1..=(k + 1) as usize {
            prop_assert!(back[i].dist(&greens[i]) < 1e-60);
        }
    }

    #[test]
    fn planted_roots_are_recovered(
        roots in proptest::collection::vec((-8i64..=8, -8i64..=8, 1i64..=5), 1..=6)
    ) {
        let planted: Vec<GaussianRational> = roots
            .iter()
            .map(|&(a, b, d)| GaussianRational::new(Rational::from((a, d)), Rational::from((b, d))))
            .collect();
        let rs = roots_univariate(&poly_from_roots(&planted), &SolverConfig::default()).unwrap();
        prop_assert_eq!(rs.count_with_multiplicity(), planted.len());
        let want: Vec<BigComplex> = planted.iter().map(|r| r.to_big(256)).collect();
        let got = rs.component(0);
        // clustered repeated roots only reach the square root of the precision
        let distinct = {
            let mut p = planted.clone();
            p.sort_by(|a, b| a.to_string().cmp(&b.to_string()));
            p.dedup();
            p.len() == planted.len()
        };
        let tol = if distinct { 1e-20 } else { 1e-12 };
        prop_assert!(set_distance(&got, &want) < tol);
    }

    #[test]
    fn richardson_is_exact_on_inverse_polynomials(
        limit in -5.0f64..5.0,
        a in proptest::collection::vec(-3.0f64..3.0, 3),
        first in 1u32..20,
    ) {
        let vals: Vec<Float> = (0..8)
            .map(|i| {
                let n = Float::with_val(256, first + i);
                let mut s = Float::with_val(256, limit);
                for (p, c) in a.iter().enumerate() {
                    s += Float::with_val(256, c) / n.clone().pow(p as u32 + 1);
                }
                s
            })
            .collect();
        let rep = richardson(&vals, first, 3).unwrap();
        prop_assert!((rep.limit - limit).abs() < 1e-12);
    }

    #[test]
    fn truncation_roots_match_elimination(order in 2u32..9) {
        let theory = TheorySpec::pt_cubic();
        let cfg = SolverConfig::default();
        let a = roots_univariate(&tower::zero_closure_poly(&theory, order).unwrap(), &cfg).unwrap();
        let sys = tower::truncate(&theory, order, &tower::Closure::Zero).unwrap();
        let b = roots_univariate(&sys.univariate().unwrap(), &cfg).unwrap();
        prop_assert!(set_distance(&a.component(0), &b.component(0)) < 1e-40);
    }
}
