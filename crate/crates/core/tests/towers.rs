use dse_core::symbolic::{GaussianRational, MultiPoly, UniPoly};
use dse_core::tower::{self, eliminate_univariate, generate_tower, truncate, Closure, TheorySpec};
use rug::Rational;

fn p(s: &str) -> MultiPoly {
    s.parse().unwrap()
}

fn check_tower(theory: &TheorySpec, expected: &[(u32, &str)]) {
    let tower = generate_tower(theory, expected.len()).unwrap();
    for (entry, &(top, rhs)) in tower.entries.iter().zip(expected) {
        assert_eq!(entry.top, top, "{}", theory.name);
        assert_eq!(entry.rhs, p(rhs), "{} G{top}", theory.name);
    }
}

#[test]
fn quartic_tower() {
    check_tower(
        &TheorySpec::hermitian_quartic(),
        &[
            (4, "-3*G2^2 + 1"),
            (6, "-12*G2*G4 - 6*G2^3"),
            (8, "-18*G2*G6 - 30*G4^2 - 60*G2^2*G4"),
            (10, "-24*G2*G8 - 168*G4*G6 - 126*G2^2*G6 - 420*G2*G4^2"),
        ],
    );
}

#[test]
fn cubic_tower() {
    check_tower(
        &TheorySpec::pt_cubic(),
        &[
            (2, "-G1^2"),
            (3, "-2*G1*G2 - i"),
            (4, "-2*G2^2 - 2*G1*G3"),
            (5, "-6*G2*G3 - 2*G1*G4"),
        ],
    );
}

#[test]
fn pt_quartic_tower() {
    check_tower(
        &TheorySpec::pt_quartic(),
        &[
            (3, "-G1^3 - 3*G1*G2"),
            (4, "-3*G1*G3 - 3*G2^2 - 3*G1^2*G2 - 1"),
            (5, "-3*G1*G4 - 9*G2*G3 - 3*G1^2*G3 - 6*G1*G2^2"),
        ],
    );
}

#[test]
fn displayed_equations_parse_back() {
    let t = generate_tower(&TheorySpec::pt_quartic(), 6).unwrap();
    for e in &t.entries {
        let text = e.to_string();
        let (lhs, rhs) = text.split_once(" = ").unwrap();
        assert_eq!(lhs, format!("G{}", e.top));
        assert_eq!(p(rhs), e.rhs);
    }
}

fn frac(n: i64, d: i64) -> GaussianRational {
    GaussianRational::from_rational(Rational::from((n, d)))
}

#[test]
fn quartic_elimination_polynomials() {
    let q = TheorySpec::hermitian_quartic();
    let z = GaussianRational::zero;
    let one = GaussianRational::one;
    let expected = [
        UniPoly::new(vec![frac(-1, 3), z(), one()]),
        UniPoly::new(vec![z(), frac(-2, 5), z(), one()]),
        UniPoly::new(vec![frac(1, 21), z(), frac(-8, 15), z(), one()]),
        UniPoly::new(vec![z(), frac(193, 1890), z(), frac(-2, 3), z(), one()]),
    ];
    for (n, want) in (2..=5).zip(expected) {
        assert_eq!(eliminate_univariate(&q, n, &Closure::Zero).unwrap(), want, "P_{n}");
    }
}

#[test]
fn elimination_polynomials_display() {
    let q = TheorySpec::hermitian_quartic();
    let shown: Vec<String> = (2..=5)
        .map(|n| tower::zero_closure_poly(&q, n).unwrap().to_string())
        .collect();
    assert_eq!(
        shown,
        [
            "x^2 - 1/3",
            "x^3 - 2/5*x",
            "x^4 - 8/15*x^2 + 1/21",
            "x^5 - 2/3*x^3 + 193/1890*x"
        ]
    );
}

#[test]
fn degrees_follow_orders() {
    for n in 2..=12 {
        let q = tower::zero_closure_poly(&TheorySpec::hermitian_quartic(), n).unwrap();
        assert_eq!(q.degree(), n as usize);
        let c = tower::zero_closure_poly(&TheorySpec::pt_cubic(), n).unwrap();
        assert_eq!(c.degree(), n as usize);
    }
}

#[test]
fn quartic_polynomials_have_definite_parity() {
    for n in 2..=16u32 {
        let q = tower::zero_closure_poly(&TheorySpec::hermitian_quartic(), n).unwrap();
        for (k, c) in q.coeffs().iter().enumerate() {
            if (k as u32 + n) % 2 == 1 {
                assert!(c.is_zero(), "P_{n} has x^{k}");
            }
            assert!(c.is_real());
        }
    }
}

#[test]
fn cubic_polynomials_are_lacunary() {
    // x^(n mod 3) times a polynomial in x^3
    for n in 2..=20u32 {
        let c = tower::zero_closure_poly(&TheorySpec::pt_cubic(), n).unwrap();
        for (k, coef) in c.coeffs().iter().enumerate() {
            if (k as u32) % 3 != n % 3 {
                assert!(coef.is_zero(), "order {n} has x^{k}");
            }
        }
    }
}

#[test]
fn coupled_truncations_are_square() {
    for theory in [
        TheorySpec::pt_quartic(),
        TheorySpec::pt_quintic(),
        TheorySpec::hermitian_sextic(),
        TheorySpec::hermitian_sextic_full(),
    ] {
        let lead = theory.leading_order();
        for order in lead..lead + 4 {
            let sys = truncate(&theory, order, &Closure::Zero).unwrap();
            assert_eq!(sys.equations.len(), sys.unknowns.len(), "{} {order}", theory.name);
            assert_eq!(sys.closed.len(), sys.unknowns.len());
            for e in &sys.equations {
                assert!(e.indices().iter().all(|i| sys.unknowns.contains(i)));
            }
        }
    }
}

#[test]
fn sextic_parity_unknowns() {
    let sys = truncate(&TheorySpec::hermitian_sextic(), 4, &Closure::Zero).unwrap();
    assert_eq!(sys.unknowns, vec![2, 4]);
    assert_eq!(sys.closed, vec![6, 8]);
}

#[test]
fn quintic_has_three_seeds() {
    let sys = truncate(&TheorySpec::pt_quintic(), 6, &Closure::Zero).unwrap();
    assert_eq!(sys.unknowns, vec![1, 2, 3]);
    assert_eq!(sys.closed.len(), 3);
}

#[test]
fn underdetermination_bookkeeping() {
    for theory in [TheorySpec::hermitian_quartic(), TheorySpec::pt_cubic(), TheorySpec::pt_quartic(), TheorySpec::pt_quintic()] {
        let t = generate_tower(&theory, 8).unwrap();
        let s = theory.seeds().len();
        for n in 1..=8 {
            assert_eq!(t.unknowns_in_first(n).len(), n + s, "{} n={n}", theory.name);
        }
    }
}
