use dse_core::mp::BigComplex;
use dse_core::solver::{select_physical, set_distance, solve_truncation, RootSet, Selection, SolverConfig};
use dse_core::tower::{Closure, TheorySpec};

fn accounted(rs: &RootSet) -> u64 {
    let mult = |v: &[dse_core::solver::Root]| v.iter().map(|r| r.multiplicity as u64).sum::<u64>();
    mult(&rs.roots) + mult(&rs.singular) + (rs.at_infinity + rs.path_failures) as u64
}

fn mirrored(values: &[BigComplex], odd: bool) -> Vec<BigComplex> {
    values
        .iter()
        .map(|v| if odd { -v.conj() } else { v.conj() })
        .collect()
}

#[test]
fn cubic_clouds_are_pt_mirrored() {
    let cfg = SolverConfig::default();
    let cubic = TheorySpec::pt_cubic();
    for n in 2..=30 {
        let g1 = solve_truncation(&cubic, n, &Closure::Zero, &cfg).unwrap().component(1);
        let d = set_distance(&g1, &mirrored(&g1, true));
        assert!(d < cfg.cluster_tol, "n={n}: {d:e}");
    }
}

#[test]
fn same_seed_same_output() {
    let cfg = SolverConfig::default();
    let p = TheorySpec::pt_quartic();
    let a = solve_truncation(&p, 8, &Closure::Zero, &cfg).unwrap();
    let b = solve_truncation(&p, 8, &Closure::Zero, &cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_json_value(), b.to_json_value());
}

#[test]
fn doubling_precision_moves_no_root() {
    let cubic = TheorySpec::pt_cubic();
    let lo = SolverConfig::default();
    let hi = SolverConfig {
        precision: 2 * lo.precision,
        ..SolverConfig::default()
    };
    let a = solve_truncation(&cubic, 100, &Closure::Zero, &lo).unwrap();
    let b = solve_truncation(&cubic, 100, &Closure::Zero, &hi).unwrap();
    assert_eq!(a.count_with_multiplicity(), 100);
    assert_eq!(b.count_with_multiplicity(), 100);
    let d = set_distance(&a.component(1), &b.component(1));
    assert!(d < 1e-20, "{d:e}");
}

#[test]
fn quintic_paths_are_all_accounted_for() {
    let cfg = SolverConfig::default();
    let q = TheorySpec::pt_quintic();
    let rs = solve_truncation(&q, 11, &Closure::Zero, &cfg).unwrap();
    assert_eq!(rs.path_failures, 0);
    assert_eq!(accounted(&rs), rs.bezout);
    let pt = select_physical(&rs, Selection::PtAxis(1), &cfg);
    assert!(!pt.roots.is_empty());
    assert!(pt.roots.iter().all(|r| r.residual < 1e-20));
}

#[test]
fn sextic_roots_come_in_conjugate_pairs() {
    let cfg = SolverConfig::default();
    let s = TheorySpec::hermitian_sextic();
    for n in s.leading_order()..=8 {
        let rs = solve_truncation(&s, n, &Closure::Zero, &cfg).unwrap();
        assert_eq!(accounted(&rs), rs.bezout, "n={n}");
        let g2 = rs.component(2);
        let d = set_distance(&g2, &mirrored(&g2, false));
        assert!(d < 1e-10, "n={n}: {d:e}");
        assert!(!select_physical(&rs, Selection::LargestReal(2), &cfg).roots.is_empty());
    }
}
