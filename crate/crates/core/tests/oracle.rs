use std::f64::consts::PI;

use dse_core::asymptotics::{cubic_generating_series, growth_rate_analytic, growth_rate_richardson, GrowthModel};
use dse_core::mp::BigComplex;
use dse_core::oracle::{
    closed_form_reference, exact_greens, moment_table, quartic_moment_law, reference_pairs, ContourSpec,
};
use dse_core::tower::{tower_residuals, TheorySpec};
use rug::Float;

fn greens(theory: &TheorySpec, n: usize, prec: u32) -> Vec<BigComplex> {
    let c = ContourSpec::default_for(theory).unwrap();
    exact_greens(theory, &c, n, prec).unwrap().0
}

#[test]
fn quadrature_agrees_with_closed_forms() {
    for theory in [
        TheorySpec::hermitian_quartic(),
        TheorySpec::pt_cubic(),
        TheorySpec::pt_quartic(),
        TheorySpec::pt_quintic(),
        TheorySpec::hermitian_sextic(),
    ] {
        for pair in reference_pairs(&theory) {
            let reference = closed_form_reference(&theory, pair, 128).unwrap();
            let c = ContourSpec::named(&theory, pair).unwrap();
            let (g, err) = exact_greens(&theory, &c, reference.index as usize, 128).unwrap();
            let d = g[reference.index as usize].dist(&reference.value).to_f64();
            assert!(d < 1e-25, "{} {pair}: {d:e} (quadrature error {err:e})", theory.name);
        }
    }
}

#[test]
fn pt_contours_give_imaginary_odd_and_real_even() {
    for theory in [TheorySpec::pt_cubic(), TheorySpec::pt_quartic()] {
        let g = greens(&theory, 10, 128);
        for (k, v) in g.iter().enumerate().skip(1) {
            let c = v.to_c64();
            let stray = if k % 2 == 1 { c.re } else { c.im };
            assert!(stray.abs() < 1e-25 * c.norm().max(1.0), "{} G{k} = {c}", theory.name);
        }
    }
}

#[test]
fn moments_are_insensitive_to_ray_angle_within_a_sector() {
    let theory = TheorySpec::pt_cubic();
    let base = ContourSpec::default_for(&theory).unwrap();
    let reference = moment_table(&theory, &base, 8, 128).unwrap();
    for delta in [-5.0, 5.0] {
        let c = base.rotated(delta * PI / 180.0);
        let t = moment_table(&theory, &c, 8, 128).unwrap();
        for (a, b) in t.values.iter().zip(&reference.values) {
            assert!(a.dist(b) < 1e-25, "rotation by {delta}°");
        }
    }
}

#[test]
fn exact_values_satisfy_the_tower() {
    for theory in [TheorySpec::hermitian_quartic(), TheorySpec::pt_cubic(), TheorySpec::pt_quartic(), TheorySpec::pt_quintic()] {
        let g = greens(&theory, 24, 256);
        let res = tower_residuals(&theory, &g, 24, 256).unwrap();
        assert!(!res.is_empty());
        for (k, r) in res {
            let scale = g[k as usize].abs().to_f64().max(1.0);
            assert!(r.abs().to_f64() < 1e-50 * scale, "{} G{k}", theory.name);
        }
    }
}

#[test]
fn quartic_moments_follow_their_law() {
    let theory = TheorySpec::hermitian_quartic();
    let c = ContourSpec::default_for(&theory).unwrap();
    let t = moment_table(&theory, &c, 80, 256).unwrap();
    let g = exact_greens(&theory, &c, 80, 512).unwrap().0;
    let rel = |n: u32| {
        let law = quartic_moment_law(n, 256);
        (t.values[2 * n as usize].re.clone() / law - 1u32).to_f64().abs()
    };
    assert!(rel(40) < 0.01, "{}", rel(40));
    // cumulants outgrow the moments
    let ratio = |n: usize| (g[2 * n].abs() / t.values[2 * n].abs()).to_f64();
    assert!(ratio(40) > 1e10 * ratio(10));
}

#[test]
fn quartic_leading_law_converges_monotonically() {
    let theory = TheorySpec::hermitian_quartic();
    let g = greens(&theory, 50, 512);
    let rate = growth_rate_analytic(&theory, 256).unwrap();
    let model = GrowthModel::for_theory(&theory, rate.r_big).unwrap();
    let dev: Vec<f64> = (10..=25u32)
        .map(|n| {
            let m = model.value(2 * n, 512).unwrap();
            ((&g[2 * n as usize] / &m).re - 1u32).to_f64().abs()
        })
        .collect();
    for w in dev.windows(2) {
        assert!(w[1] < w[0], "{dev:?}");
    }
}

#[test]
fn airy_series_reproduces_scaled_cumulants() {
    let g = greens(&TheorySpec::pt_cubic(), 10, 256);
    let c = cubic_generating_series(10, 256);
    let mut ip = BigComplex::one(256);
    for p in 1..=10usize {
        ip = &ip * &BigComplex::i(256);
        let fact = Float::with_val(256, Float::factorial(p as u32 - 1));
        let scaled = (-(&ip * &g[p])).scale(&(Float::with_val(256, 1) / fact));
        let d = scaled.dist(&BigComplex::from_real(c[p].clone())).to_f64();
        assert!(d < 1e-10, "p={p} {d:e}");
    }
}

#[test]
fn radius_of_convergence_matches_ratio_limit() {
    for (theory, n, skip, k, tol) in [
        (TheorySpec::hermitian_quartic(), 60, 10, 6, 1e-6),
        (TheorySpec::pt_cubic(), 60, 10, 6, 1e-8),
    ] {
        let g = greens(&theory, n, 512);
        let numeric = growth_rate_richardson(theory.parity_symmetric, &g, skip, k).unwrap();
        let analytic = growth_rate_analytic(&theory, 256).unwrap();
        assert!((numeric.r - analytic.r).abs() < tol, "{}: {} vs {}", theory.name, numeric.r, analytic.r);
    }
}

#[test]
fn pt_quartic_growth_law_phase() {
    let theory = TheorySpec::pt_quartic();
    let g = greens(&theory, 40, 512);
    let rate = growth_rate_richardson(false, &g, 10, 6).unwrap();
    let model = GrowthModel::for_theory(&theory, Float::with_val(256, rate.r)).unwrap();
    let ratio = (&g[40] / &model.value(40, 512).unwrap()).to_c64();
    assert!((ratio - 1.0).norm() < 0.1, "{ratio}");
}
