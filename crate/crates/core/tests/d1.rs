use dse_core::d1::{d1_leading_mass, residuals, D1Theory, HERMITIAN_GAP, PT_GAP};

#[test]
fn leading_masses_and_errors() {
    let h = d1_leading_mass(D1Theory::Hermitian);
    assert!((h.mass - 1.1447).abs() < 5e-5);
    assert!((h.percent_error - 100.0 * (h.mass - HERMITIAN_GAP) / HERMITIAN_GAP).abs() < 1e-12);
    assert_eq!(h.g1_im, 0.0);

    let p = d1_leading_mass(D1Theory::Pt);
    assert!((p.mass - 1.4422).abs() < 5e-5);
    assert!((p.percent_error + 19.7).abs() < 0.1);
    assert!(p.g1_im < 0.0);
    assert_eq!(p.reference_gap, PT_GAP);
}

#[test]
fn solutions_satisfy_their_equations() {
    for t in [D1Theory::Hermitian, D1Theory::Pt] {
        let r = d1_leading_mass(t);
        assert!(r.residual < 1e-14);
        let off = residuals(t, r.mass * 1.01, r.g1(), r.g2_at_zero);
        assert!(off.iter().any(|&x| x > 1e-3));
    }
}

#[test]
fn names_parse() {
    assert_eq!("pt".parse::<D1Theory>().unwrap(), D1Theory::Pt);
    assert_eq!(D1Theory::Hermitian.to_string(), "hermitian");
    assert!("cubic".parse::<D1Theory>().is_err());
}
