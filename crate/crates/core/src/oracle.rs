//! Exact Green's functions from contour integrals of `e^{−(λ/m)φ^m}`.
//!
//! A contour runs in from infinity along one ray and out along another;
//! each ray `φ = t e^{iθ}` must lie where `Re[(λ/m) e^{imθ}] > 0`.

use std::f64::consts::PI;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp::{pi, BigComplex};
use crate::quadrature::ExpSinh;
use crate::tower::TheorySpec;

/// Smallest admissible `Re[e^{i(arg λ + mθ)}]` for a ray.
const SECTOR_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContourSpec {
    pub in_angle: f64,
    pub out_angle: f64,
}

impl ContourSpec {
    pub fn new(in_angle: f64, out_angle: f64) -> Self {
        Self { in_angle, out_angle }
    }

    pub fn default_for(theory: &TheorySpec) -> Result<Self> {
        theory
            .sector_pair
            .map(|(a, b)| Self::new(a, b))
            .ok_or_else(|| Error::ContractViolation(format!("{} has no default contour", theory.name)))
    }

    /// Named sector pairs of the built-in theories.
    pub fn named(theory: &TheorySpec, name: &str) -> Result<Self> {
        let c = match (theory.name.as_str(), name) {
            (_, "default") => return Self::default_for(theory),
            ("pt_quintic", "pt1") => Self::new(9.0 * PI / 10.0, PI / 10.0),
            ("pt_quintic", "pt2") => Self::new(13.0 * PI / 10.0, 17.0 * PI / 10.0),
            ("hermitian_sextic" | "hermitian_sextic_full", "rot_plus") => {
                Self::new(4.0 * PI / 3.0, PI / 3.0)
            }
            ("hermitian_sextic" | "hermitian_sextic_full", "rot_minus") => {
                Self::new(2.0 * PI / 3.0, -PI / 3.0)
            }
            (_, "real" | "pt") => return Self::default_for(theory),
            _ => {
                return Err(Error::ContractViolation(format!(
                    "unknown sector pair '{name}' for {}",
                    theory.name
                )))
            }
        };
        Ok(c)
    }

    /// `Re[e^{i(arg λ + mθ)}]` for a ray angle.
    pub fn decay(theory: &TheorySpec, theta: f64) -> f64 {
        let lam = theory.lambda.to_c64();
        (lam.arg() + theory.m as f64 * theta).cos()
    }

    pub fn validate(&self, theory: &TheorySpec) -> Result<()> {
        for angle in [self.in_angle, self.out_angle] {
            if Self::decay(theory, angle) <= SECTOR_MARGIN {
                return Err(Error::DivergentContour { angle });
            }
        }
        Ok(())
    }

    /// Rotates both rays by `delta` radians.
    pub fn rotated(&self, delta: f64) -> Self {
        Self::new(self.in_angle + delta, self.out_angle + delta)
    }
}

/// Centres of the Stokes sectors, in `(−π, π]`.
pub fn sector_centres(theory: &TheorySpec) -> Vec<f64> {
    let arg = theory.lambda.to_c64().arg();
    let m = theory.m as f64;
    let mut out: Vec<f64> = (0..theory.m)
        .map(|k| {
            let mut t = (2.0 * PI * k as f64 - arg) / m;
            while t > PI {
                t -= 2.0 * PI;
            }
            while t <= -PI {
                t += 2.0 * PI;
            }
            t
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Clone, Debug)]
pub struct MomentTable {
    pub theory: String,
    pub contour: ContourSpec,
    /// `γ_p/Z` for `p = 0..=P`.
    pub values: Vec<BigComplex>,
    /// Relative quadrature error estimate per moment.
    pub errors: Vec<f64>,
}

fn coupling(theory: &TheorySpec, theta: f64, prec: u32) -> BigComplex {
    let m = theory.m;
    let lam = theory.lambda.to_big(prec);
    let phase = BigComplex::expi(prec, &(Float::with_val(prec, theta) * m));
    (&lam * &phase).scale(&Float::with_val(prec, Rational::from((1, m))))
}

/// Ray integrals `∫₀^∞ φ^p e^{−(λ/m)φ^m} dφ` along `φ = t e^{iθ}`, `p = 0..=P`.
fn ray_integrals(theory: &TheorySpec, theta: f64, pmax: usize, prec: u32) -> Result<(Vec<BigComplex>, f64)> {
    let a = coupling(theory, theta, prec);
    if a.re <= 0 {
        return Err(Error::DivergentContour { angle: theta });
    }
    let m = theory.m;
    let q = ExpSinh::new(prec);
    let res = q.integrate(pmax + 1, |t| {
        let tm = t.clone().pow(m);
        let re = Float::with_val(prec, &a.re * &tm);
        let im = Float::with_val(prec, &a.im * &tm);
        let mag = Float::with_val(prec, -re).exp();
        let (s, c) = Float::with_val(prec, -im).sin_cos(Float::new(prec));
        let mut cur = BigComplex::new(c * &mag, s * &mag);
        let mut out = Vec::with_capacity(pmax + 1);
        for _ in 0..=pmax {
            out.push(cur.clone());
            cur = cur.scale(t);
        }
        out
    })?;
    let th = Float::with_val(prec, theta);
    let mut vals = Vec::with_capacity(pmax + 1);
    for (p, v) in res.values.into_iter().enumerate() {
        let ph = BigComplex::expi(prec, &Float::with_val(prec, &th * (p as u32 + 1)));
        vals.push(&v * &ph);
    }
    Ok((vals, res.error_estimate))
}

/// Normalized moments `γ_p/Z` by quadrature along the contour.
pub fn moment_table(theory: &TheorySpec, contour: &ContourSpec, pmax: usize, prec: u32) -> Result<MomentTable> {
    contour.validate(theory)?;
    let (rin, rout) = rayon::join(
        || ray_integrals(theory, contour.in_angle, pmax, prec),
        || ray_integrals(theory, contour.out_angle, pmax, prec),
    );
    let ((vin, ein), (vout, eout)) = (rin?, rout?);
    let raw: Vec<BigComplex> = vout.iter().zip(vin.iter()).map(|(o, i)| o - i).collect();
    let z = raw[0].clone();
    if z.is_zero() {
        return Err(Error::Quadrature("partition function vanishes on this contour".into()));
    }
    let values: Vec<BigComplex> = raw.iter().map(|r| r / &z).collect();
    let errors = vec![ein.max(eout); pmax + 1];
    let mut values = values;
    values[0] = BigComplex::one(prec);
    Ok(MomentTable {
        theory: theory.name.clone(),
        contour: *contour,
        values,
        errors,
    })
}

/// Single normalized moment `γ_p/Z`.
pub fn moment(theory: &TheorySpec, contour: &ContourSpec, p: usize, prec: u32) -> Result<BigComplex> {
    Ok(moment_table(theory, contour, p, prec)?.values.swap_remove(p))
}

/// Cumulants `G_1..G_N` from normalized moments (entry 0 of the result is zero).
pub fn moments_to_connected(moments: &[BigComplex], n: usize) -> Result<Vec<BigComplex>> {
    if moments.len() <= n {
        return Err(Error::ContractViolation(format!(
            "moment table covers p ≤ {}, need {n}",
            moments.len().saturating_sub(1)
        )));
    }
    let prec = moments.iter().map(BigComplex::prec).max().unwrap_or(128);
    let mut g = vec![BigComplex::zero(prec); n + 1];
    for k in 1..=n {
        let mut acc = moments[k].clone();
        let mut c = Integer::from(1); // C(k−1, j−1)
        for j in 1..k {
            let term = (&g[j] * &moments[k - j]).scale(&Float::with_val(prec, &c));
            acc -= &term;
            c *= k - j;
            c /= j;
        }
        g[k] = acc;
    }
    Ok(g)
}

/// Inverse of [`moments_to_connected`]: `γ_n = Σ_k C(n−1,k−1) G_k γ_{n−k}`.
pub fn connected_to_moments(greens: &[BigComplex]) -> Vec<BigComplex> {
    let prec = greens.iter().map(BigComplex::prec).max().unwrap_or(128);
    let n = greens.len().saturating_sub(1);
    let mut m = vec![BigComplex::one(prec)];
    for k in 1..=n {
        let mut acc = BigComplex::zero(prec);
        let mut c = Integer::from(1);
        for j in 1..=k {
            acc += &(&greens[j] * &m[k - j]).scale(&Float::with_val(prec, &c));
            if j < k {
                c *= k - j;
                c /= j;
            }
        }
        m.push(acc);
    }
    m
}

/// Exact connected Green's functions `G_0..G_N` (entry 0 zero) with the
/// quadrature error estimate.
pub fn exact_greens(theory: &TheorySpec, contour: &ContourSpec, n: usize, prec: u32) -> Result<(Vec<BigComplex>, f64)> {
    let table = moment_table(theory, contour, n, prec)?;
    let err = table.errors.iter().cloned().fold(0.0, f64::max);
    Ok((moments_to_connected(&table.values, n)?, err))
}

/// Working precision adequate for cumulants up to `n`.
pub fn precision_for_order(n: usize) -> u32 {
    if n > 20 {
        512
    } else {
        256
    }
}

/// Ray integral in closed form: `e^{i(p+1)θ} Γ((p+1)/m) / (m a^{(p+1)/m})`
/// with `a = (λ/m)e^{imθ}` and the principal branch.
pub fn closed_form_ray(theory: &TheorySpec, theta: f64, p: usize, prec: u32) -> Result<BigComplex> {
    let a = coupling(theory, theta, prec);
    if a.re <= 0 {
        return Err(Error::DivergentContour { angle: theta });
    }
    let m = theory.m;
    let s = Float::with_val(prec, Rational::from((p as u32 + 1, m)));
    let g = Float::with_val(prec, s.gamma_ref());
    let denom = a.powf(&s).scale_f64(m as f64);
    let ph = BigComplex::expi(prec, &(Float::with_val(prec, theta) * (p as u32 + 1)));
    Ok(&ph.scale(&g) / &denom)
}

/// Normalized moments from the closed-form ray integrals.
pub fn closed_form_moments(theory: &TheorySpec, contour: &ContourSpec, pmax: usize, prec: u32) -> Result<Vec<BigComplex>> {
    contour.validate(theory)?;
    let mut raw = Vec::with_capacity(pmax + 1);
    for p in 0..=pmax {
        let o = closed_form_ray(theory, contour.out_angle, p, prec)?;
        let i = closed_form_ray(theory, contour.in_angle, p, prec)?;
        raw.push(&o - &i);
    }
    let z = raw[0].clone();
    Ok(raw.iter().map(|r| r / &z).collect())
}

#[derive(Clone, Debug)]
pub struct ReferenceValue {
    /// Green's index the constant refers to.
    pub index: u32,
    pub value: BigComplex,
    /// Always `gamma`: the value is built from closed-form ray integrals.
    pub source: &'static str,
}

fn third(prec: u32, num: u32) -> Float {
    Float::with_val(prec, Rational::from((num, 3)))
}

/// Reference constant for a built-in theory and sector pair.
pub fn closed_form_reference(theory: &TheorySpec, pair: &str, prec: u32) -> Result<ReferenceValue> {
    let gamma = |x: Rational| Float::with_val(prec, x).gamma();
    let reference = |index, value, source| Ok(ReferenceValue { index, value, source });
    match (theory.name.as_str(), pair) {
        ("hermitian_quartic", "default" | "real") => {
            let v = gamma(Rational::from((3, 4))) * 2u32 / gamma(Rational::from((1, 4)));
            reference(2, BigComplex::from_real(v), "gamma")
        }
        ("pt_cubic", "default" | "pt") => {
            let c = Float::with_val(prec, 3).pow(third(prec, 1));
            let v = c * gamma(Rational::from((2, 3))) / gamma(Rational::from((1, 3)));
            reference(1, BigComplex::new(Float::new(prec), -v), "gamma")
        }
        ("pt_quartic", "default" | "pt") => {
            let v = pi(prec).sqrt() * 2u32 / gamma(Rational::from((1, 4)));
            reference(1, BigComplex::new(Float::new(prec), -v), "gamma")
        }
        ("pt_quintic", p @ ("default" | "pt1" | "pt2")) => {
            // no single Gamma ratio; difference of the two closed-form rays
            let contour = ContourSpec::named(theory, p)?;
            let m = closed_form_moments(theory, &contour, 1, prec)?;
            reference(1, m[1].clone(), "gamma")
        }
        ("hermitian_sextic" | "hermitian_sextic_full", p @ ("default" | "real" | "rot_plus" | "rot_minus")) => {
            let six = Float::with_val(prec, 6).pow(third(prec, 1));
            let v = six * pi(prec).sqrt() / gamma(Rational::from((1, 6)));
            let base = BigComplex::from_real(v);
            let turn = match p {
                "rot_plus" => 2.0,
                "rot_minus" => -2.0,
                _ => 0.0,
            };
            let rot = BigComplex::expi(prec, &(pi(prec) * turn / 3u32));
            reference(2, &base * &rot, "gamma")
        }
        _ => Err(Error::ContractViolation(format!(
            "no reference constant for {} on sector pair '{pair}'",
            theory.name
        ))),
    }
}

/// Named pairs with reference constants, per theory.
pub fn reference_pairs(theory: &TheorySpec) -> &'static [&'static str] {
    match theory.name.as_str() {
        "hermitian_quartic" => &["real"],
        "pt_cubic" | "pt_quartic" => &["pt"],
        "pt_quintic" => &["pt1", "pt2"],
        "hermitian_sextic" | "hermitian_sextic_full" => &["real", "rot_plus", "rot_minus"],
        _ => &[],
    }
}

/// Asymptotic magnitude of the quartic moments, `2ⁿΓ(n/2+¼)/Γ(¼)` for `γ_{2n}`.
pub fn quartic_moment_law(n: u32, prec: u32) -> Float {
    let num = Float::with_val(prec, Rational::from((2 * n + 1, 4))).gamma();
    let den = Float::with_val(prec, 0.25).gamma();
    Float::with_val(prec, Float::i_exp(1, n as i32)) * num / den
}
