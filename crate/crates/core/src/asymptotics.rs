//! Factorial growth of the Green's functions: models, Richardson
//! extrapolation of ratio statistics, and growth rates from the zeros of
//! linearized generating functions.

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp::{pi, BigComplex};
use crate::ode;
use crate::quadrature::ExpSinh;
use crate::tower::TheorySpec;

/// `G_k ≈ C·(k−1)!·r^k·ω^k`, with odd `k` vanishing for parity theories.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthModel {
    pub theory: String,
    pub amplitude: BigComplex,
    pub rate: Float,
    /// Unit phase `ω` raised to the Green's index.
    pub phase: BigComplex,
    pub parity: bool,
}

impl GrowthModel {
    /// The leading law for a built-in theory with the given rate.
    pub fn for_theory(theory: &TheorySpec, rate: Float) -> Result<Self> {
        let prec = rate.prec();
        let (c, w) = match theory.name.as_str() {
            "hermitian_quartic" => (BigComplex::from_f64(prec, -2.0, 0.0), BigComplex::i(prec)),
            "pt_cubic" => (BigComplex::from_f64(prec, -1.0, 0.0), -BigComplex::i(prec)),
            "pt_quartic" => (BigComplex::from_f64(prec, -1.0, 0.0), -BigComplex::i(prec)),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no growth law is known for {other}"
                )))
            }
        };
        Ok(Self {
            theory: theory.name.clone(),
            amplitude: c,
            rate,
            phase: w,
            parity: theory.parity_symmetric,
        })
    }

    /// Model value at `prec` bits.
    pub fn value(&self, k: u32, prec: u32) -> Result<BigComplex> {
        if k == 0 {
            return Err(Error::InvalidArgument("Green's indices start at 1".into()));
        }
        if self.parity && k % 2 == 1 {
            return Ok(BigComplex::zero(prec));
        }
        let fact = Float::with_val(prec, Float::factorial(k - 1));
        let rk = Float::with_val(prec, self.rate.clone().pow(k));
        let mag = fact * rk;
        let v = self.amplitude.with_prec(prec).scale(&mag) * self.phase.with_prec(prec).powu(k);
        if !v.is_finite() {
            return Err(Error::Overflow(format!(
                "growth model overflows at G{k}; use log_value"
            )));
        }
        Ok(v)
    }

    /// `(ln|G_k|, arg G_k)` without forming the value.
    pub fn log_value(&self, k: u32) -> Result<(f64, f64)> {
        if k == 0 || (self.parity && k % 2 == 1) {
            return Err(Error::InvalidArgument(format!("model vanishes at G{k}")));
        }
        let prec = 128;
        let lg = Float::with_val(prec, k).ln_gamma();
        let lr = Float::with_val(prec, self.rate.ln_ref()) * k;
        let la = self.amplitude.abs().ln();
        let arg = self.amplitude.arg() + self.phase.arg() * k;
        let two_pi = pi(prec) * 2u32;
        let arg = Float::with_val(prec, arg.remainder_ref(&two_pi));
        Ok(((lg + lr + la).to_f64(), arg.to_f64()))
    }

    /// Replaces the amplitude by the mean ratio `G_k / model(k)` over the two
    /// largest nonvanishing indices in `greens` (entry 0 unused).
    pub fn fit_amplitude(&self, greens: &[BigComplex]) -> Result<Self> {
        let prec = greens.iter().map(BigComplex::prec).max().unwrap_or(self.rate.prec());
        let ks: Vec<u32> = (1..greens.len() as u32)
            .rev()
            .filter(|&k| !(self.parity && k % 2 == 1))
            .take(2)
            .collect();
        if ks.len() < 2 {
            return Err(Error::InvalidArgument(
                "amplitude fit needs two nonvanishing orders".into(),
            ));
        }
        let unit = Self {
            amplitude: BigComplex::one(prec),
            ..self.clone()
        };
        let mut sum = BigComplex::zero(prec);
        for &k in &ks {
            sum += &(&greens[k as usize] / &unit.value(k, prec)?);
        }
        Ok(Self {
            amplitude: sum.scale_f64(0.5),
            ..self.clone()
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtrapolationReport {
    pub order: usize,
    /// Index `n` of the first sequence element.
    pub first_n: u32,
    pub len: usize,
    pub limit: f64,
    pub limit_digits: String,
    /// Estimates at Richardson orders `1..=order`, each using the last terms.
    pub estimates: Vec<f64>,
    pub differences: Vec<f64>,
    pub uncertainty: f64,
    #[serde(skip)]
    pub limit_big: Float,
}

fn richardson_at(values: &[Float], first_n: u32, k: usize) -> Float {
    let prec = values.iter().map(Float::prec).max().unwrap_or(128);
    let last = values.len() - 1;
    let start = last - k;
    let big_n = first_n as usize + start;
    let mut acc = Float::new(prec);
    let mut jf = Float::with_val(prec, 1); // j!
    let kfact = Float::with_val(prec, Float::factorial(k as u32));
    let mut kmj = kfact.clone(); // (k−j)!
    for j in 0..=k {
        if j > 0 {
            jf *= j as u32;
            kmj /= (k - j + 1) as u32;
        }
        let nk = Float::with_val(prec, (big_n + j) as u32).pow(k as u32);
        let mut term = Float::with_val(prec, &values[start + j] * &nk);
        term /= &jf;
        term /= &kmj;
        if (j + k) % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
    }
    acc
}

/// `k`-th order Richardson limit of `s_n ≈ L + a₁/n + a₂/n² + …`, where
/// `values[i] = s_{first_n + i}`, using the final `k + 1` terms.
pub fn richardson(values: &[Float], first_n: u32, k: usize) -> Result<ExtrapolationReport> {
    if k == 0 || values.len() <= k {
        return Err(Error::ContractViolation(format!(
            "Richardson order {k} needs more than {k} terms, got {}",
            values.len()
        )));
    }
    if first_n == 0 {
        return Err(Error::ContractViolation("sequence index starts at 1".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::ContractViolation("non-finite sequence element".into()));
    }
    let ests: Vec<Float> = (1..=k).map(|i| richardson_at(values, first_n, i)).collect();
    let limit_big = ests.last().expect("k ≥ 1").clone();
    let differences: Vec<f64> = ests
        .windows(2)
        .map(|w| Float::with_val(w[1].prec(), &w[1] - &w[0]).to_f64())
        .collect();
    let uncertainty = match differences.last() {
        Some(d) => d.abs(),
        None => Float::with_val(limit_big.prec(), &limit_big - values.last().unwrap())
            .to_f64()
            .abs(),
    };
    Ok(ExtrapolationReport {
        order: k,
        first_n,
        len: values.len(),
        limit: limit_big.to_f64(),
        limit_digits: limit_big.to_string_radix(10, Some(30)),
        estimates: ests.iter().map(Float::to_f64).collect(),
        differences,
        uncertainty,
        limit_big,
    })
}

/// Ratio statistic converging to `r` (or `r²` for parity theories, flagged
/// by the returned boolean). Returns `(first_n, values, squared)`.
pub fn ratio_sequence(parity: bool, greens: &[BigComplex]) -> (u32, Vec<Float>, bool) {
    let prec = greens.iter().map(BigComplex::prec).max().unwrap_or(128);
    let max = greens.len().saturating_sub(1);
    let mut out = Vec::new();
    if parity {
        let mut n = 1;
        while 2 * n + 2 <= max {
            let num = greens[2 * n + 2].abs();
            let den = greens[2 * n].abs() * ((2 * n + 1) * 2 * n) as u32;
            out.push(Float::with_val(prec, num / den));
            n += 1;
        }
    } else {
        for n in 1..max {
            let num = greens[n + 1].abs();
            let den = greens[n].abs() * n as u32;
            out.push(Float::with_val(prec, num / den));
        }
    }
    (1, out, parity)
}

#[derive(Clone, Debug, Serialize)]
pub struct RichardsonRate {
    pub r: f64,
    pub uncertainty: f64,
    pub squared_statistic: bool,
    pub report: ExtrapolationReport,
}

/// Growth rate from exact Green's functions (entry 0 unused), discarding the
/// first `skip` ratio terms before extrapolating at order `k`.
pub fn growth_rate_richardson(
    parity: bool,
    greens: &[BigComplex],
    skip: usize,
    k: usize,
) -> Result<RichardsonRate> {
    let (first, vals, squared) = ratio_sequence(parity, greens);
    if vals.len() <= skip {
        return Err(Error::ContractViolation("ratio sequence too short".into()));
    }
    let report = richardson(&vals[skip..], first + skip as u32, k)?;
    let (r, unc) = if squared {
        let r = report.limit_big.clone().sqrt();
        let r64 = r.to_f64();
        (r64, report.uncertainty / (2.0 * r64))
    } else {
        (report.limit, report.uncertainty)
    };
    Ok(RichardsonRate {
        r,
        uncertainty: unc,
        squared_statistic: squared,
        report,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticRate {
    pub x0: f64,
    pub r: f64,
    pub method: String,
    /// `1/x₀` after Newton refinement at full working precision.
    #[serde(skip)]
    pub r_big: Float,
}

/// `y(x) = (2√2/Γ(¼)) ∫₀^∞ cos(xt) e^{−t⁴/4} dt`, normalized to `y(0) = 1`.
pub fn quartic_linearized(x: f64, prec: u32) -> Result<f64> {
    let q = ExpSinh::new(prec);
    let xf = Float::with_val(prec, x);
    let r = q.integrate(1, |t| {
        let t4 = Float::with_val(prec, t.square_ref()).square();
        let e = Float::with_val(prec, -t4 / 4u32).exp();
        let c = Float::with_val(prec, &xf * t).cos();
        vec![BigComplex::from_real(c * e)]
    })?;
    let norm = Float::with_val(prec, 8u32).sqrt() / Float::with_val(prec, 0.25).gamma();
    Ok((r.values[0].re.clone() * norm).to_f64())
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, step: f64, tol: f64) -> Result<f64> {
    let mut a = lo;
    let mut fa = f(a)?;
    let mut trace = vec![format!("{a:.3}:{fa:.3e}")];
    let mut b = a + step;
    while b <= hi {
        let fb = f(b)?;
        trace.push(format!("{b:.3}:{fb:.3e}"));
        if fa.signum() != fb.signum() {
            let (mut l, mut h, mut fl) = (a, b, fa);
            while h - l > tol {
                let mid = 0.5 * (l + h);
                let fm = f(mid)?;
                if fm == 0.0 {
                    return Ok(mid);
                }
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    h = mid;
                }
            }
            return Ok(0.5 * (l + h));
        }
        a = b;
        fa = fb;
        b += step;
    }
    Err(Error::Bracketing(format!(
        "no sign change on [{lo}, {hi}]; scan {}",
        trace.join(" ")
    )))
}

/// Exact `G_2` of the quartic theory, `2Γ(¾)/Γ(¼)`.
pub fn quartic_exact_g2(prec: u32) -> Float {
    let a = Float::with_val(prec, 0.75).gamma();
    let b = Float::with_val(prec, 0.25).gamma();
    a * 2u32 / b
}

/// First positive zero of the quartic cosine transform, by bisection of the
/// quadrature.
pub fn quartic_zero_quadrature(prec: u32) -> Result<f64> {
    bisect(|x| quartic_linearized(x, prec), 0.0, 6.0, 0.25, 1e-13)
}

/// The same zero from `y''' = x y`, `y(0) = 1`, `y'(0) = 0`, `y''(0) = −G_2`.
pub fn quartic_zero_ode() -> Result<f64> {
    let g2 = quartic_exact_g2(128).to_f64();
    ode::first_zero(
        |x, y, d| {
            d[0] = y[1];
            d[1] = y[2];
            d[2] = x * y[0];
        },
        0.0,
        &[1.0, 0.0, -g2],
        6.0,
        0,
        1e-14,
    )
}

/// Initial data `(Ai(0), −Ai'(0))` for `u(x) = Ai(−x)`.
pub fn airy_initial(prec: u32) -> (Float, Float) {
    let three = Float::with_val(prec, 3);
    let a0 = Float::with_val(prec, 1)
        / (three.clone().pow(Float::with_val(prec, Rational::from((2, 3))))
            * Float::with_val(prec, Rational::from((2, 3))).gamma());
    let a1 = Float::with_val(prec, 1)
        / (three.clone().pow(Float::with_val(prec, Rational::from((1, 3))))
            * Float::with_val(prec, Rational::from((1, 3))).gamma());
    (a0, a1)
}

/// First zero of `u'' = −x u` with Airy initial data, i.e. of `Ai(−x)`.
pub fn airy_zero_ode() -> Result<f64> {
    let (a0, a1) = airy_initial(128);
    ode::first_zero(
        |x, y, d| {
            d[0] = y[1];
            d[1] = -x * y[0];
        },
        0.0,
        &[a0.to_f64(), a1.to_f64()],
        5.0,
        0,
        1e-14,
    )
}

/// Taylor coefficients `c_0..c_n` of `−x u'(x)/u(x)` with `u(x) = Ai(−x)`.
pub fn cubic_generating_series(n: usize, prec: u32) -> Vec<Float> {
    let (a0, a1) = airy_initial(prec);
    let mut a = vec![Float::new(prec); n + 3];
    a[0] = a0;
    a[1] = a1;
    for k in 0..=n {
        // (k+2)(k+1) a_{k+2} = −a_{k−1}
        a[k + 2] = if k >= 1 {
            Float::with_val(prec, -&a[k - 1]) / ((k + 2) * (k + 1)) as u32
        } else {
            Float::new(prec)
        };
    }
    // numerator −x u'(x): coefficient of x^j is −j a_j
    let num: Vec<Float> = (0..=n).map(|j| Float::with_val(prec, &a[j] * j as u32) * -1i32).collect();
    let mut q = vec![Float::new(prec); n + 1];
    for j in 0..=n {
        let mut s = num[j].clone();
        for i in 0..j {
            s -= Float::with_val(prec, &q[i] * &a[j - i]);
        }
        q[j] = s / &a[0];
    }
    q
}

/// `(y(x), y'(x))` of the normalized quartic cosine transform.
fn quartic_transform_pair(x: &Float, prec: u32) -> Result<(Float, Float)> {
    let q = ExpSinh::new(prec);
    let r = q.integrate(2, |t| {
        let t4 = Float::with_val(prec, t.square_ref()).square();
        let e = Float::with_val(prec, -t4 / 4u32).exp();
        let xt = Float::with_val(prec, x * t);
        // shifted by the normalization so the component stays away from zero
        let c = (Float::with_val(prec, xt.cos_ref()) + 1u32) * &e;
        let s = -(Float::with_val(prec, xt.sin_ref()) * t * e);
        vec![BigComplex::from_real(c), BigComplex::from_real(s)]
    })?;
    let norm = Float::with_val(prec, 8u32).sqrt() / Float::with_val(prec, 0.25).gamma();
    Ok((r.values[0].re.clone() * &norm - 1u32, r.values[1].re.clone() * norm))
}

/// `(Ai(−x), d/dx Ai(−x))` from the Maclaurin series.
fn airy_pair(x: &Float, prec: u32) -> (Float, Float) {
    let (a0, a1) = airy_initial(prec);
    let mut a = vec![a0, a1, Float::new(prec)];
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) - 4));
    let mut u = Float::new(prec);
    let mut du = Float::new(prec);
    let mut xk = Float::with_val(prec, 1);
    let mut k = 0usize;
    let mut small = 0;
    loop {
        if k >= 3 {
            let next = Float::with_val(prec, -&a[k - 3]) / (k * (k - 1)) as u32;
            a.push(next);
        }
        let term = Float::with_val(prec, &a[k] * &xk);
        if k >= 1 {
            du += Float::with_val(prec, &term * k as u32) / x;
        }
        u += &term;
        if term.clone().abs() < eps {
            small += 1;
            if k > 8 && small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        xk *= x;
        k += 1;
    }
    (u, du)
}

fn newton_refine(mut x: Float, f: impl Fn(&Float) -> Result<(Float, Float)>) -> Result<Float> {
    let prec = x.prec();
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
    for _ in 0..60 {
        let (y, dy) = f(&x)?;
        let step = y / dy;
        x -= &step;
        if step.abs() < tol {
            break;
        }
    }
    Ok(x)
}

/// Growth rate from the linearized generating function.
pub fn growth_rate_analytic(theory: &TheorySpec, prec: u32) -> Result<AnalyticRate> {
    let (x0, method) = match theory.name.as_str() {
        "hermitian_quartic" => (quartic_zero_quadrature(prec)?, "cosine-transform quadrature"),
        "pt_cubic" => (airy_zero_ode()?, "Airy initial-value problem"),
        other => {
            return Err(Error::InvalidArgument(format!(
                "no linearized generating function for {other}"
            )))
        }
    };
    let start = Float::with_val(prec, x0);
    let x_big = if theory.name == "pt_cubic" {
        newton_refine(start, |x| Ok(airy_pair(x, prec)))?
    } else {
        newton_refine(start, |x| quartic_transform_pair(x, prec))?
    };
    let r_big = Float::with_val(prec, x_big.recip_ref());
    Ok(AnalyticRate {
        x0,
        r: r_big.to_f64(),
        method: method.into(),
        r_big,
    })
}

/// Growth model used by the asymptotic closure: the analytic rate where a
/// linearization exists, otherwise Richardson on oracle values.
pub fn closure_model(theory: &TheorySpec, prec: u32) -> Result<GrowthModel> {
    let rate = match theory.name.as_str() {
        "hermitian_quartic" | "pt_cubic" => growth_rate_analytic(theory, prec)?.r_big,
        "pt_quartic" => {
            let contour = crate::oracle::ContourSpec::default_for(theory)?;
            let (g, _) = crate::oracle::exact_greens(theory, &contour, 60, prec.max(512))?;
            Float::with_val(prec, growth_rate_richardson(false, &g, 10, 6)?.r)
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "no growth law is known for {other}"
            )))
        }
    };
    GrowthModel::for_theory(theory, rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(f: impl Fn(f64) -> f64, range: std::ops::RangeInclusive<u32>) -> Vec<Float> {
        range.map(|n| Float::with_val(256, f(n as f64))).collect()
    }

    #[test]
    fn richardson_kills_inverse_powers() {
        let r = richardson(&seq(|n| 1.0 + 1.0 / n, 1..=6), 1, 1).unwrap();
        assert!((r.limit - 1.0).abs() < 1e-14);
        let s: Vec<Float> = (1..=20u32)
            .map(|n| {
                let nf = Float::with_val(256, n);
                Float::with_val(256, 2) + Float::with_val(256, 3) / &nf
                    - Float::with_val(256, 5) / Float::with_val(256, nf.square_ref())
            })
            .collect();
        let r = richardson(&s, 1, 2).unwrap();
        assert!((r.limit - 2.0).abs() < 1e-60, "{}", r.limit);
    }

    #[test]
    fn richardson_rejects_short_input() {
        assert!(richardson(&seq(|n| n, 1..=2), 1, 2).is_err());
        assert!(richardson(&seq(|n| n, 1..=2), 1, 0).is_err());
    }

    #[test]
    fn quartic_model_sign_pattern() {
        let m = GrowthModel::for_theory(&TheorySpec::hermitian_quartic(), Float::with_val(128, 0.4095057)).unwrap();
        for n in 2..8u32 {
            let v = m.value(2 * n, 128).unwrap();
            assert!(v.im.is_zero());
            let want = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert_eq!(v.re.to_f64().signum(), want);
        }
        assert!(m.value(7, 128).unwrap().is_zero());
    }

    #[test]
    fn cubic_model_phase() {
        let m = GrowthModel::for_theory(&TheorySpec::pt_cubic(), Float::with_val(128, 0.4277)).unwrap();
        let v14 = m.value(14, 128).unwrap();
        let v15 = m.value(15, 128).unwrap();
        assert!(v14.im.is_zero() && v14.re > 0);
        assert!(v15.re.is_zero() && v15.im < 0);
    }

    #[test]
    fn log_form_matches_direct() {
        let m = GrowthModel::for_theory(&TheorySpec::pt_quartic(), Float::with_val(128, 0.3464)).unwrap();
        let v = m.value(9, 128).unwrap();
        let (lm, ph) = m.log_value(9).unwrap();
        assert!((v.abs().ln().to_f64() - lm).abs() < 1e-12);
        let z = num_complex::Complex64::from_polar(1.0, ph);
        let w = v.to_c64() / v.to_c64().norm();
        assert!((z - w).norm() < 1e-12);
    }

    #[test]
    fn airy_initial_values() {
        let (a0, a1) = airy_initial(128);
        assert!((a0.to_f64() - 0.355_028_053_887_817_2).abs() < 1e-15);
        assert!((a1.to_f64() - 0.258_819_403_792_806_8).abs() < 1e-15);
    }

    #[test]
    fn quartic_transform_normalized() {
        assert!((quartic_linearized(0.0, 128).unwrap() - 1.0).abs() < 1e-14);
    }
}
