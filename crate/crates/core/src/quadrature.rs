//! Double-exponential quadrature on `[0, ∞)` in multiprecision.
//!
//! The substitution `t = exp(π/2 · sinh u)` turns integrands that decay
//! faster than any power into sums converging like `exp(−c/h)` in the step.

use rug::Float;

use crate::error::{Error, Result};
use crate::mp::{pi, BigComplex};

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub values: Vec<BigComplex>,
    /// Largest change between the final two refinement levels, relative to
    /// the magnitude of each component.
    pub error_estimate: f64,
    pub levels: u32,
}

#[derive(Clone, Debug)]
pub struct ExpSinh {
    pub prec: u32,
    pub max_level: u32,
    /// Relative agreement required between successive levels.
    pub tol: f64,
}

impl ExpSinh {
    pub fn new(prec: u32) -> Self {
        let bits = prec.saturating_sub(24).max(40) as f64;
        Self {
            prec,
            max_level: 12,
            tol: 2f64.powf(-bits).max(1e-300),
        }
    }

    /// Integrates a vector-valued integrand over `[0, ∞)`. The integrand
    /// receives `t` and returns one value per component.
    pub fn integrate<F>(&self, dim: usize, f: F) -> Result<QuadratureResult>
    where
        F: Fn(&Float) -> Vec<BigComplex>,
    {
        let prec = self.prec;
        let half_pi = pi(prec) / 2u32;
        let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) - 8));
        let mut sums = vec![BigComplex::zero(prec); dim];

        // Adds all nodes u = (k + offset)·h for k over both half-lines.
        let sweep = |h: &Float, odd_only: bool, sums: &mut Vec<BigComplex>| -> Result<()> {
            for dir in [1i64, -1] {
                let mut k: i64 = if odd_only { 1 } else if dir == 1 { 0 } else { 1 };
                let mut small_run = 0;
                let mut prev_mag = Float::with_val(prec, 0);
                loop {
                    let u = Float::with_val(prec, h * (dir * k));
                    let sh = Float::with_val(prec, u.sinh_ref());
                    let ch = Float::with_val(prec, u.cosh_ref());
                    let t = Float::with_val(prec, &half_pi * &sh).exp();
                    if t.is_zero() || !t.is_finite() {
                        if dir == 1 && !t.is_finite() {
                            return Err(Error::Quadrature(
                                "abscissa overflow before integrand decayed".into(),
                            ));
                        }
                        break;
                    }
                    let w = Float::with_val(prec, &t * &half_pi) * &ch;
                    let vals = f(&t);
                    let mut mag = Float::with_val(prec, 0);
                    let mut rel_small = true;
                    for (s, v) in sums.iter_mut().zip(vals.iter()) {
                        if !v.is_finite() {
                            return Err(Error::Quadrature("integrand is not finite".into()));
                        }
                        let term = v.scale(&w);
                        let a = term.abs();
                        let scale = s.abs();
                        if a > Float::with_val(prec, &scale * &eps) {
                            rel_small = false;
                        }
                        if a > mag {
                            mag = a;
                        }
                        *s += &term;
                    }
                    if rel_small {
                        small_run += 1;
                        if small_run >= 3 {
                            break;
                        }
                    } else {
                        small_run = 0;
                    }
                    if dir == 1 && k > 64 && mag > prev_mag && t > 1e6 {
                        return Err(Error::Quadrature("integrand grows along the ray".into()));
                    }
                    prev_mag = mag;
                    k += if odd_only { 2 } else { 1 };
                    if k > 1 << 20 {
                        return Err(Error::Quadrature("node budget exhausted".into()));
                    }
                }
            }
            Ok(())
        };

        let mut h = Float::with_val(prec, 0.5);
        sweep(&h, false, &mut sums)?;
        let mut estimate: Vec<BigComplex> = sums.iter().map(|s| s.scale(&h)).collect();
        for level in 1..=self.max_level {
            h /= 2u32;
            sweep(&h, true, &mut sums)?;
            let next: Vec<BigComplex> = sums.iter().map(|s| s.scale(&h)).collect();
            let mut err = 0f64;
            for (a, b) in next.iter().zip(estimate.iter()) {
                let d = a.dist(b).to_f64();
                let scale = a.abs().to_f64().max(f64::MIN_POSITIVE);
                err = err.max(d / scale);
            }
            estimate = next;
            // exponential convergence: once the change is at the square root
            // of the target the next level is already converged
            if level >= 3 && err < self.tol.sqrt() {
                h /= 2u32;
                sweep(&h, true, &mut sums)?;
                let last: Vec<BigComplex> = sums.iter().map(|s| s.scale(&h)).collect();
                let mut err2 = 0f64;
                for (a, b) in last.iter().zip(estimate.iter()) {
                    let d = a.dist(b).to_f64();
                    let scale = a.abs().to_f64().max(f64::MIN_POSITIVE);
                    err2 = err2.max(d / scale);
                }
                return Ok(QuadratureResult {
                    values: last,
                    error_estimate: err2.max(err * err),
                    levels: level + 1,
                });
            }
        }
        Err(Error::Quadrature(format!(
            "no convergence after {} levels",
            self.max_level
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let q = ExpSinh::new(256);
        let r = q
            .integrate(3, |t| {
                let e = (-Float::with_val(256, t * t)).exp();
                vec![
                    BigComplex::from_real(e.clone()),
                    BigComplex::from_real(Float::with_val(256, &e * t)),
                    BigComplex::from_real(Float::with_val(256, &e * t) * t),
                ]
            })
            .unwrap();
        let sqrt_pi = pi(256).sqrt();
        let half_sqrt_pi = Float::with_val(256, &sqrt_pi / 2u32);
        assert!((r.values[0].re.clone() - &half_sqrt_pi).abs() < 1e-60);
        assert!((r.values[1].re.clone() - 0.5f64).abs() < 1e-60);
        assert!((r.values[2].re.clone() - Float::with_val(256, &sqrt_pi / 4u32)).abs() < 1e-60);
        assert!(r.error_estimate < 1e-40);
    }

    #[test]
    fn oscillating_decay() {
        // ∫ cos(t) e^{-t} dt = 1/2
        let q = ExpSinh::new(128);
        let r = q
            .integrate(1, |t| {
                let v = Float::with_val(128, t.cos_ref()) * Float::with_val(128, -t).exp();
                vec![BigComplex::from_real(v)]
            })
            .unwrap();
        assert!((r.values[0].re.clone() - 0.5f64).abs() < 1e-30);
    }
}
