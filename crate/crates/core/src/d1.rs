//! Leading-order truncation of the one-dimensional quartic theories, where
//! the first equation fixes a renormalized mass.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Energy gaps `E_1 − E_0` of the corresponding quantum-mechanical
/// Hamiltonians. Quoted values, not computed here.
pub const HERMITIAN_GAP: f64 = 1.088;
pub const PT_GAP: f64 = 1.796;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum D1Theory {
    Hermitian,
    Pt,
}

impl FromStr for D1Theory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hermitian" => Ok(D1Theory::Hermitian),
            "pt" => Ok(D1Theory::Pt),
            other => Err(Error::InvalidArgument(format!(
                "unknown D=1 theory `{other}` (expected hermitian or pt)"
            ))),
        }
    }
}

impl fmt::Display for D1Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            D1Theory::Hermitian => "hermitian",
            D1Theory::Pt => "pt",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct D1LeadingResult {
    pub theory: D1Theory,
    pub mass: f64,
    /// Equal-time propagator `G_2(0)`.
    pub g2_at_zero: f64,
    /// Imaginary part of the one-point function; zero for the Hermitian case.
    pub g1_im: f64,
    pub reference_gap: f64,
    pub percent_error: f64,
    /// Largest absolute residual of the defining equations.
    pub residual: f64,
}

impl D1LeadingResult {
    pub fn g1(&self) -> Complex64 {
        Complex64::new(0.0, self.g1_im)
    }
}

/// Residuals of the defining equations at `(M, G_1, G_2(0))`.
pub fn residuals(theory: D1Theory, mass: f64, g1: Complex64, g2: f64) -> Vec<f64> {
    let m2 = mass * mass;
    let propagator = g2 - 1.0 / (2.0 * mass);
    match theory {
        D1Theory::Hermitian => vec![(m2 - 3.0 * g2).abs(), propagator.abs()],
        D1Theory::Pt => vec![
            (m2 + 3.0 * (g1 * g1 + g2)).norm(),
            (3.0 * g1 * g2 + g1 * g1 * g1).norm(),
            propagator.abs(),
        ],
    }
}

pub fn d1_leading_mass(theory: D1Theory) -> D1LeadingResult {
    let (mass, g1, reference_gap) = match theory {
        // M² = 3 G_2(0) = 3/(2M)
        D1Theory::Hermitian => (1.5f64.cbrt(), Complex64::new(0.0, 0.0), HERMITIAN_GAP),
        // G_1² = −3 G_2(0) and M² = −3(G_1² + G_2(0)) = 6 G_2(0) = 3/M
        D1Theory::Pt => {
            let m = 3f64.cbrt();
            (m, Complex64::new(0.0, -(3.0 / (2.0 * m)).sqrt()), PT_GAP)
        }
    };
    let g2 = 1.0 / (2.0 * mass);
    let residual = residuals(theory, mass, g1, g2).into_iter().fold(0.0, f64::max);
    D1LeadingResult {
        theory,
        mass,
        g2_at_zero: g2,
        g1_im: g1.im,
        reference_gap,
        percent_error: 100.0 * (mass - reference_gap) / reference_gap,
        residual,
    }
}
