//! Multiprecision complex numbers built on MPFR floats.
//!
//! Every binary operation produces a result at the larger of the two operand
//! precisions, so values created at a working precision stay there.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(Float::new(prec), Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::new(Float::with_val(prec, 1), Float::new(prec))
    }

    pub fn i(prec: u32) -> Self {
        Self::new(Float::new(prec), Float::with_val(prec, 1))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Self::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Self {
        Self::from_f64(prec, z.re, z.im)
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Self::new(re, Float::new(prec))
    }

    pub fn from_rationals(prec: u32, re: &Rational, im: &Rational) -> Self {
        Self::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    /// `r e^{iθ}`.
    pub fn polar(r: &Float, theta: &Float) -> Self {
        let prec = r.prec().max(theta.prec());
        let (s, c) = Float::with_val(prec, theta).sin_cos(Float::new(prec));
        Self::new(c * r, s * r)
    }

    /// `e^{iθ}` for an `f64` angle evaluated at `prec` bits.
    pub fn expi(prec: u32, theta: &Float) -> Self {
        let (s, c) = Float::with_val(prec, theta).sin_cos(Float::new(prec));
        Self::new(c, s)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), Float::with_val(self.im.prec(), -&self.im))
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let p = self.prec();
        Self::new(
            Float::with_val(p, &self.re / &n),
            -Float::with_val(p, &self.im / &n),
        )
    }

    pub fn scale(&self, k: &Float) -> Self {
        let p = self.prec().max(k.prec());
        Self::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn scale_f64(&self, k: f64) -> Self {
        let p = self.prec();
        Self::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self::new(Float::with_val(self.im.prec(), -&self.im), self.re.clone())
    }

    pub fn powu(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prec());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Principal branch power `z^a` for real `a`.
    pub fn powf(&self, a: &Float) -> Self {
        let p = self.prec().max(a.prec());
        if self.is_zero() {
            return Self::zero(p);
        }
        let r = Float::with_val(p, self.abs().pow(a));
        let theta = Float::with_val(p, self.arg() * a);
        Self::polar(&r, &theta)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(&Float::with_val(self.prec(), 0.5))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Distance `|self - other|`.
    pub fn dist(&self, other: &Self) -> Float {
        (self - other).abs()
    }

    /// Decimal rendering of one component with `digits` significant digits.
    pub fn component_string(x: &Float, digits: usize) -> String {
        if x.is_zero() {
            return "0".to_string();
        }
        x.to_string_radix(10, Some(digits))
    }
}

/// `π` at the requested precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `Γ(x)` for rational `x = num/den`.
pub fn gamma_ratio_arg(prec: u32, num: i64, den: i64) -> Float {
    let x = Float::with_val(prec, Rational::from((num, den)));
    x.gamma()
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        let re = BigComplex::component_string(&self.re, digits);
        let im = BigComplex::component_string(&self.im, digits);
        if let Some(abs) = im.strip_prefix('-') {
            write!(f, "{re} - {abs}i")
        } else {
            write!(f, "{re} + {im}i")
        }
    }
}

impl<'a> Add<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &'a BigComplex) -> BigComplex {
        let p = self.prec().max(rhs.prec());
        BigComplex::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
        )
    }
}

impl<'a> Sub<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &'a BigComplex) -> BigComplex {
        let p = self.prec().max(rhs.prec());
        BigComplex::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
        )
    }
}

impl<'a> Mul<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &'a BigComplex) -> BigComplex {
        let p = self.prec().max(rhs.prec());
        BigComplex::new(
            Float::with_val(p, &self.re * &rhs.re - &self.im * &rhs.im),
            Float::with_val(p, &self.re * &rhs.im + &self.im * &rhs.re),
        )
    }
}

impl<'a> Div<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &'a BigComplex) -> BigComplex {
        let p = self.prec().max(rhs.prec());
        let n = rhs.norm_sqr();
        let re = Float::with_val(p, &self.re * &rhs.re + &self.im * &rhs.im);
        let im = Float::with_val(p, &self.im * &rhs.re - &self.re * &rhs.im);
        BigComplex::new(re / &n, im / &n)
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(
            Float::with_val(self.re.prec(), -&self.re),
            Float::with_val(self.im.prec(), -&self.im),
        )
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: &'a BigComplex) -> BigComplex {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&BigComplex> for BigComplex {
    fn add_assign(&mut self, rhs: &BigComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&BigComplex> for BigComplex {
    fn sub_assign(&mut self, rhs: &BigComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&BigComplex> for BigComplex {
    fn mul_assign(&mut self, rhs: &BigComplex) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_operations() {
        let a = BigComplex::from_f64(128, 1.5, -2.0);
        let b = BigComplex::from_f64(128, -0.25, 3.0);
        let q = &(&a * &b) / &b;
        assert!(q.dist(&a) < 1e-35);
        let s = &(&a + &b) - &b;
        assert_eq!(s, a);
        let prod = &a * &a.recip();
        assert!(prod.dist(&BigComplex::one(128)) < 1e-35);
    }

    #[test]
    fn powers_and_roots() {
        let z = BigComplex::from_f64(200, 0.3, -0.7);
        let z5 = z.powu(5);
        let mut direct = BigComplex::one(200);
        for _ in 0..5 {
            direct = &direct * &z;
        }
        assert!(z5.dist(&direct) < 1e-50);
        let w = z.sqrt();
        assert!((&w * &w).dist(&z) < 1e-50);
        // principal cube root of -i is e^{-iπ/6}
        let c = BigComplex::from_f64(200, 0.0, -1.0).powf(&Float::with_val(200, Rational::from((1, 3))));
        let expect = BigComplex::expi(200, &(pi(200) / -6));
        assert!(c.dist(&expect) < 1e-50);
    }

    #[test]
    fn display_is_signed() {
        let z = BigComplex::from_f64(64, 1.0, -0.5);
        assert_eq!(format!("{z:.3}"), "1.00 - 5.00e-1i");
    }
}
