//! Exact polynomial algebra in the Green's-function symbols `G1, G2, ...`.
//!
//! Coefficients are Gaussian rationals, so every manipulation performed while
//! building and eliminating a tower is exact.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mp::BigComplex;

/// Exact complex number `re + im·i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    re: Rational,
    im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::new(Rational::new(), Rational::from(1))
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(Rational::from(n), Rational::new())
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Self::new(Rational::from((num, den)), Rational::new())
    }

    pub fn from_rational(re: Rational) -> Self {
        Self::new(re, Rational::new())
    }

    pub fn imaginary(im: Rational) -> Self {
        Self::new(Rational::new(), im)
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0() == Ordering::Equal && self.im.cmp0() == Ordering::Equal
    }

    pub fn is_one(&self) -> bool {
        self.im.cmp0() == Ordering::Equal && self.re == 1
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0() == Ordering::Equal
    }

    pub fn is_imaginary(&self) -> bool {
        self.re.cmp0() == Ordering::Equal
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), Rational::from(-&self.im))
    }

    pub fn norm_sqr(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(
            Rational::from(&self.re / &n),
            Rational::from(-&self.im) / n,
        ))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.recip().map(|r| self * &r)
    }

    pub fn scale_int(&self, k: &Integer) -> Self {
        Self::new(Rational::from(&self.re * k), Rational::from(&self.im * k))
    }

    pub fn to_big(&self, prec: u32) -> BigComplex {
        BigComplex::from_rationals(prec, &self.re, &self.im)
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Exact conversion of a multiprecision value (all floats are dyadic).
    pub fn from_big(z: &BigComplex) -> Option<Self> {
        Some(Self::new(z.re.to_rational()?, z.im.to_rational()?))
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re0 = self.re.cmp0() == Ordering::Equal;
        let im0 = self.im.cmp0() == Ordering::Equal;
        match (re0, im0) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}*i", self.im),
            (false, false) => {
                if self.im.cmp0() == Ordering::Less {
                    write!(f, "({}-{}*i)", self.re, Rational::from(-&self.im))
                } else {
                    write!(f, "({}+{}*i)", self.re, self.im)
                }
            }
        }
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &'a GaussianRational) -> GaussianRational {
        GaussianRational::new(
            Rational::from(&self.re + &rhs.re),
            Rational::from(&self.im + &rhs.im),
        )
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &'a GaussianRational) -> GaussianRational {
        GaussianRational::new(
            Rational::from(&self.re - &rhs.re),
            Rational::from(&self.im - &rhs.im),
        )
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &'a GaussianRational) -> GaussianRational {
        if self.is_real() && rhs.is_real() {
            return GaussianRational::from_rational(Rational::from(&self.re * &rhs.re));
        }
        let ac = Rational::from(&self.re * &rhs.re);
        let bd = Rational::from(&self.im * &rhs.im);
        let ad = Rational::from(&self.re * &rhs.im);
        let bc = Rational::from(&self.im * &rhs.re);
        GaussianRational::new(ac - bd, ad + bc)
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(Rational::from(-&self.re), Rational::from(-&self.im))
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

/// Product of Green's-function symbols, stored as `(index, exponent)` pairs
/// sorted by index with no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(index: u32) -> Self {
        Self::pow(index, 1)
    }

    pub fn pow(index: u32, exp: u32) -> Self {
        if exp == 0 {
            Self::one()
        } else {
            Self(vec![(index, exp)])
        }
    }

    /// Builds a monomial from arbitrary `(index, exponent)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (i, e) in pairs {
            *map.entry(i).or_insert(0) += e;
        }
        Self(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, index: u32) -> u32 {
        self.0
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.0[k].1)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    /// `Σ index·exponent`.
    pub fn weighted_degree(&self) -> u32 {
        self.0.iter().map(|&(i, e)| i * e).sum()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.0.last().map(|&(i, _)| i)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(i, e)), Some(&&(j, f))) => match i.cmp(&j) {
                    Ordering::Less => {
                        out.push((i, e));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((j, f));
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push((i, e + f));
                        a.next();
                        b.next();
                    }
                },
                (Some(&&p), None) => {
                    out.push(p);
                    a.next();
                }
                (None, Some(&&p)) => {
                    out.push(p);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    /// Removes `index` entirely, returning the reduced monomial and the
    /// exponent it had.
    pub fn split_off(&self, index: u32) -> (Monomial, u32) {
        let e = self.exponent(index);
        let rest = self.0.iter().copied().filter(|&(i, _)| i != index).collect();
        (Monomial(rest), e)
    }

    /// The monomial with one power of `G_index` traded for `G_{index+1}`.
    fn shifted(&self, index: u32) -> Monomial {
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(self.0.len() + 1);
        for &(i, e) in &self.0 {
            if i == index {
                if e > 1 {
                    pairs.push((i, e - 1));
                }
            } else {
                pairs.push((i, e));
            }
        }
        pairs.push((index + 1, 1));
        Monomial::from_pairs(pairs)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then the exponent of the
    /// lowest Green's index decides.
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree().cmp(&other.total_degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].0.cmp(&b[j].0) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if a[i].1 != b[j].1 {
                            return a[i].1.cmp(&b[j].1);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
            (a.len() - i).cmp(&(b.len() - j))
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, &(i, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "G{i}")?;
            } else {
                write!(f, "G{i}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse multivariate polynomial in the `G_n` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(index: u32) -> Self {
        Self::term(GaussianRational::one(), Monomial::var(index))
    }

    pub fn term(c: GaussianRational, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (GaussianRational, Monomial)>) -> Self {
        let mut p = Self::zero();
        for (c, m) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c·m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing = &*existing + &c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.coefficient(&Monomial::one())
    }

    pub fn indices(&self) -> BTreeSet<u32> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|&(i, _)| i))
            .collect()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.terms.keys().filter_map(Monomial::max_index).max()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    /// Degree in a single symbol.
    pub fn degree_in(&self, index: u32) -> u32 {
        self.terms.keys().map(|m| m.exponent(index)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &GaussianRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = MultiPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Drops every term containing a symbol for which `vanishes` holds.
    pub fn zero_symbols(&self, vanishes: impl Fn(u32) -> bool) -> MultiPoly {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.factors().iter().any(|&(i, _)| vanishes(i)))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Derivative with respect to the source `J`, using `dG_n/dJ = G_{n+1}`.
    pub fn j_derivative(&self) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            for &(i, e) in m.factors() {
                out.add_term(m.shifted(i), c.scale_int(&Integer::from(e)));
            }
        }
        out
    }

    /// Ordinary partial derivative with respect to `G_index`.
    pub fn partial(&self, index: u32) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(index);
            if e == 0 {
                continue;
            }
            let (rest, _) = m.split_off(index);
            let reduced = rest.mul(&Monomial::pow(index, e - 1));
            out.add_term(reduced, c.scale_int(&Integer::from(e)));
        }
        out
    }

    /// Replaces every occurrence of `G_index` by `replacement`, which must
    /// only involve lower indices.
    pub fn substitute(&self, index: u32, replacement: &MultiPoly) -> Result<MultiPoly> {
        if let Some(bad) = replacement.indices().into_iter().find(|&i| i >= index) {
            return Err(Error::CyclicSubstitution {
                index,
                offending: bad,
            });
        }
        let mut powers: Vec<MultiPoly> = vec![MultiPoly::one()];
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(index);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            while powers.len() <= e as usize {
                let next = powers.last().expect("nonempty") * replacement;
                powers.push(next);
            }
            for (pm, pc) in &powers[e as usize].terms {
                out.add_term(rest.mul(pm), &c.clone() * pc);
            }
        }
        Ok(out)
    }

    /// Evaluates the polynomial in any commutative ring given conversions
    /// for coefficients and symbols.
    pub fn eval<'v, R, FC, FV>(&self, coef: FC, var: FV) -> R
    where
        R: Clone + 'v,
        for<'a> &'a R: Add<&'a R, Output = R> + Mul<&'a R, Output = R>,
        FC: Fn(&GaussianRational) -> R,
        FV: Fn(u32) -> &'v R,
    {
        let mut acc: Option<R> = None;
        for (m, c) in &self.terms {
            let mut t = coef(c);
            for &(i, e) in m.factors() {
                let v = var(i);
                for _ in 0..e {
                    t = &t * v;
                }
            }
            acc = Some(match acc {
                Some(a) => &a + &t,
                None => t,
            });
        }
        acc.unwrap_or_else(|| coef(&GaussianRational::zero()))
    }

    /// Numeric evaluation at multiprecision values.
    pub fn eval_big(&self, prec: u32, values: &BTreeMap<u32, BigComplex>) -> BigComplex {
        let zero = BigComplex::zero(prec);
        self.eval(|c| c.to_big(prec), |i| values.get(&i).unwrap_or(&zero))
    }
}

impl fmt::Display for MultiPoly {
    /// Canonical serialization: terms in descending graded-lex order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut s = if m.is_one() {
                c.to_string()
            } else if c.is_one() {
                m.to_string()
            } else if (-c).is_one() {
                format!("-{m}")
            } else {
                format!("{c}*{m}")
            };
            if k > 0 {
                if let Some(stripped) = s.strip_prefix('-') {
                    s = format!(" - {stripped}");
                } else {
                    s = format!(" + {s}");
                }
            }
            f.write_str(&s)?;
        }
        Ok(())
    }
}

impl FromStr for MultiPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut out = MultiPoly::zero();
        for (negative, term) in split_terms(&s)? {
            let (c, m) = parse_term(term)?;
            out.add_term(m, if negative { -c } else { c });
        }
        Ok(out)
    }
}

fn split_terms(s: &str) -> Result<Vec<(bool, &str)>> {
    let bytes = s.as_bytes();
    let mut depth = 0i32;
    let mut start = 0;
    let mut negative = false;
    let mut out = Vec::new();
    let mut k = 0;
    if matches!(bytes.first(), Some(b'+') | Some(b'-')) {
        negative = bytes[0] == b'-';
        start = 1;
        k = 1;
    }
    while k < bytes.len() {
        match bytes[k] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && k > start => {
                out.push((negative, &s[start..k]));
                negative = bytes[k] == b'-';
                start = k + 1;
            }
            _ => {}
        }
        k += 1;
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in '{s}'")));
    }
    if start >= s.len() {
        return Err(Error::Parse(format!("dangling sign in '{s}'")));
    }
    out.push((negative, &s[start..]));
    Ok(out)
}

fn parse_rational(s: &str) -> Result<Rational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: Integer = num.parse().map_err(|_| Error::Parse(format!("bad integer '{num}'")))?;
    let den: Integer = den.parse().map_err(|_| Error::Parse(format!("bad integer '{den}'")))?;
    if den == 0 {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(Rational::from((num, den)))
}

fn parse_complex(s: &str) -> Result<GaussianRational> {
    // (a+b*i) or (a-b*i)
    let inner = &s[1..s.len() - 1];
    let split = inner
        .char_indices()
        .skip(1)
        .find(|&(_, c)| c == '+' || c == '-')
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Parse(format!("bad complex literal '{s}'")))?;
    let re = parse_rational(&inner[..split])?;
    let im_part = inner[split..]
        .strip_suffix("*i")
        .ok_or_else(|| Error::Parse(format!("bad complex literal '{s}'")))?;
    let im = parse_rational(im_part.trim_start_matches('+'))?;
    Ok(GaussianRational::new(re, im))
}

fn parse_term(term: &str) -> Result<(GaussianRational, Monomial)> {
    let mut coef = GaussianRational::one();
    let mut pairs = Vec::new();
    let mut rest = term;
    while !rest.is_empty() {
        let factor;
        if rest.starts_with('(') {
            let close = rest
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed '(' in '{term}'")))?;
            factor = &rest[..=close];
            rest = &rest[close + 1..];
        } else {
            let end = rest.find('*').unwrap_or(rest.len());
            factor = &rest[..end];
            rest = &rest[end..];
        }
        rest = rest.strip_prefix('*').unwrap_or(rest);
        if factor.starts_with('(') {
            coef = &coef * &parse_complex(factor)?;
        } else if factor == "i" {
            coef = &coef * &GaussianRational::i();
        } else if let Some(sym) = factor.strip_prefix('G') {
            let (idx, exp) = match sym.split_once('^') {
                Some((i, e)) => (i, e),
                None => (sym, "1"),
            };
            let idx: u32 = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad symbol '{factor}'")))?;
            let exp: u32 = exp
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent '{factor}'")))?;
            if idx == 0 {
                return Err(Error::Parse("Green's indices start at 1".into()));
            }
            pairs.push((idx, exp));
        } else {
            coef = &coef * &GaussianRational::from_rational(parse_rational(factor)?);
        }
    }
    Ok((coef, Monomial::from_pairs(pairs)))
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

/// Complete Bell polynomials `B_0 ..= B_k` in the symbols `G_1 ..= G_k`,
/// from `B_k = Σ_{j<k} C(k-1, j) B_j G_{k-j}`.
pub fn complete_bell_table(k: u32) -> Vec<MultiPoly> {
    let mut table = vec![MultiPoly::one()];
    for n in 1..=k {
        let mut b = MultiPoly::zero();
        let mut binom = Integer::from(1);
        for j in 0..n {
            let term = &table[j as usize] * &MultiPoly::var(n - j);
            b = &b + &term.scale(&GaussianRational::from_rational(Rational::from(&binom)));
            // C(n-1, j+1) = C(n-1, j)·(n-1-j)/(j+1)
            binom *= n - 1 - j;
            binom /= j + 1;
        }
        table.push(b);
    }
    table
}

/// The `k`-th moment `γ_k/Z` expressed in connected Green's functions.
pub fn complete_bell(k: u32) -> MultiPoly {
    complete_bell_table(k).pop().expect("table has k+1 entries")
}

/// Dense univariate polynomial with exact coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UniPoly {
    coeffs: Vec<GaussianRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(GaussianRational::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![GaussianRational::zero(), GaussianRational::one()])
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&GaussianRational> {
        self.coeffs.last()
    }

    /// Number of vanishing low-order coefficients (multiplicity of the root at 0).
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn monic(&self) -> Option<UniPoly> {
        let inv = self.leading()?.recip()?;
        Some(UniPoly::new(self.coeffs.iter().map(|c| c * &inv).collect()))
    }

    pub fn scale(&self, c: &GaussianRational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale_int(&Integer::from(k)))
                .collect(),
        )
    }

    /// Horner evaluation at a multiprecision point.
    pub fn eval_big(&self, z: &BigComplex) -> BigComplex {
        let prec = z.prec();
        let mut acc = BigComplex::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + &c.to_big(prec);
        }
        acc
    }

    /// Reinterprets the polynomial as a `MultiPoly` in the symbol `G_index`.
    pub fn to_multi(&self, index: u32) -> MultiPoly {
        MultiPoly::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (c.clone(), Monomial::pow(index, k as u32))),
        )
    }

    /// Inverse of [`UniPoly::to_multi`]; fails if other symbols occur.
    pub fn from_multi(p: &MultiPoly, index: u32) -> Result<UniPoly> {
        let mut coeffs = vec![GaussianRational::zero(); p.degree_in(index) as usize + 1];
        for (m, c) in p.terms() {
            if m.factors().iter().any(|&(i, _)| i != index) {
                return Err(Error::ContractViolation(format!(
                    "polynomial involves symbols other than G{index}: {m}"
                )));
            }
            coeffs[m.exponent(index) as usize] = c.clone();
        }
        Ok(UniPoly::new(coeffs))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = MultiPoly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            p.add_term(Monomial::pow(1, k as u32), c.clone());
        }
        // render with `x` in place of the placeholder symbol
        let s = p.to_string().replace("G1", "x");
        f.write_str(&s)
    }
}

impl<'a> Add<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &'a UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = GaussianRational::zero();
        UniPoly::new(
            (0..n)
                .map(|k| {
                    let a = self.coeffs.get(k).unwrap_or(&zero);
                    let b = rhs.coeffs.get(k).unwrap_or(&zero);
                    a + b
                })
                .collect(),
        )
    }
}

impl<'a> Sub<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &'a UniPoly) -> UniPoly {
        self + &rhs.scale(&GaussianRational::from_int(-1))
    }
}

impl<'a> Mul<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &'a UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![GaussianRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UniPoly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MultiPoly {
        s.parse().unwrap()
    }

    #[test]
    fn gaussian_rationals_reduce() {
        let a = GaussianRational::from_frac(2, -4);
        assert_eq!(a.to_string(), "-1/2");
        let z = GaussianRational::new(Rational::from((1, 3)), Rational::from((-2, 6)));
        assert_eq!(z.to_string(), "(1/3-1/3*i)");
        let w = z.checked_div(&z).unwrap();
        assert!(w.is_one());
        assert!(GaussianRational::zero().recip().is_none());
        let i = GaussianRational::i();
        assert_eq!((&i * &i).to_string(), "-1");
        assert_eq!(i.recip().unwrap().to_string(), "-1*i");
    }

    #[test]
    fn addition_cancels() {
        assert!((&p("G2") + &p("-G2")).is_zero());
        let x = &p("G2^2 - 1/3") + &p("1/3");
        assert_eq!(x, p("G2^2"));
    }

    #[test]
    fn quartic_g6_right_side() {
        let rhs = &p("-12*G2*G4") + &p("-6*G2^3");
        assert_eq!(rhs.to_string(), "-6*G2^3 - 12*G2*G4");
    }

    #[test]
    fn products() {
        assert_eq!(&p("G1") * &p("G1"), p("G1^2"));
        let a = GaussianRational::from_frac(1, 3);
        let x = MultiPoly::var(2);
        let lhs = &(&x - &MultiPoly::constant(a.clone())) * &(&x + &MultiPoly::constant(a));
        assert_eq!(lhs, p("G2^2 - 1/9"));
        let e13 = &p("G2") + &(&p("G1^2") * &p("-1"));
        assert_eq!(e13.to_string(), "-G1^2 + G2");
    }

    #[test]
    fn bell_polynomials() {
        assert_eq!(complete_bell(0), MultiPoly::one());
        assert_eq!(complete_bell(1), p("G1"));
        assert_eq!(complete_bell(2), p("G2 + G1^2"));
        assert_eq!(complete_bell(3), p("G3 + 3*G1*G2 + G1^3"));
        assert_eq!(
            complete_bell(4),
            p("G4 + 4*G1*G3 + 3*G2^2 + 6*G1^2*G2 + G1^4")
        );
    }

    #[test]
    fn bell_matches_set_partition_count() {
        // Setting every G_n = 1 turns B_k into the Bell number (number of set partitions).
        let bell_numbers = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140, 21147];
        let one = GaussianRational::one();
        for (k, b) in complete_bell_table(9).iter().enumerate() {
            let total = b
                .terms()
                .fold(GaussianRational::zero(), |acc, (_, c)| &acc + c);
            assert_eq!(total, &one * &GaussianRational::from_int(bell_numbers[k] as i64));
        }
    }

    #[test]
    fn source_derivative() {
        assert_eq!(p("G1").j_derivative(), p("G2"));
        assert_eq!(p("G1^3").j_derivative(), p("3*G1^2*G2"));
        assert_eq!(
            complete_bell(3).j_derivative(),
            p("G4 + 3*G2^2 + 3*G1*G3 + 3*G1^2*G2")
        );
        assert!(p("7/2").j_derivative().is_zero());
    }

    #[test]
    fn partial_derivatives() {
        let q = p("3*G1^2*G2 + G2^3 - i*G1 + 7");
        assert_eq!(q.partial(1), p("6*G1*G2 - i"));
        assert_eq!(q.partial(2), p("3*G1^2 + 3*G2^2"));
        assert!(q.partial(5).is_zero());
    }

    #[test]
    fn substitution() {
        let g4 = p("-3*G2^2 + 1");
        let g6 = p("-12*G2*G4 - 6*G2^3").substitute(4, &g4).unwrap();
        assert_eq!(g6, p("30*G2^3 - 12*G2"));
        let untouched = p("G1 + G3").substitute(7, &p("G2")).unwrap();
        assert_eq!(untouched, p("G1 + G3"));
        let cubic = p("-2*G1*G2 - i").substitute(2, &p("-G1^2")).unwrap();
        assert_eq!(cubic, p("2*G1^3 - 1*i"));
    }

    #[test]
    fn cyclic_substitution_rejected() {
        let err = p("G2").substitute(2, &p("G3 + 1")).unwrap_err();
        assert!(matches!(err, Error::CyclicSubstitution { index: 2, offending: 3 }));
        assert!(p("G2").substitute(2, &p("G2")).is_err());
    }

    #[test]
    fn serialization_forms() {
        let q = p("(1/2-3/4*i)*G1*G3^2 - 2/3*i*G2 + 5");
        assert_eq!(q.to_string(), "(1/2-3/4*i)*G1*G3^2 - 2/3*i*G2 + 5");
        assert_eq!(q.to_string().parse::<MultiPoly>().unwrap(), q);
        assert_eq!(MultiPoly::zero().to_string(), "0");
        assert!("G0".parse::<MultiPoly>().is_err());
        assert!("G1 +".parse::<MultiPoly>().is_err());
    }

    #[test]
    fn univariate_round_trip() {
        let u = UniPoly::new(vec![
            GaussianRational::from_frac(-1, 3),
            GaussianRational::zero(),
            GaussianRational::one(),
        ]);
        assert_eq!(u.to_string(), "x^2 - 1/3");
        let m = u.to_multi(2);
        assert_eq!(UniPoly::from_multi(&m, 2).unwrap(), u);
        assert!(UniPoly::from_multi(&p("G1*G2"), 2).is_err());
        assert_eq!(u.derivative().to_string(), "2*x");
        let prod = &u * &UniPoly::x();
        assert_eq!(prod.zero_root_multiplicity(), 1);
    }
}
