//! Root finding for truncated systems: Aberth–Ehrlich iteration for single
//! polynomials, total-degree homotopy continuation for small systems, and
//! selection of the physical root.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp::{BigComplex, DEFAULT_PREC};
use crate::symbolic::{GaussianRational, MultiPoly, UniPoly};
use crate::tower::{self, Closure, TheorySpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tol: f64,
    pub max_steps: usize,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.01,
            min_step: 1e-10,
            max_step: 0.05,
            corrector_tol: 1e-10,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Working precision in bits.
    pub precision: u32,
    /// Bound on the relative backward error of a reported root.
    pub polish_tol: f64,
    pub max_iter: usize,
    /// Relative distance under which roots are merged.
    pub cluster_tol: f64,
    /// `|Re| ≤ axis_tol·|z|` counts as on the imaginary axis (and vice versa).
    pub axis_tol: f64,
    pub homotopy: HomotopyConfig,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            precision: DEFAULT_PREC,
            polish_tol: 1e-30,
            max_iter: 2000,
            cluster_tol: 1e-12,
            axis_tol: 1e-6,
            homotopy: HomotopyConfig::default(),
            seed: 0x5eed,
        }
    }
}

impl SolverConfig {
    /// Precision used for a polynomial of the given degree.
    pub fn precision_for_degree(&self, degree: usize) -> u32 {
        if degree > 64 {
            self.precision.max(2 * degree as u32)
        } else {
            self.precision
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionTag {
    None,
    PtAxis,
    LargestReal,
    OffAxis,
}

impl SelectionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionTag::None => "none",
            SelectionTag::PtAxis => "pt_axis",
            SelectionTag::LargestReal => "largest_real",
            SelectionTag::OffAxis => "off_axis",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Root {
    /// One value per unknown, in the order of `RootSet::unknowns`.
    pub values: Vec<BigComplex>,
    pub residual: f64,
    pub tag: SelectionTag,
    pub multiplicity: u32,
    pub converged: bool,
}

impl Root {
    pub fn value_of(&self, unknowns: &[u32], index: u32) -> Option<&BigComplex> {
        unknowns.iter().position(|&u| u == index).map(|k| &self.values[k])
    }
}

#[derive(Clone, Debug, Default)]
pub struct RootSet {
    pub theory: String,
    pub order: u32,
    pub unknowns: Vec<u32>,
    pub roots: Vec<Root>,
    /// Endpoints of a homotopy whose Newton polish did not converge; kept
    /// apart from `roots` with their unpolished values.
    pub singular: Vec<Root>,
    pub path_failures: usize,
    pub at_infinity: usize,
    pub bezout: u64,
    pub precision: u32,
    pub diagnostics: Vec<String>,
}

#[derive(Serialize)]
struct RootRecord {
    seed_index: u32,
    re: String,
    im: String,
    residual: f64,
    tag: &'static str,
    multiplicity: u32,
    converged: bool,
}

#[derive(Serialize)]
struct RootSetRecord<'a> {
    theory: &'a str,
    order: u32,
    unknowns: &'a [u32],
    bezout: u64,
    path_failures: usize,
    at_infinity: usize,
    singular: usize,
    precision: u32,
    diagnostics: &'a [String],
    roots: Vec<Vec<RootRecord>>,
}

const OUTPUT_DIGITS: usize = 25;

fn fmt_component(x: &Float) -> String {
    BigComplex::component_string(x, OUTPUT_DIGITS)
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Values of one unknown across all roots.
    pub fn component(&self, index: u32) -> Vec<BigComplex> {
        self.roots
            .iter()
            .filter_map(|r| r.value_of(&self.unknowns, index).cloned())
            .collect()
    }

    /// Total root count including multiplicities.
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity as usize).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Root whose `index` component is closest to `target`.
    pub fn nearest(&self, index: u32, target: &BigComplex) -> Option<&Root> {
        self.roots.iter().min_by(|a, b| {
            let da = a.value_of(&self.unknowns, index).map(|v| v.dist(target));
            let db = b.value_of(&self.unknowns, index).map(|v| v.dist(target));
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub const CSV_HEADER: &'static str = "theory,order,seed_index,re,im,residual,tag";

    /// CSV rows `theory,order,seed_index,re,im,residual,tag`, one per root
    /// and unknown, without header.
    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.roots {
            for (k, v) in r.values.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{:e},{}",
                    self.theory,
                    self.order,
                    self.unknowns[k],
                    fmt_component(&v.re),
                    fmt_component(&v.im),
                    r.residual,
                    r.tag.as_str()
                );
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.to_csv_rows())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let roots = self
            .roots
            .iter()
            .map(|r| {
                r.values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| RootRecord {
                        seed_index: self.unknowns[k],
                        re: fmt_component(&v.re),
                        im: fmt_component(&v.im),
                        residual: r.residual,
                        tag: r.tag.as_str(),
                        multiplicity: r.multiplicity,
                        converged: r.converged,
                    })
                    .collect()
            })
            .collect();
        serde_json::to_value(RootSetRecord {
            theory: &self.theory,
            order: self.order,
            unknowns: &self.unknowns,
            bezout: self.bezout,
            path_failures: self.path_failures,
            at_infinity: self.at_infinity,
            singular: self.singular.len(),
            precision: self.precision,
            diagnostics: &self.diagnostics,
            roots,
        })
        .expect("root set serializes")
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_linear<T>(mut a: Vec<Vec<T>>, mut b: Vec<T>, mag: impl Fn(&T) -> f64) -> Option<Vec<T>>
where
    T: Clone,
    for<'x> &'x T: Add<&'x T, Output = T> + Sub<&'x T, Output = T> + Mul<&'x T, Output = T>,
    for<'x> &'x T: std::ops::Div<&'x T, Output = T>,
{
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| mag(&a[i][col]).total_cmp(&mag(&a[j][col])))?;
        if mag(&a[piv][col]) == 0.0 || !mag(&a[piv][col]).is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = &a[row][col] / &a[col][col];
            for k in col..n {
                let v = &a[row][k] - &(&f * &a[col][k]);
                a[row][k] = v;
            }
            let v = &b[row] - &(&f * &b[col]);
            b[row] = v;
        }
    }
    let mut x = b.clone();
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = &acc - &(&a[row][k] * &x[k]);
        }
        x[row] = &acc / &a[row][row];
    }
    Some(x)
}

/// Horner evaluation of `p` and `p'` at `z`.
fn horner2(coeffs: &[BigComplex], z: &BigComplex) -> (BigComplex, BigComplex) {
    let prec = z.prec();
    let mut p = BigComplex::zero(prec);
    let mut dp = BigComplex::zero(prec);
    for c in coeffs.iter().rev() {
        dp = &(&dp * z) + &p;
        p = &(&p * z) + c;
    }
    (p, dp)
}

/// Relative backward error `|p(z)| / Σ|a_k||z|^k`.
fn backward_error(coeffs: &[BigComplex], z: &BigComplex) -> f64 {
    let prec = z.prec();
    let (p, _) = horner2(coeffs, z);
    let az = z.abs();
    let mut scale = Float::new(prec);
    for c in coeffs.iter().rev() {
        scale = scale * &az + c.abs();
    }
    if scale.is_zero() {
        return 0.0;
    }
    (p.abs() / scale).to_f64()
}

/// Starting points on circles whose radii follow the upper convex hull of
/// `(k, log|a_k|)`.
fn newton_polygon_start(coeffs: &[BigComplex]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let logs: Vec<f64> = coeffs
        .iter()
        .map(|c| {
            if c.is_zero() {
                f64::NEG_INFINITY
            } else {
                c.abs().ln().to_f64()
            }
        })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..=n {
        if logs[k] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (j as f64 - i as f64) * (logs[k] - logs[i]) - (k as f64 - i as f64) * (logs[j] - logs[i]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut out = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let cnt = j - i;
        let r = ((logs[i] - logs[j]) / cnt as f64).exp();
        for k in 0..cnt {
            let ang = 2.0 * PI * k as f64 / cnt as f64 + 2.0 * PI * i as f64 / n as f64 + 0.4;
            out.push(Complex64::from_polar(r, ang));
        }
    }
    out
}

/// Simultaneous Aberth–Ehrlich iteration on a polynomial with nonzero
/// constant term. Returns the roots and per-root convergence flags.
fn aberth(coeffs: &[BigComplex], prec: u32, max_iter: usize) -> (Vec<BigComplex>, Vec<bool>) {
    let start = newton_polygon_start(coeffs);
    let mut z: Vec<BigComplex> = start.iter().map(|&c| BigComplex::from_c64(prec, c)).collect();
    let n = z.len();
    let mut done = vec![false; n];
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 12));
    let one = BigComplex::one(prec);
    let abs_coeffs: Vec<Float> = coeffs.iter().map(|c| Float::with_val(64, c.abs())).collect();
    for _ in 0..max_iter {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = horner2(coeffs, &z[i]);
            // backward stable already: |p| at the rounding level of Σ|a_k||z|^k
            let az = Float::with_val(64, z[i].abs());
            let mut scale = Float::new(64);
            for a in abs_coeffs.iter().rev() {
                scale = scale * &az + a;
            }
            if p.is_zero() || p.abs() <= scale * &eps {
                done[i] = true;
                continue;
            }
            let ratio = &p / &dp;
            let mut sum = BigComplex::zero(prec);
            for j in 0..n {
                if j != i {
                    sum += &(&z[i] - &z[j]).recip();
                }
            }
            let w = &ratio / &(&one - &(&ratio * &sum));
            if !w.is_finite() {
                // perturb a colliding estimate
                z[i] = &z[i] + &BigComplex::from_f64(prec, 1e-3, 1e-3);
                all = false;
                continue;
            }
            z[i] -= &w;
            let tol = Float::with_val(prec, z[i].abs() * &eps).max(&eps);
            if w.abs() <= tol {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    (z, done)
}

fn newton_polish(coeffs: &[BigComplex], z: &mut BigComplex, steps: usize) {
    let prec = z.prec();
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
    for _ in 0..steps {
        let (p, dp) = horner2(coeffs, z);
        if dp.is_zero() || p.is_zero() {
            return;
        }
        let step = &p / &dp;
        *z -= &step;
        if step.abs() <= Float::with_val(prec, z.abs() * &eps) {
            return;
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Assigns cluster multiplicities, keeping every root.
/// Collapses copies of a repeated root into their centroid, recording the
/// copy count as the multiplicity.
fn merge_clusters(roots: Vec<Root>, tol: f64, full: &[BigComplex], polish_tol: f64) -> Vec<Root> {
    let mut groups: Vec<Vec<Root>> = Vec::new();
    for r in roots {
        let home = groups.iter_mut().find(|g| {
            g[0].values.iter().zip(&r.values).all(|(a, b)| a.dist(b).to_f64() <= tol * a.abs().to_f64().max(1.0))
        });
        match home {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|mut g| {
            if g.len() == 1 {
                return g.pop().unwrap();
            }
            let k = g.len() as u32;
            let prec = g[0].values[0].prec();
            let mut sum = BigComplex::zero(prec);
            for r in &g {
                sum += &r.values[0];
            }
            let z = sum.scale(&(Float::with_val(prec, 1) / k));
            let residual = backward_error(full, &z);
            Root {
                values: vec![z],
                residual,
                tag: SelectionTag::None,
                multiplicity: k,
                converged: residual <= polish_tol,
            }
        })
        .collect()
}

/// All complex roots of a univariate polynomial. Repeated roots are listed
/// once with their multiplicity.
pub fn roots_univariate(p: &UniPoly, cfg: &SolverConfig) -> Result<RootSet> {
    let deg = p.degree();
    if p.is_zero() || deg == 0 {
        return Err(Error::InvalidArgument("root finding needs degree ≥ 1".into()));
    }
    let prec = cfg.precision_for_degree(deg);
    let monic = p.monic().expect("nonzero leading coefficient");
    let full: Vec<BigComplex> = monic.coeffs().iter().map(|c| c.to_big(prec)).collect();
    if full.iter().any(|c| !c.is_finite()) {
        return Err(Error::Overflow("coefficient not representable".into()));
    }
    let zeros = monic.zero_root_multiplicity();
    let reduced = &monic.coeffs()[zeros..];
    // lacunary structure: q(x) = r(x^g)
    let g = reduced
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(0, |acc, (k, _)| gcd(acc, k))
        .max(1);
    let r_coeffs: Vec<BigComplex> = reduced.iter().step_by(g).map(|c| c.to_big(prec)).collect();

    let mut roots: Vec<Root> = Vec::with_capacity(deg);
    if zeros > 0 {
        roots.push(Root {
            values: vec![BigComplex::zero(prec)],
            residual: 0.0,
            tag: SelectionTag::None,
            multiplicity: zeros as u32,
            converged: true,
        });
    }
    let mut diagnostics = Vec::new();
    if r_coeffs.len() > 1 {
        let (ys, ok) = aberth(&r_coeffs, prec, cfg.max_iter);
        let unconverged = ok.iter().filter(|&&b| !b).count();
        if unconverged > 0 {
            diagnostics.push(format!("{unconverged} Aberth iterates did not settle"));
        }
        let inv_g = Float::with_val(prec, 1) / g as u32;
        let two_pi = crate::mp::pi(prec) * 2u32;
        for y in ys {
            let base = y.powf(&inv_g);
            for k in 0..g {
                let rot = BigComplex::expi(prec, &(Float::with_val(prec, &two_pi * k as u32) / g as u32));
                let mut z = &base * &rot;
                newton_polish(&full, &mut z, 50);
                let residual = backward_error(&full, &z);
                roots.push(Root {
                    values: vec![z],
                    residual,
                    tag: SelectionTag::None,
                    multiplicity: 1,
                    converged: residual <= cfg.polish_tol,
                });
            }
        }
    }
    let offset = usize::from(zeros > 0);
    let tail = roots.split_off(offset);
    roots.extend(merge_clusters(tail, cfg.cluster_tol, &full, cfg.polish_tol));
    let failures = roots.iter().filter(|r| !r.converged).count();
    if failures > 0 {
        diagnostics.push(format!("{failures} roots above the residual tolerance"));
    }
    Ok(RootSet {
        unknowns: vec![0],
        roots,
        path_failures: failures,
        bezout: deg as u64,
        precision: prec,
        diagnostics,
        ..RootSet::default()
    })
}

/// Polynomial system in homogeneous coordinates for f64 path tracking.
struct NumSystem {
    /// Per equation: terms `(coefficient, exponents over x_0..x_s)`.
    eqs: Vec<Vec<(Complex64, Vec<u32>)>>,
    degrees: Vec<u32>,
    nvars: usize,
}

impl NumSystem {
    fn new(eqs: &[MultiPoly], unknowns: &[u32]) -> Result<Self> {
        let nvars = unknowns.len();
        let mut out = Vec::with_capacity(eqs.len());
        let mut degrees = Vec::with_capacity(eqs.len());
        for e in eqs {
            let d = e.total_degree();
            if d == 0 {
                return Err(Error::InvalidArgument("constant equation in system".into()));
            }
            let scale = e
                .terms()
                .map(|(_, c)| c.to_c64().norm())
                .fold(0.0, f64::max);
            let mut terms = Vec::new();
            for (m, c) in e.terms() {
                let mut exps = vec![0u32; nvars + 1];
                for &(i, ex) in m.factors() {
                    let k = unknowns.iter().position(|&u| u == i).ok_or_else(|| {
                        Error::ContractViolation(format!("symbol G{i} is not an unknown"))
                    })?;
                    exps[k + 1] = ex;
                }
                exps[0] = d - m.total_degree();
                terms.push((c.to_c64() / scale, exps));
            }
            out.push(terms);
            degrees.push(d);
        }
        Ok(Self {
            eqs: out,
            degrees,
            nvars,
        })
    }

    /// Values and gradients of the target equations at `x`.
    fn eval(&self, x: &[Complex64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let n = self.nvars + 1;
        let maxd = *self.degrees.iter().max().unwrap_or(&1) as usize;
        let pw: Vec<Vec<Complex64>> = x
            .iter()
            .map(|&xi| {
                let mut v = vec![Complex64::new(1.0, 0.0); maxd + 1];
                for k in 1..=maxd {
                    v[k] = v[k - 1] * xi;
                }
                v
            })
            .collect();
        let mut vals = Vec::with_capacity(self.eqs.len());
        let mut grads = Vec::with_capacity(self.eqs.len());
        for terms in &self.eqs {
            let mut v = Complex64::new(0.0, 0.0);
            let mut g = vec![Complex64::new(0.0, 0.0); n];
            for (c, e) in terms {
                let mut t = *c;
                for j in 0..n {
                    t *= pw[j][e[j] as usize];
                }
                v += t;
                for j in 0..n {
                    if e[j] > 0 {
                        let mut d = *c * e[j] as f64 * pw[j][e[j] as usize - 1];
                        for k in 0..n {
                            if k != j {
                                d *= pw[k][e[k] as usize];
                            }
                        }
                        g[j] += d;
                    }
                }
            }
            vals.push(v);
            grads.push(g);
        }
        (vals, grads)
    }
}

fn x0_ratio(x: &[Complex64]) -> f64 {
    let norm = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    x[0].norm() / norm
}

struct Homotopy<'a> {
    sys: &'a NumSystem,
    gamma: Complex64,
    patch: Vec<Complex64>,
}

impl Homotopy<'_> {
    /// `H(x,t) = (1−t)γ G(x) + t F(x)` with patch row; returns `(H, ∂H/∂x, ∂H/∂t)`.
    fn eval(&self, x: &[Complex64], t: f64) -> (Vec<Complex64>, Vec<Vec<Complex64>>, Vec<Complex64>) {
        let n = self.sys.nvars + 1;
        let (f, df) = self.sys.eval(x);
        let mut h = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n);
        let mut ht = Vec::with_capacity(n);
        let s = 1.0 - t;
        for i in 0..self.sys.nvars {
            let d = self.sys.degrees[i] as i32;
            // start equation x_{i+1}^d − x_0^d
            let g = x[i + 1].powi(d) - x[0].powi(d);
            let mut dg = vec![Complex64::new(0.0, 0.0); n];
            dg[i + 1] = x[i + 1].powi(d - 1) * d as f64;
            dg[0] = -x[0].powi(d - 1) * d as f64;
            h.push(self.gamma * g * s + f[i] * t);
            jac.push((0..n).map(|j| self.gamma * dg[j] * s + df[i][j] * t).collect());
            ht.push(f[i] - self.gamma * g);
        }
        let p: Complex64 = self.patch.iter().zip(x).map(|(a, b)| a * b).sum();
        h.push(p - 1.0);
        jac.push(self.patch.clone());
        ht.push(Complex64::new(0.0, 0.0));
        (h, jac, ht)
    }

    /// Newton corrector. When `guarded`, the first correction must be small
    /// and later ones must contract, so that a step cannot jump paths.
    fn newton(&self, x: &mut [Complex64], t: f64, iters: usize, tol: f64, guarded: bool) -> bool {
        let mut prev = f64::INFINITY;
        for k in 0..iters {
            let (h, jac, _) = self.eval(x, t);
            let rhs: Vec<Complex64> = h.iter().map(|v| -v).collect();
            let Some(dx) = solve_linear(jac, rhs, |z: &Complex64| z.norm()) else {
                return false;
            };
            let nx: f64 = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let nd: f64 = dx.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if guarded && ((k == 0 && nd > 1e-3 * nx.max(1e-300)) || (k > 0 && nd > 0.25 * prev)) {
                return false;
            }
            prev = nd;
            for (a, b) in x.iter_mut().zip(dx) {
                *a += b;
            }
            if nd <= tol * (1.0 + nx) {
                return true;
            }
        }
        false
    }

    fn tangent(&self, x: &[Complex64], t: f64) -> Option<Vec<Complex64>> {
        let (_, jac, ht) = self.eval(x, t);
        let rhs: Vec<Complex64> = ht.iter().map(|v| -v).collect();
        solve_linear(jac, rhs, |z: &Complex64| z.norm())
    }

    /// Runge–Kutta predictor along `dx/dt = −H_x⁻¹ H_t`.
    fn predict(&self, x: &[Complex64], t: f64, h: f64) -> Option<Vec<Complex64>> {
        let axpy = |k: &[Complex64], a: f64| -> Vec<Complex64> { x.iter().zip(k).map(|(u, v)| u + v * a).collect() };
        let k1 = self.tangent(x, t)?;
        let k2 = self.tangent(&axpy(&k1, h / 2.0), t + h / 2.0)?;
        let k3 = self.tangent(&axpy(&k2, h / 2.0), t + h / 2.0)?;
        let k4 = self.tangent(&axpy(&k3, h), t + h)?;
        Some(
            (0..x.len())
                .map(|i| x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
                .collect(),
        )
    }

    /// Tracks one path; returns the last point, the value of `t` reached and
    /// the relative size of `x_0` when the path entered `t > 1 − 10⁻³`.
    fn track(&self, start: Vec<Complex64>, cfg: &HomotopyConfig) -> (Vec<Complex64>, f64, f64) {
        let mut x = start;
        let mut x0_mark = f64::NAN;
        let mut t = 0.0f64;
        let mut h = cfg.initial_step;
        let mut successes = 0;
        for _ in 0..cfg.max_steps {
            if t >= 1.0 {
                break;
            }
            h = h.min(1.0 - t);
            let mut accepted = false;
            if let Some(mut xp) = self.predict(&x, t, h) {
                if self.newton(&mut xp, t + h, 4, cfg.corrector_tol, true) && xp.iter().all(|v| v.is_finite()) {
                    x = xp;
                    t += h;
                    accepted = true;
                    if x0_mark.is_nan() && t > 1.0 - 1e-3 {
                        x0_mark = x0_ratio(&x);
                    }
                }
            }
            if accepted {
                successes += 1;
                if successes >= 3 {
                    h = (h * 2.0).min(cfg.max_step);
                    successes = 0;
                }
            } else {
                successes = 0;
                h *= 0.5;
                if h < cfg.min_step {
                    return (x, t, x0_mark);
                }
            }
        }
        if t >= 1.0 {
            self.newton(&mut x, 1.0, 8, 1e-14, false);
        }
        (x, t, x0_mark)
    }
}

/// Newton refinement of an affine root in multiprecision; returns whether
/// the iteration converged.
fn polish_system(
    eqs: &[MultiPoly],
    jac: &[Vec<MultiPoly>],
    unknowns: &[u32],
    x: &mut [BigComplex],
    prec: u32,
    iters: usize,
) -> bool {
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 16));
    for _ in 0..iters {
        let vals: BTreeMap<u32, BigComplex> = unknowns.iter().copied().zip(x.iter().cloned()).collect();
        let f: Vec<BigComplex> = eqs.iter().map(|e| -e.eval_big(prec, &vals)).collect();
        let j: Vec<Vec<BigComplex>> = jac
            .iter()
            .map(|row| row.iter().map(|d| d.eval_big(prec, &vals)).collect())
            .collect();
        let Some(dx) = solve_linear(j, f, |z: &BigComplex| z.abs().to_f64()) else {
            return false;
        };
        let mut big = Float::new(prec);
        let mut nx = Float::new(prec);
        for (a, b) in x.iter_mut().zip(&dx) {
            *a += b;
            big = big.max(&b.abs());
            nx = nx.max(&a.abs());
        }
        if !big.is_finite() {
            return false;
        }
        if big <= Float::with_val(prec, &eps * (nx + 1u32)) {
            return true;
        }
    }
    false
}

/// Largest residual `|E(x)|` relative to the coefficient scale
/// `Σ|c|·max(1,‖x‖)^deg` of each equation.
fn system_residual(eqs: &[MultiPoly], unknowns: &[u32], x: &[BigComplex], prec: u32) -> f64 {
    let vals: BTreeMap<u32, BigComplex> = unknowns.iter().copied().zip(x.iter().cloned()).collect();
    let radius = x.iter().map(|v| v.abs()).fold(Float::with_val(prec, 1), |a, b| a.max(&b));
    let mut worst = 0f64;
    for e in eqs {
        let v = e.eval_big(prec, &vals).abs();
        let mut scale = Float::new(prec);
        for (m, c) in e.terms() {
            scale += c.to_big(prec).abs() * radius.clone().pow(m.total_degree());
        }
        let r = if scale.is_zero() { v.to_f64() } else { (v / scale).to_f64() };
        worst = worst.max(r);
    }
    worst
}

/// Endpoints converging to a multiple root approach it from several
/// directions; their centroid is far more accurate than any one of them.
fn merge_singular(
    eqs: &[MultiPoly],
    unknowns: &[u32],
    singular: Vec<Root>,
    prec: u32,
    cfg: &SolverConfig,
    finite: &mut Vec<Root>,
) -> Vec<Root> {
    let mut groups: Vec<Vec<Root>> = Vec::new();
    for r in singular {
        let radius = r.values.iter().map(|v| v.abs().to_f64()).fold(0.0, f64::max);
        let tol = 5e-2 * radius.max(1.0);
        match groups.iter_mut().find(|g| {
            g[0].values.iter().zip(&r.values).all(|(a, b)| a.dist(b).to_f64() <= tol)
        }) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    let mut left = Vec::new();
    for g in groups {
        if g.len() > 1 {
            let k = g.len() as u32;
            let centroid: Vec<BigComplex> = (0..unknowns.len())
                .map(|i| {
                    let mut acc = BigComplex::zero(prec);
                    for r in &g {
                        acc += &r.values[i];
                    }
                    acc.scale(&(Float::with_val(prec, 1) / k))
                })
                .collect();
            // multiple roots at the origin are common; try snapping tiny components
            let spread = g
                .iter()
                .flat_map(|r| r.values.iter().zip(&centroid).map(|(a, b)| a.dist(b).to_f64()))
                .fold(0.0, f64::max);
            let snapped: Vec<BigComplex> = centroid
                .iter()
                .map(|v| if v.abs() < spread { BigComplex::zero(prec) } else { v.clone() })
                .collect();
            let (values, residual) = [centroid, snapped]
                .into_iter()
                .map(|c| {
                    let r = system_residual(eqs, unknowns, &c, prec);
                    (c, r)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("two candidates");
            if residual <= cfg.polish_tol {
                finite.push(Root {
                    values,
                    residual,
                    tag: SelectionTag::None,
                    multiplicity: k,
                    converged: true,
                });
                continue;
            }
        }
        left.extend(g);
    }
    left
}

/// All isolated solutions of a square system by total-degree homotopy.
///
/// A run that leaves failed or unpolished endpoints is repeated with fresh
/// random constants; the run with the most polished roots is kept.
pub fn solve_system(eqs: &[MultiPoly], unknowns: &[u32], cfg: &SolverConfig) -> Result<RootSet> {
    const ATTEMPTS: u64 = 3;
    let mut best: Option<RootSet> = None;
    for attempt in 0..ATTEMPTS {
        let seed = cfg.seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let rs = solve_system_seeded(eqs, unknowns, cfg, seed)?;
        let clean = rs.singular.is_empty() && rs.path_failures == 0;
        let better = best.as_ref().is_none_or(|b| {
            let key = |r: &RootSet| (r.count_with_multiplicity(), std::cmp::Reverse(r.singular.len() + r.path_failures));
            key(&rs) > key(b)
        });
        if better {
            best = Some(rs);
        }
        if clean {
            break;
        }
    }
    let mut rs = best.expect("at least one attempt");
    if rs.singular.len() + rs.path_failures > 0 {
        rs.diagnostics.push(format!("kept the best of {ATTEMPTS} homotopy runs"));
    }
    Ok(rs)
}

fn solve_system_seeded(eqs: &[MultiPoly], unknowns: &[u32], cfg: &SolverConfig, seed: u64) -> Result<RootSet> {
    let s = unknowns.len();
    if eqs.len() != s || s == 0 {
        return Err(Error::ContractViolation(format!(
            "system has {} equations in {s} unknowns",
            eqs.len()
        )));
    }
    let sys = NumSystem::new(eqs, unknowns)?;
    let bezout: u64 = sys.degrees.iter().map(|&d| d as u64).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
    let patch: Vec<Complex64> = (0..=s)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let hom = Homotopy {
        sys: &sys,
        gamma,
        patch: patch.clone(),
    };

    // start solutions: products of roots of unity, scaled onto the patch
    let mut starts: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]];
    for &d in &sys.degrees {
        let mut next = Vec::with_capacity(starts.len() * d as usize);
        for st in &starts {
            for k in 0..d {
                let mut v = st.clone();
                v.push(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64));
                next.push(v);
            }
        }
        starts = next;
    }
    let starts: Vec<Vec<Complex64>> = starts
        .into_iter()
        .map(|v| {
            let p: Complex64 = patch.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.into_iter().map(|z| z / p).collect()
        })
        .collect();

    let prec = cfg.precision;
    let jac: Vec<Vec<MultiPoly>> = eqs
        .iter()
        .map(|e| unknowns.iter().map(|&u| e.partial(u)).collect())
        .collect();

    enum Outcome {
        Failed,
        Infinite,
        Finite(Vec<BigComplex>, bool, f64),
    }
    let outcomes: Vec<Outcome> = starts
        .into_par_iter()
        .map(|st| {
            let (mut x, mut t, mut x0_mark) = hom.track(st.clone(), &cfg.homotopy);
            if 1.0 - t > 1e-6 {
                let careful = HomotopyConfig {
                    initial_step: cfg.homotopy.initial_step / 10.0,
                    max_step: cfg.homotopy.max_step / 10.0,
                    min_step: cfg.homotopy.min_step / 100.0,
                    ..cfg.homotopy.clone()
                };
                (x, t, x0_mark) = hom.track(st, &careful);
            }
            if 1.0 - t > 1e-4 {
                return Outcome::Failed;
            }
            // paths to infinity stall just short of t = 1 with x_0 still shrinking
            let x0 = x0_ratio(&x);
            if x0 < 1e-8 || (t < 1.0 && (x0 < 1e-2 || x0 < 0.5 * x0_mark)) {
                return Outcome::Infinite;
            }
            let mut aff: Vec<BigComplex> = x[1..].iter().map(|&v| BigComplex::from_c64(prec, v / x[0])).collect();
            let seed = aff.clone();
            let mut ok = t >= 1.0 && polish_system(eqs, &jac, unknowns, &mut aff, prec, 60);
            // polish must refine the endpoint, not migrate to another root
            let moved = aff.iter().zip(&seed).any(|(a, b)| a.dist(b).to_f64() > 1e-6 * b.abs().to_f64().max(1.0));
            if moved {
                ok = false;
            }
            if !ok {
                aff = seed;
            }
            let res = system_residual(eqs, unknowns, &aff, prec);
            Outcome::Finite(aff, ok && res <= cfg.polish_tol, res)
        })
        .collect();

    let mut failures = 0;
    let mut infinite = 0;
    let mut finite: Vec<Root> = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Failed => failures += 1,
            Outcome::Infinite => infinite += 1,
            Outcome::Finite(values, converged, residual) => {
                let tol = if converged { cfg.cluster_tol } else { 1e-6 };
                let dup = finite.iter_mut().find(|r| {
                    r.values.iter().zip(&values).all(|(a, b)| {
                        a.dist(b).to_f64() <= tol * a.abs().to_f64().max(1.0)
                    })
                });
                match dup {
                    Some(r) => {
                        r.multiplicity += 1;
                        if converged && !r.converged {
                            r.values = values;
                            r.converged = true;
                            r.residual = residual;
                        }
                    }
                    None => finite.push(Root {
                        values,
                        residual,
                        tag: SelectionTag::None,
                        multiplicity: 1,
                        converged,
                    }),
                }
            }
        }
    }
    let mut diagnostics = Vec::new();
    let (mut finite, singular): (Vec<Root>, Vec<Root>) = finite.into_iter().partition(|r| r.converged);
    let singular = merge_singular(eqs, unknowns, singular, prec, cfg, &mut finite);
    if !singular.is_empty() {
        diagnostics.push(format!("{} singular or unpolished endpoints", singular.len()));
    }
    if failures > 0 {
        diagnostics.push(format!("{failures} of {bezout} paths failed"));
    }
    Ok(RootSet {
        unknowns: unknowns.to_vec(),
        roots: finite,
        singular,
        path_failures: failures,
        at_infinity: infinite,
        bezout,
        precision: prec,
        diagnostics,
        ..RootSet::default()
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Selection {
    /// Roots on the PT axis for the given unknown: negative imaginary for
    /// odd indices, positive real for even ones. Falls back to the mirror
    /// pair nearest the axis.
    PtAxis(u32),
    /// The largest positive real value of the given unknown.
    LargestReal(u32),
}

fn on_axis(z: &BigComplex, index: u32, tol: f64) -> bool {
    let c = z.to_c64();
    let n = c.norm();
    if n == 0.0 {
        return false;
    }
    if index % 2 == 1 {
        c.re.abs() <= tol * n && c.im < 0.0
    } else {
        c.im.abs() <= tol * n && c.re > 0.0
    }
}

/// Angular distance from the PT axis of the unknown.
fn axis_angle(z: &BigComplex, index: u32) -> f64 {
    let c = z.to_c64();
    let target = if index % 2 == 1 { -PI / 2.0 } else { 0.0 };
    let mut d = (c.arg() - target).abs();
    if d > PI {
        d = 2.0 * PI - d;
    }
    d
}

/// Filters and tags a root set.
pub fn select_physical(rs: &RootSet, criterion: Selection, cfg: &SolverConfig) -> RootSet {
    let mut out = RootSet {
        roots: Vec::new(),
        diagnostics: rs.diagnostics.clone(),
        ..rs.clone()
    };
    let unknown_of = |sel: u32| if rs.unknowns == [0] { 0 } else { sel };
    match criterion {
        Selection::PtAxis(index) => {
            let key = unknown_of(index);
            let parity_index = index;
            let candidates: Vec<&Root> = rs
                .roots
                .iter()
                .filter(|r| r.value_of(&rs.unknowns, key).is_some_and(|v| !v.is_zero()))
                .collect();
            let mut on: Vec<Root> = candidates
                .iter()
                .filter(|r| on_axis(r.value_of(&rs.unknowns, key).unwrap(), parity_index, cfg.axis_tol))
                .map(|&r| Root {
                    tag: SelectionTag::PtAxis,
                    ..r.clone()
                })
                .collect();
            if on.is_empty() {
                let best = candidates.iter().min_by(|a, b| {
                    let da = axis_angle(a.value_of(&rs.unknowns, key).unwrap(), parity_index);
                    let db = axis_angle(b.value_of(&rs.unknowns, key).unwrap(), parity_index);
                    da.total_cmp(&db)
                });
                if let Some(best) = best {
                    let bv = best.value_of(&rs.unknowns, key).unwrap().to_c64();
                    // mirror image across the axis: z → −z̄ (imaginary axis) or z̄ (real axis)
                    let mirror = if parity_index % 2 == 1 { -bv.conj() } else { bv.conj() };
                    for r in &candidates {
                        let v = r.value_of(&rs.unknowns, key).unwrap().to_c64();
                        let tol = 1e-6 * bv.norm().max(1.0);
                        if (v - bv).norm() <= tol || (v - mirror).norm() <= tol {
                            on.push(Root {
                                tag: SelectionTag::OffAxis,
                                ..(*r).clone()
                            });
                        }
                    }
                    out.diagnostics.push("no root on the PT axis; kept the nearest mirror pair".into());
                }
            }
            if on.is_empty() {
                out.diagnostics.push("selection is empty".into());
            }
            out.roots = on;
        }
        Selection::LargestReal(index) => {
            let key = unknown_of(index);
            let best = rs
                .roots
                .iter()
                .filter(|r| {
                    r.value_of(&rs.unknowns, key).is_some_and(|v| {
                        let c = v.to_c64();
                        c.re > 0.0 && c.im.abs() <= cfg.axis_tol * c.norm()
                    })
                })
                .max_by(|a, b| {
                    let va = a.value_of(&rs.unknowns, key).unwrap().re.to_f64();
                    let vb = b.value_of(&rs.unknowns, key).unwrap().re.to_f64();
                    va.total_cmp(&vb)
                });
            match best {
                Some(r) => out.roots.push(Root {
                    tag: SelectionTag::LargestReal,
                    ..r.clone()
                }),
                None => out.diagnostics.push("no positive real root".into()),
            }
        }
    }
    out
}

/// Truncates a theory at `order` and solves the resulting system. Unknowns
/// in the result are the seed indices.
pub fn solve_truncation(theory: &TheorySpec, order: u32, closure: &Closure, cfg: &SolverConfig) -> Result<RootSet> {
    let sys = tower::truncate(theory, order, closure)?;
    let mut rs = if sys.unknowns.len() == 1 {
        let mut rs = roots_univariate(&sys.univariate()?, cfg)?;
        rs.unknowns = sys.unknowns.clone();
        rs
    } else {
        solve_system(&sys.equations, &sys.unknowns, cfg)?
    };
    rs.theory = theory.name.clone();
    rs.order = order;
    Ok(rs)
}

/// Set distance: the largest distance from a point of `a` to its nearest
/// point in `b`, symmetrized.
pub fn set_distance(a: &[BigComplex], b: &[BigComplex]) -> f64 {
    let one_way = |x: &[BigComplex], y: &[BigComplex]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.dist(q).to_f64()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Exact coefficients of a polynomial with prescribed roots, for tests.
pub fn poly_from_roots(roots: &[GaussianRational]) -> UniPoly {
    let mut p = UniPoly::constant(GaussianRational::one());
    for r in roots {
        let factor = UniPoly::new(vec![-r, GaussianRational::one()]);
        p = &p * &factor;
    }
    p
}
