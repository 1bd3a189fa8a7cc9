//! Dyson-Schwinger towers for `L = (λ/m) φ^m − Jφ` in zero dimensions.
//!
//! The master relation is `λ·B_{m−1}(G_1..G_{m−1}) = J`. Its `n`-th source
//! derivative at `J = 0` is evaluated through the Leibniz identity
//! `Dⁿ B_k = Σ_j C(n,j) B_{k+j}(G) B_{n−j}(−G)`, which holds because
//! `B_k(G) = Z⁽ᵏ⁾/Z`. Every equation is linear in its top index, so the same
//! recursion serves symbolic display, exact elimination and numeric
//! forward substitution.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use rug::{Integer, Rational};

use crate::asymptotics::GrowthModel;
use crate::error::{Error, Result};
use crate::mp::BigComplex;
use crate::symbolic::{GaussianRational, MultiPoly, UniPoly};

/// Term budget for symbolic tower generation.
pub const MAX_SYMBOLIC_TERMS: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TheorySpec {
    pub name: String,
    pub m: u32,
    pub lambda: GaussianRational,
    pub parity_symmetric: bool,
    /// Incoming and outgoing ray angles of the default contour, in radians.
    pub sector_pair: Option<(f64, f64)>,
}

impl TheorySpec {
    pub fn new(
        name: &str,
        m: u32,
        lambda: GaussianRational,
        parity_symmetric: bool,
        sector_pair: Option<(f64, f64)>,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("interaction power {m} < 2")));
        }
        if parity_symmetric && m % 2 == 1 {
            return Err(Error::InvalidArgument(format!(
                "parity symmetry needs an even power, got {m}"
            )));
        }
        if lambda.is_zero() {
            return Err(Error::InvalidArgument("coupling must be nonzero".into()));
        }
        Ok(Self {
            name: name.to_string(),
            m,
            lambda,
            parity_symmetric,
            sector_pair,
        })
    }

    pub fn hermitian_quartic() -> Self {
        Self::builtin("hermitian_quartic", 4, GaussianRational::one(), true, (PI, 0.0))
    }

    pub fn pt_cubic() -> Self {
        Self::builtin(
            "pt_cubic",
            3,
            GaussianRational::i(),
            false,
            (-5.0 * PI / 6.0, -PI / 6.0),
        )
    }

    pub fn pt_quartic() -> Self {
        Self::builtin(
            "pt_quartic",
            4,
            GaussianRational::from_int(-1),
            false,
            (-3.0 * PI / 4.0, -PI / 4.0),
        )
    }

    pub fn pt_quintic() -> Self {
        Self::builtin(
            "pt_quintic",
            5,
            -GaussianRational::i(),
            false,
            (9.0 * PI / 10.0, PI / 10.0),
        )
    }

    pub fn hermitian_sextic() -> Self {
        Self::builtin("hermitian_sextic", 6, GaussianRational::one(), true, (PI, 0.0))
    }

    /// The sextic tower with all four seeds kept and no parity imposed.
    pub fn hermitian_sextic_full() -> Self {
        Self::builtin(
            "hermitian_sextic_full",
            6,
            GaussianRational::one(),
            false,
            (PI, 0.0),
        )
    }

    /// Gaussian measure, used as a sanity theory.
    pub fn free() -> Self {
        Self::builtin("free", 2, GaussianRational::one(), false, (PI, 0.0))
    }

    fn builtin(name: &str, m: u32, lambda: GaussianRational, parity: bool, rays: (f64, f64)) -> Self {
        Self::new(name, m, lambda, parity, Some(rays)).expect("builtin theory is valid")
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &[
            "hermitian_quartic",
            "pt_cubic",
            "pt_quartic",
            "pt_quintic",
            "hermitian_sextic",
            "hermitian_sextic_full",
            "free",
        ]
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "hermitian_quartic" => Self::hermitian_quartic(),
            "pt_cubic" => Self::pt_cubic(),
            "pt_quartic" => Self::pt_quartic(),
            "pt_quintic" => Self::pt_quintic(),
            "hermitian_sextic" => Self::hermitian_sextic(),
            "hermitian_sextic_full" => Self::hermitian_sextic_full(),
            "free" => Self::free(),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown theory '{name}' (known: {})",
                    Self::builtin_names().join(", ")
                )))
            }
        })
    }

    /// Whether `G_k` is forced to vanish.
    pub fn vanishes(&self, k: u32) -> bool {
        self.parity_symmetric && k % 2 == 1
    }

    /// Seed Green's functions: the unknowns never fixed by an equation.
    pub fn seeds(&self) -> Vec<u32> {
        (1..self.m.saturating_sub(1)).filter(|&k| !self.vanishes(k)).collect()
    }

    /// Top index reached by truncation order `order`.
    pub fn top_for_order(&self, order: u32) -> u32 {
        if self.parity_symmetric {
            2 * order
        } else {
            order
        }
    }

    /// Top indices of the nontrivial equations up to `top`.
    pub fn equation_tops(&self, top: u32) -> Vec<u32> {
        (self.m.saturating_sub(1)..=top)
            .filter(|&k| k >= 1 && !self.vanishes(k))
            .collect()
    }

    /// Indices replaced by the closure at truncation order `order`: the
    /// highest surviving Green's functions, as many as there are seeds.
    pub fn closed_indices(&self, order: u32) -> Result<Vec<u32>> {
        let tops = self.equation_tops(self.top_for_order(order));
        let s = self.seeds().len();
        if s == 0 {
            return Err(Error::ContractViolation(format!(
                "{} has no seeds to truncate",
                self.name
            )));
        }
        if tops.len() < s {
            return Err(Error::InvalidArgument(format!(
                "order {order} is below the leading order {} of {}",
                self.leading_order(),
                self.name
            )));
        }
        Ok(tops[tops.len() - s..].to_vec())
    }

    /// Smallest truncation order yielding a square system.
    pub fn leading_order(&self) -> u32 {
        let s = self.seeds().len();
        (1..)
            .find(|&n| self.equation_tops(self.top_for_order(n)).len() >= s)
            .expect("some order suffices")
    }
}

/// One tower entry `G_top = rhs`, with `rhs` in lower indices only.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerEntry {
    pub top: u32,
    pub rhs: MultiPoly,
}

impl TowerEntry {
    /// The equation in the form `E = 0` with the top index carrying coefficient 1.
    pub fn equation(&self) -> MultiPoly {
        &MultiPoly::var(self.top) - &self.rhs
    }
}

impl fmt::Display for TowerEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{} = {}", self.top, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DsTower {
    pub theory: TheorySpec,
    pub entries: Vec<TowerEntry>,
}

impl DsTower {
    pub fn entry(&self, top: u32) -> Option<&TowerEntry> {
        self.entries.iter().find(|e| e.top == top)
    }

    /// Distinct Green's indices appearing in the first `n` entries.
    pub fn unknowns_in_first(&self, n: usize) -> BTreeSet<u32> {
        self.entries
            .iter()
            .take(n)
            .flat_map(|e| e.equation().indices())
            .collect()
    }
}

/// Results of running the tower recursion in a ring.
#[derive(Clone, Debug)]
pub struct Forward<R> {
    /// `greens[k]` is `G_k` (entry 0 unused).
    pub greens: Vec<R>,
    /// Right-hand side of each nontrivial equation, keyed by top index,
    /// computed from the values of the lower Green's functions.
    pub rhs: BTreeMap<u32, R>,
}

/// Runs the tower up to `top` in any commutative ring.
///
/// `assigned(k)` supplies a value for `G_k` (seeds must be supplied, and any
/// other index it answers for overrides the equation). `lift` embeds exact
/// coefficients.
pub fn forward<R, L, A>(theory: &TheorySpec, top: u32, lift: L, mut assigned: A) -> Result<Forward<R>>
where
    R: Clone,
    for<'a> &'a R: Add<&'a R, Output = R> + Sub<&'a R, Output = R> + Mul<&'a R, Output = R>,
    L: Fn(&GaussianRational) -> R,
    A: FnMut(u32) -> Option<R>,
{
    let m = theory.m;
    let zero = lift(&GaussianRational::zero());
    let one = lift(&GaussianRational::one());
    let inv_lambda = lift(&theory.lambda.recip().expect("nonzero coupling"));
    let top = top as usize;

    let mut g: Vec<R> = vec![zero.clone(); top + 1];
    let mut neg: Vec<R> = vec![zero.clone(); top + 1];
    let mut bp: Vec<R> = vec![one.clone()];
    let mut bm: Vec<R> = vec![one.clone()];
    let mut rhs = BTreeMap::new();
    let mut binom_rows: Vec<Vec<R>> = Vec::new();
    let binom_row = |rows: &mut Vec<Vec<R>>, n: usize| -> Vec<R> {
        while rows.len() <= n {
            let k = rows.len();
            let mut c = Integer::from(1);
            let mut row = Vec::with_capacity(k + 1);
            for j in 0..=k {
                row.push(lift(&GaussianRational::from_rational(Rational::from(&c))));
                c *= k - j;
                c /= j + 1;
            }
            rows.push(row);
        }
        rows[n].clone()
    };

    // extends a Bell table by index k, excluding the bare G_k term
    let bell_partial = |table: &[R], vals: &[R], k: usize, rows: &mut Vec<Vec<R>>| -> R {
        let row = binom_row(rows, k - 1);
        let mut acc = zero.clone();
        for j in 1..k {
            acc = &acc + &(&row[j] * &(&table[j] * &vals[k - j]));
        }
        acc
    };

    for k in 1..=top {
        let kk = k as u32;
        let is_seed = kk + 1 < m;
        let value = if theory.vanishes(kk) {
            zero.clone()
        } else if is_seed {
            assigned(kk).ok_or_else(|| {
                Error::InvalidArgument(format!("no value supplied for seed G{kk}"))
            })?
        } else {
            let n = k + 1 - m as usize;
            // G_k + Σ' = δ_{n,1}/λ, where Σ' is the Leibniz sum without the bare G_k.
            let row = binom_row(&mut binom_rows, n);
            let mut sum = bell_partial(&bp, &g, k, &mut binom_rows);
            for j in 0..n {
                let bpj = &bp[m as usize - 1 + j];
                sum = &sum + &(&row[j] * &(bpj * &bm[n - j]));
            }
            let own = if n == 1 {
                &inv_lambda - &sum
            } else {
                &zero - &sum
            };
            let chosen = assigned(kk).unwrap_or_else(|| own.clone());
            rhs.insert(kk, own);
            chosen
        };
        neg[k] = &zero - &value;
        g[k] = value;
        let b = &bell_partial(&bp, &g, k, &mut binom_rows) + &g[k];
        bp.push(b);
        let b = &bell_partial(&bm, &neg, k, &mut binom_rows) + &neg[k];
        bm.push(b);
    }
    Ok(Forward { greens: g, rhs })
}

/// The first `count` nontrivial equations with every Green's function symbolic.
pub fn generate_tower(theory: &TheorySpec, count: usize) -> Result<DsTower> {
    if count == 0 {
        return Err(Error::InvalidArgument("tower needs at least one equation".into()));
    }
    let mut top = theory.m - 1;
    while theory.equation_tops(top).len() < count {
        top += 1;
    }
    let vanishes = |k: u32| theory.vanishes(k);
    let fwd = forward(
        theory,
        top,
        |c| MultiPoly::constant(c.clone()),
        |k| Some(MultiPoly::var(k)),
    )?;
    let mut entries = Vec::with_capacity(count);
    let mut terms = 0usize;
    for (&t, r) in &fwd.rhs {
        let r = r.zero_symbols(vanishes);
        terms += r.len();
        if terms > MAX_SYMBOLIC_TERMS {
            return Err(Error::ResourceLimit(format!(
                "symbolic tower exceeds {MAX_SYMBOLIC_TERMS} terms at G{t}"
            )));
        }
        entries.push(TowerEntry { top: t, rhs: r });
    }
    Ok(DsTower {
        theory: theory.clone(),
        entries,
    })
}

/// Closure scheme for the Green's functions beyond the truncation.
#[derive(Clone, Debug)]
pub enum Closure {
    Zero,
    Asymptotic(GrowthModel),
    /// Exact values indexed by Green's index (entry 0 unused).
    Exact(Vec<BigComplex>),
}

impl Closure {
    pub fn tag(&self) -> &'static str {
        match self {
            Closure::Zero => "zero",
            Closure::Asymptotic(_) => "asymptotic",
            Closure::Exact(_) => "exact",
        }
    }

    /// Exact rational stand-in for the closure value of `G_k`.
    pub fn value(&self, k: u32) -> Result<GaussianRational> {
        let z = match self {
            Closure::Zero => return Ok(GaussianRational::zero()),
            Closure::Asymptotic(model) => model.value(k, crate::mp::DEFAULT_PREC)?,
            Closure::Exact(vals) => vals.get(k as usize).cloned().ok_or_else(|| {
                Error::ContractViolation(format!("exact closure lacks G{k}"))
            })?,
        };
        GaussianRational::from_big(&z)
            .ok_or_else(|| Error::Overflow(format!("closure value for G{k} is not finite")))
    }
}

/// A square polynomial system in the seed Green's functions.
#[derive(Clone, Debug)]
pub struct TruncatedSystem {
    pub theory: String,
    pub order: u32,
    pub closure: &'static str,
    pub unknowns: Vec<u32>,
    pub closed: Vec<u32>,
    /// One equation per closed index: `rhs_c(seeds) − closure_c = 0`.
    pub equations: Vec<MultiPoly>,
}

impl TruncatedSystem {
    /// The single equation as a monic univariate polynomial.
    pub fn univariate(&self) -> Result<UniPoly> {
        if self.unknowns.len() != 1 {
            return Err(Error::ContractViolation(format!(
                "{} has {} seeds, not 1",
                self.theory,
                self.unknowns.len()
            )));
        }
        let u = UniPoly::from_multi(&self.equations[0], self.unknowns[0])?;
        u.monic()
            .ok_or_else(|| Error::ContractViolation("truncated equation is identically zero".into()))
    }
}

fn closure_assignments(
    theory: &TheorySpec,
    order: u32,
    closure: &Closure,
) -> Result<(u32, BTreeMap<u32, GaussianRational>)> {
    let closed = theory.closed_indices(order)?;
    let mut values = BTreeMap::new();
    for &c in &closed {
        values.insert(c, closure.value(c)?);
    }
    Ok((theory.top_for_order(order), values))
}

pub fn truncate(theory: &TheorySpec, order: u32, closure: &Closure) -> Result<TruncatedSystem> {
    let (top, values) = closure_assignments(theory, order, closure)?;
    let seeds = theory.seeds();
    let fwd = forward(
        theory,
        top,
        |c| MultiPoly::constant(c.clone()),
        |k| {
            if seeds.contains(&k) {
                Some(MultiPoly::var(k))
            } else {
                values.get(&k).map(|v| MultiPoly::constant(v.clone()))
            }
        },
    )?;
    let equations = values
        .iter()
        .map(|(c, v)| &fwd.rhs[c] - &MultiPoly::constant(v.clone()))
        .collect();
    Ok(TruncatedSystem {
        theory: theory.name.clone(),
        order,
        closure: closure.tag(),
        unknowns: seeds,
        closed: values.keys().copied().collect(),
        equations,
    })
}

/// Monic polynomial in the single seed whose zeros solve the truncation.
pub fn eliminate_univariate(theory: &TheorySpec, order: u32, closure: &Closure) -> Result<UniPoly> {
    let seeds = theory.seeds();
    if seeds.len() != 1 {
        return Err(Error::ContractViolation(format!(
            "univariate elimination needs one seed; {} has {}",
            theory.name,
            seeds.len()
        )));
    }
    let (top, values) = closure_assignments(theory, order, closure)?;
    let (c, v) = values.iter().next().expect("one closed index");
    let fwd = forward(
        theory,
        top,
        |c| UniPoly::constant(c.clone()),
        |k| {
            if k == seeds[0] {
                Some(UniPoly::x())
            } else {
                values.get(&k).map(|v| UniPoly::constant(v.clone()))
            }
        },
    )?;
    let p = &fwd.rhs[c] - &UniPoly::constant(v.clone());
    p.monic()
        .ok_or_else(|| Error::ContractViolation("eliminated polynomial is zero".into()))
}

/// `P_n` for a single-seed theory under zero closure.
pub fn zero_closure_poly(theory: &TheorySpec, order: u32) -> Result<UniPoly> {
    eliminate_univariate(theory, order, &Closure::Zero)
}

/// Forward-substitutes numeric seed values up the tower, returning
/// `G_0 .. G_top` (entry 0 is zero).
pub fn higher_greens_from_seed(
    theory: &TheorySpec,
    seeds: &BTreeMap<u32, BigComplex>,
    top: u32,
    prec: u32,
) -> Result<Vec<BigComplex>> {
    let fwd = forward(
        theory,
        top,
        |c| c.to_big(prec),
        |k| seeds.get(&k).map(|v| v.with_prec(prec)),
    )?;
    Ok(fwd.greens)
}

/// Residuals `G_top − rhs_top` of every nontrivial equation up to `top`
/// at the supplied values.
pub fn tower_residuals(
    theory: &TheorySpec,
    greens: &[BigComplex],
    top: u32,
    prec: u32,
) -> Result<BTreeMap<u32, BigComplex>> {
    let fwd = forward(
        theory,
        top,
        |c| c.to_big(prec),
        |k| greens.get(k as usize).cloned(),
    )?;
    Ok(fwd
        .rhs
        .iter()
        .map(|(&k, r)| (k, &greens[k as usize] - r))
        .collect())
}
