//! Subcommand definitions and their runners.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dse_core::asymptotics::{growth_rate_analytic, growth_rate_richardson};
use dse_core::d1::{d1_leading_mass, D1Theory};
use dse_core::mp::BigComplex;
use dse_core::oracle::{closed_form_reference, exact_greens, precision_for_order, ContourSpec};
use dse_core::solver::{select_physical, RootSet, Selection};
use dse_core::symbolic::GaussianRational;
use dse_core::tower::{eliminate_univariate, generate_tower, TheorySpec};
use serde_json::{json, Value};

use crate::config::{ClosureKind, ConfigError, Format, RunConfig};
use crate::figures::{self, FigureId};
use crate::scan::{self, build_closure, scan_orders, solver_config, OrderResult};
use crate::svg::Plot;
use crate::{CliError, Exit};

#[derive(Debug, Parser)]
#[command(name = "dse", version, about = "Truncated Schwinger-Dyson towers of zero-dimensional field theories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by the subcommands. Flags override the config file,
/// which overrides the defaults.
#[derive(Debug, Default, Clone, Args)]
pub struct Common {
    /// Flat key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub theory: Option<String>,
    /// Truncation orders, A..B
    #[arg(long)]
    pub orders: Option<String>,
    /// zero, asymptotic or exact
    #[arg(long)]
    pub closure: Option<String>,
    #[arg(long)]
    pub precision_bits: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out_dir: Option<String>,
    /// Comma-separated subset of csv, json, svg
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads; 0 uses every core
    #[arg(long)]
    pub workers: Option<String>,
}

impl Common {
    pub fn resolve(&self, mut cfg: RunConfig) -> Result<RunConfig, ConfigError> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                path: path.clone(),
                source,
            })?;
            cfg.apply_text(&text)?;
        }
        let flags = [
            ("theory", &self.theory),
            ("orders", &self.orders),
            ("closure", &self.closure),
            ("precision_bits", &self.precision_bits),
            ("seed", &self.seed),
            ("out_dir", &self.out_dir),
            ("format", &self.format),
            ("workers", &self.workers),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrowthMethod {
    Richardson,
    Analytic,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the tower equations up to a top index
    Tower {
        #[command(flatten)]
        common: Common,
        /// Highest top index printed
        #[arg(long, default_value_t = 8)]
        order: u32,
        #[arg(long)]
        json: bool,
    },
    /// Monic eliminated polynomials as exact rational coefficients (CSV)
    Polys {
        #[command(flatten)]
        common: Common,
    },
    /// Solve every truncation order and write root tables
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Exact Green's functions from contour integrals (CSV)
    Exact {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        max_order: usize,
        /// Named contour, e.g. real, pt, pt1, rot_plus
        #[arg(long, default_value = "default")]
        pair: String,
    },
    /// Large-order growth rate (JSON)
    Growth {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = GrowthMethod::Both)]
        method: GrowthMethod,
        /// Exact Green's functions fed to the extrapolation
        #[arg(long, default_value_t = 60)]
        terms: usize,
    },
    /// Per-order errors of the zero and asymptotic closures (CSV)
    ClosureCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Leading-order mass gap of the one-dimensional theories (JSON)
    D1 {
        /// hermitian or pt
        #[arg(long, default_value = "hermitian")]
        theory: String,
    },
    /// Write a figure dataset, or `all` of them
    Figure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        id: String,
        /// Use the full published order range
        #[arg(long)]
        full: bool,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

pub fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, CliError> {
    match cmd {
        Command::Tower { common, order, json } => tower(common, *order, *json, out),
        Command::Polys { common } => polys(common, out),
        Command::Scan { common } => run_scan(common, err),
        Command::Exact {
            common,
            max_order,
            pair,
        } => exact(common, *max_order, pair, out),
        Command::Growth { common, method, terms } => growth(common, *method, *terms, out),
        Command::ClosureCompare { common } => closure_compare(common, out, err),
        Command::D1 { theory } => {
            let t: D1Theory = theory.parse()?;
            let r = d1_leading_mass(t);
            let v = json!({
                "theory": r.theory,
                "mass": r.mass,
                "g2_at_zero": r.g2_at_zero,
                "g1": { "re": 0.0, "im": r.g1_im },
                "reference_gap": r.reference_gap,
                "percent_error": r.percent_error,
                "residual": r.residual,
            });
            out.write_all(pretty(&v).as_bytes()).map_err(io)?;
            Ok(Exit::Success)
        }
        Command::Figure { common, id, full } => figure(common, id, *full, out, err),
    }
}

fn tower(common: &Common, order: u32, as_json: bool, out: &mut dyn Write) -> Result<Exit, CliError> {
    let cfg = common.resolve(RunConfig::default())?;
    let theory = cfg.theory_spec();
    let count = theory.equation_tops(order).len();
    let t = generate_tower(&theory, count)?;
    let text = if as_json {
        let entries: Vec<Value> = t
            .entries
            .iter()
            .map(|e| json!({ "top": e.top, "rhs": e.rhs.to_string() }))
            .collect();
        pretty(&json!({ "theory": theory.name, "equations": entries }))
    } else {
        t.entries.iter().map(|e| format!("{e}\n")).collect()
    };
    out.write_all(text.as_bytes()).map_err(io)?;
    Ok(Exit::Success)
}

fn polys(common: &Common, out: &mut dyn Write) -> Result<Exit, CliError> {
    let cfg = common.resolve(RunConfig::default())?;
    let theory = cfg.theory_spec();
    let closure = build_closure(&theory, cfg.closure, cfg.orders.last, cfg.precision_bits)?;
    let mut rows: Vec<(u32, usize, GaussianRational)> = Vec::new();
    for n in cfg.orders.iter() {
        let p = eliminate_univariate(&theory, n, &closure)?;
        let p = p
            .monic()
            .ok_or_else(|| dse_core::Error::ContractViolation(format!("order {n} eliminates to zero")))?;
        for (d, c) in p.coeffs().iter().enumerate() {
            rows.push((n, d, c.clone()));
        }
    }
    let complex = rows.iter().any(|r| !r.2.is_real());
    let mut s = String::from("order,degree,numerator,denominator");
    if complex {
        s.push_str(",im_numerator,im_denominator");
    }
    s.push('\n');
    for (n, d, c) in rows {
        let _ = write!(s, "{n},{d},{},{}", c.re().numer(), c.re().denom());
        if complex {
            let _ = write!(s, ",{},{}", c.im().numer(), c.im().denom());
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes()).map_err(io)?;
    Ok(Exit::Success)
}

fn report_partial(results: &[OrderResult], what: &str, err: &mut dyn Write) -> Exit {
    let bad: Vec<String> = results
        .iter()
        .filter(|r| r.is_partial())
        .map(|r| r.order.to_string())
        .collect();
    if bad.is_empty() {
        return Exit::Success;
    }
    let _ = writeln!(err, "{what}: incomplete solves at orders {}", bad.join(", "));
    for r in results {
        if let Err(e) = &r.roots {
            let _ = writeln!(err, "  order {}: {e}", r.order);
        }
    }
    Exit::Partial
}

/// Component plotted for a theory: its first seed.
fn plotted_index(theory: &TheorySpec) -> u32 {
    theory.seeds().first().copied().unwrap_or(1)
}

fn run_scan(common: &Common, err: &mut dyn Write) -> Result<Exit, CliError> {
    let cfg = common.resolve(RunConfig::default())?;
    let _ = write!(err, "{}", cfg.to_text());
    let results = scan::scan(&cfg)?;
    let stem = format!("scan_{}_{}", cfg.theory, cfg.closure);
    let dir = &cfg.out_dir;
    write_file(&dir.join(format!("{stem}.config")), &cfg.to_text())?;
    if cfg.wants(Format::Csv) {
        write_file(&dir.join(format!("{stem}.csv")), &scan::to_csv(&results))?;
    }
    if cfg.wants(Format::Json) {
        write_file(&dir.join(format!("{stem}.json")), &pretty(&scan::to_json(&cfg, &results)))?;
    }
    if cfg.wants(Format::Svg) {
        let index = plotted_index(&cfg.theory_spec());
        let plot = Plot {
            title: format!("{} roots G{index}, {} closure, orders {}", cfg.theory, cfg.closure, cfg.orders),
            x_label: "Re".into(),
            y_label: "Im".into(),
            dots: scan::scatter(&results, index),
            equal_aspect: true,
            ..Plot::default()
        };
        write_file(&dir.join(format!("{stem}.svg")), &plot.render())?;
    }
    Ok(report_partial(&results, &stem, err))
}

fn exact(common: &Common, max_order: usize, pair: &str, out: &mut dyn Write) -> Result<Exit, CliError> {
    let cfg = common.resolve(RunConfig::default())?;
    let theory = cfg.theory_spec();
    let contour = if pair == "default" {
        ContourSpec::default_for(&theory)?
    } else {
        ContourSpec::named(&theory, pair)?
    };
    let prec = cfg.precision_bits.max(precision_for_order(max_order));
    let (g, estimate) = exact_greens(&theory, &contour, max_order, prec)?;
    let mut s = String::from("n,re,im,error_estimate\n");
    for (n, z) in g.iter().enumerate().skip(1) {
        let _ = writeln!(
            s,
            "{n},{},{},{estimate:e}",
            BigComplex::component_string(&z.re, 30),
            BigComplex::component_string(&z.im, 30)
        );
    }
    out.write_all(s.as_bytes()).map_err(io)?;
    Ok(Exit::Success)
}

fn growth(common: &Common, method: GrowthMethod, terms: usize, out: &mut dyn Write) -> Result<Exit, CliError> {
    let cfg = common.resolve(RunConfig::default())?;
    let theory = cfg.theory_spec();
    let mut report = json!({ "theory": theory.name });
    if matches!(method, GrowthMethod::Analytic | GrowthMethod::Both) {
        match growth_rate_analytic(&theory, cfg.precision_bits) {
            Ok(a) => {
                report["analytic"] = json!({
                    "r": a.r,
                    "r_digits": BigComplex::component_string(&a.r_big, 30),
                    "x0": a.x0,
                    "method": a.method,
                });
            }
            Err(e) if method == GrowthMethod::Both => report["analytic"] = json!({ "unavailable": e.to_string() }),
            Err(e) => return Err(e.into()),
        }
    }
    if matches!(method, GrowthMethod::Richardson | GrowthMethod::Both) {
        let contour = ContourSpec::default_for(&theory)?;
        let prec = cfg.precision_bits.max(precision_for_order(terms)).max(512);
        let (g, quad) = exact_greens(&theory, &contour, terms, prec)?;
        let r = growth_rate_richardson(theory.parity_symmetric, &g, 10, 6)?;
        report["richardson"] = json!({
            "r": r.r,
            "uncertainty": r.uncertainty,
            "terms": terms,
            "squared_statistic": r.squared_statistic,
            "estimates": r.report.estimates,
            "differences": r.report.differences,
            "quadrature_error": quad,
        });
    }
    out.write_all(pretty(&report).as_bytes()).map_err(io)?;
    Ok(Exit::Success)
}

fn distance(rs: &RootSet, index: u32, target: &BigComplex) -> Option<f64> {
    let root = rs.nearest(index, target)?;
    Some(root.value_of(&rs.unknowns, index)?.dist(target).to_f64())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn closure_compare(common: &Common, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, CliError> {
    let cfg = common.resolve(RunConfig::default())?;
    let theory = cfg.theory_spec();
    let reference = closed_form_reference(&theory, "default", cfg.precision_bits)?;
    let index = reference.index;
    let asym = build_closure(&theory, ClosureKind::Asymptotic, cfg.orders.last, cfg.precision_bits)?;
    let zero = build_closure(&theory, ClosureKind::Zero, cfg.orders.last, cfg.precision_bits)?;
    let orders: Vec<u32> = cfg.orders.iter().collect();
    let z = scan_orders(&theory, &orders, &zero, &cfg);
    let a = scan_orders(&theory, &orders, &asym, &cfg);
    let rule = if theory.parity_symmetric {
        Selection::LargestReal(index)
    } else {
        Selection::PtAxis(index)
    };
    let scfg = solver_config(&cfg);
    let mut s = String::from("order,zero_selected,zero_nearest,asymptotic_nearest\n");
    for (zr, ar) in z.iter().zip(&a) {
        let (sel, near) = match &zr.roots {
            Ok(rs) => (
                distance(&select_physical(rs, rule, &scfg), index, &reference.value),
                distance(rs, index, &reference.value),
            ),
            Err(_) => (None, None),
        };
        let asym_near = ar.roots.as_ref().ok().and_then(|rs| distance(rs, index, &reference.value));
        let _ = writeln!(s, "{},{},{},{}", zr.order, cell(sel), cell(near), cell(asym_near));
    }
    out.write_all(s.as_bytes()).map_err(io)?;
    let zs = report_partial(&z, "zero closure", err);
    let as_ = report_partial(&a, "asymptotic closure", err);
    Ok(if zs == Exit::Success && as_ == Exit::Success {
        Exit::Success
    } else {
        Exit::Partial
    })
}

fn figure(common: &Common, id: &str, full: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, CliError> {
    let ids: Vec<FigureId> = if id == "all" {
        FigureId::ALL.to_vec()
    } else {
        vec![id.parse().map_err(CliError::Usage)?]
    };
    let mut status = Exit::Success;
    for fid in ids {
        let (theory, closure) = fid.source().unwrap_or(("hermitian_quartic", ClosureKind::Zero));
        let base = RunConfig {
            theory: theory.into(),
            closure,
            orders: fid.default_orders(full),
            ..RunConfig::default()
        };
        let cfg = common.resolve(base)?;
        if cfg.theory != theory {
            return Err(CliError::Usage(format!(
                "{fid} is drawn from {theory}, not {}",
                cfg.theory
            )));
        }
        if fid.source().is_some() && cfg.closure != closure {
            return Err(CliError::Usage(format!(
                "{fid} uses the {closure} closure, not {}",
                cfg.closure
            )));
        }
        let ds = figures::build(fid, &cfg, cfg.orders)?;
        let dir = &cfg.out_dir;
        write_file(&dir.join(format!("{fid}.config")), &cfg.to_text())?;
        if cfg.wants(Format::Csv) {
            write_file(&dir.join(format!("{fid}.csv")), &ds.to_csv())?;
        }
        if cfg.wants(Format::Json) {
            write_file(&dir.join(format!("{fid}.json")), &pretty(&ds.to_json()))?;
        }
        if cfg.wants(Format::Svg) {
            write_file(&dir.join(format!("{fid}.svg")), &ds.to_svg())?;
        }
        let _ = writeln!(out, "{fid}: {} points written to {}", ds.points.len(), dir.display());
        if !ds.missing.is_empty() {
            let absent: Vec<String> = ds.missing.iter().map(|(n, _)| n.to_string()).collect();
            let _ = writeln!(err, "{fid}: dataset is missing orders {}", absent.join(", "));
            for (n, e) in &ds.missing {
                let _ = writeln!(err, "  order {n}: {e}");
            }
            status = Exit::Partial;
        }
    }
    Ok(status)
}
