//! Order-by-order truncation scans.

use dse_core::asymptotics::closure_model;
use dse_core::oracle::{exact_greens, ContourSpec};
use dse_core::solver::{solve_truncation, RootSet, SolverConfig};
use dse_core::tower::{Closure, TheorySpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ClosureKind, RunConfig};

/// Outcome of one truncation order. Solver errors are kept, not raised.
#[derive(Clone, Debug)]
pub struct OrderResult {
    pub order: u32,
    pub roots: Result<RootSet, String>,
}

impl OrderResult {
    /// Whether this order lost paths or failed outright.
    pub fn is_partial(&self) -> bool {
        match &self.roots {
            Ok(rs) => rs.path_failures > 0,
            Err(_) => true,
        }
    }
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        precision: cfg.precision_bits,
        seed: cfg.seed,
        ..SolverConfig::default()
    }
}

/// Closure values for every order up to `max_order`.
pub fn build_closure(theory: &TheorySpec, kind: ClosureKind, max_order: u32, prec: u32) -> dse_core::Result<Closure> {
    Ok(match kind {
        ClosureKind::Zero => Closure::Zero,
        ClosureKind::Asymptotic => Closure::Asymptotic(closure_model(theory, prec)?),
        ClosureKind::Exact => {
            let top = theory.closed_indices(max_order)?.into_iter().max().unwrap_or(1);
            let contour = ContourSpec::default_for(theory)?;
            let prec = prec.max(dse_core::oracle::precision_for_order(top as usize));
            Closure::Exact(exact_greens(theory, &contour, top as usize, prec)?.0)
        }
    })
}

pub fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

/// Solves every order independently, in parallel up to `cfg.workers`.
pub fn scan_orders(theory: &TheorySpec, orders: &[u32], closure: &Closure, cfg: &RunConfig) -> Vec<OrderResult> {
    let scfg = solver_config(cfg);
    pool(cfg.workers).install(|| {
        orders
            .par_iter()
            .map(|&order| OrderResult {
                order,
                roots: solve_truncation(theory, order, closure, &scfg).map_err(|e| e.to_string()),
            })
            .collect()
    })
}

pub fn scan(cfg: &RunConfig) -> dse_core::Result<Vec<OrderResult>> {
    let theory = cfg.theory_spec();
    let closure = build_closure(&theory, cfg.closure, cfg.orders.last, cfg.precision_bits)?;
    let orders: Vec<u32> = cfg.orders.iter().collect();
    Ok(scan_orders(&theory, &orders, &closure, cfg))
}

pub fn to_csv(results: &[OrderResult]) -> String {
    let mut out = format!("{}\n", RootSet::CSV_HEADER);
    for r in results {
        if let Ok(rs) = &r.roots {
            out.push_str(&rs.to_csv_rows());
        }
    }
    out
}

pub fn to_json(cfg: &RunConfig, results: &[OrderResult]) -> serde_json::Value {
    let orders: Vec<serde_json::Value> = results
        .iter()
        .map(|r| match &r.roots {
            Ok(rs) => rs.to_json_value(),
            Err(e) => json!({ "order": r.order, "error": e }),
        })
        .collect();
    json!({
        "theory": cfg.theory,
        "closure": cfg.closure.to_string(),
        "precision_bits": cfg.precision_bits,
        "seed": cfg.seed,
        "orders": orders,
    })
}

/// `(re, im)` of every root's component `index`, over all orders.
pub fn scatter(results: &[OrderResult], index: u32) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for r in results {
        if let Ok(rs) = &r.roots {
            for v in rs.component(index) {
                let c = v.to_c64();
                out.push((c.re, c.im));
            }
        }
    }
    out
}
