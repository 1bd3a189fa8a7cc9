//! Figure datasets: scan results reduced to plotted points, with the exact
//! reference values drawn alongside.

use std::fmt;
use std::str::FromStr;

use dse_core::asymptotics::{growth_rate_analytic, quartic_linearized};
use dse_core::mp::BigComplex;
use dse_core::oracle::closed_form_reference;
use dse_core::solver::{select_physical, Selection};
use dse_core::tower::TheorySpec;
use serde::Serialize;
use serde_json::json;

use crate::config::{ClosureKind, OrderRange, RunConfig};
use crate::scan::{build_closure, scan_orders, solver_config, OrderResult};
use crate::svg::Plot;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    SuppFig1,
    SuppFig3,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::SuppFig1,
        FigureId::SuppFig3,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::SuppFig1 => "supp_fig1",
            FigureId::SuppFig3 => "supp_fig3",
        }
    }

    /// Theory and closure the figure is drawn from; `None` for the
    /// generating-function curve, which needs no scan.
    pub fn source(&self) -> Option<(&'static str, ClosureKind)> {
        match self {
            FigureId::Fig1 => Some(("hermitian_quartic", ClosureKind::Zero)),
            FigureId::Fig2 => Some(("hermitian_quartic", ClosureKind::Asymptotic)),
            FigureId::Fig4 => Some(("pt_cubic", ClosureKind::Zero)),
            FigureId::Fig5 => Some(("pt_quartic", ClosureKind::Zero)),
            FigureId::Fig6 => Some(("pt_quintic", ClosureKind::Zero)),
            FigureId::Fig7 => Some(("hermitian_sextic", ClosureKind::Zero)),
            FigureId::SuppFig1 => None,
            FigureId::SuppFig3 => Some(("pt_cubic", ClosureKind::Asymptotic)),
        }
    }

    /// Orders drawn by default, and with `full` the publication range.
    pub fn default_orders(&self, full: bool) -> OrderRange {
        let (first, reduced, publication) = match self {
            FigureId::Fig1 | FigureId::Fig2 => (2, 30, 30),
            FigureId::Fig4 | FigureId::SuppFig3 => (2, 60, 150),
            FigureId::Fig5 => (4, 12, 33),
            FigureId::Fig6 => (6, 11, 11),
            FigureId::Fig7 => (4, 12, 32),
            FigureId::SuppFig1 => (1, 1, 1),
        };
        OrderRange {
            first,
            last: if full { publication } else { reduced },
        }
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = FigureId::ALL.iter().map(FigureId::as_str).collect();
                format!("unknown figure `{s}` (known: {})", names.join(", "))
            })
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// One value per order.
    Series,
    /// Points in the complex plane.
    Complex,
    /// A sampled function.
    Curve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkKind {
    /// Heavy horizontal line at `y`.
    Line,
    /// Square at `(x, y)`.
    Square,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reference {
    pub label: String,
    pub kind: MarkKind,
    pub x: f64,
    pub y: f64,
    /// The constant to 25 significant digits.
    pub digits: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Point {
    pub order: Option<u32>,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FigureDataset {
    pub id: &'static str,
    pub title: String,
    pub theory: Option<String>,
    pub closure: Option<String>,
    pub layout: Layout,
    pub x_label: String,
    pub y_label: String,
    /// Name of the value column in CSV output for series layouts.
    pub value_column: String,
    pub orders: Vec<u32>,
    /// Orders whose solve failed, with the reason.
    pub missing: Vec<(u32, String)>,
    pub references: Vec<Reference>,
    pub points: Vec<Point>,
}

fn digits(z: &BigComplex) -> String {
    let re = BigComplex::component_string(&z.re, 25);
    let im = BigComplex::component_string(&z.im, 25);
    format!("{re} {im}i")
}

fn exact(theory: &TheorySpec, pair: &str, label: &str, kind: MarkKind) -> Reference {
    let z = closed_form_reference(theory, pair, 256)
        .expect("built-in reference")
        .value;
    let c = z.to_c64();
    let (x, y) = match kind {
        // imaginary constants are drawn by magnitude
        MarkKind::Line if c.re.abs() >= c.im.abs() => (0.0, c.re),
        MarkKind::Line => (0.0, c.norm()),
        MarkKind::Square => (c.re, c.im),
    };
    Reference {
        label: label.into(),
        kind,
        x,
        y,
        digits: digits(&z),
    }
}

fn sort_points(points: &mut [Point]) {
    points.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then(a.x.total_cmp(&b.x))
            .then(a.y.total_cmp(&b.y))
    });
}

fn positive_real(results: &[OrderResult], index: u32, tol: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for r in results {
        if let Ok(rs) = &r.roots {
            for v in rs.component(index) {
                let c = v.to_c64();
                if c.re > 0.0 && c.im.abs() <= tol * c.norm() {
                    out.push(Point {
                        order: Some(r.order),
                        x: r.order as f64,
                        y: c.re,
                    });
                }
            }
        }
    }
    out
}

fn complex_points(results: &[OrderResult], index: u32) -> Vec<Point> {
    let mut out = Vec::new();
    for r in results {
        if let Ok(rs) = &r.roots {
            for v in rs.component(index) {
                let c = v.to_c64();
                out.push(Point {
                    order: Some(r.order),
                    x: c.re,
                    y: c.im,
                });
            }
        }
    }
    out
}

/// Builds a figure dataset. `orders` overrides the figure's default range.
pub fn build(id: FigureId, cfg: &RunConfig, orders: OrderRange) -> dse_core::Result<FigureDataset> {
    if id == FigureId::SuppFig1 {
        return generating_function_curve();
    }
    let (name, closure_kind) = id.source().expect("scanned figure");
    let theory = TheorySpec::by_name(name)?;
    let closure = build_closure(&theory, closure_kind, orders.last, cfg.precision_bits)?;
    let order_list: Vec<u32> = orders.iter().collect();
    let results = scan_orders(&theory, &order_list, &closure, cfg);
    let missing: Vec<(u32, String)> = results
        .iter()
        .filter_map(|r| r.roots.as_ref().err().map(|e| (r.order, e.clone())))
        .collect();
    let axis_tol = solver_config(cfg).axis_tol;

    let mut ds = FigureDataset {
        id: id.as_str(),
        title: String::new(),
        theory: Some(name.into()),
        closure: Some(closure_kind.to_string()),
        layout: Layout::Complex,
        x_label: "Re".into(),
        y_label: "Im".into(),
        value_column: String::new(),
        orders: order_list,
        missing,
        references: Vec::new(),
        points: Vec::new(),
    };
    match id {
        FigureId::Fig1 | FigureId::Fig2 => {
            ds.title = format!("Positive zeros for G2, {} closure", closure_kind);
            ds.layout = Layout::Series;
            ds.x_label = "n".into();
            ds.y_label = "G2".into();
            ds.value_column = "root_value".into();
            ds.points = positive_real(&results, 2, axis_tol);
            ds.references.push(exact(&theory, "real", "exact G2", MarkKind::Line));
        }
        FigureId::Fig4 => {
            ds.title = "Roots G1 of the cubic truncations".into();
            ds.points = complex_points(&results, 1);
            ds.references.push(exact(&theory, "pt", "exact G1", MarkKind::Square));
        }
        FigureId::Fig5 => {
            ds.title = "Roots G1 of the non-Hermitian quartic truncations".into();
            ds.points = complex_points(&results, 1);
            ds.references.push(exact(&theory, "pt", "exact G1", MarkKind::Square));
        }
        FigureId::Fig6 => {
            ds.title = "Roots G1 of the quintic truncations".into();
            ds.points = complex_points(&results, 1);
            ds.references.push(exact(&theory, "pt1", "exact G1, first PT pair", MarkKind::Square));
            ds.references.push(exact(&theory, "pt2", "exact G1, second PT pair", MarkKind::Square));
        }
        FigureId::Fig7 => {
            ds.title = "Roots G2 of the sextic truncations".into();
            ds.points = complex_points(&results, 2);
            for (pair, label) in [("real", "exact G2"), ("rot_plus", "exact G2, rotated +"), ("rot_minus", "exact G2, rotated -")] {
                ds.references.push(exact(&theory, pair, label, MarkKind::Square));
            }
        }
        FigureId::SuppFig3 => {
            ds.title = "|G1| of PT-axis roots, asymptotic closure".into();
            ds.layout = Layout::Series;
            ds.x_label = "n".into();
            ds.y_label = "|G1|".into();
            ds.value_column = "abs_g1".into();
            let scfg = solver_config(cfg);
            for r in &results {
                if let Ok(rs) = &r.roots {
                    let sel = select_physical(rs, Selection::PtAxis(1), &scfg);
                    for v in sel.component(1) {
                        ds.points.push(Point {
                            order: Some(r.order),
                            x: r.order as f64,
                            y: v.abs().to_f64(),
                        });
                    }
                }
            }
            ds.references.push(exact(&theory, "pt", "exact |G1|", MarkKind::Line));
        }
        FigureId::SuppFig1 => unreachable!(),
    }
    sort_points(&mut ds.points);
    Ok(ds)
}

fn generating_function_curve() -> dse_core::Result<FigureDataset> {
    const PREC: u32 = 128;
    let theory = TheorySpec::hermitian_quartic();
    let rate = growth_rate_analytic(&theory, PREC)?;
    let mut points = Vec::new();
    for k in 0..=120 {
        let x = k as f64 * 0.05;
        let y = quartic_linearized(x, PREC)?;
        points.push(Point { order: None, x, y });
        if k > 0 {
            points.push(Point { order: None, x: -x, y });
        }
    }
    sort_points(&mut points);
    let x0 = Reference {
        label: "first zero x0".into(),
        kind: MarkKind::Square,
        x: rate.x0,
        y: 0.0,
        digits: BigComplex::component_string(&rate.r_big.clone().recip(), 25),
    };
    let mirror = Reference {
        label: "first zero -x0".into(),
        x: -rate.x0,
        ..x0.clone()
    };
    Ok(FigureDataset {
        id: FigureId::SuppFig1.as_str(),
        title: "Normalized cosine transform y(x)".into(),
        theory: Some(theory.name),
        closure: None,
        layout: Layout::Curve,
        x_label: "x".into(),
        y_label: "y(x)".into(),
        value_column: "y".into(),
        orders: Vec::new(),
        missing: Vec::new(),
        references: vec![mirror, x0],
        points,
    })
}

impl FigureDataset {
    pub fn to_csv(&self) -> String {
        let mut out = match self.layout {
            Layout::Series => format!("order,{}\n", self.value_column),
            Layout::Complex => "order,re,im\n".to_string(),
            Layout::Curve => format!("x,{}\n", self.value_column),
        };
        for p in &self.points {
            let line = match self.layout {
                Layout::Series => format!("{},{}\n", p.order.unwrap_or(0), p.y),
                Layout::Complex => format!("{},{},{}\n", p.order.unwrap_or(0), p.x, p.y),
                Layout::Curve => format!("{},{}\n", p.x, p.y),
            };
            out.push_str(&line);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let missing: Vec<serde_json::Value> = self
            .missing
            .iter()
            .map(|(n, e)| json!({ "order": n, "error": e }))
            .collect();
        let mut v = serde_json::to_value(self).expect("plain data");
        v["missing"] = json!(missing);
        v
    }

    pub fn to_svg(&self) -> String {
        let mut plot = Plot {
            title: format!("{}: {}", self.id, self.title),
            x_label: self.x_label.clone(),
            y_label: self.y_label.clone(),
            equal_aspect: self.layout == Layout::Complex,
            ..Plot::default()
        };
        let xy = self.points.iter().map(|p| (p.x, p.y));
        match self.layout {
            Layout::Curve => plot.curve = xy.collect(),
            _ => plot.dots = xy.collect(),
        }
        for r in &self.references {
            match r.kind {
                MarkKind::Line => plot.hlines.push(r.y),
                MarkKind::Square => plot.squares.push((r.x, r.y)),
            }
        }
        plot.render()
    }
}
