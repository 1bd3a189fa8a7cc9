use std::path::Path;
use std::process::{Command, Output};

use dse_core::oracle::closed_form_reference;
use dse_core::tower::TheorySpec;
use serde_json::Value;

fn dse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dse"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "theory=pt_cubic\ncolour=blue\n").unwrap();
    let o = dse(dir.path(), &["scan", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = dse(dir.path(), &["scan", "--theory", "phi7"]);
    assert_eq!(o.status.code(), Some(1));
    let o = dse(dir.path(), &["scan", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let o = dse(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn scan_outputs_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "scan", "--theory", "pt_cubic", "--orders", "2..9", "--format", "csv,json,svg", "--workers", "3",
    ];
    let mut runs = Vec::new();
    for out in ["a", "b"] {
        let mut a = args.to_vec();
        a.extend(["--out-dir", out]);
        let o = dse(dir.path(), &a);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let read = |ext: &str| std::fs::read(dir.path().join(out).join(format!("scan_pt_cubic_zero.{ext}"))).unwrap();
        runs.push((read("csv"), read("json"), read("svg")));
    }
    assert_eq!(runs[0], runs[1]);
    let cfg = std::fs::read_to_string(dir.path().join("a/scan_pt_cubic_zero.config")).unwrap();
    assert!(cfg.contains("orders=2..9\n") && cfg.contains("theory=pt_cubic\n"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "orders=2..4\nformat=json\nout_dir=x\n").unwrap();
    let o = dse(dir.path(), &["scan", "--config", "run.cfg", "--orders", "2..3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("x/scan_hermitian_quartic_zero.json")).unwrap()).unwrap();
    assert_eq!(v["orders"].as_array().unwrap().len(), 2);
    assert!(!dir.path().join("x/scan_hermitian_quartic_zero.csv").exists());
}

#[test]
fn partial_failures_exit_2_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = dse(dir.path(), &["scan", "--theory", "pt_quartic", "--orders", "3..5"]);
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("out/scan_pt_quartic_zero.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("pt_quartic,5,")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("orders 3"));
}

#[test]
fn d1_reports_masses() {
    let dir = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&stdout(&dse(dir.path(), &["d1", "--theory", "hermitian"]))).unwrap();
    assert!((v["mass"].as_f64().unwrap() - 1.1447).abs() < 5e-5);
    let o = dse(dir.path(), &["d1", "--theory", "pt"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["mass"].as_f64().unwrap() - 1.4422).abs() < 5e-5);
    assert!(v["g1"]["im"].as_f64().unwrap() < 0.0);
    assert_eq!(dse(dir.path(), &["d1", "--theory", "anharmonic"]).status.code(), Some(1));
}

#[test]
fn polys_and_tower_print_exact_rationals() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&dse(dir.path(), &["polys", "--orders", "5"]));
    assert!(csv.contains("5,1,193,1890\n"));
    let tower = stdout(&dse(dir.path(), &["tower", "--order", "4"]));
    assert_eq!(tower.trim(), "G4 = -3*G2^2 + 1");
}

#[test]
fn fig1_csv_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let o = dse(dir.path(), &["figure", "--id", "fig1", "--orders", "2..5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("out/fig1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "order,root_value");
    assert!(lines[1].starts_with("2,0.57735026918962"));
    assert_eq!(lines.len(), 1 + 1 + 1 + 2 + 2);
    let orders: Vec<u32> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(orders.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn figure_constants_match_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("fig1", "hermitian_quartic", vec!["real"], "2..3"),
        ("fig4", "pt_cubic", vec!["pt"], "2..3"),
        ("fig5", "pt_quartic", vec!["pt"], "4..4"),
        ("fig6", "pt_quintic", vec!["pt1", "pt2"], "6..6"),
        ("fig7", "hermitian_sextic", vec!["real", "rot_plus", "rot_minus"], "4..4"),
        ("supp_fig3", "pt_cubic", vec!["pt"], "2..3"),
    ];
    for (id, theory, pairs, orders) in cases {
        let o = dse(dir.path(), &["figure", "--id", id, "--orders", orders, "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "{id}: {}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join(format!("out/{id}.json"))).unwrap()).unwrap();
        let refs = v["references"].as_array().unwrap();
        assert_eq!(refs.len(), pairs.len(), "{id}");
        let spec = TheorySpec::by_name(theory).unwrap();
        for (r, pair) in refs.iter().zip(pairs) {
            let c = closed_form_reference(&spec, pair, 128).unwrap().value.to_c64();
            let (x, y) = (r["x"].as_f64().unwrap(), r["y"].as_f64().unwrap());
            let err = if r["kind"] == "line" {
                (y - if c.re.abs() >= c.im.abs() { c.re } else { c.norm() }).abs()
            } else {
                (x - c.re).abs().max((y - c.im).abs())
            };
            assert!(err < 1e-6, "{id} {pair}: {err}");
        }
    }
}

#[test]
fn figure_rejects_conflicting_theory_and_reports_missing_orders() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dse(dir.path(), &["figure", "--id", "fig4", "--theory", "pt_quartic"]).status.code(), Some(1));
    assert_eq!(dse(dir.path(), &["figure", "--id", "fig3"]).status.code(), Some(1));
    let o = dse(dir.path(), &["figure", "--id", "fig5", "--orders", "2..4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing orders 2, 3"));
    assert!(dir.path().join("out/fig5.csv").exists());
}

#[test]
fn exact_csv_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&dse(dir.path(), &["exact", "--theory", "hermitian_quartic", "--max-order", "4"]));
    let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert!((row[1].parse::<f64>().unwrap() - 0.675978240067285).abs() < 1e-12);
}
