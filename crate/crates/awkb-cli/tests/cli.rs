//! End-to-end tests of the `awkb` binary: file layout, output contract,
//! determinism, exit codes, and the headline physics each subcommand must
//! reproduce.

use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, Output};

use awkb_cli::output::sha256_hex;

fn awkb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awkb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = awkb(args);
    assert!(
        out.status.success(),
        "awkb {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(args: &[&str]) -> i32 {
    awkb(args).status.code().expect("exit code")
}

/// Parsed CSV data file: `# key: value` preamble, header, string cells.
struct Table {
    preamble: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &Path) -> Table {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    let mut preamble = Vec::new();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once(": ").expect("preamble key: value");
            preamble.push((k.to_string(), v.to_string()));
        } else if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
        } else {
            rows.push(line.split(',').map(str::to_string).collect());
        }
    }
    Table {
        preamble,
        header,
        rows,
    }
}

impl Table {
    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("column {name} in {:?}", self.header))
    }

    fn f(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }

    fn meta(&self, key: &str) -> &str {
        &self
            .preamble
            .iter()
            .find(|(k, _)| k == key)
            .unwrap_or_else(|| panic!("preamble key {key}"))
            .1
    }

    /// First metrics row for an ordered method pair inside a window.
    fn metric_row(&self, lo: f64, hi: f64, a: &str, b: &str) -> usize {
        let (ca, cb) = (self.col("method_a"), self.col("method_b"));
        (0..self.rows.len())
            .find(|&i| {
                self.rows[i][ca] == a
                    && self.rows[i][cb] == b
                    && (self.f(i, "window_lo") - lo).abs() < 1e-12
                    && (self.f(i, "window_hi") - hi).abs() < 1e-12
            })
            .unwrap_or_else(|| panic!("metrics row [{lo}, {hi}] {a} vs {b}"))
    }
}

fn manifest(dir: &Path, stem: &str) -> serde_json::Value {
    let bytes = std::fs::read(dir.join(format!("{stem}.manifest.json"))).unwrap();
    serde_json::from_slice(&bytes).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn seedless_runs_are_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [d1.path(), d2.path()] {
        run_ok(&["bound", "--out", d.to_str().unwrap(), "--seedless"]);
    }
    for name in ["run.csv", "run.metrics.csv", "run.manifest.json"] {
        let a = std::fs::read(d1.path().join(name)).unwrap();
        let b = std::fs::read(d2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical seedless runs");
    }
}

#[test]
fn manifest_digests_match_emitted_files() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["bound", "--out", dir.path().to_str().unwrap(), "--seedless"]);
    let m = manifest(dir.path(), "run");
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let bytes = std::fs::read(dir.path().join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    assert_eq!(m["command"], "bound");
    assert_eq!(m["config"]["energy"], 0.5);
    assert!(m.get("timings_ms").is_none(), "seedless omits timings");
}

#[test]
fn default_bound_run_matches_the_connection_convention() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["bound", "--out", dir.path().to_str().unwrap(), "--seedless"]);
    let t = read_csv(&dir.path().join("run.csv"));
    assert_eq!(t.meta("command"), "bound");
    assert_eq!(t.header, ["x", "wkb1", "awkb", "exact", "region"]);
    assert_eq!(t.rows.len(), 96);
    // At the well center the cumulative reflection integral vanishes, so the
    // alternating construction reduces exactly to the first-order form.
    assert_eq!(t.f(0, "x"), 0.0);
    let (w, a) = (t.f(0, "wkb1"), t.f(0, "awkb"));
    assert!((w - a).abs() <= 1e-14 * w.abs(), "wkb1 {w} vs awkb {a}");
    // The alternating column is the better approximation of the exact state.
    let m = read_csv(&dir.path().join("run.metrics.csv"));
    let l2_awkb = m.f(m.metric_row(0.0, 0.95, "awkb", "exact"), "l2");
    let l2_wkb1 = m.f(m.metric_row(0.0, 0.95, "wkb1", "exact"), "l2");
    assert!(
        l2_awkb < l2_wkb1,
        "expected awkb ({l2_awkb}) to beat wkb1 ({l2_wkb1})"
    );
}

#[test]
fn exact_only_bound_run_has_one_column_and_no_metric_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"methods": ["exact"]}"#);
    run_ok(&[
        "bound",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let t = read_csv(&dir.path().join("run.csv"));
    assert_eq!(t.header, ["x", "exact", "region"]);
    let m = read_csv(&dir.path().join("run.metrics.csv"));
    assert!(m.rows.is_empty());
}

#[test]
fn numerov_column_reproduces_the_exact_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"methods": ["numerov", "exact"], "grid": {"min": 0.0, "max": 0.95, "count": 951}}"#,
    );
    run_ok(&[
        "bound",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let m = read_csv(&dir.path().join("run.metrics.csv"));
    let sup = m.f(m.metric_row(0.0, 0.95, "numerov", "exact"), "sup");
    assert!(sup < 1e-8, "numerov vs exact sup = {sup}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // Malformed JSON.
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"grid\": {").unwrap();
    assert_eq!(
        exit_code(&["bound", "--config", broken.to_str().unwrap(), "--out", out]),
        2
    );
    // Structurally valid but rejected by validation.
    let small = write_config(dir.path(), r#"{"grid": {"min": 0.0, "max": 0.9, "count": 8}}"#);
    assert_eq!(exit_code(&["bound", "--config", &small, "--out", out]), 2);
    // Wrong problem kind for the command.
    assert_eq!(exit_code(&["scatter", "--out", out]), 2);
    // Grid violating the turning-point standoff.
    let wide = write_config(dir.path(), r#"{"grid": {"min": 0.0, "max": 0.99, "count": 32}}"#);
    assert_eq!(exit_code(&["bound", "--config", &wide, "--out", out]), 2);
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"tolerances": {"ode": 1e-30}, "grid": {"min": 0.0, "max": 0.9, "count": 32}}"#,
    );
    let out = awkb(&[
        "convergence",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("numerical failure"),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn quantize_reports_levels_windings_and_vanishing_reflections() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "quantize",
        "--n-max",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let t = read_csv(&dir.path().join("run.csv"));
    assert_eq!(t.rows.len(), 2);
    for (row, expect) in [(0usize, 0.5f64), (1, 1.5)] {
        assert!((t.f(row, "energy") - expect).abs() < 1e-9);
        assert!(t.f(row, "action_residual").abs() < 1e-8);
        assert!((t.f(row, "winding_re") - TAU).abs() < 1e-7);
        assert!(t.f(row, "winding_im").abs() < 1e-9);
        let refl = t.f(row, "refl1_re").hypot(t.f(row, "refl1_im"));
        assert!(refl < 1e-6, "order-1 reflection loop = {refl}");
    }
}

#[test]
fn scatter_far_field_and_near_field_contract() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "problem": {"type": "centrifugal", "parameters": {"l": 1, "mass": 1.0, "langer_modified": true}},
  "grid": {"min": 1.6, "max": 20.0, "count": 1841},
  "windows": [[1.6, 3.0], [10.0, 20.0]],
  "output": {"path": "scatter"}
}"#,
    );
    run_ok(&[
        "scatter",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let m = manifest(dir.path(), "scatter");
    let r0 = m["metadata"]["turning_point"].as_f64().unwrap();
    assert!((r0 - 1.5).abs() < 1e-6, "turning radius {r0}");
    let t = read_csv(&dir.path().join("scatter.csv"));
    assert_eq!(t.header[..2], ["r".to_string(), "p_eff".to_string()]);
    let met = read_csv(&dir.path().join("scatter.metrics.csv"));
    // Far out the two semiclassical forms collapse onto each other...
    let far = met.f(met.metric_row(10.0, 20.0, "wkb1", "awkb"), "sup");
    assert!(far < 1e-3, "far-field wkb1 vs awkb sup = {far}");
    // ...while near the turning point the alternating form is the better
    // match to the exact free wave.
    let near_a = met.f(met.metric_row(1.6, 3.0, "awkb", "exact"), "sup");
    let near_w = met.f(met.metric_row(1.6, 3.0, "wkb1", "exact"), "sup");
    assert!(near_a < near_w, "near field: awkb {near_a} vs wkb1 {near_w}");
}

#[test]
fn convergence_orders_shrink_with_quadratic_first_order_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"min": 0.0, "max": 0.9, "count": 181}, "bremmer_order": 3}"#,
    );
    run_ok(&[
        "convergence",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let t = read_csv(&dir.path().join("run.csv"));
    let dev = |order: f64, coupling: f64| -> f64 {
        (0..t.rows.len())
            .find(|&i| t.f(i, "order") == order && t.f(i, "coupling") == coupling)
            .map(|i| t.f(i, "sup_deviation"))
            .unwrap()
    };
    assert!(dev(1.0, 1.0) > dev(2.0, 1.0));
    assert!(dev(2.0, 1.0) > dev(3.0, 1.0));
    let m = manifest(dir.path(), "run");
    let slope1 = m["metadata"]["slopes"]["1"].as_f64().unwrap();
    assert!((slope1 - 2.0).abs() < 0.3, "first-order slope {slope1}");
}

#[test]
fn constant_potential_has_zero_reflection_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
  "problem": {"type": "custom", "parameters": {"coefficients": [0.2]}},
  "grid": {"min": 0.0, "max": 0.9, "count": 32},
  "bremmer_order": 2
}"#,
    );
    run_ok(&[
        "convergence",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let t = read_csv(&dir.path().join("run.csv"));
    for i in 0..t.rows.len() {
        assert!(t.f(i, "sup_deviation") < 1e-12);
    }
}

#[test]
fn series_flags_mark_the_turning_point_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"min": 0.9, "max": 0.99, "count": 16}, "delta_tp": 0.005}"#,
    );
    run_ok(&[
        "series",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let t = read_csv(&dir.path().join("run.csv"));
    assert_eq!(t.rows.len(), 16);
    let last = t.rows.len() - 1;
    assert_eq!(t.f(last, "x"), 0.99);
    // Next to the turning point the second series term has overtaken the
    // first: the asymptotic ordering flag must report the violation.
    assert_eq!(t.rows[last][t.col("first_order_dominates")], "false");
    assert!(t.f(last, "s2_abs_hbar") > t.f(last, "s1_abs"));
    let m = manifest(dir.path(), "run");
    assert!(m["metadata"]["s2_overtakes_s1_at"].is_f64());
}

#[test]
fn contour_shapes_agree_on_the_winding() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "contour-check",
        "--out",
        dir.path().to_str().unwrap(),
        "--seedless",
    ]);
    let t = read_csv(&dir.path().join("run.csv"));
    let check = t.col("check");
    let windings: Vec<f64> = (0..t.rows.len())
        .filter(|&i| t.rows[i][check] == "winding")
        .map(|i| t.f(i, "value_re"))
        .collect();
    assert_eq!(windings.len(), 3);
    for w in &windings {
        assert!((w - TAU).abs() < 1e-7, "winding {w}");
    }
    let m = manifest(dir.path(), "run");
    let spread = m["metadata"]["winding_pairwise_spread"].as_f64().unwrap();
    assert!(spread < 1e-7, "pairwise spread {spread}");
}

#[test]
fn json_format_mirrors_the_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "bound",
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "json",
        "--seedless",
    ]);
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run.json")).unwrap()).unwrap();
    let columns: Vec<&str> = doc["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(columns, ["x", "wkb1", "awkb", "exact", "region"]);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 96);
    assert_eq!(doc["rows"][0][0], 0.0);
    assert_eq!(doc["metadata"]["command"], "bound");
    let m = manifest(dir.path(), "run");
    let names: Vec<&str> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["run.json", "run.metrics.json"]);
}
