//! Process-level contract of the `ulab` binary: exit codes, config
//! precedence, reports and artifacts.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ulab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ulab")).current_dir(dir).args(args).output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn classify_maps_flags_into_config() {
    let d = tempfile::tempdir().unwrap();
    let o = ulab(d.path(), &["classify", "--symbol", "blaschke:0.6", "--guess", "0.1,0.0"]);
    assert!(o.status.success());
    let r = json(&o.stdout);
    assert_eq!(r["command"], "classify");
    assert_eq!(r["config"]["symbol"]["kind"], "blaschke");
    assert_eq!(r["config"]["guess"], serde_json::json!([0.1, 0.0]));
    assert_eq!(r["config"]["seed"], 0);
    assert_eq!(r["result"]["fixed_point"]["klass"], "attracting");
    assert_eq!(r["result"]["fixed_point"]["multiplier"], serde_json::json!([-0.6, 0.0]));
}

#[test]
fn missing_command_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = ulab(d.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_and_bad_values_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(ulab(d.path(), &["basin", "--bogus"]).status.code(), Some(2));
    assert_eq!(ulab(d.path(), &["classify", "--guess", "1,x"]).status.code(), Some(2));
    assert_eq!(ulab(d.path(), &["classify", "--symbol", "exp:1"]).status.code(), Some(2));
    // an output path is required
    assert_eq!(ulab(d.path(), &["basin", "--res", "8"]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.json"), r#"{"command":"basin","res":32,"half_width":0.5,"out":"b.pgm"}"#).unwrap();
    let o = ulab(d.path(), &["basin", "--config", "c.json", "--res", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o.stdout);
    assert_eq!(r["config"]["res"], 16);
    assert_eq!(r["config"]["half_width"], 0.5);
    assert_eq!(r["config"]["eps"], 0.05);
    let pgm = std::fs::read(d.path().join("b.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n16 16\n255\n"));
    assert_eq!(pgm.len(), "P5\n16 16\n255\n".len() + 256);
}

#[test]
fn bad_config_files_exit_2() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("unknown.json"), r#"{"resolution":8}"#).unwrap();
    std::fs::write(d.path().join("broken.json"), r#"{"res":8"#).unwrap();
    std::fs::write(d.path().join("other.json"), r#"{"command":"hull"}"#).unwrap();
    for f in ["unknown.json", "broken.json", "other.json", "absent.json"] {
        let o = ulab(d.path(), &["basin", "--config", f, "--out", "b.pgm"]);
        assert_eq!(o.status.code(), Some(2), "{f}");
    }
}

#[test]
fn unwritable_output_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let o = ulab(d.path(), &["basin", "--res", "8", "--out", "missing/dir/b.pgm"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o.stderr)["error"], "io");
    let o = ulab(d.path(), &["boxdim", "--input", "nope.pgm"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn non_injective_points_exit_1_with_the_pair() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("e.json"), r#"{"points":[[0.3,0],[-0.3,0]],"values":[[[0,0],[1,0]]]}"#).unwrap();
    let o = ulab(d.path(), &["universal-build", "--symbol", "poly:0;0;1", "--config", "e.json", "--out", "s.json"]);
    assert_eq!(o.status.code(), Some(1));
    let e = json(&o.stderr);
    assert_eq!(e["error"], "injectivity_violated");
    assert_eq!(e["n"], 1);
    assert_eq!(e["pair"], serde_json::json!([0, 1]));
    assert!(!d.path().join("s.json").exists());
}

#[test]
fn circle_target_is_rejected_with_step_index() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("c.json"),
        r#"{"targets":[{"target":"identity","L":{"center":[0,0],"radius":0.15,"shape":"circle"},"eps":1e-2}]}"#,
    )
    .unwrap();
    let o = ulab(d.path(), &["universal-build", "--config", "c.json", "--out", "s.json"]);
    assert_eq!(o.status.code(), Some(1));
    let e = json(&o.stderr);
    assert_eq!(e["error"], "hole_in_target");
    assert_eq!(e["step"], 0);
}

#[test]
fn render_g0_writes_pgm_and_stats() {
    let d = tempfile::tempdir().unwrap();
    let o = ulab(d.path(), &["render-g0", "--res", "64", "--out", "g.pgm"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stats = std::fs::read_to_string(d.path().join("g.csv")).unwrap();
    let mut lines = stats.lines();
    assert_eq!(lines.next(), Some("basin_pixels,complement_pixels,complement_fraction,box_dimension"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let basin: usize = row[0].parse().unwrap();
    let comp: usize = row[1].parse().unwrap();
    let frac: f64 = row[2].parse().unwrap();
    assert!(basin > 0 && comp <= basin);
    assert!((frac - comp as f64 / basin as f64).abs() < 1e-15);
    let r = json(&o.stdout);
    // default clearance is one pixel diagonal
    assert!((r["config"]["clearance"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(r["config"]["scales"], serde_json::json!([8, 16, 32, 64]));
    assert_eq!(r["result"]["basin_pixels"], basin);
}

#[test]
fn chart_table_header_and_residuals() {
    let d = tempfile::tempdir().unwrap();
    let o = ulab(d.path(), &["chart-table", "--symbol", "poly:0;1;1", "--res", "8", "--out", "t.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    assert!(t.starts_with("re,im,phi_re,phi_im,residual\n"));
    for line in t.lines().skip(1) {
        let res: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(res <= 1e-6, "{line}");
    }
    assert_eq!(json(&o.stdout)["result"]["kind"], "abel");
}

#[test]
fn schedule_round_trip_through_omega_check() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("c.json"),
        r#"{"targets":[{"target":"const","coeffs":[[1,0]],"L":{"center":[0.15,0],"radius":0.05,"samples":32},"eps":1e-3}]}"#,
    )
    .unwrap();
    let o = ulab(d.path(), &["universal-build", "--config", "c.json", "--out", "s.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&std::fs::read(d.path().join("s.json")).unwrap());
    assert_eq!(s["mode"], "schedule");
    assert!(s["report"][0].as_f64().unwrap() < 1e-3);
    assert_eq!(s["punctures"], serde_json::json!([[0.0, 0.0]]));

    std::fs::write(d.path().join("p.csv"), "re,im\n0.1,0.0\n-0.1,0.02\n0.3,-0.2\n").unwrap();
    let o = ulab(d.path(), &["omega-check", "--schedule", "s.json", "--points", "p.csv", "--out", "f.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = json(&std::fs::read(d.path().join("f.json")).unwrap());
    assert_eq!(f["tol_in"], 1e-8);
    assert!(f["violations"].as_array().unwrap().is_empty());
}

#[test]
fn hull_fills_unpunctured_holes_only() {
    use num_complex::Complex64;
    use universality_lab::{CompactGridSet, GridSpec};
    let d = tempfile::tempdir().unwrap();
    let g = GridSpec::new(Complex64::new(0.0, 0.0), 1.0, 48).unwrap();
    let ann = CompactGridSet::annulus(g, Complex64::new(0.0, 0.0), 0.4, 0.7).unwrap();
    universality_lab::io::write_pgm(&d.path().join("a.pgm"), &ann).unwrap();

    let o = ulab(d.path(), &["hull", "--input", "a.pgm", "--out", "h.pgm"]);
    let r = json(&o.stdout);
    assert_eq!((r["result"]["holes_before"].as_u64(), r["result"]["holes_after"].as_u64()), (Some(1), Some(0)));
    let o = ulab(d.path(), &["hull", "--input", "a.pgm", "--exclude", "0,0", "--out", "h2.pgm"]);
    assert_eq!(json(&o.stdout)["result"]["holes_after"], 1);
    assert_eq!(std::fs::read(d.path().join("h2.pgm")).unwrap(), std::fs::read(d.path().join("a.pgm")).unwrap());

    let o = ulab(d.path(), &["hausdorff", "--a", "a.pgm", "--b", "h.pgm"]);
    let dist = json(&o.stdout)["result"]["distance"].as_f64().unwrap();
    // the filled hole reaches the center, 0.4 from the annulus
    assert!((dist - 0.4).abs() < g.pixel_diagonal(), "{dist}");
}

#[test]
fn runge_fit_writes_rational() {
    let d = tempfile::tempdir().unwrap();
    let o = ulab(
        d.path(),
        &["runge-fit", "--target", "const", "--coeffs", "2,1", "--shape", "circle", "--radius", "0.5", "--center", "3,0", "--pole", "0,0:2", "--degree", "2", "--out", "r.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o.stdout);
    assert!(r["result"]["validation_error"].as_f64().unwrap() < 1e-12);
    let fit = json(&std::fs::read(d.path().join("r.json")).unwrap());
    assert_eq!(fit["poles"][0]["max_order"], 2);
    assert_eq!(fit["coefficients"].as_array().unwrap().len(), 5);
}

#[test]
fn thread_variable_is_validated() {
    let d = tempfile::tempdir().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_ulab"))
            .current_dir(d.path())
            .env("UNIVERSALITY_LAB_THREADS", v)
            .args(["basin", "--res", "16", "--out", "b.pgm"])
            .output()
            .unwrap()
    };
    assert!(run("1").status.success());
    assert!(run("0").status.success());
    assert_eq!(run("many").status.code(), Some(2));
}
