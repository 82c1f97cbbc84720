//! End-to-end tests of the `mourre-lab` binary: exit codes, output schemas,
//! config precedence, and agreement with the library on the documented
//! example invocations.

use std::path::PathBuf;
use std::process::{Command, Output};

use mourre_core::model::{g_k_eval, ModelParams};
use mourre_core::probe::{EIG_CSV_HEADER, LAP_CSV_HEADER};
use num_complex::Complex64;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mourre-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_str(&stdout_of(out)).expect("valid json")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("terminated normally")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Fresh scratch directory, removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("mourre-lab-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).expect("scratch dir");
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, contents).expect("write scratch file");
        p.to_string_lossy().into_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

// ---------------------------------------------------------------------------
// Free-operator commands
// ---------------------------------------------------------------------------

#[test]
fn kappa_matches_the_dirac_thresholds() {
    let out = run(&["kappa", "--alpha", "1", "--a", "1", "--b", "-1", "--k", "1"]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,point"));
    let got: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let want = [-5f64.sqrt(), -1.0, 1.0, 5f64.sqrt()];
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
    }
}

#[test]
fn bands_reports_touching_bands_without_gap() {
    let out = run(&["bands", "--alpha", "0", "--a", "1", "--b", "1"]);
    let text = stdout_of(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "lower");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), -2.0);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][3], "false");
    assert_eq!(rows[1][0], "upper");
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[1][2].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn g_rejects_zero_energy() {
    let out = run(&["g", "--k", "1", "--t", "0"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("t = 0"), "{}", stderr_of(&out));
}

#[test]
fn g_grid_rows_match_direct_evaluation() {
    let out = run(&[
        "g", "--alpha", "1", "--a", "1", "--b", "-1", "--k", "2", "--points", "32",
    ]);
    let text = stdout_of(&out);
    let p = ModelParams::new(1.0, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let mut cells = line.split(',');
        let t: f64 = cells.next().unwrap().parse().unwrap();
        let g: f64 = cells.next().unwrap().parse().unwrap();
        assert!(t != 0.0);
        assert_eq!(g.to_bits(), g_k_eval(&p, 2, t).unwrap().to_bits(), "t = {t}");
        rows += 1;
    }
    assert_eq!(rows, 32);
}

#[test]
fn mourre_fourier_identity_holds_on_the_grid() {
    let out = run(&[
        "mourre", "--mode", "fourier", "--alpha", "1", "--a", "1", "--b", "-1", "--k", "1",
        "--points", "1024",
    ]);
    let v = json_of(&out);
    assert_eq!(v["anchor"], "fourier_commutator_identity");
    assert!(v["max_deviation"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn mourre_truncated_approaches_the_density_infimum() {
    let out = run(&[
        "mourre", "--mode", "truncated", "--alpha", "1", "--a", "1", "--b", "-1", "--k", "1",
        "--window", "1.2", "2.0", "--n", "300",
    ]);
    let v = json_of(&out);
    let min_eig = v["min_eig"].as_f64().unwrap();
    let inf = v["density_infimum"].as_f64().unwrap();
    assert!(min_eig >= 0.27, "min_eig {min_eig}");
    assert!((min_eig - inf).abs() <= 0.05, "min_eig {min_eig} vs infimum {inf}");
    assert!(v["rank"].as_u64().unwrap() > 0);
}

#[test]
fn mourre_truncated_gap_window_is_a_numerical_failure() {
    let out = run(&[
        "mourre", "--mode", "truncated", "--alpha", "1", "--a", "1", "--b", "-1", "--k", "1",
        "--window", "-0.5", "0.5", "--n", "100",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("no eigenvalue"), "{}", stderr_of(&out));
}

// ---------------------------------------------------------------------------
// Config handling
// ---------------------------------------------------------------------------

#[test]
fn config_supplies_defaults_and_flags_override() {
    let scratch = Scratch::new("cfg");
    let cfg = scratch.file(
        "run.json",
        r#"{"model": {"alpha": 1.0, "a_re": 1.0, "b_re": -1.0}, "k": 1}"#,
    );

    let base = stdout_of(&run(&["kappa", "--config", &cfg]));
    assert_eq!(base.lines().count(), 5, "{base}");
    assert!(base.contains("\n1,1.0000000000000000e0"), "{base}");

    // The --k flag overrides the config's k = 1 and brings in the k = 2
    // midpoints at plus or minus sqrt(3).
    let overridden = stdout_of(&run(&["kappa", "--config", &cfg, "--k", "2"]));
    assert_eq!(overridden.lines().count(), 7, "{overridden}");
    assert!(overridden.contains("1.7320508075688772e0"), "{overridden}");
}

#[test]
fn config_foreign_fields_are_rejected() {
    let scratch = Scratch::new("cfg-bad");
    let cfg = scratch.file("run.json", r#"{"eps_list": [0.1, 0.01]}"#);
    let out = run(&["bands", "--config", &cfg]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("eps_list"), "{}", stderr_of(&out));
}

#[test]
fn config_output_path_is_used_unless_out_overrides() {
    let scratch = Scratch::new("cfg-out");
    let from_cfg = scratch.path("from-config.csv");
    let cfg = scratch.file(
        "run.json",
        &format!(r#"{{"output": {{"path": {:?}}}}}"#, from_cfg.to_string_lossy()),
    );

    let out = run(&["bands", "--config", &cfg]);
    assert!(stdout_of(&out).is_empty());
    let written = std::fs::read_to_string(&from_cfg).expect("config-path output");
    assert!(written.starts_with("band,lo,hi,has_gap"), "{written}");

    let from_flag = scratch.path("from-flag.csv");
    run(&["bands", "--config", &cfg, "--out", from_flag.to_str().unwrap()]);
    assert!(from_flag.exists(), "--out should win over config output.path");
}

// ---------------------------------------------------------------------------
// Classification commands
// ---------------------------------------------------------------------------

#[test]
fn classify_round_trips_dumped_csv_bit_identically() {
    let scratch = Scratch::new("roundtrip");
    let dump = scratch.path("seq.csv");
    let first = scratch.path("first.json");
    let second = scratch.path("second.json");

    stdout_of(&run(&[
        "classify", "--family", "inverse_power", "--p", "2", "--class", "s",
        "--horizon", "2000",
        "--dump", dump.to_str().unwrap(),
        "--out", first.to_str().unwrap(),
    ]));
    stdout_of(&run(&[
        "classify", "--from-csv", dump.to_str().unwrap(), "--class", "s",
        "--horizon", "2000",
        "--out", second.to_str().unwrap(),
    ]));

    let mut a: Value =
        serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let mut b: Value =
        serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    // Only the sequence label may differ between the two runs.
    a.as_object_mut().unwrap().remove("sequence");
    b.as_object_mut().unwrap().remove("sequence");
    assert_eq!(a, b);
}

#[test]
fn classify_flags_the_harmonic_borderline() {
    let out = run(&["classify", "--family", "harmonic", "--class", "s"]);
    let v = json_of(&out);
    assert_eq!(v["verdict"], "nonmember");
    assert_eq!(v["anchor"], "short_range_integrability");
    // The divergence is logarithmic: decade increments stay flat.
    let spread = v["witness"]["late_increment_spread"].as_f64().unwrap();
    assert!(spread < 1.15, "spread {spread}");
}

#[test]
fn counterexample_verifies_the_construction() {
    let out = run(&["counterexample", "--pmax", "3", "--horizon", "16384"]);
    let v = json_of(&out);
    assert_eq!(v["anchor"], "alternating_block_construction");
    let ver = &v["verification"];
    assert_eq!(ver["alternating_bound_ok"], true);
    assert_eq!(ver["linear_bound_ok"], true);
    assert_eq!(ver["quadratic_bound_ok"], true);
    assert_eq!(ver["linear_bound"].as_f64().unwrap(), 1.5);
    assert_eq!(ver["quadratic_bound"].as_f64().unwrap(), 4.5);
    for w in ver["window_sums"].as_array().unwrap() {
        assert_eq!(w["dominated"], true, "p = {}", w["p"]);
    }
    assert_eq!(v["potential_class"]["verdict"], "member");
    assert_eq!(v["l1_difference"].as_array().unwrap().len(), 3);
}

// ---------------------------------------------------------------------------
// Probe commands
// ---------------------------------------------------------------------------

#[test]
fn edge_locates_the_boundary_mode() {
    // The uppercase alias --N matches the documented invocation style.
    let out = run(&["edge", "--alpha", "0.5", "--a", "1", "--b", "2", "--N", "400"]);
    let v = json_of(&out);
    assert!((v["lambda"].as_f64().unwrap() + 0.5).abs() <= 1e-8);
    assert!((v["decay_ratio"].as_f64().unwrap() - 0.5).abs() <= 1e-3);
    assert_eq!(v["stable"], true);
}

#[test]
fn edge_rejects_dominant_near_coupling() {
    let out = run(&["edge", "--alpha", "0.5", "--a", "2", "--b", "1", "--n", "100"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("|b|"), "{}", stderr_of(&out));
}

#[test]
fn eigs_emits_the_pinned_header_and_no_stable_rows() {
    let out = run(&[
        "eigs", "--alpha", "1", "--a", "1", "--b", "-1", "--sizes", "40,80",
        "--window", "-0.9", "0.9",
    ]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(EIG_CSV_HEADER));
    for line in lines {
        assert!(!line.split(',').nth(1).unwrap().starts_with("true"), "{line}");
    }
}

#[test]
fn lap_grid_has_one_row_per_cell_and_respects_the_trivial_bound() {
    let out = run(&[
        "lap", "--alpha", "1", "--a", "1", "--b", "-1", "--n", "250",
        "--x", "1.5,0.0", "--eps", "0.1,0.03",
    ]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(LAP_CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4, "{text}");
    for row in rows {
        let cells: Vec<f64> = row
            .split(',')
            .take(6)
            .map(|c| c.parse().unwrap_or(f64::NAN))
            .collect();
        let (eps, norm) = (cells[1], cells[4]);
        assert!(norm <= 1.0 / eps + 1e-12, "{row}");
    }
}

#[test]
fn lap_json_carries_the_plateau_analysis() {
    let out = run(&[
        "lap", "--alpha", "1", "--a", "1", "--b", "-1", "--n", "250",
        "--x", "1.5", "--eps", "0.1,0.03", "--format", "json",
    ]);
    let v = json_of(&out);
    assert_eq!(v["anchor"], "weighted_resolvent_boundary_values");
    assert_eq!(v["points"].as_array().unwrap().len(), 1);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn lap_rejects_unresolvable_grids() {
    let out = run(&["lap", "--n", "20", "--x", "1.5", "--eps", "0.01,0.001"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("coarse"), "{}", stderr_of(&out));
}

// ---------------------------------------------------------------------------
// Process-level behavior
// ---------------------------------------------------------------------------

#[test]
fn threads_flag_is_honored() {
    let out = run(&["--threads", "2", "bands", "--alpha", "0", "--a", "1", "--b", "1"]);
    assert!(out.status.success());
}

#[test]
fn help_exits_zero_and_unknown_flags_exit_one() {
    let help = run(&["--help"]);
    assert_eq!(exit_code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("mourre-lab"));

    let bogus = run(&["bands", "--no-such-flag"]);
    assert_eq!(exit_code(&bogus), 1);

    let missing = run(&[]);
    assert_eq!(exit_code(&missing), 1);
}
