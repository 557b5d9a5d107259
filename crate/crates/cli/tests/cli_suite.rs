//! End-to-end runs of the kirchhoff binary: the documented reference
//! invocations, exit-code contract, byte-level reproducibility, configuration
//! precedence, and the falsification pathway.

use std::fs;
use std::path::Path;
use std::process::Command;

fn kirchhoff(args: &[&str], envs: &[(&str, &str)], cwd: &Path) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kirchhoff"));
    cmd.args(args).current_dir(cwd).env_remove("KIRCHHOFF_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary must launch");
    (
        out.status.code().expect("no exit code"),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_json(dir: &Path, name: &str) -> serde_json::Value {
    let raw = fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing artifact {name}: {e}"));
    serde_json::from_str(&raw).unwrap_or_else(|e| panic!("unparsable {name}: {e}"))
}

#[test]
fn the_reference_ground_state_run_reports_the_closed_form_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gs");
    let (code, stdout, _) = kirchhoff(
        &["ground-state", "--N", "1", "--p", "3", "--f-inf", "1", "--out", out.to_str().unwrap()],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("w0"), "stdout: {stdout}");

    let doc = read_json(&out, "ground_state_summary.json");
    let w0 = doc["w0"].as_f64().unwrap();
    let h1 = doc["h1_sq"].as_f64().unwrap();
    assert!((w0 - 1.5).abs() < 1e-8, "w0 = {w0}");
    assert!((h1 - 7.2).abs() / 7.2 < 1e-5, "h1_sq = {h1}");
    assert!(out.join("ground_state_profile.csv").exists());
}

#[test]
fn supercritical_exponents_are_rejected_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let (code, _, stderr) = kirchhoff(
        &["ground-state", "--N", "4", "--p", "5", "--out", out.to_str().unwrap()],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");
    // invalid input must not leave artifacts behind
    let leftovers: Vec<_> = fs::read_dir(&out).map(|d| d.count()).ok().into_iter().collect();
    assert!(leftovers.is_empty() || leftovers == vec![0], "unexpected artifacts: {leftovers:?}");
}

#[test]
fn malformed_coupling_grids_are_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    for bad in ["log:0:1:5", "geom:1:2:4", "lin:3:1:4", "lin:1:2:1"] {
        let (code, _, stderr) = kirchhoff(
            &["branch", "--N", "4", "--p", "3", "--a-grid", bad, "--out", "o"],
            &[],
            tmp.path(),
        );
        assert_eq!(code, 2, "grid {bad}: stderr {stderr}");
    }
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let reruns: [&[&str]; 3] = [
        &["ground-state", "--N", "3", "--p", "3"],
        &["fibering", "--N", "3", "--p", "3", "--a", "0.01", "--seed", "11", "--count", "40"],
        &["branch", "--N", "4", "--p", "3", "--a-grid", "log:1e-4:2e-3:5"],
    ];
    for (i, args) in reruns.iter().enumerate() {
        let d1 = tmp.path().join(format!("first{i}"));
        let d2 = tmp.path().join(format!("second{i}"));
        for d in [&d1, &d2] {
            let mut full = args.to_vec();
            full.extend(["--out", d.to_str().unwrap()]);
            let (code, _, stderr) = kirchhoff(&full, &[], tmp.path());
            assert_eq!(code, 0, "{args:?}: {stderr}");
        }
        let mut names: Vec<String> = fs::read_dir(&d1)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let b1 = fs::read(d1.join(&name)).unwrap();
            let b2 = fs::read(d2.join(&name)).unwrap();
            assert_eq!(b1, b2, "{name} differs between identical runs of {args:?}");
        }
    }
}

#[test]
fn the_landscape_table_prints_the_qualitative_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("tab");
    let (code, stdout, stderr) = kirchhoff(
        &[
            "table", "--N", "5", "--p", "2.5", "--a-grid", "log:1e-3:1:25", "--out",
            out.to_str().unwrap(),
        ],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("N >= 5: Two solutions / No solution"), "stdout: {stdout}");
    assert!(stdout.contains("N = 4: One solution / No solution"), "stdout: {stdout}");
    assert!(stdout.contains("N = 1,2,3: One solution / -"), "stdout: {stdout}");

    let doc = read_json(&out, "tables.json");
    assert!(doc["tables"]["all_pass"].as_bool().unwrap());
    assert_eq!(doc["branch_counts"].as_array().unwrap().len(), 25);

    // the csv carries one line per cell under a fixed header
    let csv = fs::read_to_string(out.join("tables.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "table,row,column,entry,computed,witness,pass");
    assert_eq!(lines.count(), 18);
}

#[test]
fn the_nonexistence_probe_reports_no_solution_above_the_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("probe");
    let (code, stdout, stderr) = kirchhoff(
        &[
            "probe", "--theorem", "t0-2", "--N", "4", "--p", "3", "--a", "auto", "--out",
            out.to_str().unwrap(),
        ],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("NO_SOLUTION"), "stdout: {stdout}");
    let doc = read_json(&out, "probe_report.json");
    assert_eq!(doc["report"]["verdict"], "NO_SOLUTION");
    assert!(doc["a_effective"].as_f64().unwrap() > 0.0);
}

#[test]
fn zero_coupling_fibering_keeps_the_single_semilinear_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fib");
    let (code, stdout, stderr) = kirchhoff(
        &[
            "fibering", "--from-ground-state", "--N", "3", "--p", "3", "--a", "0", "--out",
            out.to_str().unwrap(),
        ],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("t_minus"), "stdout: {stdout}");

    let doc = read_json(&out, "fibering_report.json");
    let t_minus = doc["report"]["t_minus"].as_f64().unwrap();
    assert!((t_minus - 1.0).abs() < 1e-6, "t_minus = {t_minus}");
    assert!(doc["report"]["t_plus"].is_null(), "a = 0 admits exactly one critical point");
    assert!(!doc["report"]["tangent"].as_bool().unwrap());
}

#[test]
fn config_file_entries_yield_to_explicit_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "# threshold run\nN=5\np=2.6\nb=1.0\n").unwrap();
    let out = tmp.path().join("th");
    let (code, _, stderr) = kirchhoff(
        &[
            "thresholds", "--config", cfg.to_str().unwrap(), "--p", "2.5", "--out",
            out.to_str().unwrap(),
        ],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    let doc = read_json(&out, "thresholds.json");
    // N only in the file, p overridden on the command line
    assert_eq!(doc["thresholds"]["n"].as_u64().unwrap(), 5);
    assert_eq!(doc["thresholds"]["p"].as_f64().unwrap(), 2.5);
    assert_eq!(doc["run"]["p"], "2.5");
    assert_eq!(doc["run"]["N"], "5");
}

#[test]
fn the_environment_variable_supplies_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let envdir = tmp.path().join("from-env");
    let (code, _, stderr) = kirchhoff(
        &["ground-state", "--N", "1", "--p", "3"],
        &[("KIRCHHOFF_OUT", envdir.to_str().unwrap())],
        tmp.path(),
    );
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(envdir.join("ground_state_summary.json").exists());
}

#[test]
fn format_selection_controls_which_artifacts_appear() {
    let tmp = tempfile::tempdir().unwrap();
    let jdir = tmp.path().join("json-only");
    let cdir = tmp.path().join("csv-only");
    kirchhoff(
        &["ground-state", "--N", "1", "--p", "3", "--format", "json", "--out",
          jdir.to_str().unwrap()],
        &[],
        tmp.path(),
    );
    kirchhoff(
        &["ground-state", "--N", "1", "--p", "3", "--format", "csv", "--out",
          cdir.to_str().unwrap()],
        &[],
        tmp.path(),
    );
    assert!(jdir.join("ground_state_summary.json").exists());
    assert!(!jdir.join("ground_state_profile.csv").exists());
    assert!(cdir.join("ground_state_profile.csv").exists());
    assert!(!cdir.join("ground_state_summary.json").exists());
}

#[test]
fn falsified_assertions_exit_4_and_leave_a_record() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fals");
    let (code, _, stderr) = kirchhoff(
        &[
            "pohozaev", "--N", "3", "--p", "3", "--a", "auto", "--tol", "1e-30", "--out",
            out.to_str().unwrap(),
        ],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 4, "stderr: {stderr}");
    assert!(stderr.contains("falsified"), "stderr: {stderr}");

    let record = read_json(&out, "falsification.json");
    assert_eq!(record["command"], "pohozaev");
    assert!(!record["artifacts"].as_array().unwrap().is_empty());
    // the artifacts named in the record were actually written
    for name in record["artifacts"].as_array().unwrap() {
        assert!(out.join(name.as_str().unwrap()).exists(), "missing {name}");
    }
}

#[test]
fn probe_rejects_unknown_theorem_tags() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, stderr) = kirchhoff(
        &["probe", "--theorem", "t9", "--N", "3", "--p", "3", "--a", "auto", "--out", "o"],
        &[],
        tmp.path(),
    );
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("t9"), "stderr: {stderr}");
}
