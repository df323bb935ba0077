use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use magnon_hom::cli::{parse_scenario, render_scenario};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_magnon-hom");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env_remove("MAGNON_HOM_OUT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bundled_scenarios_validate() {
    let tmp = TempDir::new().unwrap();
    for name in ["rabi", "tbs-single", "hom", "phase-scan", "evolve"] {
        let out = run(&["validate", scenario(name).to_str().unwrap()], tmp.path());
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn scenario_round_trips_through_json() {
    for name in ["rabi", "tbs-single", "hom", "phase-scan", "evolve"] {
        let cfg = parse_scenario(&fs::read_to_string(scenario(name)).unwrap()).unwrap();
        assert_eq!(parse_scenario(&cfg.to_json()).unwrap(), cfg);
    }
}

#[test]
fn runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let path = scenario("hom");
    for dir in [&a, &b] {
        let out = run(
            &[
                "run",
                path.to_str().unwrap(),
                "--out-dir",
                dir.path().to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    for file in ["hom.trajectory.csv", "hom.summary.json", "hom.svg"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn trajectory_rows_sum_to_one() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        &[
            "run",
            scenario("tbs-single").to_str().unwrap(),
            "--out-dir",
            ".",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("tbs-single.trajectory.csv")).unwrap();
    for row in csv_rows(&text) {
        let total: f64 = row[1..7].iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn uncoupled_evolution_is_flat() {
    let tmp = TempDir::new().unwrap();
    let path = write(
        tmp.path(),
        "free.json",
        r#"{"kind": "evolve", "g_hz": 0, "outputs": ["csv"],
            "schedule": [{"omega1_hz": 5e9, "omega2_hz": 5.3e9, "duration_s": 4e-9}],
            "initial_state": [{"m1": 1, "m2": 0, "re": 0.6}, {"m1": 0, "m2": 1, "re": 0, "im": 0.8}]}"#,
    );
    let out = run(&["run", path.to_str().unwrap()], tmp.path());
    assert!(out.status.success());
    let rows = csv_rows(&fs::read_to_string(tmp.path().join("free.trajectory.csv")).unwrap());
    assert_eq!(rows.len(), 201);
    for row in &rows {
        assert!((row[2] - 0.36).abs() < 1e-14 && (row[3] - 0.64).abs() < 1e-14);
    }
    assert!(!tmp.path().join("free.summary.json").exists());
}

#[test]
fn scan_writes_one_row_per_point() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        &[
            "run",
            scenario("phase-scan").to_str().unwrap(),
            "--name",
            "s",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let rows = csv_rows(&fs::read_to_string(tmp.path().join("s.scan.csv")).unwrap());
    assert_eq!(rows.len(), 41);
    for (lo, hi) in rows.iter().zip(rows.iter().rev()) {
        assert!((lo[5] + hi[5]).abs() < 1e-9);
    }
    let svg = fs::read_to_string(tmp.path().join("s.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("phase (rad)"));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let tmp = TempDir::new().unwrap();
    let target = tmp.path().join("nested/out");
    let out = Command::new(BIN)
        .args(["run", scenario("rabi").to_str().unwrap()])
        .current_dir(tmp.path())
        .env("MAGNON_HOM_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(target.join("rabi.summary.json").exists());
}

#[test]
fn name_defaults_to_file_stem() {
    let tmp = TempDir::new().unwrap();
    let path = write(
        tmp.path(),
        "my-run.json",
        r#"{"kind": "tbs-single", "g_hz": 2e7, "outputs": ["json"]}"#,
    );
    assert!(run(&["run", path.to_str().unwrap()], tmp.path())
        .status
        .success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("my-run.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["name"], "my-run");
    assert!((summary["phi_rad"].as_f64().unwrap() + std::f64::consts::FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn overrides_take_precedence() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        &[
            "run",
            scenario("tbs-single").to_str().unwrap(),
            "--g-hz",
            "1e7",
            "--name",
            "slow",
            "--samples",
            "3",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("slow.summary.json")).unwrap())
            .unwrap();
    assert!((summary["tau_s"].as_f64().unwrap() - 12.5e-9).abs() < 1e-18);
}

#[test]
fn validation_failures_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("missing.json", r#"{"name": "x"}"#, "kind"),
        (
            "unknown.json",
            r#"{"kind": "hom", "g_hz": 2e7, "colour": 1}"#,
            "colour",
        ),
        (
            "band.json",
            r#"{"kind": "hom", "g_hz": 2e7, "delta_omega_hz": 5e7}"#,
            "2|g|",
        ),
        ("type.json", r#"{"kind": "rabi", "g_hz": "fast"}"#, "g_hz"),
    ];
    for (file, body, needle) in cases {
        let path = write(tmp.path(), file, body);
        let out = run(&["run", path.to_str().unwrap()], tmp.path());
        assert_eq!(out.status.code(), Some(1), "{file}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{file}: {err}");
        assert_eq!(
            fs::read_dir(tmp.path()).unwrap().count(),
            cases.iter().position(|c| c.0 == file).unwrap() + 1
        );
    }
    assert_eq!(run(&["run"], tmp.path()).status.code(), Some(1));
    assert_eq!(
        run(&["run", "nope.json"], tmp.path()).status.code(),
        Some(1)
    );
}

#[test]
fn unwritable_output_exits_two() {
    let tmp = TempDir::new().unwrap();
    let blocker = write(tmp.path(), "file", "");
    let out = run(
        &[
            "run",
            scenario("rabi").to_str().unwrap(),
            "--out-dir",
            blocker.join("sub").to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibrate_prints_pulse_length() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        &["calibrate", "--g-hz", "2e7", "--delta-omega-hz", "-4e7"],
        tmp.path(),
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["tau_s"].as_f64().unwrap() - 8.838834764831844e-9).abs() < 1e-18);
    assert!((v["p_max"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn help_explains_units() {
    let tmp = TempDir::new().unwrap();
    let out = run(&["--help"], tmp.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 pi"));
}

#[test]
fn rendering_is_deterministic_in_process() {
    for name in ["rabi", "tbs-single", "hom", "phase-scan", "evolve"] {
        let cfg = parse_scenario(&fs::read_to_string(scenario(name)).unwrap()).unwrap();
        assert_eq!(
            render_scenario(&cfg).unwrap(),
            render_scenario(&cfg).unwrap()
        );
    }
}
