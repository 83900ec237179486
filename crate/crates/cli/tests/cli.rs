use std::fs;
use std::path::Path;
use std::process::Command;

fn run(dir: &Path, command: &str, config: &str) -> (i32, String) {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mhdlab"))
        .args([command, "--config"])
        .arg(&path)
        .output()
        .expect("binary runs");
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    (out.status.code().expect("exit code"), stderr)
}

const ODE: &str = r#"
output_dir = "out"

[experiment]
kind = "ode-bound"
eps = [0.5]
c1 = [0.5]
m1 = [1.0]
m2 = [0.0, 1.0]
"#;

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stderr) = run(tmp.path(), "ode-bound", ODE);
    assert_eq!(code, 0, "{stderr}");
    let out = tmp.path().join("out");
    for f in ["report.json", "summary.txt", "ode_grid.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["kind"], "ode-bound");
    assert_eq!(report["passed"], true);
    // defaults are resolved into the stored config
    assert_eq!(report["config"]["experiment"]["horizon_fraction"], 0.9);
}

#[test]
fn failed_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let config = r#"
output_dir = "out"

[experiment]
kind = "counterexample"
t_mins = [1e-3, 1e-5]
sum_points = [1000]
growth_factor = 1000.0
"#;
    let (code, stderr) = run(tmp.path(), "counterexample", config);
    assert_eq!(code, 1, "{stderr}");
    let summary = fs::read_to_string(tmp.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("FAIL"), "{summary}");
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();

    let (code, stderr) = run(tmp.path(), "heat-verify", ODE);
    assert_eq!(code, 2);
    assert!(stderr.contains("ode-bound"), "{stderr}");

    let unknown = ODE.replace("m1 = [1.0]", "m1 = [1.0]\nbogus = 1");
    let (code, stderr) = run(tmp.path(), "ode-bound", &unknown);
    assert_eq!(code, 2);
    assert!(stderr.contains("bogus"), "{stderr}");

    let bad_eps = ODE.replace("eps = [0.5]", "eps = [1.5]");
    let (code, stderr) = run(tmp.path(), "ode-bound", &bad_eps);
    assert_eq!(code, 2);
    assert!(stderr.contains("eps"), "{stderr}");
}
