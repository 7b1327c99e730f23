use std::path::Path;
use std::process::{Command, Output};

fn ofw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofw")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const BASE: &str = r#"
seed = 3
horizons = [50]

[[scenario]]
id = "s"
set = { kind = "ball", dimension = 2, radius = 1.0 }
stream = { family = "drifting-quadratic", alpha = 1.0, center = [0.3, 0.0], schedule = { kind = "random-walk", magnitude = 0.01 } }

[[scenario.learner]]
id = "ls"
kind = "ofw-linesearch"
"#;

#[test]
fn run_writes_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", BASE);
    let out = ofw(&["run", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("scenario,learner,T,seed,regret"));
    assert!(lines.next().unwrap().starts_with("s,ls,50,3,"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let boxed = BASE
        .replace(r#"{ kind = "ball", dimension = 2, radius = 1.0 }"#, r#"{ kind = "box", lower = [-1.0, -1.0], upper = [1.0, 1.0] }"#)
        .replace("id = \"s\"", "id = \"s\"\ntheorems = [\"thm3\"]");
    let cfg = write(dir.path(), "box.toml", &boxed);
    let out = ofw(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("scenario[0].set"), "{err}");

    let cfg = write(dir.path(), "unknown.toml", &BASE.replace("seed = 3", "seed = 3\nspeed = 4"));
    assert_eq!(ofw(&["run", &cfg]).status.code(), Some(1));
    assert_eq!(ofw(&["run", "/nonexistent/config.toml"]).status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_three_and_keep_other_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{BASE}\n[[scenario]]\nid = \"t\"\nset = {{ kind = \"ball\", dimension = 2, radius = 1.0 }}\n\
         stream = {{ family = \"drifting-quadratic\", alpha = 1.0, center = [0.45, 0.0], interior_radius = 0.5, schedule = {{ kind = \"sinusoid\", magnitude = 0.3, period = 8 }} }}\n\n\
         [[scenario.learner]]\nid = \"ls\"\nkind = \"ofw-linesearch\"\n"
    );
    let cfg = write(dir.path(), "c.toml", &text);
    let csv = dir.path().join("out.csv");
    let out = ofw(&["run", &cfg, "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let rows = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("s,ls,50,3,0."));
    assert!(lines[2].starts_with("t,ls,50,0,,"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("FAILED"));
}

#[test]
fn verify_passes_on_shipped_config() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/plateau.toml");
    let out = ofw(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_overrides_horizons_and_fits_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", BASE);
    let out = ofw(&["sweep", &cfg, "--horizons", "10,100,1000"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(String::from_utf8(out.stderr).unwrap().contains("exponent="));
    assert_eq!(ofw(&["sweep", &cfg, "--horizons", "10,10"]).status.code(), Some(1));
}

#[test]
fn selftest_reports_every_suite() {
    let out = ofw(&["selftest", "--samples", "300"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("pass ")).count(), 6);
}

#[test]
fn json_output_matches_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", BASE);
    let (csv, json) = (dir.path().join("o.csv"), dir.path().join("o.json"));
    let out = ofw(&["run", &cfg, "--csv", csv.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert!(out.status.success());
    let a = ofw_core::harness::read_csv(&csv).unwrap();
    let b = ofw_core::harness::read_json(&json).unwrap();
    assert_eq!(a, b);
}
