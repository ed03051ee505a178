use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infomenu"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, body).unwrap();
    path
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse::<f64>().unwrap()).collect())
        .collect()
}

#[test]
fn gain_curve_has_one_row_per_grid_point_and_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gain.csv");
    let status = run(&["gain-curve", "--I", "-1,0,1", "--grid", "501", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1504);
    assert!(text.lines().any(|l| l == "5.0000000000000000e-1,0.0000000000000000e0,5.0000000000000000e-1"));
    for row in rows(&out) {
        assert!(row[2] <= 0.5 + 1e-15);
    }
}

#[test]
fn out_of_range_informativeness_is_a_usage_error() {
    let output = run(&["gain-curve", "--I", "2"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("outside [-1, 1]"));
}

#[test]
fn invalid_prior_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[game]\ntau = 0.5\nseller_belief = 0.5\n[buyer.binary]\nv_low = 0.2\nv_high = 0.8\nphi = 1.5\n",
    );
    let output = run(&["binary", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!dir.path().join("menu.json").exists());
}

#[test]
fn irregular_distribution_names_the_offending_point() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "continuous",
        "--config",
        example("bimodal.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("v_b ="), "{stderr}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn congruent_example_writes_menu_and_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "binary",
        "--config",
        example("congruent.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--grid",
        "11",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let menu: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("menu.json")).unwrap()).unwrap();
    for key in ["I_low", "I_high", "t_low", "t_high", "profit"] {
        assert!(menu[key].is_number(), "{key}");
    }
    let grid = fs::read_to_string(dir.path().join("boundary_grid.csv")).unwrap();
    assert_eq!(grid.lines().next().unwrap(), "phi,v_s,tau,I_low,I_high,t_low,t_high,profit,regime");
    assert_eq!(grid.lines().count(), 1 + 3 * 11 * 11);
    assert!(dir.path().join("boundaries.csv").exists());
}

#[test]
fn uniform_step_menu_has_quartile_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "continuous",
        "--config",
        example("step_menu.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    for row in rows(&dir.path().join("menu_frac0.csv")) {
        let (v, i, t) = (row[0], row[1], row[2]);
        if v < 0.25 {
            assert_eq!((i, t), (-1.0, 0.0));
        } else if v > 0.75 {
            assert_eq!((i, t), (1.0, 0.0));
        } else if v > 0.25 && v < 0.75 {
            assert_eq!(i, 0.0);
            assert!((t - 0.25).abs() < 1e-12);
        }
    }
    for row in rows(&dir.path().join("menu_frac1.csv")) {
        assert_eq!(row[2], 0.0);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let output = run(&[
            "continuous",
            "--config",
            example("profits.toml").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    for name in ["profits.csv", "menu.csv", "virtual_values.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn verify_passes_on_examples() {
    for name in ["congruent.toml", "noncongruent.toml", "step_menu.toml", "regular_normal.toml"] {
        let output = run(&["verify", "--config", example(name).to_str().unwrap(), "--samples", "100000"]);
        assert_eq!(output.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&output.stdout));
        for line in String::from_utf8_lossy(&output.stdout).lines().filter(|l| l.starts_with('{')) {
            let report: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(report["pass"].as_bool().unwrap() || report["informational"].as_bool() == Some(true), "{line}");
        }
    }
}

#[test]
fn verify_catches_corrupted_transfer() {
    let output = run(&["verify", "--config", example("corrupted.toml").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let failed: Vec<String> = String::from_utf8_lossy(&output.stdout)
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|r| r["pass"] == false)
        .map(|r| r["quantity"].as_str().unwrap().to_string())
        .collect();
    assert!(failed.iter().any(|q| q == "envelope"), "{failed:?}");
}

#[test]
fn irregular_sweep_point_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[game]\ntau = 0.6\nseller_belief = 0.2\n[buyer.continuous]\nfamily = \"truncated_normal\"\nmean = 0.4\nsd = 0.6\n\
         [[sweep]]\naxis = \"tau\"\nfrom = 0.0\nto = 3.0\nsteps = 7\n",
    );
    let out = dir.path().join("out");
    let output = run(&["continuous", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().count() == 0);
}
