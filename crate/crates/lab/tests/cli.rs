use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ma_lab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ma-lab"));
    cmd.args(args).env_remove("MA_LAB_OUT");
    if let Some(dir) = env_out {
        cmd.env("MA_LAB_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = ma_lab(&["solve-ma", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("solve_ma: pass"));
    for f in ["report.json", "convergence.csv", "newton.csv", "field.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let r = report(&out);
    assert_eq!(r["id"], "solve_ma");
    assert!(r["assertions"].as_array().unwrap().iter().all(|a| a["pass"] == true));
}

#[test]
fn invalid_config_exits_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "experiment = solve_ma\n\n[density]\neps = -0.1\n");
    let o = ma_lab(&["solve-ma", "--config", &cfg, "--out", tmp.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("density.eps") && err.contains("line 4"), "{err}");

    let o = ma_lab(&["solve-ma", "--spacing", "-1"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = ma_lab(&["stability", "--only", "solve_ma"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn planted_failure_exits_one_and_names_the_inequality() {
    // Above one half the contact-set defect saturates at one for every eps,
    // so the strict decrease in eps cannot hold.
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "planted.toml",
        "experiment = contact_set\n\n[grid]\nspacings = [0.0625]\n\n[sweep]\nsigma = 0.6\n",
    );
    let out = tmp.path().join("out");
    let o = ma_lab(&["stability", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("failed: defect decreasing with eps"), "{err}");
    let failed: Vec<String> = report(&out)["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["pass"] == false)
        .map(|a| format!("{} {} {}", a["name"], a["relation"], a["rhs"]))
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().any(|f| f.contains("defect decreasing with eps")), "{failed:?}");
}

#[test]
fn runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let mut texts = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let o = ma_lab(&["goodsets", "--spacing", "0.0625", "--out", out.to_str().unwrap()], None);
        assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
        let mut files: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        assert!(!files.is_empty());
        texts.push(files.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn environment_sets_the_output_directory() {
    let tmp = TempDir::new().unwrap();
    let env_dir = tmp.path().join("from-env");
    let o = ma_lab(&["geometric-iteration-is-not-a-command"], Some(&env_dir));
    assert_eq!(o.status.code(), Some(2));

    let cfg = write(
        tmp.path(),
        "cfg.toml",
        &format!(
            "experiment = geometric_iteration\n\n[output]\ndir = \"{}\"\n",
            tmp.path().join("from-config").display()
        ),
    );
    let o = ma_lab(&["stability", "--config", &cfg], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.join("report.json").is_file());
    assert!(!tmp.path().join("from-config").exists());

    let flag_dir = tmp.path().join("from-flag");
    let o = ma_lab(&["stability", "--config", &cfg, "--out", flag_dir.to_str().unwrap()], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.join("report.json").is_file());

    let o = ma_lab(&["stability", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("from-config").join("report.json").is_file());
}
