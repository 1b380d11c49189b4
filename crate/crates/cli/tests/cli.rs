use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("JACOBI_LAB_OUT")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn expand_writes_report_and_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(&["expand", "--alpha", "-0.3", "--beta", "0.4", "--preset", "bump", "--modes", "24"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("expand");
    let r = report(&dir);
    assert_eq!(r["pass"], true);
    assert_eq!(r["settings"]["run_config"]["alpha"], -0.3);
    assert_eq!(r["settings"]["run_config"]["samples"], 300);
    let csv = std::fs::read_to_string(dir.join("coefficients.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
    assert!(dir.join("config.toml").exists());
}

#[test]
fn p2_equivalence_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(&["equiv", "--p", "2", "--samples", "20", "--resolution", "64"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(report(&tmp.path().join("equiv"))["pass"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["gfunc", "--p", "3", "--samples", "16", "--resolution", "64", "--seed", "7"];
    assert_eq!(lab(&args, a.path()).status.code(), Some(0));
    assert_eq!(lab(&[&args[..], &["--sequential"]].concat(), b.path()).status.code(), Some(0));
    for file in ["report.json", "ratios.csv"] {
        let x = std::fs::read(a.path().join("gfunc").join(file)).unwrap();
        let y = std::fs::read(b.path().join("gfunc").join(file)).unwrap();
        if file == "report.json" {
            // The execution mode is part of the recorded config.
            let mut rx: serde_json::Value = serde_json::from_slice(&x).unwrap();
            let mut ry: serde_json::Value = serde_json::from_slice(&y).unwrap();
            rx["settings"]["run_config"]["sequential"] = true.into();
            ry["settings"]["run_config"]["sequential"] = true.into();
            assert_eq!(rx, ry);
        } else {
            assert_eq!(x, y, "{file} differs");
        }
    }
    let c = tempfile::tempdir().unwrap();
    assert_eq!(lab(&args, c.path()).status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.path().join("gfunc/report.json")).unwrap(),
        std::fs::read(c.path().join("gfunc/report.json")).unwrap()
    );
}

#[test]
fn unknown_suite_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(&["suite", "nightly"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nightly"));
}

#[test]
fn violated_preconditions_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["equiv", "--alpha", "-1.5"], tmp.path()).status.code(), Some(2));
    assert_eq!(lab(&["struct", "--case", "inclusion"], tmp.path()).status.code(), Some(2));
    assert_eq!(lab(&["expand", "--preset", "sawtooth"], tmp.path()).status.code(), Some(2));
    assert_eq!(lab(&["lemma36", "--xi", "-2"], tmp.path()).status.code(), Some(2));
    assert_eq!(lab(&["gfunc", "--bogus-flag"], tmp.path()).status.code(), Some(2));
}

#[test]
fn env_var_sets_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_jacobi-lab"))
        .args(["lemma36", "--eta", "3", "--gamma", "1"])
        .env("JACOBI_LAB_OUT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(&tmp.path().join("lemma36"));
    assert_eq!(r["settings"]["branch"], "power");
}

#[test]
fn config_file_is_read_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "experiment = \"lemma36\"\neta = 1.0\nxi = 0.0\ngamma = 0.5\n").unwrap();
    let out = lab(&["lemma36", "--config", cfg.to_str().unwrap(), "--gamma", "0.75"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("lemma36"));
    assert_eq!(r["settings"]["eta"], 1.0);
    assert_eq!(r["settings"]["gamma"], 0.75);

    let wrong = lab(&["poisson", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(wrong.status.code(), Some(2));
    std::fs::write(&cfg, "etaa = 1.0\n").unwrap();
    assert_eq!(lab(&["lemma36", "--config", cfg.to_str().unwrap()], tmp.path()).status.code(), Some(2));
}

#[test]
fn written_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["poisson", "--alpha", "0.5", "--modes", "12", "--seed", "3"], a.path()).status.code(), Some(0));
    let cfg = a.path().join("poisson/config.toml");
    assert_eq!(lab(&["poisson", "--config", cfg.to_str().unwrap()], b.path()).status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.path().join("poisson/report.json")).unwrap(),
        std::fs::read(b.path().join("poisson/report.json")).unwrap()
    );
}

#[test]
fn every_subcommand_documents_flags() {
    for sub in [
        "expand", "poisson", "gfunc", "caputo-oracle", "norms", "struct", "embed", "equiv", "schrodinger",
        "strichartz", "kernel-audit", "lemma36", "suite",
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_jacobi-lab")).args([sub, "--help"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("--out") && text.contains("--config"), "{sub}: {text}");
    }
}
