use std::process::Command;

fn covctl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_covctl"))
}

#[test]
fn gen_run_render_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc");
    let ok = covctl()
        .args(["gen", "--template", "convex", "--m", "3", "--count", "2", "--seed", "7", "--out"])
        .arg(&sc)
        .status()
        .unwrap();
    assert!(ok.success());
    let report = dir.path().join("report.json");
    let ok = covctl()
        .arg("run")
        .arg(&sc)
        .args(["--epsilon0", "auto", "--factor", "2", "--out"])
        .arg(&report)
        .status()
        .unwrap();
    assert!(ok.success());
    let out = dir.path().join("out");
    let ok = covctl()
        .arg("render")
        .arg(&report)
        .arg("--out")
        .arg(&out)
        .args(["--format", "csv,svg"])
        .status()
        .unwrap();
    assert!(ok.success());
    assert!(out.join("report.csv").exists());
    assert!(out.join("convex-7.svg").exists());
}

#[test]
fn bad_inputs_fail_cleanly() {
    let out = covctl().args(["gen", "--factor", "3", "--out", "x"]).output().unwrap();
    assert!(!out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"id": "x"}"#).unwrap();
    let out = covctl().arg("run").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains('m'));
}
