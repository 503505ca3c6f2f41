use std::process::Command;

fn walkrange(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_walkrange")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn pascal_passes_with_csv_on_stdout() {
    let (code, stdout, stderr) = walkrange(&["verify", "pascal", "--pmf", "srw:1", "--phi", "alternating:10"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.starts_with("n,Wtilde_phi,Wtilde_0,margin,verdict"));
    assert_eq!(stdout.lines().count(), 12);
    assert!(stderr.contains("PASS"));
}

#[test]
fn moreau_conditions_fail_for_srw() {
    let (code, _, stderr) = walkrange(&["verify", "conditions", "--pmf", "srw:1", "--mode", "moreau"]);
    assert_eq!(code, 1, "{stderr}");
}

#[test]
fn invalid_inputs_exit_two() {
    let (code, _, _) = walkrange(&["coupling", "run", "--x", "2,0", "--n", "3", "--reps", "10"]);
    assert_eq!(code, 2);
    let (code, _, _) = walkrange(&["verify", "pascal", "--pmf", "nonsense", "--phi", "zero:3"]);
    assert_eq!(code, 2);
    let (code, _, _) = walkrange(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn out_dir_gets_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, stdout, stderr) = walkrange(&[
        "--seed",
        "9",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
        "coupling",
        "oracle",
        "--x",
        "3",
        "--n",
        "5",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(!stdout.is_empty());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["manifest"]["seed"], 9);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["pass"], true);
}

#[test]
fn seeded_runs_repeat() {
    let args = ["--seed", "4", "range", "mc", "--pmf", "srw:1", "--f", "zero:8", "--n", "8", "--reps", "500"];
    let a = walkrange(&args);
    let b = walkrange(&args);
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a.1, b.1);
}

#[test]
fn trap_config_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traps.toml");
    std::fs::write(
        &path,
        "dim = 1\npmf = \"srw:1\"\nhorizon = 1.0\nwindow = 10\nreps = 200\nseed = 3\nparticle = \"fixed\"\n\n[holding]\nlaw = \"exponential\"\nrate = 1.0\n",
    )
    .unwrap();
    let (code, stdout, stderr) = walkrange(&["trap", "simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert!(!stdout.is_empty());
}
