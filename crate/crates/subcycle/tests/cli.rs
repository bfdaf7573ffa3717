use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CHEAP: &str = r#"{
  "scenario": "reconstruct",
  "grid": {"n_freq": 200},
  "gate": {"t_d_step_fs": 1.0},
  "phase_space": {"points": 81},
  "reconstruction": {"radon_phases": 32, "samples_per_phase": 2000}
}"#;

fn subcycle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subcycle")).args(args).output().expect("spawn subcycle")
}

fn run_cheap(dir: &Path, out: &str, seed: &str) -> Output {
    let cfg = dir.join("cheap.json");
    fs::write(&cfg, CHEAP).unwrap();
    subcycle(&["--threads", "1", "run", "--config", cfg.to_str().unwrap(), "--out", dir.join(out).to_str().unwrap(), "--seed", seed])
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn same_config_and_seed_give_identical_bundles() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_cheap(tmp.path(), "a", "7").status.success());
    assert!(run_cheap(tmp.path(), "b", "7").status.success());
    assert!(run_cheap(tmp.path(), "c", "8").status.success());
    let a = read_tree(&tmp.path().join("a"));
    assert!(a.iter().any(|(n, _)| n == "manifest.json"));
    assert!(a.iter().any(|(n, _)| n.ends_with(".svg")));
    assert_eq!(a, read_tree(&tmp.path().join("b")));
    assert_ne!(a, read_tree(&tmp.path().join("c")), "sampled columns should depend on the seed");
}

#[test]
fn tampered_csv_fails_its_criterion() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_cheap(tmp.path(), "b", "1").status.success());
    let bundle = tmp.path().join("b");
    let clean = subcycle(&["compare", bundle.to_str().unwrap()]);
    assert_eq!(clean.status.code(), Some(0));

    let path = bundle.join("radon.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[1].split(',').map(String::from).collect();
    cells[2] = "0.5".into();
    lines[1] = cells.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();

    let out = subcycle(&["compare", bundle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("criterion 9: FAIL")), "{stdout}");
    let report: serde_json::Value = serde_json::from_slice(&fs::read(bundle.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert!(report["modified_files"].as_array().unwrap().iter().any(|f| f.as_str().unwrap().ends_with("radon.csv")));
}

#[test]
fn empty_bundle_is_a_missing_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = subcycle(&["compare", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}

#[test]
fn bad_config_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"scenario": "squeezed", "gate": {"delta_p_fs": -1.0}}"#).unwrap();
    let out = subcycle(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());

    fs::write(&cfg, "{not json").unwrap();
    assert_eq!(subcycle(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(subcycle(&["run", "--scenario", "nonsense"]).status.code(), Some(2));
}

#[test]
fn lists_every_scenario() {
    let out = subcycle(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["squeezed", "subtracted", "single-photon", "eos", "reconstruct", "extract-mode"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing from\n{text}");
    }
}
