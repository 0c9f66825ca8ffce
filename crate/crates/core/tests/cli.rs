//! End-to-end checks of the `noise-radar` binary and the sweep runner.

use std::path::Path;
use std::process::Command;

use noise_radar::correlation::{pipeline_kappa, quantum_advantage};
use noise_radar::runner::{check_config, run_sweep, OutputKind};
use noise_radar::sources::SourceKind;

const BIN: &str = env!("CARGO_BIN_EXE_noise-radar");

const CONFIG: &str = r#"{
  "schema_version": 1,
  "scenario": {"source": {"kind": "ccn", "N_S": 1.0, "xi": 0.5}, "eta": 0.01, "N_B": 1000},
  "sweep": {"variable": "N_S", "grid": {"log": {"start": 0.01, "stop": 100, "points": 9}}},
  "outputs": ["kappa", "advantage", "stein"],
  "stein": {"epsilon": 0.001, "M": 1000000},
  "output_path": "ignored"
}"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CONFIG);
    let out = Command::new(BIN).args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenario"]["G_I"], 1.0);
    assert_eq!(v["scenario"]["theta"], 0.0);
}

#[test]
fn validate_reports_paths_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bad = CONFIG.replace("\"eta\": 0.01", "\"eta\": 0.01, \"etta\": 1");
    let cfg = write(dir.path(), "c.json", &bad);
    let out = Command::new(BIN).args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scenario.etta"), "{err}");

    let infeasible = CONFIG.replace(r#""N_S": 1.0, "xi": 0.5"#, r#""N_S": 0.1, "xi": 0.5, "N_1": 0.2"#);
    let cfg = write(dir.path(), "d.json", &infeasible);
    let out = Command::new(BIN).args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N_0 > N_1"));
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CONFIG);
    for (out, threads) in [("a", "1"), ("b", "2")] {
        let st = Command::new(BIN)
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(st.success());
    }
    for f in ["kappa.csv", "advantage.csv", "stein.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a").join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["grid"].as_array().unwrap().len(), 9);
}

#[test]
fn rows_are_reproducible_from_the_library() {
    let cfg = check_config(CONFIG).unwrap();
    let out = run_sweep(&cfg, None).unwrap();
    let kappa = String::from_utf8(out.files[0].1.clone()).unwrap();
    let mut rdr = csv::Reader::from_reader(kappa.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let n_s: f64 = rec[0].parse().unwrap();
        let sc = cfg.scenario.with_source(cfg.scenario.source.with_kind(SourceKind::Tmsv));
        let mut sc = sc;
        sc.source.n_s = n_s;
        let k: f64 = rec[2].parse().unwrap();
        assert_eq!(k, pipeline_kappa(&sc).unwrap() / cfg.scenario.eta.sqrt());
        let q_a: f64 = rec[4].parse().unwrap();
        assert!((q_a - quantum_advantage(n_s, 0.5).unwrap()).abs() <= 1e-9 * q_a);
    }
}

#[test]
fn roc_verb_needs_detection_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CONFIG);
    let out = Command::new(BIN).args(["roc", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("detection"));
}

#[test]
fn seed_flag_overrides_config() {
    let text = r#"{
      "schema_version": 1,
      "scenario": {"source": {"kind": "tmsv", "N_S": 1.0}, "eta": 0.05, "N_B": 10},
      "outputs": ["roc"],
      "detection": {"M": 100, "p_fa_grid": [0.1, 0.5], "trials": 200, "seed": 1},
      "output_path": "ignored"
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", text);
    let run = |out: &str, seed: &str| {
        let st = Command::new(BIN)
            .args(["roc", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .args(["--seed", seed])
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read_to_string(dir.path().join(out).join("roc.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "2");
    let c = run("c", "1");
    assert_eq!(a, c);
    assert_ne!(a, b);
    assert!(a.starts_with("p_fa,p_d,stderr,source_kind,error\n"));
    for kind in ["tmsv-analytic", "tmsv-empirical", "ccn-analytic", "ccn-empirical"] {
        assert_eq!(a.lines().filter(|l| l.ends_with(&format!("{kind},"))).count(), 2, "{kind}");
    }
    // The library agrees with the file.
    let cfg = check_config(text).unwrap();
    let lib = run_sweep(&cfg, Some(OutputKind::Roc)).unwrap();
    assert_eq!(lib.files[0].1, a.into_bytes());
}

#[test]
fn stein_verb_writes_only_stein() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CONFIG);
    let st = Command::new(BIN).args(["stein", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).status().unwrap();
    assert!(st.success());
    let names: Vec<String> = std::fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"stein.csv".to_string()));
    assert!(!names.contains(&"kappa.csv".to_string()));
    let text = std::fs::read_to_string(dir.path().join("o").join("stein.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "M,exponent_tmsv,exponent_ccn,D,V,error");
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn shipped_configs_validate_and_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let cfg = check_config(&text).unwrap();
        let again = check_config(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
        n += 1;
    }
    assert!(n >= 4);
}
