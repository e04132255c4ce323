use std::path::{Path, PathBuf};
use std::process::Command;

use psystem::config::parse_config;
use psystem::evolution::StopReason;
use psystem::orchestrate::{orchestrate, sweep, Manifest, Task};

const BIN: &str = env!("CARGO_BIN_EXE_psystem");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

const CONSTANT: &str = r#"
[model]
name = "quadratic"

[data]
profile = "constant"
base = -1.0

[grid]
n_x = 16
t_max = 0.5

[diagnostics]
hamiltonian = ["drift"]
"#;

#[test]
fn shipped_configs_parse() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn manifest_round_trips_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(CONSTANT).unwrap();
    let out = orchestrate(&cfg, Task::Simulate, dir.path(), Path::new(".")).unwrap();
    assert_eq!(out.manifest.stop, StopReason::TimeLimit);
    assert!(out.manifest.f_drift.unwrap() < 1e-12);
    let back = Manifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(back, out.manifest);
    assert_eq!(back.config, cfg);
    assert_eq!(parse_config(&back.config.to_toml()).unwrap(), cfg);
    for a in &back.artifacts {
        assert!(dir.path().join(a).is_file(), "{a}");
    }
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical() {
    let text = std::fs::read_to_string(configs().join("cubic_beta.toml")).unwrap();
    let mut cfg = parse_config(&text).unwrap();
    cfg.grid.n_x = 64;
    cfg.diagnostics.seeds = 8;
    cfg.diagnostics.random_seeds = true;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    orchestrate(&cfg, Task::Characteristics, a.path(), Path::new(".")).unwrap();
    orchestrate(&cfg, Task::Characteristics, b.path(), Path::new(".")).unwrap();
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert!(ta.len() > 10);
    assert!(ta == tb);
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let text = std::fs::read_to_string(configs().join("amplitude_sweep.toml")).unwrap();
    let mut cfg = parse_config(&text).unwrap();
    cfg.grid.n_x = 64;
    cfg.diagnostics.seeds = 8;
    let dir = tempfile::tempdir().unwrap();
    let rows = sweep(&cfg, dir.path(), Path::new("."), 2).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(dir.path().join(&r.dir).join("manifest.json").is_file());
        assert_eq!(r.stop, StopReason::BlowUpSuspected);
    }
    // larger amplitude, earlier blow-up
    assert!(rows.windows(2).all(|w| w[1].t_end < w[0].t_end));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn blowup_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["riccati", "--config"])
        .arg(configs().join("simple_wave.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = Manifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.stop, StopReason::BlowUpSuspected);
    assert!(m.blowup_time.is_some() && m.predicted_blowup.is_some());
    assert!(String::from_utf8_lossy(&out.stdout).contains("riccati"));
}

#[test]
fn unwritable_output_is_an_error() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = cfg_dir.path().join("c.toml");
    std::fs::write(&cfg, CONSTANT).unwrap();
    let out = Command::new(BIN)
        .args(["simulate", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(file.path().join("sub"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains(&file.path().display().to_string()));
}

#[test]
fn bad_config_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, CONSTANT.replace("n_x = 16", "nx = 16\ncfl = -1.0")).unwrap();
    let out = Command::new(BIN).args(["verify", "--only", "2", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n_x"), "{err}");
    assert!(err.contains("cfl"), "{err}");
}

#[test]
fn verify_runs_selected_criteria() {
    let out = Command::new(BIN).args(["verify", "--only", "2,6"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
}
