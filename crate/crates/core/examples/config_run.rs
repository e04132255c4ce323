//! Drive a full scenario from a config file, as the `psystem` binary does.
//!
//! cargo run --release --example config_run [config.toml] [out_dir]

use std::path::{Path, PathBuf};

use psystem::config::parse_config;
use psystem::orchestrate::{orchestrate, Task};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/simple_wave.toml"));
    let cfg = parse_config(&std::fs::read_to_string(&config)?)?;
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let base = config.parent().unwrap_or(Path::new("."));

    let outcome = orchestrate(&cfg, Task::Riccati, &out, base)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    let m = &outcome.manifest;
    println!("{} artifacts under {}", m.artifacts.len(), out.display());
    if let (Some(t), Some(p)) = (m.blowup_time, m.predicted_blowup) {
        println!("observed {t:.4}, predicted {p:.4}");
    }
    Ok(())
}
