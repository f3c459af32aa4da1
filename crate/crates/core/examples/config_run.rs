//! A configured run on disk: resolve a TOML config with overrides, write the
//! run directory, then verify it from the files alone.
//!
//! ```text
//! cargo run --release --example config_run
//! ```

use boussinesq::experiments::config::parse_with_overrides;
use boussinesq::experiments::{execute_run, verify_run, RunConfig};

const CONFIG: &str = include_str!("../configs/variable_laws.toml");

pub fn run_example() -> boussinesq::Result<bool> {
    let dir = std::env::temp_dir().join(format!("config_run_{}", std::process::id()));
    let overrides = [
        format!("output_dir=\"{}\"", dir.display()),
        "grid.n=32".to_string(),
        "stepper.t_end=0.2".to_string(),
    ];
    let cfg: RunConfig = parse_with_overrides(CONFIG, &overrides)?;
    cfg.validate()?;
    let out = execute_run(&cfg)?;
    println!("{} steps, config hash {}", out.meta.steps, &out.meta.config_hash[..16]);
    for s in &out.meta.snapshots {
        println!("  {} at t = {:.4}", s.file, s.t);
    }
    let report = verify_run(&dir)?;
    for e in report.estimates.iter().filter(|e| e.hard) {
        println!("  {:<26} {:.4e} ≤ {:.4e}: {}", e.name, e.lhs, e.rhs, e.pass);
    }
    println!("verified: {}", report.pass);
    std::fs::remove_dir_all(&dir)?;
    Ok(report.pass)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
