//! Single runs on disk: `run` writes a run directory, `verify` re-reads it
//! and checks the a priori bounds, `analyze` reports norms of a snapshot.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::config::{config_hash, parse_with_overrides, to_toml, RunConfig};
use super::initial::{generate_scalar, generate_velocity};
use crate::diagnostics::{
    check_apriori_bounds, eta_equivalence_checks, eta_roundtrip_error, max_principle_probe, EnergyLedger,
    EstimateReport, OvershootReport,
};
use crate::error::{Error, Result};
use crate::laws::LawSummary;
use crate::lp::{decompose, DyadicFilterBank};
use crate::solver::{run_with_probes, SimState, Trajectory};
use crate::spectral::{Snapshot, VectorField};

pub const CONFIG_FILE: &str = "config.toml";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const META_FILE: &str = "meta.json";
pub const PROBES_FILE: &str = "probes.csv";
pub const REPORT_FILE: &str = "report.json";

/// Overshoot tolerance of the (soft) max-principle check.
pub const OVERSHOOT_TOL: f64 = 1e-2;
/// Round-trip tolerance of `A⁻¹∘A` in `L∞`.
pub const ROUNDTRIP_TOL: f64 = 1e-8;
/// Reference threshold for the final relative energy residuals.
pub const RESIDUAL_TOL: f64 = 1e-6;

pub fn snapshot_name(t: f64) -> String {
    format!("snap_{t:.6}.fld")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawsMeta {
    pub kappa: LawSummary,
    pub mu: LawSummary,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub laws: LawsMeta,
    pub exponents: (f64, f64),
    pub steps: usize,
    pub dt: Option<f64>,
    pub snapshots: Vec<SnapshotEntry>,
}

pub fn initial_state(cfg: &RunConfig) -> Result<SimState> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let physics = Arc::new(cfg.laws.build()?);
    let theta = generate_scalar(&cfg.initial.theta, grid, cfg.seed)?;
    let u = generate_velocity(&cfg.initial.u, grid, cfg.seed)?;
    SimState::new(theta, u, grid.default_cutoff(), physics)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub trajectory: Trajectory,
    pub meta: RunMeta,
}

/// Runs `cfg` and writes the resolved config, ledger, snapshots, probes and
/// metadata into `cfg.output_dir`.
pub fn execute_run(cfg: &RunConfig) -> Result<RunOutcome> {
    let state = initial_state(cfg)?;
    let probes = cfg.parsed_probes()?;
    let text = to_toml(cfg)?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(CONFIG_FILE), &text)?;
    let traj = run_with_probes(&state, &cfg.stepper, &probes, cfg.exponents)?;
    traj.ledger.write_csv(dir.join(LEDGER_FILE))?;
    let mut snapshots = Vec::with_capacity(traj.snapshots.len());
    for s in &traj.snapshots {
        let file = snapshot_name(s.time);
        Snapshot::from_state(&s.theta, &s.u).save(dir.join(&file))?;
        snapshots.push(SnapshotEntry { t: s.time, file });
    }
    if !probes.is_empty() {
        let mut w = csv::Writer::from_path(dir.join(PROBES_FILE))?;
        for r in &traj.probes {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    let meta = RunMeta {
        config_hash: config_hash(&text),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        laws: LawsMeta {
            kappa: state.physics.thermal_law().summary(),
            mu: state.physics.viscosity.summary(),
            beta: state.physics.beta,
        },
        exponents: cfg.exponents,
        steps: traj.steps,
        dt: traj.dt,
        snapshots,
    };
    fs::write(dir.join(META_FILE), serde_json::to_string_pretty(&meta)?)?;
    Ok(RunOutcome {
        dir,
        trajectory: traj,
        meta,
    })
}

/// Rebuilds the trajectory of a run directory from its files.
pub fn load_run(dir: &Path) -> Result<(RunConfig, RunMeta, Trajectory)> {
    let cfg: RunConfig = parse_with_overrides(&fs::read_to_string(dir.join(CONFIG_FILE))?, &[])?;
    let meta: RunMeta = serde_json::from_str(&fs::read_to_string(dir.join(META_FILE))?)?;
    let ledger = EnergyLedger::read_csv(dir.join(LEDGER_FILE), meta.exponents)?;
    let grid = cfg.grid.build()?;
    let physics = Arc::new(cfg.laws.build()?);
    let mut snapshots = Vec::with_capacity(meta.snapshots.len());
    for e in &meta.snapshots {
        let snap = Snapshot::load(dir.join(&e.file))?;
        let theta = snap.scalar(0)?.resample(grid)?;
        let u: VectorField = snap.velocity()?.resample(grid)?;
        let mut s = SimState::new(theta, u, grid.default_cutoff(), physics.clone())?;
        s.time = e.t;
        snapshots.push(s);
    }
    let traj = Trajectory {
        snapshots,
        ledger,
        probes: Vec::new(),
        steps: meta.steps,
        dt: meta.dt,
    };
    Ok((cfg, meta, traj))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config_hash: String,
    /// All hard checks passed.
    pub pass: bool,
    pub failed: Vec<String>,
    pub estimates: Vec<EstimateReport>,
    pub overshoot: OvershootReport,
}

fn soft(mut r: EstimateReport) -> EstimateReport {
    r.hard = false;
    r
}

/// Every check available on a completed trajectory. Energy residuals and the
/// max principle are soft; parameter-free inequalities are hard.
pub fn verify_trajectory(traj: &Trajectory) -> Result<(Vec<EstimateReport>, OvershootReport)> {
    let mut estimates = check_apriori_bounds(traj)?;
    estimates.extend(eta_equivalence_checks(traj)?);
    let pt = &traj
        .snapshots
        .first()
        .ok_or_else(|| Error::Degenerate("trajectory has no states".into()))?
        .physics
        .thermal;
    let mut worst = 0.0f64;
    for s in &traj.snapshots {
        worst = worst.max(eta_roundtrip_error(pt, &s.theta)?);
    }
    estimates.push(EstimateReport::bound("eta_roundtrip", worst, ROUNDTRIP_TOL, 0.0));
    if let Some(last) = traj.ledger.last() {
        estimates.push(soft(
            EstimateReport::bound("energy_residual_theta", last.residual_theta, RESIDUAL_TOL, 0.0).with("t", last.t),
        ));
        estimates.push(soft(
            EstimateReport::bound("energy_residual_u", last.residual_u, RESIDUAL_TOL, 0.0).with("t", last.t),
        ));
    }
    let overshoot = max_principle_probe(traj, OVERSHOOT_TOL)?;
    Ok((estimates, overshoot))
}

/// Checks a run directory and writes `report.json` into it.
pub fn verify_run(dir: &Path) -> Result<VerifyReport> {
    let (_, meta, traj) = load_run(dir)?;
    let (estimates, overshoot) = verify_trajectory(&traj)?;
    let failed: Vec<String> = estimates
        .iter()
        .filter(|r| r.hard && !r.pass)
        .map(|r| r.name.clone())
        .collect();
    let report = VerifyReport {
        config_hash: meta.config_hash,
        pass: failed.is_empty(),
        failed,
        estimates,
        overshoot,
    };
    fs::write(dir.join(REPORT_FILE), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentAnalysis {
    pub component: usize,
    /// `s → ‖f‖_{H^s}`, keyed by the exponent as written
    pub norms: BTreeMap<String, f64>,
    /// `‖Δ_j f‖²_{L²}` for `j = −1, 0, …`
    pub shell_energies: Vec<f64>,
}

/// Sobolev norms and dyadic shell energies of every component of a snapshot.
pub fn analyze_snapshot(path: &Path, exponents: &[f64]) -> Result<Vec<ComponentAnalysis>> {
    let snap = Snapshot::load(path)?;
    let mut out = Vec::with_capacity(snap.components.len());
    for c in 0..snap.components.len() {
        let f = snap.scalar(c)?;
        let bank = DyadicFilterBank::new(*f.grid())?;
        let mut norms = BTreeMap::new();
        for &s in exponents {
            norms.insert(format!("{s}"), crate::lp::sobolev_norm(&f, s)?);
        }
        out.push(ComponentAnalysis {
            component: c,
            norms,
            shell_energies: decompose(&f, &bank)?.shell_energies(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::parse_with_overrides;

    const SAMPLE: &str = r#"
seed = 3
output_dir = "unused"
probes = ["eta", "max_principle"]
exponents = [1.5, 0.5]

[grid]
n = 16

[laws]
kappa = { kind = "tanh_smooth", lo = 0.5, hi = 1.5 }
mu = { kind = "constant", value = 0.5 }

[initial]
theta = { kind = "random_hs", s = 1.5, norm = 1.0 }
u = { kind = "random_hs", s = 0.5, norm = 1.0 }

[stepper]
dt = 0.005
t_end = 0.05
snapshot_interval = 0.025
"#;

    #[test]
    fn run_verify_roundtrip() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        let over = format!("output_dir=\"{}\"", dir.display());
        let cfg: RunConfig = parse_with_overrides(SAMPLE, &[over]).unwrap();
        let out = execute_run(&cfg).unwrap();
        assert_eq!(out.meta.snapshots.len(), 3);
        assert!(dir.join("snap_0.050000.fld").exists());
        let report = verify_run(&dir).unwrap();
        assert!(report.pass, "{:?}", report.failed);
        let (_, _, traj) = load_run(&dir).unwrap();
        assert_eq!(traj.ledger, out.trajectory.ledger);
        let a = analyze_snapshot(&dir.join("snap_0.000000.fld"), &[0.0, 1.5]).unwrap();
        assert_eq!(a.len(), 3);
        assert!((a[0].norms["1.5"] - 1.0).abs() < 1e-10);
    }
}
