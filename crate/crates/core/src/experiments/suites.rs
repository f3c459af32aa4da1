//! Packaged experiment suites with their resolved configuration, per-case
//! verdicts and metrics tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use super::config::{config_hash, override_value, to_toml};
use super::initial::{generate_scalar, generate_velocity, random_hs_scalar, random_hs_velocity, InitialSpec};
use super::runner::{verify_trajectory, RESIDUAL_TOL};
use crate::diagnostics::{
    check_apriori_bounds, regularity_sweep, twin_stability_study, EstimateReport, SweepConfig, QUADRANGLE_POINTS,
    TWIN_SLACK,
};
use crate::error::{Error, Result};
use crate::laws::{builtin_law, LawSpec};
use crate::lp::{
    bernstein_check, commutator_scaling_report, decompose, lp_sobolev_norm, sobolev_norm, DyadicFilterBank,
};
use crate::solver::{
    run, solve_parabolic, ParabolicProblem, Physics, SimState, TimeStepperConfig, Trajectory,
};
use crate::spectral::{Grid, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    TaylorGreen,
    MmsParabolic,
    EnergyAudit,
    LpScaling,
    RegularitySweep,
    TwinStability,
}

impl SuiteName {
    pub const ALL: [SuiteName; 6] = [
        SuiteName::TaylorGreen,
        SuiteName::MmsParabolic,
        SuiteName::EnergyAudit,
        SuiteName::LpScaling,
        SuiteName::RegularitySweep,
        SuiteName::TwinStability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::TaylorGreen => "taylor_green",
            SuiteName::MmsParabolic => "mms_parabolic",
            SuiteName::EnergyAudit => "energy_audit",
            SuiteName::LpScaling => "lp_scaling",
            SuiteName::RegularitySweep => "regularity_sweep",
            SuiteName::TwinStability => "twin_stability",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL.into_iter().find(|n| n.name() == s).ok_or_else(|| {
            let known: Vec<&str> = SuiteName::ALL.iter().map(|n| n.name()).collect();
            Error::Config(format!("unknown suite `{s}`; known suites: {}", known.join(", ")))
        })
    }
}

fn tanh_law(lo: f64, hi: f64) -> LawSpec {
    LawSpec::TanhSmooth {
        lo,
        hi,
        center: 0.0,
        width: 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaylorGreenSuite {
    pub n: usize,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    pub tolerance: f64,
}

impl Default for TaylorGreenSuite {
    fn default() -> Self {
        Self {
            n: 64,
            nu: 0.1,
            dt: 1e-2,
            t_end: 1.0,
            snapshot_interval: 0.25,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmsSuite {
    pub t_end: f64,
    pub spatial_sizes: Vec<usize>,
    pub spatial_dt: f64,
    pub spatial_tolerance: f64,
    pub temporal_n: usize,
    pub temporal_dts: Vec<f64>,
    pub order: f64,
    pub order_tolerance: f64,
}

impl Default for MmsSuite {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            spatial_sizes: vec![16, 24, 32],
            spatial_dt: 1e-4,
            spatial_tolerance: 1e-7,
            temporal_n: 48,
            temporal_dts: vec![4e-3, 2e-3, 1e-3],
            order: 2.0,
            order_tolerance: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySuite {
    pub n: usize,
    pub kappa: LawSpec,
    pub mu: LawSpec,
    pub beta: f64,
    pub theta: InitialSpec,
    pub u: InitialSpec,
    pub t_end: f64,
    /// Fine step; the coarse run uses `2 dt`.
    pub dt: f64,
    pub residual_tolerance: f64,
    pub min_shrink: f64,
    /// Random runs checked against the uniform bounds and η equivalences.
    pub random_runs: usize,
    pub random_n: usize,
    pub random_t_end: f64,
    /// An accuracy-level step: the equality case `κ = κ_*` leaves no slack
    /// for the time-stepping energy error.
    pub random_dt: f64,
}

impl Default for EnergySuite {
    fn default() -> Self {
        Self {
            n: 64,
            kappa: tanh_law(1.0, 3.0),
            mu: tanh_law(0.5, 1.5),
            beta: 1.0,
            theta: InitialSpec::RandomHs {
                s: 1.5,
                norm: 1.0,
                seed: None,
            },
            u: InitialSpec::RandomHs {
                s: 0.5,
                norm: 1.0,
                seed: None,
            },
            t_end: 1.0,
            dt: 1e-3,
            residual_tolerance: RESIDUAL_TOL,
            min_shrink: 3.5,
            random_runs: 20,
            random_n: 32,
            random_t_end: 0.5,
            random_dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpSuite {
    pub reconstruction_n: usize,
    pub reconstruction_fields: u64,
    pub reconstruction_tolerance: f64,
    pub bernstein_n: usize,
    pub bernstein_fields: u64,
    pub norm_sizes: Vec<usize>,
    pub norm_exponents: Vec<f64>,
    pub norm_fields: u64,
    pub norm_tolerance: f64,
    pub commutator_n: usize,
    pub commutator_pairs: Vec<(f64, f64)>,
    pub commutator_seeds: u64,
    pub commutator_tolerance: f64,
}

impl Default for LpSuite {
    fn default() -> Self {
        Self {
            reconstruction_n: 64,
            reconstruction_fields: 20,
            reconstruction_tolerance: 1e-10,
            bernstein_n: 32,
            bernstein_fields: 10_000,
            norm_sizes: vec![64, 128, 256],
            norm_exponents: vec![0.5, 1.0, 1.5, 2.0],
            norm_fields: 100,
            norm_tolerance: 0.10,
            commutator_n: 128,
            commutator_pairs: vec![(0.5, 0.25), (1.2, 0.5), (1.5, 0.75)],
            commutator_seeds: 4,
            commutator_tolerance: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSuite {
    pub points: Vec<(f64, f64)>,
    /// Its `seed` is replaced by the suite seed on resolution.
    pub config: SweepConfig,
}

impl Default for SweepSuite {
    fn default() -> Self {
        Self {
            points: QUADRANGLE_POINTS.to_vec(),
            config: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwinSuite {
    pub n: usize,
    pub kappa: LawSpec,
    pub mu: LawSpec,
    pub beta: f64,
    pub theta_s: f64,
    pub u_s: f64,
    pub theta_norm: f64,
    pub u_norm: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sizes: Vec<f64>,
    /// Index into `sizes` of the calibration run.
    pub reference: usize,
}

impl Default for TwinSuite {
    fn default() -> Self {
        Self {
            n: 64,
            kappa: tanh_law(0.5, 1.5),
            mu: tanh_law(0.5, 1.5),
            beta: 1.0,
            theta_s: 1.0,
            u_s: 0.5,
            theta_norm: 1.0,
            u_norm: 1.0,
            dt: 2e-3,
            t_end: 1.0,
            sizes: vec![1e-4, 1e-6, 1e-8],
            reference: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub taylor_green: TaylorGreenSuite,
    pub mms_parabolic: MmsSuite,
    pub energy_audit: EnergySuite,
    pub lp_scaling: LpSuite,
    pub regularity_sweep: SweepSuite,
    pub twin_stability: TwinSuite,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            taylor_green: TaylorGreenSuite::default(),
            mms_parabolic: MmsSuite::default(),
            energy_audit: EnergySuite::default(),
            lp_scaling: LpSuite::default(),
            regularity_sweep: SweepSuite::default(),
            twin_stability: TwinSuite::default(),
        }
    }
}

impl SuiteConfig {
    /// Defaults with dotted-path overrides, e.g. `twin_stability.n=32`.
    pub fn resolve(overrides: &[String]) -> Result<Self> {
        let mut cfg = override_value(&SuiteConfig::default(), overrides)?;
        cfg.regularity_sweep.config.seed = cfg.seed;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Where the case failed, or a remark on how it was evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CaseResult {
    fn new(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            metrics: BTreeMap::new(),
            note: None,
        }
    }

    fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: SuiteName,
    pub pass: bool,
    pub config_hash: String,
    pub seed: u64,
    /// `case: note` of the first failing case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub cases: Vec<CaseResult>,
    pub environment: BTreeMap<String, String>,
}

impl SuiteResult {
    pub fn case(&self, name: &str) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.name == name)
    }
}

/// Build and platform, without timings or host names.
pub fn environment_fingerprint() -> BTreeMap<String, String> {
    let mut env = BTreeMap::new();
    env.insert("crate".into(), env!("CARGO_PKG_NAME").into());
    env.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    env.insert("os".into(), std::env::consts::OS.into());
    env.insert("arch".into(), std::env::consts::ARCH.into());
    env.insert("fft".into(), "rustfft".into());
    env
}

/// Extra tables a suite writes next to its report.
type Tables = Vec<(&'static str, Vec<String>, Vec<Vec<String>>)>;

/// Runs `name` under the resolved `cfg`. With `out_dir`, writes
/// `suite.toml`, `report.json`, `metrics.csv` and suite-specific CSVs.
pub fn run_suite(name: SuiteName, cfg: &SuiteConfig, out_dir: Option<&Path>) -> Result<SuiteResult> {
    let text = to_toml(cfg)?;
    let (cases, tables) = match name {
        SuiteName::TaylorGreen => taylor_green(&cfg.taylor_green)?,
        SuiteName::MmsParabolic => mms_parabolic(&cfg.mms_parabolic)?,
        SuiteName::EnergyAudit => energy_audit(&cfg.energy_audit, cfg.seed)?,
        SuiteName::LpScaling => lp_scaling(&cfg.lp_scaling, cfg.seed)?,
        SuiteName::RegularitySweep => sweep_suite(&cfg.regularity_sweep)?,
        SuiteName::TwinStability => twin_suite(&cfg.twin_stability, cfg.seed)?,
    };
    let first_failure = cases.iter().find(|c| !c.pass).map(|c| match &c.note {
        Some(n) => format!("{}: {n}", c.name),
        None => c.name.clone(),
    });
    let result = SuiteResult {
        suite: name,
        pass: first_failure.is_none(),
        config_hash: config_hash(&text),
        seed: cfg.seed,
        first_failure,
        cases,
        environment: environment_fingerprint(),
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("suite.toml"), &text)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&result)? + "\n")?;
        let mut w = csv::Writer::from_path(dir.join("metrics.csv"))?;
        w.write_record(["case", "metric", "value"])?;
        for c in &result.cases {
            for (k, v) in &c.metrics {
                w.write_record([c.name.as_str(), k.as_str(), &format!("{v:e}")])?;
            }
        }
        w.flush()?;
        for (file, header, rows) in tables {
            let mut w = csv::Writer::from_path(dir.join(file))?;
            w.write_record(&header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
        }
    }
    Ok(result)
}

fn max_abs(f: &ndarray::Array2<f64>) -> f64 {
    f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn taylor_green(cfg: &TaylorGreenSuite) -> Result<(Vec<CaseResult>, Tables)> {
    let grid = Grid::new(cfg.n, 1.0)?;
    let physics = Arc::new(Physics::constant(1.0, cfg.nu, 1.0)?);
    let tg = |x: f64, y: f64| (x.sin() * y.cos(), -x.cos() * y.sin());
    let state = SimState::new(
        ScalarField::zeros(grid),
        VectorField::from_fn(grid, tg),
        grid.default_cutoff(),
        physics,
    )?;
    let traj = run(
        &state,
        &TimeStepperConfig::fixed(cfg.dt, cfg.t_end).with_snapshots(cfg.snapshot_interval),
    )?;
    let (mut worst, mut t_worst) = (0.0f64, 0.0);
    let mut rows = Vec::new();
    for snap in &traj.snapshots {
        let decay = (-2.0 * cfg.nu * snap.time).exp();
        let exact = VectorField::from_fn(grid, |x, y| {
            let (a, b) = tg(x, y);
            (a * decay, b * decay)
        });
        let [e1, e2] = snap.u.axpy(-1.0, &exact).to_physical();
        let err = max_abs(&e1).max(max_abs(&e2));
        rows.push(vec![format!("{}", snap.time), format!("{err:e}")]);
        if err > worst {
            worst = err;
            t_worst = snap.time;
        }
    }
    let case = CaseResult::new("velocity_error", worst <= cfg.tolerance)
        .metric("max_error", worst)
        .metric("t_worst", t_worst)
        .metric("steps", traj.steps as f64)
        .note(format!("largest error {worst:.3e} at t = {t_worst}"));
    Ok((vec![case], vec![("errors.csv", vec!["t".into(), "max_error".into()], rows)]))
}

fn mms_exact(t: f64, x: f64, y: f64) -> f64 {
    x.sin() * y.sin() * (-t).exp()
}

fn mms_kappa(x: f64) -> f64 {
    1.5 + 0.5 * x.sin().tanh()
}

/// Max nodal error at `t_end` of the manufactured advection–diffusion
/// problem `ψ = sin x₁ sin x₂ e^{−t}` under the steady Taylor–Green field
/// with `κ = 1.5 + 0.5 tanh(sin x₁)`.
pub fn mms_error(n: usize, dt: f64, t_end: f64) -> Result<f64> {
    let grid = Grid::new(n, 1.0)?;
    let source = |t: f64, x: f64, y: f64| {
        let psi = mms_exact(t, x, y);
        let sech = 1.0 / x.sin().cosh();
        // ψₜ − κΔψ − ∂₁κ ∂₁ψ
        -psi + 2.0 * mms_kappa(x) * psi - 0.5 * sech * sech * x.cos() * x.cos() * y.sin() * (-t).exp()
    };
    let problem = ParabolicProblem {
        velocity: Box::new(|_, x, y| (x.sin() * y.cos(), -x.cos() * y.sin())),
        kappa: Box::new(|_, x, _| mms_kappa(x)),
        kappa_bounds: (1.0, 2.0),
        source: Box::new(source),
        psi0: ScalarField::from_fn(grid, |x, y| mms_exact(0.0, x, y)),
    };
    let traj = solve_parabolic(&problem, &TimeStepperConfig::fixed(dt, t_end).with_snapshots(t_end))?;
    let reference = ScalarField::from_fn(grid, |x, y| mms_exact(t_end, x, y));
    Ok(max_abs(&(traj.last() - &reference).to_physical()))
}

fn mms_parabolic(cfg: &MmsSuite) -> Result<(Vec<CaseResult>, Tables)> {
    if cfg.spatial_sizes.is_empty() || cfg.temporal_dts.len() < 2 {
        return Err(Error::Config("mms needs one grid size and two time steps".into()));
    }
    let spatial: Vec<f64> = cfg
        .spatial_sizes
        .par_iter()
        .map(|&n| mms_error(n, cfg.spatial_dt, cfg.t_end))
        .collect::<Result<_>>()?;
    let temporal: Vec<f64> = cfg
        .temporal_dts
        .par_iter()
        .map(|&dt| mms_error(cfg.temporal_n, dt, cfg.t_end))
        .collect::<Result<_>>()?;
    let floor = *spatial.last().expect("nonempty");
    let n_last = *cfg.spatial_sizes.last().expect("nonempty");
    let (dt0, dt1) = (cfg.temporal_dts[0], *cfg.temporal_dts.last().expect("nonempty"));
    let (e0, e1) = (temporal[0], *temporal.last().expect("nonempty"));
    let order = (e0 / e1).ln() / (dt0 / dt1).ln();
    let mut cases = vec![
        CaseResult::new("spatial_floor", floor <= cfg.spatial_tolerance)
            .metric("error", floor)
            .metric("n", n_last as f64)
            .note(format!("error {floor:.3e} at N = {n_last}")),
        CaseResult::new("temporal_order", (order - cfg.order).abs() <= cfg.order_tolerance)
            .metric("order", order)
            .note(format!("observed order {order:.3} over dt ∈ [{dt1:e}, {dt0:e}]")),
    ];
    for (n, e) in cfg.spatial_sizes.iter().zip(&spatial) {
        cases[0].metrics.insert(format!("error_n{n}"), *e);
    }
    let mut rows: Vec<Vec<String>> = cfg
        .spatial_sizes
        .iter()
        .zip(&spatial)
        .map(|(n, e)| vec!["spatial".into(), n.to_string(), format!("{:e}", cfg.spatial_dt), format!("{e:e}")])
        .collect();
    rows.extend(cfg.temporal_dts.iter().zip(&temporal).map(|(dt, e)| {
        vec!["temporal".into(), cfg.temporal_n.to_string(), format!("{dt:e}"), format!("{e:e}")]
    }));
    let header = ["study", "n", "dt", "error"].map(String::from).to_vec();
    Ok((cases, vec![("convergence.csv", header, rows)]))
}

fn energy_trajectory(cfg: &EnergySuite, seed: u64, dt: f64) -> Result<Trajectory> {
    let grid = Grid::new(cfg.n, 1.0)?;
    let physics = Arc::new(Physics::new(builtin_law(&cfg.kappa)?, builtin_law(&cfg.mu)?, cfg.beta)?);
    let theta = generate_scalar(&cfg.theta, grid, seed)?;
    let u = generate_velocity(&cfg.u, grid, seed)?;
    let state = SimState::new(theta, u, grid.default_cutoff(), physics)?;
    run(&state, &TimeStepperConfig::fixed(dt, cfg.t_end).with_snapshots(cfg.t_end))
}

/// Laws and data of the `i`-th random run: the law family cycles through the
/// builtin kinds, contrasts and exponents vary with `i`.
fn random_run_state(cfg: &EnergySuite, seed: u64, i: usize) -> Result<SimState> {
    let grid = Grid::new(cfg.random_n, 1.0)?;
    let k = i as f64;
    let lo = 0.5 + 0.1 * (i % 5) as f64;
    let hi = lo * (1.5 + 0.5 * (i % 4) as f64);
    let law = |shift: usize| match (i + shift) % 4 {
        0 => LawSpec::Constant { value: 0.5 * (lo + hi) },
        1 => LawSpec::AffineClamped {
            base: 0.5 * (lo + hi),
            slope: 0.5 + 0.25 * k.rem_euclid(3.0),
            lo,
            hi,
        },
        2 => tanh_law(lo, hi),
        _ => LawSpec::ExpClamped {
            c1: 0.5 * (lo + hi),
            c2: 0.5,
            c3: 3.0,
            lo,
            hi,
        },
    };
    let beta = 0.5 + 0.25 * (i % 5) as f64;
    let physics = Arc::new(Physics::new(builtin_law(&law(0))?, builtin_law(&law(1))?, beta)?);
    let run_seed = seed.wrapping_add(1000 + i as u64);
    let theta = random_hs_scalar(grid, 1.0 + 0.25 * (i % 3) as f64, 1.0, run_seed, 0);
    let u = random_hs_velocity(grid, 0.5 + 0.25 * (i % 3) as f64, 1.0, run_seed, 1);
    SimState::new(theta, u, grid.default_cutoff(), physics)
}

fn describe(r: &EstimateReport) -> String {
    let ctx: Vec<String> = r.context.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("{} lhs {:.6e} > rhs {:.6e} ({})", r.name, r.lhs, r.rhs, ctx.join(", "))
}

fn energy_audit(cfg: &EnergySuite, seed: u64) -> Result<(Vec<CaseResult>, Tables)> {
    let (coarse, fine) = rayon::join(
        || energy_trajectory(cfg, seed, 2.0 * cfg.dt),
        || energy_trajectory(cfg, seed, cfg.dt),
    );
    let (coarse, fine) = (coarse?, fine?);
    let last = |t: &Trajectory| {
        t.ledger
            .last()
            .map(|r| (r.residual_theta, r.residual_u))
            .ok_or_else(|| Error::Degenerate("empty ledger".into()))
    };
    let (ct, cu) = last(&coarse)?;
    let (ft, fu) = last(&fine)?;
    let mut cases = Vec::new();
    for (name, c, f) in [("theta", ct, ft), ("u", cu, fu)] {
        cases.push(
            CaseResult::new(format!("residual_{name}"), f <= cfg.residual_tolerance)
                .metric("residual", f)
                .metric("residual_coarse", c)
                .metric("dt", cfg.dt)
                .note(format!("final relative residual {f:.3e} at dt = {:e}, t = {}", cfg.dt, cfg.t_end)),
        );
        let shrink = CaseResult::new(format!("shrink_{name}"), f == 0.0 || c / f >= cfg.min_shrink);
        cases.push(if f == 0.0 {
            shrink.note("residual vanishes identically")
        } else {
            shrink
                .metric("shrink", c / f)
                .note(format!("residual shrinks by {:.3} under dt halving", c / f))
        });
    }
    for r in check_apriori_bounds(&fine)?.into_iter().filter(|r| r.hard) {
        let case = CaseResult::new(format!("fine_run_{}", r.name), r.pass)
            .metric("lhs", r.lhs)
            .metric("rhs", r.rhs);
        cases.push(if r.pass { case } else { case.note(describe(&r)) });
    }

    let checked: Vec<(Vec<EstimateReport>, f64)> = (0..cfg.random_runs)
        .into_par_iter()
        .map(|i| {
            let state = random_run_state(cfg, seed, i)?;
            let traj = run(
                &state,
                &TimeStepperConfig::fixed(cfg.random_dt, cfg.random_t_end).with_snapshots(cfg.random_t_end / 10.0),
            )?;
            let (reports, overshoot) = verify_trajectory(&traj)?;
            Ok((reports, overshoot.max_overshoot))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let groups: [(&str, &[&str]); 2] = [
        ("random_uniform_bounds", &["uniform_theta", "uniform_u", "strain_identity"]),
        ("random_eta_equivalence", &["eta_l2", "eta_gradient", "eta_time_derivative", "eta_roundtrip"]),
    ];
    for (case, prefixes) in groups {
        let mut violations = 0usize;
        let mut first = None;
        let mut worst = 0.0f64;
        for (i, (reports, _)) in checked.iter().enumerate() {
            for r in reports.iter().filter(|r| r.hard && prefixes.iter().any(|p| r.name.starts_with(p))) {
                if r.name != "strain_identity" && r.name != "eta_roundtrip" {
                    worst = worst.max(r.ratio);
                }
                if !r.pass {
                    violations += 1;
                    first.get_or_insert_with(|| format!("run {i}: {}", describe(r)));
                }
            }
        }
        let c = CaseResult::new(case, violations == 0)
            .metric("runs", cfg.random_runs as f64)
            .metric("violations", violations as f64)
            .metric("worst_ratio", worst);
        cases.push(match first {
            Some(n) => c.note(n),
            None => c,
        });
    }
    for (i, (reports, overshoot)) in checked.iter().enumerate() {
        for r in reports {
            rows.push(vec![
                i.to_string(),
                r.name.clone(),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs),
                r.hard.to_string(),
                r.pass.to_string(),
            ]);
        }
        rows.push(vec![
            i.to_string(),
            "max_overshoot".into(),
            format!("{overshoot:e}"),
            "0".into(),
            "false".into(),
            "true".into(),
        ]);
    }
    let header = ["run", "check", "lhs", "rhs", "hard", "pass"].map(String::from).to_vec();
    let ledger_rows = fine
        .ledger
        .rows
        .iter()
        .map(|r| vec![format!("{}", r.t), format!("{:e}", r.residual_theta), format!("{:e}", r.residual_u)])
        .collect();
    let ledger_header = ["t", "residual_theta", "residual_u"].map(String::from).to_vec();
    Ok((
        cases,
        vec![("random_runs.csv", header, rows), ("residuals.csv", ledger_header, ledger_rows)],
    ))
}

fn lp_scaling(cfg: &LpSuite, seed: u64) -> Result<(Vec<CaseResult>, Tables)> {
    let mut cases = Vec::new();
    let mut tables: Tables = Vec::new();

    let grid = Grid::new(cfg.reconstruction_n, 1.0)?;
    let bank = DyadicFilterBank::new(grid)?;
    let recon = (0..cfg.reconstruction_fields)
        .into_par_iter()
        .map(|i| {
            let g = random_hs_scalar(grid, 0.5, 1.0, seed.wrapping_add(i), 0);
            Ok((&decompose(&g, &bank)?.reconstruct() - &g).l2_norm() / g.l2_norm())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    cases.push(
        CaseResult::new("reconstruction", recon <= cfg.reconstruction_tolerance)
            .metric("max_relative_error", recon)
            .note(format!("worst relative L² error {recon:.3e}")),
    );

    let grid = Grid::new(cfg.bernstein_n, 1.0)?;
    let bank = DyadicFilterBank::new(grid)?;
    let scans = (0..cfg.bernstein_fields)
        .into_par_iter()
        .map(|i| {
            let s = -1.0 + 3.0 * (i % 7) as f64 / 6.0;
            let g = random_hs_scalar(grid, s, 1.0, seed.wrapping_add(i), 0);
            let (mut lo, mut hi, mut bad) = (f64::INFINITY, 0.0f64, None);
            for j in 0..=bank.j_max() {
                let r = bernstein_check(&g, &bank, j)?;
                lo = lo.min(r.ratio);
                hi = hi.max(r.ratio);
                if !r.pass && bad.is_none() {
                    bad = Some(format!("field {i}, shell j = {j}, ratio {:.6}", r.ratio));
                }
            }
            Ok((lo, hi, bad))
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = scans.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = scans.iter().map(|s| s.1).fold(0.0f64, f64::max);
    let violations = scans.iter().filter(|s| s.2.is_some()).count();
    let c = CaseResult::new("bernstein", violations == 0)
        .metric("fields", cfg.bernstein_fields as f64)
        .metric("min_ratio", lo)
        .metric("max_ratio", hi)
        .metric("violations", violations as f64);
    cases.push(match scans.iter().find_map(|s| s.2.clone()) {
        Some(n) => c.note(n),
        None => c.note(format!("ratios within [{lo:.4}, {hi:.4}]")),
    });

    let mut rows = Vec::new();
    for &s in &cfg.norm_exponents {
        let ratios = cfg
            .norm_sizes
            .par_iter()
            .map(|&n| {
                let grid = Grid::new(n, 1.0)?;
                let bank = DyadicFilterBank::new(grid)?;
                let mut acc = 0.0;
                for i in 0..cfg.norm_fields {
                    let g = random_hs_scalar(grid, s + 1.0, 1.0, seed.wrapping_add(i), 0);
                    acc += lp_sobolev_norm(&decompose(&g, &bank)?, s)? / sobolev_norm(&g, s)?;
                }
                Ok(acc / cfg.norm_fields as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        let base = ratios[0];
        let dev = ratios.iter().fold(0.0f64, |m, r| m.max((r / base - 1.0).abs()));
        let mut c = CaseResult::new(format!("norm_ratio_s{s}"), dev <= cfg.norm_tolerance)
            .metric("max_deviation", dev)
            .note(format!("ratio drifts by {:.2}% from N = {}", 100.0 * dev, cfg.norm_sizes[0]));
        for (n, r) in cfg.norm_sizes.iter().zip(&ratios) {
            c.metrics.insert(format!("ratio_n{n}"), *r);
            rows.push(vec![s.to_string(), n.to_string(), format!("{r:e}")]);
        }
        cases.push(c);
    }
    tables.push(("norm_ratios.csv", ["s", "n", "mean_ratio"].map(String::from).to_vec(), rows));

    let mut rows = Vec::new();
    for &(s, nu) in &cfg.commutator_pairs {
        let pairs = commutator_doubling(cfg.commutator_n, s, nu, cfg.commutator_seeds, seed)?;
        let mut worst = 0.0f64;
        let mut at = seed;
        for [a, b] in &pairs {
            let dev = (b.c_emp / a.c_emp - 1.0).abs();
            if dev >= worst {
                worst = dev;
                at = a.seed;
            }
            rows.extend([a, b].map(CommutatorRow::record));
        }
        cases.push(
            CaseResult::new(format!("commutator_s{s}_nu{nu}"), worst <= cfg.commutator_tolerance)
                .metric("max_relative_change", worst)
                .note(format!(
                    "C_emp changes by {:.2}% under doubling from N = {} (seed {at})",
                    100.0 * worst,
                    cfg.commutator_n,
                )),
        );
    }
    tables.push(("commutator_scaling.csv", CommutatorRow::header(), rows));
    Ok((cases, tables))
}

/// One line of the commutator scaling table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorRow {
    pub s: f64,
    pub nu: f64,
    pub n: usize,
    pub seed: u64,
    pub sum: f64,
    pub rhs: f64,
    pub c_emp: f64,
    pub tail: f64,
}

impl CommutatorRow {
    fn header() -> Vec<String> {
        ["s", "nu", "n", "seed", "sum", "rhs", "c_emp", "tail"].map(String::from).to_vec()
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.nu.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            format!("{:e}", self.sum),
            format!("{:e}", self.rhs),
            format!("{:e}", self.c_emp),
            format!("{:e}", self.tail),
        ]
    }
}

/// `l¹` commutator reports for `seeds` random pairs drawn at `n` and
/// embedded at `2n`, as `[coarse, fine]` rows.
pub fn commutator_doubling(n: usize, s: f64, nu: f64, seeds: u64, seed: u64) -> Result<Vec<[CommutatorRow; 2]>> {
    let coarse = Grid::new(n, 1.0)?;
    let fine = coarse.resized(2 * n)?;
    (0..seeds)
        .into_par_iter()
        .map(|i| {
            let sd = seed.wrapping_add(i);
            // ∇φ ∈ H^ν and ∇ψ ∈ H^{s−ν} with half a derivative to spare
            let phi = random_hs_scalar(coarse, nu + 1.5, 1.0, sd, 0);
            let psi = random_hs_scalar(coarse, s - nu + 1.5, 1.0, sd, 1);
            let row = |phi: &ScalarField, psi: &ScalarField| -> Result<CommutatorRow> {
                let r = commutator_scaling_report(phi, psi, s, nu)?;
                Ok(CommutatorRow {
                    s,
                    nu,
                    n: phi.grid().n(),
                    seed: sd,
                    sum: r.sum,
                    rhs: r.rhs,
                    c_emp: r.c_emp,
                    tail: r.tail_estimate,
                })
            };
            Ok([row(&phi, &psi)?, row(&phi.resample(fine)?, &psi.resample(fine)?)?])
        })
        .collect()
}

fn sweep_suite(cfg: &SweepSuite) -> Result<(Vec<CaseResult>, Tables)> {
    let report = regularity_sweep(&cfg.points, &cfg.config)?;
    let mut cases = Vec::new();
    let mut rows = Vec::new();
    for p in &report.points {
        let name = format!("point_{}_{}", p.s_theta, p.s_u);
        let ratio = (p.sup_theta_hs / p.initial_theta_hs).max(p.sup_u_hs / p.initial_u_hs);
        // outside the admissible set the point is reported, never asserted
        let c = CaseResult::new(name, p.pass || !p.admissible)
            .metric("admissible", f64::from(u8::from(p.admissible)))
            .metric("sup_ratio", ratio)
            .metric("steps", p.steps as f64);
        cases.push(match &p.failure {
            Some(f) => c.note(f.clone()),
            None => c.note(format!("sup-in-time norms at most {ratio:.4} × initial")),
        });
        rows.push(vec![
            p.s_theta.to_string(),
            p.s_u.to_string(),
            p.admissible.to_string(),
            format!("{:e}", p.initial_theta_hs),
            format!("{:e}", p.initial_u_hs),
            format!("{:e}", p.sup_theta_hs),
            format!("{:e}", p.sup_u_hs),
            format!("{:e}", p.int_grad_theta_hs),
            format!("{:e}", p.int_grad_u_hs),
            p.steps.to_string(),
            p.pass.to_string(),
        ]);
    }
    let header = [
        "s_theta",
        "s_u",
        "admissible",
        "initial_theta_hs",
        "initial_u_hs",
        "sup_theta_hs",
        "sup_u_hs",
        "int_grad_theta_hs",
        "int_grad_u_hs",
        "steps",
        "pass",
    ]
    .map(String::from)
    .to_vec();
    Ok((cases, vec![("sweep.csv", header, rows)]))
}

fn twin_suite(cfg: &TwinSuite, seed: u64) -> Result<(Vec<CaseResult>, Tables)> {
    let grid = Grid::new(cfg.n, 1.0)?;
    let physics = Arc::new(Physics::new(builtin_law(&cfg.kappa)?, builtin_law(&cfg.mu)?, cfg.beta)?);
    let theta = random_hs_scalar(grid, cfg.theta_s, cfg.theta_norm, seed, 0);
    let u = random_hs_velocity(grid, cfg.u_s, cfg.u_norm, seed, 1);
    let base = SimState::new(theta, u, grid.default_cutoff(), physics)?;
    let study = twin_stability_study(&base, &cfg.sizes, cfg.reference, &TimeStepperConfig::fixed(cfg.dt, cfg.t_end))?;
    let zero = study.zero_perturbation_distance;
    let mut cases = vec![
        CaseResult::new("zero_perturbation", zero <= 1e-24)
            .metric("max_distance", zero)
            .note(format!("identical data stay within D = {zero:.3e}")),
        CaseResult::new("constant_stability", study.c_spread <= TWIN_SLACK)
            .metric("c_ref", study.c_ref)
            .metric("spread", study.c_spread)
            .note(format!("C_emp spread {:.3e} around C_ref = {:.6}", study.c_spread, study.c_ref)),
        CaseResult::new("growth_bound", study.growth_slack <= 1.0 + TWIN_SLACK)
            .metric("slack", study.growth_slack)
            .note(format!("D(T)/D(0) reaches {:.4} of the proxy exponential", study.growth_slack)),
    ];
    let mut rows = Vec::new();
    for r in &study.reports {
        cases[1]
            .metrics
            .insert(format!("c_emp_{:e}", r.perturbation), r.c_emp.unwrap_or(f64::NAN));
        for ((t, d), b) in r.times.iter().zip(&r.distance).zip(&r.b_integral) {
            rows.push(vec![
                format!("{:e}", r.perturbation),
                format!("{t}"),
                format!("{d:e}"),
                format!("{b:e}"),
            ]);
        }
    }
    let header = ["perturbation", "t", "distance", "b_integral"].map(String::from).to_vec();
    Ok((cases, vec![("twin.csv", header, rows)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for n in SuiteName::ALL {
            assert_eq!(n.name().parse::<SuiteName>().unwrap(), n);
        }
        assert!("lp".parse::<SuiteName>().is_err());
    }

    #[test]
    fn config_resolution() {
        let cfg = SuiteConfig::resolve(&["seed=9".into(), "twin_stability.n=16".into()]).unwrap();
        assert_eq!(cfg.twin_stability.n, 16);
        assert_eq!(cfg.regularity_sweep.config.seed, 9);
        assert!(SuiteConfig::resolve(&["twin_stability.grid=16".into()]).is_err());
    }

    #[test]
    fn energy_audit_on_zero_data() {
        let cfg = SuiteConfig::resolve(&[
            "energy_audit.n=16".into(),
            "energy_audit.t_end=0.05".into(),
            "energy_audit.dt=0.01".into(),
            "energy_audit.random_runs=0".into(),
            "energy_audit.theta={kind=\"zero\"}".into(),
            "energy_audit.u={kind=\"zero\"}".into(),
        ])
        .unwrap();
        let r = run_suite(SuiteName::EnergyAudit, &cfg, None).unwrap();
        for name in ["residual_theta", "residual_u"] {
            assert_eq!(r.case(name).unwrap().metrics["residual"], 0.0);
        }
        assert!(r.pass, "{:?}", r.first_failure);
    }

    #[test]
    fn small_twin_suite_writes_report() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig::resolve(&["twin_stability.n=16".into(), "twin_stability.t_end=0.05".into()]).unwrap();
        let r = run_suite(SuiteName::TwinStability, &cfg, Some(tmp.path())).unwrap();
        assert_eq!(r.cases.len(), 3);
        for f in ["suite.toml", "report.json", "metrics.csv", "twin.csv"] {
            assert!(tmp.path().join(f).exists(), "{f}");
        }
        let again = run_suite(SuiteName::TwinStability, &cfg, None).unwrap();
        assert_eq!(again, r);
    }
}
