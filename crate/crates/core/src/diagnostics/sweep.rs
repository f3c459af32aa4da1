//! Sobolev regularity propagation over points `(s_θ, s_u)` of the admissible
//! set `s_θ ≥ 1, s_u ≥ 0, s_u − 1 ≤ s_θ ≤ s_u + 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::Result;
use crate::experiments::initial::{random_hs_scalar, random_hs_velocity};
use crate::laws::{builtin_law, LawSpec};
use crate::solver::{run_with_probes, Dt, Physics, Scheme, SimState, TimeStepperConfig};
use crate::spectral::Grid;

/// Corners `(1,0)`, `(2,0)`, `(1,2)`, points on both slanted edges and
/// interior points.
pub const QUADRANGLE_POINTS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (2.0, 0.0),
    (1.0, 2.0),
    (2.5, 0.5),
    (3.0, 1.0),
    (1.5, 2.5),
    (1.5, 1.0),
    (2.0, 1.0),
];

pub fn is_admissible(s_theta: f64, s_u: f64) -> bool {
    s_theta >= 1.0 && s_u >= 0.0 && s_u - 1.0 <= s_theta && s_theta <= s_u + 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub box_length: f64,
    pub t_end: f64,
    pub kappa: LawSpec,
    pub mu: LawSpec,
    pub beta: f64,
    pub theta_norm: f64,
    pub u_norm: f64,
    pub seed: u64,
    /// `sup_t ‖·‖_{H^s}` may not exceed this multiple of the initial norm.
    pub growth_cap: f64,
    pub dt: Dt,
    pub scheme: Scheme,
    pub cfl_safety: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let tanh = LawSpec::TanhSmooth {
            lo: 0.5,
            hi: 1.5,
            center: 0.0,
            width: 1.0,
        };
        Self {
            n: 128,
            box_length: 1.0,
            t_end: 1.0,
            kappa: tanh.clone(),
            mu: tanh,
            beta: 1.0,
            theta_norm: 1.0,
            u_norm: 1.0,
            seed: 2024,
            growth_cap: 10.0,
            dt: Dt::Auto,
            scheme: Scheme::ImexCnRk2,
            cfl_safety: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub s_theta: f64,
    pub s_u: f64,
    pub admissible: bool,
    pub initial_theta_hs: f64,
    pub initial_u_hs: f64,
    pub sup_theta_hs: f64,
    pub sup_u_hs: f64,
    /// `‖∇θ‖²_{L²H^{s_θ}}` and `‖∇u‖²_{L²H^{s_u}}`
    pub int_grad_theta_hs: f64,
    pub int_grad_u_hs: f64,
    pub steps: usize,
    pub pass: bool,
    /// Error text when the run failed.
    pub failure: Option<String>,
}

fn growth_ok(sup: f64, initial: f64, cap: f64) -> bool {
    sup.is_finite() && sup <= cap * initial.max(f64::MIN_POSITIVE)
}

/// Runs one point; a failed run is returned as a failing datapoint.
pub fn sweep_point(s_theta: f64, s_u: f64, cfg: &SweepConfig) -> Result<SweepPoint> {
    let grid = Grid::new(cfg.n, cfg.box_length)?;
    let physics = Arc::new(Physics::new(builtin_law(&cfg.kappa)?, builtin_law(&cfg.mu)?, cfg.beta)?);
    let theta = random_hs_scalar(grid, s_theta, cfg.theta_norm, cfg.seed, 0);
    let u = random_hs_velocity(grid, s_u, cfg.u_norm, cfg.seed, 1);
    let initial_theta_hs = theta.sobolev_norm(s_theta);
    let initial_u_hs = u.sobolev_norm(s_u);
    let state = SimState::new(theta, u, grid.default_cutoff(), physics)?;
    let stepper = TimeStepperConfig {
        dt: cfg.dt,
        scheme: cfg.scheme,
        cfl_safety: cfg.cfl_safety,
        t_end: cfg.t_end,
        snapshot_interval: cfg.t_end.max(f64::MIN_POSITIVE),
    };
    let mut point = SweepPoint {
        s_theta,
        s_u,
        admissible: is_admissible(s_theta, s_u),
        initial_theta_hs,
        initial_u_hs,
        sup_theta_hs: f64::NAN,
        sup_u_hs: f64::NAN,
        int_grad_theta_hs: f64::NAN,
        int_grad_u_hs: f64::NAN,
        steps: 0,
        pass: false,
        failure: None,
    };
    match run_with_probes(&state, &stepper, &[], (s_theta, s_u)) {
        Ok(traj) => {
            let l = &traj.ledger;
            point.sup_theta_hs = l.rows.iter().map(|r| r.theta_hs).fold(0.0, f64::max);
            point.sup_u_hs = l.rows.iter().map(|r| r.u_hs).fold(0.0, f64::max);
            point.int_grad_theta_hs = *l.cumulative(|r| r.grad_theta_hs * r.grad_theta_hs).last().unwrap_or(&0.0);
            point.int_grad_u_hs = *l.cumulative(|r| r.grad_u_hs * r.grad_u_hs).last().unwrap_or(&0.0);
            point.steps = traj.steps;
            let zero = initial_theta_hs == 0.0 && initial_u_hs == 0.0;
            point.pass = point.int_grad_theta_hs.is_finite()
                && point.int_grad_u_hs.is_finite()
                && (zero
                    || growth_ok(point.sup_theta_hs, initial_theta_hs, cfg.growth_cap)
                        && growth_ok(point.sup_u_hs, initial_u_hs, cfg.growth_cap));
        }
        Err(e) if e.is_numeric() => point.failure = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(point)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
    /// Every admissible point passed; points outside are reported only.
    pub pass: bool,
}

/// Points run concurrently on the current rayon pool.
pub fn regularity_sweep(points: &[(f64, f64)], cfg: &SweepConfig) -> Result<SweepReport> {
    let points = points
        .par_iter()
        .map(|&(a, b)| sweep_point(a, b, cfg))
        .collect::<Result<Vec<_>>>()?;
    let pass = points.iter().filter(|p| p.admissible).all(|p| p.pass);
    Ok(SweepReport {
        config: cfg.clone(),
        points,
        pass,
    })
}

impl SweepReport {
    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            s_theta: f64,
            s_u: f64,
            admissible: bool,
            initial_theta_hs: f64,
            initial_u_hs: f64,
            sup_theta_hs: f64,
            sup_u_hs: f64,
            int_grad_theta_hs: f64,
            int_grad_u_hs: f64,
            steps: usize,
            pass: bool,
            failure: &'a str,
        }
        let mut w = csv::Writer::from_path(path)?;
        for p in &self.points {
            w.serialize(Row {
                s_theta: p.s_theta,
                s_u: p.s_u,
                admissible: p.admissible,
                initial_theta_hs: p.initial_theta_hs,
                initial_u_hs: p.initial_u_hs,
                sup_theta_hs: p.sup_theta_hs,
                sup_u_hs: p.sup_u_hs,
                int_grad_theta_hs: p.int_grad_theta_hs,
                int_grad_u_hs: p.int_grad_u_hs,
                steps: p.steps,
                pass: p.pass,
                failure: p.failure.as_deref().unwrap_or(""),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrangle_membership() {
        assert!(QUADRANGLE_POINTS.iter().all(|&(a, b)| is_admissible(a, b)));
        assert!(!is_admissible(0.5, 0.0));
        assert!(!is_admissible(3.5, 1.0));
        assert!(!is_admissible(1.0, 2.5));
    }

    #[test]
    fn zero_data_point_stays_zero() {
        let cfg = SweepConfig {
            n: 16,
            t_end: 0.05,
            theta_norm: 0.0,
            u_norm: 0.0,
            ..SweepConfig::default()
        };
        let p = sweep_point(1.0, 0.0, &cfg).unwrap();
        assert!(p.pass);
        assert_eq!((p.sup_theta_hs, p.sup_u_hs, p.int_grad_theta_hs), (0.0, 0.0, 0.0));
    }

    #[test]
    fn coarse_sweep_is_bounded() {
        let cfg = SweepConfig {
            n: 32,
            t_end: 0.1,
            ..SweepConfig::default()
        };
        let r = regularity_sweep(&QUADRANGLE_POINTS[..3], &cfg).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.points.len(), 3);
    }
}
