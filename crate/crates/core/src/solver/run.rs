use serde::{Deserialize, Serialize};

use super::config::{Dt, TimeStepperConfig};
use super::integrator::{imex_step, ImexSystem};
use super::rhs::{evaluate, StateDiagnostics};
use super::{Physics, SimState};
use crate::diagnostics::ledger::{EnergyLedger, LedgerRow};
use crate::error::{Error, Result};
use crate::laws::{eta_forward, eta_gradient};
use crate::spectral::{
    gradient, gradient_norm_sq, laplacian, laplacian_vector, strain, strain_norm_sq, tail_norm,
    CutoffIndex, ScalarField, VectorField,
};

struct Boussinesq<'a> {
    physics: &'a Physics,
    cutoff: CutoffIndex,
}

impl Boussinesq<'_> {
    fn split(y: &[ScalarField]) -> Result<(ScalarField, VectorField)> {
        Ok((y[0].clone(), VectorField::new(y[1].clone(), y[2].clone())?))
    }

    /// Explicit tendency plus the budget terms of the state it was taken at.
    fn explicit_with_diag(
        &self,
        theta: &ScalarField,
        u: &VectorField,
    ) -> Result<(Vec<ScalarField>, StateDiagnostics)> {
        let e = evaluate(theta, u, self.physics, self.cutoff)?;
        let k = self.physics.thermal_law().lower_bound();
        let m = self.physics.viscosity.lower_bound();
        let lu = laplacian_vector(u);
        let [u1, u2] = e.du.into_components();
        Ok((
            vec![
                e.dtheta.axpy(-k, &laplacian(theta)),
                u1.axpy(-m, lu.component(0)),
                u2.axpy(-m, lu.component(1)),
            ],
            e.diag,
        ))
    }
}

impl ImexSystem for Boussinesq<'_> {
    fn diffusivities(&self) -> Vec<f64> {
        let k = self.physics.thermal_law().lower_bound();
        let m = self.physics.viscosity.lower_bound();
        vec![k, m, m]
    }

    fn explicit(&self, y: &[ScalarField], _t: f64) -> Result<Vec<ScalarField>> {
        let (theta, u) = Self::split(y)?;
        Ok(self.explicit_with_diag(&theta, &u)?.0)
    }
}

/// `min(Δx/‖u‖_∞, Δx²/(2(κ^*−κ_*)), Δx²/(2(μ^*−μ_*)))`; infinite when no
/// term constrains the step.
pub fn stability_bound(state: &SimState, u_linf: f64) -> f64 {
    let dx = state.grid().spacing();
    let a = state.physics.thermal_law();
    let b = &state.physics.viscosity;
    let mut bound = f64::INFINITY;
    if u_linf > 0.0 {
        bound = bound.min(dx / u_linf);
    }
    for spread in [a.upper_bound() - a.lower_bound(), b.upper_bound() - b.lower_bound()] {
        if spread > 0.0 {
            bound = bound.min(dx * dx / (2.0 * spread));
        }
    }
    bound
}

fn advance(
    state: &SimState,
    scheme: super::Scheme,
    dt: f64,
    e0: Vec<ScalarField>,
) -> Result<SimState> {
    let sys = Boussinesq {
        physics: &state.physics,
        cutoff: state.cutoff,
    };
    let y = [
        state.theta.clone(),
        state.u.component(0).clone(),
        state.u.component(1).clone(),
    ];
    let next = imex_step(&sys, scheme, &y, &e0, state.time, dt)
        .map_err(|e| e.at_time(state.time))?;
    let (theta, u) = Boussinesq::split(&next)?;
    let out = state.with_fields(theta, u, state.time + dt);
    if !out.is_finite() {
        return Err(Error::NumericBlowUp {
            term: "time step".into(),
            time: out.time,
        });
    }
    Ok(out)
}

fn first_stage(state: &SimState) -> Result<(Vec<ScalarField>, StateDiagnostics)> {
    Boussinesq {
        physics: &state.physics,
        cutoff: state.cutoff,
    }
    .explicit_with_diag(&state.theta, &state.u)
    .map_err(|e| e.at_time(state.time))
}

/// One step of size `cfg.dt` (or the automatic choice, capped at the
/// remaining time to `t_end`).
pub fn step(state: &SimState, cfg: &TimeStepperConfig) -> Result<SimState> {
    cfg.validate()?;
    let (e0, diag) = first_stage(state)?;
    let bound = stability_bound(state, diag.u_linf);
    let dt = match cfg.dt {
        Dt::Fixed(dt) => {
            if dt > bound {
                return Err(Error::RejectedStep {
                    dt,
                    bound,
                    time: state.time,
                });
            }
            dt
        }
        Dt::Auto => auto_dt(cfg, bound, cfg.t_end - state.time),
    };
    advance(state, cfg.scheme, dt, e0)
}

fn auto_dt(cfg: &TimeStepperConfig, bound: f64, remaining: f64) -> f64 {
    let mut dt = cfg.snapshot_interval;
    if bound.is_finite() {
        dt = dt.min(cfg.cfl_safety * bound);
    }
    if remaining > 0.0 {
        dt = dt.min(remaining);
    }
    dt
}

/// Ledger row for `state`, with budget terms from the padded samples.
pub fn ledger_row(state: &SimState, diag: &StateDiagnostics, exponents: (f64, f64)) -> LedgerRow {
    let (st, su) = exponents;
    let gt = gradient(&state.theta);
    let grad_u_hs = state
        .u
        .components()
        .iter()
        .map(|c| gradient(c).sobolev_norm(su).powi(2))
        .sum::<f64>()
        .sqrt();
    LedgerRow {
        t: state.time,
        theta_l2: state.theta.l2_norm(),
        grad_theta_l2: gt.l2_norm(),
        u_l2: state.u.l2_norm(),
        grad_u_l2: gradient_norm_sq(&state.u).sqrt(),
        strain_l2: strain_norm_sq(&strain(&state.u)).sqrt(),
        laplacian_theta_l2: laplacian(&state.theta).l2_norm(),
        dtheta_dt_l2: diag.dtheta_dt_l2,
        grad_theta_mid_sq: 0.0,
        grad_u_mid_sq: 0.0,
        dissipation_theta: diag.dissipation_theta,
        dissipation_u: diag.dissipation_u,
        buoyancy_power: diag.buoyancy_power,
        theta_hs: state.theta.sobolev_norm(st),
        u_hs: state.u.sobolev_norm(su),
        grad_theta_hs: gt.sobolev_norm(st),
        grad_u_hs,
        theta_min: diag.theta_min,
        theta_max: diag.theta_max,
        u_linf: diag.u_linf,
        residual_theta: 0.0,
        residual_u: 0.0,
    }
}

/// Extra per-snapshot checks recorded alongside the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// `‖f − P_n f‖ / ‖f‖` for θ and u
    Support,
    /// relative `max |k·û|`
    Divergence,
    /// `‖η‖/‖θ‖` and `‖∇η‖/‖∇θ‖`
    Eta,
    /// physical-space range of θ
    MaxPrinciple,
}

impl Probe {
    pub const ALL: [Probe; 4] = [Probe::Support, Probe::Divergence, Probe::Eta, Probe::MaxPrinciple];

    pub fn name(&self) -> &'static str {
        match self {
            Probe::Support => "support",
            Probe::Divergence => "divergence",
            Probe::Eta => "eta",
            Probe::MaxPrinciple => "max_principle",
        }
    }

    pub fn parse(name: &str) -> Option<Probe> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub t: f64,
    pub probe: &'static str,
    pub quantity: &'static str,
    pub value: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn probe(state: &SimState, p: Probe, out: &mut Vec<ProbeRecord>) -> Result<()> {
    let t = state.time;
    let mut rec = |quantity, value| {
        out.push(ProbeRecord {
            t,
            probe: p.name(),
            quantity,
            value,
        })
    };
    match p {
        Probe::Support => {
            let n = state.cutoff;
            rec("theta_tail", ratio(tail_norm(&state.theta, n), state.theta.l2_norm()));
            let ut = tail_norm(state.u.component(0), n).hypot(tail_norm(state.u.component(1), n));
            rec("u_tail", ratio(ut, state.u.l2_norm()));
        }
        Probe::Divergence => rec("divergence_defect", state.u.divergence_defect()),
        Probe::Eta => {
            let eta = eta_forward(&state.physics.thermal, &state.theta)?;
            let [g0, g1] = eta_gradient(state.physics.thermal_law(), &state.theta)?;
            rec("eta_ratio", ratio(eta.l2_norm(), state.theta.l2_norm()));
            rec(
                "grad_eta_ratio",
                ratio(g0.l2_norm().hypot(g1.l2_norm()), gradient(&state.theta).l2_norm()),
            );
        }
        Probe::MaxPrinciple => {
            let p = crate::spectral::PhysicalField::from_spectral(&state.theta);
            rec("theta_min", p.min());
            rec("theta_max", p.max());
        }
    }
    Ok(())
}

/// States at the snapshot times, the per-step ledger and probe output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<SimState>,
    pub ledger: EnergyLedger,
    pub probes: Vec<ProbeRecord>,
    pub steps: usize,
    /// The uniform step when `dt` was fixed.
    pub dt: Option<f64>,
}

pub fn run(initial: &SimState, cfg: &TimeStepperConfig) -> Result<Trajectory> {
    run_with_probes(initial, cfg, &[], (1.0, 0.0))
}

/// Integrates to `cfg.t_end`, recording a ledger row at every step and a
/// snapshot (with probes) every `snapshot_interval`.
pub fn run_with_probes(
    initial: &SimState,
    cfg: &TimeStepperConfig,
    probes: &[Probe],
    exponents: (f64, f64),
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut ledger = EnergyLedger::new(exponents);
    let mut records = Vec::new();
    let mut snapshots = vec![initial.clone()];
    for &p in probes {
        probe(initial, p, &mut records)?;
    }
    let uniform = cfg.uniform_dt();
    let mut state = initial.clone();
    let mut steps = 0usize;
    let mut next_snap = cfg.snapshot_interval;
    let t_end = cfg.t_end;
    let mut mid = (0.0, 0.0);
    loop {
        let (e0, diag) = first_stage(&state)?;
        ledger.push(LedgerRow {
            grad_theta_mid_sq: mid.0,
            grad_u_mid_sq: mid.1,
            ..ledger_row(&state, &diag, exponents)
        });
        let done = match uniform {
            Some((_, n)) => steps >= n,
            None => state.time >= t_end * (1.0 - 1e-14),
        };
        if done {
            break;
        }
        let bound = stability_bound(&state, diag.u_linf);
        let dt = match uniform {
            Some((dt, _)) => {
                if dt > bound {
                    return Err(Error::RejectedStep {
                        dt,
                        bound,
                        time: state.time,
                    });
                }
                dt
            }
            None => auto_dt(cfg, bound, t_end - state.time),
        };
        let mut next = advance(&state, cfg.scheme, dt, e0)?;
        steps += 1;
        mid = (
            gradient(&state.theta.axpy(1.0, &next.theta)).l2_norm_sq() / 4.0,
            gradient_norm_sq(&state.u.axpy(1.0, &next.u)) / 4.0,
        );
        if let Some((dt, _)) = uniform {
            // avoid drift from repeated addition
            next.time = steps as f64 * dt;
        }
        state = next;
        let last = match uniform {
            Some((_, n)) => steps >= n,
            None => state.time >= t_end * (1.0 - 1e-14),
        };
        if state.time >= next_snap - 1e-9 * dt || last {
            while next_snap <= state.time + 1e-9 * dt {
                next_snap += cfg.snapshot_interval;
            }
            for &p in probes {
                probe(&state, p, &mut records)?;
            }
            snapshots.push(state.clone());
        }
    }
    ledger.fill_residuals();
    Ok(Trajectory {
        snapshots,
        ledger,
        probes: records,
        steps,
        dt: uniform.map(|u| u.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::sync::Arc;

    #[test]
    fn zero_end_time_gives_initial_only() {
        let g = Grid::new(16, 1.0).unwrap();
        let p = Arc::new(Physics::constant(1.0, 1.0, 1.0).unwrap());
        let th = ScalarField::from_fn(g, |x, y| x.cos() * y.sin());
        let s = SimState::new(th, VectorField::zeros(g), g.default_cutoff(), p).unwrap();
        let tr = run(&s, &TimeStepperConfig::fixed(0.01, 0.0)).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.ledger.rows.len(), 1);
        assert_eq!(tr.steps, 0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::new(16, 1.0).unwrap();
        let p = Arc::new(Physics::constant(1.0, 1.0, 1.0).unwrap());
        let s = SimState::zero(g, p);
        let tr = run(&s, &TimeStepperConfig::fixed(0.01, 0.1)).unwrap();
        let last = tr.snapshots.last().unwrap();
        assert_eq!(last.theta.max_abs_coeff(), 0.0);
        assert_eq!(last.u.max_abs_coeff(), 0.0);
        assert!(tr.ledger.rows.iter().all(|r| r.residual_theta == 0.0 && r.residual_u == 0.0));
    }

    #[test]
    fn fixed_step_above_bound_is_rejected() {
        let g = Grid::new(32, 1.0).unwrap();
        let law = crate::laws::builtin_law(&crate::laws::LawSpec::TanhSmooth {
            lo: 1.0,
            hi: 3.0,
            center: 0.0,
            width: 1.0,
        })
        .unwrap();
        let p = Arc::new(Physics::new(law, crate::laws::CoefficientLaw::constant(1.0).unwrap(), 1.0).unwrap());
        let th = ScalarField::from_fn(g, |x, _| x.sin());
        let s = SimState::new(th, VectorField::zeros(g), g.default_cutoff(), p).unwrap();
        let err = step(&s, &TimeStepperConfig::fixed(0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::RejectedStep { .. }));
        let mut auto = TimeStepperConfig::fixed(0.1, 1.0);
        auto.dt = Dt::Auto;
        let next = step(&s, &auto).unwrap();
        let dx = g.spacing();
        assert!((next.time - 0.5 * dx * dx / 4.0).abs() < 1e-15);
    }
}
