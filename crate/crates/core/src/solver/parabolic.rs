//! `∂ₜψ + u·∇ψ − div(κ∇ψ) = f` with prescribed `u`, `κ` and `f`.

use ndarray::Array2;

use super::config::{Dt, TimeStepperConfig};
use super::integrator::{imex_step, ImexSystem};
use crate::error::{Error, Result};
use crate::spectral::{partial, Grid, PhysicalField, ScalarField};

type Field2 = Box<dyn Fn(f64, f64, f64) -> (f64, f64) + Send + Sync>;
type Field1 = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Coefficients are functions of `(t, x₁, x₂)`.
pub struct ParabolicProblem {
    pub velocity: Field2,
    pub kappa: Field1,
    /// Declared `[κ_*, κ^*]`; samples outside are rejected.
    pub kappa_bounds: (f64, f64),
    pub source: Field1,
    pub psi0: ScalarField,
}

impl std::fmt::Debug for ParabolicProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParabolicProblem")
            .field("kappa_bounds", &self.kappa_bounds)
            .field("grid", self.psi0.grid())
            .finish_non_exhaustive()
    }
}

impl ParabolicProblem {
    /// Heat equation with constant `κ` and no transport or source.
    pub fn heat(kappa: f64, psi0: ScalarField) -> Self {
        Self {
            velocity: Box::new(|_, _, _| (0.0, 0.0)),
            kappa: Box::new(move |_, _, _| kappa),
            kappa_bounds: (kappa, kappa),
            source: Box::new(|_, _, _| 0.0),
            psi0,
        }
    }

    fn grid(&self) -> Grid {
        *self.psi0.grid()
    }

    fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        let g = self.grid();
        let m = g.padded_n();
        let h = g.period() / m as f64;
        Array2::from_shape_fn((m, m), |(i, j)| f(i as f64 * h, j as f64 * h))
    }

    fn max_speed(&self, t: f64) -> f64 {
        let s = self.sample(|x, y| {
            let (a, b) = (self.velocity)(t, x, y);
            a.hypot(b)
        });
        s.iter().fold(0.0, |m, v| m.max(*v))
    }
}

impl ImexSystem for ParabolicProblem {
    fn diffusivities(&self) -> Vec<f64> {
        vec![self.kappa_bounds.0]
    }

    fn explicit(&self, y: &[ScalarField], t: f64) -> Result<Vec<ScalarField>> {
        let g = self.grid();
        let psi = &y[0];
        let (lo, hi) = self.kappa_bounds;
        let gx = PhysicalField::from_spectral(&partial(psi, 0));
        let gy = PhysicalField::from_spectral(&partial(psi, 1));
        let u1 = self.sample(|x, y| (self.velocity)(t, x, y).0);
        let u2 = self.sample(|x, y| (self.velocity)(t, x, y).1);
        let kap = self.sample(|x, y| (self.kappa)(t, x, y));
        if let Some(k) = kap.iter().find(|k| !(**k >= lo - 1e-12 && **k <= hi + 1e-12)) {
            return Err(Error::Validation(format!(
                "κ = {k} outside its declared bounds [{lo}, {hi}]"
            )));
        }
        let f = self.sample(|x, y| (self.source)(t, x, y));
        let adv = &u1 * gx.values() + &u2 * gy.values();
        let excess = kap.mapv(|k| k - lo);
        let fx = PhysicalField::from_values(g, &excess * gx.values())?.to_spectral();
        let fy = PhysicalField::from_values(g, &excess * gy.values())?.to_spectral();
        let rest = PhysicalField::from_values(g, f - adv)?;
        if !rest.is_finite() {
            return Err(Error::NumericBlowUp {
                term: "parabolic source or transport".into(),
                time: t,
            });
        }
        Ok(vec![&(&partial(&fx, 0) + &partial(&fy, 1)) + &rest.to_spectral()])
    }
}

#[derive(Debug, Clone)]
pub struct ParabolicTrajectory {
    pub snapshots: Vec<(f64, ScalarField)>,
    /// `(t, ‖ψ(t)‖_{L²})` at every step
    pub l2: Vec<(f64, f64)>,
    pub steps: usize,
    pub dt: Option<f64>,
}

impl ParabolicTrajectory {
    pub fn last(&self) -> &ScalarField {
        &self.snapshots.last().expect("at least the initial field").1
    }
}

pub fn solve_parabolic(p: &ParabolicProblem, cfg: &TimeStepperConfig) -> Result<ParabolicTrajectory> {
    cfg.validate()?;
    let (lo, hi) = p.kappa_bounds;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Validation(format!(
            "κ bounds must satisfy 0 < κ_* ≤ κ^*, got [{lo}, {hi}]"
        )));
    }
    let g = p.grid();
    let dx = g.spacing();
    let uniform = cfg.uniform_dt();
    let mut psi = p.psi0.clone();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut snapshots = vec![(0.0, psi.clone())];
    let mut l2 = vec![(0.0, psi.l2_norm())];
    let mut next_snap = cfg.snapshot_interval;
    loop {
        let done = match uniform {
            Some((_, n)) => steps >= n,
            None => t >= cfg.t_end * (1.0 - 1e-14),
        };
        if done {
            break;
        }
        let speed = p.max_speed(t);
        let mut bound = f64::INFINITY;
        if speed > 0.0 {
            bound = dx / speed;
        }
        if hi > lo {
            bound = bound.min(dx * dx / (2.0 * (hi - lo)));
        }
        let dt = match (uniform, cfg.dt) {
            (Some((dt, _)), _) => {
                if dt > bound {
                    return Err(Error::RejectedStep { dt, bound, time: t });
                }
                dt
            }
            (None, Dt::Auto) | (None, Dt::Fixed(_)) => {
                let mut dt = cfg.snapshot_interval.min(cfg.t_end - t);
                if bound.is_finite() {
                    dt = dt.min(cfg.cfl_safety * bound);
                }
                dt
            }
        };
        let y = [psi];
        let e0 = p.explicit(&y, t)?;
        let [old] = y;
        let mut next = imex_step(p, cfg.scheme, std::slice::from_ref(&old), &e0, t, dt)?;
        psi = next.swap_remove(0);
        steps += 1;
        t = match uniform {
            Some((dt, _)) => steps as f64 * dt,
            None => t + dt,
        };
        if !psi.is_finite() {
            return Err(Error::NumericBlowUp {
                term: "parabolic step".into(),
                time: t,
            });
        }
        l2.push((t, psi.l2_norm()));
        let last = match uniform {
            Some((_, n)) => steps >= n,
            None => t >= cfg.t_end * (1.0 - 1e-14),
        };
        if t >= next_snap - 1e-9 * dt || last {
            while next_snap <= t + 1e-9 * dt {
                next_snap += cfg.snapshot_interval;
            }
            snapshots.push((t, psi.clone()));
        }
    }
    Ok(ParabolicTrajectory {
        snapshots,
        l2,
        steps,
        dt: uniform.map(|u| u.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Scheme;

    #[test]
    fn heat_mode_decays_exactly_to_scheme_order() {
        let g = Grid::new(16, 1.0).unwrap();
        let psi0 = ScalarField::from_fn(g, |x, y| (2.0 * x + y).cos());
        let p = ParabolicProblem::heat(0.5, psi0.clone());
        for scheme in [Scheme::ImexCnRk2, Scheme::ImexEtdRk3] {
            let cfg = TimeStepperConfig::fixed(0.01, 1.0).with_scheme(scheme);
            let tr = solve_parabolic(&p, &cfg).unwrap();
            let exact = psi0.scaled((-0.5f64 * 5.0).exp());
            let err = (tr.last() - &exact).max_abs_coeff();
            // CN amplification error ≈ (κ|k|²)³dt²/12 per unit time; ETD is exact here
            let tol = if scheme == Scheme::ImexCnRk2 { 2e-4 } else { 1e-15 };
            assert!(err < tol, "{scheme:?}: {err}");
        }
    }
}
