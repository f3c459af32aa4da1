//! Friedrich-truncated Boussinesq system and the linear parabolic model problem.
//!
//! ```text
//! ∂ₜθ = −P_n(u·∇θ) + P_n div(a(θ)∇θ)
//! ∂ₜu = −P_nℙ(u·∇u) + P_nℙ div(b(θ)Su) + βℙ(θe₂)
//! ```

mod config;
mod integrator;
mod parabolic;
mod pressure;
mod rhs;
mod run;

use std::sync::Arc;

pub use config::{Dt, Scheme, TimeStepperConfig};
pub use parabolic::{solve_parabolic, ParabolicProblem, ParabolicTrajectory};
pub use pressure::{momentum_forcing, recover_pressure};
pub use rhs::{explicit_rhs, rhs, StateDiagnostics};
pub use run::{ledger_row, run, run_with_probes, stability_bound, step, Probe, ProbeRecord, Trajectory};

use crate::error::{Error, Result};
use crate::laws::{CoefficientLaw, PrimitiveTransform};
use crate::spectral::{leray_project, truncate, truncate_vector, CutoffIndex, ScalarField, VectorField};

/// Coefficient laws and buoyancy strength.
#[derive(Debug, Clone)]
pub struct Physics {
    pub thermal: PrimitiveTransform,
    pub viscosity: CoefficientLaw,
    pub beta: f64,
}

impl Physics {
    pub fn new(thermal: CoefficientLaw, viscosity: CoefficientLaw, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Validation(format!(
                "buoyancy coefficient must be nonnegative, got {beta}"
            )));
        }
        Ok(Self {
            thermal: PrimitiveTransform::new(thermal),
            viscosity,
            beta,
        })
    }

    pub fn constant(kappa: f64, mu: f64, beta: f64) -> Result<Self> {
        Self::new(
            CoefficientLaw::constant(kappa)?,
            CoefficientLaw::constant(mu)?,
            beta,
        )
    }

    pub fn thermal_law(&self) -> &CoefficientLaw {
        self.thermal.law()
    }
}

/// `(θ, u, t)` with the cutoff and laws it evolves under.
#[derive(Debug, Clone)]
pub struct SimState {
    pub theta: ScalarField,
    pub u: VectorField,
    pub time: f64,
    pub cutoff: CutoffIndex,
    pub physics: Arc<Physics>,
}

impl SimState {
    /// Applies `P_n` to both fields and `ℙ` to the velocity.
    pub fn new(
        theta: ScalarField,
        u: VectorField,
        cutoff: CutoffIndex,
        physics: Arc<Physics>,
    ) -> Result<Self> {
        theta.grid().ensure_compatible(u.grid())?;
        CutoffIndex::new(cutoff.radius(), theta.grid())?;
        let theta = truncate(&theta, cutoff);
        let u = truncate_vector(&leray_project(&u), cutoff);
        Ok(Self {
            theta,
            u,
            time: 0.0,
            cutoff,
            physics,
        })
    }

    pub fn zero(grid: crate::spectral::Grid, physics: Arc<Physics>) -> Self {
        Self {
            theta: ScalarField::zeros(grid),
            u: VectorField::zeros(grid),
            time: 0.0,
            cutoff: grid.default_cutoff(),
            physics,
        }
    }

    pub fn grid(&self) -> &crate::spectral::Grid {
        self.theta.grid()
    }

    /// Same state with new fields, re-imposing the Friedrich invariants.
    pub(crate) fn with_fields(&self, theta: ScalarField, u: VectorField, time: f64) -> Self {
        Self {
            theta: truncate(&theta, self.cutoff),
            u: truncate_vector(&leray_project(&u), self.cutoff),
            time,
            cutoff: self.cutoff,
            physics: self.physics.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.u.is_finite()
    }
}
