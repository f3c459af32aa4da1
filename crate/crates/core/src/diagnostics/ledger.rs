use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// One row per accepted step (plus the initial and final states).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub theta_l2: f64,
    pub grad_theta_l2: f64,
    pub u_l2: f64,
    pub grad_u_l2: f64,
    pub strain_l2: f64,
    pub laplacian_theta_l2: f64,
    pub dtheta_dt_l2: f64,
    /// `‖∇θ‖²` and `‖∇u‖²` at the average of this state and the previous
    /// one (zero on the first row), the quadrature node that matches
    /// Crank–Nicolson dissipation.
    pub grad_theta_mid_sq: f64,
    pub grad_u_mid_sq: f64,
    /// `∫ κ |∇θ|²`
    pub dissipation_theta: f64,
    /// `½ ∫ μ |Su|²`
    pub dissipation_u: f64,
    /// `β ∫ θ u₂`
    pub buoyancy_power: f64,
    pub theta_hs: f64,
    pub u_hs: f64,
    /// `‖∇θ‖_{H^{s_θ}}` and `‖∇u‖_{H^{s_u}}`
    pub grad_theta_hs: f64,
    pub grad_u_hs: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub u_linf: f64,
    pub residual_theta: f64,
    pub residual_u: f64,
}

/// Time series of norms and energy budget terms along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    /// Sobolev exponents `(s_θ, s_u)` of the `*_hs` columns.
    pub exponents: (f64, f64),
    pub rows: Vec<LedgerRow>,
}

const TINY: f64 = f64::MIN_POSITIVE;

impl EnergyLedger {
    pub fn new(exponents: (f64, f64)) -> Self {
        Self {
            exponents,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: LedgerRow) {
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&LedgerRow> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    /// Running trapezoid integral of `f` over the rows.
    pub fn cumulative(&self, f: impl Fn(&LedgerRow) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows.len());
        let mut acc = 0.0;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                let p = &self.rows[i - 1];
                acc += 0.5 * (r.t - p.t) * (f(p) + f(r));
            }
            out.push(acc);
        }
        out
    }

    /// Running midpoint-rule integral of `f`, which reads the value on the
    /// step ending at each row.
    pub fn cumulative_midpoint(&self, f: impl Fn(&LedgerRow) -> f64) -> Vec<f64> {
        let mut acc = 0.0;
        let mut prev = self.rows.first().map_or(0.0, |r| r.t);
        self.rows
            .iter()
            .map(|r| {
                acc += (r.t - prev) * f(r);
                prev = r.t;
                acc
            })
            .collect()
    }

    /// Fills the residual columns from the recorded budget terms.
    pub fn fill_residuals(&mut self) {
        if self.rows.is_empty() {
            return;
        }
        let rt = residual_theta_series(self);
        let ru = residual_u_series(self);
        for ((row, a), b) in self.rows.iter_mut().zip(rt).zip(ru) {
            row.residual_theta = a;
            row.residual_u = b;
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>, exponents: (f64, f64)) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let rows = r.deserialize().collect::<std::result::Result<Vec<LedgerRow>, _>>()?;
        if rows.is_empty() {
            return Err(Error::Degenerate("ledger has no rows".into()));
        }
        Ok(Self { exponents, rows })
    }
}

/// `|½‖θ(t)‖² + ∫₀ᵗ diss_θ − ½‖θ₀‖²| / max(½‖θ₀‖², ε)`.
pub fn residual_theta_series(ledger: &EnergyLedger) -> Vec<f64> {
    let Some(r0) = ledger.first() else {
        return Vec::new();
    };
    let e0 = 0.5 * r0.theta_l2 * r0.theta_l2;
    let diss = ledger.cumulative(|r| r.dissipation_theta);
    ledger
        .rows
        .iter()
        .zip(diss)
        .map(|(r, d)| (0.5 * r.theta_l2 * r.theta_l2 + d - e0).abs() / e0.max(TINY))
        .collect()
}

/// Kinetic energy balance with buoyancy work, normalized by the largest
/// kinetic energy seen so far (the initial one may vanish).
pub fn residual_u_series(ledger: &EnergyLedger) -> Vec<f64> {
    let Some(r0) = ledger.first() else {
        return Vec::new();
    };
    let e0 = 0.5 * r0.u_l2 * r0.u_l2;
    let diss = ledger.cumulative(|r| r.dissipation_u);
    let work = ledger.cumulative(|r| r.buoyancy_power);
    let mut scale = e0;
    ledger
        .rows
        .iter()
        .zip(diss.iter().zip(work.iter()))
        .map(|(r, (d, w))| {
            let e = 0.5 * r.u_l2 * r.u_l2;
            scale = scale.max(e);
            (e + d - w - e0).abs() / scale.max(TINY)
        })
        .collect()
}
