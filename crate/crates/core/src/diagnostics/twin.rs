//! Twin runs: two nearby initial states under the same stepper, compared in
//! the `H¹(η) × L²(u)` distance against a Gronwall weight built from the
//! computed trajectories.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::initial::{random_hs_scalar, random_hs_velocity};
use crate::laws::{apply_law, eta_forward};
use crate::solver::{step, Dt, SimState, TimeStepperConfig};
use crate::spectral::{divergence, gradient, gradient_norm_sq, PhysicalField, VectorField};

/// Slack allowed between perturbation sizes, and on the growth bound.
pub const TWIN_SLACK: f64 = 0.25;

const PERTURBATION_SEED: u64 = 0x7715;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbTarget {
    /// `‖δθ₀‖_{H¹}` equals the perturbation size
    Temperature,
    /// `‖δu₀‖_{L²}` equals the perturbation size
    Velocity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwinReport {
    pub perturbation: f64,
    pub target: PerturbTarget,
    pub times: Vec<f64>,
    /// `D(t) = ‖η₁ − η₂‖²_{H¹} + ‖u₁ − u₂‖²_{L²}`
    pub distance: Vec<f64>,
    /// Running trapezoid integral of the weight `B`.
    pub b_integral: Vec<f64>,
    /// `max_t log(D(t)/D(0)) / ∫₀ᵗB`; absent when `D(0) = 0`.
    pub c_emp: Option<f64>,
    pub max_distance: f64,
}

impl TwinReport {
    pub fn growth(&self) -> f64 {
        let d0 = self.distance[0];
        if d0 == 0.0 {
            return 0.0;
        }
        self.distance[self.distance.len() - 1] / d0
    }

    pub fn total_b(&self) -> f64 {
        self.b_integral[self.b_integral.len() - 1]
    }
}

fn sq_sum(a: &PhysicalField, b: &PhysicalField) -> PhysicalField {
    &(a * a) + &(b * b)
}

fn grad_physical(f: &crate::spectral::ScalarField) -> [PhysicalField; 2] {
    let g = gradient(f);
    [
        PhysicalField::from_spectral(g.component(0)),
        PhysicalField::from_spectral(g.component(1)),
    ]
}

/// `D` between two states; η differences are taken on the padded grid.
pub fn twin_distance(a: &SimState, b: &SimState) -> Result<f64> {
    let pt = &a.physics.thermal;
    let law = pt.law();
    let de = &eta_forward(pt, &a.theta)? - &eta_forward(pt, &b.theta)?;
    let [a0, a1] = grad_physical(&a.theta);
    let [b0, b1] = grad_physical(&b.theta);
    let ka = apply_law(law, &a.theta)?;
    let kb = apply_law(law, &b.theta)?;
    let g0 = &(&ka * &a0) - &(&kb * &b0);
    let g1 = &(&ka * &a1) - &(&kb * &b1);
    let du = a.u.axpy(-1.0, &b.u);
    Ok(de.l2_norm().powi(2) + sq_sum(&g0, &g1).integral() + du.l2_norm_sq())
}

/// The uniqueness weight
/// `(‖∇θ₁‖⁴_{L⁴} + ‖∇η₂‖² + ‖Δη₂‖² + 1 + ‖∇u₂‖² + ‖u₁‖⁴_{L⁴} + ‖∇η₂‖⁴_{L⁴})(1 + ‖∇η₁‖_{L⁴})`.
pub fn gronwall_weight(one: &SimState, two: &SimState) -> Result<f64> {
    let law = one.physics.thermal_law();
    let [a0, a1] = grad_physical(&one.theta);
    let grad1_sq = sq_sum(&a0, &a1);
    let k1 = apply_law(law, &one.theta)?;
    let eta1_sq = &(&k1 * &k1) * &grad1_sq;
    let [b0, b1] = grad_physical(&two.theta);
    let k2 = apply_law(law, &two.theta)?;
    let (e0, e1) = (&k2 * &b0, &k2 * &b1);
    let eta2_sq = sq_sum(&e0, &e1);
    let lap_eta2 = divergence(&VectorField::new(e0.to_spectral(), e1.to_spectral())?);
    let u1 = PhysicalField::from_spectral(one.u.component(0));
    let u2 = PhysicalField::from_spectral(one.u.component(1));
    let speed_sq = sq_sum(&u1, &u2);
    let fourth = |f: &PhysicalField| (f * f).integral();
    let b = fourth(&grad1_sq)
        + eta2_sq.integral()
        + lap_eta2.l2_norm_sq()
        + 1.0
        + gradient_norm_sq(&two.u)
        + fourth(&speed_sq)
        + fourth(&eta2_sq);
    let weight = 1.0 + fourth(&eta1_sq).powf(0.25);
    Ok(b * weight)
}

/// Perturbs `base` and evolves both states with the same fixed step.
pub fn twin_run(
    base: &SimState,
    size: f64,
    target: PerturbTarget,
    cfg: &TimeStepperConfig,
) -> Result<TwinReport> {
    cfg.validate()?;
    let Some((dt, n)) = cfg.uniform_dt() else {
        return Err(Error::Validation("twin runs need a fixed time step".into()));
    };
    if !(size.is_finite() && size >= 0.0) {
        return Err(Error::Validation(format!("perturbation size must be nonnegative, got {size}")));
    }
    let grid = *base.grid();
    let mut two = match target {
        PerturbTarget::Temperature => {
            let d = random_hs_scalar(grid, 1.0, size, PERTURBATION_SEED, 2);
            SimState::new(
                base.theta.axpy(1.0, &d),
                base.u.clone(),
                base.cutoff,
                base.physics.clone(),
            )?
        }
        PerturbTarget::Velocity => {
            let d = random_hs_velocity(grid, 0.0, size, PERTURBATION_SEED, 3);
            SimState::new(base.theta.clone(), base.u.axpy(1.0, &d), base.cutoff, base.physics.clone())?
        }
    };
    two.time = base.time;
    let mut one = base.clone();
    let step_cfg = TimeStepperConfig {
        dt: Dt::Fixed(dt),
        ..cfg.clone()
    };
    let mut times = vec![one.time];
    let mut distance = vec![twin_distance(&one, &two)?];
    let mut b_integral = vec![0.0];
    let mut b_prev = gronwall_weight(&one, &two)?;
    for k in 1..=n {
        one = step(&one, &step_cfg)?;
        two = step(&two, &step_cfg)?;
        let t = base.time + k as f64 * dt;
        one.time = t;
        two.time = t;
        let b = gronwall_weight(&one, &two)?;
        let acc = b_integral[b_integral.len() - 1] + 0.5 * dt * (b_prev + b);
        b_prev = b;
        times.push(t);
        distance.push(twin_distance(&one, &two)?);
        b_integral.push(acc);
    }
    let d0 = distance[0];
    let c_emp = (d0 > 0.0).then(|| {
        distance
            .iter()
            .zip(&b_integral)
            .skip(1)
            .filter(|(_, b)| **b > 0.0)
            .map(|(d, b)| (d / d0).ln() / b)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let max_distance = distance.iter().copied().fold(0.0, f64::max);
    Ok(TwinReport {
        perturbation: size,
        target,
        times,
        distance,
        b_integral,
        c_emp: c_emp.filter(|c| c.is_finite()),
        max_distance,
    })
}

/// Temperature perturbation with `‖δθ₀‖_{H¹} = size`.
pub fn twin_run_stability(base: &SimState, size: f64, cfg: &TimeStepperConfig) -> Result<TwinReport> {
    twin_run(base, size, PerturbTarget::Temperature, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwinStudy {
    pub reports: Vec<TwinReport>,
    /// `C_emp` of the reference perturbation
    pub c_ref: f64,
    /// `max |C_emp − C_ref| / |C_ref|`
    pub c_spread: f64,
    /// `max (D(T)/D(0)) / exp(C_ref ∫₀ᵀB)`
    pub growth_slack: f64,
    pub zero_perturbation_distance: f64,
    pub pass: bool,
}

/// Runs the zero perturbation and every size in `sizes`, calibrating
/// `C_ref` on `sizes[reference]`.
pub fn twin_stability_study(
    base: &SimState,
    sizes: &[f64],
    reference: usize,
    cfg: &TimeStepperConfig,
) -> Result<TwinStudy> {
    if reference >= sizes.len() {
        return Err(Error::Validation("reference index outside the size list".into()));
    }
    let mut reports = std::iter::once(0.0)
        .chain(sizes.iter().copied())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|s| twin_run_stability(base, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    let zero = reports.remove(0);
    let c_ref = reports[reference].c_emp.ok_or_else(|| {
        Error::Degenerate("reference perturbation produced no distance".into())
    })?;
    let mut c_spread = 0.0f64;
    let mut growth_slack = 0.0f64;
    for r in &reports {
        let c = r.c_emp.unwrap_or(f64::NAN);
        c_spread = c_spread.max(if c == c_ref { 0.0 } else { (c - c_ref).abs() / c_ref.abs() });
        growth_slack = growth_slack.max(r.growth() / (c_ref * r.total_b()).exp());
    }
    let pass = zero.max_distance <= 1e-24
        && c_spread <= TWIN_SLACK
        && growth_slack <= 1.0 + TWIN_SLACK;
    Ok(TwinStudy {
        reports,
        c_ref,
        c_spread,
        growth_slack,
        zero_perturbation_distance: zero.max_distance,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Physics;
    use crate::spectral::{Grid, ScalarField};
    use std::sync::Arc;

    fn base() -> SimState {
        let g = Grid::new(16, 1.0).unwrap();
        let p = Arc::new(Physics::constant(0.5, 0.5, 1.0).unwrap());
        let th = ScalarField::from_fn(g, |x, y| x.sin() * y.cos());
        let u = VectorField::from_fn(g, |x, y| (y.sin(), x.sin()));
        SimState::new(th, u, g.default_cutoff(), p).unwrap()
    }

    #[test]
    fn zero_perturbation_keeps_identical_runs() {
        let r = twin_run_stability(&base(), 0.0, &TimeStepperConfig::fixed(0.01, 0.1)).unwrap();
        assert_eq!(r.max_distance, 0.0);
        assert!(r.c_emp.is_none());
        assert_eq!(r.times.len(), 11);
    }

    #[test]
    fn initial_distance_matches_perturbation() {
        // constant κ = 0.5: D(0) = κ²‖δθ‖²_{H¹}
        let r = twin_run_stability(&base(), 1e-3, &TimeStepperConfig::fixed(0.01, 0.05)).unwrap();
        assert!((r.distance[0] - 0.25e-6).abs() < 1e-15);
        let v = twin_run(&base(), 1e-3, PerturbTarget::Velocity, &TimeStepperConfig::fixed(0.01, 0.05)).unwrap();
        assert!((v.distance[0] - 1e-6).abs() < 1e-15);
        assert!(r.c_emp.unwrap().is_finite());
        assert!(r.b_integral.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn auto_step_is_rejected() {
        let mut cfg = TimeStepperConfig::fixed(0.01, 0.05);
        cfg.dt = Dt::Auto;
        assert!(twin_run_stability(&base(), 1e-3, &cfg).is_err());
    }
}
