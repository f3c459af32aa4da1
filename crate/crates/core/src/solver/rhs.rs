use ndarray::Array2;
use serde::Serialize;

use super::{Physics, SimState};
use crate::error::{Error, Result};
use crate::laws::apply_law_physical;
use crate::spectral::{
    laplacian, laplacian_vector, leray_project, partial, truncate, truncate_vector, CutoffIndex,
    PhysicalField, ScalarField, VectorField,
};

/// Budget terms read off the padded samples used by the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateDiagnostics {
    pub dissipation_theta: f64,
    pub dissipation_u: f64,
    pub buoyancy_power: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub u_linf: f64,
    /// `‖∂ₜθ‖_{L²}` of the truncated system
    pub dtheta_dt_l2: f64,
}

pub(crate) struct Evaluation {
    pub dtheta: ScalarField,
    pub du: VectorField,
    pub diag: StateDiagnostics,
}

fn finite(f: &PhysicalField, term: &str) -> Result<()> {
    if f.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericBlowUp {
            term: term.into(),
            time: f64::NAN,
        })
    }
}

fn to_spectral(values: Array2<f64>, like: &PhysicalField, term: &str) -> Result<ScalarField> {
    let f = PhysicalField::from_values(*like.grid(), values)?;
    finite(&f, term)?;
    Ok(f.to_spectral())
}

fn cell(grid: &crate::spectral::Grid) -> f64 {
    let h = grid.period() / grid.padded_n() as f64;
    h * h
}

/// Full tendency of `(θ, u)` together with the budget terms at this state.
pub(crate) fn evaluate(
    theta: &ScalarField,
    u: &VectorField,
    physics: &Physics,
    cutoff: CutoffIndex,
) -> Result<Evaluation> {
    let grid = *theta.grid();
    let th = PhysicalField::from_spectral(theta);
    finite(&th, "temperature")?;
    let gt = [
        PhysicalField::from_spectral(&partial(theta, 0)),
        PhysicalField::from_spectral(&partial(theta, 1)),
    ];
    let uu = [
        PhysicalField::from_spectral(u.component(0)),
        PhysicalField::from_spectral(u.component(1)),
    ];
    finite(&uu[0], "velocity")?;
    finite(&uu[1], "velocity")?;
    // gu[i][j] = ∂_j u_i
    let gu = [
        [
            PhysicalField::from_spectral(&partial(u.component(0), 0)),
            PhysicalField::from_spectral(&partial(u.component(0), 1)),
        ],
        [
            PhysicalField::from_spectral(&partial(u.component(1), 0)),
            PhysicalField::from_spectral(&partial(u.component(1), 1)),
        ],
    ];
    let kappa = apply_law_physical(physics.thermal_law(), &th).map_err(|_| Error::NumericBlowUp {
        term: "thermal diffusivity".into(),
        time: f64::NAN,
    })?;
    let mu = apply_law_physical(&physics.viscosity, &th).map_err(|_| Error::NumericBlowUp {
        term: "viscosity".into(),
        time: f64::NAN,
    })?;

    let m = grid.padded_n();
    let mut flux = [Array2::zeros((m, m)), Array2::zeros((m, m))];
    // momentum flux u_i u_j − μ S_ij for (0,0), (0,1), (1,1)
    let mut mflux = [
        Array2::zeros((m, m)),
        Array2::zeros((m, m)),
        Array2::zeros((m, m)),
    ];
    let (mut diss_t, mut diss_u, mut buoy) = (0.0, 0.0, 0.0);
    let (mut tmin, mut tmax, mut ulinf) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    {
        fn sl(f: &PhysicalField) -> &[f64] {
            f.values().as_slice().expect("standard layout")
        }
        let (t_, k_, mu_) = (sl(&th), sl(&kappa), sl(&mu));
        let (g0_, g1_, v0_, v1_) = (sl(&gt[0]), sl(&gt[1]), sl(&uu[0]), sl(&uu[1]));
        let (a00_, a01_, a10_, a11_) = (sl(&gu[0][0]), sl(&gu[0][1]), sl(&gu[1][0]), sl(&gu[1][1]));
        let [f0, f1] = &mut flux;
        let [m00, m01, m11] = &mut mflux;
        let (f0, f1) = (f0.as_slice_mut().unwrap(), f1.as_slice_mut().unwrap());
        let (m00, m01, m11) = (
            m00.as_slice_mut().unwrap(),
            m01.as_slice_mut().unwrap(),
            m11.as_slice_mut().unwrap(),
        );
        for p in 0..m * m {
            let (t, k, mu, g0, g1, v0, v1) = (t_[p], k_[p], mu_[p], g0_[p], g1_[p], v0_[p], v1_[p]);
            let s00 = 2.0 * a00_[p];
            let s01 = a01_[p] + a10_[p];
            let s11 = 2.0 * a11_[p];
            f0[p] = v0 * t - k * g0;
            f1[p] = v1 * t - k * g1;
            m00[p] = v0 * v0 - mu * s00;
            m01[p] = v0 * v1 - mu * s01;
            m11[p] = v1 * v1 - mu * s11;
            diss_t += k * (g0 * g0 + g1 * g1);
            diss_u += 0.5 * mu * (s00 * s00 + 2.0 * s01 * s01 + s11 * s11);
            buoy += t * v1;
            tmin = tmin.min(t);
            tmax = tmax.max(t);
            ulinf = ulinf.max((v0 * v0 + v1 * v1).sqrt());
        }
    }
    let w = cell(&grid);
    let diag = StateDiagnostics {
        dissipation_theta: w * diss_t,
        dissipation_u: w * diss_u,
        buoyancy_power: physics.beta * w * buoy,
        theta_min: tmin,
        theta_max: tmax,
        u_linf: ulinf,
        dtheta_dt_l2: 0.0,
    };

    let [f0, f1] = flux;
    let f0 = to_spectral(f0, &th, "heat flux")?;
    let f1 = to_spectral(f1, &th, "heat flux")?;
    let dtheta = truncate(&(-&(&partial(&f0, 0) + &partial(&f1, 1))), cutoff);
    let diag = StateDiagnostics {
        dtheta_dt_l2: dtheta.l2_norm(),
        ..diag
    };

    let [m00, m01, m11] = mflux;
    let m00 = to_spectral(m00, &th, "momentum flux")?;
    let m01 = to_spectral(m01, &th, "momentum flux")?;
    let m11 = to_spectral(m11, &th, "momentum flux")?;
    let r0 = -&(&partial(&m00, 0) + &partial(&m01, 1));
    let r1 = (-&(&partial(&m01, 0) + &partial(&m11, 1))).axpy(physics.beta, theta);
    let du = truncate_vector(&leray_project(&VectorField::new(r0, r1)?), cutoff);

    Ok(Evaluation { dtheta, du, diag })
}

/// Tendency `(∂ₜθ, ∂ₜu)` of the truncated system.
pub fn rhs(state: &SimState) -> Result<(ScalarField, VectorField)> {
    let e = evaluate(&state.theta, &state.u, &state.physics, state.cutoff)
        .map_err(|e| e.at_time(state.time))?;
    Ok((e.dtheta, e.du))
}

/// The tendency minus the stiff constant parts `κ_*Δθ` and `μ_*Δu` that the
/// integrators treat implicitly.
pub fn explicit_rhs(state: &SimState) -> Result<(ScalarField, VectorField)> {
    let (dt, du) = rhs(state)?;
    let k = state.physics.thermal_law().lower_bound();
    let m = state.physics.viscosity.lower_bound();
    Ok((
        dt.axpy(-k, &laplacian(&state.theta)),
        du.axpy(-m, &laplacian_vector(&state.u)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::sync::Arc;

    fn tg(g: Grid) -> VectorField {
        VectorField::from_fn(g, |x, y| (x.sin() * y.cos(), -x.cos() * y.sin()))
    }

    #[test]
    fn stokes_part_of_taylor_green() {
        let g = Grid::new(32, 1.0).unwrap();
        let p = Arc::new(Physics::constant(1.0, 0.1, 1.0).unwrap());
        let s = SimState::new(ScalarField::zeros(g), tg(g), g.default_cutoff(), p).unwrap();
        let (dt, du) = rhs(&s).unwrap();
        assert!(dt.max_abs_coeff() < 1e-15);
        // advection of Taylor–Green is a pure gradient, removed by ℙ
        let expected = s.u.scaled(-0.2);
        assert!(du.axpy(-1.0, &expected).max_abs_coeff() < 1e-14);
    }

    #[test]
    fn heat_operator() {
        let g = Grid::new(16, 1.0).unwrap();
        let p = Arc::new(Physics::constant(0.7, 1.0, 1.0).unwrap());
        let th = ScalarField::from_fn(g, |x, _| x.cos());
        let s = SimState::new(th.clone(), VectorField::zeros(g), g.default_cutoff(), p.clone()).unwrap();
        let (dt, du) = rhs(&s).unwrap();
        assert!((&dt - &th.scaled(-0.7)).max_abs_coeff() < 1e-15);
        // cos x₁ e₂ is solenoidal and passes through the projector
        assert!((du.component(1) - &th).max_abs_coeff() < 1e-15);
        let th2 = ScalarField::from_fn(g, |_, y| y.cos());
        let s2 = SimState::new(th2, VectorField::zeros(g), g.default_cutoff(), p).unwrap();
        // cos x₂ e₂ is a gradient
        assert!(rhs(&s2).unwrap().1.max_abs_coeff() < 1e-15);
        let (et, _) = explicit_rhs(&s).unwrap();
        assert!(et.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn nan_is_reported_with_term() {
        let g = Grid::new(16, 1.0).unwrap();
        let p = Arc::new(Physics::constant(1.0, 1.0, 1.0).unwrap());
        let mut th = ScalarField::zeros(g);
        th.coeffs_mut()[[1, 0]].re = f64::NAN;
        let s = SimState {
            theta: th,
            u: VectorField::zeros(g),
            time: 0.25,
            cutoff: g.default_cutoff(),
            physics: p,
        };
        match rhs(&s) {
            Err(Error::NumericBlowUp { term, time }) => {
                assert_eq!(term, "temperature");
                assert_eq!(time, 0.25);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
