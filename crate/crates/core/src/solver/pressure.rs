use rustfft::num_complex::Complex64;

use super::SimState;
use crate::error::Result;
use crate::laws::apply_law;
use crate::spectral::{
    partial, strain, truncate_vector, PhysicalField, ScalarField, VectorField,
};

/// `F = βθe₂ − div(u⊗u − μSu)`, truncated to the cutoff ball and not projected.
pub fn momentum_forcing(state: &SimState) -> Result<VectorField> {
    let mu = apply_law(&state.physics.viscosity, &state.theta)?;
    let u = [
        PhysicalField::from_spectral(state.u.component(0)),
        PhysicalField::from_spectral(state.u.component(1)),
    ];
    let s = strain(&state.u);
    let flux = |i: usize, j: usize| -> ScalarField {
        let sij = PhysicalField::from_spectral(&s[i][j]);
        (&(&u[i] * &u[j]) - &(&mu * &sij)).to_spectral()
    };
    let (t00, t01, t11) = (flux(0, 0), flux(0, 1), flux(1, 1));
    let f0 = -&(&partial(&t00, 0) + &partial(&t01, 1));
    let f1 = (-&(&partial(&t01, 0) + &partial(&t11, 1))).axpy(state.physics.beta, &state.theta);
    Ok(truncate_vector(&VectorField::new(f0, f1)?, state.cutoff))
}

/// Mean-zero `Π` with `ΔΠ = div F`, i.e. `∇Π = (1 − ℙ)F`.
pub fn recover_pressure(state: &SimState) -> Result<ScalarField> {
    let f = momentum_forcing(state)?;
    let grid = *state.grid();
    let k = grid.wavenumbers();
    let (a, b) = (f.component(0).coeffs(), f.component(1).coeffs());
    let mut pi = ScalarField::zeros(grid);
    for ((i, j), c) in pi.coeffs_mut().indexed_iter_mut() {
        let kk = k[i] * k[i] + k[j] * k[j];
        if kk == 0.0 {
            continue;
        }
        let dot = a[[i, j]] * k[i] + b[[i, j]] * k[j];
        *c = Complex64::new(0.0, -1.0) * dot / kk;
    }
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Physics;
    use crate::spectral::{gradient, Grid};
    use std::sync::Arc;

    #[test]
    fn hydrostatic_balance() {
        let g = Grid::new(16, 1.0).unwrap();
        let p = Arc::new(Physics::constant(1.0, 0.3, 1.0).unwrap());
        let th = ScalarField::from_fn(g, |_, y| y.sin() + 0.5 * (3.0 * y).cos());
        let s = SimState::new(th.clone(), VectorField::zeros(g), g.default_cutoff(), p).unwrap();
        let pi = recover_pressure(&s).unwrap();
        let gp = gradient(&pi);
        assert!(gp.component(0).max_abs_coeff() < 1e-15);
        assert!((gp.component(1) - &th).max_abs_coeff() < 1e-15);
        let (_, du) = crate::solver::rhs(&s).unwrap();
        assert!(du.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn rest_state_has_no_pressure() {
        let g = Grid::new(16, 1.0).unwrap();
        let p = Arc::new(Physics::constant(1.0, 1.0, 1.0).unwrap());
        let s = SimState::zero(g, p);
        assert_eq!(recover_pressure(&s).unwrap().max_abs_coeff(), 0.0);
    }
}
