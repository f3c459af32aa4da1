//! Pressure from a state: `∇Π` is the gradient part of the momentum
//! forcing, so `F − ∇Π` is divergence-free.
//!
//! ```text
//! cargo run --release --example pressure_recovery
//! ```

use std::sync::Arc;

use boussinesq::laws::{builtin_law, LawSpec};
use boussinesq::solver::{momentum_forcing, recover_pressure, Physics, SimState};
use boussinesq::spectral::{divergence, gradient, Grid, ScalarField, VectorField};

/// `(‖div(F − ∇Π)‖, ‖∇Π‖)` for a buoyant shear layer.
pub fn run_example() -> boussinesq::Result<(f64, f64)> {
    let grid = Grid::new(64, 1.0)?;
    let mu = builtin_law(&LawSpec::TanhSmooth { lo: 0.5, hi: 1.5, center: 0.0, width: 1.0 })?;
    let physics = Arc::new(Physics::new(builtin_law(&LawSpec::Constant { value: 1.0 })?, mu, 2.0)?);
    let theta = ScalarField::from_fn(grid, |x, y| y.sin() + 0.3 * (x + y).cos());
    let u = VectorField::from_fn(grid, |x, y| (y.sin(), 0.5 * x.cos()));
    let state = SimState::new(theta, u, grid.default_cutoff(), physics)?;

    let f = momentum_forcing(&state)?;
    let pi = recover_pressure(&state)?;
    let residual = f.axpy(-1.0, &gradient(&pi));
    let div = divergence(&residual).l2_norm();
    let size = gradient(&pi).l2_norm();
    println!("‖∇Π‖ = {size:.6}, ‖div(F − ∇Π)‖ = {div:.2e}, mean Π = {:.1e}", pi.mean());
    Ok((div, size))
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
