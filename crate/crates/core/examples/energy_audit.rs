//! Discrete energy budget of a variable-coefficient run.
//!
//! ```text
//! cargo run --release --example energy_audit
//! ```

use std::sync::Arc;

use boussinesq::experiments::initial::{random_hs_scalar, random_hs_velocity};
use boussinesq::laws::{builtin_law, LawSpec};
use boussinesq::solver::{run, Physics, SimState, TimeStepperConfig};
use boussinesq::spectral::Grid;

/// Final relative residuals `(θ, u)` at step `dt`.
pub fn residuals(dt: f64) -> boussinesq::Result<(f64, f64)> {
    let grid = Grid::new(64, 1.0)?;
    let kappa = builtin_law(&LawSpec::TanhSmooth { lo: 1.0, hi: 3.0, center: 0.0, width: 1.0 })?;
    let mu = builtin_law(&LawSpec::TanhSmooth { lo: 0.5, hi: 1.5, center: 0.0, width: 1.0 })?;
    let physics = Arc::new(Physics::new(kappa, mu, 1.0)?);
    let theta = random_hs_scalar(grid, 1.5, 1.0, 42, 0);
    let u = random_hs_velocity(grid, 0.5, 1.0, 42, 1);
    let state = SimState::new(theta, u, grid.default_cutoff(), physics)?;
    let traj = run(&state, &TimeStepperConfig::fixed(dt, 1.0).with_snapshots(1.0))?;
    let last = traj.ledger.last().expect("rows");
    Ok((last.residual_theta, last.residual_u))
}

pub fn run_example() -> boussinesq::Result<()> {
    let coarse = residuals(2e-3)?;
    let fine = residuals(1e-3)?;
    println!("dt = 2e-3: residual θ = {:.3e}, u = {:.3e}", coarse.0, coarse.1);
    println!("dt = 1e-3: residual θ = {:.3e}, u = {:.3e}", fine.0, fine.1);
    println!("shrink factors: θ {:.2}, u {:.2}", coarse.0 / fine.0, coarse.1 / fine.1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example()
}
