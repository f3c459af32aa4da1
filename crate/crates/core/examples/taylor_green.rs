//! Decaying Taylor–Green vortex with constant viscosity and no buoyancy.
//!
//! ```text
//! cargo run --release --example taylor_green
//! ```

use std::sync::Arc;
use std::time::Instant;

use boussinesq::solver::{run, Physics, SimState, TimeStepperConfig};
use boussinesq::spectral::{Grid, ScalarField, VectorField};

pub fn run_example() -> boussinesq::Result<f64> {
    let nu = 0.1;
    let grid = Grid::new(64, 1.0)?;
    let physics = Arc::new(Physics::constant(1.0, nu, 1.0)?);
    let tg = |x: f64, y: f64| (x.sin() * y.cos(), -x.cos() * y.sin());
    let u0 = VectorField::from_fn(grid, tg);
    let state = SimState::new(ScalarField::zeros(grid), u0, grid.default_cutoff(), physics)?;

    let start = Instant::now();
    let traj = run(&state, &TimeStepperConfig::fixed(1e-2, 1.0).with_snapshots(0.25))?;
    let elapsed = start.elapsed();

    let mut worst: f64 = 0.0;
    for snap in &traj.snapshots {
        let decay = (-2.0 * nu * snap.time).exp();
        let exact = VectorField::from_fn(grid, |x, y| {
            let (a, b) = tg(x, y);
            (a * decay, b * decay)
        });
        let [e1, e2] = snap.u.axpy(-1.0, &exact).to_physical();
        let err = e1.iter().chain(e2.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        println!("t = {:.2}  max |u − u_exact| = {err:.3e}", snap.time);
        worst = worst.max(err);
    }
    println!("{} steps in {elapsed:.2?}", traj.steps);
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
