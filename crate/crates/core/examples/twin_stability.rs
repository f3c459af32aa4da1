//! Two runs from nearby temperatures, compared in `H¹(η) × L²(u)`.
//!
//! ```text
//! cargo run --release --example twin_stability
//! ```

use std::sync::Arc;

use boussinesq::diagnostics::{twin_stability_study, TwinStudy};
use boussinesq::experiments::initial::{random_hs_scalar, random_hs_velocity};
use boussinesq::laws::{builtin_law, LawSpec};
use boussinesq::solver::{Physics, SimState, TimeStepperConfig};
use boussinesq::spectral::Grid;

pub const SIZES: [f64; 3] = [1e-4, 1e-6, 1e-8];

pub fn run_example() -> boussinesq::Result<TwinStudy> {
    let grid = Grid::new(64, 1.0)?;
    let tanh = |lo: f64, hi: f64| builtin_law(&LawSpec::TanhSmooth { lo, hi, center: 0.0, width: 1.0 });
    let physics = Arc::new(Physics::new(tanh(0.5, 1.5)?, tanh(0.5, 1.5)?, 1.0)?);
    let theta = random_hs_scalar(grid, 1.0, 1.0, 11, 0);
    let u = random_hs_velocity(grid, 0.5, 1.0, 11, 1);
    let base = SimState::new(theta, u, grid.default_cutoff(), physics)?;
    let cfg = TimeStepperConfig::fixed(2e-3, 1.0);
    let study = twin_stability_study(&base, &SIZES, 1, &cfg)?;

    println!("zero perturbation: max D = {:.3e}", study.zero_perturbation_distance);
    for r in &study.reports {
        println!(
            "δ = {:.0e}: D(0) = {:.3e}, D(T)/D(0) = {:.4}, ∫B = {:.3}, C_emp = {:.5}",
            r.perturbation,
            r.distance[0],
            r.growth(),
            r.total_b(),
            r.c_emp.unwrap_or(f64::NAN)
        );
    }
    println!(
        "C_ref = {:.5}, spread = {:.2e}, growth slack = {:.4}, pass = {}",
        study.c_ref, study.c_spread, study.growth_slack, study.pass
    );
    Ok(study)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
