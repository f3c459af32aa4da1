//! Empirical constant of `‖f‖²_{L⁴} ≤ C‖f‖‖∇f‖` over rough random fields,
//! against the single-mode value `C² = 3/(8π²)`.
//!
//! ```text
//! cargo run --release --example interpolation
//! ```

use boussinesq::diagnostics::gagliardo_nirenberg_check;
use boussinesq::experiments::initial::random_hs_scalar;
use boussinesq::spectral::{Grid, ScalarField};

pub fn run_example() -> boussinesq::Result<f64> {
    let grid = Grid::new(64, 1.0)?;
    let mode = gagliardo_nirenberg_check(&[ScalarField::from_fn(grid, |x, _| x.cos())], None)?;
    println!("cos x₁: C = {:.6} (3/(8π²))^½ = {:.6}", mode.lhs, (3.0 / (8.0 * std::f64::consts::PI.powi(2))).sqrt());
    let fields: Vec<ScalarField> = (0..200)
        .map(|seed| random_hs_scalar(grid, 0.5 + (seed % 4) as f64 * 0.5, 1.0, seed, 0))
        .collect();
    let r = gagliardo_nirenberg_check(&fields, None)?;
    println!("largest C over {} random fields: {:.6}", r.context["fields"], r.lhs);
    Ok(r.lhs)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
