//! Empirical constants of the `l¹` commutator estimate under resolution
//! doubling.
//!
//! ```text
//! cargo run --release --example commutator_scaling
//! ```

use boussinesq::experiments::initial::random_hs_scalar;
use boussinesq::lp::commutator_scaling_report;
use boussinesq::spectral::Grid;

pub const PAIRS: [(f64, f64); 3] = [(0.5, 0.25), (1.2, 0.5), (1.5, 0.75)];

/// `(C_emp at N, C_emp at 2N)` for a pair drawn at `N` and embedded at `2N`.
pub fn doubling(n: usize, s: f64, nu: f64, seed: u64) -> boussinesq::Result<(f64, f64)> {
    let coarse = Grid::new(n, 1.0)?;
    let fine = coarse.resized(2 * n)?;
    // ∇φ ∈ H^ν and ∇ψ ∈ H^{s−ν} with half a derivative to spare
    let phi = random_hs_scalar(coarse, nu + 1.5, 1.0, seed, 0);
    let psi = random_hs_scalar(coarse, s - nu + 1.5, 1.0, seed, 1);
    let a = commutator_scaling_report(&phi, &psi, s, nu)?;
    let b = commutator_scaling_report(&phi.resample(fine)?, &psi.resample(fine)?, s, nu)?;
    Ok((a.c_emp, b.c_emp))
}

pub fn run_example() -> boussinesq::Result<f64> {
    let mut worst: f64 = 0.0;
    for (s, nu) in PAIRS {
        for seed in 0..4 {
            let (a, b) = doubling(128, s, nu, seed)?;
            let dev = (b / a - 1.0).abs();
            worst = worst.max(dev);
            println!("(s, ν) = ({s}, {nu}), seed {seed}: C_emp {a:.4} → {b:.4} ({:+.1}%)", 100.0 * (b / a - 1.0));
        }
    }
    println!("largest relative change: {:.1}%", 100.0 * worst);
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
