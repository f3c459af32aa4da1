//! Dyadic decomposition: reconstruction, Bernstein ratios and the block
//! form of Sobolev norms across resolutions.
//!
//! ```text
//! cargo run --release --example littlewood_paley
//! ```

use boussinesq::experiments::initial::random_hs_scalar;
use boussinesq::lp::{bernstein_check, decompose, lp_sobolev_norm, sobolev_norm, DyadicFilterBank};
use boussinesq::spectral::Grid;

/// Worst relative L² reconstruction error over `count` random fields.
pub fn reconstruction_error(n: usize, count: u64) -> boussinesq::Result<f64> {
    let grid = Grid::new(n, 1.0)?;
    let bank = DyadicFilterBank::new(grid)?;
    let mut worst: f64 = 0.0;
    for seed in 0..count {
        let g = random_hs_scalar(grid, 0.5, 1.0, seed, 0);
        let d = decompose(&g, &bank)?;
        worst = worst.max((&d.reconstruct() - &g).l2_norm() / g.l2_norm());
    }
    Ok(worst)
}

/// `(min, max, violations)` of Bernstein ratios over all shells of `count`
/// random fields.
pub fn bernstein_scan(n: usize, count: u64) -> boussinesq::Result<(f64, f64, usize)> {
    let grid = Grid::new(n, 1.0)?;
    let bank = DyadicFilterBank::new(grid)?;
    let (mut lo, mut hi, mut bad) = (f64::INFINITY, 0.0f64, 0usize);
    for seed in 0..count {
        let s = -1.0 + 3.0 * (seed % 7) as f64 / 6.0;
        let g = random_hs_scalar(grid, s, 1.0, seed, 0);
        for j in 0..=bank.j_max() {
            let r = bernstein_check(&g, &bank, j)?;
            lo = lo.min(r.ratio);
            hi = hi.max(r.ratio);
            bad += usize::from(!r.pass);
        }
    }
    Ok((lo, hi, bad))
}

/// Mean of `lp / direct` over `count` fields with one extra derivative of
/// regularity beyond `s`.
pub fn mean_norm_ratio(n: usize, s: f64, count: u64) -> boussinesq::Result<f64> {
    let grid = Grid::new(n, 1.0)?;
    let bank = DyadicFilterBank::new(grid)?;
    let mut acc = 0.0;
    for seed in 0..count {
        let g = random_hs_scalar(grid, s + 1.0, 1.0, seed, 0);
        acc += lp_sobolev_norm(&decompose(&g, &bank)?, s)? / sobolev_norm(&g, s)?;
    }
    Ok(acc / count as f64)
}

pub fn run_example() -> boussinesq::Result<()> {
    println!("reconstruction error: {:.2e}", reconstruction_error(64, 20)?);
    let (lo, hi, bad) = bernstein_scan(32, 10_000)?;
    println!("Bernstein ratios over 10^4 fields: [{lo:.4}, {hi:.4}], violations {bad}");
    for s in [0.5, 1.0, 1.5, 2.0] {
        let r: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| mean_norm_ratio(n, s, 100))
            .collect::<boussinesq::Result<_>>()?;
        println!("s = {s}: lp/direct = {:.4} {:.4} {:.4}", r[0], r[1], r[2]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example()
}
