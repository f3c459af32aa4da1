//! The builtin coefficient laws, their bounds, and the primitive transform
//! `η = A(θ)` with its inverse.
//!
//! ```text
//! cargo run --release --example coefficient_laws
//! ```

use boussinesq::laws::{builtin_law, eta_backward, eta_forward, LawSpec, PrimitiveTransform};
use boussinesq::spectral::{Grid, ScalarField};

pub fn specs() -> Vec<LawSpec> {
    vec![
        LawSpec::Constant { value: 1.0 },
        LawSpec::AffineClamped { base: 1.0, slope: 0.5, lo: 0.5, hi: 1.5 },
        LawSpec::TanhSmooth { lo: 1.0, hi: 3.0, center: 0.0, width: 1.0 },
        LawSpec::ExpClamped { c1: 1.0, c2: 0.5, c3: 3.0, lo: 0.5, hi: 2.0 },
    ]
}

/// Worst `L∞` error of `A⁻¹(A(θ))` over the builtin laws.
pub fn run_example() -> boussinesq::Result<f64> {
    let grid = Grid::new(64, 1.0)?;
    let theta = ScalarField::from_fn(grid, |x, y| 2.0 * x.sin() * y.cos() + 0.5 * (2.0 * y).sin());
    let mut worst: f64 = 0.0;
    for spec in specs() {
        let law = builtin_law(&spec)?;
        let s = law.summary();
        println!(
            "{spec:?}\n  bounds [{:.3}, {:.3}], Lipschitz {:.3}, a(0) = {:.4}, a'(0) = {:.4}",
            s.lower_bound,
            s.upper_bound,
            s.lipschitz_constant,
            law.eval(0.0),
            law.derivative(0.0)
        );
        let pt = PrimitiveTransform::new(law);
        let back = eta_backward(&pt, &eta_forward(&pt, &theta)?)?;
        let err = (&back - &theta).max_abs_coeff();
        println!("  A(1) = {:.6}, A⁻¹(A(1)) − 1 = {:.1e}, field round trip {err:.1e}", pt.forward(1.0), pt.inverse(pt.forward(1.0))? - 1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
