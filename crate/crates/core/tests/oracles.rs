//! Spectral operators against independent computations: direct
//! convolution sums, per-mode projection matrices, closed-form tendencies
//! and resolution refinement.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use boussinesq::laws::{builtin_law, LawSpec};
use boussinesq::lp::{commutator, DyadicFilterBank};
use boussinesq::solver::{rhs, Physics, SimState};
use boussinesq::spectral::{
    laplacian, leray_project, multiply_dealiased, truncate, CutoffIndex, Grid, ScalarField, VectorField,
};

/// Real field with random coefficients on `|m₁|, |m₂| ≤ band`.
fn band_limited(grid: Grid, band: i64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ScalarField::zeros(grid);
    for m1 in -band..=band {
        for m2 in -band..=band {
            let (i, j) = (grid.index_of(m1).unwrap(), grid.index_of(m2).unwrap());
            f.coeffs_mut()[[i, j]] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    f.symmetrize();
    f
}

#[test]
fn dealiased_product_equals_direct_convolution() {
    let n = 16;
    let grid = Grid::new(n, 1.0).unwrap();
    let band = n as i64 / 2 - 1;
    let f = band_limited(grid, band, 1);
    let g = band_limited(grid, band, 2);
    let prod = multiply_dealiased(&f, &g).unwrap();
    let mut worst: f64 = 0.0;
    for m1 in -band..=band {
        for m2 in -band..=band {
            let mut direct = Complex64::new(0.0, 0.0);
            for a1 in -band..=band {
                for a2 in -band..=band {
                    let (b1, b2) = (m1 - a1, m2 - a2);
                    if b1.abs() <= band && b2.abs() <= band {
                        direct += f.coeff(a1, a2) * g.coeff(b1, b2);
                    }
                }
            }
            worst = worst.max((prod.coeff(m1, m2) - direct).norm());
        }
    }
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn leray_matches_per_mode_matrix() {
    let grid = Grid::new(16, 1.0).unwrap();
    let band = 7;
    let v = VectorField::new(band_limited(grid, band, 3), band_limited(grid, band, 4)).unwrap();
    let p = leray_project(&v);
    for m1 in -band..=band {
        for m2 in -band..=band {
            let (k1, k2) = (m1 as f64, m2 as f64);
            let kk = k1 * k1 + k2 * k2;
            let (a, b) = (v.component(0).coeff(m1, m2), v.component(1).coeff(m1, m2));
            let (x, y) = if kk == 0.0 {
                (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (
                    a * (1.0 - k1 * k1 / kk) - b * (k1 * k2 / kk),
                    b * (1.0 - k2 * k2 / kk) - a * (k1 * k2 / kk),
                )
            };
            assert!((p.component(0).coeff(m1, m2) - x).norm() < 1e-14);
            assert!((p.component(1).coeff(m1, m2) - y).norm() < 1e-14);
        }
    }
}

#[test]
fn tendency_of_resting_stratification() {
    // u = 0, θ = sin x₁ sin x₂: ∂ₜθ = κΔθ and ∂ₜu = ℙ(βθe₂)
    let grid = Grid::new(32, 1.0).unwrap();
    let (kappa, beta) = (0.7, 1.3);
    let physics = Arc::new(Physics::constant(kappa, 0.4, beta).unwrap());
    let theta = ScalarField::from_fn(grid, |x, y| x.sin() * y.sin());
    let state = SimState::new(theta.clone(), VectorField::zeros(grid), grid.default_cutoff(), physics).unwrap();
    let (dtheta, du) = rhs(&state).unwrap();
    assert!((&dtheta - &laplacian(&theta).scaled(kappa)).max_abs_coeff() < 1e-14);
    let buoy = leray_project(&VectorField::new(ScalarField::zeros(grid), theta.scaled(beta)).unwrap());
    assert!(du.axpy(-1.0, &buoy).max_abs_coeff() < 1e-14);
}

/// Tendency at size `n` for data and cutoff fixed at size 32, on the
/// size-32 grid.
fn refined_tendency(n: usize) -> (ScalarField, VectorField) {
    let coarse = Grid::new(32, 1.0).unwrap();
    let grid = coarse.resized(n).unwrap();
    let kappa = builtin_law(&LawSpec::TanhSmooth { lo: 1.0, hi: 3.0, center: 0.0, width: 1.0 }).unwrap();
    let mu = builtin_law(&LawSpec::TanhSmooth { lo: 0.5, hi: 1.5, center: 0.2, width: 0.7 }).unwrap();
    let physics = Arc::new(Physics::new(kappa, mu, 1.0).unwrap());
    let theta = ScalarField::from_fn(coarse, |x, y| 0.5 * x.sin() * y.cos() + 0.2 * (x + 2.0 * y).sin());
    let u = VectorField::from_fn(coarse, |x, y| (x.sin() * y.cos(), -x.cos() * y.sin()));
    let cut = CutoffIndex::new(coarse.default_cutoff().radius(), &grid).unwrap();
    let s = SimState::new(theta.resample(grid).unwrap(), u.resample(grid).unwrap(), cut, physics).unwrap();
    let (t, v) = rhs(&s).unwrap();
    (t.resample(coarse).unwrap(), v.resample(coarse).unwrap())
}

#[test]
fn tendency_converges_under_refinement() {
    // the composition κ(θ) is not band-limited, so the padded products
    // alias; the error must fall off spectrally with the grid size
    let (t1, u1) = refined_tendency(32);
    let (t2, u2) = refined_tendency(64);
    let (t3, u3) = refined_tendency(128);
    let scale = t3.max_abs_coeff().max(u3.max_abs_coeff());
    let e1 = (&t1 - &t3).max_abs_coeff().max(u1.axpy(-1.0, &u3).max_abs_coeff());
    let e2 = (&t2 - &t3).max_abs_coeff().max(u2.axpy(-1.0, &u3).max_abs_coeff());
    assert!(e1 < 1e-6 * scale, "{e1}");
    assert!(e2 < 1e-13 * scale, "{e2}");
}

#[test]
fn commutator_is_resolution_independent_for_resolved_data() {
    // bands below n/4 keep every product inside the grid at both sizes
    let coarse = Grid::new(32, 1.0).unwrap();
    let fine = coarse.resized(64).unwrap();
    let phi = band_limited(coarse, 6, 5);
    let psi = band_limited(coarse, 6, 6);
    let bc = DyadicFilterBank::new(coarse).unwrap();
    let bf = DyadicFilterBank::new(fine).unwrap();
    for j in -1..=bc.j_max() {
        let a = commutator(&phi, &psi, &bc, j).unwrap();
        let b = commutator(&phi.resample(fine).unwrap(), &psi.resample(fine).unwrap(), &bf, j).unwrap();
        let diff = b.resample(coarse).unwrap().axpy(-1.0, &a);
        let cut = coarse.default_cutoff();
        for c in 0..2 {
            let d = truncate(diff.component(c), cut).max_abs_coeff();
            assert!(d < 1e-12, "shell {j}: {d}");
        }
        let lost = b.l2_norm() - b.resample(coarse).unwrap().l2_norm();
        assert!(lost.abs() < 1e-12 * b.l2_norm().max(1.0), "shell {j} leaks above the coarse grid");
    }
}
