//! Spectral differential operators, the frequency cutoff and the Leray projector.

use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex64;

use super::field::{ScalarField, VectorField};
use super::grid::{CutoffIndex, Grid};
use super::physical::PhysicalField;
use crate::error::Result;

/// Symmetric velocity gradient `S_ij = ∂_j u_i + ∂_i u_j`, stored row-major.
pub type Strain = [[ScalarField; 2]; 2];

fn zero_nyquist(c: &mut Array2<Complex64>, grid: &Grid) {
    let h = grid.nyquist_index();
    c.row_mut(h).fill(Complex64::new(0.0, 0.0));
    c.column_mut(h).fill(Complex64::new(0.0, 0.0));
}

/// Applies `P_n`: zeroes every mode with `|k| > n`.
pub fn truncate(f: &ScalarField, cutoff: CutoffIndex) -> ScalarField {
    f.map_modes(|k1, k2| if cutoff.contains(k1, k2) { 1.0 } else { 0.0 })
}

/// `P_n` on both components. The projector commutes with `P_n`, so a
/// divergence-free certificate survives.
pub fn truncate_vector(v: &VectorField, cutoff: CutoffIndex) -> VectorField {
    let [a, b] = v.components();
    let (a, b) = (truncate(a, cutoff), truncate(b, cutoff));
    if v.divfree_certified() {
        VectorField::certified(a, b)
    } else {
        VectorField::new(a, b).expect("components share a grid")
    }
}

/// `‖f − P_n f‖_{L²}`.
pub fn tail_norm(f: &ScalarField, cutoff: CutoffIndex) -> f64 {
    f.map_modes(|k1, k2| if cutoff.contains(k1, k2) { 0.0 } else { 1.0 })
        .l2_norm()
}

/// `∂f/∂x_axis`.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = *f.grid();
    let k = grid.wavenumbers();
    let mut c = f.coeffs().clone();
    for ((i, j), v) in c.indexed_iter_mut() {
        let kk = if axis == 0 { k[i] } else { k[j] };
        *v *= Complex64::new(0.0, kk);
    }
    zero_nyquist(&mut c, &grid);
    ScalarField::from_coeffs(grid, c).expect("same shape")
}

pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField::new(partial(f, 0), partial(f, 1)).expect("same grid")
}

/// `∇⊥f = (−∂₂f, ∂₁f)`, always divergence-free.
pub fn perp_gradient(f: &ScalarField) -> VectorField {
    VectorField::certified(-&partial(f, 1), partial(f, 0))
}

pub fn divergence(v: &VectorField) -> ScalarField {
    &partial(v.component(0), 0) + &partial(v.component(1), 1)
}

/// `∂₁v₂ − ∂₂v₁`.
pub fn curl(v: &VectorField) -> ScalarField {
    &partial(v.component(1), 0) - &partial(v.component(0), 1)
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let mut out = f.map_modes(|k1, k2| -(k1 * k1 + k2 * k2));
    zero_nyquist(out.coeffs_mut(), &grid);
    out
}

pub fn laplacian_vector(v: &VectorField) -> VectorField {
    let [a, b] = v.components();
    let (a, b) = (laplacian(a), laplacian(b));
    if v.divfree_certified() {
        VectorField::certified(a, b)
    } else {
        VectorField::new(a, b).expect("same grid")
    }
}

pub fn strain(v: &VectorField) -> Strain {
    let d = |i: usize, j: usize| partial(v.component(i), j);
    let s01 = &d(0, 1) + &d(1, 0);
    [
        [d(0, 0).scaled(2.0), s01.clone()],
        [s01, d(1, 1).scaled(2.0)],
    ]
}

/// `Σ_ij ‖S_ij‖²_{L²}`.
pub fn strain_norm_sq(s: &Strain) -> f64 {
    s.iter().flatten().map(|c| c.l2_norm_sq()).sum()
}

/// `Σ_i ‖∇v_i‖²_{L²}`.
pub fn gradient_norm_sq(v: &VectorField) -> f64 {
    v.components()
        .iter()
        .map(|c| gradient(c).l2_norm_sq())
        .sum()
}

/// `ℙv = v − k(k·v̂)/|k|²` per mode. The mean mode is removed, as
/// `−∇⊥(−Δ)⁻¹∇⊥·` annihilates constants.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = *v.grid();
    let k = grid.wavenumbers();
    let mut a = v.component(0).coeffs().clone();
    let mut b = v.component(1).coeffs().clone();
    Zip::indexed(&mut a).and(&mut b).for_each(|(i, j), x, y| {
        let (k1, k2) = (k[i], k[j]);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            *x = Complex64::new(0.0, 0.0);
            *y = Complex64::new(0.0, 0.0);
            return;
        }
        let dot = (*x * k1 + *y * k2) / kk;
        *x -= dot * k1;
        *y -= dot * k2;
    });
    // the unpaired Nyquist row and column would leave an imaginary residue
    zero_nyquist(&mut a, &grid);
    zero_nyquist(&mut b, &grid);
    VectorField::certified(
        ScalarField::from_coeffs(grid, a).expect("same shape"),
        ScalarField::from_coeffs(grid, b).expect("same shape"),
    )
}

/// Solves `Δq = f` with mean-zero `q`.
pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    f.map_modes(|k1, k2| {
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            0.0
        } else {
            -1.0 / kk
        }
    })
}

/// Pointwise product via 3/2 zero padding, returned on the input grid.
pub fn multiply_dealiased(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.grid().ensure_compatible(g.grid())?;
    let a = PhysicalField::from_spectral(f);
    let b = PhysicalField::from_spectral(g);
    Ok((&a * &b).to_spectral())
}
