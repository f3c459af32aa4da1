//! Real periodic fields stored as Fourier coefficients.
//!
//! A field is `f(x) = Σ_k c_k e^{i k·x}` with `c_{−k} = conj(c_k)`. The
//! coefficient array is indexed `[i1, i2]` in FFT order, `i1` along `x₁`.
//! Norms are integrals over the torus, so `‖cos x₁‖²_{L²} = ½ (2π)²` when
//! `L = 1`.

use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    coeffs: Array2<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: Array2::from_elem((grid.n(), grid.n()), ZERO),
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[[0, 0]] = Complex64::new(value, 0.0);
        f
    }

    pub fn from_coeffs(grid: Grid, coeffs: Array2<Complex64>) -> Result<Self> {
        let n = grid.n();
        if coeffs.dim() != (n, n) {
            return Err(Error::Shape {
                expected: (n, n),
                actual: coeffs.dim(),
            });
        }
        Ok(Self {
            grid,
            coeffs: coeffs.as_standard_layout().into_owned(),
        })
    }

    /// Samples `f(x₁, x₂)` on the grid and transforms.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let x = grid.coordinates();
        let g = Array2::from_shape_fn((grid.n(), grid.n()), |(i, j)| f(x[i], x[j]));
        Self::from_physical(&g, grid).expect("shape matches by construction")
    }

    /// Forward transform of real samples on `grid`.
    pub fn from_physical(values: &Array2<f64>, grid: Grid) -> Result<Self> {
        let n = grid.n();
        if values.dim() != (n, n) {
            return Err(Error::Shape {
                expected: (n, n),
                actual: values.dim(),
            });
        }
        let mut c = values.mapv(|v| Complex64::new(v, 0.0));
        fft::plan(n).forward(&mut c);
        let scale = 1.0 / (n * n) as f64;
        c.mapv_inplace(|v| v * scale);
        Ok(Self { grid, coeffs: c })
    }

    /// Inverse transform to real samples on `grid`.
    pub fn to_physical(&self) -> Array2<f64> {
        let mut c = self.coeffs.clone();
        fft::plan(self.grid.n()).inverse(&mut c);
        c.mapv(|v| v.re)
    }

    /// Samples on the 3/2 zero-padded grid of size `grid.padded_n()`.
    pub fn to_physical_padded(&self) -> Array2<f64> {
        let m = self.grid.padded_n();
        let mut c = pad_coeffs(&self.coeffs, m);
        fft::plan(m).inverse(&mut c);
        c.mapv(|v| v.re)
    }

    /// Transforms samples taken on the padded grid and keeps the modes of `grid`.
    pub fn from_physical_padded(values: &Array2<f64>, grid: Grid) -> Result<Self> {
        let m = grid.padded_n();
        if values.dim() != (m, m) {
            return Err(Error::Shape {
                expected: (m, m),
                actual: values.dim(),
            });
        }
        let mut c = values.mapv(|v| Complex64::new(v, 0.0));
        fft::plan(m).forward(&mut c);
        let scale = 1.0 / (m * m) as f64;
        c.mapv_inplace(|v| v * scale);
        Ok(Self {
            grid,
            coeffs: restrict_coeffs(&c, grid.n()),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    /// Coefficient of integer mode `(m1, m2)`; zero when not representable.
    pub fn coeff(&self, m1: i64, m2: i64) -> Complex64 {
        match (self.grid.index_of(m1), self.grid.index_of(m2)) {
            (Some(i), Some(j)) => self.coeffs[[i, j]],
            _ => ZERO,
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[[0, 0]].re
    }

    /// `∫ f²` over the torus, from the coefficients.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.area() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Same norm evaluated by quadrature of the physical samples.
    pub fn l2_norm_physical(&self) -> f64 {
        let h = self.grid.spacing();
        (h * h * self.to_physical().iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `(Σ_k (1+|k|²)^s |c_k|²)^{1/2}` scaled by the torus area.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let k = self.grid.wavenumbers();
        let mut acc = 0.0;
        for ((i, j), c) in self.coeffs.indexed_iter() {
            let w = 1.0 + k[i] * k[i] + k[j] * k[j];
            acc += w.powf(s) * c.norm_sqr();
        }
        (self.grid.area() * acc).sqrt()
    }

    /// `∫ f g` over the torus.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert!(self.grid.is_compatible(&other.grid), "grid mismatch");
        self.grid.area()
            * self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|c(−k) − conj c(k)|`, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.coeffs[[i, j]];
                let b = self.coeffs[[(n - i) % n, (n - j) % n]];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst / scale
    }

    /// Replaces the coefficients by their Hermitian-symmetric part.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n();
        let old = self.coeffs.clone();
        for i in 0..n {
            for j in 0..n {
                let b = old[[(n - i) % n, (n - j) % n]];
                self.coeffs[[i, j]] = 0.5 * (old[[i, j]] + b.conj());
            }
        }
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.mapv(|c| c * s),
        }
    }

    /// `self + s · other`
    pub fn axpy(&self, s: f64, other: &ScalarField) -> ScalarField {
        assert!(self.grid.is_compatible(&other.grid), "grid mismatch");
        let mut out = self.clone();
        Zip::from(&mut out.coeffs)
            .and(&other.coeffs)
            .for_each(|a, &b| *a += b * s);
        out
    }

    /// Applies a real multiplier `w(k1, k2)` mode by mode.
    pub fn map_modes(&self, w: impl Fn(f64, f64) -> f64) -> ScalarField {
        let k = self.grid.wavenumbers();
        let mut out = self.clone();
        for ((i, j), c) in out.coeffs.indexed_iter_mut() {
            *c *= w(k[i], k[j]);
        }
        out
    }

    /// Re-expresses the field on a grid of the same period and different
    /// size: zero-padding when finer, restriction (Nyquist folded) when
    /// coarser.
    pub fn resample(&self, target: Grid) -> Result<ScalarField> {
        if target.box_length() != self.grid.box_length() {
            return Err(Error::GridMismatch(format!(
                "cannot resample from L = {} to L = {}",
                self.grid.box_length(),
                target.box_length()
            )));
        }
        let coeffs = if target.n() >= self.grid.n() {
            let padded = pad_coeffs(&self.coeffs, target.n());
            if target.n() == self.grid.n() {
                self.coeffs.clone()
            } else {
                padded
            }
        } else {
            restrict_coeffs(&self.coeffs, target.n())
        };
        Ok(Self {
            grid: target,
            coeffs,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(1.0, rhs)
    }
}

impl Sub<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scaled(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scaled(-1.0)
    }
}

/// Two-component field. `divfree_certified` is set only by the Leray
/// projector and by operations that provably preserve its range.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 2],
    divfree_certified: bool,
}

impl VectorField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        u1.grid().ensure_compatible(u2.grid())?;
        Ok(Self {
            components: [u1, u2],
            divfree_certified: false,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: [ScalarField::zeros(grid), ScalarField::zeros(grid)],
            divfree_certified: true,
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let u1 = ScalarField::from_fn(grid, |x, y| f(x, y).0);
        let u2 = ScalarField::from_fn(grid, |x, y| f(x, y).1);
        Self {
            components: [u1, u2],
            divfree_certified: false,
        }
    }

    pub(crate) fn certified(u1: ScalarField, u2: ScalarField) -> Self {
        Self {
            components: [u1, u2],
            divfree_certified: true,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField; 2] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn into_components(self) -> [ScalarField; 2] {
        self.components
    }

    pub fn divfree_certified(&self) -> bool {
        self.divfree_certified
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm_sq()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        self.components[0].inner(&other.components[0]) + self.components[1].inner(&other.components[1])
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let a = self.components[0].sobolev_norm(s);
        let b = self.components[1].sobolev_norm(s);
        (a * a + b * b).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components[0]
            .max_abs_coeff()
            .max(self.components[1].max_abs_coeff())
    }

    /// `max_k |k·û(k)| / max_k |û(k)|`; zero for the zero field.
    pub fn divergence_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let k = self.grid().wavenumbers();
        let (a, b) = (self.components[0].coeffs(), self.components[1].coeffs());
        let mut worst: f64 = 0.0;
        for ((i, j), c1) in a.indexed_iter() {
            worst = worst.max((c1 * k[i] + b[[i, j]] * k[j]).norm());
        }
        worst / scale
    }

    /// Applies `f` to both components; the certificate is dropped.
    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> VectorField {
        VectorField {
            components: [f(&self.components[0]), f(&self.components[1])],
            divfree_certified: false,
        }
    }

    /// `self + s · other`; certified when both inputs are.
    pub fn axpy(&self, s: f64, other: &VectorField) -> VectorField {
        VectorField {
            components: [
                self.components[0].axpy(s, &other.components[0]),
                self.components[1].axpy(s, &other.components[1]),
            ],
            divfree_certified: self.divfree_certified && other.divfree_certified,
        }
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        VectorField {
            components: [self.components[0].scaled(s), self.components[1].scaled(s)],
            divfree_certified: self.divfree_certified,
        }
    }

    pub fn to_physical(&self) -> [Array2<f64>; 2] {
        [
            self.components[0].to_physical(),
            self.components[1].to_physical(),
        ]
    }

    pub fn resample(&self, target: Grid) -> Result<VectorField> {
        Ok(VectorField {
            components: [
                self.components[0].resample(target)?,
                self.components[1].resample(target)?,
            ],
            divfree_certified: self.divfree_certified,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}

/// Index weights for placing a mode of an `n`-grid onto an `m`-grid
/// (`m > n`). The unpaired Nyquist mode is split evenly between `±n/2`.
fn pad_targets(i: usize, n: usize, m: usize) -> [(usize, f64); 2] {
    let half = n / 2;
    if i == half {
        [(half, 0.5), (m - half, 0.5)]
    } else if i < half {
        [(i, 1.0), (usize::MAX, 0.0)]
    } else {
        [(i + m - n, 1.0), (usize::MAX, 0.0)]
    }
}

pub(crate) fn pad_coeffs(c: &Array2<Complex64>, m: usize) -> Array2<Complex64> {
    let n = c.nrows();
    let mut out = Array2::from_elem((m, m), ZERO);
    if m == n {
        out.assign(c);
        return out;
    }
    assert!(m > n);
    for ((i, j), &v) in c.indexed_iter() {
        if v == ZERO {
            continue;
        }
        for &(a, wa) in pad_targets(i, n, m).iter().filter(|t| t.1 > 0.0) {
            for &(b, wb) in pad_targets(j, n, m).iter().filter(|t| t.1 > 0.0) {
                out[[a, b]] += v * (wa * wb);
            }
        }
    }
    out
}

/// Keeps the modes of an `n`-grid from an `m`-grid spectrum (`m ≥ n`). The
/// Nyquist row/column receives `c(+n/2) + c(−n/2)`, which is what sampling
/// the band-limited part on the coarse grid would produce.
pub(crate) fn restrict_coeffs(c: &Array2<Complex64>, n: usize) -> Array2<Complex64> {
    let m = c.nrows();
    if m == n {
        return c.clone();
    }
    assert!(m > n);
    let half = n / 2;
    let sources = |i: usize| -> Vec<usize> {
        if i == half {
            vec![half, m - half]
        } else if i < half {
            vec![i]
        } else {
            vec![i + m - n]
        }
    };
    Array2::from_shape_fn((n, n), |(i, j)| {
        let mut acc = ZERO;
        for a in sources(i) {
            for b in sources(j) {
                acc += c[[a, b]];
            }
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 1.0).unwrap()
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = grid(16);
        let f = ScalarField::from_fn(g, |_, _| 2.5);
        for ((i, j), c) in f.coeffs().indexed_iter() {
            let expected = if (i, j) == (0, 0) { 2.5 } else { 0.0 };
            assert!((c.re - expected).abs() < 1e-14 && c.im.abs() < 1e-14);
        }
    }

    #[test]
    fn cosine_coefficients() {
        let g = grid(16);
        let f = ScalarField::from_fn(g, |x, _| x.cos());
        assert!((f.coeff(1, 0).re - 0.5).abs() < 1e-15);
        assert!((f.coeff(-1, 0).re - 0.5).abs() < 1e-15);
        let rest: f64 = f
            .coeffs()
            .indexed_iter()
            .filter(|((i, j), _)| !((*i == 1 || *i == 15) && *j == 0))
            .map(|(_, c)| c.norm())
            .sum();
        assert!(rest < 1e-14);
        let expected = (0.5 * (2.0 * PI).powi(2)).sqrt();
        assert!((f.l2_norm() - expected).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let g = grid(16);
        let bad = Array2::<f64>::zeros((8, 16));
        assert!(matches!(
            ScalarField::from_physical(&bad, g),
            Err(Error::Shape { .. })
        ));
        assert!(ScalarField::from_physical_padded(&Array2::zeros((16, 16)), g).is_err());
    }

    #[test]
    fn padded_round_trip_keeps_nyquist() {
        let g = grid(8);
        let f = ScalarField::from_fn(g, |x, y| (4.0 * x).cos() + (3.0 * y).sin() + (x + 4.0 * y).cos());
        let back = ScalarField::from_physical_padded(&f.to_physical_padded(), g).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs().iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn resample_up_and_down() {
        let g = grid(16);
        let f = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        let fine = f.resample(grid(32)).unwrap();
        assert!((fine.l2_norm() - f.l2_norm()).abs() < 1e-12);
        let back = fine.resample(g).unwrap();
        assert!((&back - &f).max_abs_coeff() < 1e-15);
        let direct = ScalarField::from_fn(grid(32), |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        assert!((&direct - &fine).max_abs_coeff() < 1e-14);
    }
}
