//! Samples on the 3/2-padded grid, where products and compositions are formed.

use ndarray::{Array2, Zip};
use std::ops::{Add, Mul, Sub};

use super::field::ScalarField;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples of a field on the padded grid of `grid`.
///
/// Integrals use the rectangle rule on the padded lattice, which is exact
/// for the squares of fields band-limited to the original grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Array2<f64>,
}

impl PhysicalField {
    pub fn from_spectral(f: &ScalarField) -> Self {
        Self {
            grid: *f.grid(),
            values: f.to_physical_padded(),
        }
    }

    pub fn from_values(grid: Grid, values: Array2<f64>) -> Result<Self> {
        let m = grid.padded_n();
        if values.dim() != (m, m) {
            return Err(Error::Shape {
                expected: (m, m),
                actual: values.dim(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let m = grid.padded_n();
        Self {
            grid,
            values: Array2::from_elem((m, m), value),
        }
    }

    /// Back to coefficients on `grid`, discarding modes beyond it.
    pub fn to_spectral(&self) -> ScalarField {
        ScalarField::from_physical_padded(&self.values, self.grid).expect("padded shape")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PhysicalField {
        Self {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }

    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<PhysicalField> {
        let mut values = Array2::zeros(self.values.dim());
        for (o, &v) in values.iter_mut().zip(self.values.iter()) {
            *o = f(v)?;
        }
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    fn cell(&self) -> f64 {
        let h = self.grid.period() / self.grid.padded_n() as f64;
        h * h
    }

    /// `∫ f` over the torus.
    pub fn integral(&self) -> f64 {
        self.cell() * self.values.sum()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        (self.cell() * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.cell() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn l4_norm(&self) -> f64 {
        (self.cell() * self.values.iter().map(|v| (v * v) * (v * v)).sum::<f64>()).powf(0.25)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn zip_with(&self, other: &PhysicalField, f: impl Fn(f64, f64) -> f64) -> PhysicalField {
        assert!(self.grid.is_compatible(&other.grid), "grid mismatch");
        let mut values = self.values.clone();
        Zip::from(&mut values)
            .and(&other.values)
            .for_each(|a, &b| *a = f(*a, b));
        Self {
            grid: self.grid,
            values,
        }
    }
}

impl Mul<&PhysicalField> for &PhysicalField {
    type Output = PhysicalField;
    fn mul(self, rhs: &PhysicalField) -> PhysicalField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Add<&PhysicalField> for &PhysicalField {
    type Output = PhysicalField;
    fn add(self, rhs: &PhysicalField) -> PhysicalField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub<&PhysicalField> for &PhysicalField {
    type Output = PhysicalField;
    fn sub(self, rhs: &PhysicalField) -> PhysicalField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &PhysicalField {
    type Output = PhysicalField;
    fn mul(self, rhs: f64) -> PhysicalField {
        self.map(|a| a * rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quadrature_of_cosine_powers() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = PhysicalField::from_spectral(&ScalarField::from_fn(g, |x, _| x.cos()));
        let area = (2.0 * PI).powi(2);
        assert!((f.l2_norm().powi(2) - 0.5 * area).abs() < 1e-12);
        assert!((f.l4_norm().powi(4) - 0.375 * area).abs() < 1e-12);
        assert!((f.linf_norm() - 1.0).abs() < 1e-14);
        assert!(f.integral().abs() < 1e-12);
    }
}
