use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, 2πL)²` with `n` points per axis.
///
/// Fourier modes are indexed by integers `m ∈ {−n/2+1, …, n/2}` per axis and
/// carry the physical wavenumber `m / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    box_length: f64,
    dealias_fraction: f64,
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        Self::with_dealias(n, box_length, 1.0)
    }

    /// `dealias_fraction` scales the default Friedrich cutoff radius relative to
    /// the largest representable radius `n / (2L)`.
    pub fn with_dealias(n: usize, box_length: f64, dealias_fraction: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Validation(format!(
                "grid size must be even and at least 8, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::Validation(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self {
            n,
            box_length,
            dealias_fraction,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Period `2πL` of each axis.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn area(&self) -> f64 {
        self.period() * self.period()
    }

    /// Size of the 3/2 zero-padded grid used for products.
    pub fn padded_n(&self) -> usize {
        3 * self.n / 2
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Integer mode number of array index `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Array index of integer mode `m`, if it is representable.
    pub fn index_of(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m > half || m <= -half {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.n as i64) as usize)
        }
    }

    /// Physical wavenumber `m / L` of array index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.mode(i) as f64 / self.box_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Largest radius `n / (2L)` of a frequency ball on this grid.
    pub fn max_wavenumber(&self) -> f64 {
        self.n as f64 / (2.0 * self.box_length)
    }

    /// Cell-centred sample coordinates `x_j = j · 2πL / n`.
    pub fn coordinates(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|j| j as f64 * h).collect()
    }

    /// Default Friedrich cutoff: `dealias_fraction · n / (2L)`.
    pub fn default_cutoff(&self) -> CutoffIndex {
        CutoffIndex {
            radius: self.dealias_fraction * self.max_wavenumber(),
        }
    }

    /// Same lattice (size and period); the dealias fraction is a default only.
    pub fn is_compatible(&self, other: &Grid) -> bool {
        self.n == other.n && self.box_length == other.box_length
    }

    pub(crate) fn ensure_compatible(&self, other: &Grid) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(n = {}, L = {}) vs (n = {}, L = {})",
                self.n, self.box_length, other.n, other.box_length
            )))
        }
    }

    /// Same period with a different number of points.
    pub fn resized(&self, n: usize) -> Result<Grid> {
        Grid::with_dealias(n, self.box_length, self.dealias_fraction)
    }
}

/// Radius of the frequency ball `B_n` used by the cutoff operator `P_n`.
///
/// The ball is closed: modes with `|k| = n` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffIndex {
    radius: f64,
}

impl CutoffIndex {
    pub fn new(radius: f64, grid: &Grid) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Validation(format!(
                "cutoff radius must be positive, got {radius}"
            )));
        }
        if radius > grid.max_wavenumber() * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "cutoff radius {radius} exceeds the grid limit {}",
                grid.max_wavenumber()
            )));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn contains(&self, k1: f64, k2: f64) -> bool {
        k1 * k1 + k2 * k2 <= self.radius * self.radius * (1.0 + 1e-12)
    }

    pub fn min(self, other: CutoffIndex) -> CutoffIndex {
        if self.radius <= other.radius {
            self
        } else {
            other
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(6, 1.0).is_err());
        assert!(Grid::new(15, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::with_dealias(16, 1.0, 0.0).is_err());
        assert!(Grid::with_dealias(16, 1.0, 1.5).is_err());
    }

    #[test]
    fn mode_index_round_trip() {
        let g = Grid::new(16, 2.0).unwrap();
        for i in 0..16 {
            assert_eq!(g.index_of(g.mode(i)), Some(i));
        }
        assert_eq!(g.mode(8), 8);
        assert_eq!(g.mode(9), -7);
        assert_eq!(g.index_of(-8), None);
        assert!((g.wavenumber(3) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_limits() {
        let g = Grid::new(32, 1.0).unwrap();
        assert!(CutoffIndex::new(16.0, &g).is_ok());
        assert!(CutoffIndex::new(16.5, &g).is_err());
        assert!(CutoffIndex::new(-1.0, &g).is_err());
        let c = CutoffIndex::new(5.0, &g).unwrap();
        assert!(c.contains(3.0, 4.0));
        assert!(!c.contains(4.0, 4.0));
    }
}
