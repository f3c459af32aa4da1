//! Initial data: closed-form fields, rough random fields of prescribed
//! Sobolev regularity, and snapshot files.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::spectral::{leray_project, truncate, truncate_vector, Grid, ScalarField, Snapshot, VectorField};

/// Decay margin above `|k|^{−(s+1)}`: the field lies in `H^s` but its
/// `H^{s+1/2}` norm is large.
pub const SPECTRAL_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    /// `θ = A sin x₁ sin x₂` or `u = A(sin x₁ cos x₂, −cos x₁ sin x₂)`
    TaylorGreen {
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// Random field with `‖·‖_{H^s} = norm`; `seed` overrides the run seed.
    RandomHs {
        s: f64,
        norm: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Component(s) of a `.fld` snapshot: θ is component 0, u is 1 and 2.
    File { path: PathBuf },
}

fn unit() -> f64 {
    1.0
}

impl InitialSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialSpec::RandomHs { s, norm, .. } => {
                if !(-4.0..=8.0).contains(&s) {
                    return Err(Error::Validation(format!(
                        "Sobolev exponent must lie in [-4, 8], got {s}"
                    )));
                }
                if !(norm.is_finite() && norm >= 0.0) {
                    return Err(Error::Validation(format!("norm must be nonnegative, got {norm}")));
                }
                Ok(())
            }
            InitialSpec::TaylorGreen { amplitude } if !amplitude.is_finite() => {
                Err(Error::Validation("amplitude must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Unnormalized rough spectrum `(ξ + iζ)|k|^{−(s+1+margin)}`, Hermitian and
/// mean-free, restricted to the default cutoff of `grid`.
fn rough_field(grid: Grid, s: f64, r: &mut ChaCha20Rng) -> ScalarField {
    let n = grid.n();
    let k = grid.wavenumbers();
    let h = grid.nyquist_index();
    let mut f = ScalarField::zeros(grid);
    let decay = s + 1.0 + SPECTRAL_MARGIN;
    {
        let c = f.coeffs_mut();
        for i in 0..n {
            for j in 0..n {
                let re: f64 = StandardNormal.sample(r);
                let im: f64 = StandardNormal.sample(r);
                let kk = (k[i] * k[i] + k[j] * k[j]).sqrt();
                if kk == 0.0 || i == h || j == h {
                    continue;
                }
                c[[i, j]] = Complex64::new(re, im) * kk.powf(-decay);
            }
        }
    }
    f.symmetrize();
    truncate(&f, grid.default_cutoff())
}

/// Scalar field with `‖f‖_{H^s} = norm`.
pub fn random_hs_scalar(grid: Grid, s: f64, norm: f64, seed: u64, stream: u64) -> ScalarField {
    let f = rough_field(grid, s, &mut rng(seed, stream));
    let m = f.sobolev_norm(s);
    if m == 0.0 {
        return f;
    }
    f.scaled(norm / m)
}

/// Divergence-free, mean-free velocity with `‖u‖_{H^s} = norm`.
pub fn random_hs_velocity(grid: Grid, s: f64, norm: f64, seed: u64, stream: u64) -> VectorField {
    let mut r = rng(seed, stream);
    let a = rough_field(grid, s, &mut r);
    let b = rough_field(grid, s, &mut r);
    let u = truncate_vector(&leray_project(&VectorField::new(a, b).expect("same grid")), grid.default_cutoff());
    let m = u.sobolev_norm(s);
    if m == 0.0 {
        return u;
    }
    u.scaled(norm / m)
}

const THETA_STREAM: u64 = 0;
const VELOCITY_STREAM: u64 = 1;

pub fn generate_scalar(spec: &InitialSpec, grid: Grid, seed: u64) -> Result<ScalarField> {
    spec.validate()?;
    Ok(match spec {
        InitialSpec::Zero => ScalarField::zeros(grid),
        InitialSpec::TaylorGreen { amplitude } => {
            let a = *amplitude;
            ScalarField::from_fn(grid, |x, y| a * x.sin() * y.sin())
        }
        InitialSpec::RandomHs { s, norm, seed: own } => {
            random_hs_scalar(grid, *s, *norm, own.unwrap_or(seed), THETA_STREAM)
        }
        InitialSpec::File { path } => {
            let snap = Snapshot::load(path)?;
            snap.scalar(0)?.resample(grid)?
        }
    })
}

pub fn generate_velocity(spec: &InitialSpec, grid: Grid, seed: u64) -> Result<VectorField> {
    spec.validate()?;
    Ok(match spec {
        InitialSpec::Zero => VectorField::zeros(grid),
        InitialSpec::TaylorGreen { amplitude } => {
            let a = *amplitude;
            leray_project(&VectorField::from_fn(grid, |x, y| {
                (a * x.sin() * y.cos(), -a * x.cos() * y.sin())
            }))
        }
        InitialSpec::RandomHs { s, norm, seed: own } => {
            random_hs_velocity(grid, *s, *norm, own.unwrap_or(seed), VELOCITY_STREAM)
        }
        InitialSpec::File { path } => {
            let snap = Snapshot::load(path)?;
            if snap.components.len() < 3 {
                return Err(Error::Format(format!(
                    "{} has no velocity components",
                    path.display()
                )));
            }
            leray_project(&snap.velocity()?.resample(grid)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_hs_norm_and_roughness() {
        // the resolved tail norm grows like N^{0.95}
        let g = Grid::new(128, 1.0).unwrap();
        let f = random_hs_scalar(g, 1.5, 1.0, 7, 0);
        assert!((f.sobolev_norm(1.5) - 1.0).abs() < 1e-10);
        assert!(f.sobolev_norm(2.5) > 10.0, "{}", f.sobolev_norm(2.5));
        assert!(f.hermitian_defect() < 1e-15);
        assert_eq!(f.mean(), 0.0);
        assert_eq!(f, random_hs_scalar(g, 1.5, 1.0, 7, 0));
        assert_ne!(f, random_hs_scalar(g, 1.5, 1.0, 8, 0));
    }

    #[test]
    fn random_velocity_is_solenoidal() {
        let g = Grid::new(32, 1.0).unwrap();
        let u = random_hs_velocity(g, 0.5, 2.0, 3, 1);
        assert!(u.divfree_certified());
        assert!(u.divergence_defect() < 1e-14);
        assert!((u.sobolev_norm(0.5) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn out_of_range_exponent_rejected() {
        let g = Grid::new(16, 1.0).unwrap();
        let spec = InitialSpec::RandomHs {
            s: 9.0,
            norm: 1.0,
            seed: None,
        };
        assert!(generate_scalar(&spec, g, 0).is_err());
        assert_eq!(generate_scalar(&InitialSpec::Zero, g, 0).unwrap().max_abs_coeff(), 0.0);
    }
}
