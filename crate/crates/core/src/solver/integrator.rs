//! IMEX steppers for `y' = λ(k)·d·y + E(y, t)` applied to lists of scalar fields.

use ndarray::Array2;

use super::config::Scheme;
use crate::error::Result;
use crate::spectral::{Grid, ScalarField};

/// Explicit part of a semi-linear system whose stiff part is `d_c Δ` on
/// component `c`.
pub(crate) trait ImexSystem {
    fn diffusivities(&self) -> Vec<f64>;

    fn explicit(&self, y: &[ScalarField], t: f64) -> Result<Vec<ScalarField>>;
}

/// `−|k|²`, with the unpaired Nyquist row and column left at zero to match
/// the spectral Laplacian.
pub(crate) fn laplacian_symbol(grid: &Grid) -> Array2<f64> {
    let k = grid.wavenumbers();
    let h = grid.nyquist_index();
    Array2::from_shape_fn((grid.n(), grid.n()), |(i, j)| {
        if i == h || j == h {
            0.0
        } else {
            -(k[i] * k[i] + k[j] * k[j])
        }
    })
}

/// `φ₁, φ₂, φ₃` at `z`; Taylor series near the origin.
pub(crate) fn phi123(z: f64) -> (f64, f64, f64) {
    if z.abs() < 0.5 {
        let (mut p1, mut p2, mut p3) = (0.0, 0.0, 0.0);
        // φ_k(z) = Σ zⁿ/(n+k)!
        let mut term = 1.0; // zⁿ / n!
        let mut fact = [1.0, 1.0, 2.0, 6.0]; // (n+k)!/n! built incrementally
        for n in 0..24 {
            if n > 0 {
                term *= z / n as f64;
                let nf = n as f64;
                fact = [1.0, nf + 1.0, (nf + 1.0) * (nf + 2.0), (nf + 1.0) * (nf + 2.0) * (nf + 3.0)];
            }
            p1 += term / fact[1];
            p2 += term / fact[2];
            p3 += term / fact[3];
        }
        (p1, p2, p3)
    } else {
        let e = z.exp_m1();
        let p1 = e / z;
        let p2 = (e - z) / (z * z);
        let p3 = (e - z - 0.5 * z * z) / (z * z * z);
        (p1, p2, p3)
    }
}

fn combine(
    y: &ScalarField,
    terms: &[(&Array2<f64>, &ScalarField)],
    base: &Array2<f64>,
) -> ScalarField {
    let mut out = y.clone();
    for ((idx, c), b) in out.coeffs_mut().indexed_iter_mut().zip(base.iter()) {
        let mut acc = *c * *b;
        for (w, f) in terms {
            acc += f.coeffs()[idx] * w[idx];
        }
        *c = acc;
    }
    out
}

/// Advances `y` from `t` by `dt`. `e0` is the explicit tendency at `(y, t)`,
/// computed by the caller so it can inspect the state first.
pub(crate) fn imex_step<S: ImexSystem>(
    sys: &S,
    scheme: Scheme,
    y: &[ScalarField],
    e0: &[ScalarField],
    t: f64,
    dt: f64,
) -> Result<Vec<ScalarField>> {
    let grid = *y[0].grid();
    let sym = laplacian_symbol(&grid);
    let d = sys.diffusivities();
    match scheme {
        Scheme::ImexCnRk2 => {
            let amp: Vec<Array2<f64>> = d.iter().map(|&dc| sym.mapv(|s| 1.0 + 0.5 * dt * dc * s)).collect();
            let inv: Vec<Array2<f64>> = d
                .iter()
                .map(|&dc| sym.mapv(|s| 1.0 / (1.0 - 0.5 * dt * dc * s)))
                .collect();
            // (1 − dtλ/2)⁻¹[(1 + dtλ/2)y + w·dt·Σe]
            let stage = |c: usize, e: &[&ScalarField], w: f64| -> ScalarField {
                let mut out = y[c].clone();
                for (idx, v) in out.coeffs_mut().indexed_iter_mut() {
                    let mut acc = *v * amp[c][idx];
                    for f in e {
                        acc += f.coeffs()[idx] * (w * dt);
                    }
                    *v = acc * inv[c][idx];
                }
                out
            };
            let y1: Vec<ScalarField> = (0..y.len()).map(|c| stage(c, &[&e0[c]], 1.0)).collect();
            let e1 = sys.explicit(&y1, t + dt)?;
            Ok((0..y.len())
                .map(|c| stage(c, &[&e0[c], &e1[c]], 0.5))
                .collect())
        }
        Scheme::ImexEtdRk3 => {
            let mut coef = Vec::with_capacity(y.len());
            for &dc in &d {
                let n = grid.n();
                let mut c = EtdCoeffs::zeros(n);
                for ((i, j), &s) in sym.indexed_iter() {
                    let z = dt * dc * s;
                    let (p1, p2, p3) = phi123(z);
                    let (q1, _, _) = phi123(0.5 * z);
                    c.ez[[i, j]] = z.exp();
                    c.ez2[[i, j]] = (0.5 * z).exp();
                    c.half[[i, j]] = 0.5 * dt * q1;
                    c.full[[i, j]] = dt * p1;
                    c.wn[[i, j]] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
                    c.wa[[i, j]] = dt * (4.0 * p2 - 8.0 * p3);
                    c.wb[[i, j]] = dt * (4.0 * p3 - p2);
                }
                coef.push(c);
            }
            let a: Vec<ScalarField> = y
                .iter()
                .zip(e0)
                .zip(&coef)
                .map(|((yc, ec), c)| combine(yc, &[(&c.half, ec)], &c.ez2))
                .collect();
            let ea = sys.explicit(&a, t + 0.5 * dt)?;
            let b: Vec<ScalarField> = y
                .iter()
                .zip(e0)
                .zip(&ea)
                .zip(&coef)
                .map(|(((yc, ec), eac), c)| {
                    let g = eac.scaled(2.0).axpy(-1.0, ec);
                    combine(yc, &[(&c.full, &g)], &c.ez)
                })
                .collect();
            let eb = sys.explicit(&b, t + dt)?;
            Ok((0..y.len())
                .map(|i| {
                    let c = &coef[i];
                    combine(&y[i], &[(&c.wn, &e0[i]), (&c.wa, &ea[i]), (&c.wb, &eb[i])], &c.ez)
                })
                .collect())
        }
    }
}

struct EtdCoeffs {
    ez: Array2<f64>,
    ez2: Array2<f64>,
    half: Array2<f64>,
    full: Array2<f64>,
    wn: Array2<f64>,
    wa: Array2<f64>,
    wb: Array2<f64>,
}

impl EtdCoeffs {
    fn zeros(n: usize) -> Self {
        let z = || Array2::zeros((n, n));
        Self {
            ez: z(),
            ez2: z(),
            half: z(),
            full: z(),
            wn: z(),
            wa: z(),
            wb: z(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_functions_are_continuous_across_the_switch() {
        for z in [-0.5f64, 0.5] {
            let z = z * (1.0 - 1e-12);
            let below = phi123(z);
            let e = z.exp_m1();
            let direct = (e / z, (e - z) / (z * z), (e - z - 0.5 * z * z) / z.powi(3));
            assert!((below.0 - direct.0).abs() < 1e-13);
            assert!((below.1 - direct.1).abs() < 1e-12);
            assert!((below.2 - direct.2).abs() < 1e-11);
        }
        let (a, b, c) = phi123(0.0);
        assert_eq!((a, b, c), (1.0, 0.5, 1.0 / 6.0));
    }
}
