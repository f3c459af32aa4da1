//! Dyadic Littlewood–Paley blocks on the periodic grid, block-based Sobolev
//! norms, Bernstein ratios and commutators `[φ, Δ_j]∇ψ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laws::{apply_law, CoefficientLaw};
use crate::spectral::{gradient, multiply_dealiased, Grid, PhysicalField, ScalarField, VectorField};

/// Smooth step, 0 for `x ≤ 0` and 1 for `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Radial low-pass profile: 1 on `r ≤ 1`, 0 on `r ≥ 4/3`, nonincreasing.
pub fn chi(r: f64) -> f64 {
    smooth_step((4.0 / 3.0 - r) * 3.0)
}

/// Shell profile `χ(r/2) − χ(r)`, supported in `[1, 8/3]`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Bernstein ratios of a nonzero block lie in this interval.
pub const BERNSTEIN_BOUNDS: (f64, f64) = (0.75, 8.0 / 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicFilterBank {
    grid: Grid,
    j_max: i32,
}

impl DyadicFilterBank {
    /// Shells `j = 0..=j_max` with `j_max = ⌊log₂(N/(2L))⌋ − 1`.
    pub fn new(grid: Grid) -> Result<Self> {
        let top = (grid.n() as f64 / (2.0 * grid.box_length())).log2().floor() as i32 - 1;
        if top < 0 {
            return Err(Error::Validation(format!(
                "grid (n = {}, L = {}) resolves no dyadic shell",
                grid.n(),
                grid.box_length()
            )));
        }
        Ok(Self { grid, j_max: top })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Multiplier of block `j` at radius `r`; `j = −1` is the low-pass block.
    pub fn multiplier(&self, j: i32, r: f64) -> f64 {
        if j < 0 {
            chi(r)
        } else {
            phi(r / 2f64.powi(j))
        }
    }

    /// `Δ_j g`.
    pub fn block(&self, g: &ScalarField, j: i32) -> Result<ScalarField> {
        self.grid.ensure_compatible(g.grid())?;
        if j < -1 || j > self.j_max {
            return Err(Error::Validation(format!(
                "shell {j} outside -1..={}",
                self.j_max
            )));
        }
        Ok(g.map_modes(|a, b| self.multiplier(j, a.hypot(b))))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    /// `[Δ₋₁g, Δ₀g, …, Δ_Jg]`
    pub blocks: Vec<ScalarField>,
    /// `g − Σ_j Δ_jg`: the content at `|ξ| > 2^{J+1}`, zero for fields
    /// supported in that disk.
    pub remainder: ScalarField,
    pub source_grid: Grid,
}

impl DyadicDecomposition {
    /// `Δ_j g` for `j ≥ −1`.
    pub fn block(&self, j: i32) -> &ScalarField {
        &self.blocks[(j + 1) as usize]
    }

    pub fn j_max(&self) -> i32 {
        self.blocks.len() as i32 - 2
    }

    pub fn reconstruct(&self) -> ScalarField {
        self.blocks.iter().fold(self.remainder.clone(), |acc, b| &acc + b)
    }

    /// `‖Δ_j g‖²_{L²}` for `j = −1..=J`.
    pub fn shell_energies(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.l2_norm_sq()).collect()
    }
}

pub fn decompose(g: &ScalarField, bank: &DyadicFilterBank) -> Result<DyadicDecomposition> {
    let blocks = (-1..=bank.j_max())
        .map(|j| bank.block(g, j))
        .collect::<Result<Vec<_>>>()?;
    let remainder = g.map_modes(|a, b| 1.0 - chi(a.hypot(b) / 2f64.powi(bank.j_max() + 1)));
    Ok(DyadicDecomposition {
        blocks,
        remainder,
        source_grid: *g.grid(),
    })
}

fn check_exponent(s: f64) -> Result<()> {
    if (-4.0..=8.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Validation(format!("Sobolev exponent must lie in [-4, 8], got {s}")))
    }
}

/// Direct multiplier norm with weight `(1 + |ξ|²)^s`.
pub fn sobolev_norm(g: &ScalarField, s: f64) -> Result<f64> {
    check_exponent(s)?;
    Ok(g.sobolev_norm(s))
}

/// `‖g‖_{L²} + (Σ_{j≥0} 2^{2js}‖Δ_jg‖²)^{1/2}`.
pub fn lp_sobolev_norm(d: &DyadicDecomposition, s: f64) -> Result<f64> {
    if !(0.0..=8.0).contains(&s) {
        return Err(Error::Validation(format!("block norm needs s in [0, 8], got {s}")));
    }
    let l2 = d.reconstruct().l2_norm();
    let high: f64 = (0..=d.j_max())
        .map(|j| 2f64.powf(2.0 * j as f64 * s) * d.block(j).l2_norm_sq())
        .sum();
    Ok(l2 + high.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub shell: i32,
    /// `‖∇Δ_jg‖ / (2^j ‖Δ_jg‖)`
    pub ratio: f64,
    pub pass: bool,
}

/// Bernstein ratio of shell `j ≥ 0`.
pub fn bernstein_check(g: &ScalarField, bank: &DyadicFilterBank, j: i32) -> Result<BernsteinReport> {
    if j < 0 {
        return Err(Error::Validation("Bernstein ratios need a shell j >= 0".into()));
    }
    let b = bank.block(g, j)?;
    let norm = b.l2_norm();
    if norm == 0.0 {
        return Err(Error::UndefinedRatio { shell: j });
    }
    let ratio = gradient(&b).l2_norm() / (2f64.powi(j) * norm);
    let (lo, hi) = BERNSTEIN_BOUNDS;
    Ok(BernsteinReport {
        shell: j,
        ratio,
        pass: ratio >= lo && ratio <= hi,
    })
}

fn is_constant(f: &ScalarField) -> bool {
    f.coeffs().iter().skip(1).all(|c| c.norm_sqr() == 0.0)
}

/// `φ·Δ_j∇ψ − Δ_j(φ∇ψ)` with dealiased products; exactly zero for constant `φ`.
pub fn commutator(
    phi: &ScalarField,
    psi: &ScalarField,
    bank: &DyadicFilterBank,
    j: i32,
) -> Result<VectorField> {
    phi.grid().ensure_compatible(psi.grid())?;
    bank.grid().ensure_compatible(phi.grid())?;
    if is_constant(phi) {
        bank.block(psi, j)?;
        return Ok(VectorField::zeros(*phi.grid()));
    }
    let g = gradient(psi);
    let comp = |i: usize| -> Result<ScalarField> {
        let a = multiply_dealiased(phi, &bank.block(g.component(i), j)?)?;
        let b = bank.block(&multiply_dealiased(phi, g.component(i))?, j)?;
        Ok(&a - &b)
    };
    VectorField::new(comp(0)?, comp(1)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SummabilityForm {
    /// `l¹` sum against `‖∇φ‖_{H^ν}‖∇ψ‖_{H^{s−ν}}`
    L1,
    /// `l²` sum against `‖∇φ‖_{L∞}‖∇ψ‖_{H^{s−1}} + ‖∇φ‖_{H^{s−1}}‖∇ψ‖_{L∞}`
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub form: SummabilityForm,
    pub s: f64,
    pub nu: Option<f64>,
    /// `2^{js}‖[φ, Δ_j]∇ψ‖_{L²}` for `j = 1..=J`; the realized sequence.
    pub terms: Vec<f64>,
    /// `S`, the `l¹` or `l²` norm of `terms`
    pub sum: f64,
    /// Geometric extrapolation of the shells beyond `J` from the last ratio;
    /// infinite when the terms do not decay.
    pub tail_estimate: f64,
    pub rhs: f64,
    /// `S / rhs`, with `0/0 = 0`
    pub c_emp: f64,
}

fn vector_linf(v: &VectorField) -> f64 {
    let a = PhysicalField::from_spectral(v.component(0));
    let b = PhysicalField::from_spectral(v.component(1));
    (&(&a * &a) + &(&b * &b)).linf_norm().sqrt()
}

fn commutator_terms(phi: &ScalarField, psi: &ScalarField, s: f64) -> Result<Vec<f64>> {
    let bank = DyadicFilterBank::new(*phi.grid())?;
    (1..=bank.j_max())
        .map(|j| Ok(2f64.powf(j as f64 * s) * commutator(phi, psi, &bank, j)?.l2_norm()))
        .collect()
}

fn finish(
    form: SummabilityForm,
    s: f64,
    nu: Option<f64>,
    terms: Vec<f64>,
    rhs: f64,
) -> Result<CommutatorReport> {
    let p = match form {
        SummabilityForm::L1 => 1.0,
        SummabilityForm::L2 => 2.0,
    };
    let sum = terms.iter().map(|t| t.powf(p)).sum::<f64>().powf(1.0 / p);
    let tail_estimate = match terms.len() {
        0 | 1 => f64::INFINITY,
        n => {
            let (a, b) = (terms[n - 2], terms[n - 1]);
            if b == 0.0 {
                0.0
            } else if a > 0.0 && b < a {
                let q = (b / a).powf(p);
                (b.powf(p) * q / (1.0 - q)).powf(1.0 / p)
            } else {
                f64::INFINITY
            }
        }
    };
    let c_emp = if sum == 0.0 {
        0.0
    } else if rhs == 0.0 {
        return Err(Error::Degenerate(
            "commutator is nonzero while the right-hand side vanishes".into(),
        ));
    } else {
        sum / rhs
    };
    Ok(CommutatorReport {
        form,
        s,
        nu,
        terms,
        sum,
        tail_estimate,
        rhs,
        c_emp,
    })
}

/// Low-regularity form, for `−1 < ν < 1` and `−1 < s < ν + 1`.
pub fn commutator_scaling_report(
    phi: &ScalarField,
    psi: &ScalarField,
    s: f64,
    nu: f64,
) -> Result<CommutatorReport> {
    if !(nu > -1.0 && nu < 1.0 && s > -1.0 && s < nu + 1.0) {
        return Err(Error::Validation(format!(
            "l1 commutator form needs -1 < nu < 1 and -1 < s < nu + 1, got s = {s}, nu = {nu}"
        )));
    }
    phi.grid().ensure_compatible(psi.grid())?;
    let terms = commutator_terms(phi, psi, s)?;
    let rhs = gradient(phi).sobolev_norm(nu) * gradient(psi).sobolev_norm(s - nu);
    finish(SummabilityForm::L1, s, Some(nu), terms, rhs)
}

/// High-regularity form, for `s > 0`.
pub fn commutator_scaling_report_l2(phi: &ScalarField, psi: &ScalarField, s: f64) -> Result<CommutatorReport> {
    if !(s > 0.0) {
        return Err(Error::Validation(format!("l2 commutator form needs s > 0, got {s}")));
    }
    phi.grid().ensure_compatible(psi.grid())?;
    let terms = commutator_terms(phi, psi, s)?;
    let (gp, gq) = (gradient(phi), gradient(psi));
    let rhs = vector_linf(&gp) * gq.sobolev_norm(s - 1.0) + gp.sobolev_norm(s - 1.0) * vector_linf(&gq);
    finish(SummabilityForm::L2, s, None, terms, rhs)
}

/// `‖φψ‖_{H^s} / (‖φ‖_{L∞}‖ψ‖_{H^s} + ‖φ‖_{H^s}‖ψ‖_{L∞})`.
pub fn product_estimate_ratio(phi: &ScalarField, psi: &ScalarField, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let prod = multiply_dealiased(phi, psi)?;
    let inf = |f: &ScalarField| PhysicalField::from_spectral(f).linf_norm();
    let rhs = inf(phi) * psi.sobolev_norm(s) + phi.sobolev_norm(s) * inf(psi);
    let lhs = prod.sobolev_norm(s);
    if lhs == 0.0 {
        return Ok(0.0);
    }
    if rhs == 0.0 {
        return Err(Error::Degenerate("product estimate with vanishing factors".into()));
    }
    Ok(lhs / rhs)
}

/// `‖∇(a∘θ)‖_{H^{s−1}} / ‖∇θ‖_{H^{s−1}}`, with `a∘θ` sampled on the padded grid.
pub fn composition_estimate_ratio(law: &CoefficientLaw, theta: &ScalarField, s: f64) -> Result<f64> {
    check_exponent(s - 1.0)?;
    let den = gradient(theta).sobolev_norm(s - 1.0);
    if den == 0.0 {
        return Err(Error::Degenerate("composition estimate with constant θ".into()));
    }
    let a = apply_law(law, theta)?.to_spectral();
    Ok(gradient(&a).sobolev_norm(s - 1.0) / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_support_and_partition() {
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(phi(0.999), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        for i in 0..4000 {
            let r = i as f64 * 0.01;
            let sum: f64 = chi(r) + (0..6).map(|j| phi(r / 2f64.powi(j))).sum::<f64>();
            if r <= 64.0 {
                assert!((sum - 1.0).abs() < 1e-12, "{r}: {sum}");
            }
            assert!(chi(r + 0.01) <= chi(r));
        }
    }

    #[test]
    fn bank_depth() {
        let g = Grid::new(64, 1.0).unwrap();
        assert_eq!(DyadicFilterBank::new(g).unwrap().j_max(), 4);
        let g = Grid::new(256, 2.0).unwrap();
        assert_eq!(DyadicFilterBank::new(g).unwrap().j_max(), 5);
    }

    #[test]
    fn constant_and_single_mode_blocks() {
        let g = Grid::new(32, 1.0).unwrap();
        let bank = DyadicFilterBank::new(g).unwrap();
        let d = decompose(&ScalarField::constant(g, 2.0), &bank).unwrap();
        assert!(d.blocks[1..].iter().all(|b| b.max_abs_coeff() == 0.0));
        // cos 4x₁ with exact coefficients
        let mut f = ScalarField::zeros(g);
        for m in [4, -4] {
            f.coeffs_mut()[[g.index_of(m).unwrap(), 0]] = 0.5.into();
        }
        let d = decompose(&f, &bank).unwrap();
        let nonzero: Vec<i32> = (-1..=bank.j_max()).filter(|&j| d.block(j).max_abs_coeff() > 0.0).collect();
        assert_eq!(nonzero, vec![1]);
        assert!(matches!(
            bernstein_check(&f, &bank, 2),
            Err(Error::UndefinedRatio { shell: 2 })
        ));
        assert!((bernstein_check(&f, &bank, 1).unwrap().ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_phi_commutes() {
        let g = Grid::new(32, 1.0).unwrap();
        let psi = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * y.cos());
        let c = ScalarField::constant(g, 1.7);
        let bank = DyadicFilterBank::new(g).unwrap();
        for j in -1..=bank.j_max() {
            assert_eq!(commutator(&c, &psi, &bank, j).unwrap().max_abs_coeff(), 0.0);
        }
        let r = commutator_scaling_report(&c, &psi, 0.5, 0.25).unwrap();
        assert_eq!((r.sum, r.c_emp), (0.0, 0.0));
    }

    #[test]
    fn sobolev_norm_of_cosine() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, _| x.cos());
        assert!((sobolev_norm(&f, 1.0).unwrap() - 2f64.sqrt() * f.l2_norm()).abs() < 1e-13);
        assert!(sobolev_norm(&f, 9.0).is_err());
    }
}
