//! Temperature-dependent diffusion laws and the primitive transform `η = A(θ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{PhysicalField, ScalarField};

/// Law parameters as they appear in run configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Constant {
        value: f64,
    },
    /// `base + slope·z`, smoothly clamped into `[lo, hi]`.
    AffineClamped {
        base: f64,
        slope: f64,
        lo: f64,
        hi: f64,
    },
    /// `(lo+hi)/2 + (hi−lo)/2 · tanh((z − center)/width)`.
    TanhSmooth {
        lo: f64,
        hi: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// `c1·exp(c2/(c3 + z))`, smoothly clamped into `[lo, hi]`; the pole at
    /// `z = −c3` is cut off where the law saturates at `hi`.
    ExpClamped {
        c1: f64,
        c2: f64,
        c3: f64,
        lo: f64,
        hi: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// C² ramp: `0` below `−m`, identity above `m`, quartic blend in between.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SoftPlus {
    m: f64,
}

impl SoftPlus {
    fn value(&self, x: f64) -> f64 {
        let m = self.m;
        if x <= -m {
            0.0
        } else if x >= m {
            x
        } else {
            let t = (x + m) / (2.0 * m);
            2.0 * m * (t * t * t - 0.5 * t * t * t * t)
        }
    }

    fn d1(&self, x: f64) -> f64 {
        let m = self.m;
        if x <= -m {
            0.0
        } else if x >= m {
            1.0
        } else {
            let t = (x + m) / (2.0 * m);
            3.0 * t * t - 2.0 * t * t * t
        }
    }

    fn d2(&self, x: f64) -> f64 {
        let m = self.m;
        if x <= -m || x >= m {
            0.0
        } else {
            let t = (x + m) / (2.0 * m);
            (6.0 * t - 6.0 * t * t) / (2.0 * m)
        }
    }

    fn d2_max(&self) -> f64 {
        0.75 / self.m
    }
}

/// Smooth clamp of `r` into `[lo, hi]`, returning value and the first two
/// derivatives with respect to `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SmoothClamp {
    lo: f64,
    hi: f64,
    ramp: SoftPlus,
}

impl SmoothClamp {
    fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            ramp: SoftPlus {
                m: 0.05 * (hi - lo),
            },
        }
    }

    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let c = &self.ramp;
        let x = r - self.lo;
        let g = self.lo + c.value(x);
        let g1 = c.d1(x);
        let g2 = c.d2(x);
        let y = self.hi - g;
        let v = self.hi - c.value(y);
        let v1 = c.d1(y) * g1;
        let v2 = -c.d2(y) * g1 * g1 + c.d1(y) * g2;
        (v, v1, v2)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Constant(f64),
    Affine {
        base: f64,
        slope: f64,
        clamp: SmoothClamp,
    },
    Tanh {
        mid: f64,
        half: f64,
        center: f64,
        width: f64,
    },
    Exp {
        c1: f64,
        c2: f64,
        c3: f64,
        /// below this point the law equals `hi`
        z_sat: f64,
        clamp: SmoothClamp,
    },
}

/// A law `z ↦ a(z)` with certified bounds and smoothness constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientLaw {
    spec: LawSpec,
    kind: Kind,
    lower: f64,
    upper: f64,
    lipschitz: f64,
    c2: Option<f64>,
}

/// Summary echoed into run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSummary {
    pub spec: LawSpec,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub lipschitz_constant: f64,
    pub c2_bound: Option<f64>,
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Validation("law bounds must be finite".into()));
    }
    if lo <= 0.0 {
        return Err(Error::Validation(format!(
            "law lower bound must be positive, got {lo}"
        )));
    }
    if hi <= lo {
        return Err(Error::Validation(format!(
            "law upper bound {hi} must exceed lower bound {lo}"
        )));
    }
    Ok(())
}

pub fn builtin_law(spec: &LawSpec) -> Result<CoefficientLaw> {
    let law = match *spec {
        LawSpec::Constant { value } => {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Validation(format!(
                    "constant law must be positive, got {value}"
                )));
            }
            CoefficientLaw {
                spec: spec.clone(),
                kind: Kind::Constant(value),
                lower: value,
                upper: value,
                lipschitz: 0.0,
                c2: Some(0.0),
            }
        }
        LawSpec::AffineClamped { base, slope, lo, hi } => {
            check_interval(lo, hi)?;
            if !(base.is_finite() && slope.is_finite()) {
                return Err(Error::Validation("affine law parameters must be finite".into()));
            }
            let clamp = SmoothClamp::new(lo, hi);
            if slope == 0.0 {
                let v = clamp.eval(base).0;
                CoefficientLaw {
                    spec: spec.clone(),
                    kind: Kind::Constant(v),
                    lower: v,
                    upper: v,
                    lipschitz: 0.0,
                    c2: Some(0.0),
                }
            } else {
                CoefficientLaw {
                    spec: spec.clone(),
                    kind: Kind::Affine { base, slope, clamp },
                    lower: lo,
                    upper: hi,
                    lipschitz: slope.abs(),
                    c2: Some(slope * slope * clamp.ramp.d2_max()),
                }
            }
        }
        LawSpec::TanhSmooth {
            lo,
            hi,
            center,
            width,
        } => {
            check_interval(lo, hi)?;
            if !(width.is_finite() && width > 0.0 && center.is_finite()) {
                return Err(Error::Validation(format!(
                    "tanh law needs a positive width, got {width}"
                )));
            }
            let half = 0.5 * (hi - lo);
            CoefficientLaw {
                spec: spec.clone(),
                kind: Kind::Tanh {
                    mid: 0.5 * (lo + hi),
                    half,
                    center,
                    width,
                },
                lower: lo,
                upper: hi,
                lipschitz: half / width,
                // max |tanh''| = 4/(3√3)
                c2: Some(half / (width * width) * 4.0 / (3.0 * 3f64.sqrt())),
            }
        }
        LawSpec::ExpClamped { c1, c2, c3, lo, hi } => {
            check_interval(lo, hi)?;
            if !(c1 > 0.0 && c2 > 0.0 && c3.is_finite()) {
                return Err(Error::Validation(
                    "exponential law needs c1 > 0 and c2 > 0".into(),
                ));
            }
            let clamp = SmoothClamp::new(lo, hi);
            let top = hi + clamp.ramp.m;
            if c1 >= top {
                return Err(Error::Validation(format!(
                    "exponential law: c1 = {c1} lies above the clamp range"
                )));
            }
            let z_sat = c2 / (top / c1).ln() - c3;
            let mut law = CoefficientLaw {
                spec: spec.clone(),
                kind: Kind::Exp {
                    c1,
                    c2,
                    c3,
                    z_sat,
                    clamp,
                },
                lower: clamp.eval(c1).0,
                upper: hi,
                lipschitz: 0.0,
                c2: None,
            };
            if law.lower <= 0.0 {
                return Err(Error::Validation("exponential law lower bound is not positive".into()));
            }
            // derivatives vanish for z ≤ z_sat and decay like z⁻² at infinity
            let (mut l1, mut l2) = (0.0f64, 0.0f64);
            let samples = 400_000;
            let span = 400.0 + z_sat.abs();
            for i in 0..=samples {
                let z = z_sat + span * (i as f64 / samples as f64).powi(2);
                l1 = l1.max(law.derivative(z).abs());
                l2 = l2.max(law.second_derivative(z).abs());
            }
            law.lipschitz = l1 * (1.0 + 1e-3);
            law.c2 = Some(l2 * (1.0 + 1e-3));
            law
        }
    };
    Ok(law)
}

impl CoefficientLaw {
    pub fn constant(value: f64) -> Result<Self> {
        builtin_law(&LawSpec::Constant { value })
    }

    pub fn spec(&self) -> &LawSpec {
        &self.spec
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    pub fn c2_bound(&self) -> Option<f64> {
        self.c2
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant(_))
    }

    pub fn summary(&self) -> LawSummary {
        LawSummary {
            spec: self.spec.clone(),
            lower_bound: self.lower,
            upper_bound: self.upper,
            lipschitz_constant: self.lipschitz,
            c2_bound: self.c2,
        }
    }

    fn jet(&self, z: f64) -> (f64, f64, f64) {
        match self.kind {
            Kind::Constant(v) => (v, 0.0, 0.0),
            Kind::Affine { base, slope, clamp } => {
                let (v, d1, d2) = clamp.eval(base + slope * z);
                (v, d1 * slope, d2 * slope * slope)
            }
            Kind::Tanh {
                mid,
                half,
                center,
                width,
            } => {
                let th = ((z - center) / width).tanh();
                let sech2 = 1.0 - th * th;
                (
                    mid + half * th,
                    half * sech2 / width,
                    -2.0 * half * th * sech2 / (width * width),
                )
            }
            Kind::Exp {
                c1,
                c2,
                c3,
                z_sat,
                clamp,
            } => {
                if z.is_nan() {
                    return (f64::NAN, f64::NAN, f64::NAN);
                }
                if z <= z_sat {
                    return (clamp.hi, 0.0, 0.0);
                }
                let s = c3 + z;
                let r = c1 * (c2 / s).exp();
                let r1 = -r * c2 / (s * s);
                let r2 = r * (c2 * c2 / s.powi(4) + 2.0 * c2 / s.powi(3));
                let (v, d1, d2) = clamp.eval(r);
                (v, d1 * r1, d2 * r1 * r1 + d1 * r2)
            }
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.jet(z).0
    }

    pub fn derivative(&self, z: f64) -> f64 {
        self.jet(z).1
    }

    pub fn second_derivative(&self, z: f64) -> f64 {
        self.jet(z).2
    }
}

/// `κ = a(θ)` sampled on the padded grid.
pub fn apply_law(law: &CoefficientLaw, theta: &ScalarField) -> Result<PhysicalField> {
    apply_law_physical(law, &PhysicalField::from_spectral(theta))
}

pub fn apply_law_physical(law: &CoefficientLaw, theta: &PhysicalField) -> Result<PhysicalField> {
    if !theta.is_finite() {
        return Err(Error::NumericBlowUp {
            term: "coefficient law argument".into(),
            time: f64::NAN,
        });
    }
    Ok(theta.map(|z| law.eval(z)))
}

// Gauss–Kronrod 7/15 nodes and weights on [−1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    rec(f, a, b, tol, 30)
}

const QUAD_TOL: f64 = 1e-13;

/// `A(z) = ∫₀^z a` with a cached table of node values and a safeguarded
/// Newton inverse.
#[derive(Debug, Clone)]
pub struct PrimitiveTransform {
    law: CoefficientLaw,
    range: f64,
    step: f64,
    /// `A` at `−range + i·step`
    table: Vec<f64>,
}

impl PrimitiveTransform {
    pub fn new(law: CoefficientLaw) -> Self {
        Self::with_range(law, 60.0)
    }

    /// Tabulates `A` on `[−range, range]`, which is also the domain of `A⁻¹`.
    pub fn with_range(law: CoefficientLaw, range: f64) -> Self {
        let step = 1.0 / 32.0;
        let cells = (2.0 * range / step).round() as usize;
        let range = 0.5 * cells as f64 * step;
        let mut table = vec![0.0; cells + 1];
        if !law.is_constant() {
            let f = |z: f64| law.eval(z);
            let mid = cells / 2;
            for i in mid..cells {
                let a = -range + i as f64 * step;
                table[i + 1] = table[i] + integrate(&f, a, a + step, QUAD_TOL * step);
            }
            for i in (0..mid).rev() {
                let a = -range + i as f64 * step;
                table[i] = table[i + 1] - integrate(&f, a, a + step, QUAD_TOL * step);
            }
        }
        Self {
            law,
            range,
            step,
            table,
        }
    }

    pub fn law(&self) -> &CoefficientLaw {
        &self.law
    }

    /// Range `[A(−R), A(R)]` on which the inverse is defined.
    pub fn image(&self) -> (f64, f64) {
        (self.forward(-self.range), self.forward(self.range))
    }

    pub fn forward(&self, z: f64) -> f64 {
        if let Kind::Constant(v) = self.law.kind {
            return v * z;
        }
        if z.is_nan() {
            return f64::NAN;
        }
        let f = |x: f64| self.law.eval(x);
        let r = self.range;
        if z >= r {
            return self.table[self.table.len() - 1] + integrate(&f, r, z, QUAD_TOL * (1.0 + z - r));
        }
        if z <= -r {
            return self.table[0] - integrate(&f, z, -r, QUAD_TOL * (1.0 + -r - z));
        }
        let pos = (z + r) / self.step;
        let i = (pos.round() as usize).min(self.table.len() - 1);
        let node = -r + i as f64 * self.step;
        self.table[i] + integrate(&f, node, z, QUAD_TOL * self.step)
    }

    pub fn inverse(&self, w: f64) -> Result<f64> {
        let (lo, hi) = self.image();
        if !(w >= lo && w <= hi) {
            return Err(Error::Domain {
                value: w,
                min: lo,
                max: hi,
            });
        }
        let (k_lo, k_hi) = (self.law.lower_bound(), self.law.upper_bound());
        if let Kind::Constant(v) = self.law.kind {
            return Ok(w / v);
        }
        let (mut a, mut b) = if w >= 0.0 {
            (w / k_hi, w / k_lo)
        } else {
            (w / k_lo, w / k_hi)
        };
        let mut z = 0.5 * (a + b);
        for _ in 0..100 {
            let g = self.forward(z) - w;
            if g == 0.0 {
                return Ok(z);
            }
            if g > 0.0 {
                b = z;
            } else {
                a = z;
            }
            let newton = z - g / self.law.eval(z);
            let next = if newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if (next - z).abs() <= 1e-15 * (1.0 + z.abs()) || b - a <= 1e-15 * (1.0 + z.abs()) {
                return Ok(next);
            }
            z = next;
        }
        Ok(z)
    }
}

/// `η = A(θ)` sampled on the padded grid.
pub fn eta_forward(pt: &PrimitiveTransform, theta: &ScalarField) -> Result<PhysicalField> {
    let t = PhysicalField::from_spectral(theta);
    if !t.is_finite() {
        return Err(Error::NumericBlowUp {
            term: "eta argument".into(),
            time: f64::NAN,
        });
    }
    Ok(t.map(|z| pt.forward(z)))
}

/// Recovers `θ` from padded samples of `η`.
pub fn eta_backward(pt: &PrimitiveTransform, eta: &PhysicalField) -> Result<ScalarField> {
    Ok(eta.try_map(|w| pt.inverse(w))?.to_spectral())
}

/// `∇η = a(θ)∇θ` on the padded grid.
pub fn eta_gradient(law: &CoefficientLaw, theta: &ScalarField) -> Result<[PhysicalField; 2]> {
    let kappa = apply_law(law, theta)?;
    let g = crate::spectral::gradient(theta);
    Ok([
        &kappa * &PhysicalField::from_spectral(g.component(0)),
        &kappa * &PhysicalField::from_spectral(g.component(1)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tanh12() -> CoefficientLaw {
        builtin_law(&LawSpec::TanhSmooth {
            lo: 1.0,
            hi: 2.0,
            center: 0.0,
            width: 1.0,
        })
        .unwrap()
    }

    pub(crate) fn exp_law() -> CoefficientLaw {
        builtin_law(&LawSpec::ExpClamped {
            c1: 0.4,
            c2: 1.0,
            c3: 2.0,
            lo: 0.5,
            hi: 1.5,
        })
        .unwrap()
    }

    #[test]
    fn tanh_closed_form() {
        let a = tanh12();
        assert_eq!(a.eval(0.0), 1.5);
        assert!((a.lipschitz_constant() - 0.5).abs() < 1e-15);
        assert!((a.eval(1.0) - (1.5 + 0.5 * 1f64.tanh())).abs() < 1e-15);
    }

    #[test]
    fn flat_affine_is_constant() {
        let a = builtin_law(&LawSpec::AffineClamped {
            base: 1.2,
            slope: 0.0,
            lo: 0.5,
            hi: 2.0,
        })
        .unwrap();
        assert!(a.is_constant());
        assert_eq!(a.lipschitz_constant(), 0.0);
        assert_eq!(a.eval(-40.0), 1.2);
    }

    #[test]
    fn rejects_nonpositive_bounds() {
        assert!(builtin_law(&LawSpec::Constant { value: 0.0 }).is_err());
        assert!(builtin_law(&LawSpec::TanhSmooth {
            lo: -1.0,
            hi: 2.0,
            center: 0.0,
            width: 1.0
        })
        .is_err());
    }

    #[test]
    fn exp_law_matches_raw_formula_inside_band() {
        let a = exp_law();
        // r = 0.4·e^{1/(2+z)} ∈ (0.6, 1.4) here, away from both blends
        for z in [0.0f64, 0.5, 1.0, 2.0] {
            let r: f64 = 0.4 * (1.0 / (2.0 + z)).exp();
            if r > 0.6 && r < 1.4 {
                assert!((a.eval(z) - r).abs() < 1e-15);
            }
        }
        assert_eq!(a.eval(-1.99), 1.5);
        assert_eq!(a.eval(-10.0), 1.5);
        assert_eq!(a.lower_bound(), 0.5);
    }

    #[test]
    fn primitive_of_constant_is_linear() {
        let pt = PrimitiveTransform::new(CoefficientLaw::constant(2.5).unwrap());
        assert_eq!(pt.forward(3.0), 7.5);
        assert_eq!(pt.inverse(7.5).unwrap(), 3.0);
    }

    #[test]
    fn primitive_of_tanh_closed_form() {
        let pt = PrimitiveTransform::new(tanh12());
        for z in [-70.0, -3.3, -0.01, 0.0, 0.2, 1.0, 7.77, 59.99, 65.0] {
            let exact = 1.5 * z + 0.5 * f64::cosh(z).ln();
            assert!((pt.forward(z) - exact).abs() < 1e-11 * (1.0 + exact.abs()), "z = {z}");
        }
    }

    #[test]
    fn inverse_round_trip_and_domain() {
        let pt = PrimitiveTransform::new(exp_law());
        for i in -400..=400 {
            let z = i as f64 * 0.137;
            let back = pt.inverse(pt.forward(z)).unwrap();
            assert!((back - z).abs() < 1e-10, "z = {z}");
        }
        let (_, hi) = pt.image();
        assert!(matches!(pt.inverse(hi + 1.0), Err(Error::Domain { .. })));
    }
}
