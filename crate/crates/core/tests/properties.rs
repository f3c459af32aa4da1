//! Structural invariants over random inputs.

use proptest::prelude::*;

use boussinesq::experiments::initial::{random_hs_scalar, random_hs_velocity};
use boussinesq::laws::{builtin_law, LawSpec, PrimitiveTransform};
use boussinesq::lp::{decompose, DyadicFilterBank};
use boussinesq::spectral::{
    divergence, gradient, leray_project, truncate, CutoffIndex, Grid, PhysicalField, ScalarField,
};

fn grid() -> Grid {
    Grid::new(32, 1.0).unwrap()
}

fn law_spec() -> impl Strategy<Value = LawSpec> {
    (0.1f64..2.0, 1.05f64..4.0, -2.0f64..2.0, 0.2f64..2.0).prop_flat_map(|(lo, ratio, c, w)| {
        let hi = lo * ratio;
        prop_oneof![
            Just(LawSpec::Constant { value: lo }),
            Just(LawSpec::AffineClamped { base: 0.5 * (lo + hi), slope: w, lo, hi }),
            Just(LawSpec::TanhSmooth { lo, hi, center: c, width: w }),
            Just(LawSpec::ExpClamped { c1: 0.5 * (lo + hi), c2: w, c3: 3.0 + c.abs(), lo, hi }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(seed in any::<u64>(), s in -1.0f64..3.0) {
        let f = random_hs_scalar(grid(), s, 1.0, seed, 0);
        let phys = f.l2_norm_physical();
        prop_assert!((phys - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn projector_is_an_orthogonal_idempotent(seed in any::<u64>(), s in -0.5f64..2.0) {
        let a = random_hs_scalar(grid(), s, 1.0, seed, 0);
        let b = random_hs_scalar(grid(), s, 1.0, seed, 1);
        let v = boussinesq::spectral::VectorField::new(a, b).unwrap();
        let p = leray_project(&v);
        let pp = leray_project(&p);
        prop_assert!(pp.axpy(-1.0, &p).max_abs_coeff() <= 1e-15);
        let rest = v.axpy(-1.0, &p);
        prop_assert!(p.inner(&rest).abs() <= 1e-13 * v.l2_norm_sq());
        prop_assert!(divergence(&p).max_abs_coeff() <= 1e-13);
        prop_assert!(p.l2_norm() <= v.l2_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn random_velocity_is_solenoidal(seed in any::<u64>(), s in -0.5f64..2.0) {
        let u = random_hs_velocity(grid(), s, 1.0, seed, 1);
        prop_assert!(divergence(&u).max_abs_coeff() <= 1e-13);
        prop_assert!((u.sobolev_norm(s) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn truncation_contracts(seed in any::<u64>(), radius in 1.0f64..16.0) {
        let g = grid();
        let f = random_hs_scalar(g, 0.0, 1.0, seed, 0);
        let cut = CutoffIndex::new(radius, &g).unwrap();
        let t = truncate(&f, cut);
        prop_assert!(t.l2_norm() <= f.l2_norm());
        prop_assert_eq!(truncate(&t, cut), t.clone());
        prop_assert!((t.l2_norm_sq() + (&f - &t).l2_norm_sq() - f.l2_norm_sq()).abs() <= 1e-14);
    }

    #[test]
    fn laws_respect_their_bounds(spec in law_spec(), z in -50.0f64..50.0) {
        let law = builtin_law(&spec).unwrap();
        let a = law.eval(z);
        prop_assert!(a >= law.lower_bound() * (1.0 - 1e-12));
        prop_assert!(a <= law.upper_bound() * (1.0 + 1e-12));
        let h = 1e-5;
        let slope = (law.eval(z + h) - law.eval(z - h)) / (2.0 * h);
        prop_assert!(slope.abs() <= law.lipschitz_constant() * (1.0 + 1e-6) + 1e-9);
    }

    #[test]
    fn primitive_transform_inverts(spec in law_spec(), z in -20.0f64..20.0) {
        let law = builtin_law(&spec).unwrap();
        let (lo, hi) = (law.lower_bound(), law.upper_bound());
        let pt = PrimitiveTransform::new(law);
        let w = pt.forward(z);
        prop_assert!((pt.inverse(w).unwrap() - z).abs() <= 1e-9 * (1.0 + z.abs()));
        // A is bi-Lipschitz with the law's bounds
        let d = pt.forward(z + 0.5) - w;
        prop_assert!(d >= 0.5 * lo * (1.0 - 1e-9) && d <= 0.5 * hi * (1.0 + 1e-9));
    }

    #[test]
    fn interpolation_inequality(seed in any::<u64>(), s in 0.3f64..3.0) {
        // ‖f‖²_{L⁴} ≤ ‖f‖‖∇f‖ for mean-free f, with room to spare
        let f = random_hs_scalar(grid(), s, 1.0, seed, 0);
        let l4 = PhysicalField::from_spectral(&f).l4_norm();
        prop_assert!(l4 * l4 <= f.l2_norm() * gradient(&f).l2_norm());
    }

    #[test]
    fn dyadic_blocks_reconstruct_and_nearly_orthogonal(seed in any::<u64>(), s in -1.0f64..2.5) {
        let g = grid();
        let f = random_hs_scalar(g, s, 1.0, seed, 0);
        let bank = DyadicFilterBank::new(g).unwrap();
        let d = decompose(&f, &bank).unwrap();
        prop_assert!((&d.reconstruct() - &f).l2_norm() <= 1e-13 * f.l2_norm());
        let jm = bank.j_max();
        for j in -1..=jm {
            for k in (j + 2)..=jm {
                prop_assert!(d.block(j).inner(d.block(k)).abs() <= 1e-15 * f.l2_norm_sq());
            }
        }
        // the squared multipliers sum to between ½ and 1
        let e: f64 = d.shell_energies().iter().sum::<f64>() + d.remainder.l2_norm_sq();
        prop_assert!(e <= f.l2_norm_sq() * (1.0 + 1e-12));
        prop_assert!(e >= 0.5 * f.l2_norm_sq() * (1.0 - 1e-12));
    }
}

#[test]
fn constant_field_is_one_block() {
    let g = grid();
    let c = ScalarField::constant(g, 3.0);
    let d = decompose(&c, &DyadicFilterBank::new(g).unwrap()).unwrap();
    assert_eq!(d.block(-1), &c);
}
