//! Every example builds against the public API; the cheap ones run here on
//! reduced sizes.

#[allow(dead_code)]
#[path = "../examples/coefficient_laws.rs"]
mod coefficient_laws;
#[allow(dead_code)]
#[path = "../examples/commutator_scaling.rs"]
mod commutator_scaling;
#[allow(dead_code)]
#[path = "../examples/config_run.rs"]
mod config_run;
#[allow(dead_code)]
#[path = "../examples/energy_audit.rs"]
mod energy_audit;
#[allow(dead_code)]
#[path = "../examples/interpolation.rs"]
mod interpolation;
#[allow(dead_code)]
#[path = "../examples/littlewood_paley.rs"]
mod littlewood_paley;
#[allow(dead_code)]
#[path = "../examples/parabolic_mms.rs"]
mod parabolic_mms;
#[allow(dead_code)]
#[path = "../examples/pressure_recovery.rs"]
mod pressure_recovery;
#[allow(dead_code)]
#[path = "../examples/regularity_sweep.rs"]
mod regularity_sweep;
#[allow(dead_code)]
#[path = "../examples/snapshot_io.rs"]
mod snapshot_io;
#[allow(dead_code)]
#[path = "../examples/suite_report.rs"]
mod suite_report;
#[allow(dead_code)]
#[path = "../examples/taylor_green.rs"]
mod taylor_green;
#[allow(dead_code)]
#[path = "../examples/twin_stability.rs"]
mod twin_stability;

use boussinesq::experiments::SuiteName;

#[test]
fn coefficient_laws_round_trip() {
    assert!(coefficient_laws::run_example().unwrap() < 1e-12);
}

#[test]
fn pressure_gradient_carries_the_divergence() {
    let (div, size) = pressure_recovery::run_example().unwrap();
    assert!(size > 1.0);
    assert!(div < 1e-12 * size);
}

#[test]
fn snapshot_samples_survive_disk() {
    assert!(snapshot_io::run_example().unwrap());
}

#[test]
fn configured_run_verifies() {
    assert!(config_run::run_example().unwrap());
}

#[test]
fn interpolation_constant_is_bounded() {
    let c = interpolation::run_example().unwrap();
    assert!(c > (3.0 / (8.0 * std::f64::consts::PI.powi(2))).sqrt() * 0.5 && c < 1.0);
}

#[test]
fn taylor_green_matches_decay() {
    assert!(taylor_green::run_example().unwrap() < 1e-6);
}

#[test]
fn small_examples_run() {
    assert!(parabolic_mms::mms_error(16, 1e-2).unwrap() < 1e-2);
    assert!(littlewood_paley::reconstruction_error(32, 3).unwrap() < 1e-12);
    let (lo, hi, bad) = littlewood_paley::bernstein_scan(32, 20).unwrap();
    assert_eq!(bad, 0);
    assert!(lo >= 0.75 && hi <= 8.0 / 3.0);
    let (a, b) = commutator_scaling::doubling(32, 0.5, 0.25, 1).unwrap();
    assert!((b / a - 1.0).abs() < 0.25);
    let r = suite_report::run_example(SuiteName::TaylorGreen, &["taylor_green.n=16".into()]).unwrap();
    assert!(r.pass);
}

#[test]
fn heavy_examples_link() {
    let _: fn() -> boussinesq::Result<(f64, f64)> = || energy_audit::residuals(1e-3);
    let _ = regularity_sweep::run_example;
    let _ = twin_stability::run_example;
    let _ = littlewood_paley::run_example;
    let _ = commutator_scaling::run_example;
}
