//! Energy ledgers, residuals and inequality monitors.

pub mod estimates;
pub mod ledger;
pub mod sweep;
pub mod twin;

pub use estimates::{
    check_apriori_bounds, check_ledger_bounds, energy_residual_theta, energy_residual_u,
    eta_equivalence_checks, eta_roundtrip_error, gagliardo_nirenberg_check, max_principle_probe,
    BoundsContext, EstimateReport, OvershootReport,
};
pub use ledger::{residual_theta_series, residual_u_series, EnergyLedger, LedgerRow};
pub use twin::{
    gronwall_weight, twin_distance, twin_run, twin_run_stability, twin_stability_study, PerturbTarget,
    TwinReport, TwinStudy, TWIN_SLACK,
};
pub use sweep::{is_admissible, regularity_sweep, sweep_point, SweepConfig, SweepPoint, SweepReport, QUADRANGLE_POINTS};
