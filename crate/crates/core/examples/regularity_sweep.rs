//! Sup-in-time Sobolev norms over points of the admissible exponent set.
//!
//! ```text
//! cargo run --release --example regularity_sweep
//! ```

use std::time::Instant;

use boussinesq::diagnostics::{regularity_sweep, SweepConfig, SweepReport, QUADRANGLE_POINTS};

pub fn run_example() -> boussinesq::Result<SweepReport> {
    let cfg = SweepConfig::default();
    let start = Instant::now();
    let report = regularity_sweep(&QUADRANGLE_POINTS, &cfg)?;
    for p in &report.points {
        println!(
            "(s_θ, s_u) = ({:.1}, {:.1}): sup θ {:.3}/{:.3}, sup u {:.3}/{:.3}, steps {}, pass {}",
            p.s_theta, p.s_u, p.sup_theta_hs, p.initial_theta_hs, p.sup_u_hs, p.initial_u_hs, p.steps, p.pass
        );
    }
    println!("N = {}, {:.1} s, pass = {}", cfg.n, start.elapsed().as_secs_f64(), report.pass);
    Ok(report)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
