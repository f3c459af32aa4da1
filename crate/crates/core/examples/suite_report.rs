//! Runs a packaged suite with overrides and prints its report.
//!
//! ```text
//! cargo run --release --example suite_report -- twin_stability twin_stability.n=32
//! ```

use boussinesq::experiments::{run_suite, SuiteConfig, SuiteName, SuiteResult};

pub fn run_example(name: SuiteName, overrides: &[String]) -> boussinesq::Result<SuiteResult> {
    let cfg = SuiteConfig::resolve(overrides)?;
    let result = run_suite(name, &cfg, None)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(result)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    let mut args = std::env::args().skip(1);
    let name: SuiteName = args.next().as_deref().unwrap_or("taylor_green").parse()?;
    let overrides: Vec<String> = args.collect();
    run_example(name, &overrides).map(|_| ())
}
