use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use boussinesq::diagnostics::{regularity_sweep, SweepConfig, QUADRANGLE_POINTS};
use boussinesq::experiments::config::override_value;
use boussinesq::experiments::{
    analyze_snapshot, commutator_doubling, execute_run, run_suite, verify_run, RunConfig, SuiteConfig, SuiteName,
};
use boussinesq::{Error, Result};

/// Spectral solver and diagnostics for Boussinesq flows with
/// temperature-dependent diffusivity and viscosity.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Worker threads (default: BOUSSINESQ_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Dotted-path override, e.g. `stepper.dt=1e-3`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check a run directory against the a priori bounds; writes report.json.
    Verify {
        run_dir: PathBuf,
    },
    /// Sobolev norms and dyadic shell energies of a snapshot, as JSON.
    Analyze {
        #[arg(long)]
        field: PathBuf,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        norms: Vec<f64>,
    },
    /// Commutator scaling table under resolution doubling, as CSV.
    LpReport {
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Comma-separated `s:nu` pairs.
        #[arg(long, value_delimiter = ',', default_value = "0.5:0.25,1.2:0.5,1.5:0.75")]
        pairs: Vec<String>,
        #[arg(long, default_value_t = 4)]
        seeds: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup-in-time Sobolev norms over exponent pairs, as CSV.
    Sweep {
        /// Comma-separated `s_theta:s_u` pairs (default: the admissible quadrangle points).
        #[arg(long, value_delimiter = ',')]
        grid: Vec<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Run a packaged experiment suite.
    Suite {
        /// taylor_green, mms_parabolic, energy_audit, lp_scaling, regularity_sweep or twin_stability
        name: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn pair(item: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("`{item}` is not of the form a:b"));
    let (a, b) = item.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    let env = std::env::var("BOUSSINESQ_THREADS").ok();
    let n = match (threads, env) {
        (Some(n), _) => Some(n),
        (None, Some(v)) => Some(
            v.parse()
                .map_err(|_| Error::Config(format!("BOUSSINESQ_THREADS must be a count, got `{v}`")))?,
        ),
        (None, None) => None,
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = RunConfig::load(&config, &overrides)?;
            let out = execute_run(&cfg)?;
            eprintln!(
                "{} steps, {} snapshots written to {}",
                out.meta.steps,
                out.meta.snapshots.len(),
                out.dir.display()
            );
            Ok(true)
        }
        Command::Verify { run_dir } => {
            let r = verify_run(&run_dir)?;
            for e in &r.estimates {
                let kind = if e.hard { "hard" } else { "soft" };
                eprintln!("{:<28} {kind} {} (lhs {:.6e}, rhs {:.6e})", e.name, e.pass, e.lhs, e.rhs);
            }
            eprintln!("max overshoot {:.3e}", r.overshoot.max_overshoot);
            Ok(r.pass)
        }
        Command::Analyze { field, norms } => {
            let a = analyze_snapshot(&field, &norms)?;
            println!("{}", serde_json::to_string_pretty(&a)?);
            Ok(true)
        }
        Command::LpReport {
            n,
            pairs,
            seeds,
            seed,
            out,
        } => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for p in &pairs {
                let (s, nu) = pair(p)?;
                for rows in commutator_doubling(n, s, nu, seeds, seed)? {
                    for r in rows {
                        w.serialize(r)?;
                    }
                }
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            write_out(out.as_deref(), &String::from_utf8_lossy(&bytes))?;
            Ok(true)
        }
        Command::Sweep { grid, overrides, out } => {
            let points = if grid.is_empty() {
                QUADRANGLE_POINTS.to_vec()
            } else {
                grid.iter().map(|p| pair(p)).collect::<Result<_>>()?
            };
            let cfg: SweepConfig = override_value(&SweepConfig::default(), &overrides)?;
            let report = regularity_sweep(&points, &cfg)?;
            report.write_csv(&out)?;
            for p in &report.points {
                eprintln!(
                    "({}, {}) admissible {} pass {}{}",
                    p.s_theta,
                    p.s_u,
                    p.admissible,
                    p.pass,
                    p.failure.as_deref().map(|f| format!(": {f}")).unwrap_or_default()
                );
            }
            Ok(report.pass)
        }
        Command::Suite { name, overrides, out } => {
            let name: SuiteName = name.parse()?;
            let cfg = SuiteConfig::resolve(&overrides)?;
            let r = run_suite(name, &cfg, Some(&out))?;
            for c in &r.cases {
                eprintln!(
                    "{:<32} {}{}",
                    c.name,
                    if c.pass { "pass" } else { "FAIL" },
                    c.note.as_deref().map(|n| format!("  {n}")).unwrap_or_default()
                );
            }
            if let Some(f) = &r.first_failure {
                eprintln!("first failure: {f}");
            }
            Ok(r.pass)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 3,
                ref e if e.is_numeric() => 2,
                _ => 1,
            })
        }
    }
}
