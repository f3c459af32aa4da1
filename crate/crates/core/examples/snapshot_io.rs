//! Binary snapshots: write a state, read its physical samples back bit for
//! bit, and report norms and dyadic shell energies as the `analyze` command
//! does.
//!
//! ```text
//! cargo run --release --example snapshot_io
//! ```

use boussinesq::experiments::analyze_snapshot;
use boussinesq::experiments::initial::{random_hs_scalar, random_hs_velocity};
use boussinesq::spectral::{Grid, Snapshot};

pub fn run_example() -> boussinesq::Result<bool> {
    let grid = Grid::new(32, 1.0)?;
    let theta = random_hs_scalar(grid, 1.0, 1.0, 5, 0);
    let u = random_hs_velocity(grid, 0.5, 1.0, 5, 1);
    let path = std::env::temp_dir().join(format!("snapshot_io_{}.fld", std::process::id()));
    let snap = Snapshot::from_state(&theta, &u);
    snap.save(&path)?;

    let back = Snapshot::load(&path)?;
    let same = back == snap;
    let drift = (&back.scalar(0)? - &theta).max_abs_coeff();
    println!("samples identical: {same}, coefficient roundoff after the transform {drift:.1e}");
    for c in analyze_snapshot(&path, &[0.0, 0.5, 1.0])? {
        let shells: Vec<String> = c.shell_energies.iter().map(|e| format!("{e:.2e}")).collect();
        println!("component {}: norms {:?}\n  shells {}", c.component, c.norms, shells.join(" "));
    }
    std::fs::remove_file(&path)?;
    Ok(same)
}

#[allow(dead_code)]
fn main() -> boussinesq::Result<()> {
    run_example().map(|_| ())
}
