//! How the design changes as the welfare floor rises above the fixed-trial
//! benchmark.
//!
//!     cargo run --release --example welfare_sweep

use trialstop::calibrate::{sweep, SweepKind};
use trialstop::scenario::Scenario;

fn main() -> trialstop::Result<()> {
    let mut s = Scenario::builtin("baseline-2025")?;
    s.sim.paths = 50_000;
    s.calibration.search_paths = 20_000;
    s.calibration.final_paths = 20_000;
    s.calibration.tol_w = Some(1e-3 * s.rct_welfare()?);

    let rows = sweep(SweepKind::V0Multiple, &[0.9, 1.0, 1.01, 1.02, 1.03], &s)?;
    println!(
        "{:>6} {:>9} {:>8} {:>8} {:>9}",
        "V0/V0*", "lambda*", "E[tau]", "median", "welfare"
    );
    for r in &rows {
        println!(
            "{:>6} {:>9.3} {:>8.3} {:>8.3} {:>9.4}",
            r.value, r.lambda_star, r.mean_tau, r.median_tau, r.welfare
        );
    }
    Ok(())
}
