//! Calibrate the multiplier so the design matches a fixed-horizon trial's
//! welfare, then simulate it and compare sample sizes.
//!
//!     cargo run --release --example calibrate_baseline

use trialstop::calibrate::calibrate_scenario;
use trialstop::scenario::Scenario;
use trialstop::simulator::{rct_compare, simulate};

fn main() -> trialstop::Result<()> {
    let mut s = Scenario::builtin("baseline-2025")?;
    s.calibration.search_paths = 50_000;
    s.calibration.final_paths = 50_000;
    s.calibration.tol_w = Some(1e-3 * s.v0_target()?);

    let cal = calibrate_scenario(&s)?;
    println!(
        "V0 = {:.4}: lambda* = {:.4} (lattice {:.4}), welfare {:.4} ± {:.4}",
        cal.v0,
        cal.lambda_star,
        cal.lattice_lambda.unwrap_or(f64::NAN),
        cal.achieved_welfare,
        cal.welfare_stderr
    );
    for (i, (lo, hi)) in cal.bracket_history.iter().enumerate() {
        println!("  step {i:>2}: [{lo:.4}, {hi:.4}]");
    }

    let sim = simulate(&cal.sol, &s.prior, &s.util, &s.cost, &s.sim_config())?;
    let rct = rct_compare(&sim, &s.prior, &s.util, &s.cost)?;
    println!("E[tau] = {:.4}, median {:.4}", sim.mean_tau, sim.median_tau);
    for f in &sim.frac_stop_before {
        println!("  P(tau < {}) = {:.3}", f.t, f.fraction);
    }
    println!(
        "{:.1}% fewer observations than the fixed trial, saving ${:.2}M",
        100.0 * rct.sample_reduction,
        rct.savings.unwrap_or(0.0) / 1e6
    );
    Ok(())
}
