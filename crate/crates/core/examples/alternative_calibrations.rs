//! The two polar cases: a sponsor paid only by approval, and one paid only
//! through the treatment effect.
//!
//!     cargo run --release --example alternative_calibrations

use trialstop::calibrate::calibrate_scenario;
use trialstop::scenario::Scenario;
use trialstop::simulator::simulate;

fn main() -> trialstop::Result<()> {
    for name in ["approval-only", "welfare-only"] {
        let mut s = Scenario::builtin(name)?;
        s.calibration.search_paths = 50_000;
        s.calibration.final_paths = 50_000;
        s.calibration.tol_w = Some(1e-3 * s.v0_target()?);
        let cal = calibrate_scenario(&s)?;
        let sim = simulate(&cal.sol, &s.prior, &s.util, &s.cost, &s.sim_config())?;
        let asym = cal
            .sol
            .b_plus
            .iter()
            .zip(&cal.sol.b_minus)
            .map(|(p, m)| (p + m).abs())
            .fold(0.0, f64::max);
        println!("{name}: c = {:.4}, lambda* = {:.3}", s.cost.c, cal.lambda_star);
        println!(
            "  E[tau] = {:.3}, median = {:.3}, P(tau < 1) = {:.3}",
            sim.mean_tau,
            sim.median_tau,
            sim.frac_before(1.0).unwrap_or(f64::NAN)
        );
        println!(
            "  max |b+ + b-| = {:.4} ({} grid cells)",
            asym,
            (asym / cal.sol.grid.delta_m).round()
        );
    }
    Ok(())
}
