//! Run the calibrated design on Bernoulli outcomes and watch finite-sample
//! welfare approach the limit as `n` grows.
//!
//!     cargo run --release --example bernoulli_convergence

use trialstop::bernoulli::{limit_reference, run_trial, welfare_convergence, TrialConfig};
use trialstop::calibrate::calibrate_scenario;
use trialstop::scenario::Scenario;

fn main() -> trialstop::Result<()> {
    let mut s = Scenario::builtin("baseline-2025")?;
    s.calibration.search_paths = 50_000;
    s.calibration.final_paths = 50_000;
    s.calibration.tol_w = Some(1e-3 * s.v0_target()?);
    let cal = calibrate_scenario(&s)?;
    let b = &s.bernoulli;

    let mut cfg = TrialConfig::for_solution(&cal.sol, 300, b.theta0, b.xi_sigma, b.seed);
    cfg.record_path = true;
    let one = run_trial(&cal.sol, &s.prior, &cfg)?;
    println!(
        "one trial at n = 300: {} observations ({} treated), m = {:.3}, {:?}",
        one.tau_index, one.q1_count, one.m_tau, one.decision
    );

    let reference = limit_reference(cal.v0, &cal.sol, &s.prior, &s.util, &s.cost, &s.sim_config(), cfg.xi)?;
    let rows = welfare_convergence(&cal.sol, &s.prior, &s.util, &s.cost, &cfg, &b.n_list, 4000, reference)?;
    println!(
        "{:>5} {:>16} {:>16} {:>8}",
        "n", "regulator/V0", "sponsor/limit", "clamped"
    );
    for r in rows {
        println!(
            "{:>5} {:>8.4} ± {:.4} {:>8.4} ± {:.4} {:>8}",
            r.n, r.alice_ratio, r.alice_ratio_stderr, r.bob_ratio, r.bob_ratio_stderr, r.clamped
        );
    }
    Ok(())
}
