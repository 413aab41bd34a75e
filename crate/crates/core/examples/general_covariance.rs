//! Correlated arm priors: sample one arm alone until the posterior variance
//! reaches the switch point, then split observations in proportion to the
//! arm standard deviations.
//!
//!     cargo run --release --example general_covariance

use trialstop::model::{CostSpec, GeneralCovariance, PriorSpec, UtilitySpec};
use trialstop::solver::{find_t_star, solve_boundaries, GridSpec};

fn main() -> trialstop::Result<()> {
    let (s1, s0) = (0.6, 0.4);
    // rows and columns ordered (treatment, control)
    let cov = [[6.0, 1.0], [1.0, 3.0]];
    let prior = PriorSpec::with_covariance(0.0, s1, s0, cov)?;
    let gc = GeneralCovariance::new(s1, s0, &cov)?;
    println!(
        "effect variance {:.4}, first arm {:?} until t = {:.4}",
        gc.varrho0(),
        gc.first_arm,
        gc.t_star()
    );
    for t in [0.0, 0.5 * gc.t_star(), gc.t_star(), 1.0, 2.0] {
        println!(
            "  t = {t:.3}: treatment share {:.2}, posterior variance {:.4}",
            gc.treatment_fraction(t, s1, s0),
            gc.posterior_variance(t)
        );
    }

    let util = UtilitySpec::new(1.0, 1.0, 0.0, 1.0)?;
    let cost = CostSpec::new(0.25)?;
    let grid = GridSpec::for_prior(prior.varrho0)?;
    let sol = solve_boundaries(&prior, &util, 2.0, &cost, &grid, false)?;
    for t in [0.0, gc.t_star(), 1.0] {
        let (lo, hi) = sol.at_t(t)?;
        println!("  boundaries at t = {t:.3}: [{lo:.3}, {hi:.3}]");
    }
    println!("t* = {:?}", find_t_star(&sol).t_star);
    Ok(())
}
