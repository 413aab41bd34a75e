//! Backward induction for the stopping boundaries at a fixed multiplier.
//!
//!     cargo run --release --example solve_boundaries -- 2.35

use trialstop::scenario::Scenario;
use trialstop::solver::{find_t_star, lattice_outcome, solve_boundaries};

fn main() -> trialstop::Result<()> {
    let lambda: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2.35);
    let s = Scenario::builtin("baseline-2025")?;
    let sol = solve_boundaries(&s.prior, &s.util, lambda, &s.cost, &s.grid_spec()?, false)?;

    println!(
        "lambda = {lambda}, {} rows, Δm = {:.4}",
        sol.rho_grid.len(),
        sol.grid.delta_m
    );
    println!("{:>6} {:>9} {:>9}", "t", "b+", "b-");
    for t in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
        let (lo, hi) = sol.at_t(t)?;
        println!("{t:>6} {hi:>9.4} {lo:>9.4}");
    }

    let tr = find_t_star(&sol);
    match tr.t_star {
        Some(t) => println!("approval boundary reaches zero at t* = {t:.3}"),
        None => println!("approval boundary never reaches zero"),
    }

    // exact expectations on the lattice, no sampling noise
    let o = lattice_outcome(&sol, s.util.alpha);
    println!(
        "lattice: E[tau] = {:.4}, regulator welfare = {:.4}, approval rate = {:.4}",
        o.mean_tau, o.welfare_alice, o.approval_rate
    );
    Ok(())
}
