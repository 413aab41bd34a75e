//! Welfare of a fixed-horizon trial and the limit-unit cost of each built-in
//! scenario.
//!
//!     cargo run --release --example rct_benchmark

use trialstop::model::{rct_welfare, scale_params};
use trialstop::scenario::{builtin_names, Scenario};

fn main() -> trialstop::Result<()> {
    for name in builtin_names() {
        let s = Scenario::builtin(name)?;
        let v0 = rct_welfare(s.prior.m0, &s.prior, s.util.alpha)?;
        println!("{name:>14}: V0* = {v0:.4}, c = {:.5}, B = {}", s.cost.c, s.util.b);
        if let Some(st) = s.cost.structural.filter(|st| st.approval_benefit > 0.0) {
            let p = scale_params(
                st.cost_per_obs,
                st.approval_benefit,
                st.gamma_n,
                st.n,
                s.prior.varrho0 / st.n.sqrt(),
            )?;
            println!(
                "{:>14}  c/B = nC/B_n = {:.5}, prior variance {:.4}",
                "", p.c_over_b, p.varrho0
            );
        }
    }

    // the benchmark shrinks as the prior mean moves away from zero
    let s = Scenario::builtin("baseline-2025")?;
    for m0 in [-1.0, 0.0, 1.0, 3.0] {
        println!("m0 = {m0:>4}: V0* = {:.4}", rct_welfare(m0, &s.prior, 1.0)?);
    }
    Ok(())
}
