//! Scenario files: start from a built-in, override a few keys, and get
//! field-level errors for bad input.
//!
//!     cargo run --release --example scenario_config

use trialstop::scenario::Scenario;

const CHEAP: &str = r#"
name = "cheap-trials"
base = "baseline-2025"

[cost.structural]
cost_per_obs = 20000.0

[sim]
paths = 20000
"#;

fn main() -> trialstop::Result<()> {
    let s = Scenario::from_toml(CHEAP)?;
    println!(
        "{}: c = {:.5} (baseline 0.26566), V0 = {:.4}",
        s.name,
        s.cost.c,
        s.v0_target()?
    );
    println!("--- resolved file ---\n{}", s.to_toml()?);

    let bad = "name = \"bad\"\nbase = \"baseline-2025\"\n[prior]\nvarrho = 2.0\n";
    match Scenario::from_toml(bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
