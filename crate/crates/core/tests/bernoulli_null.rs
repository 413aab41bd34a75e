use trialstop::bernoulli::{run_trial, Decision, TrialConfig};
use trialstop::model::{CostSpec, PriorSpec, UtilitySpec};
use trialstop::simulator::{simulate, SimConfig};
use trialstop::solver::{solve_boundaries, GridSpec};

/// With both success rates pinned at θ₀ the finite-sample approval rate
/// should match the continuous design run under a zero effect.
#[test]
fn null_approval_rate_matches_continuous_design() {
    let p = PriorSpec::new(0.0, 9.7344, 0.5, 0.5).unwrap();
    let u = UtilitySpec::new(1.0, 1.0, 0.0, 1.0).unwrap();
    let c = CostSpec::new(0.2657).unwrap();
    let g = GridSpec::with_resolution(p.varrho0, 2000, 6.0, 0.999).unwrap();
    let sol = solve_boundaries(&p, &u, 2.35, &c, &g, false).unwrap();

    let n = 400;
    let reps = 4000;
    let mut cfg = TrialConfig::for_solution(&sol, n, 0.5, 0.05, 31);
    cfg.fixed_theta = Some([0.5, 0.5]);
    let approvals = (0..reps)
        .filter(|&rep| {
            let c = TrialConfig {
                stream: rep,
                ..cfg.clone()
            };
            run_trial(&sol, &p, &c).unwrap().decision == Decision::Approve
        })
        .count();
    let pb = approvals as f64 / reps as f64;

    let mut sc = SimConfig::new(p.varrho0, 40_000, 32);
    sc.xi = cfg.xi;
    sc.true_effect = Some(0.0);
    let limit = simulate(&sol, &p, &u, &c, &sc).unwrap();
    let pl = limit.approval_rate;

    let se = (pb * (1.0 - pb) / reps as f64 + pl * (1.0 - pl) / 40_000.0).sqrt();
    assert!(
        (pb - pl).abs() <= 4.0 * se,
        "finite {pb:.4} vs limit {pl:.4}, se {se:.4}"
    );
}
