//! Finite-sample trials with Bernoulli outcomes run under the limit design.
//!
//! Success rates are drawn as `θ⁽ᵃ⁾ ~ N(θ₀, σ²ν²/n)` with
//! `σ = 2√(θ₀(1−θ₀))`. Each arm keeps a normalised score
//! `X_a = Σ(Y − θ₀)/√(nθ₀(1−θ₀))`, the posterior mean of the local effect is
//! formed as in the Gaussian limit, and the trial stops the first time it
//! leaves `(b⁻(t), b⁺(t) + ξ)` with `t = observations / n`.
//!
//! Effects are expressed in the units of the boundary solution: a solution
//! built with `σ_sol = σ₁ + σ₀` sees the raw local effect `√n(θ⁽¹⁾ − θ⁽⁰⁾)`
//! scaled by `σ_sol/σ`. At `θ₀ = ½` and `σ_sol = 1` the scale is one.

use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Error, Result};
use crate::model::{CostSpec, PriorSpec, TimeChange, UtilitySpec};
use crate::rng;
use crate::simulator::{simulate, SimConfig};
use crate::solver::BoundarySolution;
use crate::stats::mean_stderr;

const CLAMP_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub theta0: f64,
    pub nu2: f64,
    pub xi: f64,
    /// Time cap; `None` runs to the end of the boundary grid.
    pub horizon: Option<f64>,
    pub seed: u64,
    /// Selects the random stream, e.g. a replication index.
    pub stream: u64,
    pub record_path: bool,
    /// Run `π = ½` for the first `n^c` observations and re-estimate the arm
    /// standard deviations. Bernoulli local alternatives pin both at
    /// `√(θ₀(1−θ₀))`, so the allocation afterwards is unchanged.
    pub explore_exponent: Option<f64>,
    /// Use these success rates instead of drawing them from the prior.
    pub fixed_theta: Option<[f64; 2]>,
}

impl TrialConfig {
    /// Defaults matched to `sol`: `ν² = ϱ₀/(2σ_sol²)`, `ξ = xi_sigma·σ_sol`.
    pub fn for_solution(sol: &BoundarySolution, n: usize, theta0: f64, xi_sigma: f64, seed: u64) -> Self {
        let s = sol.prior.sigma();
        TrialConfig {
            n,
            theta0,
            nu2: sol.prior.varrho0 / (2.0 * s * s),
            xi: xi_sigma * s,
            horizon: None,
            seed,
            stream: 0,
            record_path: false,
            explore_exponent: None,
            fixed_theta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.n >= 1, "n", || "must be at least 1".into())?;
        ensure(self.theta0 > 0.0 && self.theta0 < 1.0, "theta0", || {
            format!("must lie in (0, 1), got {}", self.theta0)
        })?;
        ensure(self.nu2 > 0.0, "nu2", || format!("must be positive, got {}", self.nu2))?;
        ensure(self.xi > 0.0, "xi", || format!("must be positive, got {}", self.xi))?;
        if let Some(h) = self.horizon {
            ensure(h > 0.0, "horizon", || format!("must be positive, got {h}"))?;
        }
        if let Some(c) = self.explore_exponent {
            ensure((0.0..1.0).contains(&c), "explore_exponent", || {
                format!("must lie in [0, 1), got {c}")
            })?;
        }
        if let Some([a, b]) = self.fixed_theta {
            ensure(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0, "fixed_theta", || {
                format!("success rates must lie in (0, 1), got ({a}, {b})")
            })?;
        }
        Ok(())
    }

    /// Per-arm outcome standard deviation at `θ₀`.
    pub fn arm_sd(&self) -> f64 {
        (self.theta0 * (1.0 - self.theta0)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Approve,
    Reject,
}

/// Running sufficient statistics of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialState {
    pub n: usize,
    pub theta0: f64,
    /// Observations per arm, indexed `[control, treatment]`.
    pub counts: [usize; 2],
    /// Normalised scores `X_a`.
    pub scores: [f64; 2],
    pub successes: [usize; 2],
}

impl TrialState {
    pub fn new(n: usize, theta0: f64) -> Self {
        TrialState {
            n,
            theta0,
            counts: [0; 2],
            scores: [0.0; 2],
            successes: [0; 2],
        }
    }

    pub fn observations(&self) -> usize {
        self.counts[0] + self.counts[1]
    }
}

/// Adds one outcome on `arm` (1 = treatment, 0 = control).
pub fn score_update(state: &mut TrialState, arm: usize, outcome: u8) -> Result<()> {
    ensure(arm <= 1, "arm", || format!("must be 0 or 1, got {arm}"))?;
    ensure(outcome <= 1, "outcome", || format!("must be 0 or 1, got {outcome}"))?;
    let t0 = state.theta0;
    let scale = (state.n as f64 * t0 * (1.0 - t0)).sqrt();
    state.scores[arm] += (outcome as f64 - t0) / scale;
    state.counts[arm] += 1;
    state.successes[arm] += outcome as usize;
    Ok(())
}

/// Posterior for the local effect implied by a trial configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPosterior {
    /// Per-arm outcome sd `σ_a`.
    pub arm_sd: f64,
    /// Prior variance of each local mean, `σ²ν²`.
    pub prior_var: f64,
    /// Prior means of the local parameters `[control, treatment]`, raw units.
    pub prior_mean: [f64; 2],
    /// Factor from raw local effects to solution units.
    pub scale: f64,
}

impl LocalPosterior {
    pub fn new(cfg: &TrialConfig, prior: &PriorSpec) -> Self {
        let arm_sd = cfg.arm_sd();
        let sigma = 2.0 * arm_sd;
        let scale = prior.sigma() / sigma;
        LocalPosterior {
            arm_sd,
            prior_var: sigma * sigma * cfg.nu2,
            prior_mean: [0.0, prior.m0 / scale],
            scale,
        }
    }

    /// Limit-experiment prior in solution units.
    pub fn limit_prior(&self, m0: f64) -> Result<PriorSpec> {
        let s = self.scale * self.arm_sd;
        PriorSpec::new(m0, 2.0 * self.prior_var * self.scale * self.scale, s, s)
    }
}

/// `m_n = μ_{n,1} − μ_{n,0}` in solution units, with
/// `μ_{n,a} = (X_a/σ_a + μ_a⁰/Σ_aa) / (q_a/σ_a² + 1/Σ_aa)` and `q_a = count_a/n`.
pub fn posterior_mean_n(state: &TrialState, post: &LocalPosterior) -> f64 {
    let s = post.arm_sd;
    let arm = |a: usize| {
        let q = state.counts[a] as f64 / state.n as f64;
        (state.scores[a] / s + post.prior_mean[a] / post.prior_var) / (q / (s * s) + 1.0 / post.prior_var)
    };
    post.scale * (arm(1) - arm(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRun {
    pub n: usize,
    pub tau_index: usize,
    pub tau: f64,
    pub decision: Decision,
    /// Stopped by the time cap rather than a boundary.
    pub capped: bool,
    pub m_tau: f64,
    /// Local effect `√n(θ⁽¹⁾ − θ⁽⁰⁾)` in solution units.
    pub effect: f64,
    pub q1_count: usize,
    pub q0_count: usize,
    /// `(θ⁽¹⁾, θ⁽⁰⁾)`.
    pub theta: [f64; 2],
    pub clamped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_path: Option<Vec<f64>>,
}

fn check_solution(sol: &BoundarySolution, prior: &PriorSpec, cfg: &TrialConfig) -> Result<LocalPosterior> {
    cfg.validate()?;
    sol.check_prior(prior)?;
    if prior.cov.is_some() || (prior.sigma1 - prior.sigma0).abs() > 1e-12 * prior.sigma() {
        return Err(Error::Mismatch(
            "Bernoulli trials need an independent prior with σ₁ = σ₀".into(),
        ));
    }
    let post = LocalPosterior::new(cfg, prior);
    let implied = post.limit_prior(prior.m0)?;
    if (implied.varrho0 - prior.varrho0).abs() > 1e-9 * prior.varrho0 {
        return Err(Error::Mismatch(format!(
            "nu2 = {} implies varrho0 = {} but the solution has {}",
            cfg.nu2, implied.varrho0, prior.varrho0
        )));
    }
    Ok(post)
}

fn draw_theta(mean: f64, sd: f64, rng: &mut impl rand::Rng) -> (f64, bool) {
    let z: f64 = StandardNormal.sample(rng);
    let th = mean + sd * z;
    let clamped = th.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
    (clamped, clamped != th)
}

/// Runs one trial under the Neyman allocation and the boundary pair in `sol`.
pub fn run_trial(sol: &BoundarySolution, prior: &PriorSpec, cfg: &TrialConfig) -> Result<TrialRun> {
    let post = check_solution(sol, prior, cfg)?;
    let tc = prior.time_change()?;
    Ok(run_checked(sol, &tc, &post, cfg))
}

fn run_checked(sol: &BoundarySolution, tc: &TimeChange, post: &LocalPosterior, cfg: &TrialConfig) -> TrialRun {
    let n = cfg.n;
    let rn = (n as f64).sqrt();
    let mut rng = rng::stream(cfg.seed, cfg.stream);
    let (theta, clamped) = match cfg.fixed_theta {
        Some([t1, t0]) => ([t1, t0], false),
        None => {
            let sd = (post.prior_var / n as f64).sqrt();
            let (t1, c1) = draw_theta(cfg.theta0 + post.prior_mean[1] / rn, sd, &mut rng);
            let (t0, c0) = draw_theta(cfg.theta0 + post.prior_mean[0] / rn, sd, &mut rng);
            ([t1, t0], c1 || c0)
        }
    };
    let effect = post.scale * rn * (theta[0] - theta[1]);
    let grid_end = *sol.t_grid.last().expect("non-empty grid");
    let cap = cfg.horizon.map_or(grid_end, |h| h.min(grid_end));
    let max_obs = (cap * n as f64).floor() as usize;
    let explore = cfg.explore_exponent.map_or(0, |c| (n as f64).powf(c).ceil() as usize);
    // Neyman share of the treatment arm; σ₁ = σ₀ here, and re-estimating after
    // the exploration phase returns the same value.
    let frac = 0.5;

    let mut state = TrialState::new(n, cfg.theta0);
    let mut m = posterior_mean_n(&state, post);
    let mut path = cfg.record_path.then(|| vec![m]);
    let (lo, hi) = sol.at_rho(0.0);
    let mut capped = false;
    if m > lo && m < hi + cfg.xi {
        loop {
            let i = state.observations();
            if i >= max_obs {
                capped = true;
                break;
            }
            let arm = if i < explore {
                i.is_multiple_of(2)
            } else {
                state.counts[1] as f64 <= frac * i as f64
            };
            let a = arm as usize;
            let p = if arm { theta[0] } else { theta[1] };
            let y = rng.random_bool(p) as u8;
            score_update(&mut state, a, y).expect("arm and outcome are binary");
            m = posterior_mean_n(&state, post);
            if let Some(p) = path.as_mut() {
                p.push(m);
            }
            let t = (i + 1) as f64 / n as f64;
            let (lo, hi) = sol.at_rho(tc.psi(t));
            if m <= lo || m >= hi + cfg.xi {
                break;
            }
        }
    }
    let tau_index = state.observations();
    TrialRun {
        n,
        tau_index,
        tau: tau_index as f64 / n as f64,
        decision: if m >= 0.0 { Decision::Approve } else { Decision::Reject },
        capped,
        m_tau: m,
        effect,
        q1_count: state.counts[1],
        q0_count: state.counts[0],
        theta,
        clamped,
        m_path: path,
    }
}

/// Reference welfare levels of the limit experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareReference {
    pub alice: f64,
    pub bob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub reps: usize,
    pub alice_welfare: f64,
    pub alice_stderr: f64,
    pub bob_welfare: f64,
    pub bob_stderr: f64,
    pub alice_ratio: f64,
    pub alice_ratio_stderr: f64,
    pub bob_ratio: f64,
    pub bob_ratio_stderr: f64,
    pub mean_tau: f64,
    pub approval_rate: f64,
    pub clamped: usize,
    pub capped: usize,
}

/// References for the convergence ratios: the welfare floor `v0` for the
/// regulator and the simulated limit-experiment sponsor welfare under the
/// trial's approval inflation `xi`.
#[allow(clippy::too_many_arguments)]
pub fn limit_reference(
    v0: f64,
    sol: &BoundarySolution,
    prior: &PriorSpec,
    util: &UtilitySpec,
    cost: &CostSpec,
    sim: &SimConfig,
    xi: f64,
) -> Result<WelfareReference> {
    let cfg = SimConfig { xi, ..sim.clone() };
    let limit = simulate(sol, prior, util, cost, &cfg)?;
    Ok(WelfareReference {
        alice: v0,
        bob: limit.welfare_bob,
    })
}

/// Welfare of one finished trial: `(Alice, Bob)`.
pub fn trial_welfare(run: &TrialRun, util: &UtilitySpec, cost: &CostSpec) -> (f64, f64) {
    let approve = run.decision == Decision::Approve;
    let u = |alpha: f64| {
        if approve {
            alpha * run.effect
        } else {
            -(1.0 - alpha) * run.effect
        }
    };
    let bob = if approve { util.b } else { 0.0 } + util.gamma * u(util.alpha_prime) - cost.c * run.tau;
    (u(util.alpha), bob)
}

/// Averages finite-sample welfare over `reps` trials for each `n`.
#[allow(clippy::too_many_arguments)]
pub fn welfare_convergence(
    sol: &BoundarySolution,
    prior: &PriorSpec,
    util: &UtilitySpec,
    cost: &CostSpec,
    base: &TrialConfig,
    n_list: &[usize],
    reps: usize,
    reference: WelfareReference,
) -> Result<Vec<ConvergenceRow>> {
    ensure(!n_list.is_empty(), "n_list", || "need at least one sample size".into())?;
    ensure(n_list.windows(2).all(|w| w[0] < w[1]), "n_list", || {
        format!("must be strictly ascending, got {n_list:?}")
    })?;
    ensure(reps >= 2, "reps", || format!("need at least 2, got {reps}"))?;
    if reference.alice == 0.0 || reference.bob == 0.0 {
        return Err(invalid("reference", "reference welfare must be non-zero"));
    }
    let tc = prior.time_change()?;
    n_list
        .iter()
        .map(|&n| {
            let cfg = TrialConfig {
                n,
                record_path: false,
                ..base.clone()
            };
            let post = check_solution(sol, prior, &cfg)?;
            let runs: Vec<TrialRun> = (0..reps as u64)
                .into_par_iter()
                .map(|rep| {
                    let c = TrialConfig {
                        stream: ((n as u64) << 32) | rep,
                        ..cfg.clone()
                    };
                    run_checked(sol, &tc, &post, &c)
                })
                .collect();
            let (alice, bob): (Vec<f64>, Vec<f64>) = runs.iter().map(|r| trial_welfare(r, util, cost)).unzip();
            let taus: Vec<f64> = runs.iter().map(|r| r.tau).collect();
            let (aw, ase) = mean_stderr(&alice);
            let (bw, bse) = mean_stderr(&bob);
            Ok(ConvergenceRow {
                n,
                reps,
                alice_welfare: aw,
                alice_stderr: ase,
                bob_welfare: bw,
                bob_stderr: bse,
                alice_ratio: aw / reference.alice,
                alice_ratio_stderr: ase / reference.alice.abs(),
                bob_ratio: bw / reference.bob,
                bob_ratio_stderr: bse / reference.bob.abs(),
                mean_tau: mean_stderr(&taus).0,
                approval_rate: runs.iter().filter(|r| r.decision == Decision::Approve).count() as f64 / reps as f64,
                clamped: runs.iter().filter(|r| r.clamped).count(),
                capped: runs.iter().filter(|r| r.capped).count(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_boundaries, GridSpec};

    fn baseline_solution() -> (PriorSpec, UtilitySpec, CostSpec, BoundarySolution) {
        let p = PriorSpec::new(0.0, 9.7344, 0.5, 0.5).unwrap();
        let u = UtilitySpec::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let c = CostSpec::new(0.2657).unwrap();
        let g = GridSpec::with_resolution(9.7344, 1000, 6.0, 0.999).unwrap();
        let sol = solve_boundaries(&p, &u, 2.3, &c, &g, false).unwrap();
        (p, u, c, sol)
    }

    #[test]
    fn score_examples() {
        let mut s = TrialState::new(4, 0.5);
        score_update(&mut s, 1, 1).unwrap();
        assert!((s.scores[1] - 0.5).abs() < 1e-15);

        let mut s = TrialState::new(9, 0.3);
        for _ in 0..5 {
            score_update(&mut s, 0, 1).unwrap();
        }
        let want = 5.0 * 0.7 / (9.0f64 * 0.3 * 0.7).sqrt();
        assert!((s.scores[0] - want).abs() < 1e-12);

        let mut s = TrialState::new(10, 0.5);
        for k in 0..6 {
            score_update(&mut s, 1, (k % 2 == 0) as u8).unwrap();
            if k % 2 == 1 {
                assert!(s.scores[1].abs() < 1e-15);
            }
        }
        assert!(score_update(&mut s, 1, 2).is_err());
        assert!(score_update(&mut s, 2, 1).is_err());
    }

    #[test]
    fn empty_posterior_is_prior() {
        let (p, _, _, sol) = baseline_solution();
        let cfg = TrialConfig::for_solution(&sol, 300, 0.5, 0.05, 1);
        let shifted = PriorSpec { m0: 0.7, ..p };
        let post = LocalPosterior::new(&cfg, &shifted);
        assert!((posterior_mean_n(&TrialState::new(300, 0.5), &post) - 0.7).abs() < 1e-15);
    }

    /// Conjugate Gaussian update one observation at a time on the local
    /// parameters `h_a`.
    fn kalman(outcomes: &[(usize, u8)], n: usize, theta0: f64, prior_var: f64, prior_mean: [f64; 2]) -> f64 {
        let s2 = theta0 * (1.0 - theta0);
        let mut prec = [1.0 / prior_var; 2];
        let mut mean = prior_mean;
        for &(a, y) in outcomes {
            // Y − θ₀ ≈ h_a/√n + noise with variance s2, i.e. a signal on h_a
            // with noise variance n·s2 after multiplying by √n
            let obs = (y as f64 - theta0) * (n as f64).sqrt();
            let noise_prec = 1.0 / (n as f64 * s2);
            let new_prec = prec[a] + noise_prec;
            mean[a] = (prec[a] * mean[a] + noise_prec * obs) / new_prec;
            prec[a] = new_prec;
        }
        mean[1] - mean[0]
    }

    #[test]
    fn posterior_mean_matches_sequential_update() {
        let (p, _, _, sol) = baseline_solution();
        let n = 300;
        let cfg = TrialConfig::for_solution(&sol, n, 0.5, 0.05, 1);
        let p = PriorSpec { m0: 0.4, ..p };
        let post = LocalPosterior::new(&cfg, &p);
        let mut r = rng::stream(99, 0);
        let mut state = TrialState::new(n, 0.5);
        let mut seen = Vec::new();
        for i in 0..300 {
            let a = i % 2;
            let y = r.random_bool(0.55) as u8;
            score_update(&mut state, a, y).unwrap();
            seen.push((a, y));
            let want = post.scale * kalman(&seen, n, 0.5, post.prior_var, post.prior_mean);
            let got = posterior_mean_n(&state, &post);
            assert!((got - want).abs() < 1e-10, "step {i}: {got} vs {want}");
        }
    }

    #[test]
    fn induced_prior_has_solution_variance() {
        let (p, _, _, sol) = baseline_solution();
        let cfg = TrialConfig::for_solution(&sol, 300, 0.5, 0.05, 1);
        let post = LocalPosterior::new(&cfg, &p);
        // √n(θ1 − θ0)/σ with θ_a ~ N(θ₀, σ²ν²/n) independently
        let var = 2.0 * post.prior_var / (2.0 * post.arm_sd).powi(2);
        assert!((var - 9.7344).abs() < 1e-12);
        assert!((post.limit_prior(0.0).unwrap().varrho0 - 9.7344).abs() < 1e-12);
    }

    #[test]
    fn allocation_alternates_and_stops_validly() {
        let (p, _, _, sol) = baseline_solution();
        let tc = p.time_change().unwrap();
        for rep in 0..200 {
            let mut cfg = TrialConfig::for_solution(&sol, 300, 0.5, 0.05, 4);
            cfg.stream = rep;
            cfg.record_path = true;
            let run = run_trial(&sol, &p, &cfg).unwrap();
            assert_eq!(run.q1_count + run.q0_count, run.tau_index);
            assert_eq!(run.q1_count, run.tau_index.div_ceil(2));
            assert!(run.q1_count.abs_diff(run.q0_count) <= 1);
            assert_eq!(run.m_path.as_ref().unwrap().len(), run.tau_index + 1);
            if !run.capped {
                let (lo, hi) = sol.at_rho(tc.psi(run.tau));
                assert!(run.m_tau <= lo || run.m_tau >= hi + cfg.xi);
                if run.decision == Decision::Approve {
                    assert!(run.m_tau >= hi + cfg.xi && hi + cfg.xi > 0.0);
                }
            }
        }
    }

    #[test]
    fn huge_xi_and_short_horizon_run_to_cap() {
        let (p, _, _, sol) = baseline_solution();
        let mut cfg = TrialConfig::for_solution(&sol, 100, 0.5, 0.05, 3);
        cfg.xi = 1e6;
        cfg.horizon = Some(0.05);
        for rep in 0..20 {
            cfg.stream = rep;
            let run = run_trial(&sol, &p, &cfg).unwrap();
            // an early rejection is still possible
            assert!(run.capped || run.decision == Decision::Reject);
            if run.capped {
                assert_eq!(run.tau_index, 5);
            }
        }
    }

    #[test]
    fn seeded_runs_repeat_and_exploration_is_inert() {
        let (p, _, _, sol) = baseline_solution();
        let mut cfg = TrialConfig::for_solution(&sol, 200, 0.5, 0.05, 8);
        cfg.stream = 5;
        let a = run_trial(&sol, &p, &cfg).unwrap();
        assert_eq!(a, run_trial(&sol, &p, &cfg).unwrap());
        for rep in 0..50 {
            cfg.stream = rep;
            cfg.explore_exponent = None;
            let plain = run_trial(&sol, &p, &cfg).unwrap();
            cfg.explore_exponent = Some(0.5);
            assert_eq!(plain, run_trial(&sol, &p, &cfg).unwrap());
        }
    }

    #[test]
    fn rejects_inconsistent_prior_scale() {
        let (p, _, _, sol) = baseline_solution();
        let mut cfg = TrialConfig::for_solution(&sol, 100, 0.5, 0.05, 1);
        cfg.nu2 *= 2.0;
        assert!(matches!(run_trial(&sol, &p, &cfg), Err(Error::Mismatch(_))));
    }

    #[test]
    fn convergence_table_shape() {
        let (p, u, c, sol) = baseline_solution();
        let cfg = TrialConfig::for_solution(&sol, 1, 0.5, 0.05, 1);
        let rows = welfare_convergence(
            &sol,
            &p,
            &u,
            &c,
            &cfg,
            &[50, 100],
            200,
            WelfareReference { alice: 1.0, bob: 1.0 },
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows
            .iter()
            .all(|r| r.reps == 200 && (0.0..=1.0).contains(&r.approval_rate)));
        assert!(welfare_convergence(
            &sol,
            &p,
            &u,
            &c,
            &cfg,
            &[100, 50],
            200,
            WelfareReference { alice: 1.0, bob: 1.0 }
        )
        .is_err());
    }
}
