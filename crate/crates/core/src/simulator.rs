//! Monte Carlo over the posterior-mean process stopped at a boundary pair.
//!
//! Paths move in `ρ` with exact Gaussian increments `m ← m + √Δρ·Z` and stop
//! at the first grid point where `m ≤ b⁻(ρ)` or `m ≥ b⁺(ρ) + ξ`, or at the
//! last row of the boundary grid. Stopping times are reported in calendar
//! time `τ = ς(ρ)`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Result};
use crate::model::{rct_welfare, s_alpha_raw, CostSpec, PriorSpec, TimeChange, UtilitySpec};
use crate::rng;
use crate::solver::BoundarySolution;
use crate::stats::{mean_stderr, median, Histogram};

pub const DEFAULT_THRESHOLDS: [f64; 6] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub rho_step: f64,
    /// Upward shift of the approval boundary.
    pub xi: f64,
    pub thresholds: Vec<f64>,
    pub bins: usize,
    /// Simulate under a fixed effect `μ₁ − μ₀` instead of drawing it from the
    /// prior. Requires an independent-arm prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_effect: Option<f64>,
}

impl SimConfig {
    /// `ρ`-step of `ϱ₀/20000`, no inflation, default thresholds and 200 bins.
    pub fn new(varrho0: f64, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            n_paths,
            seed,
            rho_step: varrho0 / 20_000.0,
            xi: 0.0,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            bins: 200,
            true_effect: None,
        }
    }

    pub fn validate(&self, varrho0: f64) -> Result<()> {
        ensure(self.n_paths >= 1, "n_paths", || "need at least one path".into())?;
        ensure(
            self.rho_step > 0.0 && self.rho_step <= varrho0 / 100.0,
            "rho_step",
            || {
                format!(
                    "must lie in (0, varrho0/100 = {}], got {}",
                    varrho0 / 100.0,
                    self.rho_step
                )
            },
        )?;
        ensure(self.xi >= 0.0 && self.xi.is_finite(), "xi", || {
            format!("must be non-negative, got {}", self.xi)
        })?;
        ensure(self.bins >= 1, "bins", || "need at least one bin".into())
    }
}

/// Where one path stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub tau: f64,
    pub m_tau: f64,
    pub rho_tau: f64,
    /// Stopped only because the grid ended.
    pub forced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopFraction {
    pub t: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStderr {
    pub mean_tau: f64,
    pub welfare_alice: f64,
    pub welfare_bob: f64,
    pub approval_rate: f64,
    pub mean_m_tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n_paths: usize,
    pub mean_tau: f64,
    pub median_tau: f64,
    pub frac_stop_before: Vec<StopFraction>,
    pub welfare_alice: f64,
    pub welfare_bob: f64,
    pub approval_rate: f64,
    pub mean_m_tau: f64,
    pub forced_stops: usize,
    pub mc_stderr: SimStderr,
    pub hist_tau: Histogram,
    pub hist_m_tau: Histogram,
}

impl SimResult {
    /// Fraction of paths stopped strictly before `t`, if `t` was a threshold.
    pub fn frac_before(&self, t: f64) -> Option<f64> {
        self.frac_stop_before
            .iter()
            .find(|f| (f.t - t).abs() < 1e-12)
            .map(|f| f.fraction)
    }
}

/// Boundaries and clock sampled on the simulation grid.
struct Tables {
    lower: Vec<f64>,
    upper: Vec<f64>,
    rho: Vec<f64>,
    t: Vec<f64>,
}

impl Tables {
    fn new(sol: &BoundarySolution, tc: &TimeChange, cfg: &SimConfig) -> Self {
        let steps = ((sol.rho_max() / cfg.rho_step) * (1.0 + 1e-12)).floor() as usize;
        let rho: Vec<f64> = (0..=steps).map(|k| k as f64 * cfg.rho_step).collect();
        let (lower, upper) = rho
            .iter()
            .map(|&r| {
                let (lo, hi) = sol.at_rho(r);
                (lo, hi + cfg.xi)
            })
            .unzip();
        let t = rho.iter().map(|&r| tc.varsigma(r)).collect();
        Tables { lower, upper, rho, t }
    }

    fn outcome(&self, k: usize, m: f64, forced: bool) -> PathOutcome {
        PathOutcome {
            tau: self.t[k],
            m_tau: m,
            rho_tau: self.rho[k],
            forced,
        }
    }
}

fn run_path(tab: &Tables, m0: f64, sd: f64, seed: u64, index: u64) -> PathOutcome {
    if m0 <= tab.lower[0] || m0 >= tab.upper[0] {
        return tab.outcome(0, m0, false);
    }
    let mut r = rng::stream(seed, index);
    let last = tab.rho.len() - 1;
    let mut m = m0;
    for k in 1..=last {
        let z: f64 = StandardNormal.sample(&mut r);
        m += sd * z;
        if m <= tab.lower[k] || m >= tab.upper[k] {
            return tab.outcome(k, m, false);
        }
    }
    tab.outcome(last, m, true)
}

/// Path under a fixed effect: the Neyman-pooled signal `x_t = μt + σW_t`
/// determines `m_t = (x_t/σ² + m₀/ϱ₀)·ϱ_t`.
fn run_conditional_path(
    tab: &Tables,
    tc: &TimeChange,
    prior: &PriorSpec,
    mu: f64,
    seed: u64,
    index: u64,
) -> PathOutcome {
    let m0 = prior.m0;
    if m0 <= tab.lower[0] || m0 >= tab.upper[0] {
        return tab.outcome(0, m0, false);
    }
    let sigma = prior.sigma();
    let s2 = sigma * sigma;
    let mut r = rng::stream(seed, index);
    let last = tab.rho.len() - 1;
    let mut x = 0.0;
    let mut m = m0;
    for k in 1..=last {
        let dt = tab.t[k] - tab.t[k - 1];
        let z: f64 = StandardNormal.sample(&mut r);
        x += mu * dt + sigma * dt.sqrt() * z;
        m = (x / s2 + m0 / prior.varrho0) * tc.posterior_variance(tab.t[k]);
        if m <= tab.lower[k] || m >= tab.upper[k] {
            return tab.outcome(k, m, false);
        }
    }
    tab.outcome(last, m, true)
}

/// Raw stopping outcomes in path-index order.
pub fn simulate_paths(sol: &BoundarySolution, prior: &PriorSpec, cfg: &SimConfig) -> Result<Vec<PathOutcome>> {
    prior.validate()?;
    sol.check_prior(prior)?;
    let tc = prior.time_change()?;
    cfg.validate(tc.varrho0())?;
    let tab = Tables::new(sol, &tc, cfg);
    let n = cfg.n_paths as u64;
    match cfg.true_effect {
        None => {
            let sd = cfg.rho_step.sqrt();
            Ok((0..n)
                .into_par_iter()
                .map(|i| run_path(&tab, prior.m0, sd, cfg.seed, i))
                .collect())
        }
        Some(mu) => {
            if prior.cov.is_some() {
                return Err(invalid(
                    "true_effect",
                    "conditional paths need an independent-arm prior",
                ));
            }
            Ok((0..n)
                .into_par_iter()
                .map(|i| run_conditional_path(&tab, &tc, prior, mu, cfg.seed, i))
                .collect())
        }
    }
}

/// Summarises outcomes into stopping and welfare statistics.
pub fn summarize(paths: &[PathOutcome], util: &UtilitySpec, cost: &CostSpec, cfg: &SimConfig) -> SimResult {
    let n = paths.len();
    let taus: Vec<f64> = paths.iter().map(|p| p.tau).collect();
    let ms: Vec<f64> = paths.iter().map(|p| p.m_tau).collect();
    let alice: Vec<f64> = ms.iter().map(|&m| util.alice(m)).collect();
    let bob: Vec<f64> = paths.iter().map(|p| util.bob(p.m_tau) - cost.c * p.tau).collect();
    let approve: Vec<f64> = ms.iter().map(|&m| if m >= 0.0 { 1.0 } else { 0.0 }).collect();

    let (mean_tau, se_tau) = mean_stderr(&taus);
    let (welfare_alice, se_alice) = mean_stderr(&alice);
    let (welfare_bob, se_bob) = mean_stderr(&bob);
    let (approval_rate, se_approve) = mean_stderr(&approve);
    let (mean_m_tau, se_m) = mean_stderr(&ms);
    let frac_stop_before = cfg
        .thresholds
        .iter()
        .map(|&t| StopFraction {
            t,
            fraction: taus.iter().filter(|&&x| x < t).count() as f64 / n as f64,
        })
        .collect();
    SimResult {
        n_paths: n,
        mean_tau,
        median_tau: median(&taus),
        frac_stop_before,
        welfare_alice,
        welfare_bob,
        approval_rate,
        mean_m_tau,
        forced_stops: paths.iter().filter(|p| p.forced).count(),
        mc_stderr: SimStderr {
            mean_tau: se_tau,
            welfare_alice: se_alice,
            welfare_bob: se_bob,
            approval_rate: se_approve,
            mean_m_tau: se_m,
        },
        hist_tau: Histogram::from_data(&taus, cfg.bins),
        hist_m_tau: Histogram::from_data(&ms, cfg.bins),
    }
}

pub fn simulate(
    sol: &BoundarySolution,
    prior: &PriorSpec,
    util: &UtilitySpec,
    cost: &CostSpec,
    cfg: &SimConfig,
) -> Result<SimResult> {
    util.validate()?;
    cost.validate()?;
    let paths = simulate_paths(sol, prior, cfg)?;
    Ok(summarize(&paths, util, cost, cfg))
}

/// Mean of `S_α(m_τ)` with its standard error; the calibration oracle.
pub fn alice_welfare(paths: &[PathOutcome], alpha: f64) -> (f64, f64) {
    let v: Vec<f64> = paths.iter().map(|p| s_alpha_raw(p.m_tau, alpha)).collect();
    mean_stderr(&v)
}

/// Comparison against a fixed-horizon trial run to `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RctComparison {
    pub rct_welfare: f64,
    pub mean_tau: f64,
    /// `1 − E[τ]`.
    pub sample_reduction: f64,
    pub welfare_ratio: f64,
    /// `C·n·(1 − E[τ])` when structural costs are known.
    pub savings: Option<f64>,
}

pub fn rct_compare(sim: &SimResult, prior: &PriorSpec, util: &UtilitySpec, cost: &CostSpec) -> Result<RctComparison> {
    let v0 = rct_welfare(prior.m0, prior, util.alpha)?;
    let reduction = 1.0 - sim.mean_tau;
    Ok(RctComparison {
        rct_welfare: v0,
        mean_tau: sim.mean_tau,
        sample_reduction: reduction,
        welfare_ratio: sim.welfare_alice / v0,
        savings: cost.structural.map(|s| s.cost_per_obs * s.n * reduction),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_boundaries, GridSpec};

    fn setup(v: f64, b: f64, lam: f64, c: f64) -> (PriorSpec, UtilitySpec, CostSpec, BoundarySolution) {
        let p = PriorSpec::new(0.0, v, 0.5, 0.5).unwrap();
        let u = UtilitySpec::new(1.0, 1.0, 0.0, b).unwrap();
        let cost = CostSpec::new(c).unwrap();
        let g = GridSpec::with_resolution(v, 800, 6.0, 0.999).unwrap();
        let sol = solve_boundaries(&p, &u, lam, &cost, &g, false).unwrap();
        (p, u, cost, sol)
    }

    fn cfg(v: f64, n: usize, seed: u64) -> SimConfig {
        let mut c = SimConfig::new(v, n, seed);
        c.rho_step = v / 2000.0;
        c
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (p, u, c, sol) = setup(2.0, 1.0, 1.0, 0.3);
        let cf = cfg(2.0, 3000, 11);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate(&sol, &p, &u, &c, &cf)).unwrap();
        let b = four.install(|| simulate(&sol, &p, &u, &c, &cf)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stops_respect_boundaries() {
        let (p, _, _, sol) = setup(2.0, 1.0, 1.0, 0.3);
        let mut cf = cfg(2.0, 2000, 5);
        cf.xi = 0.05;
        for o in simulate_paths(&sol, &p, &cf).unwrap() {
            if o.forced {
                continue;
            }
            let (lo, hi) = sol.at_rho(o.rho_tau);
            assert!(
                o.m_tau <= lo || o.m_tau >= hi + cf.xi,
                "{o:?} inside ({lo}, {})",
                hi + cf.xi
            );
        }
    }

    #[test]
    fn martingale_and_alpha_free_welfare() {
        let (p, u, c, sol) = setup(3.0, 1.0, 1.5, 0.3);
        let cf = cfg(3.0, 20_000, 9);
        let paths = simulate_paths(&sol, &p, &cf).unwrap();
        let r = summarize(&paths, &u, &c, &cf);
        assert!(r.mean_m_tau.abs() <= 4.0 * r.mc_stderr.mean_m_tau, "{}", r.mean_m_tau);
        let (w1, se) = alice_welfare(&paths, 1.0);
        let (wh, _) = alice_welfare(&paths, 0.5);
        assert!((w1 - wh).abs() <= 4.0 * se);
        assert!(r.welfare_alice >= 0.0 && (0.0..=1.0).contains(&r.approval_rate));
    }

    #[test]
    fn larger_xi_delays_and_lowers_approval() {
        let (p, u, c, sol) = setup(2.0, 1.0, 1.0, 0.3);
        let mut prev: Option<SimResult> = None;
        for xi in [0.0, 0.05, 0.2] {
            let mut cf = cfg(2.0, 4000, 3);
            cf.xi = xi;
            let r = simulate(&sol, &p, &u, &c, &cf).unwrap();
            if let Some(q) = prev {
                assert!(r.mean_tau >= q.mean_tau - 1e-12);
                assert!(r.approval_rate <= q.approval_rate + 1e-12);
            }
            prev = Some(r);
        }
    }

    #[test]
    fn rejects_mismatched_prior() {
        let (_, u, c, sol) = setup(2.0, 1.0, 1.0, 0.3);
        let other = PriorSpec::new(0.0, 3.0, 0.5, 0.5).unwrap();
        assert!(simulate(&sol, &other, &u, &c, &cfg(2.0, 10, 1)).is_err());
    }

    #[test]
    fn conditional_paths_match_prior_average() {
        // drawing μ from the prior and simulating conditionally reproduces the
        // unconditional approval rate
        let (p, u, c, sol) = setup(2.0, 1.0, 1.0, 0.3);
        let base = simulate(&sol, &p, &u, &c, &cfg(2.0, 20_000, 1)).unwrap();
        let mut total = 0.0;
        let reps = 40;
        for k in 0..reps {
            // quantiles of N(0, ϱ₀)
            let q = (k as f64 + 0.5) / reps as f64;
            let z = inverse_cdf(q);
            let mut cf = cfg(2.0, 500, 100 + k as u64);
            cf.true_effect = Some(z * 2f64.sqrt());
            total += simulate(&sol, &p, &u, &c, &cf).unwrap().approval_rate;
        }
        let avg = total / reps as f64;
        assert!(
            (avg - base.approval_rate).abs() < 0.03,
            "{avg} vs {}",
            base.approval_rate
        );
    }

    fn inverse_cdf(q: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if crate::model::normal::cdf(mid) < q {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rct_comparison_uses_structural_cost() {
        let (p, u, _, sol) = setup(2.0, 1.0, 1.0, 0.3);
        let c = CostSpec::from_structural(crate::model::Structural {
            cost_per_obs: 41_000.0,
            approval_benefit: 46.3e6,
            gamma_n: 0.0,
            n: 300.0,
        })
        .unwrap();
        let r = simulate(&sol, &p, &u, &c, &cfg(2.0, 1000, 2)).unwrap();
        let cmp = rct_compare(&r, &p, &u, &c).unwrap();
        assert!((cmp.savings.unwrap() - 41_000.0 * 300.0 * (1.0 - r.mean_tau)).abs() < 1e-6);
        assert!(rct_compare(&r, &p, &u, &CostSpec::new(0.3).unwrap())
            .unwrap()
            .savings
            .is_none());
    }
}
