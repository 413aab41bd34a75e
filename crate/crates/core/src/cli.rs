//! Command-line front end. The `trialstop` binary is a thin wrapper over
//! [`run`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bernoulli::{limit_reference, run_trial, welfare_convergence, TrialConfig, WelfareReference};
use crate::calibrate::{calibrate_lambda, sweep, CalibrationResult, SweepKind};
use crate::error::{ensure, Result};
use crate::export::{self, CalibrationReport, RctBaseline, RctReport, SimulationReport, SolveReport};
use crate::model::{rct_welfare, time_change_psi};
use crate::scenario::{Scenario, V0Mode, V0Spec};
use crate::simulator::{rct_compare, simulate};
use crate::solver::{find_t_star, lattice_outcome, solve_boundaries, BoundarySolution};

#[derive(Debug, Parser)]
#[command(
    name = "trialstop",
    version,
    about = "Welfare-constrained optimal stopping for two-arm trials"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Built-in scenario name or path to a scenario TOML file.
    #[arg(long, global = true, default_value = "baseline-2025")]
    pub scenario: String,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the simulation and Bernoulli seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the number of Monte Carlo paths.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Suppress progress notices and summaries.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the stopping problem for a given multiplier and write the boundaries.
    Solve {
        /// Multiplier on regulator welfare; calibrated when omitted.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Find the multiplier that meets the welfare floor.
    Calibrate {
        /// Calibrate each floor `k × V0*` instead of the scenario's floor.
        #[arg(long, value_delimiter = ',')]
        v0_multiples: Vec<f64>,
    },
    /// Simulate the calibrated design.
    Simulate {
        /// Use this multiplier instead of the calibrated one.
        #[arg(long)]
        lambda: Option<f64>,
        /// Times `t` at which to report the fraction stopped before `t`.
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<f64>,
    },
    /// Recalibrate and simulate across a parameter range.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepArg,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Paths per welfare evaluation during each calibration search.
        #[arg(long)]
        search_paths: Option<usize>,
    },
    /// Finite-sample welfare of the design with Bernoulli outcomes.
    Bernoulli {
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        reps: Option<usize>,
        /// Write the first K trials per sample size to a JSON-lines trace.
        #[arg(long, value_name = "K")]
        trace: Option<usize>,
    },
    /// Welfare of the fixed-horizon trial and the scaled parameters.
    RctBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    V0Multiple,
    Benefit,
    PriorSd,
}

impl From<SweepArg> for SweepKind {
    fn from(a: SweepArg) -> Self {
        match a {
            SweepArg::V0Multiple => SweepKind::V0Multiple,
            SweepArg::Benefit => SweepKind::Benefit,
            SweepArg::PriorSd => SweepKind::PriorSd,
        }
    }
}

struct Ctx {
    scenario: Scenario,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn notice(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("note: {}", msg.as_ref());
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn wrote(&self, p: &Path) {
        self.say(format!("wrote {}", p.display()));
    }
}

/// Loads the scenario and applies the global overrides.
pub fn load_scenario(g: &GlobalOpts) -> Result<Scenario> {
    let mut s = Scenario::load(&g.scenario)?;
    if let Some(seed) = g.seed {
        s.sim.seed = seed;
        s.bernoulli.seed = seed;
    }
    if let Some(p) = g.paths {
        s.sim.paths = p;
        s.calibration.final_paths = p;
        s.calibration.search_paths = s.calibration.search_paths.min(p);
    }
    s.validate()?;
    Ok(s)
}

pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    execute(cli)
}

pub fn execute(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        scenario: load_scenario(&cli.global)?,
        out: cli.global.out.clone(),
        quiet: cli.global.quiet,
    };
    match cli.command {
        Command::Solve { lambda } => cmd_solve(&ctx, lambda),
        Command::Calibrate { v0_multiples } => cmd_calibrate(&ctx, &v0_multiples),
        Command::Simulate { lambda, thresholds } => cmd_simulate(&ctx, lambda, &thresholds),
        Command::Sweep {
            kind,
            values,
            search_paths,
        } => cmd_sweep(&ctx, kind.into(), &values, search_paths),
        Command::Bernoulli { n_list, reps, trace } => cmd_bernoulli(&ctx, &n_list, reps, trace),
        Command::RctBaseline => cmd_rct_baseline(&ctx),
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn calibrate_report(s: &Scenario, v0_multiple: Option<f64>) -> Result<CalibrationReport> {
    let result = calibrate_lambda(
        s.v0_target()?,
        &s.prior,
        &s.util,
        &s.cost,
        &s.grid_spec()?,
        &s.sim_config(),
        &s.calibration,
    )?;
    Ok(CalibrationReport {
        scenario: s.clone(),
        v0_multiple,
        truncation: find_t_star(&result.sol),
        result,
    })
}

const CALIBRATION_FILE: &str = "calibration.json";

/// Calibrated solution from the cache in `--out`, or a fresh calibration
/// (which then fills the cache).
fn calibrated(ctx: &Ctx) -> Result<CalibrationResult> {
    let cache = ctx.path(CALIBRATION_FILE);
    if cache.exists() {
        match export::read_json::<CalibrationReport>(&cache, "calibration") {
            Ok(r) if r.scenario == ctx.scenario => return Ok(r.result),
            Ok(_) => ctx.notice(format!(
                "{} belongs to different inputs; recalibrating",
                cache.display()
            )),
            Err(e) => ctx.notice(format!("ignoring {}: {e}", cache.display())),
        }
    } else {
        ctx.notice(format!("no calibration in {}; calibrating first", ctx.out.display()));
    }
    let report = calibrate_report(&ctx.scenario, None)?;
    write_calibration(ctx, &report)?;
    Ok(report.result)
}

fn write_calibration(ctx: &Ctx, r: &CalibrationReport) -> Result<()> {
    let p = ctx.path(CALIBRATION_FILE);
    export::write_json(&p, "calibration", r)?;
    ctx.wrote(&p);
    let b = ctx.path("boundaries.csv");
    export::write_boundaries_csv(&b, &r.result.sol)?;
    ctx.wrote(&b);
    Ok(())
}

fn solution(ctx: &Ctx, lambda: Option<f64>) -> Result<BoundarySolution> {
    let s = &ctx.scenario;
    match lambda {
        Some(l) => solve_boundaries(&s.prior, &s.util, l, &s.cost, &s.grid_spec()?, false),
        None => Ok(calibrated(ctx)?.sol),
    }
}

fn cmd_solve(ctx: &Ctx, lambda: Option<f64>) -> Result<()> {
    let sol = solution(ctx, lambda)?;
    let truncation = find_t_star(&sol);
    let csv = ctx.path("boundaries.csv");
    export::write_boundaries_csv(&csv, &sol)?;
    ctx.wrote(&csv);
    let report = SolveReport {
        scenario: ctx.scenario.clone(),
        lambda: sol.lambda,
        truncation,
        lattice: lattice_outcome(&sol, ctx.scenario.util.alpha),
        solution: sol,
    };
    let json = ctx.path("boundaries.json");
    export::write_json(&json, "boundaries", &report)?;
    ctx.wrote(&json);

    let sol = &report.solution;
    ctx.say(format!("lambda = {:.6}", sol.lambda));
    match truncation.t_star {
        Some(t) => ctx.say(format!(
            "t* = {t:.4}, b-(t*) = {:.4}",
            truncation.b_minus_at_t_star.unwrap_or(f64::NAN)
        )),
        None => ctx.say("t* = none (approval boundary stays positive)"),
    }
    for t in [0.0, 0.5, 1.0] {
        let (lo, hi) = sol.at_t(t)?;
        ctx.say(format!("t = {t:<4} b+ = {hi:.4}  b- = {lo:.4}"));
    }
    Ok(())
}

/// Several calibrations written together by `calibrate --v0-multiples`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationSet {
    pub runs: Vec<CalibrationReport>,
}

fn cmd_calibrate(ctx: &Ctx, multiples: &[f64]) -> Result<()> {
    if multiples.is_empty() {
        let report = calibrate_report(&ctx.scenario, None)?;
        write_calibration(ctx, &report)?;
        summarize_calibration(ctx, &report);
        return Ok(());
    }
    let mut runs = Vec::new();
    for &k in multiples {
        ensure(k >= 0.0, "v0_multiples", || format!("must be non-negative, got {k}"))?;
        let mut s = ctx.scenario.clone();
        s.v0 = V0Spec {
            mode: V0Mode::Multiple,
            value: k,
        };
        let r = calibrate_report(&s, Some(k))?;
        summarize_calibration(ctx, &r);
        let b = ctx.path(&format!("boundaries_v0_{k}.csv"));
        export::write_boundaries_csv(&b, &r.result.sol)?;
        ctx.wrote(&b);
        runs.push(r);
    }
    let csv = ctx.path("calibration_v0.csv");
    export::write_calibration_csv(&csv, &runs)?;
    ctx.wrote(&csv);
    let json = ctx.path("calibration_v0.json");
    export::write_json(&json, "calibration_set", &CalibrationSet { runs })?;
    ctx.wrote(&json);
    Ok(())
}

fn summarize_calibration(ctx: &Ctx, r: &CalibrationReport) {
    let c = &r.result;
    let label = r.v0_multiple.map(|k| format!(" (V0 = {k} x V0*)")).unwrap_or_default();
    ctx.say(format!(
        "V0 = {:.5}{label}: lambda* = {:.5}, welfare = {:.5} ± {:.5} after {} steps",
        c.v0, c.lambda_star, c.achieved_welfare, c.welfare_stderr, c.iterations
    ));
}

fn cmd_simulate(ctx: &Ctx, lambda: Option<f64>, thresholds: &[f64]) -> Result<()> {
    let s = &ctx.scenario;
    let sol = solution(ctx, lambda)?;
    let mut cfg = s.sim_config();
    if !thresholds.is_empty() {
        cfg.thresholds = thresholds.to_vec();
    }
    let result = simulate(&sol, &s.prior, &s.util, &s.cost, &cfg)?;
    let rct = rct_compare(&result, &s.prior, &s.util, &s.cost)?;
    for (name, h) in [
        ("hist_tau.csv", &result.hist_tau),
        ("hist_m_tau.csv", &result.hist_m_tau),
    ] {
        let p = ctx.path(name);
        export::write_histogram_csv(&p, h)?;
        ctx.wrote(&p);
    }
    let report = SimulationReport {
        scenario: s.clone(),
        lambda: sol.lambda,
        truncation: find_t_star(&sol),
        result,
        rct,
    };
    let p = ctx.path("simulation.json");
    export::write_json(&p, "simulation", &report)?;
    ctx.wrote(&p);

    let r = &report.result;
    ctx.say(format!("paths          {}", r.n_paths));
    ctx.say(format!(
        "mean tau       {:.4} ± {:.4}",
        r.mean_tau, r.mc_stderr.mean_tau
    ));
    ctx.say(format!("median tau     {:.4}", r.median_tau));
    for f in &r.frac_stop_before {
        ctx.say(format!("P(tau < {:<5}) {:.4}", f.t, f.fraction));
    }
    ctx.say(format!(
        "welfare (reg.) {:.4} ± {:.4}",
        r.welfare_alice, r.mc_stderr.welfare_alice
    ));
    ctx.say(format!("approval rate  {:.4}", r.approval_rate));
    ctx.say(format!(
        "vs fixed trial {:.2}% of welfare, {:.1}% fewer observations",
        100.0 * rct.welfare_ratio,
        100.0 * rct.sample_reduction
    ));
    if let Some(sv) = rct.savings {
        ctx.say(format!("savings        {sv:.0}"));
    }
    Ok(())
}

fn cmd_sweep(ctx: &Ctx, kind: SweepKind, values: &[f64], search_paths: Option<usize>) -> Result<()> {
    let mut s = ctx.scenario.clone();
    if let Some(n) = search_paths {
        s.calibration.search_paths = n;
    }
    let rows = sweep(kind, values, &s)?;
    let p = export::write_sweep(&ctx.out, kind, &rows)?;
    ctx.wrote(&p);
    ctx.say(format!(
        "{:>10} {:>10} {:>10} {:>10} {:>10}",
        kind.label(),
        "lambda*",
        "mean tau",
        "welfare",
        "v0"
    ));
    for r in &rows {
        ctx.say(format!(
            "{:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.value, r.lambda_star, r.mean_tau, r.welfare, r.v0
        ));
    }
    Ok(())
}

/// Convergence table with the references it was normalised by.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scenario: Scenario,
    pub lambda: f64,
    pub reference: WelfareReference,
    pub trial: TrialConfig,
    pub rows: Vec<crate::bernoulli::ConvergenceRow>,
}

fn cmd_bernoulli(ctx: &Ctx, n_list: &[usize], reps: Option<usize>, trace: Option<usize>) -> Result<()> {
    let s = &ctx.scenario;
    let b = &s.bernoulli;
    let reps = reps.unwrap_or(b.reps);
    ensure(reps >= 100, "reps", || {
        format!("at least 100 replications are needed, got {reps}")
    })?;
    let n_list = if n_list.is_empty() {
        b.n_list.clone()
    } else {
        n_list.to_vec()
    };

    let cal = calibrated(ctx)?;
    let sol = &cal.sol;
    let mut cfg = TrialConfig::for_solution(sol, 1, b.theta0, b.xi_sigma, b.seed);
    if let Some(nu2) = b.nu2 {
        cfg.nu2 = nu2;
    }
    cfg.horizon = b.horizon;
    let reference = limit_reference(cal.v0, sol, &s.prior, &s.util, &s.cost, &s.sim_config(), cfg.xi)?;
    let rows = welfare_convergence(sol, &s.prior, &s.util, &s.cost, &cfg, &n_list, reps, reference)?;

    let csv = ctx.path("bernoulli_convergence.csv");
    export::write_convergence_csv(&csv, &rows)?;
    ctx.wrote(&csv);
    if let Some(k) = trace {
        let mut runs = Vec::new();
        for &n in &n_list {
            for rep in 0..k as u64 {
                let c = TrialConfig {
                    n,
                    stream: ((n as u64) << 32) | rep,
                    record_path: true,
                    ..cfg.clone()
                };
                runs.push(run_trial(sol, &s.prior, &c)?);
            }
        }
        let p = ctx.path("bernoulli_trace.jsonl");
        export::write_trace_jsonl(&p, &runs)?;
        ctx.wrote(&p);
    }
    let report = ConvergenceReport {
        scenario: s.clone(),
        lambda: sol.lambda,
        reference,
        trial: cfg,
        rows,
    };
    let json = ctx.path("bernoulli_convergence.json");
    export::write_json(&json, "bernoulli_convergence", &report)?;
    ctx.wrote(&json);

    ctx.say(format!(
        "{:>6} {:>14} {:>14} {:>8}",
        "n", "regulator", "sponsor", "clamped"
    ));
    for r in &report.rows {
        ctx.say(format!(
            "{:>6} {:>7.4}±{:.4} {:>7.4}±{:.4} {:>8}",
            r.n, r.alice_ratio, r.alice_ratio_stderr, r.bob_ratio, r.bob_ratio_stderr, r.clamped
        ));
    }
    Ok(())
}

fn cmd_rct_baseline(ctx: &Ctx) -> Result<()> {
    let s = &ctx.scenario;
    let v0 = rct_welfare(s.prior.m0, &s.prior, s.util.alpha)?;
    let baseline = RctBaseline {
        m0: s.prior.m0,
        varrho0: s.prior.varrho0,
        sigma: s.prior.sigma(),
        alpha: s.util.alpha,
        nu: time_change_psi(1.0, &s.prior)?.sqrt(),
        v0_star: v0,
        c: s.cost.c,
        b: s.util.b,
        trial_cost: s.cost.structural.map(|st| st.cost_per_obs * st.n),
    };
    let p = ctx.path("rct_baseline.json");
    export::write_json(
        &p,
        "rct_baseline",
        &RctReport {
            scenario: s.name.clone(),
            baseline,
        },
    )?;
    ctx.wrote(&p);
    ctx.say(format!("V0* = {v0:.5}"));
    ctx.say(format!(
        "c/B = {:.5}",
        if s.util.b > 0.0 {
            s.cost.c / s.util.b
        } else {
            f64::INFINITY
        }
    ));
    Ok(())
}
