//! Backward induction on a binomial lattice in variance-reduction time.
//!
//! In `ρ = ψ(t)` the posterior mean is a standard Brownian motion, so one
//! lattice step moves `ρ` by `Δρ` and `m` by `±√Δρ` with equal probability.
//! The value of the Lagrangian stopping problem satisfies
//!
//! ```text
//! V(ρ, m) = max{ B·1{m ≥ 0} + κ S_α(m),
//!                ½V(ρ+Δρ, m+Δm) + ½V(ρ+Δρ, m−Δm) − c (ς(ρ+Δρ) − ς(ρ)) }
//! ```
//!
//! with `κ = λ + γ`. The stop payoff differs across `α` only by a term
//! linear in `m`, which is a martingale, so the boundaries do not depend on
//! `α`; the solver uses `α = ½` unless told otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::model::{s_alpha_raw, CostSpec, PriorSpec, TimeChange, UtilitySpec};

/// Relative slack under which stop and continuation count as tied.
const TIE_EPS: f64 = 1e-12;
const MAX_ESCALATIONS: usize = 4;

/// Lattice geometry. `delta_m = √delta_rho` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub delta_rho: f64,
    pub delta_m: f64,
    pub m_bar: f64,
    pub rho_max: f64,
}

impl GridSpec {
    pub fn new(delta_rho: f64, m_bar: f64, rho_max: f64) -> Result<Self> {
        ensure(delta_rho > 0.0 && delta_rho.is_finite(), "delta_rho", || {
            format!("must be positive, got {delta_rho}")
        })?;
        let delta_m = delta_rho.sqrt();
        ensure(m_bar >= 10.0 * delta_m, "m_bar", || {
            format!("{m_bar} is below ten m-steps ({})", 10.0 * delta_m)
        })?;
        ensure(rho_max > delta_rho && rho_max.is_finite(), "rho_max", || {
            format!("must exceed one ρ-step, got {rho_max}")
        })?;
        Ok(GridSpec {
            delta_rho,
            delta_m,
            m_bar,
            rho_max,
        })
    }

    /// `rho_steps` steps across `[0, ϱ₀]`, `m_bar = m_bar_sds·√ϱ₀`, last row at
    /// `rho_max_frac·ϱ₀`.
    pub fn with_resolution(varrho0: f64, rho_steps: usize, m_bar_sds: f64, rho_max_frac: f64) -> Result<Self> {
        ensure(rho_steps >= 4, "rho_steps", || {
            format!("need at least 4, got {rho_steps}")
        })?;
        ensure(rho_max_frac > 0.0 && rho_max_frac < 1.0, "rho_max_frac", || {
            format!("must lie in (0, 1), got {rho_max_frac}")
        })?;
        GridSpec::new(
            varrho0 / rho_steps as f64,
            m_bar_sds * varrho0.sqrt(),
            rho_max_frac * varrho0,
        )
    }

    /// `Δρ = ϱ₀/4000`, `m̄ = 6√ϱ₀`, `ρ_max = 0.999ϱ₀`.
    pub fn for_prior(varrho0: f64) -> Result<Self> {
        GridSpec::with_resolution(varrho0, 4000, 6.0, 0.999)
    }

    pub fn check_against(&self, varrho0: f64) -> Result<()> {
        ensure(self.rho_max < varrho0, "rho_max", || {
            format!("{} must be below varrho0 = {varrho0}", self.rho_max)
        })?;
        ensure(
            (self.delta_m - self.delta_rho.sqrt()).abs() <= 1e-12 * self.delta_m,
            "delta_m",
            || format!("{} must equal √delta_rho = {}", self.delta_m, self.delta_rho.sqrt()),
        )
    }

    /// Index of the last ρ-row.
    pub fn last_row(&self) -> usize {
        // small tolerance so that rho_max = kΔρ lands on row k
        ((self.rho_max / self.delta_rho) * (1.0 + 1e-12)).floor() as usize
    }

    /// Half-width of the m-lattice in steps.
    pub fn half_width(&self) -> usize {
        (self.m_bar / self.delta_m).ceil() as usize
    }
}

/// Full value table `V(ρ_i, m_j)`, row-major in `i`, `j ∈ [−J, J]`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub grid: GridSpec,
    pub lambda: f64,
    pub b: f64,
    pub gamma: f64,
    pub c: f64,
    /// Error-asymmetry used in the stop payoff.
    pub alpha: f64,
    pub half_width: usize,
    pub rho: Vec<f64>,
    pub t: Vec<f64>,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn rows(&self) -> usize {
        self.rho.len()
    }

    pub fn width(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn m(&self, j: isize) -> f64 {
        j as f64 * self.grid.delta_m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    /// `V(ρ_i, jΔm)`.
    pub fn value(&self, i: usize, j: isize) -> f64 {
        self.row(i)[(j + self.half_width as isize) as usize]
    }

    pub fn stop_payoff(&self, m: f64) -> f64 {
        let approve = if m >= 0.0 { self.b } else { 0.0 };
        approve + (self.lambda + self.gamma) * s_alpha_raw(m, self.alpha)
    }

    /// Continuation value at an interior cell; `None` on the terminal row and edges.
    pub fn continuation(&self, i: usize, j: isize) -> Option<f64> {
        if i + 1 >= self.rows() || j.unsigned_abs() >= self.half_width {
            return None;
        }
        let dt = self.t[i + 1] - self.t[i];
        Some(0.5 * (self.value(i + 1, j + 1) + self.value(i + 1, j - 1)) - self.c * dt)
    }

    /// Whether stopping is optimal at `(ρ_i, jΔm)`, ties resolved towards stopping.
    pub fn stops(&self, i: usize, j: isize) -> bool {
        match self.continuation(i, j) {
            None => true,
            Some(cont) => self.stop_payoff(self.m(j)) >= cont - TIE_EPS * cont.abs().max(1.0),
        }
    }
}

/// Discretised stopping boundaries and the parameters that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundarySolution {
    pub rho_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    /// First time from which `b⁺ = 0`; `None` when it is never reached.
    pub t_star: Option<f64>,
    pub lambda: f64,
    pub b: f64,
    pub gamma: f64,
    pub c: f64,
    pub grid: GridSpec,
    pub prior: PriorSpec,
    /// m-grid half-widths tried before this one succeeded.
    #[serde(default)]
    pub escalations: Vec<f64>,
    #[serde(skip)]
    pub value_table: Option<ValueTable>,
}

/// Fills the value table with the stop payoff written under `α = ½`.
pub fn solve_value(
    prior: &PriorSpec,
    util: &UtilitySpec,
    lambda: f64,
    cost: &CostSpec,
    grid: &GridSpec,
) -> Result<ValueTable> {
    solve_value_with_alpha(prior, util, lambda, cost, grid, 0.5)
}

/// As [`solve_value`] with an explicit `α` in the stop payoff.
pub fn solve_value_with_alpha(
    prior: &PriorSpec,
    util: &UtilitySpec,
    lambda: f64,
    cost: &CostSpec,
    grid: &GridSpec,
    alpha: f64,
) -> Result<ValueTable> {
    util.validate()?;
    cost.validate()?;
    ensure(lambda >= 0.0 && lambda.is_finite(), "lambda", || {
        format!("must be non-negative, got {lambda}")
    })?;
    ensure((0.0..=1.0).contains(&alpha), "alpha", || {
        format!("must lie in [0, 1], got {alpha}")
    })?;
    let tc = prior.time_change()?;
    grid.check_against(tc.varrho0())?;

    let n_last = grid.last_row();
    let half = grid.half_width();
    let w = 2 * half + 1;
    let rho: Vec<f64> = (0..=n_last).map(|i| i as f64 * grid.delta_rho).collect();
    let t: Vec<f64> = rho.iter().map(|&r| tc.varsigma(r)).collect();

    let mut table = ValueTable {
        grid: *grid,
        lambda,
        b: util.b,
        gamma: util.gamma,
        c: cost.c,
        alpha,
        half_width: half,
        rho,
        t,
        values: vec![0.0; (n_last + 1) * w],
    };
    let stop: Vec<f64> = (0..w)
        .map(|k| table.stop_payoff((k as isize - half as isize) as f64 * grid.delta_m))
        .collect();

    table.values[n_last * w..].copy_from_slice(&stop);
    for i in (0..n_last).rev() {
        let step_cost = cost.c * (table.t[i + 1] - table.t[i]);
        let (head, tail) = table.values.split_at_mut((i + 1) * w);
        let next = &tail[..w];
        let cur = &mut head[i * w..];
        cur[0] = stop[0];
        cur[w - 1] = stop[w - 1];
        for k in 1..w - 1 {
            let cont = 0.5 * (next[k + 1] + next[k - 1]) - step_cost;
            cur[k] = stop[k].max(cont);
        }
    }
    Ok(table)
}

/// Reads `b⁺` and `b⁻` off a value table row by row.
pub fn extract_boundaries(table: &ValueTable, prior: &PriorSpec) -> Result<BoundarySolution> {
    let half = table.half_width as isize;
    let dm = table.grid.delta_m;
    let n = table.rows();
    let mut b_plus = Vec::with_capacity(n);
    let mut b_minus = Vec::with_capacity(n);
    for i in 0..n {
        let jp = (0..=half).find(|&j| table.stops(i, j)).unwrap_or(half);
        let jm = (-half..0).rev().find(|&j| table.stops(i, j)).unwrap_or(-half);
        if jp >= half || jm <= -half {
            return Err(Error::GridTooNarrow {
                attempted: vec![table.grid.m_bar],
            });
        }
        b_plus.push(jp as f64 * dm);
        b_minus.push(jm as f64 * dm);
    }
    for i in 1..n {
        if b_plus[i] > b_plus[i - 1] + dm * 1.5 || b_minus[i] < b_minus[i - 1] - dm * 1.5 {
            return Err(Error::GridResolution {
                row: i,
                detail: format!(
                    "b⁺ {} → {}, b⁻ {} → {}",
                    b_plus[i - 1],
                    b_plus[i],
                    b_minus[i - 1],
                    b_minus[i]
                ),
            });
        }
    }
    let mut sol = BoundarySolution {
        rho_grid: table.rho.clone(),
        t_grid: table.t.clone(),
        b_plus,
        b_minus,
        t_star: None,
        lambda: table.lambda,
        b: table.b,
        gamma: table.gamma,
        c: table.c,
        grid: table.grid,
        prior: *prior,
        escalations: Vec::new(),
        value_table: None,
    };
    sol.t_star = truncation_row(&sol).map(|i| sol.t_grid[i]);
    Ok(sol)
}

/// First row from which `b⁺` stays at zero, excluding the forced terminal row.
fn truncation_row(sol: &BoundarySolution) -> Option<usize> {
    if sol.b <= 0.0 {
        return None;
    }
    let last = sol.b_plus.len() - 1;
    let mut row = last;
    while row > 0 && sol.b_plus[row - 1] == 0.0 {
        row -= 1;
    }
    (row < last).then_some(row)
}

/// Solves and extracts, widening the m-grid by 1.5× whenever the stopping
/// region reaches its edge.
pub fn solve_boundaries(
    prior: &PriorSpec,
    util: &UtilitySpec,
    lambda: f64,
    cost: &CostSpec,
    grid: &GridSpec,
    keep_values: bool,
) -> Result<BoundarySolution> {
    let mut grid = *grid;
    let mut attempted = Vec::new();
    loop {
        let table = solve_value(prior, util, lambda, cost, &grid)?;
        match extract_boundaries(&table, prior) {
            Ok(mut sol) => {
                sol.escalations = attempted;
                if keep_values {
                    sol.value_table = Some(table);
                }
                return Ok(sol);
            }
            Err(Error::GridTooNarrow { .. }) => {
                attempted.push(grid.m_bar);
                if attempted.len() > MAX_ESCALATIONS {
                    return Err(Error::GridTooNarrow { attempted });
                }
                grid.m_bar *= 1.5;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Truncation time together with checks of the lower boundary there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// `None` means the approval boundary never reaches zero.
    pub t_star: Option<f64>,
    pub b_minus_at_t_star: Option<f64>,
    /// `−B/κ` with `κ = λ + γ`.
    pub predicted_b_minus: Option<f64>,
    /// `|b⁻(t*) + B/κ|` in m-grid cells.
    pub cells_off: Option<f64>,
    /// Whether `b⁺ = 0` on every row where `b⁻ ≥ −2B/κ`, the level at which
    /// rejecting pays the same as approving at zero under `α = ½`.
    pub zero_beyond_reflection: bool,
}

pub fn find_t_star(sol: &BoundarySolution) -> TruncationReport {
    let kappa = sol.lambda + sol.gamma;
    let mut report = TruncationReport {
        t_star: None,
        b_minus_at_t_star: None,
        predicted_b_minus: None,
        cells_off: None,
        zero_beyond_reflection: true,
    };
    if sol.b <= 0.0 {
        return report;
    }
    if kappa == 0.0 {
        report.t_star = Some(0.0);
        report.b_minus_at_t_star = Some(sol.b_minus[0]);
        report.predicted_b_minus = Some(f64::NEG_INFINITY);
        report.zero_beyond_reflection = sol.b_plus.iter().all(|&b| b == 0.0);
        return report;
    }
    let predicted = -sol.b / kappa;
    let reflection = 2.0 * predicted;
    report.predicted_b_minus = Some(predicted);
    // one cell of slack for the lattice placement of b⁻
    report.zero_beyond_reflection = sol
        .b_minus
        .iter()
        .zip(&sol.b_plus)
        .all(|(&lo, &hi)| lo < reflection + sol.grid.delta_m || hi == 0.0);
    if let Some(i) = truncation_row(sol) {
        report.t_star = Some(sol.t_grid[i]);
        report.b_minus_at_t_star = Some(sol.b_minus[i]);
        report.cells_off = Some((sol.b_minus[i] - predicted).abs() / sol.grid.delta_m);
    }
    report
}

impl BoundarySolution {
    /// Boundaries `(b⁻, b⁺)` at variance reduction `rho`, linear between rows
    /// and flat beyond the last row.
    pub fn at_rho(&self, rho: f64) -> (f64, f64) {
        let last = self.rho_grid.len() - 1;
        let x = (rho / self.grid.delta_rho).max(0.0);
        let i = x.floor() as usize;
        if i >= last {
            return (self.b_minus[last], self.b_plus[last]);
        }
        let f = x - i as f64;
        (
            self.b_minus[i] + f * (self.b_minus[i + 1] - self.b_minus[i]),
            self.b_plus[i] + f * (self.b_plus[i + 1] - self.b_plus[i]),
        )
    }

    /// Boundaries at calendar time `t`.
    pub fn at_t(&self, t: f64) -> Result<(f64, f64)> {
        Ok(self.at_rho(self.prior.time_change()?.psi(t)))
    }

    pub fn rho_max(&self) -> f64 {
        *self.rho_grid.last().expect("non-empty grid")
    }

    pub fn time_change(&self) -> Result<TimeChange> {
        self.prior.time_change()
    }

    /// Fails unless `prior` has the same variance structure as the solution.
    pub fn check_prior(&self, prior: &PriorSpec) -> Result<()> {
        let a = &self.prior;
        let same = (a.varrho0 - prior.varrho0).abs() <= 1e-12 * a.varrho0
            && (a.sigma() - prior.sigma()).abs() <= 1e-12 * a.sigma()
            && a.cov == prior.cov;
        if same {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "solution built for varrho0 = {}, σ = {} but prior has varrho0 = {}, σ = {}",
                a.varrho0,
                a.sigma(),
                prior.varrho0,
                prior.sigma()
            )))
        }
    }
}

/// Exact expectations of the lattice walk stopped at the extracted boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeOutcome {
    pub welfare_alice: f64,
    pub mean_tau: f64,
    pub approval_rate: f64,
    pub mean_m_tau: f64,
}

/// Propagates probability mass forward from the lattice point nearest `m0`.
pub fn lattice_outcome(sol: &BoundarySolution, alpha: f64) -> LatticeOutcome {
    let dm = sol.grid.delta_m;
    let n = sol.rho_grid.len();
    let jp: Vec<i64> = sol.b_plus.iter().map(|b| (b / dm).round() as i64).collect();
    let jm: Vec<i64> = sol.b_minus.iter().map(|b| (b / dm).round() as i64).collect();
    let half = jm.iter().chain(&jp).map(|j| j.abs()).max().unwrap_or(1) + 2;
    let w = (2 * half + 1) as usize;
    let j0 = (sol.prior.m0 / dm).round() as i64;
    let mut out = LatticeOutcome {
        welfare_alice: 0.0,
        mean_tau: 0.0,
        approval_rate: 0.0,
        mean_m_tau: 0.0,
    };
    let absorb = |mass: f64, j: i64, t: f64, out: &mut LatticeOutcome| {
        let m = j as f64 * dm;
        out.welfare_alice += mass * s_alpha_raw(m, alpha);
        out.mean_tau += mass * t;
        out.mean_m_tau += mass * m;
        if m >= 0.0 {
            out.approval_rate += mass;
        }
    };
    if j0 >= jp[0] || j0 <= jm[0] || j0.abs() >= half {
        absorb(1.0, j0, 0.0, &mut out);
        return out;
    }
    let mut cur = vec![0.0; w];
    let mut next = vec![0.0; w];
    cur[(j0 + half) as usize] = 1.0;
    for i in 1..n {
        next.iter_mut().for_each(|v| *v = 0.0);
        for k in 1..w - 1 {
            let p = cur[k];
            if p != 0.0 {
                next[k - 1] += 0.5 * p;
                next[k + 1] += 0.5 * p;
            }
        }
        let t = sol.t_grid[i];
        for (k, p) in next.iter_mut().enumerate() {
            if *p == 0.0 {
                continue;
            }
            let j = k as i64 - half;
            if i == n - 1 || j >= jp[i] || j <= jm[i] {
                absorb(*p, j, t, &mut out);
                *p = 0.0;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prior(v: f64) -> PriorSpec {
        PriorSpec::new(0.0, v, 0.5, 0.5).unwrap()
    }

    fn util(b: f64) -> UtilitySpec {
        UtilitySpec::new(1.0, 1.0, 0.0, b).unwrap()
    }

    fn coarse(v: f64) -> GridSpec {
        GridSpec::with_resolution(v, 800, 6.0, 0.999).unwrap()
    }

    #[test]
    fn grid_enforces_coupling() {
        let g = GridSpec::for_prior(9.7344).unwrap();
        assert!((g.delta_m * g.delta_m - g.delta_rho).abs() < 1e-15);
        assert_eq!(g.last_row(), 3996);
        assert!(GridSpec::new(0.01, 0.5, 1.0).is_err());
        assert!(GridSpec::new(-0.01, 5.0, 1.0).is_err());
        assert!(g.check_against(9.0).is_err());
    }

    #[test]
    fn terminal_row_is_stop_payoff() {
        let p = prior(2.0);
        let t = solve_value(&p, &util(1.0), 0.7, &CostSpec::new(0.3).unwrap(), &coarse(2.0)).unwrap();
        let last = t.rows() - 1;
        for j in -(t.half_width as isize)..=t.half_width as isize {
            let m = t.m(j);
            let want = if m >= 0.0 { 1.0 } else { 0.0 } + 0.7 * 0.5 * m.abs();
            assert!((t.value(last, j) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_lambda_stops_at_nonnegative_mean() {
        let p = prior(2.0);
        let sol = solve_boundaries(&p, &util(1.0), 0.0, &CostSpec::new(0.3).unwrap(), &coarse(2.0), true).unwrap();
        assert!(sol.b_plus.iter().all(|&b| b == 0.0));
        assert_eq!(sol.t_star, Some(0.0));
        let r = find_t_star(&sol);
        assert_eq!(r.t_star, Some(0.0));
        assert!(r.zero_beyond_reflection);
    }

    #[test]
    fn expensive_sampling_stops_everywhere() {
        let p = prior(1.0);
        let g = GridSpec::new(0.01, 1.0, 0.03).unwrap();
        let t = solve_value(&p, &util(0.0), 1.0, &CostSpec::new(1e3).unwrap(), &g).unwrap();
        assert_eq!(t.rows(), 4);
        for i in 0..t.rows() {
            for j in -(t.half_width as isize)..=t.half_width as isize {
                assert_eq!(t.value(i, j), t.stop_payoff(t.m(j)));
            }
        }
    }

    #[test]
    fn welfare_only_boundaries_are_symmetric() {
        let p = prior(9.7344);
        let sol = solve_boundaries(
            &p,
            &util(0.0),
            1.0,
            &CostSpec::new(7.98).unwrap(),
            &coarse(9.7344),
            false,
        )
        .unwrap();
        let dm = sol.grid.delta_m;
        for (bp, bm) in sol.b_plus.iter().zip(&sol.b_minus) {
            assert!((bp + bm).abs() <= 2.0 * dm + 1e-12, "{bp} vs {bm}");
        }
        assert_eq!(find_t_star(&sol).t_star, None);
    }

    #[test]
    fn narrow_grid_escalates_then_gives_up() {
        let p = prior(4.0);
        let c = CostSpec::new(1e-3).unwrap();
        let g = GridSpec::with_resolution(4.0, 400, 1.0, 0.99).unwrap();
        let sol = solve_boundaries(&p, &util(1.0), 1.0, &c, &g, false).unwrap();
        assert!(!sol.escalations.is_empty());
        let tiny = GridSpec::with_resolution(4.0, 400, 0.5, 0.99).unwrap();
        match solve_boundaries(&p, &util(1.0), 1.0, &CostSpec::new(1e-9).unwrap(), &tiny, false) {
            Err(Error::GridTooNarrow { attempted }) => assert_eq!(attempted.len(), MAX_ESCALATIONS + 1),
            other => panic!("expected GridTooNarrow, got {other:?}"),
        }
    }

    #[test]
    fn interpolation_is_linear_between_rows() {
        let p = prior(2.0);
        let sol = solve_boundaries(&p, &util(1.0), 2.0, &CostSpec::new(0.3).unwrap(), &coarse(2.0), false).unwrap();
        let r = 10.5 * sol.grid.delta_rho;
        let (lo, hi) = sol.at_rho(r);
        assert!((hi - 0.5 * (sol.b_plus[10] + sol.b_plus[11])).abs() < 1e-12);
        assert!((lo - 0.5 * (sol.b_minus[10] + sol.b_minus[11])).abs() < 1e-12);
        let (lo, hi) = sol.at_rho(1e9);
        assert_eq!((lo, hi), (*sol.b_minus.last().unwrap(), *sol.b_plus.last().unwrap()));
    }

    #[test]
    fn lattice_outcome_is_a_martingale() {
        let p = PriorSpec::new(0.2, 3.0, 0.5, 0.5).unwrap();
        let g = GridSpec::with_resolution(3.0, 1600, 6.0, 0.999).unwrap();
        let sol = solve_boundaries(&p, &util(1.0), 1.5, &CostSpec::new(0.4).unwrap(), &g, true).unwrap();
        let out = lattice_outcome(&sol, 1.0);
        let j0 = (0.2 / g.delta_m).round();
        assert!((out.mean_m_tau - j0 * g.delta_m).abs() < 1e-9, "{}", out.mean_m_tau);
        assert!((0.0..=1.0).contains(&out.approval_rate));
    }

    #[test]
    fn lattice_welfare_matches_root_value() {
        // V(0, m0) = B·P(approve) + κE[S_½(m_τ)] − cE[τ] when started on the lattice
        let p = prior(3.0);
        let g = GridSpec::with_resolution(3.0, 1600, 6.0, 0.999).unwrap();
        let (b, lam, c) = (1.0, 1.5, 0.4);
        let sol = solve_boundaries(&p, &util(b), lam, &CostSpec::new(c).unwrap(), &g, true).unwrap();
        let out = lattice_outcome(&sol, 0.5);
        let v = sol.value_table.as_ref().unwrap().value(0, 0);
        let recon = b * out.approval_rate + lam * out.welfare_alice - c * out.mean_tau;
        assert!((v - recon).abs() < 1e-9, "{v} vs {recon}");
    }

    /// Exhaustive search over every stopping set on a small tree.
    ///
    /// Nodes `(i, j)` with `i < depth` and `j ∈ {−i, −i+2, …, i}` may stop or
    /// continue; row `depth` always stops. Returns the best expected payoff
    /// from the root.
    fn brute_force(depth: usize, stop: impl Fn(f64) -> f64, cost: &[f64], dm: f64) -> f64 {
        let nodes: Vec<(usize, i64)> = (0..depth)
            .flat_map(|i| (0..=i).map(move |k| (i, 2 * k as i64 - i as i64)))
            .collect();
        let index = |i: usize, j: i64| nodes.iter().position(|&n| n == (i, j)).unwrap();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u64..(1 << nodes.len()) {
            let mut total = 0.0;
            for path in 0u64..(1 << depth) {
                let (mut j, mut paid) = (0i64, 0.0);
                let mut i = 0;
                loop {
                    if i == depth || mask >> index(i, j) & 1 == 1 {
                        total += stop(j as f64 * dm) - paid;
                        break;
                    }
                    paid += cost[i];
                    j += if path >> i & 1 == 1 { 1 } else { -1 };
                    i += 1;
                }
            }
            best = best.max(total / (1u64 << depth) as f64);
        }
        best
    }

    #[test]
    fn six_level_tree_matches_exhaustive_search() {
        let depth = 5; // rows 0..=5, six levels
        let v = 2.0;
        let p = prior(v);
        let g = GridSpec::new(0.05, 10.0 * 0.05f64.sqrt(), depth as f64 * 0.05).unwrap();
        for (b, lam, c) in [(1.0, 2.0, 0.05), (0.0, 1.0, 0.01), (1.0, 0.3, 0.5), (0.5, 4.0, 0.002)] {
            let t = solve_value(&p, &util(b), lam, &CostSpec::new(c).unwrap(), &g).unwrap();
            assert_eq!(t.rows(), depth + 1);
            // ς(ρ) = ρσ²ϱ₀⁻¹/(ϱ₀ − ρ) with σ = 1
            let vs = |r: f64| r / v / (v - r);
            let cost: Vec<f64> = (0..depth)
                .map(|i| c * (vs((i + 1) as f64 * 0.05) - vs(i as f64 * 0.05)))
                .collect();
            let stop = |m: f64| if m >= 0.0 { b } else { 0.0 } + lam * 0.5 * m.abs();
            let want = brute_force(depth, stop, &cost, g.delta_m);
            let got = t.value(0, 0);
            assert!((got - want).abs() < 1e-12, "B={b} λ={lam} c={c}: {got} vs {want}");
        }
    }

    fn random_case() -> impl Strategy<Value = (f64, f64, f64, f64)> {
        // (λ, B, c, ϱ₀)
        (0.2f64..5.0, 0.1f64..2.0, 0.05f64..2.0, 1.0f64..12.0)
    }

    fn solve_case(lam: f64, b: f64, c: f64, v: f64, alpha: f64) -> (ValueTable, BoundarySolution) {
        let p = prior(v);
        let g = GridSpec::with_resolution(v, 400, 6.0, 0.999).unwrap();
        let t = solve_value_with_alpha(&p, &util(b), lam, &CostSpec::new(c).unwrap(), &g, alpha).unwrap();
        let s = extract_boundaries(&t, &p).unwrap();
        (t, s)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn value_table_shape((lam, b, c, v) in random_case()) {
            let (t, _) = solve_case(lam, b, c, v, 0.5);
            let h = t.half_width as isize;
            for i in 0..t.rows() {
                for j in -h..=h {
                    let val = t.value(i, j);
                    prop_assert!(val >= t.stop_payoff(t.m(j)) - 1e-12);
                    if i + 1 < t.rows() {
                        prop_assert!(val >= t.value(i + 1, j) - 1e-9, "not decreasing in ρ at ({}, {})", i, j);
                    }
                    let excess = |j: isize| t.value(i, j) - lam * 0.5 * t.m(j).abs();
                    if j >= 0 && j < h {
                        prop_assert!(excess(j + 1) <= excess(j) + 1e-9);
                    }
                    if j < 0 && j > -h {
                        prop_assert!(excess(j - 1) <= excess(j) + 1e-9);
                    }
                }
            }
        }

        #[test]
        fn alpha_does_not_move_boundaries((lam, b, c, v) in random_case()) {
            let (_, half) = solve_case(lam, b, c, v, 0.5);
            let (_, one) = solve_case(lam, b, c, v, 1.0);
            prop_assert_eq!(&half.b_plus, &one.b_plus);
            prop_assert_eq!(&half.b_minus, &one.b_minus);
        }

        #[test]
        fn value_decreases_with_cost((lam, b, c, v) in random_case()) {
            let (lo, _) = solve_case(lam, b, c, v, 0.5);
            let (hi, _) = solve_case(lam, b, c * 1.5, v, 0.5);
            for i in (0..lo.rows()).step_by(37) {
                for (a, z) in lo.row(i).iter().zip(hi.row(i)) {
                    prop_assert!(z <= &(a + 1e-12));
                }
            }
        }

        #[test]
        fn approval_boundary_vanishes_past_reflection((lam, b, c, v) in random_case()) {
            let (_, s) = solve_case(lam, b, c, v, 0.5);
            prop_assert!(find_t_star(&s).zero_beyond_reflection);
        }

        #[test]
        fn b_minus_is_lipschitz((lam, b, c, v) in random_case()) {
            let (_, s) = solve_case(lam, b, c, v, 0.5);
            let l = 2.0 * v * s.b_minus[0].abs();
            let dm = s.grid.delta_m;
            let last = s.t_grid.len() - 1;
            for i in 1..last {
                let dt = s.t_grid[i] - s.t_grid[i - 1];
                let db = (s.b_minus[i] - s.b_minus[i - 1]).abs();
                prop_assert!(db <= l * dt + 2.0 * dm, "row {}: Δb={} LΔt={}", i, db, l * dt);
            }
        }
    }
}
