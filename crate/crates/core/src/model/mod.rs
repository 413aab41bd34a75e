//! Closed-form quantities: utility kernel, posterior laws, the variance time
//! change, structural-parameter scaling and the fixed-horizon RCT benchmark.

pub mod covariance;
pub mod normal;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Error, Result};
pub use covariance::{Arm, GeneralCovariance, SamplingSwitch};

/// Gaussian prior over the arm means.
///
/// `cov`, when present, is the covariance of `(μ₁/σ₁, −μ₀/σ₀)`; in that case
/// `varrho0` must equal the effect variance it implies (use
/// [`PriorSpec::with_covariance`] to derive it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub m0: f64,
    pub varrho0: f64,
    pub sigma1: f64,
    pub sigma0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<[[f64; 2]; 2]>,
}

impl PriorSpec {
    /// Independent-arm prior; Neyman allocation is optimal from the start.
    pub fn new(m0: f64, varrho0: f64, sigma1: f64, sigma0: f64) -> Result<Self> {
        let p = PriorSpec {
            m0,
            varrho0,
            sigma1,
            sigma0,
            cov: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_covariance(m0: f64, sigma1: f64, sigma0: f64, cov: [[f64; 2]; 2]) -> Result<Self> {
        let p = PriorSpec {
            m0,
            varrho0: covariance::effect_variance(sigma1, sigma0, &cov),
            sigma1,
            sigma0,
            cov: Some(cov),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.m0.is_finite(), "m0", || format!("must be finite, got {}", self.m0))?;
        ensure(self.varrho0 > 0.0 && self.varrho0.is_finite(), "varrho0", || {
            format!("must be positive, got {}", self.varrho0)
        })?;
        ensure(self.sigma1 > 0.0 && self.sigma1.is_finite(), "sigma1", || {
            format!("must be positive, got {}", self.sigma1)
        })?;
        ensure(self.sigma0 > 0.0 && self.sigma0.is_finite(), "sigma0", || {
            format!("must be positive, got {}", self.sigma0)
        })?;
        if let Some(cov) = &self.cov {
            covariance::validate_cov(self.sigma1, self.sigma0, cov)?;
            let implied = covariance::effect_variance(self.sigma1, self.sigma0, cov);
            if (implied - self.varrho0).abs() > 1e-9 * implied.max(1.0) {
                return Err(Error::DegeneratePrior(format!(
                    "varrho0 = {} but the covariance matrix implies {implied}",
                    self.varrho0
                )));
            }
        }
        Ok(())
    }

    /// `σ = σ₁ + σ₀`.
    pub fn sigma(&self) -> f64 {
        self.sigma1 + self.sigma0
    }

    pub fn time_change(&self) -> Result<TimeChange> {
        TimeChange::new(self)
    }
}

/// Payoff parameters of the regulator (Alice) and experimenter (Bob).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySpec {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub gamma: f64,
    pub b: f64,
}

impl UtilitySpec {
    pub fn new(alpha: f64, alpha_prime: f64, gamma: f64, b: f64) -> Result<Self> {
        let u = UtilitySpec {
            alpha,
            alpha_prime,
            gamma,
            b,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha("alpha", self.alpha)?;
        check_alpha("alpha_prime", self.alpha_prime)?;
        ensure(self.gamma >= 0.0 && self.gamma.is_finite(), "gamma", || {
            format!("must be non-negative, got {}", self.gamma)
        })?;
        ensure(self.b >= 0.0 && self.b.is_finite(), "b", || {
            format!("must be non-negative, got {}", self.b)
        })
    }

    /// Regulator payoff `S_α(m)` from stopping at posterior mean `m`.
    #[inline]
    pub fn alice(&self, m: f64) -> f64 {
        s_alpha_raw(m, self.alpha)
    }

    /// Experimenter payoff from stopping at `m`, before sampling costs.
    #[inline]
    pub fn bob(&self, m: f64) -> f64 {
        let approve = if m >= 0.0 { self.b } else { 0.0 };
        approve + self.gamma * s_alpha_raw(m, self.alpha_prime)
    }
}

/// Structural (currency) inputs behind the limit-units cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Structural {
    /// Per-observation cost `C`.
    pub cost_per_obs: f64,
    /// Private approval benefit `B_n`.
    pub approval_benefit: f64,
    pub gamma_n: f64,
    /// Scaling sample size.
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    /// Sampling cost per unit of time, in the same utility units as `B`.
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural: Option<Structural>,
}

impl CostSpec {
    pub fn new(c: f64) -> Result<Self> {
        let out = CostSpec { c, structural: None };
        out.validate()?;
        Ok(out)
    }

    /// Cost derived from structural parameters under the `B = 1` normalization.
    pub fn from_structural(s: Structural) -> Result<Self> {
        let scaled = scale_params(s.cost_per_obs, s.approval_benefit, s.gamma_n, s.n, 1.0)?;
        Ok(CostSpec {
            c: scaled.c,
            structural: Some(s),
        })
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.c > 0.0 && self.c.is_finite(), "c", || {
            format!("must be positive, got {}", self.c)
        })
    }
}

fn check_alpha(name: &'static str, a: f64) -> Result<()> {
    ensure((0.0..=1.0).contains(&a), name, || {
        format!("must lie in [0, 1], got {a}")
    })
}

#[inline]
pub(crate) fn s_alpha_raw(x: f64, alpha: f64) -> f64 {
    x.max(0.0) - (1.0 - alpha) * x
}

/// `S_α(x) = max{x, 0} − (1 − α)x`.
pub fn s_alpha(x: f64, alpha: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    Ok(s_alpha_raw(x, alpha))
}

/// Variance bookkeeping in calendar time `t` and variance-reduction time `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeChange {
    Independent { varrho0: f64, sigma_sq: f64 },
    General(GeneralCovariance),
}

impl TimeChange {
    pub fn new(prior: &PriorSpec) -> Result<Self> {
        prior.validate()?;
        Ok(match &prior.cov {
            None => {
                let s = prior.sigma();
                TimeChange::Independent {
                    varrho0: prior.varrho0,
                    sigma_sq: s * s,
                }
            }
            Some(cov) => TimeChange::General(GeneralCovariance::new(prior.sigma1, prior.sigma0, cov)?),
        })
    }

    pub fn varrho0(&self) -> f64 {
        match self {
            TimeChange::Independent { varrho0, .. } => *varrho0,
            TimeChange::General(g) => g.varrho0(),
        }
    }

    /// `ϱ_t`; no argument checks.
    #[inline]
    pub fn posterior_variance(&self, t: f64) -> f64 {
        match self {
            TimeChange::Independent { varrho0, sigma_sq } => sigma_sq / (sigma_sq / varrho0 + t),
            TimeChange::General(g) => g.posterior_variance(t),
        }
    }

    /// `ψ(t) = ϱ₀ − ϱ_t`.
    #[inline]
    pub fn psi(&self, t: f64) -> f64 {
        match self {
            TimeChange::Independent { varrho0, sigma_sq } => varrho0 * t / (sigma_sq / varrho0 + t),
            TimeChange::General(g) => g.psi(t),
        }
    }

    /// `ς = ψ⁻¹`; returns `+∞` at and beyond `ϱ₀`.
    #[inline]
    pub fn varsigma(&self, rho: f64) -> f64 {
        if rho >= self.varrho0() {
            return f64::INFINITY;
        }
        match self {
            TimeChange::Independent { varrho0, sigma_sq } => rho * sigma_sq / varrho0 / (varrho0 - rho),
            TimeChange::General(g) => g.varsigma(rho),
        }
    }
}

/// Posterior variance of `μ₁ − μ₀` after time `t` of optimal sampling.
pub fn posterior_variance(t: f64, prior: &PriorSpec) -> Result<f64> {
    ensure(t >= 0.0, "t", || format!("must be non-negative, got {t}"))?;
    Ok(prior.time_change()?.posterior_variance(t))
}

/// Share of sampling effort on the treatment arm, `σ₁/(σ₁+σ₀)`.
pub fn neyman_fraction(sigma1: f64, sigma0: f64) -> Result<f64> {
    ensure(sigma1 > 0.0, "sigma1", || format!("must be positive, got {sigma1}"))?;
    ensure(sigma0 > 0.0, "sigma0", || format!("must be positive, got {sigma0}"))?;
    Ok(sigma1 / (sigma1 + sigma0))
}

pub fn time_change_psi(t: f64, prior: &PriorSpec) -> Result<f64> {
    ensure(t >= 0.0, "t", || format!("must be non-negative, got {t}"))?;
    Ok(prior.time_change()?.psi(t))
}

pub fn time_change_inverse(rho: f64, prior: &PriorSpec) -> Result<f64> {
    ensure(rho >= 0.0, "rho", || format!("must be non-negative, got {rho}"))?;
    ensure(rho < prior.varrho0, "rho", || {
        format!("{rho} ≥ varrho0 = {} corresponds to infinite time", prior.varrho0)
    })?;
    Ok(prior.time_change()?.varsigma(rho))
}

/// Limit-experiment parameters implied by structural inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub c_over_b: f64,
    pub gamma_over_c: f64,
    pub c: f64,
    pub b: f64,
    pub gamma: f64,
    pub varrho0: f64,
}

/// Maps currency-valued inputs to limit units with `B` normalized to one:
/// `c/B = nC/B_n`, `γ/c = γ_n/(n^{3/2}C)`, `ϱ₀ = √n ϱ₀,ₙ`.
pub fn scale_params(
    cost_per_obs: f64,
    approval_benefit: f64,
    gamma_n: f64,
    n: f64,
    varrho_0n: f64,
) -> Result<ScaledParams> {
    ensure(cost_per_obs > 0.0, "C", || {
        format!("must be positive, got {cost_per_obs}")
    })?;
    ensure(n >= 1.0, "n", || format!("must be at least 1, got {n}"))?;
    ensure(approval_benefit >= 0.0, "B_n", || {
        format!("must be non-negative, got {approval_benefit}")
    })?;
    ensure(gamma_n >= 0.0, "gamma_n", || {
        format!("must be non-negative, got {gamma_n}")
    })?;
    ensure(varrho_0n > 0.0, "varrho_0n", || {
        format!("must be positive, got {varrho_0n}")
    })?;
    if approval_benefit == 0.0 {
        return Err(Error::NormalizationConflict(
            "B_n = 0 cannot be normalized to B = 1; supply c directly".into(),
        ));
    }
    let c_over_b = n * cost_per_obs / approval_benefit;
    let gamma_over_c = gamma_n / (n.powf(1.5) * cost_per_obs);
    Ok(ScaledParams {
        c_over_b,
        gamma_over_c,
        c: c_over_b,
        b: 1.0,
        gamma: gamma_over_c * c_over_b,
        varrho0: n.sqrt() * varrho_0n,
    })
}

/// `E[S_α(X)]` for `X ~ N(mean, sd²)`.
pub fn expected_s_alpha_gaussian(mean: f64, sd: f64, alpha: f64) -> f64 {
    if sd <= 0.0 {
        return s_alpha_raw(mean, alpha);
    }
    let z = mean / sd;
    mean * normal::cdf(z) + sd * normal::pdf(z) - (1.0 - alpha) * mean
}

/// Regulator welfare of a fixed-horizon trial stopped at `t = 1`.
pub fn rct_welfare(m0: f64, prior: &PriorSpec, alpha: f64) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    ensure(m0.is_finite(), "m0", || format!("must be finite, got {m0}"))?;
    let nu = prior.time_change()?.psi(1.0).sqrt();
    Ok(expected_s_alpha_gaussian(m0, nu, alpha))
}

/// Switch point of the optimal schedule under a general prior covariance.
pub fn general_cov_t_star(prior: &PriorSpec) -> Result<SamplingSwitch> {
    let cov = prior
        .cov
        .as_ref()
        .ok_or_else(|| invalid("cov", "general_cov_t_star needs a covariance matrix"))?;
    prior.validate()?;
    Ok(GeneralCovariance::new(prior.sigma1, prior.sigma0, cov)?.switch())
}
