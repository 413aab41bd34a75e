//! Optimal sampling under a correlated (or unbalanced) Gaussian prior.
//!
//! The prior is given over the transformed means `(μ₁/σ₁, −μ₀/σ₀)` with
//! covariance `Σ̃`. The effect `μ₁ − μ₀` is `wᵀμ̃` with `w = (σ₁, σ₀)`, and
//! sampling arm `a` for `q` units adds precision `q` to coordinate `a`.
//!
//! The variance-minimising schedule samples one arm exclusively until a
//! switch time `t*`, then follows the Neyman split. Internally the arms are
//! relabelled as *first* (sampled alone before `t*`) and *second*.
//!
//! With `Σ̃` the covariance matrix of `μ̃`,
//!
//! ```text
//! cov_a = σ_a (Σ̃_aa − Σ̃_01)
//! t*    = (cov_first − cov_second) / (σ_second · det Σ̃)
//! ϱ_t   = (ϱ₀ + σ_second² det Σ̃ · t) / (1 + Σ̃_ff t)            t ≤ t*
//! ϱ_t   = σ² / (1ᵀΣ̃⁻¹1 + t)                                     t > t*
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Treatment,
    Control,
}

impl Arm {
    pub fn index(self) -> usize {
        match self {
            Arm::Treatment => 1,
            Arm::Control => 0,
        }
    }
}

/// Switch point of the optimal sampling schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSwitch {
    /// Arm sampled exclusively on `[0, t_star]`.
    pub first_arm: Arm,
    pub t_star: f64,
}

/// Pre-computed quantities for the two-phase schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralCovariance {
    pub first_arm: Arm,
    sigma_sq: f64,
    sigma_second: f64,
    s_ff: f64,
    det: f64,
    varrho0: f64,
    /// Squared covariance between the effect and the first coordinate.
    k_sq: f64,
    /// `1ᵀ Σ̃⁻¹ 1`
    sum_precision: f64,
    t_star: f64,
    rho_star: f64,
}

/// Covariance weights `(cov₁, cov₀)` in the original arm labelling.
pub fn cov_weights(sigma1: f64, sigma0: f64, cov: &[[f64; 2]; 2]) -> (f64, f64) {
    // index 0 of the matrix is the treatment coordinate μ₁/σ₁
    let s11 = cov[0][0];
    let s00 = cov[1][1];
    let s01 = cov[0][1];
    (sigma1 * (s11 - s01), sigma0 * (s00 - s01))
}

/// Prior variance of `μ₁ − μ₀` implied by `Σ̃`.
pub fn effect_variance(sigma1: f64, sigma0: f64, cov: &[[f64; 2]; 2]) -> f64 {
    sigma1 * sigma1 * cov[0][0] + sigma0 * sigma0 * cov[1][1] + 2.0 * sigma0 * sigma1 * cov[0][1]
}

pub(crate) fn validate_cov(sigma1: f64, sigma0: f64, cov: &[[f64; 2]; 2]) -> Result<()> {
    let bad = |msg: String| Err(Error::DegeneratePrior(msg));
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return bad("covariance entries must be finite".into());
    }
    if (cov[0][1] - cov[1][0]).abs() > 1e-12 * (1.0 + cov[0][1].abs()) {
        return bad(format!("Σ̃ is not symmetric: {} vs {}", cov[0][1], cov[1][0]));
    }
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    if cov[0][0] < 0.0 || cov[1][1] < 0.0 || det < 0.0 {
        return bad("Σ̃ is not positive semi-definite".into());
    }
    if det <= 0.0 {
        return bad("Σ̃ is singular (det = 0)".into());
    }
    let (c1, c0) = cov_weights(sigma1, sigma0, cov);
    if c1 + c0 < 0.0 {
        return bad(format!("cov₁ + cov₀ = {} must be non-negative", c1 + c0));
    }
    Ok(())
}

impl GeneralCovariance {
    pub fn new(sigma1: f64, sigma0: f64, cov: &[[f64; 2]; 2]) -> Result<Self> {
        validate_cov(sigma1, sigma0, cov)?;
        let (c1, c0) = cov_weights(sigma1, sigma0, cov);
        let s01 = cov[0][1];
        // relabel so that the first arm carries the larger weight
        let (first_arm, sf, ss, s_ff, s_ss, c_first, c_second) = if c1 >= c0 {
            (Arm::Treatment, sigma1, sigma0, cov[0][0], cov[1][1], c1, c0)
        } else {
            (Arm::Control, sigma0, sigma1, cov[1][1], cov[0][0], c0, c1)
        };
        let det = s_ff * s_ss - s01 * s01;
        let varrho0 = effect_variance(sigma1, sigma0, cov);
        let k = sf * s_ff + ss * s01;
        let sigma = sigma1 + sigma0;
        let t_star = ((c_first - c_second) / (ss * det)).max(0.0);
        let mut out = GeneralCovariance {
            first_arm,
            sigma_sq: sigma * sigma,
            sigma_second: ss,
            s_ff,
            det,
            varrho0,
            k_sq: k * k,
            sum_precision: (s_ff + s_ss - 2.0 * s01) / det,
            t_star,
            rho_star: 0.0,
        };
        out.rho_star = out.varrho0 - out.posterior_variance(t_star);
        Ok(out)
    }

    pub fn switch(&self) -> SamplingSwitch {
        SamplingSwitch {
            first_arm: self.first_arm,
            t_star: self.t_star,
        }
    }

    pub fn varrho0(&self) -> f64 {
        self.varrho0
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    /// `ψ(t*)`, the variance reduction at the switch.
    pub fn rho_star(&self) -> f64 {
        self.rho_star
    }

    pub fn posterior_variance(&self, t: f64) -> f64 {
        if t <= self.t_star {
            self.single_arm_variance(t)
        } else {
            self.neyman_variance(t)
        }
    }

    /// Variance after sampling only the first arm for time `t`.
    pub fn single_arm_variance(&self, t: f64) -> f64 {
        (self.varrho0 + self.sigma_second * self.sigma_second * self.det * t) / (1.0 + self.s_ff * t)
    }

    /// Second-phase branch, `σ² / (1ᵀΣ̃⁻¹1 + t)`.
    pub fn neyman_variance(&self, t: f64) -> f64 {
        self.sigma_sq / (self.sum_precision + t)
    }

    pub fn psi(&self, t: f64) -> f64 {
        if t <= self.t_star {
            t * self.k_sq / (1.0 + self.s_ff * t)
        } else {
            self.varrho0 - self.neyman_variance(t)
        }
    }

    pub fn varsigma(&self, rho: f64) -> f64 {
        if rho <= self.rho_star {
            rho / (self.k_sq - self.s_ff * rho)
        } else {
            self.sigma_sq / (self.varrho0 - rho) - self.sum_precision
        }
    }

    /// Fraction of attention on the treatment arm at time `t`.
    pub fn treatment_fraction(&self, t: f64, sigma1: f64, sigma0: f64) -> f64 {
        if t < self.t_star {
            match self.first_arm {
                Arm::Treatment => 1.0,
                Arm::Control => 0.0,
            }
        } else {
            sigma1 / (sigma1 + sigma0)
        }
    }
}
