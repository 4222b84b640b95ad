//! Leakage after two executions with normally distributed inputs.
//!
//! Spectators split into `S₀` (present in both executions), `S₁` (first only)
//! and `S₂` (second only). The outputs are
//!
//! ```text
//! O₁  = X_T + X_S₀ + X_S₁
//! O₂  = X_T + X_S₀ + X_S₂      (target participates twice)
//! O₂′ =       X_S₀ + X_S₂      (target participates once)
//! ```
//!
//! and the remaining target entropy is
//! `h(X_T | O₁, O₂) = h(X_T) + h(X_S₀+X_S₁, X_S₀+X_S₂) − h(O₁, O₂)`,
//! with every joint term a bivariate normal entropy. Means never enter.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::{
    det2, differential_entropy_normal, multivariate_normal_entropy, EntropyValue,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Participation {
    /// Target contributes to both executions; second output is `O₂`.
    Twice,
    /// Target contributes to the first execution only; second output is `O₂′`.
    Once,
}

impl fmt::Display for Participation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Participation::Twice => "twice",
            Participation::Once => "once",
        })
    }
}

impl FromStr for Participation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "twice" | "two" | "2" => Ok(Participation::Twice),
            "once" | "one" | "1" => Ok(Participation::Once),
            other => Err(Error::Parse {
                position: 0,
                message: format!("participation must be `once` or `twice`, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoExecConfig {
    /// Per-party input variance.
    pub sigma2: f64,
    pub targets: u64,
    /// `|S₀|`: spectators shared by both executions.
    pub s0: u64,
    /// `|S₁|`: spectators only in the first execution.
    pub s1: u64,
    /// `|S₂|`: spectators only in the second execution.
    pub s2: u64,
    pub participation: Participation,
}

impl TwoExecConfig {
    pub fn new(
        sigma2: f64,
        targets: u64,
        s0: u64,
        s1: u64,
        s2: u64,
        participation: Participation,
    ) -> Result<Self> {
        let cfg = TwoExecConfig {
            sigma2,
            targets,
            s0,
            s1,
            s2,
            participation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::domain(format!(
                "variance must be > 0, got {}",
                self.sigma2
            )));
        }
        if self.targets < 1 {
            return Err(Error::domain("at least one target is required"));
        }
        if self.s0 + self.s1 < 1 || self.s0 + self.s2 < 1 {
            return Err(Error::domain(
                "each execution needs at least one spectator (s0+s1 >= 1 and s0+s2 >= 1)",
            ));
        }
        Ok(())
    }

    pub fn with_participation(self, participation: Participation) -> Self {
        TwoExecConfig {
            participation,
            ..self
        }
    }

    pub fn var_targets(&self) -> f64 {
        self.targets as f64 * self.sigma2
    }

    /// Variance of the sum over `S₀`, `S₁` or `S₂`.
    pub fn var_group(&self, group: usize) -> f64 {
        let k = match group {
            0 => self.s0,
            1 => self.s1,
            2 => self.s2,
            _ => panic!("spectator group index {group} out of range"),
        };
        k as f64 * self.sigma2
    }

    /// Spectators in the first execution.
    pub fn first_spectators(&self) -> u64 {
        self.s0 + self.s1
    }
}

/// A symmetric 2×2 covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovMatrix2(pub [[f64; 2]; 2]);

impl CovMatrix2 {
    pub fn new(var1: f64, cov: f64, var2: f64) -> Self {
        CovMatrix2([[var1, cov], [cov, var2]])
    }

    pub fn entries(&self) -> &[[f64; 2]; 2] {
        &self.0
    }

    pub fn det(&self) -> f64 {
        det2(&self.0)
    }

    pub fn is_singular(&self) -> bool {
        self.det() <= crate::entropy::SINGULAR_DET
    }
}

fn require(cfg: &TwoExecConfig, want: Participation) -> Result<()> {
    cfg.validate()?;
    if cfg.participation != want {
        return Err(Error::domain(format!(
            "this quantity is defined for participation = {want}, got {}",
            cfg.participation
        )));
    }
    Ok(())
}

/// Covariance of `(O₁, O₂)`.
pub fn covariance_o(cfg: &TwoExecConfig) -> Result<CovMatrix2> {
    require(cfg, Participation::Twice)?;
    let shared = cfg.var_targets() + cfg.var_group(0);
    Ok(CovMatrix2::new(
        shared + cfg.var_group(1),
        shared,
        shared + cfg.var_group(2),
    ))
}

/// Covariance of `(X_S₀ + X_S₁, X_S₀ + X_S₂)`.
pub fn covariance_s(cfg: &TwoExecConfig) -> Result<CovMatrix2> {
    cfg.validate()?;
    let v0 = cfg.var_group(0);
    Ok(CovMatrix2::new(
        v0 + cfg.var_group(1),
        v0,
        v0 + cfg.var_group(2),
    ))
}

/// Covariance of `(O₁, O₂′)`.
pub fn covariance_o_prime(cfg: &TwoExecConfig) -> Result<CovMatrix2> {
    require(cfg, Participation::Once)?;
    let v0 = cfg.var_group(0);
    Ok(CovMatrix2::new(
        cfg.var_targets() + v0 + cfg.var_group(1),
        v0,
        v0 + cfg.var_group(2),
    ))
}

/// `det Σ_O = σ_T²(σ₁² + σ₂²) + σ₀²(σ₁² + σ₂²) + σ₁²σ₂²` in group variances.
pub fn det_o_expanded(cfg: &TwoExecConfig) -> f64 {
    let (vt, v0, v1, v2) = (
        cfg.var_targets(),
        cfg.var_group(0),
        cfg.var_group(1),
        cfg.var_group(2),
    );
    vt * (v1 + v2) + v0 * (v1 + v2) + v1 * v2
}

/// `det Σ_O′ = σ_T²(σ₀² + σ₂²) + σ₀²(σ₁² + σ₂²) + σ₁²σ₂²`.
pub fn det_o_prime_expanded(cfg: &TwoExecConfig) -> f64 {
    let (vt, v0, v1, v2) = (
        cfg.var_targets(),
        cfg.var_group(0),
        cfg.var_group(1),
        cfg.var_group(2),
    );
    vt * (v0 + v2) + v0 * (v1 + v2) + v1 * v2
}

/// Prior entropy of the target vector, `t·h(N(0, σ²))`.
pub fn prior_entropy(cfg: &TwoExecConfig) -> Result<EntropyValue> {
    cfg.validate()?;
    Ok(differential_entropy_normal(cfg.sigma2)? * cfg.targets as f64)
}

/// `h(X_T | O₁)`: the single-execution remaining entropy.
pub fn cond_entropy_first(cfg: &TwoExecConfig) -> Result<EntropyValue> {
    cfg.validate()?;
    let n1 = cfg.first_spectators() as f64;
    Ok(
        prior_entropy(cfg)? + differential_entropy_normal(n1 * cfg.sigma2)?
            - differential_entropy_normal((cfg.targets as f64 + n1) * cfg.sigma2)?,
    )
}

/// `h(X_T | O₁, O₂)` for a target that participates in both executions.
///
/// With no unique spectators (`s1 = s2 = 0`) both outputs coincide and the
/// result is `h(X_T | O₁)`.
pub fn cond_entropy_two_exec(cfg: &TwoExecConfig) -> Result<EntropyValue> {
    require(cfg, Participation::Twice)?;
    if cfg.s1 == 0 && cfg.s2 == 0 {
        return cond_entropy_first(cfg);
    }
    Ok(
        prior_entropy(cfg)? + multivariate_normal_entropy(covariance_s(cfg)?.entries())?
            - multivariate_normal_entropy(covariance_o(cfg)?.entries())?,
    )
}

/// `h(X_T | O₁, O₂′)` for a target that participates in the first execution only.
///
/// With no unique spectators the second output is `X_S₀`, and the result is
/// `h(X⃗_T) − h(X_T)`, which vanishes for a single target.
pub fn cond_entropy_once(cfg: &TwoExecConfig) -> Result<EntropyValue> {
    require(cfg, Participation::Once)?;
    if cfg.s1 == 0 && cfg.s2 == 0 {
        if cfg.targets == 1 {
            return Ok(EntropyValue::ZERO);
        }
        return Ok(prior_entropy(cfg)? - differential_entropy_normal(cfg.var_targets())?);
    }
    Ok(
        prior_entropy(cfg)? + multivariate_normal_entropy(covariance_s(cfg)?.entries())?
            - multivariate_normal_entropy(covariance_o_prime(cfg)?.entries())?,
    )
}

/// Remaining entropy after both executions, per the configured participation.
pub fn cond_entropy_second(cfg: &TwoExecConfig) -> Result<EntropyValue> {
    match cfg.participation {
        Participation::Twice => cond_entropy_two_exec(cfg),
        Participation::Once => cond_entropy_once(cfg),
    }
}

/// Loss incurred by the second execution as a fraction of the first-execution loss:
/// `(h(X_T|O₁) − h(X_T|O₁,O₂)) / (h(X_T) − h(X_T|O₁))`.
pub fn second_exec_loss_ratio(cfg: &TwoExecConfig) -> Result<f64> {
    let prior = prior_entropy(cfg)?.bits();
    let first = cond_entropy_first(cfg)?.bits();
    let second = cond_entropy_second(cfg)?.bits();
    let first_loss = prior - first;
    if first_loss <= 0.0 {
        return Err(Error::ZeroFirstLoss);
    }
    Ok((first - second) / first_loss)
}

/// One point on an overlap sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapPoint {
    pub s0: u64,
    pub s1: u64,
    pub s2: u64,
    /// `s0 / n_per_exec`.
    pub overlap: f64,
    pub h_prior: f64,
    pub h_after_first: f64,
    pub h_after_second: f64,
    pub ratio: f64,
}

pub fn overlap_point(cfg: &TwoExecConfig) -> Result<OverlapPoint> {
    let n = cfg.first_spectators();
    Ok(OverlapPoint {
        s0: cfg.s0,
        s1: cfg.s1,
        s2: cfg.s2,
        overlap: cfg.s0 as f64 / n as f64,
        h_prior: prior_entropy(cfg)?.bits(),
        h_after_first: cond_entropy_first(cfg)?.bits(),
        h_after_second: cond_entropy_second(cfg)?.bits(),
        ratio: second_exec_loss_ratio(cfg)?,
    })
}

/// Sweeps `s0 = 0..=n_per_exec` with `s1 = s2 = n_per_exec − s0`.
pub fn overlap_sweep(
    sigma2: f64,
    targets: u64,
    n_per_exec: u64,
    participation: Participation,
) -> Result<Vec<OverlapPoint>> {
    if n_per_exec < 1 {
        return Err(Error::domain("each execution needs at least one spectator"));
    }
    (0..=n_per_exec)
        .map(|s0| {
            let rest = n_per_exec - s0;
            overlap_point(&TwoExecConfig::new(
                sigma2,
                targets,
                s0,
                rest,
                rest,
                participation,
            )?)
        })
        .collect()
}
