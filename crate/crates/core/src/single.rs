//! Leakage from a single execution of a sum over `t` targets and `n` spectators.
//!
//! Because the attacker can subtract its own contribution, the remaining
//! uncertainty about the targets is `H(X_T | X_T + X_S)`, which expands to
//! `H(X_T) + H(X_S) − H(X_T + X_S)` for independent groups. Each term is the
//! entropy of a sum of i.i.d. inputs, so only three one-dimensional
//! distributions are ever needed.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{
    discrete_sum_pmf, fenton_wilkinson, DistributionSpec, DEFAULT_TRUNCATION,
};
use crate::entropy::{
    differential_entropy_lognormal, differential_entropy_normal, shannon_entropy, EntropyValue,
};
use crate::error::{Error, Result};

/// Largest spectator count `solve_min_spectators` will consider.
pub const MAX_SPECTATORS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub dist: DistributionSpec,
    /// Number of targets `|T|`.
    pub targets: u64,
    /// Number of spectators `|S|`.
    pub spectators: u64,
    /// Poisson tabulation threshold.
    pub threshold: f64,
}

impl ScenarioConfig {
    pub fn new(dist: DistributionSpec, targets: u64, spectators: u64) -> Self {
        ScenarioConfig {
            dist,
            targets,
            spectators,
            threshold: DEFAULT_TRUNCATION,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        if self.targets < 1 {
            return Err(Error::domain("at least one target is required"));
        }
        Ok(())
    }
}

/// Target entropy before and after observing the output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub before: f64,
    pub after: f64,
    pub absolute_loss: f64,
    pub relative_loss: f64,
}

/// Entropy of the sum of `k` i.i.d. inputs.
pub fn sum_entropy(dist: &DistributionSpec, k: u64, threshold: f64) -> Result<EntropyValue> {
    match *dist {
        DistributionSpec::Poisson { .. } | DistributionSpec::DiscreteUniform { .. } => {
            shannon_entropy(&discrete_sum_pmf(dist, k, threshold)?)
        }
        DistributionSpec::Normal { sigma2, .. } => {
            if k == 0 {
                return Err(Error::Degenerate(
                    "an empty sum of continuous inputs has no differential entropy".into(),
                ));
            }
            differential_entropy_normal(k as f64 * sigma2)
        }
        DistributionSpec::LogNormal { mu, sigma2 } => {
            if k == 0 {
                return Err(Error::Degenerate(
                    "an empty sum of continuous inputs has no differential entropy".into(),
                ));
            }
            let fw = fenton_wilkinson(mu, sigma2, k)?;
            differential_entropy_lognormal(fw.mu_hat, fw.sigma2_hat)
        }
    }
}

/// Prior entropy of the target vector, `t·H(X₁)`.
pub fn prior_entropy(scenario: &ScenarioConfig) -> Result<EntropyValue> {
    scenario.validate()?;
    Ok(sum_entropy(&scenario.dist, 1, scenario.threshold)? * scenario.targets as f64)
}

/// Attacker's weighted average entropy, `H(X_T | X_T + X_S)`.
pub fn awae(scenario: &ScenarioConfig) -> Result<EntropyValue> {
    scenario.validate()?;
    let (dist, t, n, thr) = (
        &scenario.dist,
        scenario.targets,
        scenario.spectators,
        scenario.threshold,
    );
    if n == 0 && !dist.is_discrete() {
        return Err(Error::Degenerate(
            "continuous inputs with no spectators reveal the target sum exactly".into(),
        ));
    }
    let single = sum_entropy(dist, 1, thr)?;
    let spectators = sum_entropy(dist, n, thr)?;
    let everyone = sum_entropy(dist, t + n, thr)?;
    Ok(single * t as f64 + spectators - everyone)
}

pub fn loss_report(scenario: &ScenarioConfig) -> Result<EntropyReport> {
    let before = prior_entropy(scenario)?.bits();
    if before <= 0.0 {
        return Err(Error::IllDefinedRelativeLoss(before));
    }
    let after = awae(scenario)?.bits();
    let absolute_loss = before - after;
    Ok(EntropyReport {
        before,
        after,
        absolute_loss,
        relative_loss: absolute_loss / before,
    })
}

/// Absolute loss for normal inputs, `½ log₂((t+n)/n)`. Independent of the variance.
pub fn normal_loss_closed_form(targets: u64, spectators: u64) -> Result<EntropyValue> {
    if targets < 1 {
        return Err(Error::domain("at least one target is required"));
    }
    if spectators < 1 {
        return Err(Error::domain(
            "closed-form loss needs at least one spectator",
        ));
    }
    let ratio = (targets + spectators) as f64 / spectators as f64;
    Ok(EntropyValue(0.5 * ratio.log2()))
}

/// Smallest spectator count whose relative loss is within `budget`.
///
/// Relies on relative loss decreasing in the spectator count: doubles until
/// the budget is met, then bisects the last interval.
pub fn solve_min_spectators(
    dist: &DistributionSpec,
    targets: u64,
    budget: f64,
    threshold: f64,
) -> Result<u64> {
    if !(budget > 0.0 && budget < 1.0) {
        return Err(Error::domain(format!(
            "budget must lie in (0, 1), got {budget}"
        )));
    }
    let meets = |n: u64| -> Result<bool> {
        let s = ScenarioConfig::new(*dist, targets, n).with_threshold(threshold);
        Ok(loss_report(&s)?.relative_loss <= budget)
    };

    // `lo` always fails the budget (n = 0 reveals the target sum), `hi` is the probe.
    let mut lo = 0u64;
    let mut hi = 1u64;
    while !meets(hi)? {
        if hi >= MAX_SPECTATORS {
            return Err(Error::Unbounded {
                limit: MAX_SPECTATORS,
                budget,
            });
        }
        lo = hi;
        hi = (hi * 2).min(MAX_SPECTATORS);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Loss reports for `n = 1..=n_max` spectators, in order.
pub fn sweep(
    dist: &DistributionSpec,
    targets: u64,
    n_max: u64,
    threshold: f64,
) -> Result<Vec<(u64, EntropyReport)>> {
    sweep_range(dist, targets, 1..=n_max, threshold)
}

pub fn sweep_range(
    dist: &DistributionSpec,
    targets: u64,
    spectators: std::ops::RangeInclusive<u64>,
    threshold: f64,
) -> Result<Vec<(u64, EntropyReport)>> {
    spectators
        .into_par_iter()
        .map(|n| {
            let s = ScenarioConfig::new(*dist, targets, n).with_threshold(threshold);
            loss_report(&s).map(|r| (n, r))
        })
        .collect()
}
