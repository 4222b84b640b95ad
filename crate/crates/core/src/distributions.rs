//! Input distributions and the distributions of sums of i.i.d. inputs.
//!
//! Discrete sums are tabulated as [`Pmf`]s. Continuous sums are described by
//! their parameters: exactly for the normal family, and through the
//! Fenton-Wilkinson moment match for the log-normal family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::grammar::Record;

/// Default probability below which Poisson tabulation halts past the mode.
pub const DEFAULT_TRUNCATION: f64 = 1e-7;

/// Tolerance on `Σp + truncated_mass` for a table to count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Upper bound on `n·N` for exact uniform convolution.
pub const CONVOLUTION_BOUND: u64 = 10_000_000;

/// Largest log-normal variance accepted by the Fenton-Wilkinson approximation.
pub const FW_MAX_SIGMA2: f64 = 4.0;

/// Distribution of one participant's input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistributionSpec {
    Poisson {
        lambda: f64,
    },
    /// Uniform over `{0, .., upper - 1}`.
    #[serde(rename = "uniform")]
    DiscreteUniform {
        upper: u64,
    },
    Normal {
        mu: f64,
        sigma2: f64,
    },
    #[serde(rename = "lognormal")]
    LogNormal {
        mu: f64,
        sigma2: f64,
    },
}

impl DistributionSpec {
    pub fn poisson(lambda: f64) -> Result<Self> {
        let d = DistributionSpec::Poisson { lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(upper: u64) -> Result<Self> {
        let d = DistributionSpec::DiscreteUniform { upper };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mu: f64, sigma2: f64) -> Result<Self> {
        let d = DistributionSpec::Normal { mu, sigma2 };
        d.validate()?;
        Ok(d)
    }

    pub fn lognormal(mu: f64, sigma2: f64) -> Result<Self> {
        let d = DistributionSpec::LogNormal { mu, sigma2 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Poisson { lambda } => check_rate(lambda),
            DistributionSpec::DiscreteUniform { upper } => check_upper(upper),
            DistributionSpec::Normal { mu, sigma2 }
            | DistributionSpec::LogNormal { mu, sigma2 } => {
                if !mu.is_finite() {
                    return Err(Error::domain(format!("mu must be finite, got {mu}")));
                }
                check_variance(sigma2)
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Poisson { .. } | DistributionSpec::DiscreteUniform { .. }
        )
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Poisson { .. } => "poisson",
            DistributionSpec::DiscreteUniform { .. } => "uniform",
            DistributionSpec::Normal { .. } => "normal",
            DistributionSpec::LogNormal { .. } => "lognormal",
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Poisson { lambda } => write!(f, "poisson:lambda={lambda}"),
            DistributionSpec::DiscreteUniform { upper } => write!(f, "uniform:N={upper}"),
            DistributionSpec::Normal { mu, sigma2 } => write!(f, "normal:mu={mu},sigma2={sigma2}"),
            DistributionSpec::LogNormal { mu, sigma2 } => {
                write!(f, "lognormal:mu={mu},sigma2={sigma2}")
            }
        }
    }
}

impl DistributionSpec {
    /// Builds a distribution from an already tokenized record, ignoring keys in
    /// `extra` (used by scenario strings that carry party counts alongside).
    pub fn from_record(rec: &Record<'_>, extra: &[&str]) -> Result<Self> {
        let allowed = |keys: &[&'static str]| -> Vec<&str> {
            keys.iter().copied().chain(extra.iter().copied()).collect()
        };
        let spec = match rec.family.to_ascii_lowercase().as_str() {
            "poisson" | "pois" => {
                rec.check_keys(&allowed(&["lambda"]))?;
                DistributionSpec::Poisson {
                    lambda: rec.require("lambda")?.parse_f64()?,
                }
            }
            "uniform" | "unif" => {
                rec.check_keys(&allowed(&["N"]))?;
                DistributionSpec::DiscreteUniform {
                    upper: rec.require("N")?.parse_u64()?,
                }
            }
            "normal" | "gaussian" => {
                rec.check_keys(&allowed(&["mu", "sigma2"]))?;
                DistributionSpec::Normal {
                    mu: rec
                        .get("mu")
                        .map(|f| f.parse_f64())
                        .transpose()?
                        .unwrap_or(0.0),
                    sigma2: rec.require("sigma2")?.parse_f64()?,
                }
            }
            "lognormal" | "logn" => {
                rec.check_keys(&allowed(&["mu", "sigma2"]))?;
                DistributionSpec::LogNormal {
                    mu: rec.require("mu")?.parse_f64()?,
                    sigma2: rec.require("sigma2")?.parse_f64()?,
                }
            }
            other => {
                return Err(Error::Parse {
                    position: 0,
                    message: format!(
                        "unknown family `{other}` (expected poisson, uniform, normal or lognormal)"
                    ),
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistributionSpec::from_record(&Record::parse(s)?, &[])
    }
}

fn check_rate(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Poisson rate must be > 0, got {lambda}"
        )))
    }
}

fn check_upper(upper: u64) -> Result<()> {
    if upper >= 2 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "uniform support size must be >= 2, got {upper}"
        )))
    }
}

fn check_variance(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("variance must be > 0, got {sigma2}")))
    }
}

fn check_count(n: u64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::domain("summand count must be >= 1"))
    }
}

/// A finite table of probabilities over consecutive integers starting at `offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    offset: i64,
    probs: Vec<f64>,
    truncation_threshold: f64,
    truncated_mass: f64,
}

impl Pmf {
    pub fn new(offset: i64, probs: Vec<f64>) -> Result<Self> {
        Self::with_truncation(offset, probs, DEFAULT_TRUNCATION, 0.0)
    }

    pub fn with_truncation(
        offset: i64,
        probs: Vec<f64>,
        truncation_threshold: f64,
        truncated_mass: f64,
    ) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("pmf needs at least one support point"));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::domain(format!("pmf entry {p} is not a probability")));
        }
        if !(truncated_mass.is_finite() && truncated_mass >= 0.0) {
            return Err(Error::domain(format!(
                "truncated mass {truncated_mass} is invalid"
            )));
        }
        Ok(Pmf {
            offset,
            probs,
            truncation_threshold,
            truncated_mass,
        })
    }

    pub fn point_mass(at: i64) -> Self {
        Pmf {
            offset: at,
            probs: vec![1.0],
            truncation_threshold: DEFAULT_TRUNCATION,
            truncated_mass: 0.0,
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn truncation_threshold(&self) -> f64 {
        self.truncation_threshold
    }

    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    /// Largest tabulated support point.
    pub fn last(&self) -> i64 {
        self.offset + self.probs.len() as i64 - 1
    }

    pub fn get(&self, x: i64) -> f64 {
        if x < self.offset {
            return 0.0;
        }
        self.probs
            .get((x - self.offset) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    /// Tabulated mass, excluding `truncated_mass`.
    pub fn tabulated_mass(&self) -> f64 {
        // Summing from the small end keeps tails from being swamped.
        let mut sorted = self.probs.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.iter().sum()
    }

    pub fn normalization_error(&self) -> f64 {
        (self.tabulated_mass() + self.truncated_mass - 1.0).abs()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization_error() < NORMALIZATION_TOLERANCE
    }

    /// Distribution of the sum of two independent variables.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let mut out = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, &a) in self.probs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.probs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Pmf {
            offset: self.offset + other.offset,
            probs: out,
            truncation_threshold: self.truncation_threshold.max(other.truncation_threshold),
            truncated_mass: self.truncated_mass + other.truncated_mass,
        }
    }

    /// Rescales the tabulated entries to sum to one and clears the truncation record.
    pub fn renormalized(&self) -> Pmf {
        let total = self.tabulated_mass();
        Pmf {
            offset: self.offset,
            probs: self.probs.iter().map(|p| p / total).collect(),
            truncation_threshold: self.truncation_threshold,
            truncated_mass: 0.0,
        }
    }
}

fn ln_poisson(rate: f64, a: u64) -> f64 {
    let a = a as f64;
    if a == 0.0 {
        return -rate;
    }
    a * rate.ln() - rate - ln_gamma(a + 1.0)
}

/// Probability that the sum of `n` i.i.d. `Pois(lambda)` inputs equals `a`.
///
/// The sum is `Pois(n·lambda)`, evaluated through ln Γ so that large `a` stays
/// finite.
pub fn poisson_sum_pmf(lambda: f64, n: u64, a: u64) -> Result<f64> {
    check_rate(lambda)?;
    check_count(n)?;
    Ok(ln_poisson(n as f64 * lambda, a).exp())
}

/// Tabulates the pmf of a sum of `n` Poisson inputs from zero upward.
///
/// The scan halts at the first support point past the mode `⌊n·lambda⌋` whose
/// probability is below `threshold`; that point is kept. Sub-threshold points
/// below the mode are kept as well.
pub fn poisson_sum_pmf_table(lambda: f64, n: u64, threshold: f64) -> Result<Pmf> {
    check_rate(lambda)?;
    check_count(n)?;
    if !(threshold > 0.0 && threshold <= 1e-3) {
        return Err(Error::domain(format!(
            "truncation threshold must lie in (0, 1e-3], got {threshold}"
        )));
    }
    let rate = n as f64 * lambda;
    let mode = rate.floor() as u64;
    let mut probs = Vec::with_capacity(mode as usize + 64);
    let mut a = 0u64;
    loop {
        let p = ln_poisson(rate, a).exp();
        probs.push(p);
        if a > mode && p < threshold {
            break;
        }
        a += 1;
    }

    // Past the mode consecutive ratios are rate/(a+1) < 1, so the tail is a
    // rapidly vanishing sum.
    let mut tail = 0.0;
    let mut term = *probs.last().unwrap();
    let mut k = a;
    loop {
        term *= rate / (k + 1) as f64;
        k += 1;
        tail += term;
        if term <= tail * 1e-17 || term < f64::MIN_POSITIVE {
            break;
        }
    }

    Pmf::with_truncation(0, probs, threshold, tail)
}

/// Probability that the sum of `n` i.i.d. uniform inputs on `{0, .., upper-1}`
/// equals `x`, via the alternating closed form
///
/// `n / N^n · Σ_p (-1)^p Γ(n + x − pN) / (Γ(p+1) Γ(n−p+1) Γ(x−pN+1))`.
///
/// Terms are combined in log space with explicit signs. Accurate to ~1e-9 for
/// moderate `n`; cancellation grows with `n`, so large sums should be
/// tabulated with [`uniform_sum_convolution`].
pub fn uniform_sum_pmf(upper: u64, n: u64, x: i64) -> Result<f64> {
    check_upper(upper)?;
    check_count(n)?;
    if x < 0 || x as u64 > n * (upper - 1) {
        return Ok(0.0);
    }
    let (nf, uf, xf) = (n as f64, upper as f64, x as f64);
    let lead = nf.ln() - nf * uf.ln();
    let p_max = (x as u64 / upper).min(n);

    let terms: Vec<(f64, f64)> = (0..=p_max)
        .map(|p| {
            let pf = p as f64;
            let rem = xf - pf * uf;
            let log_mag = lead + ln_gamma(nf + rem)
                - ln_gamma(pf + 1.0)
                - ln_gamma(nf - pf + 1.0)
                - ln_gamma(rem + 1.0);
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            (sign, log_mag)
        })
        .collect();

    let peak = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = terms.iter().map(|(s, l)| s * (l - peak).exp()).sum();
    Ok((scaled * peak.exp()).clamp(0.0, 1.0))
}

/// Exact pmf of the sum of `n` uniform inputs by iterated convolution.
pub fn uniform_sum_convolution(upper: u64, n: u64) -> Result<Pmf> {
    check_upper(upper)?;
    if n.saturating_mul(upper) > CONVOLUTION_BOUND {
        return Err(Error::Resource(format!(
            "n·N = {n}·{upper} exceeds the convolution bound {CONVOLUTION_BOUND}"
        )));
    }
    if n == 0 {
        return Ok(Pmf::point_mass(0));
    }
    let width = upper as usize;
    let w = 1.0 / upper as f64;
    let mut cur = vec![w; width];
    for _ in 1..n {
        let mut next = vec![0.0; cur.len() + width - 1];
        for (i, &a) in cur.iter().enumerate() {
            let aw = a * w;
            for slot in &mut next[i..i + width] {
                *slot += aw;
            }
        }
        cur = next;
    }
    Pmf::new(0, cur)
}

/// Parameters of the single log-normal matched to a sum of log-normals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FwParams {
    pub mu_hat: f64,
    pub sigma2_hat: f64,
}

/// Fenton-Wilkinson approximation of the sum of `n` i.i.d. `logN(mu, sigma2)`.
pub fn fenton_wilkinson(mu: f64, sigma2: f64, n: u64) -> Result<FwParams> {
    check_count(n)?;
    if !mu.is_finite() {
        return Err(Error::domain(format!("mu must be finite, got {mu}")));
    }
    check_variance(sigma2)?;
    if sigma2 > FW_MAX_SIGMA2 {
        return Err(Error::domain(format!(
            "Fenton-Wilkinson is unreliable for sigma2 > {FW_MAX_SIGMA2}, got {sigma2}"
        )));
    }
    if n == 1 {
        return Ok(FwParams {
            mu_hat: mu,
            sigma2_hat: sigma2,
        });
    }
    let nf = n as f64;
    let sigma2_hat = (sigma2.exp_m1() / nf).ln_1p();
    let mu_hat = nf.ln() + mu + 0.5 * (sigma2 - sigma2_hat);
    Ok(FwParams { mu_hat, sigma2_hat })
}

/// Mean and variance of the sum of `n` i.i.d. `N(mu, sigma2)`.
pub fn normal_sum_params(mu: f64, sigma2: f64, n: u64) -> Result<(f64, f64)> {
    check_count(n)?;
    check_variance(sigma2)?;
    Ok((n as f64 * mu, n as f64 * sigma2))
}

/// Tabulated pmf of the sum of `n` inputs drawn from a discrete distribution.
/// `n = 0` yields a point mass at zero.
pub fn discrete_sum_pmf(dist: &DistributionSpec, n: u64, threshold: f64) -> Result<Pmf> {
    dist.validate()?;
    if n == 0 {
        return Ok(Pmf::point_mass(0));
    }
    match *dist {
        DistributionSpec::Poisson { lambda } => poisson_sum_pmf_table(lambda, n, threshold),
        DistributionSpec::DiscreteUniform { upper } => uniform_sum_convolution(upper, n),
        _ => Err(Error::domain(format!(
            "{} is continuous and has no pmf",
            dist.family()
        ))),
    }
}
