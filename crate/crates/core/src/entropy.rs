//! Shannon and differential entropies, all reported in bits.

use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::distributions::Pmf;
use crate::error::{Error, Result};

/// Determinants at or below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Smallest Poisson rate for which the asymptotic entropy series is used.
pub const POISSON_SERIES_MIN_RATE: f64 = 10.0;

/// An entropy in bits. Differential entropies may be negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct EntropyValue(pub f64);

impl EntropyValue {
    pub const ZERO: EntropyValue = EntropyValue(0.0);

    pub fn bits(self) -> f64 {
        self.0
    }

    pub fn from_nats(nats: f64) -> Self {
        EntropyValue(nats / LN_2)
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

impl Add for EntropyValue {
    type Output = EntropyValue;
    fn add(self, rhs: Self) -> Self {
        EntropyValue(self.0 + rhs.0)
    }
}

impl Sub for EntropyValue {
    type Output = EntropyValue;
    fn sub(self, rhs: Self) -> Self {
        EntropyValue(self.0 - rhs.0)
    }
}

impl Neg for EntropyValue {
    type Output = EntropyValue;
    fn neg(self) -> Self {
        EntropyValue(-self.0)
    }
}

impl Mul<f64> for EntropyValue {
    type Output = EntropyValue;
    fn mul(self, rhs: f64) -> Self {
        EntropyValue(self.0 * rhs)
    }
}

/// `-Σ p log₂ p` over the tabulated entries; `0·log 0 = 0`.
pub fn shannon_entropy(pmf: &Pmf) -> Result<EntropyValue> {
    if !pmf.is_normalized() {
        return Err(Error::Unnormalized(
            pmf.tabulated_mass() + pmf.truncated_mass(),
        ));
    }
    let h: f64 = pmf
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    Ok(EntropyValue(h.max(0.0)))
}

fn check_variance(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("variance must be > 0, got {sigma2}")))
    }
}

/// `½ log₂(2πe σ²)`.
pub fn differential_entropy_normal(sigma2: f64) -> Result<EntropyValue> {
    check_variance(sigma2)?;
    Ok(EntropyValue(0.5 * (2.0 * PI * E * sigma2).log2()))
}

/// `log₂(e^{μ+½} √(2πσ²))`.
pub fn differential_entropy_lognormal(mu: f64, sigma2: f64) -> Result<EntropyValue> {
    check_variance(sigma2)?;
    if !mu.is_finite() {
        return Err(Error::domain(format!("mu must be finite, got {mu}")));
    }
    Ok(EntropyValue::from_nats(
        mu + 0.5 + 0.5 * (2.0 * PI * sigma2).ln(),
    ))
}

/// Asymptotic series for the Shannon entropy of `Pois(lambda)`:
/// `½ log(2πeλ) − 1/(12λ) − 1/(24λ²) − 19/(360λ³)`.
pub fn poisson_entropy_approx(lambda: f64) -> Result<EntropyValue> {
    if !(lambda.is_finite() && lambda >= POISSON_SERIES_MIN_RATE) {
        return Err(Error::domain(format!(
            "Poisson entropy series needs lambda >= {POISSON_SERIES_MIN_RATE}, got {lambda}"
        )));
    }
    let corr = 1.0 / (12.0 * lambda)
        + 1.0 / (24.0 * lambda * lambda)
        + 19.0 / (360.0 * lambda * lambda * lambda);
    Ok(EntropyValue(
        0.5 * (2.0 * PI * E * lambda).log2() - corr / LN_2,
    ))
}

/// `a·d − b·c` for a 2×2 matrix.
pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Differential entropy of a bivariate normal with covariance `cov`:
/// `½ log₂((2πe)² det Σ)`.
pub fn multivariate_normal_entropy(cov: &[[f64; 2]; 2]) -> Result<EntropyValue> {
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::domain("covariance entries must be finite"));
    }
    if (cov[0][1] - cov[1][0]).abs() > SINGULAR_DET {
        return Err(Error::domain(format!(
            "covariance is not symmetric: {} vs {}",
            cov[0][1], cov[1][0]
        )));
    }
    let det = det2(cov);
    if det <= SINGULAR_DET {
        return Err(Error::Singular(det));
    }
    let two_pi_e = 2.0 * PI * E;
    Ok(EntropyValue(0.5 * (two_pi_e * two_pi_e * det).log2()))
}
