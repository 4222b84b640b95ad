//! Brute-force ground truth.
//!
//! The weighted average entropies (jwae, twae, awae) are computed here by
//! exhaustive enumeration of every party's input over a small finite domain,
//! with exact Bayesian posteriors. Nothing in this module calls the closed
//! forms it is used to check. A seeded Monte Carlo estimator of the output
//! covariances serves the same purpose for the two-execution analysis.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{poisson_sum_pmf_table, DistributionSpec, Pmf};
use crate::entropy::EntropyValue;
use crate::error::{Error, Result};
use crate::two_exec::{CovMatrix2, Participation, TwoExecConfig};

/// Maximum `|D|^(|A|+|T|+|S|)` accepted for enumeration.
pub const ENUMERATION_BUDGET: f64 = 1e8;

/// Spectator groups larger than this are summarized by convolution rather
/// than enumerated tuple by tuple.
const TUPLE_ENUMERATION_MAX: u64 = 3;

/// Minimum Monte Carlo sample count.
pub const MIN_MC_SAMPLES: u64 = 100_000;

const MC_CHUNK: u64 = 1 << 16;

/// Parties with i.i.d. inputs over a finite integer domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteScenario {
    domain: Pmf,
    attackers: u64,
    targets: u64,
    spectators: u64,
}

impl FiniteScenario {
    /// Uses `domain` as the per-party distribution; it is renormalized to one.
    pub fn new(domain: Pmf, attackers: u64, targets: u64, spectators: u64) -> Result<Self> {
        if attackers < 1 || targets < 1 {
            return Err(Error::domain("need at least one attacker and one target"));
        }
        let size = domain.len() as f64;
        let combos = size.powi((attackers + targets + spectators) as i32);
        if combos > ENUMERATION_BUDGET {
            return Err(Error::Budget(combos));
        }
        let domain = domain.renormalized();
        let total: f64 = domain.probs().iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized(total));
        }
        Ok(FiniteScenario {
            domain,
            attackers,
            targets,
            spectators,
        })
    }

    /// Discrete uniform over `{0..N-1}`, or Poisson truncated at `threshold`
    /// and renormalized.
    pub fn from_dist(
        dist: &DistributionSpec,
        attackers: u64,
        targets: u64,
        spectators: u64,
        threshold: f64,
    ) -> Result<Self> {
        let domain = match *dist {
            DistributionSpec::DiscreteUniform { upper } => {
                Pmf::new(0, vec![1.0 / upper as f64; upper as usize])?
            }
            DistributionSpec::Poisson { lambda } => poisson_sum_pmf_table(lambda, 1, threshold)?,
            _ => {
                return Err(Error::domain(format!(
                    "enumeration needs a finite discrete domain, got {}",
                    dist.family()
                )))
            }
        };
        Self::new(domain, attackers, targets, spectators)
    }

    pub fn domain(&self) -> &Pmf {
        &self.domain
    }

    pub fn attackers(&self) -> u64 {
        self.attackers
    }

    pub fn targets(&self) -> u64 {
        self.targets
    }

    pub fn spectators(&self) -> u64 {
        self.spectators
    }

    /// Every input vector of length `k` over the domain, with its probability.
    pub fn vectors(&self, k: u64) -> Vec<(Vec<i64>, f64)> {
        let values: Vec<(i64, f64)> = self.domain.iter().collect();
        let mut out = vec![(Vec::with_capacity(k as usize), 1.0)];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|(prefix, p)| {
                    values.iter().map(move |&(v, q)| {
                        let mut next = prefix.clone();
                        next.push(v);
                        (next, p * q)
                    })
                })
                .collect();
        }
        out
    }

    /// Distribution of the spectators' total, keyed by value.
    fn spectator_sum(&self) -> BTreeMap<i64, f64> {
        let mut dist = BTreeMap::new();
        if self.spectators <= TUPLE_ENUMERATION_MAX {
            for (xs, p) in self.vectors(self.spectators) {
                *dist.entry(xs.iter().sum::<i64>()).or_insert(0.0) += p;
            }
        } else {
            let mut acc = Pmf::point_mass(0);
            for _ in 0..self.spectators {
                acc = acc.convolve(&self.domain);
            }
            dist.extend(acc.iter().filter(|&(_, p)| p > 0.0));
        }
        dist
    }

    fn check_vector(&self, xs: &[i64], len: u64, role: &str) -> Result<()> {
        if xs.len() as u64 != len {
            return Err(Error::domain(format!(
                "{role} vector has {} entries, expected {len}",
                xs.len()
            )));
        }
        if let Some(x) = xs.iter().find(|&&x| self.domain.get(x) <= 0.0) {
            return Err(Error::domain(format!(
                "{role} input {x} is outside the domain"
            )));
        }
        Ok(())
    }
}

fn entropy_of_weights(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

/// Shared enumeration state for one attacker vector.
struct Posterior<'a> {
    targets: Vec<(Vec<i64>, f64)>,
    spectators: &'a BTreeMap<i64, f64>,
    attacker_sum: i64,
}

impl Posterior<'_> {
    fn likelihood(&self, o: i64, target_sum: i64) -> f64 {
        self.spectators
            .get(&(o - self.attacker_sum - target_sum))
            .copied()
            .unwrap_or(0.0)
    }

    /// `H(X_T | x_A, O = o)` in bits.
    fn entropy_given_output(&self, o: i64) -> f64 {
        let weights: Vec<f64> = self
            .targets
            .iter()
            .map(|(xt, p)| p * self.likelihood(o, xt.iter().sum()))
            .collect();
        entropy_of_weights(&weights)
    }

    /// `Σ_o Pr(O = o | x_A, x_T) · H(X_T | x_A, O = o)`.
    fn jwae(&self, target: &[i64]) -> f64 {
        let base = self.attacker_sum + target.iter().sum::<i64>();
        self.spectators
            .iter()
            .map(|(&s, &p)| p * self.entropy_given_output(base + s))
            .sum()
    }
}

impl FiniteScenario {
    fn posterior<'a>(&self, spectators: &'a BTreeMap<i64, f64>, attacker: &[i64]) -> Posterior<'a> {
        Posterior {
            targets: self.vectors(self.targets),
            spectators,
            attacker_sum: attacker.iter().sum(),
        }
    }
}

/// Joint weighted average entropy for fixed attacker and target inputs.
pub fn jwae(scenario: &FiniteScenario, attacker: &[i64], target: &[i64]) -> Result<EntropyValue> {
    scenario.check_vector(attacker, scenario.attackers, "attacker")?;
    scenario.check_vector(target, scenario.targets, "target")?;
    let spectators = scenario.spectator_sum();
    Ok(EntropyValue(
        scenario.posterior(&spectators, attacker).jwae(target),
    ))
}

/// Targets' weighted average entropy: jwae averaged over attacker inputs.
pub fn twae(scenario: &FiniteScenario, target: &[i64]) -> Result<EntropyValue> {
    scenario.check_vector(target, scenario.targets, "target")?;
    let spectators = scenario.spectator_sum();
    let total: f64 = scenario
        .vectors(scenario.attackers)
        .par_iter()
        .map(|(xa, pa)| pa * scenario.posterior(&spectators, xa).jwae(target))
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    Ok(EntropyValue(total))
}

fn awae_with(scenario: &FiniteScenario, spectators: &BTreeMap<i64, f64>, attacker: &[i64]) -> f64 {
    let post = scenario.posterior(spectators, attacker);
    post.targets.iter().map(|(xt, pt)| pt * post.jwae(xt)).sum()
}

/// Attackers' weighted average entropy: jwae averaged over target inputs.
pub fn awae_enumerated(scenario: &FiniteScenario, attacker: &[i64]) -> Result<EntropyValue> {
    scenario.check_vector(attacker, scenario.attackers, "attacker")?;
    let spectators = scenario.spectator_sum();
    Ok(EntropyValue(awae_with(scenario, &spectators, attacker)))
}

/// `H(X_T | X_A = x_A, O)` straight from the joint table of `(x_T, o)`,
/// as `H(X_T, O) − H(O)`.
pub fn conditional_entropy_direct(
    scenario: &FiniteScenario,
    attacker: &[i64],
) -> Result<EntropyValue> {
    scenario.check_vector(attacker, scenario.attackers, "attacker")?;
    let spectators = scenario.spectator_sum();
    let base: i64 = attacker.iter().sum();
    let mut joint = Vec::new();
    let mut output: BTreeMap<i64, f64> = BTreeMap::new();
    for (xt, pt) in scenario.vectors(scenario.targets) {
        let st: i64 = xt.iter().sum();
        for (&s, &ps) in &spectators {
            let p = pt * ps;
            joint.push(p);
            *output.entry(base + st + s).or_insert(0.0) += p;
        }
    }
    let marginal: Vec<f64> = output.into_values().collect();
    Ok(EntropyValue(
        entropy_of_weights(&joint) - entropy_of_weights(&marginal),
    ))
}

/// Result of checking that awae does not depend on the attacker's input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceCheck {
    /// `max − min` of awae over all attacker vectors.
    pub spread: f64,
    pub min: f64,
    pub max: f64,
    pub attacker_vectors: usize,
}

/// Evaluates awae for every attacker vector and reports the spread.
pub fn verify_attacker_independence(scenario: &FiniteScenario) -> Result<IndependenceCheck> {
    let spectators = scenario.spectator_sum();
    let values: Vec<f64> = scenario
        .vectors(scenario.attackers)
        .par_iter()
        .map(|(xa, _)| awae_with(scenario, &spectators, xa))
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(IndependenceCheck {
        spread: max - min,
        min,
        max,
        attacker_vectors: values.len(),
    })
}

/// Sample covariance of the two outputs with its standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McCovariance {
    pub cov: CovMatrix2,
    /// Standard error of each entry of `cov`.
    pub std_err: [[f64; 2]; 2],
    pub mean: [f64; 2],
    pub samples: u64,
}

impl McCovariance {
    /// Largest `|empirical − reference| / std_err` over the four entries.
    pub fn max_z(&self, reference: &CovMatrix2) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let z = (self.cov.0[i][j] - reference.0[i][j]).abs() / self.std_err[i][j];
                worst = worst.max(z);
            }
        }
        worst
    }
}

/// Running first and second moments of a pair, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: [f64; 2],
    m2: [[f64; 2]; 2],
}

impl Moments {
    fn push(&mut self, x: [f64; 2]) {
        self.n += 1.0;
        let d_old = [x[0] - self.mean[0], x[1] - self.mean[1]];
        self.mean[0] += d_old[0] / self.n;
        self.mean[1] += d_old[1] / self.n;
        let d_new = [x[0] - self.mean[0], x[1] - self.mean[1]];
        for i in 0..2 {
            for j in 0..2 {
                self.m2[i][j] += d_old[i] * d_new[j];
            }
        }
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = [other.mean[0] - self.mean[0], other.mean[1] - self.mean[1]];
        let mut out = Moments {
            n,
            mean: [
                self.mean[0] + delta[0] * other.n / n,
                self.mean[1] + delta[1] * other.n / n,
            ],
            m2: self.m2,
        };
        for i in 0..2 {
            for j in 0..2 {
                out.m2[i][j] += other.m2[i][j] + delta[i] * delta[j] * self.n * other.n / n;
            }
        }
        out
    }
}

/// Seeded Monte Carlo estimate of the covariance of `(O₁, O₂)` (participation
/// twice) or `(O₁, O₂′)` (once), with zero-mean inputs.
pub fn monte_carlo_covariance(
    cfg: &TwoExecConfig,
    samples: u64,
    seed: u64,
) -> Result<McCovariance> {
    monte_carlo_covariance_with_mean(cfg, 0.0, samples, seed)
}

/// As [`monte_carlo_covariance`], with every party's input mean set to `mean`.
pub fn monte_carlo_covariance_with_mean(
    cfg: &TwoExecConfig,
    mean: f64,
    samples: u64,
    seed: u64,
) -> Result<McCovariance> {
    cfg.validate()?;
    if samples < MIN_MC_SAMPLES {
        return Err(Error::domain(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    if !mean.is_finite() {
        return Err(Error::domain("mean must be finite"));
    }

    let group = |k: u64| -> Result<Option<Normal<f64>>> {
        if k == 0 {
            return Ok(None);
        }
        let kf = k as f64;
        Normal::new(kf * mean, (kf * cfg.sigma2).sqrt())
            .map(Some)
            .map_err(|e| Error::domain(e.to_string()))
    };
    let groups = [
        group(cfg.targets)?,
        group(cfg.s0)?,
        group(cfg.s1)?,
        group(cfg.s2)?,
    ];
    let twice = cfg.participation == Participation::Twice;

    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                let mut draw = [0.0; 4];
                for (slot, g) in draw.iter_mut().zip(&groups) {
                    if let Some(g) = g {
                        *slot = g.sample(&mut rng);
                    }
                }
                let [xt, x0, x1, x2] = draw;
                let o1 = xt + x0 + x1;
                let o2 = if twice { xt + x0 + x2 } else { x0 + x2 };
                m.push([o1, o2]);
            }
            m
        })
        .collect();
    let total = partials
        .into_iter()
        .fold(Moments::default(), Moments::merge);

    let denom = total.n - 1.0;
    let c = |i: usize, j: usize| total.m2[i][j] / denom;
    let cov = CovMatrix2::new(c(0, 0), 0.5 * (c(0, 1) + c(1, 0)), c(1, 1));
    // For Gaussian data Var(s_ij) = (s_ii s_jj + s_ij²) / (N − 1).
    let mut std_err = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let v = cov.0[i][i] * cov.0[j][j] + cov.0[i][j] * cov.0[i][j];
            std_err[i][j] = (v / denom).sqrt();
        }
    }
    Ok(McCovariance {
        cov,
        std_err,
        mean: total.mean,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: u64, a: u64, t: u64, s: u64) -> FiniteScenario {
        FiniteScenario::from_dist(&DistributionSpec::uniform(n).unwrap(), a, t, s, 1e-7).unwrap()
    }

    #[test]
    fn no_spectators_reveals_target() {
        let sc = uniform(8, 1, 1, 0);
        for xa in 0..8 {
            for xt in 0..8 {
                assert_eq!(jwae(&sc, &[xa], &[xt]).unwrap().bits(), 0.0);
            }
            assert_eq!(awae_enumerated(&sc, &[xa]).unwrap().bits(), 0.0);
        }
        assert_eq!(twae(&sc, &[3]).unwrap().bits(), 0.0);
    }

    #[test]
    fn twae_is_symmetric_and_peaks_mid_range() {
        let sc = uniform(16, 1, 1, 1);
        let curve: Vec<f64> = (0..16).map(|x| twae(&sc, &[x]).unwrap().bits()).collect();
        for x in 0..16 {
            assert!((curve[x] - curve[15 - x]).abs() < 1e-9);
        }
        let peak = curve.iter().copied().fold(f64::MIN, f64::max);
        assert!((curve[7] - peak).abs() < 1e-12);
        assert!(curve[0] < curve[7]);
    }

    #[test]
    fn twae_rises_with_spectators() {
        let curves: Vec<Vec<f64>> = (1..=3)
            .map(|s| {
                let sc = uniform(8, 1, 1, s);
                (0..8).map(|x| twae(&sc, &[x]).unwrap().bits()).collect()
            })
            .collect();
        for x in 0..8 {
            assert!(curves[0][x] < curves[1][x] && curves[1][x] < curves[2][x]);
        }
    }

    #[test]
    fn awae_two_routes_agree() {
        let sc = uniform(6, 1, 2, 2);
        for xa in 0..6 {
            let a = awae_enumerated(&sc, &[xa]).unwrap().bits();
            let b = conditional_entropy_direct(&sc, &[xa]).unwrap().bits();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn large_spectator_groups_use_convolution() {
        // Same answer whether spectators are enumerated or convolved.
        let small = uniform(4, 1, 1, 3);
        let conv = FiniteScenario {
            spectators: 4,
            ..small.clone()
        };
        let tuples = small
            .vectors(4)
            .into_iter()
            .fold(BTreeMap::new(), |mut m, (xs, p)| {
                *m.entry(xs.iter().sum::<i64>()).or_insert(0.0) += p;
                m
            });
        let summed = conv.spectator_sum();
        for (k, p) in tuples {
            assert!((summed[&k] - p).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_domain_has_zero_spread() {
        let sc = FiniteScenario::new(Pmf::point_mass(5), 2, 1, 2).unwrap();
        let c = verify_attacker_independence(&sc).unwrap();
        assert_eq!(c.spread, 0.0);
        assert_eq!(c.attacker_vectors, 1);
    }

    #[test]
    fn budget_and_input_errors() {
        assert!(matches!(
            FiniteScenario::from_dist(&DistributionSpec::uniform(256).unwrap(), 1, 1, 3, 1e-7),
            Err(Error::Budget(_))
        ));
        assert!(FiniteScenario::from_dist(
            &DistributionSpec::normal(0.0, 1.0).unwrap(),
            1,
            1,
            1,
            1e-7
        )
        .is_err());
        let sc = uniform(8, 1, 1, 1);
        assert!(jwae(&sc, &[8], &[0]).is_err());
        assert!(jwae(&sc, &[1, 2], &[0]).is_err());
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<[f64; 2]> = (0..100)
            .map(|i| {
                let f = i as f64;
                [f.sin() * 3.0 + 1.0, (f * 0.7).cos() - f * 0.01]
            })
            .collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        for i in 0..2 {
            assert!((merged.mean[i] - whole.mean[i]).abs() < 1e-12);
            for j in 0..2 {
                assert!((merged.m2[i][j] - whole.m2[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let cfg = TwoExecConfig::new(4.0, 1, 2, 2, 2, Participation::Twice).unwrap();
        let a = monte_carlo_covariance(&cfg, 200_000, 42).unwrap();
        let b = monte_carlo_covariance(&cfg, 200_000, 42).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_covariance(&cfg, 200_000, 43).unwrap();
        assert_ne!(a.cov, c.cov);
        assert!(monte_carlo_covariance(&cfg, 10, 42).is_err());
    }
}
