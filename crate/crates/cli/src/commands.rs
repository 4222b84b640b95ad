use leakwise::grammar::{parse_range, Record};
use leakwise::oracle::{
    monte_carlo_covariance_with_mean, verify_attacker_independence, FiniteScenario,
};
use leakwise::single::{awae, loss_report, solve_min_spectators};
use leakwise::two_exec::{covariance_o, covariance_o_prime, overlap_point, overlap_sweep};
use leakwise::{DistributionSpec, Participation, ScenarioConfig, TwoExecConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{ParticipationArg, SingleArgs, SolveArgs, TwoExecArgs, ValidateArgs};
use crate::error::{in_arg, CliError};

/// Enumeration checks must agree to this many bits, whatever the family.
const CLOSED_FORM_TOLERANCE: f64 = 1e-6;
const UNIFORM_SPREAD_TOLERANCE: f64 = 1e-9;
/// Truncating the Poisson support leaves a little attacker dependence.
const POISSON_SPREAD_TOLERANCE: f64 = 1e-6;
/// Monte Carlo entries may stray this many standard errors.
const MC_Z_TOLERANCE: f64 = 5.0;

#[derive(Debug, Serialize)]
pub struct SingleRow {
    pub dist: String,
    pub targets: u64,
    pub n: u64,
    /// Non-adversarial participants, `n + targets`.
    pub participants: u64,
    pub h_before: f64,
    pub h_after: f64,
    pub abs_loss: f64,
    pub rel_loss: f64,
}

#[derive(Debug, Serialize)]
pub struct TwoExecRow {
    pub sigma2: f64,
    pub targets: u64,
    pub participation: Participation,
    pub s0: u64,
    pub s1: u64,
    pub s2: u64,
    pub overlap: f64,
    pub h_prior: f64,
    pub h_after_first: f64,
    pub h_after_second: f64,
    pub ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveRow {
    pub dist: String,
    pub targets: u64,
    pub budget: f64,
    pub n: u64,
    pub participants: u64,
    pub rel_loss: f64,
}

#[derive(Debug, Serialize)]
pub struct ValidateRow {
    pub scenario: String,
    pub check: String,
    pub expected: f64,
    pub observed: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Parses comma-separated counts and inclusive ranges: `1,4,8..10`.
pub fn parse_counts(flag: &str, src: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in src.split(',') {
        let range = parse_range(part.trim()).map_err(|e| match CliError::from(e) {
            CliError::Parse { message, position } => CliError::Parse {
                message: format!("{flag} `{src}`: {message}"),
                position: position.map(|p| p + offset),
            },
            other => other,
        })?;
        out.extend(range);
        offset += part.len() + 1;
    }
    Ok(out)
}

fn parse_dists(specs: &[String]) -> Result<Vec<DistributionSpec>, CliError> {
    specs
        .iter()
        .map(|s| s.parse::<DistributionSpec>().map_err(in_arg("--dist", s)))
        .collect()
}

pub fn single(args: &SingleArgs, threshold: f64) -> Result<Vec<SingleRow>, CliError> {
    let dists = parse_dists(&args.dist)?;
    let targets = parse_counts("--targets", &args.targets)?;
    let spectators = parse_counts("--spectators", &args.spectators)?;
    let mut rows = Vec::new();
    for dist in &dists {
        for &t in &targets {
            let reports: Vec<_> = spectators
                .par_iter()
                .map(|&n| {
                    let sc = ScenarioConfig::new(*dist, t, n).with_threshold(threshold);
                    loss_report(&sc).map(|r| (n, r))
                })
                .collect::<Result<_, _>>()?;
            rows.extend(reports.into_iter().map(|(n, r)| SingleRow {
                dist: dist.to_string(),
                targets: t,
                n,
                participants: n + t,
                h_before: r.before,
                h_after: r.after,
                abs_loss: r.absolute_loss,
                rel_loss: r.relative_loss,
            }));
        }
    }
    Ok(rows)
}

pub fn two_exec(args: &TwoExecArgs) -> Result<Vec<TwoExecRow>, CliError> {
    let targets = parse_counts("--targets", &args.targets)?;
    let modes: &[Participation] = match args.participation {
        ParticipationArg::Twice => &[Participation::Twice],
        ParticipationArg::Once => &[Participation::Once],
        ParticipationArg::Both => &[Participation::Twice, Participation::Once],
    };
    let mut rows = Vec::new();
    for &t in &targets {
        for &mode in modes {
            let points = match (args.s0, args.s1, args.s2, &args.spectators_per_exec) {
                (Some(s0), Some(s1), Some(s2), _) => {
                    vec![overlap_point(&TwoExecConfig::new(
                        args.sigma2,
                        t,
                        s0,
                        s1,
                        s2,
                        mode,
                    )?)?]
                }
                (_, _, _, spe) => {
                    let counts =
                        parse_counts("--spectators-per-exec", spe.as_deref().unwrap_or("10"))?;
                    let mut points = Vec::new();
                    for n in counts {
                        points.extend(overlap_sweep(args.sigma2, t, n, mode)?);
                    }
                    points
                }
            };
            rows.extend(points.into_iter().map(|p| TwoExecRow {
                sigma2: args.sigma2,
                targets: t,
                participation: mode,
                s0: p.s0,
                s1: p.s1,
                s2: p.s2,
                overlap: p.overlap,
                h_prior: p.h_prior,
                h_after_first: p.h_after_first,
                h_after_second: p.h_after_second,
                ratio: p.ratio,
            }));
        }
    }
    Ok(rows)
}

pub fn solve(args: &SolveArgs, threshold: f64) -> Result<Vec<SolveRow>, CliError> {
    let dists = parse_dists(&args.dist)?;
    let targets = parse_counts("--targets", &args.targets)?;
    let mut rows = Vec::new();
    for dist in &dists {
        for &t in &targets {
            let n = solve_min_spectators(dist, t, args.budget, threshold)?;
            let sc = ScenarioConfig::new(*dist, t, n).with_threshold(threshold);
            rows.push(SolveRow {
                dist: dist.to_string(),
                targets: t,
                budget: args.budget,
                n,
                participants: n + t,
                rel_loss: loss_report(&sc)?.relative_loss,
            });
        }
    }
    Ok(rows)
}

pub fn validate(
    args: &ValidateArgs,
    threshold: f64,
    seed: u64,
) -> Result<Vec<ValidateRow>, CliError> {
    let mut rows = Vec::new();
    for src in &args.scenario {
        let rec = Record::parse(src).map_err(in_arg("--scenario", src))?;
        let dist = DistributionSpec::from_record(&rec, &["a", "t", "s", "s0", "s1", "s2", "p"])
            .map_err(in_arg("--scenario", src))?;
        let count = |key: &str, default: u64| -> Result<u64, CliError> {
            rec.get(key)
                .map(|f| f.parse_u64())
                .transpose()
                .map_err(in_arg("--scenario", src))
                .map(|v| v.unwrap_or(default))
        };
        match dist {
            DistributionSpec::Normal { mu, sigma2 } => {
                let participation = match rec.get("p") {
                    Some(f) => f.value.parse().map_err(|_| CliError::Parse {
                        message: format!("--scenario `{src}`: `p` must be `once` or `twice`"),
                        position: Some(f.value_pos),
                    })?,
                    None => Participation::Twice,
                };
                let cfg = TwoExecConfig::new(
                    sigma2,
                    count("t", 1)?,
                    count("s0", 1)?,
                    count("s1", 1)?,
                    count("s2", 1)?,
                    participation,
                )?;
                rows.extend(monte_carlo_rows(src, &cfg, mu, args.samples, seed)?);
            }
            _ => {
                let (a, t, s) = (count("a", 1)?, count("t", 1)?, count("s", 1)?);
                let sc = FiniteScenario::from_dist(&dist, a, t, s, threshold)?;
                let check = verify_attacker_independence(&sc)?;
                let spread_tol = match dist {
                    DistributionSpec::Poisson { .. } => POISSON_SPREAD_TOLERANCE,
                    _ => UNIFORM_SPREAD_TOLERANCE,
                };
                rows.push(ValidateRow {
                    scenario: src.clone(),
                    check: "attacker_spread".into(),
                    expected: 0.0,
                    observed: check.spread,
                    deviation: check.spread,
                    tolerance: spread_tol,
                    passed: check.spread < spread_tol,
                });
                let closed =
                    awae(&ScenarioConfig::new(dist, t, s).with_threshold(threshold))?.bits();
                let delta = (check.max - closed).abs().max((check.min - closed).abs());
                rows.push(ValidateRow {
                    scenario: src.clone(),
                    check: "closed_form_delta".into(),
                    expected: closed,
                    observed: check.max,
                    deviation: delta,
                    tolerance: CLOSED_FORM_TOLERANCE,
                    passed: delta < CLOSED_FORM_TOLERANCE,
                });
            }
        }
    }
    Ok(rows)
}

fn monte_carlo_rows(
    src: &str,
    cfg: &TwoExecConfig,
    mean: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<ValidateRow>, CliError> {
    let reference = match cfg.participation {
        Participation::Twice => covariance_o(cfg)?,
        Participation::Once => covariance_o_prime(cfg)?,
    };
    let mc = monte_carlo_covariance_with_mean(cfg, mean, samples, seed)?;
    let entries = [("cov_11", 0, 0), ("cov_12", 0, 1), ("cov_22", 1, 1)];
    Ok(entries
        .iter()
        .map(|&(name, i, j)| {
            let z = (mc.cov.0[i][j] - reference.0[i][j]).abs() / mc.std_err[i][j];
            ValidateRow {
                scenario: src.to_owned(),
                check: name.into(),
                expected: reference.0[i][j],
                observed: mc.cov.0[i][j],
                deviation: z,
                tolerance: MC_Z_TOLERANCE,
                passed: z < MC_Z_TOLERANCE,
            }
        })
        .collect())
}
