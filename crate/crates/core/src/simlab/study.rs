//! Monte Carlo size and power experiments.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funspace::FunctionalSample;
use crate::rng::{derive_seed, stream, tag};
use crate::rptest::{fdr_combine, pvalue_from_count, test_flm, StatKind, TestConfig};

use super::process::gen_process;
use super::scenario::{gen_response, scenario, ScenarioSpec};

/// Nominal levels reported by every study.
pub const ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];

/// Accepts `S3`, `s3` or `3`.
pub fn parse_scenario(s: &str) -> Result<usize> {
    let digits = s.strip_prefix(['S', 's']).unwrap_or(s);
    match digits.parse::<usize>() {
        Ok(k) if (1..=9).contains(&k) => Ok(k),
        _ => Err(Error::InvalidArgument(format!("unknown scenario {s:?}"))),
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub scenarios: Vec<usize>,
    pub deviations: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Monte Carlo trials per cell.
    pub trials: usize,
    /// Template for every test; its seed is replaced per trial.
    pub test: TestConfig,
    pub seed: u64,
    /// Record wall time per cell.
    pub timing: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![1],
            deviations: vec![0],
            sizes: vec![50],
            trials: 500,
            test: TestConfig {
                bootstrap: 500,
                ..TestConfig::default()
            },
            seed: 0,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub scenario: String,
    pub d: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub projections: usize,
    #[serde(rename = "B")]
    pub bootstrap: usize,
    pub stat: StatKind,
    #[serde(rename = "M")]
    pub trials: usize,
    #[serde(rename = "reject_0.01")]
    pub reject_01: f64,
    #[serde(rename = "reject_0.05")]
    pub reject_05: f64,
    #[serde(rename = "reject_0.10")]
    pub reject_10: f64,
    pub mean_rank: f64,
    pub sd_rank: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl MonteCarloResult {
    pub fn rejection(&self, alpha: f64) -> Option<f64> {
        ALPHAS
            .iter()
            .position(|a| (a - alpha).abs() < 1e-12)
            .map(|i| [self.reject_01, self.reject_05, self.reject_10][i])
    }
}

struct Trial {
    p: f64,
    rank: usize,
}

/// Runs every (scenario, d, n) cell of `cfg` and returns one row per cell.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<MonteCarloResult>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if cfg.scenarios.is_empty() || cfg.deviations.is_empty() || cfg.sizes.is_empty() {
        return Err(Error::InvalidArgument("empty study design".into()));
    }
    let mut rows = Vec::new();
    for &k in &cfg.scenarios {
        let spec = scenario(k)?;
        for &d in &cfg.deviations {
            if d > 2 {
                return Err(Error::InvalidArgument(format!("deviation index must be 0, 1 or 2, got {d}")));
            }
            for &n in &cfg.sizes {
                let start = Instant::now();
                let trials: Vec<Trial> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|m| {
                        let (x, y) = trial_data(&spec, d, n, m, cfg.seed)?;
                        let test = TestConfig {
                            seed: trial_test_seed(k, d, n, m, cfg.seed),
                            ..cfg.test.clone()
                        };
                        let report = test_flm(&x, &y, &test)?;
                        Ok(Trial {
                            p: report.p_fdr,
                            rank: report.settings.rank.unwrap_or(0),
                        })
                    })
                    .collect::<Result<_>>()?;
                let elapsed = start.elapsed().as_secs_f64();
                rows.push(summarize(&spec.name(), d, n, cfg, &trials, cfg.timing.then_some(elapsed)));
            }
        }
    }
    Ok(rows)
}

/// The dataset of trial `m` in cell (scenario, d, n).
pub fn trial_data(
    spec: &ScenarioSpec,
    d: usize,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(FunctionalSample, Vec<f64>)> {
    let mut rng = stream(seed, &[tag::DATA, spec.id as u64, d as u64, n as u64, m as u64]);
    let x = gen_process(spec.process, n, &spec.grid, &mut rng)?;
    let y = gen_response(spec, &x, d, &mut rng)?;
    Ok((x, y))
}

/// Seed of the test applied in trial `m` of cell (k, d, n).
pub fn trial_test_seed(k: usize, d: usize, n: usize, m: usize, seed: u64) -> u64 {
    derive_seed(seed, &[tag::TEST, k as u64, d as u64, n as u64, m as u64])
}

fn summarize(
    name: &str,
    d: usize,
    n: usize,
    cfg: &StudyConfig,
    trials: &[Trial],
    wall_time: Option<f64>,
) -> MonteCarloResult {
    let m = trials.len() as f64;
    let rate = |alpha: f64| trials.iter().filter(|t| t.p < alpha).count() as f64 / m;
    let mean_rank = trials.iter().map(|t| t.rank as f64).sum::<f64>() / m;
    let sd_rank = if trials.len() > 1 {
        (trials
            .iter()
            .map(|t| (t.rank as f64 - mean_rank).powi(2))
            .sum::<f64>()
            / (m - 1.0))
            .sqrt()
    } else {
        0.0
    };
    MonteCarloResult {
        scenario: name.to_string(),
        d,
        n,
        projections: cfg.test.projections,
        bootstrap: cfg.test.bootstrap,
        stat: cfg.test.stat,
        trials: trials.len(),
        reject_01: rate(ALPHAS[0]),
        reject_05: rate(ALPHAS[1]),
        reject_10: rate(ALPHAS[2]),
        mean_rank,
        sd_rank,
        wall_time,
    }
}

/// One (K, B, α) cell of the discretization experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrRow {
    #[serde(rename = "K")]
    pub projections: usize,
    #[serde(rename = "B")]
    pub bootstrap: usize,
    #[serde(rename = "M")]
    pub trials: usize,
    pub alpha: f64,
    /// Rejection rate of p_fdr < α with p-values on {0, 1/B, …, 1}.
    pub rate: f64,
    /// The same with (p̂B + 1)/(B + 1).
    pub rate_corrected: f64,
    /// P[some p-value is exactly 0] = 1 − (B/(B+1))^K.
    pub floor: f64,
}

/// Rejection rates of the FDR rule applied to K independent discrete
/// p-values, each uniform on {0, 1/B, …, B/B}.
pub fn fdr_discretization_experiment(
    projections: &[usize],
    bootstraps: &[usize],
    trials: usize,
    alphas: &[f64],
    seed: u64,
) -> Result<Vec<FdrRow>> {
    if trials == 0 || projections.contains(&0) || bootstraps.contains(&0) {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    let mut rows = Vec::new();
    for &k in projections {
        for &b in bootstraps {
            let combined: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|m| {
                    let mut rng = stream(seed, &[tag::FDR, k as u64, b as u64, m as u64]);
                    let counts: Vec<usize> = (0..k).map(|_| rng.random_range(0..=b)).collect();
                    let plain: Vec<f64> = counts.iter().map(|&c| pvalue_from_count(c, b, false)).collect();
                    let corrected: Vec<f64> = counts.iter().map(|&c| pvalue_from_count(c, b, true)).collect();
                    Ok((fdr_combine(&plain)?, fdr_combine(&corrected)?))
                })
                .collect::<Result<_>>()?;
            let floor = 1.0 - (b as f64 / (b as f64 + 1.0)).powi(k as i32);
            for &alpha in alphas {
                let count = |f: fn(&(f64, f64)) -> f64| {
                    combined.iter().filter(|c| f(c) < alpha).count() as f64 / trials as f64
                };
                rows.push(FdrRow {
                    projections: k,
                    bootstrap: b,
                    trials,
                    alpha,
                    rate: count(|c| c.0),
                    rate_corrected: count(|c| c.1),
                    floor,
                });
            }
        }
    }
    Ok(rows)
}
