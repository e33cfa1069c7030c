//! Simulated functional covariates.
//!
//! Gaussian paths are generated from their exact finite-dimensional
//! transition laws on the grid (independent increments for BM, the AR(1)
//! recursion for OU), so the simulated grid values carry the exact
//! covariance with no truncation bias.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funspace::{FunctionalSample, Grid};

/// Number of terms of the HHN expansion.
pub const HHN_TERMS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProcessKind {
    /// Standard Brownian motion B with B(0) = 0.
    BrownianMotion,
    /// B(t) − t·B(1).
    BrownianBridge,
    /// Σ_{j≤20} ξⱼ √2 cos(jπt), ξⱼ ~ N(0, j^{−2l}).
    Hhn { l: u32 },
    /// Stationary OU with dX = −αX dt + σ dB, X(0) ~ N(0, σ²/2α).
    OrnsteinUhlenbeck { alpha: f64, sigma: f64 },
    /// s₀ exp{(μ − σ²/2)t + σB(t)}.
    GeometricBrownian { s0: f64, mu: f64, sigma: f64 },
}

impl ProcessKind {
    pub const OU: ProcessKind = ProcessKind::OrnsteinUhlenbeck {
        alpha: 1.0 / 3.0,
        sigma: 1.0,
    };
    pub const GBM: ProcessKind = ProcessKind::GeometricBrownian {
        s0: 2.0,
        mu: 0.5,
        sigma: 1.0,
    };

    pub fn name(&self) -> String {
        match self {
            ProcessKind::BrownianMotion => "BM".into(),
            ProcessKind::BrownianBridge => "BB".into(),
            ProcessKind::Hhn { l } => format!("HHN{l}"),
            ProcessKind::OrnsteinUhlenbeck { .. } => "OU".into(),
            ProcessKind::GeometricBrownian { .. } => "GBM".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProcessKind::BrownianMotion | ProcessKind::BrownianBridge => true,
            ProcessKind::Hhn { l } => l >= 1,
            ProcessKind::OrnsteinUhlenbeck { alpha, sigma } => alpha > 0.0 && sigma > 0.0,
            ProcessKind::GeometricBrownian { s0, mu, sigma } => {
                s0 > 0.0 && mu.is_finite() && sigma >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid parameters for {self:?}")))
        }
    }

    pub fn mean(&self, t: f64) -> f64 {
        match *self {
            ProcessKind::GeometricBrownian { s0, mu, .. } => s0 * (mu * t).exp(),
            _ => 0.0,
        }
    }

    /// Analytic Cov[X(s), X(t)].
    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        let m = s.min(t);
        match *self {
            ProcessKind::BrownianMotion => m,
            ProcessKind::BrownianBridge => m - s * t,
            ProcessKind::Hhn { l } => (1..=HHN_TERMS)
                .map(|j| {
                    let jf = j as f64;
                    let jp = jf * std::f64::consts::PI;
                    2.0 * jf.powi(-2 * l as i32) * (jp * s).cos() * (jp * t).cos()
                })
                .sum(),
            ProcessKind::OrnsteinUhlenbeck { alpha, sigma } => {
                sigma * sigma / (2.0 * alpha) * (-alpha * (s - t).abs()).exp()
            }
            ProcessKind::GeometricBrownian { s0, mu, sigma } => {
                s0 * s0 * (mu * (s + t)).exp() * ((sigma * sigma * m).exp() - 1.0)
            }
        }
    }
}

/// Writes one Brownian path on the grid into `out`.
pub fn brownian_path<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, out: &mut [f64]) {
    let mut prev_t = 0.0;
    let mut x = 0.0;
    for (o, &t) in out.iter_mut().zip(grid.points()) {
        let dt = t - prev_t;
        if dt > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += dt.sqrt() * z;
        }
        *o = x;
        prev_t = t;
    }
}

/// One stationary OU path on the grid.
pub fn ou_path<R: Rng + ?Sized>(grid: &Grid, alpha: f64, sigma: f64, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    ou_path_into(grid, alpha, sigma, rng, &mut out);
    out
}

fn ou_path_into<R: Rng + ?Sized>(grid: &Grid, alpha: f64, sigma: f64, rng: &mut R, out: &mut [f64]) {
    let stationary_sd = (sigma * sigma / (2.0 * alpha)).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    let mut x = stationary_sd * z;
    let mut prev_t = grid.points()[0];
    for (o, &t) in out.iter_mut().zip(grid.points()) {
        let dt = t - prev_t;
        if dt > 0.0 {
            let decay = (-alpha * dt).exp();
            let sd = stationary_sd * (1.0 - decay * decay).sqrt();
            let z: f64 = rng.sample(StandardNormal);
            x = decay * x + sd * z;
        }
        *o = x;
        prev_t = t;
    }
}

/// Simulates `n` curves of the given process on `grid`.
pub fn gen_process<R: Rng + ?Sized>(
    kind: ProcessKind,
    n: usize,
    grid: &Grid,
    rng: &mut R,
) -> Result<FunctionalSample> {
    kind.validate()?;
    let g = grid.len();
    let mut data = vec![0.0; n * g];
    let hhn_table: Vec<f64> = match kind {
        ProcessKind::Hhn { .. } => (1..=HHN_TERMS)
            .flat_map(|j| {
                grid.points().iter().map(move |&t| {
                    2f64.sqrt() * (j as f64 * std::f64::consts::PI * t).cos()
                })
            })
            .collect(),
        _ => Vec::new(),
    };
    let last = grid.points()[g - 1];
    for row in data.chunks_exact_mut(g) {
        match kind {
            ProcessKind::BrownianMotion => brownian_path(grid, rng, row),
            ProcessKind::BrownianBridge => {
                brownian_path(grid, rng, row);
                let b1 = if last < 1.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    row[g - 1] + (1.0 - last).sqrt() * z
                } else {
                    row[g - 1]
                };
                for (v, &t) in row.iter_mut().zip(grid.points()) {
                    *v -= t * b1;
                }
                if last >= 1.0 {
                    row[g - 1] = 0.0;
                }
            }
            ProcessKind::Hhn { l } => {
                row.iter_mut().for_each(|v| *v = 0.0);
                for j in 1..=HHN_TERMS {
                    let z: f64 = rng.sample(StandardNormal);
                    let xi = z * (j as f64).powi(-(l as i32));
                    let phi = &hhn_table[(j - 1) * g..j * g];
                    for (v, p) in row.iter_mut().zip(phi) {
                        *v += xi * p;
                    }
                }
            }
            ProcessKind::OrnsteinUhlenbeck { alpha, sigma } => {
                ou_path_into(grid, alpha, sigma, rng, row)
            }
            ProcessKind::GeometricBrownian { s0, mu, sigma } => {
                brownian_path(grid, rng, row);
                for (v, &t) in row.iter_mut().zip(grid.points()) {
                    *v = s0 * ((mu - 0.5 * sigma * sigma) * t + sigma * *v).exp();
                }
            }
        }
    }
    FunctionalSample::new(grid.clone(), data, n)
}
