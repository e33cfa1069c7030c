//! The nine simulation scenarios and their deviations from linearity.
//!
//! Scenario Sk generates Y = ⟨X, ρₖ⟩ ± δ_d Δ(X) + ε with ε ~ N(0, σ²), where σ²
//! makes R² = Var⟨X,ρₖ⟩ / (Var⟨X,ρₖ⟩ + σ²) equal 0.95 under the null.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::funspace::{Curve, FunctionalSample, Grid};
use crate::rng::{stream, tag};

use super::process::{gen_process, ProcessKind};

/// Discretization of every scenario.
pub const SCENARIO_GRID_POINTS: usize = 201;
/// Target coefficient of determination under the null.
pub const R_SQUARED: f64 = 0.95;
/// Monte Carlo draws behind Var⟨X, ρ⟩.
pub const SIGNAL_VARIANCE_DRAWS: usize = 100_000;
const SIGNAL_VARIANCE_SEED: u64 = 20_170_424;
const SIGNAL_VARIANCE_CHUNK: usize = 2_000;

/// Non-linear terms added under the alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Deviation {
    /// Δ₁(X) = ‖X‖.
    Norm,
    /// Δ₂(X) = 25 ∫∫ sin(2πts) s(1−s) t(1−t) X(s) X(t) ds dt.
    SinKernel,
    /// Δ₃(X) = ⟨e^{−X}, X²⟩.
    ExpWeighted,
}

impl Deviation {
    pub fn from_index(k: usize) -> Result<Self> {
        match k {
            1 => Ok(Deviation::Norm),
            2 => Ok(Deviation::SinKernel),
            3 => Ok(Deviation::ExpWeighted),
            _ => Err(Error::InvalidArgument(format!("unknown deviation {k}"))),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Deviation::Norm => 1,
            Deviation::SinKernel => 2,
            Deviation::ExpWeighted => 3,
        }
    }
}

fn sin_kernel(s: f64, t: f64) -> f64 {
    25.0 * (2.0 * PI * t * s).sin() * s * (1.0 - s) * t * (1.0 - t)
}

/// Δₖ(X) evaluated with the grid's tensor trapezoidal rule.
pub fn deviation(kind: usize, x: &Curve, grid: &Grid) -> Result<f64> {
    DeviationTerm::new(Deviation::from_index(kind)?, grid).evaluate(x.values())
}

/// A deviation bound to a grid, with the Δ₂ kernel tabulated once.
#[derive(Debug, Clone)]
pub struct DeviationTerm {
    kind: Deviation,
    grid: Grid,
    /// w_k w_l K(t_k, t_l), row-major G×G, only for Δ₂.
    kernel: Vec<f64>,
}

impl DeviationTerm {
    pub fn new(kind: Deviation, grid: &Grid) -> Self {
        let kernel = match kind {
            Deviation::SinKernel => {
                let (t, w) = (grid.points(), grid.weights());
                let g = t.len();
                let mut k = vec![0.0; g * g];
                for a in 0..g {
                    for b in 0..g {
                        k[a * g + b] = w[a] * w[b] * sin_kernel(t[a], t[b]);
                    }
                }
                k
            }
            _ => Vec::new(),
        };
        Self {
            kind,
            grid: grid.clone(),
            kernel,
        }
    }

    pub fn kind(&self) -> Deviation {
        self.kind
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        ensure_len("curve", self.grid.len(), x.len())?;
        Ok(match self.kind {
            Deviation::Norm => self.grid.dot_unchecked(x, x).sqrt(),
            Deviation::SinKernel => {
                let g = x.len();
                self.kernel
                    .chunks_exact(g)
                    .zip(x)
                    .map(|(row, xa)| xa * row.iter().zip(x).map(|(k, xb)| k * xb).sum::<f64>())
                    .sum()
            }
            Deviation::ExpWeighted => x
                .iter()
                .zip(self.grid.weights())
                .map(|(v, w)| w * (-v).exp() * v * v)
                .sum(),
        })
    }
}

/// ψⱼ(t) = √2 sin((j − ½)πt), the Brownian-motion eigenfunctions.
pub fn psi(j: f64, t: f64) -> f64 {
    SQRT_2 * ((j - 0.5) * PI * t).sin()
}

/// ψ̃ⱼ = ψ_{j+½}, the Brownian-bridge eigenfunctions.
pub fn psi_bridge(j: f64, t: f64) -> f64 {
    psi(j + 0.5, t)
}

/// φⱼ(t) = √2 cos(jπt).
pub fn phi(j: f64, t: f64) -> f64 {
    SQRT_2 * (j * PI * t).cos()
}

/// ρₖ(t) of scenario k.
pub fn scenario_rho(k: usize, t: f64) -> Result<f64> {
    let hhn_rho = |t: f64| {
        (1..=20)
            .map(|j| {
                let jf = j as f64;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                2f64.powf(1.5) * sign * jf.powi(-2) * phi(jf, t)
            })
            .sum::<f64>()
    };
    Ok(match k {
        1 => (2.0 * psi(1.0, t) + 4.0 * psi(2.0, t) + 5.0 * psi(3.0, t)) / SQRT_2,
        2 => (2.0 * psi_bridge(1.0, t) + 4.0 * psi_bridge(2.0, t) + 5.0 * psi_bridge(3.0, t)) / SQRT_2,
        3 => (2.0 * psi(2.0, t) + 4.0 * psi(3.0, t) + 5.0 * psi(7.0, t)) / SQRT_2,
        4 | 5 => hhn_rho(t),
        6 => (15.0 * t * t + 10.0).ln() + (4.0 * PI * t).cos(),
        7 => (2.0 * PI * t).sin() - (2.0 * PI * t).cos(),
        8 => t - (t - 0.75).powi(2),
        9 => PI * PI * (t * t - 1.0 / 3.0),
        _ => return Err(scenario_range(k)),
    })
}

fn scenario_range(k: usize) -> Error {
    Error::InvalidArgument(format!("scenario must be in 1..=9, got {k}"))
}

/// Process, signed deviation and δ-vector of scenario k.
pub fn scenario_design(k: usize) -> Result<(ProcessKind, Deviation, f64, [f64; 3])> {
    use Deviation::*;
    use ProcessKind::*;
    Ok(match k {
        1 => (BrownianMotion, Norm, 1.0, [0.0, 0.25, 0.75]),
        2 => (BrownianBridge, SinKernel, -1.0, [0.0, 2.0, 7.5]),
        3 => (BrownianMotion, Norm, -1.0, [0.0, 0.2, 0.5]),
        4 => (Hhn { l: 1 }, SinKernel, -1.0, [0.0, 1.0, 3.0]),
        5 => (Hhn { l: 2 }, SinKernel, -1.0, [0.0, 1.0, 3.0]),
        6 => (BrownianMotion, Norm, 1.0, [0.0, 0.2, 1.0]),
        7 => (ProcessKind::OU, SinKernel, -1.0, [0.0, 0.25, 1.0]),
        8 => (ProcessKind::OU, ExpWeighted, -1.0, [0.0, 0.01, 0.1]),
        9 => (ProcessKind::GBM, ExpWeighted, 1.0, [0.0, 0.5, 2.5]),
        _ => return Err(scenario_range(k)),
    })
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub id: usize,
    pub grid: Grid,
    pub rho: Curve,
    pub process: ProcessKind,
    pub deviation: DeviationTerm,
    /// Sign in front of δ_d Δ.
    pub sign: f64,
    pub deltas: [f64; 3],
    /// Monte Carlo estimate of Var⟨X, ρ⟩.
    pub signal_variance: f64,
    pub sigma2: f64,
}

impl ScenarioSpec {
    pub fn name(&self) -> String {
        format!("S{}", self.id)
    }
}

/// σ² = Var⟨X,ρ⟩ (1 − R²)/R².
pub fn noise_variance(signal_variance: f64) -> f64 {
    signal_variance * (1.0 - R_SQUARED) / R_SQUARED
}

/// Scenario k on the 201-point grid. The signal variance is computed once per
/// scenario and cached for the life of the process.
pub fn scenario(k: usize) -> Result<ScenarioSpec> {
    static CACHE: [OnceLock<f64>; 9] = [const { OnceLock::new() }; 9];
    if !(1..=9).contains(&k) {
        return Err(scenario_range(k));
    }
    let grid = Grid::equidistant(SCENARIO_GRID_POINTS)?;
    let rho = rho_curve(k, &grid)?;
    let (process, _, _, _) = scenario_design(k)?;
    let var = match CACHE[k - 1].get() {
        Some(v) => *v,
        None => {
            let v = signal_variance(process, &rho, &grid, SIGNAL_VARIANCE_DRAWS, SIGNAL_VARIANCE_SEED)?;
            *CACHE[k - 1].get_or_init(|| v)
        }
    };
    build(k, grid, rho, var)
}

/// Scenario k on an arbitrary grid with a fresh signal-variance estimate.
pub fn scenario_on_grid(k: usize, grid: &Grid, draws: usize, seed: u64) -> Result<ScenarioSpec> {
    let rho = rho_curve(k, grid)?;
    let (process, _, _, _) = scenario_design(k)?;
    let var = signal_variance(process, &rho, grid, draws, seed)?;
    build(k, grid.clone(), rho, var)
}

fn build(k: usize, grid: Grid, rho: Curve, signal_variance: f64) -> Result<ScenarioSpec> {
    let (process, dev, sign, deltas) = scenario_design(k)?;
    Ok(ScenarioSpec {
        id: k,
        deviation: DeviationTerm::new(dev, &grid),
        grid,
        rho,
        process,
        sign,
        deltas,
        signal_variance,
        sigma2: noise_variance(signal_variance),
    })
}

pub fn rho_curve(k: usize, grid: &Grid) -> Result<Curve> {
    let values = grid
        .points()
        .iter()
        .map(|&t| scenario_rho(k, t))
        .collect::<Result<Vec<_>>>()?;
    Curve::new(values)
}

/// Sample variance of ⟨X, ρ⟩ over `draws` simulated curves.
pub fn signal_variance(
    process: ProcessKind,
    rho: &Curve,
    grid: &Grid,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    if draws < 2 {
        return Err(Error::InvalidArgument("need at least two draws".into()));
    }
    let chunks = draws.div_ceil(SIGNAL_VARIANCE_CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let size = SIGNAL_VARIANCE_CHUNK.min(draws - c * SIGNAL_VARIANCE_CHUNK);
            let mut rng = stream(seed, &[tag::SIGNAL_VARIANCE, c as u64]);
            let x = gen_process(process, size, grid, &mut rng)?;
            Ok(x.rows().map(|r| grid.dot_unchecked(r, rho.values())).collect())
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = parts.into_iter().flatten().collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Responses of scenario `spec` at deviation index `d` ∈ {0, 1, 2}.
pub fn gen_response<R: Rng + ?Sized>(
    spec: &ScenarioSpec,
    x: &FunctionalSample,
    d: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    gen_response_with_noise(spec, x, d, spec.sigma2, rng)
}

/// As [`gen_response`] with an explicit noise variance.
pub fn gen_response_with_noise<R: Rng + ?Sized>(
    spec: &ScenarioSpec,
    x: &FunctionalSample,
    d: usize,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if d > 2 {
        return Err(Error::InvalidArgument(format!("deviation index must be 0, 1 or 2, got {d}")));
    }
    if sigma2.is_nan() || sigma2 < 0.0 {
        return Err(Error::InvalidArgument("noise variance must be non-negative".into()));
    }
    ensure_len("curve", spec.grid.len(), x.g())?;
    let delta = spec.sign * spec.deltas[d];
    let sd = sigma2.sqrt();
    x.rows()
        .map(|xi| {
            let mut y = spec.grid.dot_unchecked(xi, spec.rho.values());
            if delta != 0.0 {
                y += delta * spec.deviation.evaluate(xi)?;
            }
            if sd > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                y += sd * z;
            }
            Ok(y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_exp_deviations_of_constants() {
        let grid = Grid::equidistant(201).unwrap();
        let zero = Curve::zeros(201);
        let two = grid.sample_fn(|_| 2.0);
        let one = grid.sample_fn(|_| 1.0);
        assert_eq!(deviation(1, &zero, &grid).unwrap(), 0.0);
        assert!((deviation(1, &two, &grid).unwrap() - 2.0).abs() < 1e-12);
        assert!((deviation(3, &one, &grid).unwrap() - (-1f64).exp()).abs() < 1e-4);
        assert!(deviation(4, &one, &grid).is_err());
    }

    #[test]
    fn sin_kernel_against_refined_grid() {
        let grid = Grid::equidistant(201).unwrap();
        let fine = Grid::equidistant(401).unwrap();
        let coarse = deviation(2, &grid.sample_fn(|_| 1.0), &grid).unwrap();
        // independent double sum at double resolution
        let (t, w) = (fine.points(), fine.weights());
        let mut refined = 0.0;
        for a in 0..t.len() {
            for b in 0..t.len() {
                refined += w[a] * w[b] * sin_kernel(t[a], t[b]);
            }
        }
        assert!((coarse - refined).abs() < 1e-6, "{coarse} vs {refined}");
    }

    #[test]
    fn s1_and_s9_tables() {
        assert_eq!(scenario_design(1).unwrap().3, [0.0, 0.25, 0.75]);
        assert_eq!(scenario_design(7).unwrap().3, [0.0, 0.25, 1.0]);
        assert_eq!(scenario_design(7).unwrap().2, -1.0);
        let grid = Grid::equidistant(201).unwrap();
        let rho9 = rho_curve(9, &grid).unwrap();
        let integral = grid.dot(rho9.values(), &vec![1.0; 201]).unwrap();
        assert!(integral.abs() < 1e-4, "{integral}");
        assert!(scenario_rho(0, 0.5).is_err());
        assert!(scenario_rho(10, 0.5).is_err());
        assert!(scenario(10).is_err());
    }

    #[test]
    fn rho_is_a_pure_function_of_t() {
        let g1 = Grid::equidistant(201).unwrap();
        let g2 = Grid::equidistant(401).unwrap();
        for k in 1..=9 {
            let a = rho_curve(k, &g1).unwrap();
            let b = rho_curve(k, &g2).unwrap();
            for i in 0..201 {
                assert!((a.values()[i] - b.values()[2 * i]).abs() < 1e-10, "S{k} i={i}");
            }
        }
    }

    #[test]
    fn noiseless_response_is_the_linear_predictor() {
        let spec = scenario_on_grid(1, &Grid::equidistant(101).unwrap(), 1000, 1).unwrap();
        let mut rng = stream(1, &[]);
        let x = gen_process(spec.process, 20, &spec.grid, &mut rng).unwrap();
        let y = gen_response_with_noise(&spec, &x, 0, 0.0, &mut rng).unwrap();
        for (xi, yi) in x.rows().zip(&y) {
            assert_eq!(*yi, spec.grid.dot_unchecked(xi, spec.rho.values()));
        }
        assert!(gen_response(&spec, &x, 3, &mut rng).is_err());
    }

    #[test]
    fn s1_noise_variance_matches_the_karhunen_loeve_value() {
        let lambda = |j: f64| 1.0 / ((j - 0.5).powi(2) * PI * PI);
        let var = (4.0 * lambda(1.0) + 16.0 * lambda(2.0) + 25.0 * lambda(3.0)) / 2.0;
        let spec = scenario(1).unwrap();
        assert!((spec.signal_variance - var).abs() < 0.03 * var, "{}", spec.signal_variance);
        assert!((spec.sigma2 - 0.07228).abs() < 0.03 * 0.07228);
        assert_eq!(spec.deltas[0], 0.0);
    }

    #[test]
    fn response_has_the_target_r_squared() {
        let spec = scenario(7).unwrap();
        let mut rng = stream(2, &[]);
        let x = gen_process(spec.process, 20_000, &spec.grid, &mut rng).unwrap();
        let y = gen_response(&spec, &x, 0, &mut rng).unwrap();
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let ratio = var / (spec.signal_variance + spec.sigma2);
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn deviation_shifts_the_mean_response() {
        let spec = scenario(1).unwrap();
        let mut rng = stream(3, &[]);
        let n = 20_000;
        let x = gen_process(spec.process, n, &spec.grid, &mut rng).unwrap();
        let y0 = gen_response(&spec, &x, 0, &mut rng).unwrap();
        let y2 = gen_response(&spec, &x, 2, &mut rng).unwrap();
        let shift = (y2.iter().sum::<f64>() - y0.iter().sum::<f64>()) / n as f64;
        // E||X|| from an independent sample
        let z = gen_process(spec.process, n, &spec.grid, &mut rng).unwrap();
        let norms: Vec<f64> = z.rows().map(|r| spec.grid.norm(r).unwrap()).collect();
        let mean_norm = norms.iter().sum::<f64>() / n as f64;
        let sd = (norms.iter().map(|v| (v - mean_norm).powi(2)).sum::<f64>() / n as f64).sqrt();
        let noise_se = (2.0 * spec.sigma2 / n as f64).sqrt();
        let se = (0.75 * sd / (n as f64).sqrt()).hypot(noise_se);
        assert!((shift - 0.75 * mean_norm).abs() < 4.0 * se, "{shift} vs {}", 0.75 * mean_norm);
    }
}
