//! Random directions h for projecting the functional covariate.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpc::FpcBasis;
use crate::funspace::{Curve, FunctionalSample};
use crate::simlab::process::ou_path;

/// Random process the directions are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Sampler {
    /// Σ_{j≤jₙ} ηⱼ êⱼ with ηⱼ ~ N(0, sⱼ²), sⱼ² the variance of the j-th scores.
    #[serde(rename = "i")]
    #[value(name = "i")]
    DataDriven,
    /// Same span as sampler i but with ηⱼ ~ N(0, 1).
    #[serde(rename = "ii")]
    #[value(name = "ii")]
    UnitCoefficients,
    /// Ornstein-Uhlenbeck path (α = 1/2, σ = 1) independent of the data.
    #[serde(rename = "iii")]
    #[value(name = "iii")]
    OrnsteinUhlenbeck,
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::DataDriven => "i",
            Sampler::UnitCoefficients => "ii",
            Sampler::OrnsteinUhlenbeck => "iii",
        })
    }
}

pub const OU_DIRECTION_ALPHA: f64 = 0.5;
pub const OU_DIRECTION_SIGMA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub curve: Curve,
    pub sampler: Sampler,
    /// Position of this direction among the K drawn for one test.
    pub index: usize,
}

/// jₙ = min{k : Σ_{j≤k} λ̂ⱼ² / Σ_{j≤m} λ̂ⱼ² ≥ r}.
pub fn variance_threshold_rank(eigenvalues: &[f64], r: f64) -> Result<usize> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "variance threshold must lie in (0,1], got {r}"
        )));
    }
    let total: f64 = eigenvalues.iter().map(|l| l * l).sum();
    if eigenvalues.is_empty() || total <= 0.0 {
        return Err(Error::ZeroEigenvalue(1));
    }
    let m = eigenvalues.len();
    let mut acc = 0.0;
    for (k, l) in eigenvalues.iter().enumerate() {
        acc += l * l;
        if k + 1 == m || acc / total >= r {
            return Ok(k + 1);
        }
    }
    Ok(m)
}

/// Draws one direction from `sampler`.
pub fn sample_direction<R: Rng + ?Sized>(
    basis: &FpcBasis,
    r: f64,
    sampler: Sampler,
    index: usize,
    rng: &mut R,
) -> Result<Direction> {
    let values = match sampler {
        Sampler::OrnsteinUhlenbeck => {
            ou_path(basis.grid(), OU_DIRECTION_ALPHA, OU_DIRECTION_SIGMA, rng)
        }
        Sampler::DataDriven | Sampler::UnitCoefficients => {
            let jn = variance_threshold_rank(basis.eigenvalues(), r)?;
            let mut h = vec![0.0; basis.grid().len()];
            for j in 0..jn {
                let z: f64 = rng.sample(StandardNormal);
                let eta = match sampler {
                    // score variance with divisor n equals λ̂ⱼ
                    Sampler::DataDriven => z * basis.eigenvalues()[j].sqrt(),
                    _ => z,
                };
                for (hv, e) in h.iter_mut().zip(basis.eigenfunction(j).values()) {
                    *hv += eta * e;
                }
            }
            h
        }
    };
    Ok(Direction {
        curve: Curve::new(values)?,
        sampler,
        index,
    })
}

/// Data-driven direction (sampler i).
pub fn sample_direction_datadriven<R: Rng + ?Sized>(
    basis: &FpcBasis,
    r: f64,
    rng: &mut R,
) -> Result<Direction> {
    sample_direction(basis, r, Sampler::DataDriven, 0, rng)
}

/// Xᵢʰ = ⟨Xᵢ, h⟩ for every curve of the sample.
pub fn project(sample: &FunctionalSample, h: &Direction) -> Result<Vec<f64>> {
    if h.curve.len() != sample.g() {
        return Err(Error::GridMismatch);
    }
    let grid = sample.grid();
    Ok(sample
        .rows()
        .map(|x| grid.dot_unchecked(x, h.curve.values()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpc::compute_fpc;
    use crate::funspace::{center, Grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threshold_rank_arithmetic() {
        // λ̂² = (4, 1, 0.01): cumulative ratios 0.798, 0.998, 1
        let l = [2.0, 1.0, 0.1];
        assert_eq!(variance_threshold_rank(&l, 0.95).unwrap(), 2);
        assert_eq!(variance_threshold_rank(&l, 1.0).unwrap(), 3);
        assert_eq!(variance_threshold_rank(&l, 0.5).unwrap(), 1);
        assert!(variance_threshold_rank(&l, 0.0).is_err());
        assert!(variance_threshold_rank(&l, 1.5).is_err());
        assert!(variance_threshold_rank(&[0.0, 0.0], 0.9).is_err());
        assert!(variance_threshold_rank(&[], 0.9).is_err());
    }

    fn sample_on_span(g: usize) -> (FunctionalSample, Grid) {
        let grid = Grid::equidistant(g).unwrap();
        let e1 = grid.sample_fn(|t| 2f64.sqrt() * (std::f64::consts::PI * t).sin());
        let rows: Vec<Vec<f64>> = [-1.5, -0.5, 0.5, 1.5]
            .iter()
            .map(|c| e1.values().iter().map(|v| c * v).collect())
            .collect();
        (FunctionalSample::from_rows(grid.clone(), &rows).unwrap(), grid)
    }

    #[test]
    fn projections() {
        let (s, grid) = sample_on_span(201);
        let one = Direction {
            curve: grid.sample_fn(|_| 1.0),
            sampler: Sampler::DataDriven,
            index: 0,
        };
        let p = project(&s, &one).unwrap();
        for (i, x) in s.rows().enumerate() {
            let integral: f64 = x.iter().zip(grid.weights()).map(|(a, w)| a * w).sum();
            assert!((p[i] - integral).abs() < 1e-15);
        }
        let e2 = Direction {
            curve: grid.sample_fn(|t| 2f64.sqrt() * (2.0 * std::f64::consts::PI * t).sin()),
            ..one.clone()
        };
        assert!(project(&s, &e2).unwrap().iter().all(|v| v.abs() < 1e-8));

        let ramp = FunctionalSample::from_rows(grid.clone(), &[grid.sample_fn(|t| t).into_values()]).unwrap();
        let h = Direction {
            curve: grid.sample_fn(|t| t),
            ..one.clone()
        };
        assert!((project(&ramp, &h).unwrap()[0] - 1.0 / 3.0).abs() < 1e-4);

        let short = Direction {
            curve: Curve::zeros(10),
            ..one
        };
        assert!(matches!(project(&s, &short), Err(Error::GridMismatch)));
    }

    #[test]
    fn directions_live_in_leading_span() {
        let (s, _) = sample_on_span(51);
        let (c, _) = center(&s);
        let basis = compute_fpc(&c, 3).unwrap();
        assert_eq!(basis.rank(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for sampler in [Sampler::DataDriven, Sampler::UnitCoefficients] {
            let h = sample_direction(&basis, 0.95, sampler, 0, &mut rng).unwrap();
            let e = basis.eigenfunction(0).values();
            let coef = c.grid().dot(h.curve.values(), e).unwrap();
            for (hv, ev) in h.curve.values().iter().zip(e) {
                assert!((hv - coef * ev).abs() < 1e-12);
            }
        }
        let ou = sample_direction(&basis, 0.95, Sampler::OrnsteinUhlenbeck, 3, &mut rng).unwrap();
        assert_eq!(ou.index, 3);
        assert_eq!(ou.curve.len(), 51);
    }
}
