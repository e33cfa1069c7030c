//! Goodness-of-fit tests on randomly projected marked empirical processes.
//!
//! [`test_flm`] checks the composite null that the regression function is
//! linear, m(X) = ⟨X, ρ⟩ for some ρ. [`test_simple`] checks a fully specified
//! regression function m₀, and [`test_significance`] is the case m₀ ≡ 0.
//!
//! Both draw K directions, compute the KS or CvM norm of the projected
//! process on each, calibrate every norm by the wild bootstrap and report the
//! FDR-combined p-value. No accept/reject decision is taken here.

mod bootstrap;
mod direction;
mod fdr;
mod statistic;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::flm::{estimate_rho, select_rank_sicc};
use crate::fpc::{compute_fpc, FpcBasis};
use crate::funspace::{center, center_response, FunctionalSample};
use crate::rng::{stream, tag};

pub use bootstrap::{
    fill_multipliers, golden_multiplier, pvalue_from_count, simple_bootstrap_pvalue,
    wild_bootstrap_pvalue, MultiplierSource, Refit, P_LOW, V_HIGH, V_LOW,
};
pub use direction::{
    project, sample_direction, sample_direction_datadriven, variance_threshold_rank, Direction,
    Sampler, OU_DIRECTION_ALPHA, OU_DIRECTION_SIGMA,
};
pub use fdr::fdr_combine;
pub use statistic::{process_statistic, ProjectedStat, ProjectionOrder, StatKind};

/// Draws per direction before a degenerate projection becomes an error.
pub const MAX_DIRECTION_ATTEMPTS: usize = 100;
/// A direction is degenerate when every |Xᵢʰ| is below this fraction of
/// maxᵢ‖Xᵢ‖·‖h‖.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Default upper bound for the SICc rank search.
pub const DEFAULT_MAX_RANK: usize = 10;

/// Null hypothesis being tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Null {
    /// m(X) = ⟨X, ρ⟩ for some ρ.
    Flm,
    /// m = m₀ for a given m₀.
    Simple,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    /// Number of random directions K.
    pub projections: usize,
    /// Bootstrap replicates B.
    pub bootstrap: usize,
    pub stat: StatKind,
    /// Variance threshold r of the data-driven samplers.
    pub variance_threshold: f64,
    /// Fixed dₙ; `None` selects it by SICc.
    pub rank: Option<usize>,
    /// Largest rank considered by SICc.
    pub max_rank: usize,
    pub sampler: Sampler,
    pub seed: u64,
    pub positive_correction: bool,
    /// Separate multipliers for every direction instead of one draw per replicate.
    pub independent_multipliers: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            projections: 5,
            bootstrap: 1000,
            stat: StatKind::Cvm,
            variance_threshold: 0.95,
            rank: None,
            max_rank: DEFAULT_MAX_RANK,
            sampler: Sampler::DataDriven,
            seed: 0,
            positive_correction: false,
            independent_multipliers: false,
        }
    }
}

impl TestConfig {
    fn validate(&self) -> Result<()> {
        if self.projections == 0 {
            return Err(Error::InvalidArgument("need at least one projection".into()));
        }
        if self.bootstrap == 0 {
            return Err(Error::InvalidArgument(
                "need at least one bootstrap replicate".into(),
            ));
        }
        if !(self.variance_threshold > 0.0 && self.variance_threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "variance threshold must lie in (0,1], got {}",
                self.variance_threshold
            )));
        }
        if self.max_rank == 0 {
            return Err(Error::InvalidArgument("max_rank must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub index: usize,
    pub statistic: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    #[serde(rename = "K")]
    pub projections: usize,
    #[serde(rename = "B")]
    pub bootstrap: usize,
    pub stat: StatKind,
    /// dₙ used by the composite test; absent for the simple null.
    pub rank: Option<usize>,
    pub r: f64,
    pub sampler: Sampler,
    pub seed: u64,
    pub positive_correction: bool,
    pub null: Null,
    pub independent_multipliers: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub p_fdr: f64,
    pub per_projection: Vec<ProjectionResult>,
    pub settings: Settings,
}

impl TestReport {
    pub fn pvalues(&self) -> Vec<f64> {
        self.per_projection.iter().map(|r| r.p).collect()
    }
}

/// Composite test of the functional linear model.
pub fn test_flm(x: &FunctionalSample, y: &[f64], cfg: &TestConfig) -> Result<TestReport> {
    cfg.validate()?;
    check_inputs(x, y)?;
    let (xc, _) = center(x);
    let (yc, _) = center_response(y);
    let basis = full_basis(&xc)?;

    let rank = match cfg.rank {
        Some(d) => d,
        None => auto_rank(&xc, &yc, &basis, cfg.max_rank)?,
    };
    let fit = estimate_rho(&xc, &yc, &basis, rank)?;
    let (per_projection, p_fdr) =
        run_projected(&xc, &basis, fit.residuals(), Refit::Composite(&fit), cfg)?;
    Ok(TestReport {
        p_fdr,
        per_projection,
        settings: settings(cfg, Some(rank), Null::Flm),
    })
}

/// Test of the simple null m = m₀, with marks Yᵢ − m₀(Xᵢ).
pub fn test_simple<F>(x: &FunctionalSample, y: &[f64], m0: F, cfg: &TestConfig) -> Result<TestReport>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    check_inputs(x, y)?;
    let marks: Vec<f64> = x.rows().zip(y).map(|(xi, yi)| yi - m0(xi)).collect();
    ensure_finite("marks", &marks)?;
    let (xc, _) = center(x);
    let basis = full_basis(&xc)?;
    let (per_projection, p_fdr) = run_projected(&xc, &basis, &marks, Refit::None, cfg)?;
    Ok(TestReport {
        p_fdr,
        per_projection,
        settings: settings(cfg, None, Null::Simple),
    })
}

/// Significance test m ≡ 0.
pub fn test_significance(x: &FunctionalSample, y: &[f64], cfg: &TestConfig) -> Result<TestReport> {
    test_simple(x, y, |_| 0.0, cfg)
}

/// SICc-selected rank, searched over 1..=min(max_rank, m, n − 3).
pub fn auto_rank(
    xc: &FunctionalSample,
    yc: &[f64],
    basis: &FpcBasis,
    max_rank: usize,
) -> Result<usize> {
    let cap = max_rank.min(basis.rank()).min(xc.n().saturating_sub(3));
    if cap <= 1 {
        return Ok(1);
    }
    Ok(select_rank_sicc(xc, yc, basis, cap)?.rank)
}

fn check_inputs(x: &FunctionalSample, y: &[f64]) -> Result<()> {
    if x.n() < 3 {
        return Err(Error::InvalidArgument(format!(
            "tests need n >= 3 curves, got {}",
            x.n()
        )));
    }
    ensure_len("response", x.n(), y.len())?;
    ensure_finite("response", y)
}

fn full_basis(xc: &FunctionalSample) -> Result<FpcBasis> {
    let basis = compute_fpc(xc, (xc.n() - 1).min(xc.g()))?;
    if basis.rank() == 0 {
        return Err(Error::ZeroEigenvalue(1));
    }
    Ok(basis)
}

fn settings(cfg: &TestConfig, rank: Option<usize>, null: Null) -> Settings {
    Settings {
        projections: cfg.projections,
        bootstrap: cfg.bootstrap,
        stat: cfg.stat,
        rank,
        r: cfg.variance_threshold,
        sampler: cfg.sampler,
        seed: cfg.seed,
        positive_correction: cfg.positive_correction,
        null,
        independent_multipliers: cfg.independent_multipliers,
    }
}

/// Draws direction `index`, resampling while the projections are degenerate.
pub fn draw_projection(
    xc: &FunctionalSample,
    basis: &FpcBasis,
    cfg: &TestConfig,
    index: usize,
) -> Result<(Direction, Vec<f64>)> {
    let scale = xc.max_norm();
    for attempt in 0..MAX_DIRECTION_ATTEMPTS {
        let mut rng = stream(cfg.seed, &[tag::DIRECTIONS, index as u64, attempt as u64]);
        let h = sample_direction(basis, cfg.variance_threshold, cfg.sampler, index, &mut rng)?;
        let proj = project(xc, &h)?;
        let h_norm = xc.grid().norm(h.curve.values())?;
        let largest = proj.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if largest > DEGENERACY_TOL * scale * h_norm {
            return Ok((h, proj));
        }
    }
    Err(Error::DegenerateProjection(MAX_DIRECTION_ATTEMPTS))
}

fn run_projected(
    xc: &FunctionalSample,
    basis: &FpcBasis,
    marks: &[f64],
    refit: Refit<'_>,
    cfg: &TestConfig,
) -> Result<(Vec<ProjectionResult>, f64)> {
    let mut orders = Vec::with_capacity(cfg.projections);
    let mut observed = Vec::with_capacity(cfg.projections);
    for k in 0..cfg.projections {
        let (_, proj) = draw_projection(xc, basis, cfg, k)?;
        let order = ProjectionOrder::new(&proj)?;
        observed.push(order.norm(marks, cfg.stat));
        orders.push(order);
    }
    let counts = bootstrap::bootstrap_exceedances(
        refit,
        marks,
        &orders,
        &observed,
        cfg.stat,
        cfg.bootstrap,
        MultiplierSource {
            seed: cfg.seed,
            independent: cfg.independent_multipliers,
        },
    );
    let per_projection: Vec<ProjectionResult> = counts
        .iter()
        .zip(&observed)
        .enumerate()
        .map(|(index, (&c, &statistic))| ProjectionResult {
            index,
            statistic,
            p: pvalue_from_count(c, cfg.bootstrap, cfg.positive_correction),
        })
        .collect();
    let p = per_projection.iter().map(|r| r.p).collect::<Vec<_>>();
    let p_fdr = fdr_combine(&p)?;
    Ok((per_projection, p_fdr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funspace::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn dataset(n: usize, seed: u64) -> (FunctionalSample, Vec<f64>) {
        let grid = Grid::equidistant(51).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let c: f64 = rng.sample(StandardNormal);
            let row: Vec<f64> = grid
                .points()
                .iter()
                .map(|t| a * (3.0 * t).sin() + b * t + 0.3 * c * (7.0 * t).cos())
                .collect();
            y.push(grid.dot(&row, grid.points()).unwrap() + 0.1 * rng.sample::<f64, _>(StandardNormal));
            data.extend(row);
        }
        (FunctionalSample::new(grid, data, n).unwrap(), y)
    }

    #[test]
    fn zero_response_simple_null_has_unit_pvalue() {
        let (x, _) = dataset(30, 1);
        let cfg = TestConfig {
            bootstrap: 50,
            ..Default::default()
        };
        let r = test_significance(&x, &[0.0; 30], &cfg).unwrap();
        assert_eq!(r.p_fdr, 1.0);
        assert!(r.per_projection.iter().all(|p| p.statistic == 0.0 && p.p == 1.0));
        assert_eq!(r.settings.rank, None);
    }

    #[test]
    fn report_is_consistent_and_deterministic() {
        let (x, y) = dataset(40, 2);
        let cfg = TestConfig {
            bootstrap: 200,
            seed: 9,
            ..Default::default()
        };
        let a = test_flm(&x, &y, &cfg).unwrap();
        let b = test_flm(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_projection.len(), 5);
        assert_eq!(fdr_combine(&a.pvalues()).unwrap(), a.p_fdr);
        assert!(a.per_projection.iter().all(|p| (0.0..=1.0).contains(&p.p)));
        assert!(a.settings.rank.is_some());
    }

    #[test]
    fn invalid_configurations() {
        let (x, y) = dataset(10, 3);
        for cfg in [
            TestConfig { projections: 0, ..Default::default() },
            TestConfig { bootstrap: 0, ..Default::default() },
            TestConfig { variance_threshold: 0.0, ..Default::default() },
        ] {
            assert!(test_flm(&x, &y, &cfg).is_err());
        }
        assert!(test_flm(&x, &y[..9], &TestConfig::default()).is_err());
        let (small, ys) = dataset(2, 4);
        assert!(test_flm(&small, &ys, &TestConfig::default()).is_err());
    }

    #[test]
    fn degenerate_sample_is_a_numerical_error() {
        let grid = Grid::equidistant(11).unwrap();
        let x = FunctionalSample::new(grid, vec![1.0; 55], 5).unwrap();
        let err = test_flm(&x, &[1.0, 2.0, 3.0, 4.0, 5.0], &TestConfig::default()).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn ou_sampler_with_data_orthogonal_guard() {
        let (x, y) = dataset(25, 5);
        let cfg = TestConfig {
            sampler: Sampler::OrnsteinUhlenbeck,
            bootstrap: 100,
            ..Default::default()
        };
        let r = test_flm(&x, &y, &cfg).unwrap();
        assert_eq!(r.settings.sampler, Sampler::OrnsteinUhlenbeck);
    }

    #[test]
    fn directions_orthogonal_to_the_data_are_rejected() {
        let grid = Grid::equidistant(21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // disjoint supports make every inner product exactly zero
        let curves = |lo: usize, hi: usize, rng: &mut ChaCha8Rng| -> FunctionalSample {
            let rows: Vec<Vec<f64>> = (0..12)
                .map(|_| {
                    (0..21)
                        .map(|k| if (lo..hi).contains(&k) { rng.sample::<f64, _>(StandardNormal) } else { 0.0 })
                        .collect()
                })
                .collect();
            center(&FunctionalSample::from_rows(grid.clone(), &rows).unwrap()).0
        };
        let data = curves(0, 10, &mut rng);
        let other = curves(11, 21, &mut rng);
        let basis = compute_fpc(&other, 5).unwrap();
        let cfg = TestConfig::default();
        let err = draw_projection(&data, &basis, &cfg, 0).unwrap_err();
        assert!(matches!(err, Error::DegenerateProjection(MAX_DIRECTION_ATTEMPTS)));
        assert!(err.is_numerical());
        let own = compute_fpc(&data, 5).unwrap();
        assert!(draw_projection(&data, &own, &cfg, 0).is_ok());
    }
}
