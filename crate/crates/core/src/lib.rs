//! Goodness-of-fit tests for the functional linear model with scalar response.
//!
//! The functional covariate is projected onto randomly drawn directions and the
//! regression residuals are accumulated along the projected values into a marked
//! empirical process. Kolmogorov-Smirnov and Cramér-von Mises norms of that
//! process are calibrated by a wild bootstrap and the per-direction p-values are
//! combined with the FDR rule.
//!
//! Module map:
//!
//! * [`funspace`]: grids, trapezoidal inner products, curve samples.
//! * [`fpc`]: functional principal components of a centered sample.
//! * [`flm`]: truncated FPC regression, SICc rank selection, hat map.
//! * [`rptest`]: directions, projected statistics, bootstrap, FDR, the tests.
//! * [`simlab`]: simulated processes, scenarios S1-S9, Monte Carlo studies.
//! * [`oracles`]: closed-form Gaussian quantities used for validation.
//! * [`cli`]: the `rpflm` command-line front end.

pub mod cli;
pub mod error;
pub mod flm;
pub mod fpc;
pub mod funspace;
pub mod normal;
pub mod oracles;
pub mod rng;
pub mod rptest;
pub mod simlab;

pub use error::{Error, Result};
pub use flm::{estimate_rho, select_rank_sicc, FlmFit, RankSelection};
pub use fpc::{compute_fpc, FpcBasis};
pub use funspace::{center, inner_product, make_grid, Curve, FunctionalSample, Grid};
pub use rptest::{
    fdr_combine, process_statistic, project, test_flm, test_significance, test_simple,
    Direction, ProjectedStat, Sampler, StatKind, TestConfig, TestReport,
};
