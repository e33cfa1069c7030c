//! Wild-bootstrap calibration with golden-ratio multipliers.
//!
//! Replicate b multiplies the marks by i.i.d. V* taking (1−√5)/2 with
//! probability (5+√5)/10 and (1+√5)/2 otherwise, which gives E V* = 0 and
//! E V*² = E V*³ = 1. For the composite null the bootstrap response is
//! refitted exactly as the data were, centering included, so the bootstrap
//! residuals are (I − H)(ε* − ε̄*) with ε* = V* ∘ ε̂ and no FPC work is
//! repeated.
//!
//! The multipliers of replicate b come from the stream `(seed, BOOTSTRAP, b)`,
//! or `(seed, BOOTSTRAP, b, k)` for projection k when independent multipliers
//! are requested. Counts are integer sums over replicates, so the result does
//! not depend on how the replicates are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{ensure_len, Error, Result};
use crate::flm::FlmFit;
use crate::rng::{stream, tag};

use super::statistic::{ProjectedStat, ProjectionOrder, StatKind};

/// Lower support point (1 − √5)/2.
pub const V_LOW: f64 = -0.618_033_988_749_894_9;
/// Upper support point (1 + √5)/2.
pub const V_HIGH: f64 = 1.618_033_988_749_895;
/// P[V* = V_LOW] = (5 + √5)/10.
pub const P_LOW: f64 = 0.723_606_797_749_979;

/// Maps a uniform draw on [0,1) to a golden-ratio multiplier.
#[inline]
pub fn golden_multiplier(u: f64) -> f64 {
    if u < P_LOW {
        V_LOW
    } else {
        V_HIGH
    }
}

pub fn fill_multipliers<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = golden_multiplier(rng.random::<f64>());
    }
}

/// How bootstrap marks are turned into bootstrap residuals.
#[derive(Debug, Clone, Copy)]
pub enum Refit<'a> {
    /// Composite null: project out the score span of the fit.
    Composite(&'a FlmFit),
    /// Simple null: the multiplied marks are used as they are.
    None,
}

#[derive(Debug, Clone, Copy)]
pub struct MultiplierSource {
    pub seed: u64,
    /// Draw separate multipliers for every projection within a replicate.
    pub independent: bool,
}

impl MultiplierSource {
    fn fill(&self, b: usize, k: Option<usize>, out: &mut [f64]) {
        let mut rng = match k {
            Some(k) => stream(self.seed, &[tag::BOOTSTRAP, b as u64, k as u64]),
            None => stream(self.seed, &[tag::BOOTSTRAP, b as u64]),
        };
        fill_multipliers(&mut rng, out);
    }
}

struct Scratch {
    counts: Vec<usize>,
    v: Vec<f64>,
    marks: Vec<f64>,
    resid: Vec<f64>,
    work: Vec<f64>,
}

/// For every projection, the number of replicates whose statistic is at least
/// the observed one.
pub(crate) fn bootstrap_exceedances(
    refit: Refit<'_>,
    marks: &[f64],
    orders: &[ProjectionOrder],
    observed: &[f64],
    kind: StatKind,
    replicates: usize,
    source: MultiplierSource,
) -> Vec<usize> {
    let n = marks.len();
    let k = orders.len();
    let rank = match refit {
        Refit::Composite(fit) => fit.rank(),
        Refit::None => 0,
    };
    let new_scratch = || Scratch {
        counts: vec![0; k],
        v: vec![0.0; n],
        marks: vec![0.0; n],
        resid: vec![0.0; n],
        work: vec![0.0; rank],
    };
    let resample = |s: &mut Scratch| match refit {
        Refit::Composite(fit) => {
            let mean = s.marks.iter().sum::<f64>() / n as f64;
            s.marks.iter_mut().for_each(|m| *m -= mean);
            fit.residualize_into(&s.marks, &mut s.work, &mut s.resid);
        }
        Refit::None => s.resid.copy_from_slice(&s.marks),
    };

    (0..replicates)
        .into_par_iter()
        .fold(new_scratch, |mut s, b| {
            if source.independent {
                for j in 0..k {
                    source.fill(b, Some(j), &mut s.v);
                    for ((m, v), e) in s.marks.iter_mut().zip(&s.v).zip(marks) {
                        *m = v * e;
                    }
                    resample(&mut s);
                    if orders[j].norm(&s.resid, kind) >= observed[j] {
                        s.counts[j] += 1;
                    }
                }
            } else {
                source.fill(b, None, &mut s.v);
                for ((m, v), e) in s.marks.iter_mut().zip(&s.v).zip(marks) {
                    *m = v * e;
                }
                resample(&mut s);
                for j in 0..k {
                    if orders[j].norm(&s.resid, kind) >= observed[j] {
                        s.counts[j] += 1;
                    }
                }
            }
            s
        })
        .map(|s| s.counts)
        .reduce(
            || vec![0; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Bootstrap p-value from an exceedance count, optionally with the positive
/// correction (p̂B + 1)/(B + 1).
pub fn pvalue_from_count(count: usize, replicates: usize, positive_correction: bool) -> f64 {
    if positive_correction {
        (count + 1) as f64 / (replicates + 1) as f64
    } else {
        count as f64 / replicates as f64
    }
}

/// Wild-bootstrap p-value of one projected statistic under the composite null.
///
/// The proportion of replicates with ‖T*‖ ≥ ‖T‖ is returned, ties counting
/// for the null.
pub fn wild_bootstrap_pvalue(
    fit: &FlmFit,
    projections: &[f64],
    observed: &ProjectedStat,
    replicates: usize,
    kind: StatKind,
    seed: u64,
    positive_correction: bool,
) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one bootstrap replicate".into()));
    }
    ensure_len("projections", fit.n(), projections.len())?;
    let order = ProjectionOrder::new(projections)?;
    let counts = bootstrap_exceedances(
        Refit::Composite(fit),
        fit.residuals(),
        std::slice::from_ref(&order),
        &[observed.value(kind)],
        kind,
        replicates,
        MultiplierSource {
            seed,
            independent: false,
        },
    );
    Ok(pvalue_from_count(counts[0], replicates, positive_correction))
}

/// Wild-bootstrap p-value under a simple null: the marks are only multiplied.
pub fn simple_bootstrap_pvalue(
    marks: &[f64],
    projections: &[f64],
    observed: &ProjectedStat,
    replicates: usize,
    kind: StatKind,
    seed: u64,
    positive_correction: bool,
) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one bootstrap replicate".into()));
    }
    ensure_len("projections", marks.len(), projections.len())?;
    let order = ProjectionOrder::new(projections)?;
    let counts = bootstrap_exceedances(
        Refit::None,
        marks,
        std::slice::from_ref(&order),
        &[observed.value(kind)],
        kind,
        replicates,
        MultiplierSource {
            seed,
            independent: false,
        },
    );
    Ok(pvalue_from_count(counts[0], replicates, positive_correction))
}
