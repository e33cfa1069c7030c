//! The projected marked empirical process and its KS and CvM norms.
//!
//! For projections xᵢ and marks mᵢ the process is
//! T(x) = n^{-1/2} Σᵢ 1{xᵢ ≤ x} mᵢ, a step function jumping at the sorted
//! projection values. Tied projections form a single jump carrying the summed
//! marks of the block. Sorting is done once per direction; every bootstrap
//! replicate then evaluates both norms in O(n).

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};

/// Which norm of the process is used as the test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    /// sup |T|
    Ks,
    /// ∫ T² dF_{n,h}
    Cvm,
}

impl std::fmt::Display for StatKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StatKind::Ks => "ks",
            StatKind::Cvm => "cvm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedStat {
    pub ks: f64,
    pub cvm: f64,
    pub projections: Vec<f64>,
    /// Permutation sorting `projections` ascending.
    pub order: Vec<usize>,
}

impl ProjectedStat {
    pub fn value(&self, kind: StatKind) -> f64 {
        match kind {
            StatKind::Ks => self.ks,
            StatKind::Cvm => self.cvm,
        }
    }
}

/// Sort order and tie blocks of one set of projections.
#[derive(Debug, Clone)]
pub struct ProjectionOrder {
    order: Vec<usize>,
    /// Exclusive end of each tie block within `order`.
    block_ends: Vec<usize>,
}

impl ProjectionOrder {
    pub fn new(projections: &[f64]) -> Result<Self> {
        ensure_finite("projections", projections)?;
        let mut order: Vec<usize> = (0..projections.len()).collect();
        order.sort_by(|&a, &b| projections[a].total_cmp(&projections[b]).then(a.cmp(&b)));
        let mut block_ends = Vec::with_capacity(order.len());
        for p in 1..order.len() {
            if projections[order[p]] != projections[order[p - 1]] {
                block_ends.push(p);
            }
        }
        if !order.is_empty() {
            block_ends.push(order.len());
        }
        Ok(Self { order, block_ends })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// (KS, CvM) of the process with the given marks. `marks` must have the
    /// same length as the projections.
    pub fn norms(&self, marks: &[f64]) -> (f64, f64) {
        let n = self.order.len() as f64;
        let mut cum = 0.0;
        let mut sup = 0.0_f64;
        let mut sq = 0.0;
        let mut start = 0;
        for &end in &self.block_ends {
            for &i in &self.order[start..end] {
                cum += marks[i];
            }
            sup = sup.max(cum.abs());
            sq += (end - start) as f64 * cum * cum;
            start = end;
        }
        (sup / n.sqrt(), sq / (n * n))
    }

    pub fn norm(&self, marks: &[f64], kind: StatKind) -> f64 {
        let (ks, cvm) = self.norms(marks);
        match kind {
            StatKind::Ks => ks,
            StatKind::Cvm => cvm,
        }
    }
}

/// KS and CvM norms of the process built from `projections` and `marks`.
pub fn process_statistic(projections: &[f64], marks: &[f64]) -> Result<ProjectedStat> {
    if projections.is_empty() {
        return Err(Error::InvalidArgument("need at least one observation".into()));
    }
    ensure_len("marks", projections.len(), marks.len())?;
    ensure_finite("marks", marks)?;
    let order = ProjectionOrder::new(projections)?;
    let (ks, cvm) = order.norms(marks);
    Ok(ProjectedStat {
        ks,
        cvm,
        projections: projections.to_vec(),
        order: order.order,
    })
}
