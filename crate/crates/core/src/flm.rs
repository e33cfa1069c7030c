//! Functional linear model fitted by truncated FPC regression.
//!
//! With scores sᵢⱼ = ⟨Xᵢ, êⱼ⟩ and rank d, the coefficient is
//! ρ̂ = Σ_{j≤d} cⱼ êⱼ with cⱼ = (nλ̂ⱼ)⁻¹ Σᵢ sᵢⱼ Yᵢ. The score columns are
//! empirically orthogonal with squared norm nλ̂ⱼ, so this is the least-squares
//! fit of Y on the first d columns and the hat map is H = S diag((nλ̂ⱼ)⁻¹) Sᵀ.

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::fpc::FpcBasis;
use crate::funspace::{Curve, FunctionalSample};

#[derive(Debug, Clone)]
pub struct FlmFit {
    rho_hat: Curve,
    coef: Vec<f64>,
    fitted: Vec<f64>,
    residuals: Vec<f64>,
    /// n×d score block, row-major.
    scores: Vec<f64>,
    /// (nλ̂ⱼ)⁻¹ for j ≤ d.
    precision: Vec<f64>,
    n: usize,
}

impl FlmFit {
    pub fn rho_hat(&self) -> &Curve {
        &self.rho_hat
    }

    /// Number of components dₙ used in the fit.
    pub fn rank(&self) -> usize {
        self.coef.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// ⟨ρ̂, êⱼ⟩ for j ≤ dₙ.
    pub fn coef(&self) -> &[f64] {
        &self.coef
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    /// Hv for the hat map of this fit.
    pub fn hat_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        ensure_len("hat input", self.n, v.len())?;
        let mut out = vec![0.0; self.n];
        let mut work = vec![0.0; self.rank()];
        self.hat_into(v, &mut work, &mut out);
        Ok(out)
    }

    /// Writes (I − H)v into `out`: the residuals of refitting at the same
    /// rank on the response v (plus anything in the column span of S).
    pub fn residualize_into(&self, v: &[f64], work: &mut [f64], out: &mut [f64]) {
        self.hat_into(v, work, out);
        for (o, x) in out.iter_mut().zip(v) {
            *o = x - *o;
        }
    }

    fn hat_into(&self, v: &[f64], work: &mut [f64], out: &mut [f64]) {
        let d = self.rank();
        work.iter_mut().for_each(|c| *c = 0.0);
        for (row, vi) in self.scores.chunks_exact(d).zip(v) {
            for (c, s) in work.iter_mut().zip(row) {
                *c += s * vi;
            }
        }
        for (c, p) in work.iter_mut().zip(&self.precision) {
            *c *= p;
        }
        for (o, row) in out.iter_mut().zip(self.scores.chunks_exact(d)) {
            *o = row.iter().zip(work.iter()).map(|(s, c)| s * c).sum();
        }
    }
}

/// Hv for the hat map of `fit`.
pub fn hat_apply(fit: &FlmFit, v: &[f64]) -> Result<Vec<f64>> {
    fit.hat_apply(v)
}

/// Fits ρ̂ with the first `rank` components of `basis`.
pub fn estimate_rho(
    sample: &FunctionalSample,
    y: &[f64],
    basis: &FpcBasis,
    rank: usize,
) -> Result<FlmFit> {
    let n = sample.n();
    ensure_len("response", n, y.len())?;
    ensure_len("basis sample size", n, basis.n())?;
    ensure_finite("response", y)?;
    if rank == 0 || rank > basis.rank() {
        return Err(Error::RankOutOfRange {
            rank,
            max: basis.rank(),
        });
    }
    let lambda = &basis.eigenvalues()[..rank];
    if let Some(j) = lambda.iter().position(|&l| l <= 0.0) {
        return Err(Error::ZeroEigenvalue(j + 1));
    }
    let precision: Vec<f64> = lambda.iter().map(|l| 1.0 / (n as f64 * l)).collect();
    let mut scores = Vec::with_capacity(n * rank);
    for i in 0..n {
        scores.extend((0..rank).map(|j| basis.score(i, j)));
    }
    let mut coef = vec![0.0; rank];
    for (row, yi) in scores.chunks_exact(rank).zip(y) {
        for (c, s) in coef.iter_mut().zip(row) {
            *c += s * yi;
        }
    }
    for (c, p) in coef.iter_mut().zip(&precision) {
        *c *= p;
    }

    let g = sample.g();
    let mut rho = vec![0.0; g];
    for (c, e) in coef.iter().zip(basis.eigenfunctions()) {
        for (r, v) in rho.iter_mut().zip(e.values()) {
            *r += c * v;
        }
    }
    let grid = sample.grid();
    let fitted: Vec<f64> = sample.rows().map(|x| grid.dot_unchecked(x, &rho)).collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();

    Ok(FlmFit {
        rho_hat: Curve::from_values_unchecked(rho),
        coef,
        fitted,
        residuals,
        scores,
        precision,
        n,
    })
}

/// Corrected Schwarz criterion log(RSS/n) + d·log(n)/(n − d − 2).
pub fn sicc(rss: f64, n: usize, d: usize) -> f64 {
    let nf = n as f64;
    (rss / nf).ln() + d as f64 * nf.ln() / (nf - d as f64 - 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSelection {
    /// The minimizing rank (smallest on ties).
    pub rank: usize,
    /// SICc(d) for d = 1..=max_rank, at index d − 1.
    pub sicc: Vec<f64>,
}

/// Selects dₙ in 1..=max_rank by minimizing SICc.
pub fn select_rank_sicc(
    sample: &FunctionalSample,
    y: &[f64],
    basis: &FpcBasis,
    max_rank: usize,
) -> Result<RankSelection> {
    let n = sample.n();
    ensure_len("response", n, y.len())?;
    ensure_len("basis sample size", n, basis.n())?;
    if max_rank == 0 || max_rank > basis.rank() {
        return Err(Error::RankOutOfRange {
            rank: max_rank,
            max: basis.rank(),
        });
    }
    if n <= max_rank + 2 {
        return Err(Error::InvalidArgument(format!(
            "SICc needs n > max_rank + 2 (n = {n}, max_rank = {max_rank})"
        )));
    }
    let mut resid = y.to_vec();
    let mut table = Vec::with_capacity(max_rank);
    for d in 1..=max_rank {
        let j = d - 1;
        let lambda = basis.eigenvalues()[j];
        if lambda <= 0.0 {
            return Err(Error::ZeroEigenvalue(d));
        }
        let c = (0..n).map(|i| basis.score(i, j) * y[i]).sum::<f64>() / (n as f64 * lambda);
        for (i, r) in resid.iter_mut().enumerate() {
            *r -= c * basis.score(i, j);
        }
        let rss: f64 = resid.iter().map(|r| r * r).sum();
        table.push(sicc(rss, n, d));
    }
    let mut best = 0;
    for (k, v) in table.iter().enumerate() {
        if *v < table[best] {
            best = k;
        }
    }
    Ok(RankSelection {
        rank: best + 1,
        sicc: table,
    })
}
