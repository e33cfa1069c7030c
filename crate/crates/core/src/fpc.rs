//! Empirical functional principal components.
//!
//! The covariance operator Γₙ = (1/n) Σ Xᵢ ⊗ Xᵢ is discretized as the G×G matrix
//! C and eigen-solved in the quadrature metric through W^{1/2} C W^{1/2}, so the
//! eigenfunctions are orthonormal for the L² inner product of the grid. When
//! n < G the same nonzero spectrum is obtained from the n×n Gram matrix
//! (1/n) A Aᵀ with A = X W^{1/2}, which is much cheaper for short samples.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::funspace::{Curve, FunctionalSample, Grid};

/// Eigenvalues below this fraction of the leading one are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct FpcBasis {
    grid: Grid,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Curve>,
    scores: Vec<f64>,
    n: usize,
}

impl FpcBasis {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of retained components.
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of curves the basis was computed from.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunction(&self, j: usize) -> &Curve {
        &self.eigenfunctions[j]
    }

    pub fn eigenfunctions(&self) -> &[Curve] {
        &self.eigenfunctions
    }

    /// ⟨Xᵢ, êⱼ⟩ (zero-based indices).
    #[inline]
    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.rank() + j]
    }

    pub fn score_column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.score(i, j)).collect()
    }

    /// Curves rebuilt from the first `rank` components.
    pub fn reconstruct(&self, rank: usize) -> Result<FunctionalSample> {
        if rank == 0 || rank > self.rank() {
            return Err(Error::RankOutOfRange {
                rank,
                max: self.rank(),
            });
        }
        let g = self.grid.len();
        let mut data = vec![0.0; self.n * g];
        for (i, row) in data.chunks_exact_mut(g).enumerate() {
            for j in 0..rank {
                let s = self.score(i, j);
                for (v, e) in row.iter_mut().zip(self.eigenfunctions[j].values()) {
                    *v += s * e;
                }
            }
        }
        Ok(FunctionalSample::from_parts_unchecked(
            self.grid.clone(),
            data,
            self.n,
            true,
        ))
    }
}

/// Reconstruct the first `rank` components of `basis`.
pub fn reconstruct(basis: &FpcBasis, rank: usize) -> Result<FunctionalSample> {
    basis.reconstruct(rank)
}

/// Leading `max_rank` eigenpairs of the covariance operator of a centered sample.
///
/// Fewer than `max_rank` components are returned when the spectrum has fewer
/// eigenvalues above [`EIGEN_CLAMP`] times the leading one.
pub fn compute_fpc(sample: &FunctionalSample, max_rank: usize) -> Result<FpcBasis> {
    if !sample.is_centered() {
        return Err(Error::NotCentered);
    }
    let n = sample.n();
    let g = sample.g();
    let limit = (n - 1).min(g);
    if max_rank == 0 || max_rank > limit {
        return Err(Error::RankOutOfRange {
            rank: max_rank,
            max: limit,
        });
    }
    let grid = sample.grid();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let a = DMatrix::from_fn(n, g, |i, k| sample.row(i)[k] * sqrt_w[k]);
    let inv_n = 1.0 / n as f64;

    // Unit Euclidean eigenvectors u of W^{1/2} C W^{1/2}, sorted by eigenvalue.
    let (values, vectors): (Vec<f64>, Vec<Vec<f64>>) = if n < g {
        let gram = (&a * a.transpose()) * inv_n;
        let pairs = sorted_eigenpairs(gram, max_rank);
        pairs
            .into_iter()
            .map(|(lambda, v)| {
                let v = nalgebra::DVector::from_vec(v);
                let mut u = a.transpose() * v;
                let nrm = u.norm();
                u /= nrm;
                (lambda, u.as_slice().to_vec())
            })
            .unzip()
    } else {
        let cov = (a.transpose() * &a) * inv_n;
        sorted_eigenpairs(cov, max_rank).into_iter().unzip()
    };

    let mut eigenfunctions = Vec::with_capacity(values.len());
    for u in vectors {
        let mut e: Vec<f64> = u.iter().zip(&sqrt_w).map(|(u, s)| u / s).collect();
        let lead = e
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |best, (k, v)| {
                if v.abs() > best.1 {
                    (k, v.abs())
                } else {
                    best
                }
            })
            .0;
        if e[lead] < 0.0 {
            e.iter_mut().for_each(|v| *v = -*v);
        }
        eigenfunctions.push(Curve::from_values_unchecked(e));
    }

    let m = values.len();
    let mut scores = vec![0.0; n * m];
    for i in 0..n {
        let row = sample.row(i);
        for (j, e) in eigenfunctions.iter().enumerate() {
            scores[i * m + j] = grid.dot_unchecked(row, e.values());
        }
    }

    Ok(FpcBasis {
        grid: grid.clone(),
        eigenvalues: values,
        eigenfunctions,
        scores,
        n,
    })
}

fn sorted_eigenpairs(matrix: DMatrix<f64>, max_rank: usize) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(matrix);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = idx.first().map(|&i| eig.eigenvalues[i]).unwrap_or(0.0);
    if top <= 0.0 {
        return Vec::new();
    }
    idx.into_iter()
        .take(max_rank)
        .filter(|&i| eig.eigenvalues[i] >= EIGEN_CLAMP * top)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funspace::{center, inner_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sample(n: usize, g: usize, seed: u64) -> FunctionalSample {
        let grid = Grid::equidistant(g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * g).map(|_| rng.random_range(-1.0..1.0)).collect();
        center(&FunctionalSample::new(grid, data, n).unwrap()).0
    }

    #[test]
    fn rank_one_sample() {
        let grid = Grid::equidistant(51).unwrap();
        let f = grid.sample_fn(|t| (3.0 * t).sin() + t);
        let minus = f.scaled(-1.0);
        let s = FunctionalSample::from_rows(grid.clone(), &[f.values().to_vec(), minus.values().to_vec()])
            .unwrap();
        let basis = compute_fpc(&s, 1).unwrap();
        let ff = inner_product(&f, &f, &grid).unwrap();
        assert!((basis.eigenvalues()[0] - ff).abs() < 1e-12 * ff);
        let fnorm = ff.sqrt();
        let e = basis.eigenfunction(0);
        let err: f64 = e
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a.abs() - (b / fnorm).abs()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
        let back = basis.reconstruct(1).unwrap();
        for (a, b) in back.data().iter().zip(s.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_and_covariance_paths_agree() {
        // n < G takes the Gram path; duplicating the grid count flips the path.
        for (n, g) in [(12, 21), (30, 21)] {
            let s = random_sample(n, g, 3);
            let b = compute_fpc(&s, 5).unwrap();
            // build the G×G route by hand for comparison
            let w = s.grid().weights();
            let sq: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
            let c = DMatrix::from_fn(g, g, |k, l| {
                (0..n).map(|i| s.row(i)[k] * s.row(i)[l]).sum::<f64>() / n as f64 * sq[k] * sq[l]
            });
            let pairs = sorted_eigenpairs(c, 5);
            for (j, (lambda, _)) in pairs.iter().enumerate() {
                assert!((b.eigenvalues()[j] - lambda).abs() < 1e-10 * lambda, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn orthonormality_and_score_moments() {
        for (n, g) in [(5, 21), (50, 21), (5, 201), (50, 201)] {
            let s = random_sample(n, g, n as u64 * 31 + g as u64);
            let b = compute_fpc(&s, (n - 1).min(g)).unwrap();
            let grid = s.grid();
            for j in 0..b.rank() {
                for k in 0..b.rank() {
                    let ip = inner_product(b.eigenfunction(j), b.eigenfunction(k), grid).unwrap();
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-8, "n={n} g={g} ({j},{k}) {ip}");
                }
                let col = b.score_column(j);
                let mean = col.iter().sum::<f64>() / n as f64;
                let var = col.iter().map(|v| v * v).sum::<f64>() / n as f64 - mean * mean;
                assert!(mean.abs() < 1e-8);
                assert!((var - b.eigenvalues()[j]).abs() < 1e-6 * b.eigenvalues()[j]);
                for i in 0..n {
                    let direct = inner_product(
                        &Curve::new(s.row(i).to_vec()).unwrap(),
                        b.eigenfunction(j),
                        grid,
                    )
                    .unwrap();
                    assert!((direct - b.score(i, j)).abs() < 1e-10);
                }
            }
            assert!(b.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn trace_identity_and_parseval() {
        let s = random_sample(40, 21, 11);
        let b = compute_fpc(&s, 21).unwrap();
        let total: f64 = s.rows().map(|r| s.grid().dot(r, r).unwrap()).sum::<f64>() / 40.0;
        let sum: f64 = b.eigenvalues().iter().sum();
        assert!((sum - total).abs() < 1e-8 * total);

        for r in [1, 3, 10] {
            let rec = b.reconstruct(r).unwrap();
            let resid: f64 = s
                .rows()
                .zip(rec.rows())
                .map(|(x, xh)| {
                    let d: Vec<f64> = x.iter().zip(xh).map(|(a, b)| a - b).collect();
                    s.grid().dot(&d, &d).unwrap()
                })
                .sum::<f64>()
                / 40.0;
            let tail: f64 = b.eigenvalues()[r..].iter().sum();
            assert!((resid - tail).abs() < 1e-8 * total, "r={r}: {resid} vs {tail}");
        }
        let full = b.reconstruct(b.rank()).unwrap();
        let err = full
            .data()
            .iter()
            .zip(s.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6);
    }

    #[test]
    fn scale_equivariance() {
        let s = random_sample(20, 31, 5);
        let b1 = compute_fpc(&s, 6).unwrap();
        let b2 = compute_fpc(&s.scaled(3.0), 6).unwrap();
        for j in 0..6 {
            let (l1, l2) = (b1.eigenvalues()[j], b2.eigenvalues()[j]);
            assert!((l2 - 9.0 * l1).abs() < 1e-8 * l2);
            let e1 = b1.eigenfunction(j).values();
            let e2 = b2.eigenfunction(j).values();
            let dot: f64 = e1.iter().zip(e2).map(|(a, b)| a * b).sum();
            let sign = dot.signum();
            for (a, b) in e1.iter().zip(e2) {
                assert!((a - sign * b).abs() < 1e-8 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn errors() {
        let s = random_sample(5, 11, 1);
        assert!(matches!(compute_fpc(&s, 0), Err(Error::RankOutOfRange { .. })));
        assert!(matches!(compute_fpc(&s, 5), Err(Error::RankOutOfRange { .. })));
        let grid = Grid::equidistant(3).unwrap();
        let raw = FunctionalSample::from_rows(grid, &[vec![1.0, 2.0, 3.0], vec![2.0, 2.0, 2.0]]).unwrap();
        assert!(matches!(compute_fpc(&raw, 1), Err(Error::NotCentered)));
        let b = compute_fpc(&s, 2).unwrap();
        assert!(b.reconstruct(3).is_err());
        assert!(b.reconstruct(0).is_err());
    }
}
