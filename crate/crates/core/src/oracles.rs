//! Closed-form quantities of the Gaussian functional linear model.
//!
//! X = Σⱼ √λⱼ ξⱼ eⱼ with ξⱼ i.i.d. N(0,1), Y = ⟨X, ρ⟩ + ε. Every series is
//! truncated at J terms; the variance of ⟨X, h⟩ carried by the omitted terms
//! can be supplied as `h_tail_variance`, and [`tnx_truncation_bound`] bounds
//! the effect of that tail on the normalizing sequence.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal;
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFlmSpec {
    /// λ₁ ≥ λ₂ ≥ … > 0.
    pub eigenvalues: Vec<f64>,
    /// ρⱼ = ⟨ρ, eⱼ⟩.
    pub rho: Vec<f64>,
    /// hⱼ = ⟨h, eⱼ⟩.
    pub h: Vec<f64>,
    pub sigma2_eps: f64,
    /// Σ_{j>J} hⱼ²λⱼ, zero when h lies in the span of the first J terms.
    pub h_tail_variance: f64,
}

impl GaussianFlmSpec {
    pub fn new(eigenvalues: Vec<f64>, rho: Vec<f64>, h: Vec<f64>, sigma2_eps: f64) -> Result<Self> {
        let spec = Self {
            eigenvalues,
            rho,
            h,
            sigma2_eps,
            h_tail_variance: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_h_tail(mut self, tail: f64) -> Result<Self> {
        self.h_tail_variance = tail;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let j = self.eigenvalues.len();
        if j == 0 {
            return Err(Error::InvalidArgument("need at least one term".into()));
        }
        if self.rho.len() != j || self.h.len() != j {
            return Err(Error::LengthMismatch {
                what: "coefficients",
                expected: j,
                got: if self.rho.len() != j { self.rho.len() } else { self.h.len() },
            });
        }
        let all_finite = self
            .eigenvalues
            .iter()
            .chain(&self.rho)
            .chain(&self.h)
            .chain([&self.sigma2_eps, &self.h_tail_variance])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::NonFinite("Gaussian FLM specification"));
        }
        if self.eigenvalues.iter().any(|&l| l <= 0.0)
            || self.eigenvalues.windows(2).any(|w| w[1] > w[0])
        {
            return Err(Error::InvalidArgument(
                "eigenvalues must be positive and non-increasing".into(),
            ));
        }
        if self.sigma2_eps < 0.0 || self.h_tail_variance < 0.0 {
            return Err(Error::InvalidArgument("variances must be non-negative".into()));
        }
        Ok(())
    }

    pub fn terms(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Σⱼ hⱼ²λⱼ over the first `k` terms.
    fn h_partial(&self, k: usize) -> f64 {
        self.h
            .iter()
            .zip(&self.eigenvalues)
            .take(k)
            .map(|(h, l)| h * h * l)
            .sum()
    }

    /// σ_h² = Var⟨X, h⟩, tail included.
    pub fn sigma2_h(&self) -> f64 {
        self.h_partial(self.terms()) + self.h_tail_variance
    }

    /// σ_ρ² = Var⟨X, ρ⟩.
    pub fn sigma2_rho(&self) -> f64 {
        self.rho.iter().zip(&self.eigenvalues).map(|(r, l)| r * r * l).sum()
    }

    /// Cov[⟨X,h⟩, ⟨X,ρ⟩] = Σⱼ hⱼρⱼλⱼ.
    pub fn cross(&self) -> f64 {
        self.h
            .iter()
            .zip(&self.rho)
            .zip(&self.eigenvalues)
            .map(|((h, r), l)| h * r * l)
            .sum()
    }

    /// Var[Y | ⟨X, h⟩], which does not depend on the conditioning value.
    pub fn conditional_variance(&self) -> f64 {
        let s2h = self.sigma2_h();
        let c = self.cross();
        (self.sigma2_rho() * s2h - c * c) / s2h + self.sigma2_eps
    }

    fn sigma_h_checked(&self) -> Result<f64> {
        let s2 = self.sigma2_h();
        if s2 > 0.0 {
            Ok(s2.sqrt())
        } else {
            Err(Error::InvalidArgument("Var<X, h> is zero".into()))
        }
    }
}

/// λⱼ = 1/((j − ½)²π²), j = 1..=J, the Brownian-motion eigenvalues.
pub fn brownian_eigenvalues(terms: usize) -> Vec<f64> {
    (1..=terms)
        .map(|j| 1.0 / ((j as f64 - 0.5).powi(2) * std::f64::consts::PI.powi(2)))
        .collect()
}

/// K¹(s,t) = Var[Y | Xʰ]·Φ((s∧t)/σ_h), the covariance of
/// n^{−1/2} Σᵢ 1{Xᵢʰ ≤ x}(Yᵢ − E[Yᵢ | Xᵢʰ]).
pub fn k1_covariance(spec: &GaussianFlmSpec, s: f64, t: f64) -> Result<f64> {
    let sigma_h = spec.sigma_h_checked()?;
    Ok(spec.conditional_variance() * normal::cdf(s.min(t) / sigma_h))
}

/// t_{n,E}(x) for the leading `kn` terms:
/// (φ(x/σ_h)/σ_h)·(Σ_{j≤kn} hⱼ²λⱼ)^{1/2}.
pub fn tnx_sequence(spec: &GaussianFlmSpec, x: f64, kn: usize) -> Result<f64> {
    tnx_terms(spec, x, kn).map(|t| t.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// E[1{Xʰ ≤ x} ξⱼ] for j ≤ kn, where ξⱼ = ⟨X, eⱼ⟩/√λⱼ.
pub fn tnx_terms(spec: &GaussianFlmSpec, x: f64, kn: usize) -> Result<Vec<f64>> {
    if kn == 0 {
        return Err(Error::InvalidArgument("kn must be at least 1".into()));
    }
    let sigma_h = spec.sigma_h_checked()?;
    let density = normal::pdf(x / sigma_h);
    Ok(spec
        .h
        .iter()
        .zip(&spec.eigenvalues)
        .take(kn)
        .map(|(h, l)| -h * l.sqrt() * density / sigma_h)
        .collect())
}

/// The limit φ(x/σ_h) of t_{n,E}(x) as kn grows.
pub fn tnx_limit(spec: &GaussianFlmSpec, x: f64) -> Result<f64> {
    Ok(normal::pdf(x / spec.sigma_h_checked()?))
}

/// Bound on |t_{n,E}(x) − φ(x/σ_h)| at kn = J: φ(x/σ_h)·τ/σ_h² with τ the
/// tail variance, since 1 − √(1 − u) ≤ u on [0, 1].
pub fn tnx_truncation_bound(spec: &GaussianFlmSpec, x: f64) -> Result<f64> {
    Ok(tnx_limit(spec, x)? * spec.h_tail_variance / spec.sigma2_h())
}

/// Monte Carlo mean and standard error of a scalar per draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
}

fn estimate(sum: f64, sum_sq: f64, count: usize) -> McEstimate {
    let m = count as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    McEstimate {
        mean,
        se: (var / m).sqrt(),
    }
}

fn draw_scores<R: Rng + ?Sized>(rng: &mut R, xi: &mut [f64]) {
    for v in xi.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

fn projections(spec: &GaussianFlmSpec, xi: &[f64]) -> (f64, f64) {
    let mut xh = 0.0;
    let mut xr = 0.0;
    for ((z, l), (h, r)) in xi.iter().zip(&spec.eigenvalues).zip(spec.h.iter().zip(&spec.rho)) {
        let x = l.sqrt() * z;
        xh += h * x;
        xr += r * x;
    }
    (xh, xr)
}

/// Monte Carlo estimate of E[1{Xʰ ≤ x} ξⱼ] for every term, with `draws`
/// Gaussian draws. Requires `h_tail_variance == 0`.
pub fn tnx_terms_monte_carlo(
    spec: &GaussianFlmSpec,
    x: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if spec.h_tail_variance != 0.0 {
        return Err(Error::InvalidArgument("simulation needs a finite expansion".into()));
    }
    if draws < 2 {
        return Err(Error::InvalidArgument("need at least two draws".into()));
    }
    let j = spec.terms();
    const CHUNK: usize = 10_000;
    let chunks = draws.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, &[c as u64]);
            let mut xi = vec![0.0; j];
            let mut s = vec![0.0; j];
            let mut s2 = vec![0.0; j];
            for _ in 0..CHUNK.min(draws - c * CHUNK) {
                draw_scores(&mut rng, &mut xi);
                let (xh, _) = projections(spec, &xi);
                if xh <= x {
                    for k in 0..j {
                        s[k] += xi[k];
                        s2[k] += xi[k] * xi[k];
                    }
                }
            }
            (s, s2)
        })
        .reduce(
            || (vec![0.0; j], vec![0.0; j]),
            |mut a, b| {
                for k in 0..j {
                    a.0[k] += b.0[k];
                    a.1[k] += b.1[k];
                }
                a
            },
        );
    Ok((0..j).map(|k| estimate(sum[k], sum_sq[k], draws)).collect())
}

/// Empirical covariance of R(s) = n^{−1/2} Σᵢ 1{Xᵢʰ ≤ s} eᵢ at `points`,
/// with marks eᵢ = Yᵢ − (c/σ_h²)Xᵢʰ = Yᵢ − E[Yᵢ | Xᵢʰ], over `replicates`
/// samples of size n. Entry (a, b) is for (points[a], points[b]).
pub fn k1_monte_carlo(
    spec: &GaussianFlmSpec,
    points: &[f64],
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<Vec<McEstimate>>> {
    if spec.h_tail_variance != 0.0 {
        return Err(Error::InvalidArgument("simulation needs a finite expansion".into()));
    }
    if n == 0 || replicates < 2 || points.is_empty() {
        return Err(Error::InvalidArgument("need n >= 1, two replicates and one point".into()));
    }
    let slope = spec.cross() / spec.sigma_h_checked()?.powi(2);
    let noise_sd = spec.sigma2_eps.sqrt();
    let p = points.len();
    let j = spec.terms();
    let sqrt_n = (n as f64).sqrt();
    let processes: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, &[r as u64]);
            let mut xi = vec![0.0; j];
            let mut values = vec![0.0; p];
            for _ in 0..n {
                draw_scores(&mut rng, &mut xi);
                let (xh, xr) = projections(spec, &xi);
                let eps: f64 = rng.sample(StandardNormal);
                let mark = xr + noise_sd * eps - slope * xh;
                for (v, &s) in values.iter_mut().zip(points) {
                    if xh <= s {
                        *v += mark;
                    }
                }
            }
            values.iter_mut().for_each(|v| *v /= sqrt_n);
            values
        })
        .collect();
    let m = replicates as f64;
    let means: Vec<f64> = (0..p)
        .map(|a| processes.iter().map(|v| v[a]).sum::<f64>() / m)
        .collect();
    Ok((0..p)
        .map(|a| {
            (0..p)
                .map(|b| {
                    let prods = processes.iter().map(|v| (v[a] - means[a]) * (v[b] - means[b]));
                    let (s, s2) = prods.fold((0.0, 0.0), |(s, s2), x| (s + x, s2 + x * x));
                    let mut e = estimate(s, s2, replicates);
                    e.mean *= m / (m - 1.0);
                    e
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GaussianFlmSpec {
        GaussianFlmSpec::new(
            brownian_eigenvalues(4),
            vec![1.0, 2.0, 0.5, 0.0],
            vec![0.3, -1.0, 1.0, 2.0],
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn h_equal_rho_leaves_only_the_noise() {
        let mut s = spec();
        s.h = s.rho.clone();
        let sigma_rho = s.sigma2_rho().sqrt();
        for (a, b) in [(0.1, 0.3), (-0.2, 1.0), (0.0, 0.0)] {
            let want = 0.5 * normal::cdf(f64::min(a, b) / sigma_rho);
            assert!((k1_covariance(&s, a, b).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn k1_shape() {
        let s = spec();
        let bracket = s.conditional_variance();
        assert!((k1_covariance(&s, 1e3, 1e3).unwrap() - bracket).abs() < 1e-12);
        assert_eq!(k1_covariance(&s, 0.2, -0.4).unwrap(), k1_covariance(&s, -0.4, 0.2).unwrap());
        let mut prev = 0.0;
        for k in -20..=20 {
            let v = k1_covariance(&s, k as f64 / 10.0, 5.0).unwrap();
            assert!(v >= prev && v <= bracket);
            prev = v;
        }
    }

    #[test]
    fn tnx_limits_and_bounds() {
        let s = spec();
        let sigma_h = s.sigma2_h().sqrt();
        let full = tnx_sequence(&s, 0.4, 4).unwrap();
        assert!((full - normal::pdf(0.4 / sigma_h)).abs() < 1e-14);
        let mut prev = 0.0;
        for kn in 1..=4 {
            let t = tnx_sequence(&s, 0.4, kn).unwrap();
            assert!(t >= prev && t <= (kn as f64).sqrt());
            prev = t;
        }
        assert!((tnx_limit(&s, 0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!(tnx_sequence(&s, 0.0, 0).is_err());
    }

    #[test]
    fn zero_direction_is_rejected() {
        let mut s = spec();
        s.h = vec![0.0; 4];
        assert!(k1_covariance(&s, 0.0, 0.0).is_err());
        assert!(tnx_sequence(&s, 0.0, 1).is_err());
        assert!(GaussianFlmSpec::new(vec![1.0, 2.0], vec![0.0; 2], vec![0.0; 2], 1.0).is_err());
        assert!(GaussianFlmSpec::new(vec![1.0], vec![0.0; 2], vec![0.0], 1.0).is_err());
    }

    #[test]
    fn monte_carlo_terms_agree() {
        let s = spec();
        let exact = tnx_terms(&s, 0.2, 4).unwrap();
        let mc = tnx_terms_monte_carlo(&s, 0.2, 40_000, 1).unwrap();
        for (e, m) in exact.iter().zip(&mc) {
            assert!((e - m.mean).abs() < 4.0 * m.se, "{e} vs {m:?}");
        }
    }
}
