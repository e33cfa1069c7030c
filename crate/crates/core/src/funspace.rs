//! Curves in L²[0,1] discretized on a shared grid.
//!
//! Inner products use the composite trapezoidal rule on the grid abscissae.
//! Every curve of one analysis lives on the same [`Grid`]; nothing here
//! interpolates between grids.

use crate::error::{ensure_finite, ensure_len, Error, Result};

/// Abscissae in [0,1] together with their trapezoidal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds a grid from strictly increasing points in [0,1].
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        ensure_finite("grid points", &points)?;
        if points[0] < 0.0 || points[points.len() - 1] > 1.0 {
            return Err(Error::InvalidGrid("points must lie in [0,1]".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "points must be strictly increasing".into(),
            ));
        }
        let g = points.len();
        let mut weights = vec![0.0; g];
        weights[0] = 0.5 * (points[1] - points[0]);
        weights[g - 1] = 0.5 * (points[g - 1] - points[g - 2]);
        for k in 1..g - 1 {
            weights[k] = 0.5 * (points[k + 1] - points[k - 1]);
        }
        Ok(Self { points, weights })
    }

    /// `g` equidistant points covering [0,1], endpoints included.
    pub fn equidistant(g: usize) -> Result<Self> {
        if g < 2 {
            return Self::new(vec![0.0; g]);
        }
        let step = 1.0 / (g - 1) as f64;
        let mut points: Vec<f64> = (0..g).map(|k| k as f64 * step).collect();
        points[g - 1] = 1.0;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Trapezoidal approximation of ∫ f g on raw grid values.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        ensure_len("curve", self.len(), f.len())?;
        ensure_len("curve", self.len(), g.len())?;
        let v = self.dot_unchecked(f, g);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("inner product"))
        }
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// L² norm of raw grid values.
    pub fn norm(&self, f: &[f64]) -> Result<f64> {
        Ok(self.dot(f, f)?.sqrt())
    }

    /// Evaluates `f` at every grid point.
    pub fn sample_fn(&self, f: impl Fn(f64) -> f64) -> Curve {
        Curve {
            values: self.points.iter().map(|&t| f(t)).collect(),
        }
    }
}

/// Builds a [`Grid`] with trapezoidal weights from the given abscissae.
pub fn make_grid(points: &[f64]) -> Result<Grid> {
    Grid::new(points.to_vec())
}

/// Grid values of one function.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    values: Vec<f64>,
}

impl Curve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        ensure_finite("curve", &values)?;
        Ok(Self { values })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Curve {
        Curve {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// ⟨f, g⟩ under the grid's trapezoidal rule.
pub fn inner_product(f: &Curve, g: &Curve, grid: &Grid) -> Result<f64> {
    grid.dot(&f.values, &g.values)
}

/// `n` curves on a shared grid, stored row-major (row `i` is curve `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    grid: Grid,
    data: Vec<f64>,
    n: usize,
    centered: bool,
}

impl FunctionalSample {
    /// `data` holds `n × grid.len()` values in row-major order.
    pub fn new(grid: Grid, data: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample needs n >= 1".into()));
        }
        ensure_len("sample data", n * grid.len(), data.len())?;
        ensure_finite("sample data", &data)?;
        Ok(Self {
            grid,
            data,
            n,
            centered: false,
        })
    }

    pub fn from_rows(grid: Grid, rows: &[Vec<f64>]) -> Result<Self> {
        let g = grid.len();
        let mut data = Vec::with_capacity(rows.len() * g);
        for row in rows {
            ensure_len("sample row", g, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(grid, data, rows.len())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of curves.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points per curve.
    pub fn g(&self) -> usize {
        self.grid.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let g = self.g();
        &self.data[i * g..(i + 1) * g]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.g())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn centered_flag(&self) -> bool {
        self.centered
    }

    /// Column-wise sample mean curve.
    pub fn mean(&self) -> Curve {
        let g = self.g();
        let mut mean = vec![0.0; g];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let inv = 1.0 / self.n as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        Curve::from_values_unchecked(mean)
    }

    /// True when flagged centered or when every column mean vanishes to
    /// 1e-10 of that column's scale.
    pub fn is_centered(&self) -> bool {
        if self.centered {
            return true;
        }
        let mean = self.mean();
        (0..self.g()).all(|k| {
            let scale = self
                .rows()
                .map(|r| r[k].abs())
                .fold(0.0_f64, f64::max)
                .max(f64::MIN_POSITIVE);
            mean.values[k].abs() <= 1e-10 * scale
        })
    }

    /// Sample rescaled by `c`, keeping the centered flag.
    pub fn scaled(&self, c: f64) -> FunctionalSample {
        FunctionalSample {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| c * v).collect(),
            n: self.n,
            centered: self.centered,
        }
    }

    /// Largest L² norm among the curves.
    pub fn max_norm(&self) -> f64 {
        self.rows()
            .map(|r| self.grid.dot_unchecked(r, r).sqrt())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, data: Vec<f64>, n: usize, centered: bool) -> Self {
        Self {
            grid,
            data,
            n,
            centered,
        }
    }
}

/// Subtracts the pointwise mean curve from every row.
pub fn center(sample: &FunctionalSample) -> (FunctionalSample, Curve) {
    let mean = sample.mean();
    let g = sample.g();
    let mut data = sample.data.clone();
    for row in data.chunks_exact_mut(g) {
        for (v, m) in row.iter_mut().zip(&mean.values) {
            *v -= m;
        }
    }
    (
        FunctionalSample::from_parts_unchecked(sample.grid.clone(), data, sample.n, true),
        mean,
    )
}

/// Mean-centers a response vector, returning the centered values and the mean.
pub fn center_response(y: &[f64]) -> (Vec<f64>, f64) {
    let mean = y.iter().sum::<f64>() / y.len().max(1) as f64;
    (y.iter().map(|v| v - mean).collect(), mean)
}
