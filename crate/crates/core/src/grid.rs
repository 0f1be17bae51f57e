//! Uniform one-dimensional grids and curvature samples on them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Samples cover one period; sample `len` coincides with sample 0.
    Periodic,
    /// Truncated real line; no wrap-around.
    Line,
}

/// `len` samples at `origin + i * spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub len: usize,
    pub spacing: f64,
    pub origin: f64,
    pub topology: Topology,
}

impl Grid {
    /// `len` samples covering the period `[origin, origin + length)`.
    pub fn periodic(len: usize, origin: f64, length: f64) -> Grid {
        Grid { len, spacing: length / len as f64, origin, topology: Topology::Periodic }
    }

    /// `len` samples starting at `origin` with the given spacing.
    pub fn line(len: usize, origin: f64, spacing: f64) -> Grid {
        Grid { len, spacing, origin, topology: Topology::Line }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    /// Length of the periodic box the samples tile (`len * spacing`).
    pub fn box_length(&self) -> f64 {
        self.len as f64 * self.spacing
    }

    pub fn is_periodic(&self) -> bool {
        self.topology == Topology::Periodic
    }
}

/// Samples of `k = (k_1, ..., k_{n-1})` on a grid at time `t`.
///
/// `components[i][j]` is `k_{i+1}(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub grid: Grid,
    pub components: Vec<Vec<f64>>,
    pub t: f64,
}

impl CurvatureField {
    pub fn new(grid: Grid, components: Vec<Vec<f64>>, t: f64) -> CurvatureField {
        debug_assert!(components.iter().all(|c| c.len() == grid.len));
        CurvatureField { grid, components, t }
    }

    pub fn zeros(grid: Grid, dimension: usize, t: f64) -> CurvatureField {
        CurvatureField::new(grid, vec![vec![0.0; grid.len]; dimension - 1], t)
    }

    /// Builds the field by evaluating `f(x)` (a vector of length `n - 1`) at every sample.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(grid: Grid, dimension: usize, t: f64, f: F) -> CurvatureField {
        let mut components = vec![vec![0.0; grid.len]; dimension - 1];
        for j in 0..grid.len {
            let v = f(grid.x(j));
            for (i, c) in components.iter_mut().enumerate() {
                c[j] = v[i];
            }
        }
        CurvatureField::new(grid, components, t)
    }

    /// Ambient dimension `n`.
    pub fn dimension(&self) -> usize {
        self.components.len() + 1
    }

    pub fn len(&self) -> usize {
        self.grid.len
    }

    pub fn is_empty(&self) -> bool {
        self.grid.len == 0
    }

    /// The vector `k(x_j)`.
    pub fn at(&self, j: usize) -> Vec<f64> {
        self.components.iter().map(|c| c[j]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest sample magnitude among the first and last samples.
    pub fn boundary_magnitude(&self) -> f64 {
        let last = self.grid.len - 1;
        self.components.iter().map(|c| c[0].abs().max(c[last].abs())).fold(0.0, f64::max)
    }

    /// `sum_j |k(x_j)|^2 / 2 * h`, the quadratic conserved density integrated.
    pub fn half_l2_squared(&self) -> f64 {
        let h = self.grid.spacing;
        self.components.iter().flatten().map(|v| 0.5 * v * v * h).sum()
    }
}
