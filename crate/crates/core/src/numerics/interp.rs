//! Local Lagrange interpolation and cumulative quadrature on sampled data.

/// Lagrange basis weights at `z` for the nodes `x`.
pub fn lagrange_weights(z: f64, x: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|j| x.iter().enumerate().filter(|&(m, _)| m != j).fold(1.0, |acc, (_, &xm)| acc * (z - xm) / (x[j] - xm))).collect()
}

/// A stencil of sample indices and weights for evaluating at a fractional
/// position `index + theta` of a uniform grid.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Stencil {
    /// `width` points around `index + theta` (`0 <= theta <= 1`), wrapping
    /// for periodic data and shifted inward otherwise.
    pub fn uniform(len: usize, index: usize, theta: f64, width: usize, periodic: bool) -> Stencil {
        let width = width.min(len);
        let lo = index as isize + 1 - (width / 2) as isize;
        let start = if periodic { lo } else { lo.clamp(0, (len - width) as isize) };
        let nodes: Vec<f64> = (0..width).map(|j| (start + j as isize - index as isize) as f64).collect();
        let weights = lagrange_weights(theta, &nodes);
        let indices = (0..width).map(|j| (start + j as isize).rem_euclid(len as isize) as usize).collect();
        Stencil { indices, weights }
    }

    /// Stencil over arbitrary (sorted) abscissae `xs` evaluating at `z`.
    pub fn nonuniform(xs: &[f64], z: f64, width: usize) -> Stencil {
        let n = xs.len();
        let width = width.min(n);
        let right = xs.partition_point(|&x| x <= z).clamp(1, n);
        let lo = right as isize - (width / 2) as isize;
        let start = lo.clamp(0, (n - width) as isize) as usize;
        let nodes = &xs[start..start + width];
        Stencil { indices: (start..start + width).collect(), weights: lagrange_weights(z, nodes) }
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.indices.iter().zip(&self.weights).map(|(&i, w)| w * values[i]).sum()
    }
}

/// Three-point Gauss–Legendre nodes and weights on `[0, 1]`.
const GAUSS3: [(f64, f64); 3] = [(0.112_701_665_379_258_3, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.887_298_334_620_741_7, 5.0 / 18.0)];

/// Cumulative integral `F(x_i) = int_{x_0}^{x_i} f` of sampled data, using a
/// local quintic on each interval integrated exactly (sixth order).
pub fn cumulative_integral(xs: &[f64], values: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut out = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (xs[i], xs[i + 1]);
        let width = b - a;
        let piece: f64 = GAUSS3.iter().map(|(g, w)| w * width * Stencil::nonuniform(xs, a + g * width, 6).apply(values)).sum();
        out[i + 1] = out[i] + piece;
    }
    out
}
