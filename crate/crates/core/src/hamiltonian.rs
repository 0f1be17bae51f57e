//! Conserved functionals `F_{2j-1}`, their gradients and the Poisson
//! operator `Xi_k(z) = z_x - xi k` with `xi_x = k z^T - z k^T`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffpoly::{CompiledPoly, DerivativeScheme, DiffPolyError, Hierarchy, Jets};
use crate::grid::CurvatureField;
use crate::numerics::spectral::Spectral;
use crate::vmkdv::DEFAULT_MAX_FLOW;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("flow index {j} outside the precomputed range 1..={max}")]
    FlowOutOfRange { j: usize, max: usize },
    #[error("entry ({row}, {col}) of k z^T - z k^T has mean {mean:e}; no periodic xi exists")]
    NonIntegrableAuxiliary { row: usize, col: usize, mean: f64 },
    #[error("the Poisson operator needs a periodic grid")]
    NotPeriodic,
    #[error("field has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    DiffPoly(#[from] DiffPolyError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HamiltonianError> = std::result::Result<T, E>;

/// Tolerance on the mean of `k z^T - z k^T` below which `xi` is taken periodic.
pub const AUXILIARY_MEAN_TOL: f64 = 1e-8;

/// Compiled `y_{2j-1}`, `z_{2j-2}` and `xi_{2j-2}` for one dimension.
#[derive(Debug, Clone)]
pub struct Hamiltonians {
    dim: usize,
    max_flow: usize,
    y: Vec<CompiledPoly>,
    z: Vec<Vec<CompiledPoly>>,
    xi: Vec<Vec<Vec<CompiledPoly>>>,
}

impl Hamiltonians {
    pub fn new(dim: usize, max_flow: usize) -> Result<Hamiltonians> {
        let h = Hierarchy::new(dim, max_flow)?;
        let max_flow = h.max_flow();
        let y = (1..=max_flow).map(|j| h.y(j).expect("in range").compile()).collect();
        let z = (1..=max_flow).map(|j| h.z(j - 1).expect("in range").iter().map(|p| p.compile()).collect()).collect();
        let xi = (1..=max_flow)
            .map(|j| h.xi(j - 1).expect("in range").iter().map(|row| row.iter().map(|p| p.compile()).collect()).collect())
            .collect();
        Ok(Hamiltonians { dim, max_flow, y, z, xi })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_flow(&self) -> usize {
        self.max_flow
    }

    fn check(&self, j: usize, k: &CurvatureField) -> Result<()> {
        if j == 0 || j > self.max_flow {
            return Err(HamiltonianError::FlowOutOfRange { j, max: self.max_flow });
        }
        if k.dimension() != self.dim {
            return Err(HamiltonianError::DimensionMismatch { expected: self.dim, found: k.dimension() });
        }
        Ok(())
    }

    fn jets(k: &CurvatureField, order: usize) -> Result<Jets> {
        let scheme = if k.grid.is_periodic() { DerivativeScheme::Spectral } else { DerivativeScheme::FiniteDifference };
        Ok(Jets::compute(k, order, scheme)?)
    }

    /// `F_{2j-1}(k) = -1/(2j-1) * integral of y_{2j-1}(k)`, by the trapezoid
    /// rule (spectrally accurate on periodic grids).
    pub fn evaluate(&self, j: usize, k: &CurvatureField) -> Result<f64> {
        self.check(j, k)?;
        let y = &self.y[j - 1];
        let density = y.evaluate(&Self::jets(k, y.max_order())?);
        let integral: f64 = density.iter().sum::<f64>() * k.grid.spacing;
        Ok(-integral / (2 * j - 1) as f64)
    }

    /// `grad F_{2j-1}(k) = z_{2j-2}(k)`.
    pub fn gradient(&self, j: usize, k: &CurvatureField) -> Result<Vec<Vec<f64>>> {
        self.check(j, k)?;
        let order = self.z[j - 1].iter().map(CompiledPoly::max_order).max().unwrap_or(0);
        let jets = Self::jets(k, order)?;
        Ok(self.z[j - 1].iter().map(|p| p.evaluate(&jets)).collect())
    }

    /// Spatial mean of the polynomial `xi_{2j-2}(k)`.
    pub fn xi_mean(&self, j: usize, k: &CurvatureField) -> Result<Vec<Vec<f64>>> {
        self.check(j, k)?;
        let order = self.xi[j - 1].iter().flatten().map(CompiledPoly::max_order).max().unwrap_or(0);
        let jets = Self::jets(k, order)?;
        Ok(self.xi[j - 1].iter().map(|row| row.iter().map(|p| p.evaluate(&jets).iter().sum::<f64>() / k.len() as f64).collect()).collect())
    }

    /// `Xi_k(grad F_{2j-1})` with `xi` fixed to the differential polynomial
    /// `xi_{2j-2}(k)` (its mean is carried over). This is the Hamiltonian
    /// vector field of `F_{2j-1}`.
    pub fn hamiltonian_field(&self, j: usize, k: &CurvatureField) -> Result<Vec<Vec<f64>>> {
        let grad = self.gradient(j, k)?;
        let mean = self.xi_mean(j, k)?;
        poisson_operator_with_mean(k, &grad, &mean)
    }

    /// `{F_{2a-1}, F_{2b-1}}(k) = <Xi_k(grad F_{2a-1}), grad F_{2b-1}>`.
    pub fn bracket(&self, a: usize, b: usize, k: &CurvatureField) -> Result<f64> {
        let ga = self.gradient(a, k)?;
        let gb = self.gradient(b, k)?;
        let xa = poisson_operator(k, &ga)?;
        Ok(pairing(&xa, &gb, k.grid.spacing))
    }
}

/// `L^2` pairing `sum_i integral a_i b_i`.
pub fn pairing(a: &[Vec<f64>], b: &[Vec<f64>], spacing: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).sum::<f64>() * spacing
}

fn hamiltonians_for(k: &CurvatureField) -> Result<Hamiltonians> {
    Hamiltonians::new(k.dimension(), DEFAULT_MAX_FLOW)
}

/// `F_{2j-1}(k)`.
pub fn evaluate_f(j: usize, k: &CurvatureField) -> Result<f64> {
    hamiltonians_for(k)?.evaluate(j, k)
}

/// `grad F_{2j-1}(k)`.
pub fn gradient_f(j: usize, k: &CurvatureField) -> Result<Vec<Vec<f64>>> {
    hamiltonians_for(k)?.gradient(j, k)
}

/// `{F_{2a-1}, F_{2b-1}}(k)`.
pub fn poisson_bracket(a: usize, b: usize, k: &CurvatureField) -> Result<f64> {
    hamiltonians_for(k)?.bracket(a, b, k)
}

/// `Xi_k(z) = z_x - xi k` with `xi` the zero-mean periodic antiderivative of
/// `k z^T - z k^T`.
pub fn poisson_operator(k: &CurvatureField, z: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = k.dimension() - 1;
    poisson_operator_with_mean(k, z, &vec![vec![0.0; m]; m])
}

/// [`poisson_operator`] with `xi` shifted to have the given mean.
pub fn poisson_operator_with_mean(k: &CurvatureField, z: &[Vec<f64>], xi_mean: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if !k.grid.is_periodic() {
        return Err(HamiltonianError::NotPeriodic);
    }
    let m = k.dimension() - 1;
    if z.len() != m {
        return Err(HamiltonianError::DimensionMismatch { expected: m + 1, found: z.len() + 1 });
    }
    let len = k.len();
    let spectral = Spectral::new(len, k.grid.box_length());
    let scale = k.max_abs().max(1.0) * z.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
    let mut out: Vec<Vec<f64>> = z.iter().map(|zi| spectral.derivative(zi, 1)).collect();
    for row in 0..m {
        for col in row + 1..m {
            let integrand: Vec<f64> = (0..len).map(|p| k.components[row][p] * z[col][p] - z[row][p] * k.components[col][p]).collect();
            let mean = integrand.iter().sum::<f64>() / len as f64;
            if mean.abs() > AUXILIARY_MEAN_TOL * scale {
                return Err(HamiltonianError::NonIntegrableAuxiliary { row, col, mean });
            }
            let mut xi = spectral.antiderivative(&integrand);
            let shift = xi_mean[row][col];
            xi.iter_mut().for_each(|v| *v += shift);
            for p in 0..len {
                out[row][p] -= xi[p] * k.components[col][p];
                out[col][p] += xi[p] * k.components[row][p];
            }
        }
    }
    Ok(out)
}

/// One row of the conserved-quantity log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedRow {
    pub t: f64,
    pub f1: f64,
    pub f3: f64,
    pub f5: f64,
}

/// `F_1, F_3, F_5` at every snapshot.
pub fn conserved_log(snapshots: &[CurvatureField]) -> Result<Vec<ConservedRow>> {
    let Some(first) = snapshots.first() else { return Ok(Vec::new()) };
    let h = hamiltonians_for(first)?;
    snapshots.iter().map(|k| Ok(ConservedRow { t: k.t, f1: h.evaluate(1, k)?, f3: h.evaluate(2, k)?, f5: h.evaluate(3, k)? })).collect()
}

/// Largest relative deviation of each column from its first value
/// (absolute when the first value vanishes).
pub fn relative_drift(log: &[ConservedRow]) -> [f64; 3] {
    let Some(first) = log.first() else { return [0.0; 3] };
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
    log.iter().fold([0.0; 3], |acc, r| [acc[0].max(rel(r.f1, first.f1)), acc[1].max(rel(r.f3, first.f3)), acc[2].max(rel(r.f5, first.f5))])
}

/// Writes `t, F_1, F_3, F_5`.
pub fn write_conserved_csv<P: AsRef<Path>>(path: P, log: &[ConservedRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "F_1", "F_3", "F_5"])?;
    for r in log {
        w.write_record([r.t, r.f1, r.f3, r.f5].iter().map(|v| format!("{v:.17e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::vmkdv::random_smooth_field;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_has_zero_functionals() {
        let grid = Grid::periodic(32, 0.0, 2.0 * PI);
        let k = CurvatureField::zeros(grid, 3, 0.0);
        for j in 1..=3 {
            assert_eq!(evaluate_f(j, &k).unwrap(), 0.0);
            assert!(gradient_f(j, &k).unwrap().iter().flatten().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn f1_is_half_l2() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let k = random_smooth_field(grid, 3, 3, 5, 1.0);
        let f1 = evaluate_f(1, &k).unwrap();
        assert!((f1 - k.half_l2_squared()).abs() < 1e-12 && f1 > 0.0);
    }

    #[test]
    fn plane_case_is_plain_derivative() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let k = random_smooth_field(grid, 2, 1, 5, 1.0);
        let z = vec![grid.xs().iter().map(|x| (2.0 * x).sin()).collect::<Vec<f64>>()];
        let out = poisson_operator(&k, &z).unwrap();
        for (j, x) in grid.xs().iter().enumerate() {
            assert!((out[0][j] - 2.0 * (2.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn nonintegrable_auxiliary_is_rejected() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let k = CurvatureField::from_fn(grid, 3, 0.0, |x| vec![x.cos(), 0.0]);
        let z = vec![vec![0.0; 64], grid.xs().iter().map(|x| x.cos()).collect()];
        assert!(matches!(poisson_operator(&k, &z), Err(HamiltonianError::NonIntegrableAuxiliary { .. })));
    }

    #[test]
    fn gauge_invariance() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let k = random_smooth_field(grid, 3, 9, 5, 1.0);
        let th: f64 = 1.1;
        let rotated = CurvatureField::new(
            grid,
            vec![
                (0..64).map(|p| th.cos() * k.components[0][p] + th.sin() * k.components[1][p]).collect(),
                (0..64).map(|p| -th.sin() * k.components[0][p] + th.cos() * k.components[1][p]).collect(),
            ],
            0.0,
        );
        for j in 1..=3 {
            let a = evaluate_f(j, &k).unwrap();
            let b = evaluate_f(j, &rotated).unwrap();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
    }
}
