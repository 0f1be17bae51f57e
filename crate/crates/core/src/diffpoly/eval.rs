//! Numeric evaluation of differential polynomials on sampled curvatures.

use serde::{Deserialize, Serialize};

use super::{DiffPoly, DiffPolyError, JetVar, Result};
use crate::grid::CurvatureField;
use crate::numerics::spectral::Spectral;
use crate::numerics::stencil;

/// How jets `k_i^{(m)}` are computed from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    /// FFT differentiation; periodic grids only.
    Spectral,
    /// Sixth-order finite differences, one-sided near line ends.
    FiniteDifference,
}

/// Accuracy order of the finite-difference jets.
pub const FD_ACCURACY: usize = 6;

/// Sampled jets: `data[i][m]` holds `k_{i+1}^{(m)}` at every sample.
#[derive(Debug, Clone)]
pub struct Jets {
    len: usize,
    data: Vec<Vec<Vec<f64>>>,
}

impl Jets {
    pub fn compute(field: &CurvatureField, max_order: usize, scheme: DerivativeScheme) -> Result<Jets> {
        let grid = field.grid;
        let data = match scheme {
            DerivativeScheme::Spectral => {
                if !grid.is_periodic() {
                    return Err(DiffPolyError::SchemeMismatch);
                }
                let spectral = Spectral::new(grid.len, grid.box_length());
                field
                    .components
                    .iter()
                    .map(|c| {
                        let coeffs = spectral.forward(c);
                        let mut orders = vec![c.clone()];
                        orders.extend((1..=max_order).map(|m| spectral.derivative_of_coeffs(&coeffs, m)));
                        orders
                    })
                    .collect()
            }
            DerivativeScheme::FiniteDifference => field
                .components
                .iter()
                .map(|c| (0..=max_order).map(|m| stencil::derivative(c, grid.spacing, m, FD_ACCURACY, grid.is_periodic())).collect())
                .collect(),
        };
        Ok(Jets { len: grid.len, data })
    }

    /// Wraps precomputed derivatives, `data[i][m] = k_{i+1}^{(m)}`.
    pub fn from_derivatives(data: Vec<Vec<Vec<f64>>>) -> Jets {
        let len = data.first().and_then(|d| d.first()).map_or(0, Vec::len);
        Jets { len, data }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, v: JetVar) -> &[f64] {
        &self.data[v.component - 1][v.order]
    }
}

/// A polynomial with floating-point coefficients for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(JetVar, u32)>)>,
    max_order: usize,
}

impl CompiledPoly {
    pub fn new(terms: Vec<(f64, Vec<(JetVar, u32)>)>) -> CompiledPoly {
        let max_order = terms.iter().flat_map(|(_, f)| f.iter().map(|(v, _)| v.order)).max().unwrap_or(0);
        CompiledPoly { terms, max_order }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn evaluate(&self, jets: &Jets) -> Vec<f64> {
        let mut out = vec![0.0; jets.len()];
        for (c, factors) in &self.terms {
            for (j, slot) in out.iter_mut().enumerate() {
                let mut v = *c;
                for &(var, e) in factors {
                    v *= jets.get(var)[j].powi(e as i32);
                }
                *slot += v;
            }
        }
        out
    }
}

/// Substitutes the jets of `field` into `p`.
pub fn dp_evaluate(p: &DiffPoly, field: &CurvatureField, scheme: DerivativeScheme) -> Result<Vec<f64>> {
    if p.dim() != field.dimension() {
        return Err(DiffPolyError::DimensionMismatch { expected: p.dim(), found: field.dimension() });
    }
    let compiled = p.compile();
    let jets = Jets::compute(field, compiled.max_order(), scheme)?;
    Ok(compiled.evaluate(&jets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::rational;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn half_norm_of_cosine() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let field = CurvatureField::from_fn(grid, 2, 0.0, |x| vec![x.cos()]);
        let p = DiffPoly::norm_squared(2).scale(&rational(1, 2));
        for scheme in [DerivativeScheme::Spectral, DerivativeScheme::FiniteDifference] {
            let v = dp_evaluate(&p, &field, scheme).unwrap();
            for (j, x) in grid.xs().iter().enumerate() {
                assert!((v[j] - 0.5 * x.cos().powi(2)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectral_on_line_is_rejected() {
        let grid = Grid::line(32, 0.0, 0.1);
        let field = CurvatureField::zeros(grid, 2, 0.0);
        let p = DiffPoly::jet(2, 1, 1);
        assert_eq!(dp_evaluate(&p, &field, DerivativeScheme::Spectral), Err(DiffPolyError::SchemeMismatch));
    }

    #[test]
    fn zero_field_gives_zero_for_homogeneous_polys() {
        let grid = Grid::periodic(32, 0.0, 2.0 * PI);
        let field = CurvatureField::zeros(grid, 3, 0.0);
        let q = crate::diffpoly::compute_lax_coefficients(3, 3).unwrap();
        let y3 = q[3].y().unwrap();
        let v = dp_evaluate(y3, &field, DerivativeScheme::Spectral).unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
    }
}
