//! The Lax pair `E^{-1} E_x = a lambda + u`, `E^{-1} E_t = (Q lambda^{2j-2})_+`
//! and the curve-level consequences: frame reconstruction, the Sym formula
//! `E_lambda E^{-1}` at `lambda = 0`, and zero-curvature residuals.
//!
//! Matrices are `(n+1) x (n+1)` with rows and columns numbered from 0;
//! `a = e_{21} - e_{12}` sits in the top-left corner and
//! `u = Psi(k)` carries `k` in column 1 below the diagonal.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffpoly::{CompiledPoly, DerivativeScheme, DiffPolyError, Hierarchy, Jets};
use crate::frames::{self, FrameError, FrameField, GridCurve, Tolerances};
use crate::grid::{CurvatureField, Grid, Topology};
use crate::numerics::interp::{cumulative_integral, Stencil};
use crate::numerics::linalg::{magnus_march, orthogonality_residual, to_complex};
use crate::numerics::stencil;
use crate::numerics::{CMatrix, RMatrix};

#[derive(Debug, Error)]
pub enum LaxError {
    #[error("base sample {base} outside a slice of {len}")]
    BaseOutOfRange { base: usize, len: usize },
    #[error("initial frame is not complex orthogonal (residual {0:e})")]
    NonOrthogonalSeed(f64),
    #[error("flow index {j} outside the precomputed range 1..={max}")]
    FlowOutOfRange { j: usize, max: usize },
    #[error("need at least {needed} time slices, got {found}")]
    TooFewSlices { needed: usize, found: usize },
    #[error("time slices must be uniformly spaced")]
    NonUniformTimes,
    #[error("slices are not at the paired spectral values ({0})")]
    SpectralMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    DiffPoly(#[from] DiffPolyError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LaxError> = std::result::Result<T, E>;

/// Default tolerance on orthogonality and reality residuals.
pub const TOL_ORTH: f64 = 1e-8;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `a = e_{21} - e_{12}` in `o(n+1)`.
pub fn a_matrix(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim + 1, dim + 1);
    a[(1, 0)] = c(1.0);
    a[(0, 1)] = c(-1.0);
    a
}

/// `Psi(k)`: `k` in rows `2..=n` of column 1, `-k^T` in row 1.
pub fn potential(k: &[f64]) -> CMatrix {
    let dim = k.len() + 1;
    let mut u = CMatrix::zeros(dim + 1, dim + 1);
    for (i, &v) in k.iter().enumerate() {
        u[(2 + i, 1)] = c(v);
        u[(1, 2 + i)] = c(-v);
    }
    u
}

/// `I_{1,n} = diag(-1, 1, ..., 1)`.
pub fn i_one_n(dim: usize) -> CMatrix {
    let mut m = CMatrix::identity(dim + 1, dim + 1);
    m[(0, 0)] = c(-1.0);
    m
}

/// `diag(1, g)`.
pub fn embed_frame(g: &RMatrix) -> CMatrix {
    let n = g.nrows();
    let mut e = CMatrix::identity(n + 1, n + 1);
    e.view_mut((1, 1), (n, n)).copy_from(&to_complex(g));
    e
}

/// The real lower-right block `g` of `E = diag(1, g)`.
pub fn frame_block(e: &CMatrix) -> RMatrix {
    let n = e.nrows() - 1;
    RMatrix::from_fn(n, n, |r, col| e[(r + 1, col + 1)].re)
}

/// Samples of `E(x_j, t, lambda0)`.
#[derive(Debug, Clone)]
pub struct ComplexFrameSlice {
    pub lambda0: Complex64,
    pub t: f64,
    pub grid: Grid,
    pub samples: Vec<CMatrix>,
}

impl ComplexFrameSlice {
    /// Ambient dimension `n` (matrices are `(n+1) x (n+1)`).
    pub fn dimension(&self) -> usize {
        self.samples[0].nrows() - 1
    }

    /// `max_j |E^T E - I|`, relative to `max(1, |E|^2)`.
    pub fn orthogonality_residual(&self) -> f64 {
        self.samples.iter().map(orthogonality_residual).fold(0.0, f64::max)
    }

    /// `max_j |conj(E(conj lambda0)) - E(lambda0)|`, relative to `max(1, |E|)`.
    pub fn conjugate_reality_residual(&self, other: &ComplexFrameSlice) -> Result<f64> {
        if (other.lambda0 - self.lambda0.conj()).norm() > 1e-14 * self.lambda0.norm().max(1.0) {
            return Err(LaxError::SpectralMismatch(format!("{} vs conj({})", other.lambda0, self.lambda0)));
        }
        Ok(self.paired_residual(other, |m| m.map(|z| z.conj())))
    }

    /// `max_j |I_{1,n} E(-lambda0) I_{1,n} - E(lambda0)|`, relative to `max(1, |E|)`.
    pub fn involution_reality_residual(&self, other: &ComplexFrameSlice) -> Result<f64> {
        if (other.lambda0 + self.lambda0).norm() > 1e-14 * self.lambda0.norm().max(1.0) {
            return Err(LaxError::SpectralMismatch(format!("{} vs -({})", other.lambda0, self.lambda0)));
        }
        let j = i_one_n(self.dimension());
        Ok(self.paired_residual(other, |m| &j * m * &j))
    }

    fn paired_residual<F: Fn(&CMatrix) -> CMatrix>(&self, other: &ComplexFrameSlice, map: F) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| {
                let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
                (map(b) - a).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
            })
            .fold(0.0, f64::max)
    }
}

fn interpolate_k(field: &CurvatureField, step: usize, theta: f64) -> Vec<f64> {
    let s = Stencil::uniform(field.len(), step, theta, 6, field.grid.is_periodic());
    field.components.iter().map(|comp| s.apply(comp)).collect()
}

fn check_seed(e0: &CMatrix, dim: usize) -> Result<()> {
    if e0.nrows() != dim + 1 || e0.ncols() != dim + 1 {
        return Err(LaxError::DimensionMismatch { expected: dim + 1, found: e0.nrows() });
    }
    let r = orthogonality_residual(e0);
    if r > TOL_ORTH {
        return Err(LaxError::NonOrthogonalSeed(r));
    }
    Ok(())
}

/// Integrates `E_x = E (a lambda0 + Psi(k))` across the slice from
/// `E(x_0) = e0` with fourth-order Magnus steps. `k` between samples comes
/// from 6-point Lagrange interpolation.
///
/// For real `lambda0` the frame is re-orthonormalized after each step. Off
/// the axis it grows, and the polar correction would perturb `E^T v` by
/// `O(eps |E|^2)` relative, so the (already orthogonal) Magnus steps are
/// used as they are.
pub fn integrate_frame_x(k: &CurvatureField, lambda0: Complex64, e0: &CMatrix) -> Result<ComplexFrameSlice> {
    integrate_frame_x_from(k, lambda0, e0, 0)
}

/// As [`integrate_frame_x`], seeded at sample `base` and marched outward in
/// both directions.
///
/// Off the real axis the frame has modes growing like `exp(|Im lambda0| x)`
/// in opposite directions, so a vector selected at one end of a long slice
/// loses the other mode to rounding. An interior base point near the
/// structure of interest keeps both represented.
pub fn integrate_frame_x_from(k: &CurvatureField, lambda0: Complex64, e_base: &CMatrix, base: usize) -> Result<ComplexFrameSlice> {
    let dim = k.dimension();
    check_seed(e_base, dim)?;
    if base >= k.len() {
        return Err(LaxError::BaseOutOfRange { base, len: k.len() });
    }
    let a = a_matrix(dim) * lambda0;
    let h = k.grid.spacing;
    let reorth = lambda0.im == 0.0;
    let forward = magnus_march(e_base, k.len() - 1 - base, h, reorth, |step, theta| &a + potential(&interpolate_k(k, base + step, theta)));
    let backward = magnus_march(e_base, base, -h, reorth, |step, theta| &a + potential(&interpolate_k(k, base - 1 - step, 1.0 - theta)));
    let samples = backward.into_iter().skip(1).rev().chain(forward).collect();
    Ok(ComplexFrameSlice { lambda0, t: k.t, grid: k.grid, samples })
}

/// The coefficients `Q_0, ..., Q_{2j-2}` of the time generator, compiled.
#[derive(Debug, Clone)]
pub struct TimeGenerator {
    dim: usize,
    j: usize,
    /// `q[i]` lists the nonzero entries `(row, col, poly)` of `Q_i`.
    q: Vec<Vec<(usize, usize, CompiledPoly)>>,
    order: usize,
}

impl TimeGenerator {
    pub fn new(dim: usize, j: usize) -> Result<TimeGenerator> {
        let max = crate::vmkdv::DEFAULT_MAX_FLOW.max(j);
        if j == 0 || j > crate::vmkdv::DEFAULT_MAX_FLOW {
            return Err(LaxError::FlowOutOfRange { j, max: crate::vmkdv::DEFAULT_MAX_FLOW });
        }
        let h = Hierarchy::new(dim, max)?;
        let q: Vec<Vec<(usize, usize, CompiledPoly)>> = (0..=2 * j - 2)
            .map(|i| {
                let m = h.coefficient(i).expect("in range").matrix(dim);
                let mut entries = Vec::new();
                for (r, row) in m.iter().enumerate() {
                    for (col, p) in row.iter().enumerate() {
                        if !p.is_zero() {
                            entries.push((r, col, p.compile()));
                        }
                    }
                }
                entries
            })
            .collect();
        let order = q.iter().flatten().map(|(_, _, p)| p.max_order()).max().unwrap_or(0);
        Ok(TimeGenerator { dim, j, q, order })
    }

    pub fn j(&self) -> usize {
        self.j
    }

    fn jets(&self, field: &CurvatureField) -> Result<Jets> {
        let scheme = if field.grid.is_periodic() { DerivativeScheme::Spectral } else { DerivativeScheme::FiniteDifference };
        Ok(Jets::compute(field, self.order, scheme)?)
    }

    /// `Q_0, ..., Q_{2j-2}` at every sample: `out[i][x]`.
    pub fn coefficient_fields(&self, field: &CurvatureField) -> Result<Vec<Vec<RMatrix>>> {
        if field.dimension() != self.dim {
            return Err(LaxError::DimensionMismatch { expected: self.dim, found: field.dimension() });
        }
        let jets = self.jets(field)?;
        let size = self.dim + 1;
        Ok(self
            .q
            .iter()
            .map(|entries| {
                let mut mats = vec![RMatrix::zeros(size, size); field.len()];
                for (r, col, p) in entries {
                    for (x, v) in p.evaluate(&jets).into_iter().enumerate() {
                        mats[x][(*r, *col)] = v;
                    }
                }
                mats
            })
            .collect())
    }

    /// `Q_0, ..., Q_{2j-2}` at one sample.
    pub fn coefficients_at(&self, field: &CurvatureField, index: usize) -> Result<Vec<RMatrix>> {
        Ok(self.coefficient_fields(field)?.into_iter().map(|mut v| v.swap_remove(index)).collect())
    }

    /// `(Q lambda^{2j-2})_+ = a lambda^{2j-1} + sum_i Q_i lambda^{2j-2-i}`.
    pub fn generator(&self, coeffs: &[RMatrix], lambda: Complex64) -> CMatrix {
        let top = 2 * self.j - 2;
        let mut v = a_matrix(self.dim) * lambda.powu(2 * self.j as u32 - 1);
        for (i, q) in coeffs.iter().enumerate() {
            v += to_complex(q) * lambda.powu((top - i) as u32);
        }
        v
    }

    /// `d/d lambda` of the generator at `lambda = 0`: `a` for `j = 1`,
    /// otherwise `Q_{2j-3}`.
    pub fn generator_lambda_derivative_at_zero(&self, coeffs: &[RMatrix]) -> CMatrix {
        if self.j == 1 {
            a_matrix(self.dim)
        } else {
            to_complex(&coeffs[2 * self.j - 3])
        }
    }

    /// `Z_{2j-3}` coefficients `(y, eta)` in the frame basis: `e_1` for
    /// `j = 1`, otherwise column 0 (rows `1..=n`) of `Q_{2j-3}`.
    pub fn curve_velocity_coefficients(&self, coeffs: &[RMatrix]) -> Vec<f64> {
        if self.j == 1 {
            let mut v = vec![0.0; self.dim];
            v[0] = 1.0;
            v
        } else {
            (1..=self.dim).map(|r| coeffs[2 * self.j - 3][(r, 0)]).collect()
        }
    }
}

fn uniform_step(history: &[CurvatureField], needed: usize) -> Result<f64> {
    if history.len() < needed {
        return Err(LaxError::TooFewSlices { needed, found: history.len() });
    }
    let dt = history[1].t - history[0].t;
    for w in history.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.abs().max(1e-300) || dt <= 0.0 {
            return Err(LaxError::NonUniformTimes);
        }
    }
    Ok(dt)
}

/// Integrates `E_t = E V(t)` at the base sample `x_0` through the snapshot
/// times, where `V` is given at each snapshot and interpolated (4-point
/// Lagrange) to the Magnus nodes.
fn march_time(values: &[CMatrix], dt: f64, e00: &CMatrix, reorth: bool) -> Vec<CMatrix> {
    let len = values.len();
    magnus_march(e00, len - 1, dt, reorth, |step, theta| {
        let s = Stencil::uniform(len, step, theta, 4, false);
        let mut acc = values[0].map(|_| Complex64::new(0.0, 0.0));
        for (&i, &w) in s.indices.iter().zip(&s.weights) {
            acc += &values[i] * c(w);
        }
        acc
    })
}

/// The time fiber `E(x_0, t, lambda0)` through the snapshot times of
/// `history` (uniformly spaced, at least 4 slices).
pub fn integrate_frame_t(history: &[CurvatureField], j: usize, lambda0: Complex64, e00: &CMatrix) -> Result<Vec<CMatrix>> {
    integrate_frame_t_at(history, j, lambda0, e00, 0)
}

/// The time fiber at sample `base`.
pub fn integrate_frame_t_at(history: &[CurvatureField], j: usize, lambda0: Complex64, e0: &CMatrix, base: usize) -> Result<Vec<CMatrix>> {
    let dim = history.first().map_or(2, CurvatureField::dimension);
    let gen = TimeGenerator::new(dim, j)?;
    check_seed(e0, dim)?;
    if let Some(len) = history.first().map(CurvatureField::len).filter(|&len| base >= len) {
        return Err(LaxError::BaseOutOfRange { base, len });
    }
    let dt = uniform_step(history, 4)?;
    let values = history.iter().map(|f| Ok(gen.generator(&gen.coefficients_at(f, base)?, lambda0))).collect::<Result<Vec<_>>>()?;
    Ok(march_time(&values, dt, e0, lambda0.im == 0.0))
}

/// Slices `E(., t, lambda0)` for every snapshot: the time fiber at sample
/// `base` from `e_base`, then an x-integration per slice outward from it.
pub fn frame_history(
    history: &[CurvatureField],
    j: usize,
    lambda0: Complex64,
    e_base: &CMatrix,
    base: usize,
) -> Result<Vec<ComplexFrameSlice>> {
    let fiber = integrate_frame_t_at(history, j, lambda0, e_base, base)?;
    history.iter().zip(&fiber).map(|(field, e0)| integrate_frame_x_from(field, lambda0, e0, base)).collect()
}

/// Per-power maxima of the discrete zero-curvature defect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroCurvatureReport {
    pub j: usize,
    /// `(p, r)`: max-norm of the `lambda^p` coefficient.
    pub per_power: Vec<(usize, f64)>,
    pub max: f64,
}

/// Discrete curvature of the connection `d + (U dx + V dt)` on space-time
/// samples (`history` uniform in t, at least 3 slices).
///
/// Compatibility of `E_x = E U` and `E_t = E V` is `U_t = V_x + [U, V]`.
/// For each power `p` of `lambda` this measures
/// `delta_{p0} Psi(k_t) - (V_p)_x - [Psi(k), V_p] - [a, V_{p-1}]`,
/// with `k_t` from centered differences in time (five points when
/// available) and `(V_p)_x` from fourth-order differences in x. Only
/// slices where the centered time stencil fits are used.
pub fn zero_curvature_residual(history: &[CurvatureField], j: usize) -> Result<ZeroCurvatureReport> {
    let dim = history.first().map_or(2, CurvatureField::dimension);
    let gen = TimeGenerator::new(dim, j)?;
    let dt = uniform_step(history, 3)?;
    let (half, weights): (usize, Vec<f64>) =
        if history.len() >= 5 { (2, vec![1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0]) } else { (1, vec![-0.5, 0.0, 0.5]) };
    let a = {
        let mut m = RMatrix::zeros(dim + 1, dim + 1);
        m[(1, 0)] = 1.0;
        m[(0, 1)] = -1.0;
        m
    };
    let size = dim + 1;
    let powers = 2 * j + 1;
    let mut worst = vec![0.0f64; powers];
    for m in half..history.len() - half {
        let field = &history[m];
        let grid = field.grid;
        let kt: Vec<Vec<f64>> = (0..dim - 1)
            .map(|i| {
                (0..field.len())
                    .map(|x| weights.iter().enumerate().map(|(o, w)| w * history[m + o - half].components[i][x]).sum::<f64>() / dt)
                    .collect()
            })
            .collect();
        let q = gen.coefficient_fields(field)?;
        // V_p = Q_{2j-2-p} for p <= 2j-2, V_{2j-1} = a.
        let v_at = |p: usize, x: usize| -> RMatrix {
            if p == 2 * j - 1 {
                a.clone()
            } else if p < 2 * j - 1 {
                q[2 * j - 2 - p][x].clone()
            } else {
                RMatrix::zeros(size, size)
            }
        };
        // x-derivatives of every entry of every V_p with p <= 2j-2.
        let vx: Vec<Vec<RMatrix>> = (0..=2 * j - 2)
            .map(|p| {
                let mut out = vec![RMatrix::zeros(size, size); field.len()];
                for r in 0..size {
                    for col in 0..size {
                        let series: Vec<f64> = (0..field.len()).map(|x| q[2 * j - 2 - p][x][(r, col)]).collect();
                        if series.iter().all(|v| *v == 0.0) {
                            continue;
                        }
                        let d = stencil::derivative(&series, grid.spacing, 1, 4, grid.is_periodic());
                        for (x, v) in d.into_iter().enumerate() {
                            out[x][(r, col)] = v;
                        }
                    }
                }
                out
            })
            .collect();
        for x in 0..field.len() {
            let u = {
                let mut u = RMatrix::zeros(size, size);
                for i in 0..dim - 1 {
                    u[(2 + i, 1)] = field.components[i][x];
                    u[(1, 2 + i)] = -field.components[i][x];
                }
                u
            };
            for (p, slot) in worst.iter_mut().enumerate() {
                let vp = v_at(p, x);
                let mut r = &vp * &u - &u * &vp;
                if p >= 1 {
                    let prev = v_at(p - 1, x);
                    r += &prev * &a - &a * &prev;
                }
                if p <= 2 * j - 2 {
                    r -= &vx[p][x];
                }
                if p == 0 {
                    for i in 0..dim - 1 {
                        r[(2 + i, 1)] += kt[i][x];
                        r[(1, 2 + i)] -= kt[i][x];
                    }
                }
                *slot = slot.max(r.abs().max());
            }
        }
    }
    let per_power: Vec<(usize, f64)> = worst.into_iter().enumerate().collect();
    let max = per_power.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    Ok(ZeroCurvatureReport { j, per_power, max })
}

/// Curves, frames and curvatures along a run, one entry per time slice.
#[derive(Debug, Clone)]
pub struct CurveTrail {
    pub j: usize,
    pub times: Vec<f64>,
    pub curves: Vec<GridCurve>,
    pub frames: Vec<FrameField>,
    pub curvatures: Vec<CurvatureField>,
    /// `|integral of e_1 over one period|` for periodic data, else 0.
    pub closure_gaps: Vec<f64>,
}

impl CurveTrail {
    /// `max | ||gamma_x|| - 1 |` over all slices.
    pub fn arc_length_defect(&self) -> f64 {
        self.curves.iter().map(GridCurve::arc_length_defect).fold(0.0, f64::max)
    }
}

/// Rebuilds `gamma(x, t) = c(t) + int_{x_0}^x e_1` from curvature snapshots.
///
/// The frame at the base sample follows the time fiber at `lambda = 0`
/// from `g00`; each slice is then integrated in x. `c(t)` integrates the
/// curve velocity `Z_{2j-3} = y e_1 + (e_2, ..., e_n) eta` at the base
/// sample. Both integrals use sixth-order cumulative quadrature. Curves
/// are returned with line topology; closure of periodic data is reported
/// in `closure_gaps`.
pub fn reconstruct_curve(history: &[CurvatureField], j: usize, g00: &RMatrix, gamma00: &[f64], tol: &Tolerances) -> Result<CurveTrail> {
    let dim = history.first().map_or(2, CurvatureField::dimension);
    if gamma00.len() != dim {
        return Err(LaxError::DimensionMismatch { expected: dim, found: gamma00.len() });
    }
    let gen = TimeGenerator::new(dim, j)?;
    let fiber = integrate_frame_t(history, j, c(0.0), &embed_frame(g00))?;
    let times: Vec<f64> = history.iter().map(|f| f.t).collect();

    let mut velocities: Vec<Vec<f64>> = Vec::with_capacity(history.len());
    let mut slices = Vec::with_capacity(history.len());
    for (field, e0) in history.iter().zip(&fiber) {
        let slice = integrate_frame_x(field, c(0.0), e0)?;
        let g0 = frame_block(e0);
        let coeffs = gen.coefficients_at(field, 0)?;
        let z = &g0 * DVector::from_vec(gen.curve_velocity_coefficients(&coeffs));
        velocities.push(z.iter().copied().collect());
        slices.push(slice);
    }
    let base: Vec<Vec<f64>> = (0..dim)
        .map(|comp| {
            let series: Vec<f64> = velocities.iter().map(|v| v[comp]).collect();
            cumulative_integral(&times, &series).into_iter().map(|v| v + gamma00[comp]).collect()
        })
        .collect();

    let mut curves = Vec::new();
    let mut frame_fields = Vec::new();
    let mut gaps = Vec::new();
    for (m, (field, slice)) in history.iter().zip(&slices).enumerate() {
        let grid = field.grid;
        let xs = grid.xs();
        let gs: Vec<RMatrix> = slice.samples.iter().map(frame_block).collect();
        let offsets: Vec<Vec<f64>> = (0..dim)
            .map(|comp| {
                let e1: Vec<f64> = gs.iter().map(|g| g[(comp, 0)]).collect();
                cumulative_integral(&xs, &e1)
            })
            .collect();
        let points: Vec<Vec<f64>> = (0..grid.len).map(|x| (0..dim).map(|comp| base[comp][m] + offsets[comp][x]).collect()).collect();
        let gap = if grid.is_periodic() {
            let s: Vec<f64> = (0..dim).map(|comp| gs.iter().map(|g| g[(comp, 0)]).sum::<f64>() * grid.spacing).collect();
            s.iter().map(|v| v * v).sum::<f64>().sqrt()
        } else {
            0.0
        };
        let curve = GridCurve::new(points, grid.spacing, grid.origin, Topology::Line, tol)?;
        let line_grid = Grid { topology: Topology::Line, ..grid };
        frame_fields.push(FrameField::from_parts(gs, (0..grid.len).map(|x| field.at(x)).collect(), line_grid));
        curves.push(curve);
        gaps.push(gap);
    }
    Ok(CurveTrail { j, times, curves, frames: frame_fields, curvatures: history.to_vec(), closure_gaps: gaps })
}

/// Integrates the joint system for `(E, E_lambda)` at `lambda = 0` along a
/// slice from `(e0, e_lambda0)` and reads `gamma` off the first column of
/// `E_lambda E^{-1}`. Returns the points.
pub fn sym_curve(k_slice: &CurvatureField, e0: &CMatrix, e_lambda0: &CMatrix) -> Result<Vec<Vec<f64>>> {
    let dim = k_slice.dimension();
    check_seed(e0, dim)?;
    let a = a_matrix(dim);
    let start = joint(e0, e_lambda0, e0);
    let path = magnus_march(&start, k_slice.len() - 1, k_slice.grid.spacing, false, |step, theta| {
        let u = potential(&interpolate_k(k_slice, step, theta));
        joint(&u, &a, &u)
    });
    Ok(path.iter().map(|m| read_sym(m, dim)).collect())
}

/// `[[x, y], [0, z]]`.
fn joint(x: &CMatrix, y: &CMatrix, z: &CMatrix) -> CMatrix {
    let s = x.nrows();
    let mut m = CMatrix::zeros(2 * s, 2 * s);
    m.view_mut((0, 0), (s, s)).copy_from(x);
    m.view_mut((0, s), (s, s)).copy_from(y);
    m.view_mut((s, s), (s, s)).copy_from(z);
    m
}

/// `gamma` from `[[E, E_lambda], [0, E]]`: rows `1..=n` of column 0 of `E_lambda E^T`.
fn read_sym(m: &CMatrix, dim: usize) -> Vec<f64> {
    let s = dim + 1;
    let e = m.view((0, 0), (s, s));
    let el = m.view((0, s), (s, s));
    let zeta = el * e.transpose();
    (1..=dim).map(|r| zeta[(r, 0)].re).collect()
}

/// Runs [`sym_curve`] on every slice, seeding each from the joint time
/// fiber of `(E, E_lambda)` at `lambda = 0` started at
/// `(diag(1, g00), e_lambda00)`.
pub fn sym_trail(history: &[CurvatureField], j: usize, g00: &RMatrix, e_lambda00: &CMatrix) -> Result<Vec<Vec<Vec<f64>>>> {
    let dim = history.first().map_or(2, CurvatureField::dimension);
    let gen = TimeGenerator::new(dim, j)?;
    let dt = uniform_step(history, 4)?;
    let e00 = embed_frame(g00);
    check_seed(&e00, dim)?;
    let s = dim + 1;
    let values = history
        .iter()
        .map(|f| {
            let coeffs = gen.coefficients_at(f, 0)?;
            let v0 = gen.generator(&coeffs, c(0.0));
            let v1 = gen.generator_lambda_derivative_at_zero(&coeffs);
            Ok(joint(&v0, &v1, &v0))
        })
        .collect::<Result<Vec<_>>>()?;
    let fiber = march_time(&values, dt, &joint(&e00, e_lambda00, &e00), false);
    history
        .iter()
        .zip(&fiber)
        .map(|(field, m)| {
            let e = m.view((0, 0), (s, s)).into_owned();
            let el = m.view((0, s), (s, s)).into_owned();
            sym_curve(field, &e, &el)
        })
        .collect()
}

/// `max |gamma_t - Z_{2j-3}|` over interior slices, with `gamma_t` from
/// centered differences in time (five points when at least five slices
/// exist, else three).
pub fn geometric_flow_residual(trail: &CurveTrail, j: usize) -> Result<f64> {
    let dim = trail.curves.first().map_or(2, GridCurve::dimension);
    let gen = TimeGenerator::new(dim, j)?;
    let len = trail.curves.len();
    if len < 3 {
        return Err(LaxError::TooFewSlices { needed: 3, found: len });
    }
    let dt = uniform_step(&trail.curvatures, 3)?;
    let (half, weights): (usize, Vec<f64>) =
        if len >= 5 { (2, vec![1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0]) } else { (1, vec![-0.5, 0.0, 0.5]) };
    let mut worst: f64 = 0.0;
    for m in half..len - half {
        let q = gen.coefficient_fields(&trail.curvatures[m])?;
        for x in 0..trail.curves[m].len() {
            let coeffs: Vec<RMatrix> = q.iter().map(|qi| qi[x].clone()).collect();
            let z = &trail.frames[m].frames[x] * DVector::from_vec(gen.curve_velocity_coefficients(&coeffs));
            for comp in 0..dim {
                let gt: f64 = weights.iter().enumerate().map(|(o, w)| w * trail.curves[m + o - half].points()[x][comp]).sum::<f64>() / dt;
                worst = worst.max((gt - z[comp]).abs());
            }
        }
    }
    Ok(worst)
}

/// Writes one curve CSV per slice (`curve_0000.csv`, ...) into `dir`.
pub fn write_trail_csv<P: AsRef<Path>>(dir: P, trail: &CurveTrail) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir.as_ref())?;
    let mut paths = Vec::new();
    for (m, (curve, frame)) in trail.curves.iter().zip(&trail.frames).enumerate() {
        let path = dir.as_ref().join(format!("curve_{m:04}.csv"));
        frames::write_curve_csv(&path, curve, Some(frame))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Residual report written as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub zero_curvature: Option<ZeroCurvatureReport>,
    pub geometric_flow: Option<f64>,
    pub arc_length_defect: Option<f64>,
    pub orthogonality: Option<f64>,
}

impl ResidualReport {
    pub fn write<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vmkdv::random_smooth_field;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_slice_is_a_rotation() {
        let grid = Grid::periodic(128, 0.0, 2.0 * PI);
        let k = CurvatureField::zeros(grid, 2, 0.0);
        let lambda = c(0.8);
        let slice = integrate_frame_x(&k, lambda, &CMatrix::identity(3, 3)).unwrap();
        for (jx, m) in slice.samples.iter().enumerate() {
            let th = 0.8 * grid.x(jx);
            assert!((m[(0, 0)].re - th.cos()).abs() < 1e-12);
            assert!((m[(1, 0)].re - th.sin()).abs() < 1e-12);
            assert!((m[(2, 2)].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_zero_gives_block_diagonal_parallel_frame() {
        let grid = Grid::periodic(256, 0.0, 2.0 * PI);
        let k = random_smooth_field(grid, 3, 4, 4, 1.0);
        let slice = integrate_frame_x(&k, c(0.0), &CMatrix::identity(4, 4)).unwrap();
        for m in &slice.samples {
            for r in 1..4 {
                assert!(m[(0, r)].norm() < 1e-14 && m[(r, 0)].norm() < 1e-14);
            }
        }
        assert!(slice.orthogonality_residual() < 1e-12);
    }

    #[test]
    fn rejects_non_orthogonal_seed() {
        let grid = Grid::periodic(16, 0.0, 1.0);
        let k = CurvatureField::zeros(grid, 2, 0.0);
        let seed = CMatrix::identity(3, 3) * c(2.0);
        assert!(matches!(integrate_frame_x(&k, c(1.0), &seed), Err(LaxError::NonOrthogonalSeed(_))));
    }

    #[test]
    fn reality_conditions_for_random_data() {
        let grid = Grid::periodic(256, 0.0, 2.0 * PI);
        let k = random_smooth_field(grid, 3, 8, 4, 1.0);
        let lam = Complex64::new(0.3, -0.7);
        let id = CMatrix::identity(4, 4);
        let s = integrate_frame_x(&k, lam, &id).unwrap();
        let sc = integrate_frame_x(&k, lam.conj(), &id).unwrap();
        let sm = integrate_frame_x(&k, -lam, &id).unwrap();
        assert!(s.conjugate_reality_residual(&sc).unwrap() < 1e-8);
        assert!(s.involution_reality_residual(&sm).unwrap() < 1e-8);
        assert!(s.involution_reality_residual(&sc).is_err());
    }

    #[test]
    fn zero_data_has_zero_residual() {
        let grid = Grid::line(64, -1.0, 2.0 / 64.0);
        let history: Vec<CurvatureField> = (0..5).map(|m| CurvatureField::zeros(grid, 3, m as f64 * 0.01)).collect();
        for j in 1..=3 {
            assert_eq!(zero_curvature_residual(&history, j).unwrap().max, 0.0);
        }
    }
}
