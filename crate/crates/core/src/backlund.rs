//! Simple elements `phi_{is,pi}` of the rational loop group and the
//! Bäcklund transformations they generate: new curvatures, new curves and
//! frames, permutability and sequential multi-soliton dressing.
//!
//! A projector is stored as its spec `(s, c)`; the Hermitian projector is
//! `pi = v v^* / (v^* v)` with `v = (1, i c)`. For a frame `E` normalized
//! by `E(x_0, t_0) = I` the dressed frame is
//! `phi_{is,pi} E phi_{is,tilde pi}^{-1}` with `tilde pi` the projection
//! onto `tilde v = E(-is)^{-1} v = E(-is)^T v`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{FrameError, FrameField, GridCurve, Tolerances};
use crate::grid::{CurvatureField, Grid};
use crate::lax::{i_one_n, ComplexFrameSlice, CurveTrail, LaxError};
use crate::numerics::{CMatrix, RMatrix};

#[derive(Debug, Error)]
pub enum BacklundError {
    #[error("invalid projector spec: {0}")]
    InvalidSpec(String),
    #[error("lambda = {lambda} is a pole of the simple element")]
    PoleHit { lambda: Complex64 },
    #[error("y0 = {y0:e} at sample {index}")]
    VanishingY0 { index: usize, y0: f64 },
    #[error("equal spectral squares: s1 = {s1}, s2 = {s2}")]
    EqualSpectralSquares { s1: f64, s2: f64 },
    #[error("frame slice is at lambda = {found}, expected {expected}")]
    SpectralMismatch { expected: Complex64, found: Complex64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the two dressing orders disagree by {0:e}")]
    NotPermutable(f64),
    #[error(transparent)]
    Lax(#[from] LaxError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

pub type Result<T, E = BacklundError> = std::result::Result<T, E>;

/// `|y0|` below this aborts a transformation.
pub const Y0_THRESHOLD: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Pole location `s` and direction `c` (unit vector in `R^n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub s: f64,
    pub c: Vec<f64>,
}

impl ProjectorSpec {
    /// Validates `s != 0` and `|c| = 1` within `1e-12`.
    pub fn new(s: f64, c: Vec<f64>) -> Result<ProjectorSpec> {
        let spec = ProjectorSpec { s, c };
        spec.validate()?;
        Ok(spec)
    }

    /// Rescales `c` to unit length first.
    pub fn normalized(s: f64, c: Vec<f64>) -> Result<ProjectorSpec> {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(BacklundError::InvalidSpec("c must be a nonzero finite vector".into()));
        }
        ProjectorSpec::new(s, c.into_iter().map(|v| v / norm).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.s != 0.0) {
            return Err(BacklundError::InvalidSpec(format!("s must be nonzero and finite, got {}", self.s)));
        }
        if self.c.len() < 2 {
            return Err(BacklundError::InvalidSpec(format!("c must have at least 2 components, got {}", self.c.len())));
        }
        let norm = self.c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(BacklundError::InvalidSpec(format!("|c| = {norm}, expected 1")));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.c.len()
    }

    /// `v = (1, i c)`.
    pub fn vector(&self) -> Vec<Complex64> {
        std::iter::once(c(1.0)).chain(self.c.iter().map(|&v| I * v)).collect()
    }

    /// The reflection `I_n - 2 c c^T`.
    pub fn reflection(&self) -> RMatrix {
        reflection(&self.c)
    }
}

fn reflection(c: &[f64]) -> RMatrix {
    let n = c.len();
    RMatrix::from_fn(n, n, |r, col| if r == col { 1.0 } else { 0.0 } - 2.0 * c[r] * c[col])
}

/// The Hermitian projector onto `C v`.
pub fn projector_of(v: &[Complex64]) -> CMatrix {
    let v = DVector::from_column_slice(v);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    (&v * v.adjoint()) / c(norm)
}

/// `pi = v v^* / (v^* v)` with `v = (1, i c)`.
pub fn projector(spec: &ProjectorSpec) -> CMatrix {
    projector_of(&spec.vector())
}

/// `phi_{is,pi}(lambda)` at one spectral value.
#[derive(Debug, Clone)]
pub struct SimpleElementEval {
    pub lambda: Complex64,
    pub matrix: CMatrix,
}

/// `I + 2is/(lambda - is) pi - 2is/(lambda + is) conj(pi)` for an arbitrary
/// projector.
pub fn simple_element_with(s: f64, pi: &CMatrix, lambda: Complex64) -> Result<CMatrix> {
    let pole = I * s;
    let guard = 1e-14 * s.abs().max(1.0);
    if (lambda - pole).norm() <= guard || (lambda + pole).norm() <= guard {
        return Err(BacklundError::PoleHit { lambda });
    }
    let size = pi.nrows();
    let alpha = 2.0 * pole / (lambda - pole);
    let beta = 2.0 * pole / (lambda + pole);
    Ok(CMatrix::identity(size, size) + pi * alpha - pi.map(|z| z.conj()) * beta)
}

/// `phi_{is,pi}(lambda)` for the spec's projector.
pub fn simple_element(spec: &ProjectorSpec, lambda: Complex64) -> Result<SimpleElementEval> {
    spec.validate()?;
    Ok(SimpleElementEval { lambda, matrix: simple_element_with(spec.s, &projector(spec), lambda)? })
}

/// `exp(a lambda x + a lambda^{2j-1} t)`: the frame of `k = 0`.
pub fn vacuum_frame(dim: usize, j: usize, x: f64, t: f64, lambda: Complex64) -> CMatrix {
    let theta = lambda * x + lambda.powu(2 * j as u32 - 1) * t;
    let (cos, sin) = (theta.cos(), theta.sin());
    let mut e = CMatrix::identity(dim + 1, dim + 1);
    e[(0, 0)] = cos;
    e[(0, 1)] = -sin;
    e[(1, 0)] = sin;
    e[(1, 1)] = cos;
    e
}

/// [`vacuum_frame`] sampled on a grid.
pub fn vacuum_slice(grid: Grid, dim: usize, j: usize, t: f64, lambda: Complex64) -> ComplexFrameSlice {
    let samples = grid.xs().into_iter().map(|x| vacuum_frame(dim, j, x, t, lambda)).collect();
    ComplexFrameSlice { lambda0: lambda, t, grid, samples }
}

/// Mean of `f` over a circle around `center`. Equals `f(center)` for `f`
/// holomorphic on the closed disc, so it evaluates removable singularities.
pub fn cauchy_mean<F>(mut f: F, center: Complex64, radius: f64, points: usize) -> CMatrix
where
    F: FnMut(Complex64) -> CMatrix,
{
    let mut acc: Option<CMatrix> = None;
    for p in 0..points {
        let angle = 2.0 * std::f64::consts::PI * (p as f64 + 0.5) / points as f64;
        let value = f(center + Complex64::from_polar(radius, angle));
        acc = Some(match acc {
            Some(a) => a + value,
            None => value,
        });
    }
    acc.expect("at least one point") / c(points as f64)
}

/// `tilde v = (y0, i y_1, ..., i y_n)` with `sum y_i^2 = y0^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TildeVector {
    pub y0: f64,
    pub y: Vec<f64>,
}

impl TildeVector {
    /// Reads `(y0, y)` from a complex vector after removing a common phase
    /// so that `y0 > 0`. Returns the vector and the size of the discarded
    /// parts (`Im y0`, `Re y_i`) relative to `|y0|`.
    pub fn from_vector(w: &[Complex64], index: usize) -> Result<(TildeVector, f64)> {
        let lead = w[0].norm();
        if lead < Y0_THRESHOLD {
            return Err(BacklundError::VanishingY0 { index, y0: lead });
        }
        let phase = w[0] / lead;
        let scaled: Vec<Complex64> = w.iter().map(|z| z / phase).collect();
        let y0 = scaled[0].re;
        let y: Vec<f64> = scaled[1..].iter().map(|z| z.im).collect();
        let off = scaled[1..].iter().map(|z| z.re.abs()).fold(scaled[0].im.abs(), f64::max) / y0;
        Ok((TildeVector { y0, y }, off))
    }

    /// `|sum y_i^2 - y0^2| / max(1, y0^2)`.
    pub fn identity_defect(&self) -> f64 {
        let sum: f64 = self.y.iter().map(|v| v * v).sum();
        (sum - self.y0 * self.y0).abs() / (self.y0 * self.y0).max(1.0)
    }

    /// `tilde c = y / y0`, a unit vector.
    pub fn direction(&self) -> Vec<f64> {
        self.y.iter().map(|v| v / self.y0).collect()
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        std::iter::once(c(self.y0)).chain(self.y.iter().map(|&v| I * v)).collect()
    }

    /// Change of curvature under the transformation with pole `is`:
    /// `(2s / y0) (y_2, ..., y_n)`.
    pub fn curvature_shift(&self, s: f64) -> Vec<f64> {
        self.y[1..].iter().map(|v| 2.0 * s * v / self.y0).collect()
    }
}

/// One factor pair `phi_{is,left} . phi_{is,right}^{-1}` of a dressing at a
/// sample.
#[derive(Debug, Clone)]
pub struct DressingStep {
    pub s: f64,
    pub left: CMatrix,
    pub right: CMatrix,
}

/// `phi_m(left) ... phi_1(left) E phi_1(right)^{-1} ... phi_m(right)^{-1}`
/// for a frame value `e = E(lambda)`. Within `1e-3 |s|` of a pole the value
/// is taken as a Cauchy mean, using `frame` to evaluate `E` off the pole.
pub fn dressed_frame<F>(frame: F, lambda: Complex64, steps: &[DressingStep]) -> Result<CMatrix>
where
    F: Fn(Complex64) -> CMatrix,
{
    let near = steps.iter().map(|st| ((lambda - I * st.s).norm().min((lambda + I * st.s).norm()), st.s.abs())).find(|(d, s)| *d < 1e-3 * s);
    if near.is_none() {
        return dress_value(&frame(lambda), lambda, steps);
    }
    let gap =
        steps.iter().flat_map(|st| [I * st.s, -I * st.s]).map(|p| (p - lambda).norm()).filter(|d| *d > 1e-3).fold(f64::INFINITY, f64::min);
    let smallest = steps.iter().map(|st| st.s.abs()).fold(f64::INFINITY, f64::min);
    let radius = (0.5 * gap).min(0.25 * smallest);
    let mut failed = None;
    let mean = cauchy_mean(
        |z| match dress_value(&frame(z), z, steps) {
            Ok(m) => m,
            Err(e) => {
                failed.get_or_insert(e.to_string());
                CMatrix::zeros(steps[0].left.nrows(), steps[0].left.nrows())
            }
        },
        lambda,
        radius,
        64,
    );
    match failed {
        None => Ok(mean),
        Some(_) => Err(BacklundError::PoleHit { lambda }),
    }
}

fn dress_value(e: &CMatrix, lambda: Complex64, steps: &[DressingStep]) -> Result<CMatrix> {
    let mut m = e.clone();
    for st in steps {
        m = simple_element_with(st.s, &st.left, lambda)? * m * simple_element_with(-st.s, &st.right, lambda)?;
    }
    Ok(m)
}

/// Result of dressing a base solution by a sequence of simple elements.
#[derive(Debug, Clone)]
pub struct Dressing {
    pub specs: Vec<ProjectorSpec>,
    /// Constant left projectors, one per step.
    pub left: Vec<CMatrix>,
    /// `tilde[m][x]`: the dressed vector of step `m` at sample `x`.
    pub tilde: Vec<Vec<TildeVector>>,
    /// The new curvature.
    pub k: CurvatureField,
    /// Largest departure of a dressed vector from the `(y0, i y)` form.
    pub reality_defect: f64,
    /// Largest [`TildeVector::identity_defect`].
    pub identity_defect: f64,
}

impl Dressing {
    /// The factors at sample `index`.
    pub fn steps_at(&self, index: usize) -> Vec<DressingStep> {
        self.specs
            .iter()
            .zip(&self.left)
            .zip(&self.tilde)
            .map(|((spec, left), tilde)| DressingStep { s: spec.s, left: left.clone(), right: projector_of(&tilde[index].to_complex()) })
            .collect()
    }

    /// The dressed frame at sample `index`, given the base frame there as a
    /// function of `lambda`.
    pub fn frame_at<F>(&self, index: usize, frame: F, lambda: Complex64) -> Result<CMatrix>
    where
        F: Fn(Complex64) -> CMatrix,
    {
        dressed_frame(frame, lambda, &self.steps_at(index))
    }
}

/// Curve and frame of a vacuum dressing, without quadrature.
#[derive(Debug, Clone)]
pub struct SolitonCurve {
    pub points: Vec<Vec<f64>>,
    pub frames: Vec<RMatrix>,
}

impl Dressing {
    /// Applies the Sym formula to the dressed vacuum frame of flow `j`:
    /// `gamma` is read from column 0 of `E_lambda E^T` at `lambda = 0`, with
    /// `E_lambda` from a Cauchy mean on a circle of radius `min |s_m| / 2`.
    /// The frame is the lower-right block of `E(0)`.
    pub fn vacuum_curve(&self, j: usize) -> Result<SolitonCurve> {
        let dim = self.k.dimension();
        let radius = 0.5 * self.specs.iter().map(|sp| sp.s.abs()).fold(f64::INFINITY, f64::min);
        let t = self.k.t;
        let mut points = Vec::with_capacity(self.k.len());
        let mut frames = Vec::with_capacity(self.k.len());
        for idx in 0..self.k.len() {
            let x = self.k.grid.x(idx);
            let steps = self.steps_at(idx);
            let at = |z: Complex64| dress_value(&vacuum_frame(dim, j, x, t, z), z, &steps);
            let e0 = at(c(0.0))?;
            let mut failed = None;
            let el = cauchy_mean(
                |z| match at(z) {
                    Ok(m) => m / z,
                    Err(e) => {
                        failed.get_or_insert(e);
                        CMatrix::zeros(dim + 1, dim + 1)
                    }
                },
                c(0.0),
                radius,
                64,
            );
            if let Some(e) = failed {
                return Err(e);
            }
            let zeta = el * e0.transpose();
            points.push((1..=dim).map(|r| zeta[(r, 0)].re).collect());
            frames.push(crate::lax::frame_block(&e0));
        }
        Ok(SolitonCurve { points, frames })
    }
}

fn check_distinct(specs: &[ProjectorSpec]) -> Result<()> {
    for (a, sa) in specs.iter().enumerate() {
        for sb in &specs[a + 1..] {
            if (sa.s * sa.s - sb.s * sb.s).abs() <= 1e-12 * (sa.s * sa.s).max(sb.s * sb.s) {
                return Err(BacklundError::EqualSpectralSquares { s1: sa.s, s2: sb.s });
            }
        }
    }
    Ok(())
}

fn check_slice(slice: &ComplexFrameSlice, spec: &ProjectorSpec, base: &CurvatureField) -> Result<()> {
    let expected = -I * spec.s;
    if (slice.lambda0 - expected).norm() > 1e-12 * spec.s.abs().max(1.0) {
        return Err(BacklundError::SpectralMismatch { expected, found: slice.lambda0 });
    }
    if slice.dimension() != spec.dimension() {
        return Err(BacklundError::DimensionMismatch { expected: spec.dimension(), found: slice.dimension() });
    }
    if base.dimension() != spec.dimension() {
        return Err(BacklundError::DimensionMismatch { expected: spec.dimension(), found: base.dimension() });
    }
    if slice.samples.len() != base.len() {
        return Err(BacklundError::DimensionMismatch { expected: base.len(), found: slice.samples.len() });
    }
    Ok(())
}

/// Dresses `base` by the simple elements of `specs` in order. `slices[m]`
/// is the base frame at `lambda = -i s_m`, normalized to `I` at the base
/// point. The `m`-th dressed vector is
/// `phi_{m-1}(-is_m) ... phi_1(-is_m) E(-is_m)^T v_m`, where `phi_i` uses
/// the projection onto the `i`-th dressed vector.
pub fn dress(base: &CurvatureField, slices: &[&ComplexFrameSlice], specs: &[ProjectorSpec]) -> Result<Dressing> {
    if slices.len() != specs.len() {
        return Err(BacklundError::DimensionMismatch { expected: specs.len(), found: slices.len() });
    }
    for (spec, slice) in specs.iter().zip(slices) {
        spec.validate()?;
        check_slice(slice, spec, base)?;
    }
    check_distinct(specs)?;

    // Constant projectors: the same recursion with E = I.
    let mut left: Vec<CMatrix> = Vec::with_capacity(specs.len());
    for (m, spec) in specs.iter().enumerate() {
        let mut w = DVector::from_vec(spec.vector());
        for (prev, pi) in specs[..m].iter().zip(&left) {
            w = simple_element_with(prev.s, pi, -I * spec.s)? * w;
        }
        left.push(projector_of(w.as_slice()));
    }

    let mut k = base.clone();
    let mut tilde: Vec<Vec<TildeVector>> = vec![Vec::with_capacity(base.len()); specs.len()];
    let (mut reality, mut identity) = (0.0f64, 0.0f64);
    for x in 0..base.len() {
        let mut rights: Vec<CMatrix> = Vec::with_capacity(specs.len());
        for (m, (spec, slice)) in specs.iter().zip(slices).enumerate() {
            let mut w = slice.samples[x].transpose() * DVector::from_vec(spec.vector());
            for (prev, pi) in specs[..m].iter().zip(&rights) {
                w = simple_element_with(prev.s, pi, -I * spec.s)? * w;
            }
            let (tv, off) = TildeVector::from_vector(w.as_slice(), x)?;
            reality = reality.max(off);
            identity = identity.max(tv.identity_defect());
            for (comp, dk) in tv.curvature_shift(spec.s).into_iter().enumerate() {
                k.components[comp][x] += dk;
            }
            rights.push(projector_of(&tv.to_complex()));
            tilde[m].push(tv);
        }
    }
    Ok(Dressing { specs: specs.to_vec(), left, tilde, k, reality_defect: reality, identity_defect: identity })
}

/// New curvature from one simple element.
#[derive(Debug, Clone)]
pub struct BtCurvature {
    pub k: CurvatureField,
    pub tilde: Vec<TildeVector>,
    pub reality_defect: f64,
    pub identity_defect: f64,
}

/// `tilde k = k + (2s / y0) (y_2, ..., y_n)` with
/// `tilde v = E(-is)^T v` per sample.
pub fn bt_curvature(slice: &ComplexFrameSlice, k: &CurvatureField, spec: &ProjectorSpec) -> Result<BtCurvature> {
    let mut d = dress(k, &[slice], std::slice::from_ref(spec))?;
    Ok(BtCurvature {
        k: d.k,
        tilde: d.tilde.pop().expect("one step"),
        reality_defect: d.reality_defect,
        identity_defect: d.identity_defect,
    })
}

/// A transformed curve with its frame and curvature.
#[derive(Debug, Clone)]
pub struct BtCurve {
    pub curve: GridCurve,
    pub frame: FrameField,
    pub bt: BtCurvature,
}

/// Transforms one slice of a curve with frame `g` (columns `e_1..e_n`):
///
/// `tilde gamma = -(I - 2cc^T)(gamma - 2/(s y0) sum y_i e_i)`,
/// `tilde g = (I - 2cc^T) g (I - 2 tilde c tilde c^T)`, `tilde c = y / y0`.
///
/// `slice` is the frame at `lambda = -is` seeded at `diag(1, g(x_0, t_0))`.
pub fn bt_curve(
    curve: &GridCurve,
    frame: &FrameField,
    slice: &ComplexFrameSlice,
    k: &CurvatureField,
    spec: &ProjectorSpec,
    tol: &Tolerances,
) -> Result<BtCurve> {
    let bt = bt_curvature(slice, k, spec)?;
    let dim = spec.dimension();
    if curve.dimension() != dim || frame.dimension() != dim {
        return Err(BacklundError::DimensionMismatch { expected: dim, found: curve.dimension() });
    }
    let r = spec.reflection();
    let mut points = Vec::with_capacity(curve.len());
    let mut frames = Vec::with_capacity(curve.len());
    for (x, tv) in bt.tilde.iter().enumerate() {
        let g = &frame.frames[x];
        let p = DVector::from_column_slice(&curve.points()[x]);
        let y = DVector::from_column_slice(&tv.y);
        let shifted = p - g * y * (2.0 / (spec.s * tv.y0));
        points.push((-(&r * shifted)).iter().copied().collect::<Vec<f64>>());
        frames.push(&r * g * reflection(&tv.direction()));
    }
    let new_curve = GridCurve::new(points, curve.spacing(), curve.origin(), curve.topology(), tol)?;
    let curvatures = (0..bt.k.len()).map(|x| bt.k.at(x)).collect();
    let new_frame = FrameField::from_parts(frames, curvatures, frame.grid());
    Ok(BtCurve { curve: new_curve, frame: new_frame, bt })
}

/// [`bt_curve`] on every slice of a trail; `slices[m]` is the frame at
/// `lambda = -is` for time `trail.times[m]`.
pub fn bt_curve_trail(trail: &CurveTrail, slices: &[ComplexFrameSlice], spec: &ProjectorSpec, tol: &Tolerances) -> Result<Vec<BtCurve>> {
    if slices.len() != trail.curves.len() {
        return Err(BacklundError::DimensionMismatch { expected: trail.curves.len(), found: slices.len() });
    }
    (0..slices.len()).map(|m| bt_curve(&trail.curves[m], &trail.frames[m], &slices[m], &trail.curvatures[m], spec, tol)).collect()
}

/// Two transformations applied in both orders.
#[derive(Debug, Clone)]
pub struct Permutation {
    /// Projection fields `tilde tau_1` (second step of order 2, 1) and
    /// `tilde tau_2` (second step of order 1, 2).
    pub tau1: Vec<CMatrix>,
    pub tau2: Vec<CMatrix>,
    /// Dressing in the order 1, 2; its curvature is `u_12`.
    pub d12: Dressing,
    pub d21: Dressing,
    /// `max |k_12 - k_21|`.
    pub mismatch: f64,
}

impl Permutation {
    pub fn k12(&self) -> &CurvatureField {
        &self.d12.k
    }
}

/// Tolerance on `|k_12 - k_21|`, relative to `max(1, |k|)`.
pub const PERMUTABILITY_TOL: f64 = 1e-8;

/// Applies `spec1` then `spec2` and the reverse, returning both and failing
/// with [`BacklundError::NotPermutable`] if they disagree.
pub fn permute(
    spec1: &ProjectorSpec,
    spec2: &ProjectorSpec,
    base: &CurvatureField,
    slice1: &ComplexFrameSlice,
    slice2: &ComplexFrameSlice,
) -> Result<Permutation> {
    let d12 = dress(base, &[slice1, slice2], &[spec1.clone(), spec2.clone()])?;
    let d21 = dress(base, &[slice2, slice1], &[spec2.clone(), spec1.clone()])?;
    let mut mismatch: f64 = 0.0;
    for (a, b) in d12.k.components.iter().zip(&d21.k.components) {
        for (p, q) in a.iter().zip(b) {
            mismatch = mismatch.max((p - q).abs());
        }
    }
    if mismatch > PERMUTABILITY_TOL * d12.k.max_abs().max(1.0) {
        return Err(BacklundError::NotPermutable(mismatch));
    }
    let tau = |d: &Dressing| d.tilde[1].iter().map(|tv| projector_of(&tv.to_complex())).collect::<Vec<_>>();
    Ok(Permutation { tau1: tau(&d21), tau2: tau(&d12), d12, d21, mismatch })
}

/// Multi-soliton on the vacuum: exact, no integration.
pub fn vacuum_multi_soliton(grid: Grid, j: usize, t: f64, specs: &[ProjectorSpec]) -> Result<Dressing> {
    let dim = specs.first().map_or(2, ProjectorSpec::dimension);
    let slices: Vec<ComplexFrameSlice> = specs.iter().map(|sp| vacuum_slice(grid, dim, j, t, -I * sp.s)).collect();
    let refs: Vec<&ComplexFrameSlice> = slices.iter().collect();
    dress(&CurvatureField::zeros(grid, dim, t), &refs, specs)
}

/// `max |pi conj(pi)|, |conj(pi) pi|, |I_{1,n} pi I_{1,n} - conj(pi)|`.
pub fn projector_condition_residual(pi: &CMatrix) -> f64 {
    let conj = pi.map(|z| z.conj());
    let j = i_one_n(pi.nrows() - 1);
    let worst = |m: CMatrix| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    worst(pi * &conj).max(worst(&conj * pi)).max(worst(&j * pi * &j - &conj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::orthogonality_residual;

    fn spec2(s: f64, c1: f64) -> ProjectorSpec {
        ProjectorSpec::new(s, vec![0.0, c1]).unwrap()
    }

    #[test]
    fn projector_example() {
        let pi = projector(&spec2(1.0, 1.0));
        let expected = [[c(0.5), c(0.0), -I * 0.5], [c(0.0), c(0.0), c(0.0)], [I * 0.5, c(0.0), c(0.5)]];
        for r in 0..3 {
            for col in 0..3 {
                assert!((pi[(r, col)] - expected[r][col]).norm() < 1e-15);
            }
        }
        assert!(projector_condition_residual(&pi) < 1e-12);
    }

    #[test]
    fn simple_element_properties() {
        let spec = ProjectorSpec::normalized(0.7, vec![0.3, -0.5, 0.8]).unwrap();
        let pi = projector(&spec);
        let lambda = Complex64::new(0.4, -0.9);
        let phi = simple_element(&spec, lambda).unwrap().matrix;
        let inv = simple_element_with(-spec.s, &pi, lambda).unwrap();
        assert!((&phi * inv - CMatrix::identity(4, 4)).iter().all(|z| z.norm() < 1e-12));
        assert!(orthogonality_residual(&phi) < 1e-12);
        assert!((phi.determinant() - c(1.0)).norm() < 1e-12);

        let far = simple_element(&spec, c(1e8)).unwrap().matrix;
        assert!((far - CMatrix::identity(4, 4)).iter().all(|z| z.norm() < 1e-7));

        let zero = simple_element(&spec, c(0.0)).unwrap().matrix;
        let r = spec.reflection();
        assert!((zero[(0, 0)] + c(1.0)).norm() < 1e-14);
        for a in 0..3 {
            assert!(zero[(0, a + 1)].norm() < 1e-14 && zero[(a + 1, 0)].norm() < 1e-14);
            for b in 0..3 {
                assert!((zero[(a + 1, b + 1)] - c(r[(a, b)])).norm() < 1e-14);
            }
        }
        assert!(matches!(simple_element(&spec, I * 0.7), Err(BacklundError::PoleHit { .. })));
    }

    #[test]
    fn spec_validation() {
        assert!(ProjectorSpec::new(0.0, vec![0.0, 1.0]).is_err());
        assert!(ProjectorSpec::new(1.0, vec![0.0, 1.1]).is_err());
    }

    #[test]
    fn vacuum_frame_at_imaginary_lambda() {
        let (s, x, t) = (1.3, 0.4, 0.2);
        let e = vacuum_frame(2, 2, x, t, -I * s);
        let d = s * x - s * s * s * t;
        let inv = e.transpose();
        assert!((inv[(0, 0)] - c(d.cosh())).norm() < 1e-14);
        assert!((inv[(0, 1)] + I * d.sinh()).norm() < 1e-14);
        assert!((inv[(1, 0)] - I * d.sinh()).norm() < 1e-14);
        assert!((vacuum_frame(3, 2, 0.0, 0.0, Complex64::new(0.3, 2.0)) - CMatrix::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn equal_squares_rejected() {
        let grid = Grid::line(8, -1.0, 0.25);
        let err = vacuum_multi_soliton(grid, 2, 0.0, &[spec2(1.0, 1.0), spec2(-1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, BacklundError::EqualSpectralSquares { .. }));
    }

    #[test]
    fn cauchy_mean_recovers_polynomial() {
        let m = cauchy_mean(|z| CMatrix::from_element(1, 1, z * z * z + z), Complex64::new(0.2, 0.1), 0.3, 16);
        let z = Complex64::new(0.2, 0.1);
        assert!((m[(0, 0)] - (z * z * z + z)).norm() < 1e-14);
    }
}
