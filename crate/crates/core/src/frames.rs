//! Parallel (rotation-minimizing) normal frames along sampled curves.
//!
//! A [`GridCurve`] holds arc-length samples of a curve in `R^n`. From it
//! [`build_parallel_frame`] produces a [`FrameField`]: one rotation matrix
//! `g = (e_1, ..., e_n)` per sample with `e_1` the unit tangent and the
//! normals transported by the double-reflection rule, plus the principal
//! curvatures `k_i = <(e_1)_x, e_{i+1}>`.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{CurvatureField, Grid, Topology};
use crate::numerics::stencil;
use crate::numerics::RMatrix;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("need at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("ambient dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("sample {index} has {found} coordinates, expected {expected}")]
    RaggedPoints { index: usize, expected: usize, found: usize },
    #[error("chord {index} has length {chord}, not arc-length spacing {expected}")]
    NotArcLength { index: usize, chord: f64, expected: f64 },
    #[error("curve does not close up: closing chord {chord}, spacing {spacing}")]
    NotPeriodic { chord: f64, spacing: f64 },
    #[error("degenerate tangent at sample {index}")]
    DegenerateTangent { index: usize },
    #[error("seed normal frame rejected: {0}")]
    BadSeed(String),
    #[error("gauge matrix is not a rotation (residual {0:e})")]
    NotRotation(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed curve file: {0}")]
    Format(String),
}

pub type Result<T, E = FrameError> = std::result::Result<T, E>;

/// Numerical tolerances for curve and frame validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub tol_orth: f64,
    pub tol_arc: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol_orth: 1e-8, tol_arc: 1e-6 }
    }
}

/// Arc-length samples `points[j] = gamma(origin + j h)` of a curve in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCurve {
    points: Vec<Vec<f64>>,
    spacing: f64,
    origin: f64,
    topology: Topology,
}

/// Chord of a circular arc of length `h` with turning angle `theta` over it.
fn arc_chord(h: f64, theta: f64) -> f64 {
    if theta.abs() < 1e-8 {
        h * (1.0 - theta * theta / 24.0)
    } else {
        2.0 * h * (theta / 2.0).sin() / theta
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos()
}

impl GridCurve {
    /// Validates the samples: at least 8 of them, consistent dimension, and
    /// chords matching arc length `h` within `tol.tol_arc`. Chords are
    /// compared with the chord of a circular arc bending through the local
    /// turning angle, so curved samples are not penalized at `O(h^3)`.
    pub fn new(points: Vec<Vec<f64>>, spacing: f64, origin: f64, topology: Topology, tol: &Tolerances) -> Result<GridCurve> {
        let len = points.len();
        if len < 8 {
            return Err(FrameError::TooFewSamples(len));
        }
        let dim = points[0].len();
        if dim < 2 {
            return Err(FrameError::InvalidDimension(dim));
        }
        if let Some((index, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(FrameError::RaggedPoints { index, expected: dim, found: p.len() });
        }
        let curve = GridCurve { points, spacing, origin, topology };
        let chords = curve.chords();
        for (index, c) in chords.iter().enumerate() {
            if norm(c) <= 1e-12 * spacing.max(1.0) {
                return Err(FrameError::DegenerateTangent { index });
            }
        }
        let periodic = topology == Topology::Periodic;
        if periodic {
            let closing = norm(&chords[len - 1]);
            if (closing - spacing).abs() > 0.5 * spacing {
                return Err(FrameError::NotPeriodic { chord: closing, spacing });
            }
        }
        let count = chords.len();
        for index in 0..count {
            let turn = |a: usize, b: usize| angle_between(&chords[a], &chords[b]);
            let prev = if index > 0 {
                Some(turn(index - 1, index))
            } else if periodic {
                Some(turn(count - 1, 0))
            } else {
                None
            };
            let next = if index + 1 < count {
                Some(turn(index, index + 1))
            } else if periodic {
                Some(turn(count - 1, 0))
            } else {
                None
            };
            let theta = match (prev, next) {
                (Some(a), Some(b)) => 0.5 * (a + b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => 0.0,
            };
            let chord = norm(&chords[index]);
            let expected = arc_chord(spacing, theta);
            if (chord - expected).abs() > tol.tol_arc {
                if periodic && index == count - 1 {
                    return Err(FrameError::NotPeriodic { chord, spacing });
                }
                return Err(FrameError::NotArcLength { index, chord, expected });
            }
        }
        Ok(curve)
    }

    /// Samples `f` on `grid`, then validates.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(grid: Grid, f: F, tol: &Tolerances) -> Result<GridCurve> {
        GridCurve::new(grid.xs().into_iter().map(f).collect(), grid.spacing, grid.origin, grid.topology, tol)
    }

    /// Chord vectors `p_{j+1} - p_j`, including the closing chord when periodic.
    fn chords(&self) -> Vec<Vec<f64>> {
        let len = self.points.len();
        let count = if self.is_periodic() { len } else { len - 1 };
        (0..count).map(|j| sub(&self.points[(j + 1) % len], &self.points[j])).collect()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_periodic(&self) -> bool {
        self.topology == Topology::Periodic
    }

    pub fn grid(&self) -> Grid {
        Grid { len: self.len(), spacing: self.spacing, origin: self.origin, topology: self.topology }
    }

    /// Coordinate `c` of every sample.
    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[c]).collect()
    }

    /// Eighth-order finite-difference velocity `gamma_x` at every sample.
    pub fn velocity(&self) -> Vec<Vec<f64>> {
        let dim = self.dimension();
        let derivs: Vec<Vec<f64>> =
            (0..dim).map(|c| stencil::derivative(&self.coordinate(c), self.spacing, 1, 8, self.is_periodic())).collect();
        (0..self.len()).map(|j| derivs.iter().map(|d| d[j]).collect()).collect()
    }

    /// `max_j | ||gamma_x(x_j)|| - 1 |`, the arc-length defect.
    pub fn arc_length_defect(&self) -> f64 {
        self.velocity().iter().map(|v| (norm(v) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Unit tangents from the finite-difference velocity.
    pub fn unit_tangents(&self) -> Result<Vec<Vec<f64>>> {
        self.velocity()
            .into_iter()
            .enumerate()
            .map(|(index, v)| {
                let m = norm(&v);
                if m < 1e-10 {
                    Err(FrameError::DegenerateTangent { index })
                } else {
                    Ok(v.iter().map(|c| c / m).collect())
                }
            })
            .collect()
    }
}

/// Rotation matrices along a curve together with the principal curvatures.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    /// `frames[j]` has columns `e_1, ..., e_n` at sample `j`.
    pub frames: Vec<RMatrix>,
    /// `curvatures[j]` is `k(x_j)`, length `n - 1`.
    pub curvatures: Vec<Vec<f64>>,
    pub spacing: f64,
    pub origin: f64,
    pub topology: Topology,
    /// Frame obtained by transporting the last frame across the closing
    /// chord back to sample 0 (periodic curves only).
    closing: Option<RMatrix>,
}

impl FrameField {
    /// Wraps frames and curvatures computed elsewhere (e.g. by integrating
    /// the frame equations). No closing transport is recorded, so
    /// [`holonomy`] is unavailable on the result.
    pub fn from_parts(frames: Vec<RMatrix>, curvatures: Vec<Vec<f64>>, grid: Grid) -> FrameField {
        FrameField { frames, curvatures, spacing: grid.spacing, origin: grid.origin, topology: grid.topology, closing: None }
    }

    pub fn dimension(&self) -> usize {
        self.frames[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid { len: self.len(), spacing: self.spacing, origin: self.origin, topology: self.topology }
    }

    /// The curvature samples as a [`CurvatureField`] at time `t`.
    pub fn curvature_field(&self, t: f64) -> CurvatureField {
        let components = (0..self.dimension() - 1).map(|i| self.curvatures.iter().map(|k| k[i]).collect()).collect();
        CurvatureField::new(self.grid(), components, t)
    }

    /// `max_j max |g_j^T g_j - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        self.frames.iter().map(crate::numerics::linalg::real_orthogonality_residual).fold(0.0, f64::max)
    }

    /// `max_j max_{a != b} |<e_a(j+1) - e_a(j), e_b(j)>|` over normal pairs;
    /// a discretely parallel frame has this `O(h^2)`.
    pub fn parallelism_residual(&self) -> f64 {
        let n = self.dimension();
        let mut worst: f64 = 0.0;
        for w in self.frames.windows(2) {
            for a in 1..n {
                for b in 1..n {
                    if a != b {
                        let delta = w[1].column(a) - w[0].column(a);
                        worst = worst.max(delta.dot(&w[0].column(b)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Recovers curvatures from the stored frames: centered differences of
    /// `e_1` projected on the normals.
    pub fn recompute_curvatures(&self) -> Vec<Vec<f64>> {
        let tangents: Vec<Vec<f64>> = self.frames.iter().map(|g| g.column(0).iter().copied().collect()).collect();
        curvatures_from(&tangents, &self.frames, self.spacing, self.topology == Topology::Periodic)
    }
}

fn curvatures_from(tangents: &[Vec<f64>], frames: &[RMatrix], spacing: f64, periodic: bool) -> Vec<Vec<f64>> {
    let n = frames[0].nrows();
    let derivs: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let comp: Vec<f64> = tangents.iter().map(|t| t[c]).collect();
            stencil::derivative(&comp, spacing, 1, 4, periodic)
        })
        .collect();
    frames
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let de1 = DVector::from_iterator(n, derivs.iter().map(|d| d[j]));
            (1..n).map(|i| de1.dot(&g.column(i))).collect()
        })
        .collect()
}

/// Reflects `v` across the hyperplane orthogonal to `axis` (`c = |axis|^2`).
fn reflect(v: &DVector<f64>, axis: &DVector<f64>, c: f64) -> DVector<f64> {
    v - axis * (2.0 / c * axis.dot(v))
}

/// One double-reflection step carrying `frame` (tangent first) from a point
/// to the next, given the chord between them and the new tangent.
fn transport(frame: &RMatrix, chord: &DVector<f64>, next_tangent: &DVector<f64>) -> RMatrix {
    let n = frame.nrows();
    let c1 = chord.dot(chord);
    let t_l = reflect(&frame.column(0).into_owned(), chord, c1);
    let v2 = next_tangent - &t_l;
    let c2 = v2.dot(&v2);
    let mut out = RMatrix::zeros(n, n);
    out.set_column(0, next_tangent);
    for i in 1..n {
        let r_l = reflect(&frame.column(i).into_owned(), chord, c1);
        let r = if c2 > 1e-300 { reflect(&r_l, &v2, c2) } else { r_l };
        out.set_column(i, &r);
    }
    out
}

/// Completes `tangent` to a positively oriented orthonormal frame by
/// Gram–Schmidt against the standard basis, lowest index first.
fn default_initial_frame(tangent: &DVector<f64>) -> RMatrix {
    let n = tangent.len();
    let mut columns: Vec<DVector<f64>> = vec![tangent.clone()];
    for b in 0..n {
        if columns.len() == n {
            break;
        }
        let mut v = DVector::from_fn(n, |i, _| if i == b { 1.0 } else { 0.0 });
        for c in &columns {
            v -= c * c.dot(&v);
        }
        let m = v.norm();
        if m > 1e-6 {
            columns.push(v / m);
        }
    }
    let mut g = RMatrix::from_columns(&columns);
    if g.determinant() < 0.0 {
        let last = -g.column(n - 1);
        g.set_column(n - 1, &last);
    }
    g
}

/// Builds the parallel frame of `curve`.
///
/// `seed_normals`, when given, are the normals `e_2, ..., e_n` at sample 0;
/// they must be orthonormal, orthogonal to the tangent, and positively
/// oriented together with it.
pub fn build_parallel_frame(curve: &GridCurve, seed_normals: Option<&[Vec<f64>]>, tol: &Tolerances) -> Result<FrameField> {
    let n = curve.dimension();
    let tangents = curve.unit_tangents()?;
    let t0 = DVector::from_column_slice(&tangents[0]);
    let g0 = match seed_normals {
        None => default_initial_frame(&t0),
        Some(normals) => {
            if normals.len() != n - 1 || normals.iter().any(|v| v.len() != n) {
                return Err(FrameError::BadSeed(format!("expected {} normals of length {n}", n - 1)));
            }
            let mut cols = vec![t0.clone()];
            cols.extend(normals.iter().map(|v| DVector::from_column_slice(v)));
            let g = RMatrix::from_columns(&cols);
            let residual = crate::numerics::linalg::real_orthogonality_residual(&g);
            if residual > tol.tol_orth.max(1e-6) {
                return Err(FrameError::BadSeed(format!("frame with tangent not orthonormal (residual {residual:e})")));
            }
            if g.determinant() < 0.0 {
                return Err(FrameError::BadSeed("orientation is negative".into()));
            }
            g
        }
    };
    let points = curve.points();
    let len = curve.len();
    let mut frames = Vec::with_capacity(len);
    frames.push(g0);
    for j in 0..len - 1 {
        let chord = DVector::from_column_slice(&sub(&points[j + 1], &points[j]));
        let next = DVector::from_column_slice(&tangents[j + 1]);
        let g = transport(&frames[j], &chord, &next);
        frames.push(g);
    }
    let closing = curve.is_periodic().then(|| {
        let chord = DVector::from_column_slice(&sub(&points[0], &points[len - 1]));
        transport(&frames[len - 1], &chord, &t0)
    });
    let curvatures = curvatures_from(&tangents, &frames, curve.spacing(), curve.is_periodic());
    Ok(FrameField { frames, curvatures, spacing: curve.spacing(), origin: curve.origin(), topology: curve.topology(), closing })
}

/// Normal holonomy: `h` with (transported normals after one loop) = (initial normals) `h`.
pub fn holonomy(frame: &FrameField) -> Result<RMatrix> {
    let closing = frame.closing.as_ref().ok_or(FrameError::NotPeriodic { chord: f64::NAN, spacing: frame.spacing })?;
    let n = frame.dimension();
    let start = frame.frames[0].columns(1, n - 1);
    let end = closing.columns(1, n - 1);
    Ok(start.transpose() * end)
}

/// Right-multiplies every frame by `diag(1, c)` and maps `k -> c^{-1} k`.
pub fn gauge_rotate(frame: &FrameField, c: &RMatrix, tol: &Tolerances) -> Result<FrameField> {
    let m = frame.dimension() - 1;
    if c.nrows() != m || c.ncols() != m {
        return Err(FrameError::NotRotation(f64::INFINITY));
    }
    let residual = crate::numerics::linalg::real_orthogonality_residual(c);
    if residual > tol.tol_orth || c.determinant() < 0.0 {
        return Err(FrameError::NotRotation(residual));
    }
    let mut block = RMatrix::identity(m + 1, m + 1);
    block.view_mut((1, 1), (m, m)).copy_from(c);
    let ct = c.transpose();
    Ok(FrameField {
        frames: frame.frames.iter().map(|g| g * &block).collect(),
        curvatures: frame.curvatures.iter().map(|k| (&ct * DVector::from_column_slice(k)).iter().copied().collect()).collect(),
        spacing: frame.spacing,
        origin: frame.origin,
        topology: frame.topology,
        closing: frame.closing.as_ref().map(|g| g * &block),
    })
}

/// Writes `x, p1..pn`, then (if a frame is given) `g{r}_{c}` in
/// column-major order, then `k1..k{n-1}`.
pub fn write_curve_csv<P: AsRef<Path>>(path: P, curve: &GridCurve, frame: Option<&FrameField>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = curve.dimension();
    let mut header = vec!["x".to_string()];
    header.extend((1..=n).map(|i| format!("p{i}")));
    if frame.is_some() {
        for c in 1..=n {
            header.extend((1..=n).map(|r| format!("g{r}_{c}")));
        }
        header.extend((1..n).map(|i| format!("k{i}")));
    }
    w.write_record(&header)?;
    for j in 0..curve.len() {
        let mut row = vec![curve.origin() + j as f64 * curve.spacing()];
        row.extend(&curve.points()[j]);
        if let Some(f) = frame {
            row.extend(f.frames[j].iter());
            row.extend(&f.curvatures[j]);
        }
        w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve written by [`write_curve_csv`] (frame and curvature
/// columns are ignored) and validates it.
pub fn read_curve_csv<P: AsRef<Path>>(path: P, topology: Topology, tol: &Tolerances) -> Result<GridCurve> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let dim = header.iter().filter(|h| h.starts_with('p')).count();
    if header.get(0) != Some("x") || dim < 2 {
        return Err(FrameError::Format("expected columns x, p1, p2, ...".into()));
    }
    let mut xs = Vec::new();
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .take(1 + dim)
            .map(|v| v.trim().parse::<f64>().map_err(|e| FrameError::Format(format!("{v}: {e}"))))
            .collect::<Result<_>>()?;
        xs.push(vals[0]);
        points.push(vals[1..].to_vec());
    }
    if xs.len() < 2 {
        return Err(FrameError::TooFewSamples(xs.len()));
    }
    let spacing = xs[1] - xs[0];
    GridCurve::new(points, spacing, xs[0], topology, tol)
}

/// Largest pointwise distance between `b` and the proper rigid motion of
/// `a` that best matches it in least squares (Kabsch).
pub fn rigid_fit_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a.first().map_or(0, Vec::len);
    if a.is_empty() || a.len() != b.len() {
        return f64::INFINITY;
    }
    let count = a.len() as f64;
    let mean = |pts: &[Vec<f64>]| (0..n).map(|c| pts.iter().map(|p| p[c]).sum::<f64>() / count).collect::<Vec<f64>>();
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = RMatrix::zeros(n, n);
    for (p, q) in a.iter().zip(b) {
        for r in 0..n {
            for c in 0..n {
                cov[(r, c)] += (q[r] - mb[r]) * (p[c] - ma[c]);
            }
        }
    }
    let svd = cov.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut d = RMatrix::identity(n, n);
    if (&u * &vt).determinant() < 0.0 {
        d[(n - 1, n - 1)] = -1.0;
    }
    let rot = u * d * vt;
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let centered = DVector::from_iterator(n, p.iter().zip(&ma).map(|(x, m)| x - m));
            let moved = &rot * centered;
            (0..n).map(|c| (moved[c] + mb[c] - q[c]).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(r: f64, len: usize, dim: usize) -> GridCurve {
        let grid = Grid::periodic(len, 0.0, 2.0 * PI * r);
        GridCurve::from_fn(
            grid,
            |x| {
                let mut p = vec![0.0; dim];
                p[0] = r * (x / r).cos();
                p[1] = r * (x / r).sin();
                p
            },
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn straight_line_has_identity_frames() {
        let grid = Grid::line(32, 0.0, 0.1);
        let curve = GridCurve::from_fn(grid, |x| vec![x, 0.0, 0.0], &Tolerances::default()).unwrap();
        let f = build_parallel_frame(&curve, None, &Tolerances::default()).unwrap();
        for g in &f.frames {
            assert!((g - RMatrix::identity(3, 3)).abs().max() < 1e-14);
        }
        assert!(f.curvatures.iter().flatten().all(|k| k.abs() < 1e-12));
    }

    #[test]
    fn plane_circle_curvature() {
        let f = build_parallel_frame(&circle(2.0, 512, 2), None, &Tolerances::default()).unwrap();
        for k in &f.curvatures {
            assert!((k[0] - 0.5).abs() < 1e-6, "{}", k[0]);
        }
    }

    #[test]
    fn seeded_circle_in_space_is_parallel() {
        let curve = circle(1.0, 512, 3);
        let seed = vec![vec![-1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        let tol = Tolerances::default();
        let f = build_parallel_frame(&curve, Some(&seed), &tol).unwrap();
        let h = curve.spacing();
        for k in &f.curvatures {
            assert!((k[0] - 1.0).abs() < 1e-6 && k[1].abs() < 1e-10);
        }
        assert!(f.parallelism_residual() < h * h);
        assert!(f.orthogonality_residual() < tol.tol_orth);
        let hol = holonomy(&f).unwrap();
        assert!((hol - RMatrix::identity(2, 2)).abs().max() < 1e-8);
    }

    #[test]
    fn bad_seeds_are_rejected() {
        let curve = circle(1.0, 64, 3);
        let tol = Tolerances::default();
        let not_normal = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(matches!(build_parallel_frame(&curve, Some(&not_normal), &tol), Err(FrameError::BadSeed(_))));
        let flipped = vec![vec![0.0, 0.0, 1.0], vec![-1.0, 0.0, 0.0]];
        assert!(matches!(build_parallel_frame(&curve, Some(&flipped), &tol), Err(FrameError::BadSeed(_))));
    }

    #[test]
    fn open_segment_declared_periodic_is_rejected() {
        let grid = Grid::periodic(32, 0.0, 3.2);
        let r = GridCurve::from_fn(grid, |x| vec![x, 0.0], &Tolerances::default());
        assert!(matches!(r, Err(FrameError::NotPeriodic { .. })));
    }

    #[test]
    fn coincident_samples_are_degenerate() {
        let mut pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1, 0.0]).collect();
        pts[5] = pts[4].clone();
        let r = GridCurve::new(pts, 0.1, 0.0, Topology::Line, &Tolerances::default());
        assert!(matches!(r, Err(FrameError::DegenerateTangent { index: 4 })));
    }

    #[test]
    fn gauge_rotation_round_trip() {
        let curve = circle(1.0, 256, 3);
        let tol = Tolerances::default();
        let f = build_parallel_frame(&curve, None, &tol).unwrap();
        let th: f64 = 0.7;
        let c = RMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let g = gauge_rotate(&f, &c, &tol).unwrap();
        let back = gauge_rotate(&g, &c.transpose(), &tol).unwrap();
        for (a, b) in f.frames.iter().zip(&back.frames) {
            assert!((a - b).abs().max() < 1e-12);
        }
        let rederived = g.recompute_curvatures();
        for (a, b) in g.curvatures.iter().zip(&rederived) {
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }
        let reflection = RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(gauge_rotate(&f, &reflection, &tol), Err(FrameError::NotRotation(_))));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let curve = circle(1.0, 64, 3);
        let tol = Tolerances::default();
        let f = build_parallel_frame(&curve, None, &tol).unwrap();
        write_curve_csv(&path, &curve, Some(&f)).unwrap();
        let back = read_curve_csv(&path, Topology::Periodic, &tol).unwrap();
        assert_eq!(back.len(), 64);
        for (a, b) in back.points().iter().zip(curve.points()) {
            assert!(norm(&sub(a, b)) < 1e-15);
        }
    }

    #[test]
    fn rigid_fit_recovers_a_rotated_copy() {
        let a: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let x = i as f64 * 0.3;
                vec![x, x.sin(), 0.2 * x * x]
            })
            .collect();
        let (c, s) = (0.6f64, 0.8f64);
        let b: Vec<Vec<f64>> = a.iter().map(|p| vec![c * p[0] - s * p[1] + 1.0, s * p[0] + c * p[1] - 2.0, p[2] + 0.5]).collect();
        assert!(rigid_fit_distance(&a, &b) < 1e-12);
        let mirrored: Vec<Vec<f64>> = a.iter().map(|p| vec![p[0], -p[1], p[2]]).collect();
        assert!(rigid_fit_distance(&a, &mirrored) > 1e-3);
    }
}
