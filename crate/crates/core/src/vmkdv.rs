//! Time integration of the vmKdV hierarchy `k_t = (z_{2j-2})_x - xi_{2j-2} k`.
//!
//! The right-hand side of every flow comes from the exact recursion in
//! [`crate::diffpoly`]; its linear part is a constant-coefficient odd
//! derivative, diagonal in Fourier space, and the rest is evaluated
//! pseudo-spectrally with 2/3-rule dealiasing. Two exponential integrators
//! are available: ETDRK4 (default) and the integrating-factor RK4.

use std::path::Path;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffpoly::{self, CompiledPoly, DerivativeScheme, DiffPoly, DiffPolyError, Hierarchy, Jets};
use crate::grid::{CurvatureField, Grid, Topology};
use crate::numerics::spectral::Spectral;
use crate::numerics::stencil;

#[derive(Debug, Error)]
pub enum VmkdvError {
    #[error("flow index {j} outside the precomputed range 1..={max}")]
    FlowOutOfRange { j: usize, max: usize },
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("spectral time stepping needs a periodic box")]
    SchemeMismatch,
    #[error("line data is not decayed in the padding region (|k| = {magnitude:e} at x = {x})")]
    InsufficientPadding { x: f64, magnitude: f64 },
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },
    #[error("F_1 drifted by {drift:e} (relative) at t = {t}")]
    Instability { t: f64, drift: f64 },
    #[error("field has dimension {found}, flow expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    DiffPoly(#[from] DiffPolyError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed snapshot file: {0}")]
    Format(String),
}

pub type Result<T, E = VmkdvError> = std::result::Result<T, E>;

/// Default number of flows whose right-hand sides are precomputed.
pub const DEFAULT_MAX_FLOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScheme {
    Etdrk4,
    Ifrk4,
}

impl TimeScheme {
    /// Stability constant: runs require `dt <= c_stab * h`.
    pub fn stability_constant(self) -> f64 {
        match self {
            TimeScheme::Etdrk4 => 1.0,
            TimeScheme::Ifrk4 => 0.5,
        }
    }
}

/// Parameters of one time integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowSpec {
    /// Flow index; `j = 2` is vmKdV itself.
    pub j: usize,
    pub scheme: TimeScheme,
    /// Nominal step. Each interval between output times is split into the
    /// fewest equal steps no longer than this.
    pub dt: f64,
    /// Output times in `(0, t_final]`; the final state is always recorded.
    pub snapshot_times: Vec<f64>,
    pub dealias: bool,
    pub overflow_threshold: f64,
    pub drift_abort: f64,
    /// Required decayed fraction of a line box (half on each side).
    pub padding_fraction: f64,
    pub decay_threshold: f64,
    #[doc(hidden)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub flip_nonlinear_sign: bool,
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec {
            j: 2,
            scheme: TimeScheme::Etdrk4,
            dt: 1e-4,
            snapshot_times: Vec::new(),
            dealias: true,
            overflow_threshold: 1e8,
            drift_abort: 1e-3,
            padding_fraction: 0.25,
            decay_threshold: 1e-10,
            flip_nonlinear_sign: false,
        }
    }
}

/// The compiled right-hand side of one flow in a fixed dimension.
#[derive(Debug, Clone)]
pub struct Flow {
    j: usize,
    dim: usize,
    polys: Vec<DiffPoly>,
    /// Per component: `(order, coefficient)` of the linear terms `c k_i^{(m)}`.
    linear: Vec<Vec<(usize, f64)>>,
    nonlinear: Vec<CompiledPoly>,
    full: Vec<CompiledPoly>,
}

impl Flow {
    pub fn new(dim: usize, j: usize) -> Result<Flow> {
        let hierarchy = Hierarchy::new(dim, j.max(DEFAULT_MAX_FLOW))?;
        Flow::from_hierarchy(&hierarchy, j)
    }

    pub fn from_hierarchy(hierarchy: &Hierarchy, j: usize) -> Result<Flow> {
        let polys = hierarchy.flow_rhs(j).ok_or(VmkdvError::FlowOutOfRange { j, max: hierarchy.max_flow() })?;
        let dim = hierarchy.dim();
        let mut linear = Vec::new();
        let mut nonlinear = Vec::new();
        for (i, p) in polys.iter().enumerate() {
            let lin = p.linear_part();
            let mut terms = Vec::new();
            for (m, c) in lin.terms() {
                let (v, _) = m.factors()[0];
                assert_eq!(v.component, i + 1, "linear part of the hierarchy couples components");
                terms.push((v.order, c.to_f64().expect("finite coefficient")));
            }
            linear.push(terms);
            nonlinear.push((p - &lin).compile());
        }
        let full = polys.iter().map(DiffPoly::compile).collect();
        Ok(Flow { j, dim, polys, linear, nonlinear, full })
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exact right-hand side, one polynomial per component.
    pub fn polynomials(&self) -> &[DiffPoly] {
        &self.polys
    }

    /// Evaluates `k_t` on `field`: spectral jets on periodic grids,
    /// sixth-order differences on line grids.
    pub fn rhs(&self, field: &CurvatureField) -> Result<Vec<Vec<f64>>> {
        if field.dimension() != self.dim {
            return Err(VmkdvError::DimensionMismatch { expected: self.dim, found: field.dimension() });
        }
        let scheme = if field.grid.is_periodic() { DerivativeScheme::Spectral } else { DerivativeScheme::FiniteDifference };
        let order = self.full.iter().map(CompiledPoly::max_order).max().unwrap_or(0);
        let jets = Jets::compute(field, order, scheme)?;
        Ok(self.full.iter().map(|p| p.evaluate(&jets)).collect())
    }

    fn max_nonlinear_order(&self) -> usize {
        self.nonlinear.iter().map(CompiledPoly::max_order).max().unwrap_or(0)
    }

    fn linear_symbol(&self, spectral: &Spectral, component: usize) -> Vec<Complex64> {
        let mut symbol = vec![Complex64::new(0.0, 0.0); spectral.len()];
        for &(order, c) in &self.linear[component] {
            for (s, d) in symbol.iter_mut().zip(spectral.derivative_symbol(order)) {
                *s += d * c;
            }
        }
        symbol
    }
}

/// `k_t` for flow `j` (building the hierarchy on the fly).
pub fn rhs(j: usize, field: &CurvatureField) -> Result<Vec<Vec<f64>>> {
    if j == 0 || j > DEFAULT_MAX_FLOW {
        return Err(VmkdvError::FlowOutOfRange { j, max: DEFAULT_MAX_FLOW });
    }
    Flow::new(field.dimension(), j)?.rhs(field)
}

/// Hand-written `-(k_xxx + (3/2)|k|^2 k_x)`, an independent code path for
/// the `j = 2` flow.
pub fn vmkdv_rhs_direct(field: &CurvatureField) -> Vec<Vec<f64>> {
    let grid = field.grid;
    let deriv = |c: &[f64], m: usize| -> Vec<f64> {
        if grid.is_periodic() {
            Spectral::new(grid.len, grid.box_length()).derivative(c, m)
        } else {
            stencil::derivative(c, grid.spacing, m, diffpoly::eval::FD_ACCURACY, false)
        }
    };
    let norm2: Vec<f64> = (0..grid.len).map(|j| field.components.iter().map(|c| c[j] * c[j]).sum()).collect();
    field
        .components
        .iter()
        .map(|c| {
            let kx = deriv(c, 1);
            let kxxx = deriv(c, 3);
            (0..grid.len).map(|j| -(kxxx[j] + 1.5 * norm2[j] * kx[j])).collect()
        })
        .collect()
}

/// ETDRK4 coefficients for one step size, per component.
struct EtdCoefficients {
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

const CONTOUR_POINTS: usize = 64;

impl EtdCoefficients {
    /// Contour-averaged phi functions (full circle, since `L` is imaginary).
    fn new(symbol: &[Complex64], dt: f64) -> EtdCoefficients {
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|m| Complex64::from_polar(1.0, std::f64::consts::PI * (m as f64 + 0.5) / (CONTOUR_POINTS as f64 / 2.0)))
            .collect();
        let len = symbol.len();
        let mut c = EtdCoefficients {
            e: Vec::with_capacity(len),
            e2: Vec::with_capacity(len),
            q: Vec::with_capacity(len),
            f1: Vec::with_capacity(len),
            f2: Vec::with_capacity(len),
            f3: Vec::with_capacity(len),
        };
        let inv = 1.0 / CONTOUR_POINTS as f64;
        for &l in symbol {
            let ldt = l * dt;
            c.e.push(ldt.exp());
            c.e2.push((ldt * 0.5).exp());
            let (mut q, mut f1, mut f2, mut f3) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for r in &roots {
                let z = ldt + r;
                let ez = z.exp();
                let z3 = z * z * z;
                q += ((z * 0.5).exp() - 1.0) / z;
                f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            c.q.push(q * inv * dt);
            c.f1.push(f1 * inv * dt);
            c.f2.push(f2 * inv * dt);
            c.f3.push(f3 * inv * dt);
        }
        c
    }
}

/// Pseudo-spectral evaluation of the nonlinear part in Fourier space.
struct Nonlinear<'a> {
    flow: &'a Flow,
    spectral: &'a Spectral,
    mask: Option<Vec<f64>>,
    order: usize,
    sign: f64,
}

impl Nonlinear<'_> {
    fn eval(&self, coeffs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let data = coeffs.iter().map(|c| (0..=self.order).map(|m| self.spectral.derivative_of_coeffs(c, m)).collect()).collect();
        let jets = Jets::from_derivatives(data);
        self.flow
            .nonlinear
            .iter()
            .map(|p| {
                let mut hat = self.spectral.forward(&p.evaluate(&jets));
                if let Some(mask) = &self.mask {
                    for (h, m) in hat.iter_mut().zip(mask) {
                        *h *= m;
                    }
                }
                if self.sign != 1.0 {
                    for h in hat.iter_mut() {
                        *h *= self.sign;
                    }
                }
                hat
            })
            .collect()
    }
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: CurvatureField,
    /// States at the requested snapshot times, then the final state.
    pub snapshots: Vec<CurvatureField>,
    /// `(t, F_1)` after every step.
    pub f1_log: Vec<(f64, f64)>,
    pub steps: usize,
}

fn f1_from_coeffs(coeffs: &[Vec<Complex64>], spacing: f64) -> f64 {
    let len = coeffs[0].len() as f64;
    coeffs.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>() * spacing / (2.0 * len)
}

fn check_padding(field: &CurvatureField, spec: &FlowSpec) -> Result<()> {
    let len = field.len();
    let pad = ((spec.padding_fraction / 2.0) * len as f64).floor() as usize;
    for j in (0..pad).chain(len - pad..len) {
        let magnitude = field.components.iter().map(|c| c[j].abs()).fold(0.0, f64::max);
        if magnitude > spec.decay_threshold {
            return Err(VmkdvError::InsufficientPadding { x: field.grid.x(j), magnitude });
        }
    }
    Ok(())
}

/// Evolves `k0` by flow `spec.j` to `t_final`.
///
/// Periodic grids are used as is. Line grids are embedded in the periodic
/// box they span, which requires the data to be decayed over the outer
/// `padding_fraction` of the box.
pub fn evolve(k0: &CurvatureField, spec: &FlowSpec, t_final: f64) -> Result<Evolution> {
    let flow = Flow::new(k0.dimension(), spec.j)?;
    evolve_with(&flow, k0, spec, t_final)
}

/// [`evolve`] with a prebuilt [`Flow`].
pub fn evolve_with(flow: &Flow, k0: &CurvatureField, spec: &FlowSpec, t_final: f64) -> Result<Evolution> {
    if k0.dimension() != flow.dim {
        return Err(VmkdvError::DimensionMismatch { expected: flow.dim, found: k0.dimension() });
    }
    if !(spec.dt > 0.0) || !spec.dt.is_finite() {
        return Err(VmkdvError::InvalidStep(spec.dt));
    }
    let grid = k0.grid;
    let limit = spec.scheme.stability_constant() * grid.spacing;
    if spec.dt > limit {
        return Err(VmkdvError::StepTooLarge { dt: spec.dt, limit });
    }
    if grid.topology == Topology::Line {
        check_padding(k0, spec)?;
    }
    let spectral = Spectral::new(grid.len, grid.box_length());
    let nonlinear = Nonlinear {
        flow,
        spectral: &spectral,
        mask: spec.dealias.then(|| spectral.two_thirds_mask()),
        order: flow.max_nonlinear_order(),
        sign: if spec.flip_nonlinear_sign { -1.0 } else { 1.0 },
    };
    let symbols: Vec<Vec<Complex64>> = (0..flow.dim - 1).map(|i| flow.linear_symbol(&spectral, i)).collect();

    let mut v: Vec<Vec<Complex64>> = k0.components.iter().map(|c| spectral.forward(c)).collect();
    let f1_initial = f1_from_coeffs(&v, grid.spacing);
    let mut t = k0.t;
    let mut f1_log = vec![(t, f1_initial)];
    let mut snapshots = Vec::new();
    let mut steps = 0;

    let mut stops: Vec<f64> = spec.snapshot_times.iter().map(|s| k0.t + s).filter(|&s| s > k0.t && s < k0.t + t_final).collect();
    stops.sort_by(f64::total_cmp);
    stops.push(k0.t + t_final);

    let to_field = |v: &[Vec<Complex64>], t: f64| CurvatureField::new(grid, v.iter().map(|c| spectral.inverse(c)).collect(), t);

    for stop in stops {
        let span = stop - t;
        if span <= 0.0 {
            snapshots.push(to_field(&v, t));
            continue;
        }
        let count = (span / spec.dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / count as f64;
        match spec.scheme {
            TimeScheme::Etdrk4 => {
                let coeffs: Vec<EtdCoefficients> = symbols.iter().map(|s| EtdCoefficients::new(s, h)).collect();
                for step in 0..count {
                    v = etdrk4_step(&v, &coeffs, &nonlinear);
                    steps += 1;
                    t = if step + 1 == count { stop } else { t + h };
                    monitor(&v, &spectral, grid, t, f1_initial, spec, &mut f1_log)?;
                }
            }
            TimeScheme::Ifrk4 => {
                let half: Vec<Vec<Complex64>> = symbols.iter().map(|s| s.iter().map(|l| (l * (0.5 * h)).exp()).collect()).collect();
                for step in 0..count {
                    v = ifrk4_step(&v, &half, h, &nonlinear);
                    steps += 1;
                    t = if step + 1 == count { stop } else { t + h };
                    monitor(&v, &spectral, grid, t, f1_initial, spec, &mut f1_log)?;
                }
            }
        }
        snapshots.push(to_field(&v, t));
    }
    let final_state = snapshots.last().cloned().expect("at least the final snapshot");
    Ok(Evolution { final_state, snapshots, f1_log, steps })
}

fn monitor(
    v: &[Vec<Complex64>],
    spectral: &Spectral,
    grid: Grid,
    t: f64,
    f1_initial: f64,
    spec: &FlowSpec,
    log: &mut Vec<(f64, f64)>,
) -> Result<()> {
    let f1 = f1_from_coeffs(v, grid.spacing);
    if !f1.is_finite() {
        return Err(VmkdvError::BlowUp { t });
    }
    // The Fourier bound sum|c|/N >= max|k| makes the physical check cheap to skip.
    let bound = v.iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>() / spectral.len() as f64).fold(0.0, f64::max);
    if !bound.is_finite() {
        return Err(VmkdvError::BlowUp { t });
    }
    if bound > spec.overflow_threshold {
        let peak = v.iter().map(|c| spectral.inverse(c).iter().map(|x| x.abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if !peak.is_finite() || peak > spec.overflow_threshold {
            return Err(VmkdvError::BlowUp { t });
        }
    }
    if f1_initial > 0.0 {
        let drift = (f1 - f1_initial).abs() / f1_initial;
        if drift > spec.drift_abort {
            return Err(VmkdvError::Instability { t, drift });
        }
    }
    log.push((t, f1));
    Ok(())
}

fn combine(parts: &[(&[Vec<Complex64>], &dyn Fn(usize, usize) -> Complex64)]) -> Vec<Vec<Complex64>> {
    let (first, _) = parts[0];
    (0..first.len()).map(|i| (0..first[i].len()).map(|m| parts.iter().map(|(v, w)| v[i][m] * w(i, m)).sum()).collect()).collect()
}

fn etdrk4_step(v: &[Vec<Complex64>], c: &[EtdCoefficients], n: &Nonlinear) -> Vec<Vec<Complex64>> {
    let nv = n.eval(v);
    let a = combine(&[(v, &|i, m| c[i].e2[m]), (&nv, &|i, m| c[i].q[m])]);
    let na = n.eval(&a);
    let b = combine(&[(v, &|i, m| c[i].e2[m]), (&na, &|i, m| c[i].q[m])]);
    let nb = n.eval(&b);
    let two = Complex64::new(2.0, 0.0);
    let cc = combine(&[(&a, &|i, m| c[i].e2[m]), (&nb, &|i, m| two * c[i].q[m]), (&nv, &|i, m| -c[i].q[m])]);
    let nc = n.eval(&cc);
    combine(&[
        (v, &|i, m| c[i].e[m]),
        (&nv, &|i, m| c[i].f1[m]),
        (&na, &|i, m| two * c[i].f2[m]),
        (&nb, &|i, m| two * c[i].f2[m]),
        (&nc, &|i, m| c[i].f3[m]),
    ])
}

/// Classical RK4 on `w = exp(-L t) v`, written in terms of `v`.
fn ifrk4_step(v: &[Vec<Complex64>], half: &[Vec<Complex64>], h: f64, n: &Nonlinear) -> Vec<Vec<Complex64>> {
    let dt = Complex64::new(h, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let k1 = n.eval(v);
    let a = combine(&[(v, &|i, m| half[i][m]), (&k1, &|i, m| half[i][m] * dt * 0.5)]);
    let k2 = n.eval(&a);
    let b = combine(&[(v, &|i, m| half[i][m]), (&k2, &|_, _| dt * 0.5)]);
    let k3 = n.eval(&b);
    let c = combine(&[(v, &|i, m| half[i][m] * half[i][m]), (&k3, &|i, m| half[i][m] * dt)]);
    let k4 = n.eval(&c);
    combine(&[
        (v, &|i, m| half[i][m] * half[i][m]),
        (&k1, &|i, m| half[i][m] * half[i][m] * dt / 6.0),
        (&k2, &|i, m| half[i][m] * dt / 3.0),
        (&k3, &|i, m| half[i][m] * dt / 3.0),
        (&k4, &|_, _| one * dt / 6.0),
    ])
}

/// The one-soliton curvature `k(x, t) = -2s sech(s x - s^3 t) d` for a unit
/// direction `d` in `R^{n-1}`.
pub fn soliton_field(grid: Grid, s: f64, direction: &[f64], t: f64) -> CurvatureField {
    CurvatureField::from_fn(grid, direction.len() + 1, t, |x| {
        let amp = -2.0 * s / (s * x - s.powi(3) * t).cosh();
        direction.iter().map(|d| amp * d).collect()
    })
}

/// A smooth periodic field: each component is a random trigonometric
/// polynomial with `modes` harmonics whose amplitudes decay like `1/m^2`.
pub fn random_smooth_field(grid: Grid, dim: usize, seed: u64, modes: usize, amplitude: f64) -> CurvatureField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = 2.0 * std::f64::consts::PI / grid.box_length();
    let coeffs: Vec<Vec<(f64, f64)>> =
        (0..dim - 1).map(|_| (1..=modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect();
    CurvatureField::from_fn(grid, dim, 0.0, |x| {
        coeffs
            .iter()
            .map(|cs| {
                cs.iter()
                    .enumerate()
                    .map(|(m, (a, b))| {
                        let w = (m + 1) as f64;
                        amplitude * (a * (w * base * (x - grid.origin)).cos() + b * (w * base * (x - grid.origin)).sin()) / (w * w)
                    })
                    .sum()
            })
            .collect()
    })
}

/// Writes `x, k1..k{n-1}`.
pub fn write_snapshot_csv<P: AsRef<Path>>(path: P, field: &CurvatureField) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x".to_string()];
    header.extend((1..field.dimension()).map(|i| format!("k{i}")));
    w.write_record(&header)?;
    for j in 0..field.len() {
        let mut row = vec![format!("{:.17e}", field.grid.x(j))];
        row.extend(field.components.iter().map(|c| format!("{:.17e}", c[j])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot_csv`].
pub fn read_snapshot_csv<P: AsRef<Path>>(path: P, topology: Topology, t: f64) -> Result<CurvatureField> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let comps = header.len().saturating_sub(1);
    if header.get(0) != Some("x") || comps == 0 {
        return Err(VmkdvError::Format("expected columns x, k1, ...".into()));
    }
    let mut xs = Vec::new();
    let mut components = vec![Vec::new(); comps];
    for rec in r.records() {
        let rec = rec?;
        for (c, v) in rec.iter().enumerate() {
            let v: f64 = v.trim().parse().map_err(|e| VmkdvError::Format(format!("{v}: {e}")))?;
            if c == 0 {
                xs.push(v);
            } else {
                components[c - 1].push(v);
            }
        }
    }
    if xs.len() < 2 {
        return Err(VmkdvError::Format("need at least two rows".into()));
    }
    let spacing = xs[1] - xs[0];
    let grid = Grid { len: xs.len(), spacing, origin: xs[0], topology };
    Ok(CurvatureField::new(grid, components, t))
}

/// Run metadata written next to the snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub grid: Grid,
    pub dimension: usize,
    pub spec: FlowSpec,
    pub t_final: f64,
    pub steps: usize,
    pub snapshot_times: Vec<f64>,
    /// `(t, F_1)` samples.
    pub conserved: Vec<(f64, f64)>,
}

impl RunMetadata {
    pub fn new(k0: &CurvatureField, spec: &FlowSpec, t_final: f64, run: &Evolution) -> RunMetadata {
        RunMetadata {
            grid: k0.grid,
            dimension: k0.dimension(),
            spec: spec.clone(),
            t_final,
            steps: run.steps,
            snapshot_times: run.snapshots.iter().map(|s| s.t).collect(),
            conserved: run.f1_log.clone(),
        }
    }

    pub fn write<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_stays_zero() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let k0 = CurvatureField::zeros(grid, 3, 0.0);
        let spec = FlowSpec { dt: 1e-3, ..FlowSpec::default() };
        let run = evolve(&k0, &spec, 0.05).unwrap();
        assert!(run.final_state.max_abs() == 0.0);
    }

    #[test]
    fn translation_flow_is_k_x() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let k = CurvatureField::from_fn(grid, 2, 0.0, |x| vec![x.sin()]);
        let r = rhs(1, &k).unwrap();
        for (j, x) in grid.xs().iter().enumerate() {
            assert!((r[0][j] - x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_and_recursive_vmkdv_agree() {
        let grid = Grid::periodic(128, 0.0, 2.0 * PI);
        for seed in 0..3 {
            let k = random_smooth_field(grid, 4, seed, 6, 1.0);
            let a = rhs(2, &k).unwrap();
            let b = vmkdv_rhs_direct(&k);
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn out_of_range_flow() {
        let grid = Grid::periodic(16, 0.0, 1.0);
        let k = CurvatureField::zeros(grid, 2, 0.0);
        assert!(matches!(rhs(4, &k), Err(VmkdvError::FlowOutOfRange { j: 4, .. })));
        assert!(matches!(rhs(0, &k), Err(VmkdvError::FlowOutOfRange { j: 0, .. })));
    }

    #[test]
    fn step_validation() {
        let grid = Grid::periodic(64, 0.0, 2.0 * PI);
        let k0 = CurvatureField::zeros(grid, 2, 0.0);
        let spec = FlowSpec { dt: 0.0, ..FlowSpec::default() };
        assert!(matches!(evolve(&k0, &spec, 1.0), Err(VmkdvError::InvalidStep(_))));
        let spec = FlowSpec { dt: 1.0, ..FlowSpec::default() };
        assert!(matches!(evolve(&k0, &spec, 1.0), Err(VmkdvError::StepTooLarge { .. })));
    }

    #[test]
    fn line_data_without_padding_is_rejected() {
        let grid = Grid::line(256, -5.0, 10.0 / 256.0);
        let k0 = soliton_field(grid, 1.0, &[1.0], 0.0);
        let spec = FlowSpec { dt: 1e-3, ..FlowSpec::default() };
        assert!(matches!(evolve(&k0, &spec, 0.01), Err(VmkdvError::InsufficientPadding { .. })));
    }

    #[test]
    fn soliton_moves_at_speed_s_squared() {
        for scheme in [TimeScheme::Etdrk4, TimeScheme::Ifrk4] {
            let grid = Grid::periodic(512, -20.0 * PI, 40.0 * PI);
            let k0 = soliton_field(grid, 1.0, &[1.0], 0.0);
            let spec = FlowSpec { dt: 2e-3, scheme, ..FlowSpec::default() };
            let run = evolve(&k0, &spec, 0.2).unwrap();
            let exact = soliton_field(grid, 1.0, &[1.0], 0.2);
            let err = run.final_state.components[0].iter().zip(&exact.components[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-5, "{scheme:?}: {err}");
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let grid = Grid::periodic(32, 0.0, 2.0 * PI);
        let k = random_smooth_field(grid, 3, 7, 4, 1.0);
        write_snapshot_csv(&path, &k).unwrap();
        let back = read_snapshot_csv(&path, Topology::Periodic, 0.0).unwrap();
        assert_eq!(back.components, k.components);
        assert!((back.grid.spacing - grid.spacing).abs() < 1e-14);
    }
}
