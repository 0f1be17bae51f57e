use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{InitialCondition, RunConfig};
use super::svg::{project, Plot, Series};
use super::CliError;
use crate::backlund::{bt_curve_trail, permute, vacuum_multi_soliton, vacuum_slice, ProjectorSpec};
use crate::frames::{self, build_parallel_frame, rigid_fit_distance, FrameField, GridCurve};
use crate::grid::{CurvatureField, Grid, Topology};
use crate::hamiltonian::{conserved_log, relative_drift, write_conserved_csv};
use crate::lax::{
    self, embed_frame, frame_history, geometric_flow_residual, reconstruct_curve, sym_trail, zero_curvature_residual, CurveTrail, LaxError,
    ResidualReport,
};
use crate::numerics::linalg::to_complex;
use crate::numerics::{CMatrix, RMatrix};
use crate::vmkdv::{self, evolve, FlowSpec, RunMetadata};

type Result<T> = std::result::Result<T, CliError>;

/// Resolved configuration plus command-line overrides.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub quiet: bool,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Context {
        Context { out: cfg.output_dir.clone(), cfg, seed: None, quiet: true }
    }

    pub(crate) fn progress(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn dir(&self, sub: &str) -> Result<PathBuf> {
        let p = self.out.join(sub);
        std::fs::create_dir_all(&p)?;
        Ok(p)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn write_svg(path: &Path, plot: &Plot) -> Result<()> {
    std::fs::write(path, plot.render())?;
    Ok(())
}

/// Initial curvature and, for soliton data, its parameters.
pub(crate) fn initial_field(cfg: &RunConfig) -> Result<(CurvatureField, Option<ProjectorSpec>)> {
    let grid = cfg.grid();
    let n = cfg.dimension;
    Ok(match &cfg.initial {
        InitialCondition::Zero => (CurvatureField::zeros(grid, n, 0.0), None),
        InitialCondition::Soliton { s, c } => {
            let spec = ProjectorSpec::new(*s, c.clone())?;
            let k = vacuum_multi_soliton(grid, cfg.flow, 0.0, std::slice::from_ref(&spec))?.k;
            (k, Some(spec))
        }
        InitialCondition::SamplesFile { path } => {
            let k = vmkdv::read_snapshot_csv(path, cfg.topology, 0.0)?;
            if k.dimension() != n {
                return Err(CliError::Config {
                    field: "initial.path".into(),
                    message: format!("file has {} components, dimension {n} needs {}", k.dimension() - 1, n - 1),
                });
            }
            (k, None)
        }
        InitialCondition::RandomSmooth { seed, modes, amplitude } => (vmkdv::random_smooth_field(grid, n, *seed, *modes, *amplitude), None),
    })
}

pub(crate) fn flow_spec(cfg: &RunConfig) -> FlowSpec {
    FlowSpec {
        j: cfg.flow,
        scheme: cfg.scheme,
        dt: cfg.dt,
        snapshot_times: cfg.output_times(),
        flip_nonlinear_sign: cfg.inject_sign_bug,
        ..FlowSpec::default()
    }
}

/// Curvature history starting at `t = 0`.
pub(crate) struct History {
    pub slices: Vec<CurvatureField>,
    pub soliton: Option<ProjectorSpec>,
    pub metadata: Option<RunMetadata>,
}

pub(crate) fn run_history(ctx: &Context) -> Result<History> {
    let (k0, soliton) = initial_field(&ctx.cfg)?;
    if ctx.cfg.t_final == 0.0 {
        return Ok(History { slices: vec![k0], soliton, metadata: None });
    }
    let spec = flow_spec(&ctx.cfg);
    ctx.progress(&format!("evolving flow {} to t = {} on {} samples", spec.j, ctx.cfg.t_final, k0.len()));
    let run = evolve(&k0, &spec, ctx.cfg.t_final)?;
    let metadata = RunMetadata::new(&k0, &spec, ctx.cfg.t_final, &run);
    let mut slices = vec![k0];
    slices.extend(run.snapshots);
    Ok(History { slices, soliton, metadata: Some(metadata) })
}

#[derive(Debug, Serialize, Deserialize)]
struct TimesFile {
    topology: Topology,
    flow: usize,
    times: Vec<f64>,
}

/// Writes `snapshot_0000.csv, ...` and `times.json` into `dir`.
pub fn write_history(dir: &Path, history: &[CurvatureField], flow: usize) -> std::result::Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (m, k) in history.iter().enumerate() {
        vmkdv::write_snapshot_csv(dir.join(format!("snapshot_{m:04}.csv")), k)?;
    }
    let topology = history.first().map_or(Topology::Periodic, |k| k.grid.topology);
    write_json(&dir.join("times.json"), &TimesFile { topology, flow, times: history.iter().map(|k| k.t).collect() })
}

/// Reads a history written by [`write_history`]; returns it with the flow index.
pub fn read_history(dir: &Path) -> std::result::Result<(Vec<CurvatureField>, usize), CliError> {
    let text = std::fs::read_to_string(dir.join("times.json"))?;
    let meta: TimesFile = serde_json::from_str(&text)?;
    let slices = meta
        .times
        .iter()
        .enumerate()
        .map(|(m, &t)| Ok(vmkdv::read_snapshot_csv(dir.join(format!("snapshot_{m:04}.csv")), meta.topology, t)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((slices, meta.flow))
}

fn uniform(history: &[CurvatureField], needed: usize) -> bool {
    if history.len() < needed {
        return false;
    }
    let dt = history[1].t - history[0].t;
    dt > 0.0 && history.windows(2).all(|w| ((w[1].t - w[0].t) - dt).abs() <= 1e-9 * dt)
}

pub(crate) fn curvature_plot(k: &CurvatureField, title: &str) -> Plot {
    let xs = k.grid.xs();
    Plot {
        title: title.to_string(),
        x_label: "x".into(),
        y_label: "k".into(),
        equal_aspect: false,
        series: k
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| Series { label: format!("k{}", i + 1), points: xs.iter().copied().zip(c.iter().copied()).collect() })
            .collect(),
    }
}

pub(crate) fn curve_plot(points: &[Vec<f64>], title: &str) -> Option<Plot> {
    let pts = project(points)?;
    Some(Plot {
        title: title.to_string(),
        x_label: "".into(),
        y_label: "".into(),
        equal_aspect: true,
        series: vec![Series { label: "gamma".into(), points: pts }],
    })
}

/// Frame and point at the base sample for reconstruction: the closed-form
/// soliton curve when the data is a vacuum soliton, else `(I, 0)`.
pub(crate) fn base_seed(cfg: &RunConfig, first: &CurvatureField, soliton: Option<&ProjectorSpec>) -> Result<(RMatrix, Vec<f64>)> {
    let n = first.dimension();
    if let Some(spec) = soliton {
        let probe = Grid { len: 1, ..first.grid };
        let curve = vacuum_multi_soliton(probe, cfg.flow, first.t, std::slice::from_ref(spec))?.vacuum_curve(cfg.flow)?;
        return Ok((curve.frames[0].clone(), curve.points[0].clone()));
    }
    Ok((RMatrix::identity(n, n), vec![0.0; n]))
}

fn frame_orthogonality(trail: &CurveTrail) -> f64 {
    trail.frames.iter().map(FrameField::orthogonality_residual).fold(0.0, f64::max)
}

fn max_diff(a: &CurvatureField, b: &CurvatureField) -> f64 {
    a.components.iter().zip(&b.components).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

fn status(value: f64, threshold: f64) -> &'static str {
    if value <= threshold {
        "pass"
    } else {
        "fail"
    }
}

pub(crate) fn cmd_evolve(ctx: &Context) -> Result<i32> {
    let cfg = &ctx.cfg;
    let h = run_history(ctx)?;
    let history = &h.slices;
    write_json(&ctx.dir("")?.join("config.json"), cfg)?;
    write_history(&ctx.dir("snapshots")?, history, cfg.flow)?;
    if let Some(meta) = &h.metadata {
        meta.write(ctx.out.join("run.json"))?;
    }
    let log = conserved_log(history)?;
    write_conserved_csv(ctx.out.join("conserved.csv"), &log)?;
    let drift = relative_drift(&log);

    let zero_curvature = if uniform(history, 3) { Some(zero_curvature_residual(history, cfg.flow)?) } else { None };
    let mut residuals = ResidualReport { zero_curvature, geometric_flow: None, arc_length_defect: None, orthogonality: None };
    let mut closure_gaps = Vec::new();
    let plots = ctx.dir("plots")?;
    if uniform(history, 4) {
        ctx.progress("reconstructing curves");
        let (g00, gamma00) = base_seed(cfg, &history[0], h.soliton.as_ref())?;
        let trail = reconstruct_curve(history, cfg.flow, &g00, &gamma00, &cfg.frame_tolerances())?;
        lax::write_trail_csv(ctx.dir("curves")?, &trail)?;
        residuals.geometric_flow = Some(geometric_flow_residual(&trail, cfg.flow)?);
        residuals.arc_length_defect = Some(trail.arc_length_defect());
        residuals.orthogonality = Some(frame_orthogonality(&trail));
        closure_gaps = trail.closure_gaps.clone();
        for (m, c) in trail.curves.iter().enumerate() {
            if let Some(p) = curve_plot(c.points(), &format!("curve at t = {:.4}", trail.times[m])) {
                write_svg(&plots.join(format!("curve_{m:04}.svg")), &p)?;
            }
        }
    }
    for (m, k) in history.iter().enumerate() {
        write_svg(&plots.join(format!("curvature_{m:04}.svg")), &curvature_plot(k, &format!("curvature at t = {:.4}", k.t)))?;
    }
    residuals.write(ctx.out.join("residuals.json"))?;

    let oracle_error = match (&cfg.initial, &h.soliton) {
        (InitialCondition::Zero, _) => Some(history.iter().map(CurvatureField::max_abs).fold(0.0, f64::max)),
        (_, Some(spec)) => {
            let mut worst: f64 = 0.0;
            for k in history {
                let exact = vacuum_multi_soliton(k.grid, cfg.flow, k.t, std::slice::from_ref(spec))?.k;
                worst = worst.max(max_diff(k, &exact));
            }
            Some(worst)
        }
        _ => None,
    };
    let threshold = cfg.oracle_tolerance();
    let report = json!({
        "command": "evolve",
        "samples": history[0].len(),
        "times": history.iter().map(|k| k.t).collect::<Vec<_>>(),
        "conserved_drift": { "f1": drift[0], "f3": drift[1], "f5": drift[2] },
        "residuals": residuals,
        "closure_gaps": closure_gaps,
        "oracle": oracle_error.map_or("n/a", |e| status(e, threshold)),
        "oracle_error": oracle_error,
        "oracle_threshold": threshold,
    });
    write_json(&ctx.out.join("report.json"), &report)?;
    ctx.progress(&format!("wrote {}", ctx.out.display()));
    Ok(0)
}

fn all_times(cfg: &RunConfig) -> Vec<f64> {
    std::iter::once(0.0).chain(cfg.output_times()).collect()
}

fn solitons(cfg: &RunConfig) -> Result<&[ProjectorSpec]> {
    if cfg.solitons.is_empty() {
        return Err(CliError::Config { field: "solitons".into(), message: "at least one (s, c) pair is required".into() });
    }
    Ok(&cfg.solitons)
}

/// Closed-form one-soliton curve of flow `j` in the `(e_1, e_2)` plane.
/// Planar one-soliton curve up to a rigid motion. The first component of `c`
/// shifts the phase by `atanh(c_1)`; in the plane a negative `c_2` mirrors
/// the curve.
fn one_soliton_curve(grid: Grid, spec: &ProjectorSpec, j: usize, t: f64) -> Vec<Vec<f64>> {
    let (s, dim) = (spec.s, spec.dimension());
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let phase = spec.c[0].atanh();
    let mirror = if dim == 2 && spec.c[1] < 0.0 { -1.0 } else { 1.0 };
    grid.xs()
        .into_iter()
        .map(|x| {
            let d = s * x - sign * s.powi(2 * j as i32 - 1) * t + phase;
            let mut p = vec![0.0; dim];
            p[0] = x - 2.0 / s * d.tanh();
            p[1] = mirror * 2.0 / s / d.cosh();
            p
        })
        .collect()
}

pub(crate) fn cmd_soliton(ctx: &Context) -> Result<i32> {
    let cfg = &ctx.cfg;
    let specs = solitons(cfg)?;
    let grid = cfg.grid();
    let line = Grid { topology: Topology::Line, ..grid };
    let dir = ctx.dir("soliton")?;
    let tol = cfg.frame_tolerances();
    let mut permutability = Vec::new();
    let (mut identity, mut reality, mut profile): (f64, f64, Option<f64>) = (0.0, 0.0, None);
    for (m, t) in all_times(cfg).into_iter().enumerate() {
        let d = vacuum_multi_soliton(grid, cfg.flow, t, specs)?;
        identity = identity.max(d.identity_defect);
        reality = reality.max(d.reality_defect);
        let curve = d.vacuum_curve(cfg.flow)?;
        vmkdv::write_snapshot_csv(dir.join(format!("curvature_{m:04}.csv")), &d.k)?;
        let gc = GridCurve::new(curve.points.clone(), grid.spacing, grid.origin, Topology::Line, &tol)?;
        let ff = FrameField::from_parts(curve.frames.clone(), (0..d.k.len()).map(|x| d.k.at(x)).collect(), line);
        frames::write_curve_csv(dir.join(format!("curve_{m:04}.csv")), &gc, Some(&ff))?;
        write_svg(&dir.join(format!("curvature_{m:04}.svg")), &curvature_plot(&d.k, &format!("soliton curvature at t = {t:.4}")))?;
        if let Some(p) = curve_plot(&curve.points, &format!("soliton curve at t = {t:.4}")) {
            write_svg(&dir.join(format!("curve_{m:04}.svg")), &p)?;
        }
        if specs.len() == 1 && specs[0].c[0].abs() < 1.0 - 1e-9 {
            let exact = one_soliton_curve(grid, &specs[0], cfg.flow, t);
            profile = Some(profile.unwrap_or(0.0).max(rigid_fit_distance(&curve.points, &exact)));
        }
        if specs.len() >= 2 {
            let lam = |s: f64| Complex64::new(0.0, -s);
            let base = CurvatureField::zeros(grid, cfg.dimension, t);
            let a = vacuum_slice(grid, cfg.dimension, cfg.flow, t, lam(specs[0].s));
            let b = vacuum_slice(grid, cfg.dimension, cfg.flow, t, lam(specs[1].s));
            let p = permute(&specs[0], &specs[1], &base, &a, &b)?;
            permutability.push(json!({ "t": t, "mismatch": p.mismatch }));
        }
    }
    let consistent = permutability.iter().all(|p| p["mismatch"].as_f64().unwrap_or(f64::INFINITY) <= 1e-10);
    let report = json!({
        "command": "soliton",
        "flow": cfg.flow,
        "solitons": specs,
        "times": all_times(cfg),
        "tilde_identity_defect": identity,
        "tilde_reality_defect": reality,
        "profile_error": profile,
        "permutability": permutability,
        "u12_equals_u21": if specs.len() >= 2 { json!(consistent) } else { json!(null) },
    });
    write_json(&dir.join("report.json"), &report)?;
    write_json(&dir.join("parameters.json"), &json!({ "flow": cfg.flow, "solitons": specs }))?;
    ctx.progress(&format!("wrote {}", dir.display()));
    Ok(0)
}

fn tilde_seed_normals(g: &RMatrix) -> Vec<Vec<f64>> {
    (1..g.ncols()).map(|c| g.column(c).iter().copied().collect()).collect()
}

/// The same samples on a line grid.
fn as_line(k: &CurvatureField) -> CurvatureField {
    let grid = Grid::line(k.len(), k.grid.origin, k.grid.spacing);
    CurvatureField::new(grid, k.components.clone(), k.t)
}

/// `max |k_t - rhs(j, k)|` over interior slices, `k_t` from five-point
/// centered differences in time.
fn pde_residual(slices: &[CurvatureField], j: usize) -> Result<Option<f64>> {
    if !uniform(slices, 5) {
        return Ok(None);
    }
    let dt = slices[1].t - slices[0].t;
    let w = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
    let mut worst: f64 = 0.0;
    for m in 2..slices.len() - 2 {
        let rhs = vmkdv::rhs(j, &slices[m])?;
        for (i, r) in rhs.iter().enumerate() {
            for (x, rv) in r.iter().enumerate() {
                let kt: f64 = (0..5).map(|o| w[o] * slices[m + o - 2].components[i][x]).sum::<f64>() / dt;
                worst = worst.max((kt - rv).abs());
            }
        }
    }
    Ok(Some(worst))
}

pub(crate) fn cmd_backlund(ctx: &Context) -> Result<i32> {
    let cfg = &ctx.cfg;
    let spec = &solitons(cfg)?[0];
    let h = run_history(ctx)?;
    let history = &h.slices;
    if !uniform(history, 4) {
        return Err(CliError::Config {
            field: "snapshot_count".into(),
            message: "the transformation needs at least 3 equal output intervals".into(),
        });
    }
    let tol = cfg.frame_tolerances();
    let (g00, gamma00) = base_seed(cfg, &history[0], h.soliton.as_ref())?;
    let trail = reconstruct_curve(history, cfg.flow, &g00, &gamma00, &tol)?;
    let base = peak_index(&history[0]);
    ctx.progress(&format!("integrating frames at lambda = -{}i from x = {:.4}", spec.s, history[0].grid.x(base)));
    let slices = frame_history(history, cfg.flow, Complex64::new(0.0, -spec.s), &embed_frame(&trail.frames[0].frames[base]), base)?;
    let out = bt_curve_trail(&trail, &slices, spec, &tol)?;
    let dir = ctx.dir("backlund")?;
    let (mut identity, mut reality, mut orth, mut consistency): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (m, bt) in out.iter().enumerate() {
        identity = identity.max(bt.bt.identity_defect);
        reality = reality.max(bt.bt.reality_defect);
        orth = orth.max(bt.frame.orthogonality_residual());
        let rebuilt = build_parallel_frame(&bt.curve, Some(&tilde_seed_normals(&bt.frame.frames[0])), &tol)?;
        let len = bt.bt.k.len();
        for x in 2..len.saturating_sub(2) {
            for (i, v) in rebuilt.curvatures[x].iter().enumerate() {
                consistency = consistency.max((v - bt.bt.k.components[i][x]).abs());
            }
        }
        vmkdv::write_snapshot_csv(dir.join(format!("curvature_{m:04}.csv")), &bt.bt.k)?;
        frames::write_curve_csv(dir.join(format!("curve_{m:04}.csv")), &bt.curve, Some(&bt.frame))?;
        write_svg(
            &dir.join(format!("curvature_{m:04}.svg")),
            &curvature_plot(&bt.bt.k, &format!("transformed curvature at t = {:.4}", bt.bt.k.t)),
        )?;
        if let Some(p) = curve_plot(bt.curve.points(), &format!("transformed curve at t = {:.4}", bt.bt.k.t)) {
            write_svg(&dir.join(format!("curve_{m:04}.svg")), &p)?;
        }
    }
    // The transformed curvature need not be periodic, so its residual uses
    // one-sided differences near the ends.
    let new_k: Vec<CurvatureField> = out.iter().map(|b| as_line(&b.bt.k)).collect();
    let report = json!({
        "command": "backlund",
        "spec": spec,
        "base_x": history[0].grid.x(base),
        "times": trail.times,
        "tilde_identity_defect": identity,
        "tilde_reality_defect": reality,
        "frame_orthogonality": orth,
        "curvature_consistency": consistency,
        "pde_residual": pde_residual(&new_k, cfg.flow)?,
        "arc_length_defect": out.iter().map(|b| b.curve.arc_length_defect()).fold(0.0, f64::max),
    });
    write_json(&dir.join("report.json"), &report)?;
    ctx.progress(&format!("wrote {}", dir.display()));
    Ok(0)
}

/// Sample of largest `|k|`, or the middle sample when `k` vanishes. The
/// spectral frames are seeded there.
pub(crate) fn peak_index(k: &CurvatureField) -> usize {
    let norms: Vec<f64> = (0..k.len()).map(|i| k.components.iter().map(|c| c[i] * c[i]).sum()).collect();
    let (best, peak) = norms.iter().enumerate().fold((k.len() / 2, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if peak > 0.0 {
        best
    } else {
        k.len() / 2
    }
}

/// `Z E` with `Z` skew and `Z e_0 = (0, gamma)`, so the Sym formula returns
/// `gamma` at the base point.
pub(crate) fn sym_seed(g00: &RMatrix, gamma00: &[f64]) -> CMatrix {
    let n = gamma00.len();
    let mut z = RMatrix::zeros(n + 1, n + 1);
    for (i, g) in gamma00.iter().enumerate() {
        z[(i + 1, 0)] = *g;
        z[(0, i + 1)] = -*g;
    }
    to_complex(&z) * embed_frame(g00)
}

pub(crate) fn cmd_reconstruct(ctx: &Context) -> Result<i32> {
    let cfg = &ctx.cfg;
    let (history, flow, soliton) = match &cfg.input_dir {
        Some(dir) => {
            let (h, flow) = read_history(&dir.join("snapshots"))?;
            (h, flow, None)
        }
        None => {
            let h = run_history(ctx)?;
            (h.slices, cfg.flow, h.soliton)
        }
    };
    if !uniform(&history, 4) {
        return Err(CliError::Lax(LaxError::TooFewSlices { needed: 4, found: history.len() }));
    }
    let tol = cfg.frame_tolerances();
    let (g00, gamma00) = base_seed(cfg, &history[0], soliton.as_ref())?;
    let trail = reconstruct_curve(&history, flow, &g00, &gamma00, &tol)?;
    let sym = sym_trail(&history, flow, &g00, &sym_seed(&g00, &gamma00))?;
    let spread = trail
        .curves
        .iter()
        .zip(&sym)
        .flat_map(|(c, s)| c.points().iter().zip(s).flat_map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a - b).abs())))
        .fold(0.0, f64::max);
    let dir = ctx.dir("reconstruct")?;
    lax::write_trail_csv(&dir, &trail)?;
    for (m, c) in trail.curves.iter().enumerate() {
        if let Some(p) = curve_plot(c.points(), &format!("curve at t = {:.4}", trail.times[m])) {
            write_svg(&dir.join(format!("curve_{m:04}.svg")), &p)?;
        }
    }
    let report = json!({
        "command": "reconstruct",
        "times": trail.times,
        "arc_length_defect": trail.arc_length_defect(),
        "geometric_flow": geometric_flow_residual(&trail, flow)?,
        "frame_orthogonality": frame_orthogonality(&trail),
        "frame_parallelism": trail.frames.iter().map(FrameField::parallelism_residual).fold(0.0, f64::max),
        "closure_gaps": trail.closure_gaps,
        "sym_spread": spread,
    });
    write_json(&dir.join("report.json"), &report)?;
    ctx.progress(&format!("wrote {}", dir.display()));
    Ok(0)
}

fn sorted_csvs(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> =
        std::fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    files.sort();
    Ok(files)
}

fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in r.records() {
        let rec = rec?;
        for (c, v) in rec.iter().enumerate() {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| CliError::Config { field: "input_dir".into(), message: format!("{}: {v}: {e}", path.display()) })?;
            cols[c].push(v);
        }
    }
    Ok((header, cols))
}

pub(crate) fn cmd_export(ctx: &Context) -> Result<i32> {
    let source = ctx.cfg.input_dir.clone().unwrap_or_else(|| ctx.out.clone());
    let target = ctx.dir("export")?;
    let mut written = 0usize;
    for sub in ["snapshots", "curves", "soliton", "backlund", "reconstruct"] {
        for path in sorted_csvs(&source.join(sub))? {
            let (header, cols) = read_columns(&path)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_string();
            let title = format!("{sub}/{stem}");
            let plot = if header.iter().any(|h| h == "p1") {
                let dims: Vec<usize> = header.iter().enumerate().filter(|(_, h)| h.starts_with('p')).map(|(i, _)| i).collect();
                let points: Vec<Vec<f64>> = (0..cols[0].len()).map(|r| dims.iter().map(|&c| cols[c][r]).collect()).collect();
                curve_plot(&points, &title)
            } else if header.first().is_some_and(|h| h == "x") && header.len() > 1 {
                Some(Plot {
                    title,
                    x_label: "x".into(),
                    y_label: "k".into(),
                    equal_aspect: false,
                    series: (1..header.len())
                        .map(|c| Series {
                            label: header[c].clone(),
                            points: cols[0].iter().copied().zip(cols[c].iter().copied()).collect(),
                        })
                        .collect(),
                })
            } else {
                None
            };
            if let Some(p) = plot {
                write_svg(&target.join(format!("{sub}_{stem}.svg")), &p)?;
                written += 1;
            }
        }
    }
    if written == 0 {
        return Err(CliError::Config { field: "input_dir".into(), message: format!("no CSV artifacts under {}", source.display()) });
    }
    ctx.progress(&format!("wrote {written} plots to {}", target.display()));
    Ok(0)
}
