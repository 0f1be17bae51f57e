//! The invariant suite behind `verify`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::commands::{flow_spec, peak_index, sym_seed, Context};
use super::config::InitialCondition;
use super::CliError;
use crate::backlund::{
    bt_curvature, permute, simple_element_with, vacuum_frame, vacuum_multi_soliton, vacuum_slice, Dressing, ProjectorSpec,
};
use crate::diffpoly::{compute_lax_coefficients, recursion_defects};
use crate::grid::{CurvatureField, Grid};
use crate::hamiltonian::{conserved_log, pairing, relative_drift, Hamiltonians};
use crate::lax::{frame_history, geometric_flow_residual, integrate_frame_x, reconstruct_curve, sym_trail, zero_curvature_residual};
use crate::numerics::CMatrix;
use crate::vmkdv::{self, evolve, random_smooth_field, FlowSpec};

type Result<T> = std::result::Result<T, CliError>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One named measurement against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.to_string(), value, threshold, pass: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

/// Fourth-order stencil residual of flow 2, `k_t + k_xxx + 3/2 |k|^2 k_x`,
/// for a curvature given pointwise by `k(x, t)`.
pub(crate) fn vmkdv_stencil_residual<F>(k: F, xs: &[f64], t: f64, h: f64, dt: f64) -> f64
where
    F: Fn(f64, f64) -> Vec<f64>,
{
    let mut worst: f64 = 0.0;
    for &x in xs {
        let ks: Vec<Vec<f64>> = (-3..=3).map(|m| k(x + m as f64 * h, t)).collect();
        let kt: Vec<Vec<f64>> = [-2.0, -1.0, 1.0, 2.0].iter().map(|m| k(x, t + m * dt)).collect();
        let norm2: f64 = ks[3].iter().map(|v| v * v).sum();
        for comp in 0..ks[3].len() {
            let f = |m: usize| ks[m][comp];
            let kx = (f(1) - 8.0 * f(2) + 8.0 * f(4) - f(5)) / (12.0 * h);
            let kxxx = (f(0) - 8.0 * f(1) + 13.0 * f(2) - 13.0 * f(4) + 8.0 * f(5) - f(6)) / (8.0 * h * h * h);
            let ktv = (kt[0][comp] - 8.0 * kt[1][comp] + 8.0 * kt[2][comp] - kt[3][comp]) / (12.0 * dt);
            worst = worst.max((ktv + kxxx + 1.5 * norm2 * kx).abs());
        }
    }
    worst
}

/// Closed-form vacuum multi-soliton curvature at one point.
pub(crate) fn soliton_point(specs: &[ProjectorSpec], x: f64, t: f64) -> Vec<f64> {
    let probe = Grid::line(1, x, 1.0);
    vacuum_multi_soliton(probe, 2, t, specs).map(|d| d.k.at(0)).unwrap_or_default()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// `max |k - exact|` over the history.
fn oracle_error(history: &[CurvatureField], spec: &ProjectorSpec) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in history {
        let exact = vacuum_multi_soliton(k.grid, 2, k.t, std::slice::from_ref(spec))?.k;
        worst = worst.max(max_abs_diff(&k.components, &exact.components));
    }
    Ok(worst)
}

fn run(k0: &CurvatureField, spec: &FlowSpec, t_final: f64) -> Result<Vec<CurvatureField>> {
    let ev = evolve(k0, spec, t_final)?;
    let mut h = vec![k0.clone()];
    h.extend(ev.snapshots);
    Ok(h)
}

/// Runs every check at the configured resolution.
pub fn run_suite(ctx: &Context) -> Result<VerifyReport> {
    let cfg = &ctx.cfg;
    let n_samples = cfg.samples;
    let grid = Grid::periodic(n_samples, -0.5 * cfg.domain_length, cfg.domain_length);
    let t_final = if cfg.t_final > 0.0 { cfg.t_final } else { 0.5 };
    let intervals = 50;
    let seed = ctx.seed.unwrap_or(match cfg.initial {
        InitialCondition::RandomSmooth { seed, .. } => seed,
        _ => 1,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = cfg.frame_tolerances();
    let mut checks = Vec::new();
    let mut push = |c: Check, ctx: &Context| {
        ctx.progress(&format!("{:<28} {:>12.3e}  <= {:>8.1e}  {}", c.name, c.value, c.threshold, if c.pass { "pass" } else { "FAIL" }));
        checks.push(c);
    };

    // Exact recursion identity.
    let mut defects = 0usize;
    for dim in 2..=4 {
        defects += recursion_defects(&compute_lax_coefficients(dim, 5)?, dim).len();
    }
    push(Check::new("recursion_identity", defects as f64, 0.0), ctx);

    // Soliton run: -2 sech(x - t).
    let mut spec = flow_spec(cfg);
    spec.j = 2;
    spec.dt = cfg.dt.min(spec.scheme.stability_constant() * grid.spacing);
    spec.snapshot_times = (1..intervals).map(|m| t_final * m as f64 / intervals as f64).collect();
    let sol = ProjectorSpec::new(1.0, vec![0.0, -1.0])?;
    let k0 = vacuum_multi_soliton(grid, 2, 0.0, std::slice::from_ref(&sol))?.k;
    let history = run(&k0, &spec, t_final)?;
    push(Check::new("soliton_oracle", oracle_error(&history, &sol)?, cfg.oracle_tolerance()), ctx);
    let drift = relative_drift(&conserved_log(&history)?);
    push(Check::new("f1_drift_soliton", drift[0], 1e-8), ctx);
    push(Check::new("f3_drift_soliton", drift[1], 1e-6), ctx);

    // Random smooth run in R^3.
    let rough = random_smooth_field(grid, 3, seed, 6, 0.5);
    let mut rspec = spec.clone();
    rspec.snapshot_times = (1..10).map(|m| t_final * m as f64 / 10.0).collect();
    let rhist = run(&rough, &rspec, t_final)?;
    let rdrift = relative_drift(&conserved_log(&rhist)?);
    push(Check::new("f1_drift_random", rdrift[0], 1e-8), ctx);
    push(Check::new("f3_drift_random", rdrift[1], 1e-6), ctx);

    // Hamiltonian structure on small periodic boxes.
    let hgrid = Grid::periodic(256, 0.0, 2.0 * std::f64::consts::PI);
    let hams = Hamiltonians::new(3, 3)?;
    let (mut ident, mut grad): (f64, f64) = (0.0, 0.0);
    for trial in 0..20u64 {
        let k = random_smooth_field(hgrid, 3, seed.wrapping_add(100 + trial), 4, 0.8);
        let dir = random_smooth_field(hgrid, 3, seed.wrapping_add(200 + trial), 4, 1.0);
        for j in 1..=3 {
            let field = hams.hamiltonian_field(j, &k)?;
            ident = ident.max(max_abs_diff(&field, &vmkdv::rhs(j, &k)?));
            let g = hams.gradient(j, &k)?;
            let eps = 1e-4;
            let shifted = |sign: f64| {
                let comps = k
                    .components
                    .iter()
                    .zip(&dir.components)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + sign * eps * y).collect())
                    .collect();
                CurvatureField::new(hgrid, comps, 0.0)
            };
            let fd = (hams.evaluate(j, &shifted(1.0))? - hams.evaluate(j, &shifted(-1.0))?) / (2.0 * eps);
            grad = grad.max((fd - pairing(&g, &dir.components, hgrid.spacing)).abs());
        }
    }
    push(Check::new("hamiltonian_identity", ident, 1e-7), ctx);
    push(Check::new("gradient_oracle", grad, 1e-6), ctx);

    // Lax pair on the soliton history and on k = 0.
    // Closed-form data is not periodic, so it is sampled on a line.
    let zc_grid = Grid::line(2048, -20.0, 40.0 / 2047.0);
    let exact_history: Vec<CurvatureField> = (0..5)
        .map(|m| vacuum_multi_soliton(zc_grid, 2, 0.25 + 1e-4 * m as f64, std::slice::from_ref(&sol)).map(|d| d.k))
        .collect::<std::result::Result<_, _>>()?;
    push(Check::new("zero_curvature_soliton", zero_curvature_residual(&exact_history, 2)?.max, 1e-5), ctx);
    let vac: Vec<CurvatureField> = (0..5).map(|m| CurvatureField::zeros(grid, 3, 0.1 * m as f64)).collect();
    push(Check::new("zero_curvature_vacuum", zero_curvature_residual(&vac, 2)?.max, 0.0), ctx);

    // Curve reconstruction against the closed form.
    let exact_curves: Vec<_> = history
        .iter()
        .map(|k| vacuum_multi_soliton(grid, 2, k.t, std::slice::from_ref(&sol))?.vacuum_curve(2))
        .collect::<std::result::Result<_, _>>()?;
    let g00 = exact_curves[0].frames[0].clone();
    let gamma00 = exact_curves[0].points[0].clone();
    let trail = reconstruct_curve(&history, 2, &g00, &gamma00, &tol)?;
    let mut recon: f64 = 0.0;
    for (c, e) in trail.curves.iter().zip(&exact_curves) {
        let diffs: Vec<Vec<f64>> = c.points().iter().zip(&e.points).map(|(p, q)| p.iter().zip(q).map(|(a, b)| a - b).collect()).collect();
        let mean: Vec<f64> = (0..2).map(|i| diffs.iter().map(|d| d[i]).sum::<f64>() / diffs.len() as f64).collect();
        recon = recon.max(diffs.iter().flat_map(|d| d.iter().zip(&mean).map(|(a, m)| (a - m).abs())).fold(0.0, f64::max));
    }
    push(Check::new("reconstruction_error", recon, 1e-5), ctx);
    push(Check::new("arc_length_defect", trail.arc_length_defect(), 1e-6), ctx);
    push(Check::new("geometric_flow_residual", geometric_flow_residual(&trail, 2)?, 1e-5), ctx);
    let sym = sym_trail(&history, 2, &g00, &sym_seed(&g00, &gamma00))?;
    let spread = trail.curves.iter().zip(&sym).map(|(c, s)| max_abs_diff(c.points(), s)).fold(0.0, f64::max);
    push(Check::new("sym_vs_quadrature", spread, 1e-5), ctx);
    let orth = trail.frames.iter().map(|f| f.orthogonality_residual()).fold(0.0, f64::max);
    push(Check::new("frame_orthogonality", orth, tol.tol_orth), ctx);

    // Reality conditions on complex frame slices.
    let last = history.last().expect("history");
    let lam = Complex64::new(0.7, 0.3);
    let id = CMatrix::identity(3, 3);
    let e = integrate_frame_x(last, lam, &id)?;
    let reality = e
        .conjugate_reality_residual(&integrate_frame_x(last, lam.conj(), &id)?)?
        .max(e.involution_reality_residual(&integrate_frame_x(last, -lam, &id)?)?)
        .max(e.orthogonality_residual());
    push(Check::new("reality_conditions", reality, tol.tol_orth), ctx);

    // Transformations of the vacuum.
    let line = Grid::line(401, -10.0, 0.05);
    let mut exact: f64 = 0.0;
    let mut tilde: f64 = 0.0;
    for s in [0.5, 1.0, 2.0] {
        let spec = ProjectorSpec::new(s, vec![0.0, -1.0])?;
        let t = 0.3;
        let bt = bt_curvature(&vacuum_slice(line, 2, 2, t, -I * s), &CurvatureField::zeros(line, 2, t), &spec)?;
        tilde = tilde.max(bt.identity_defect).max(bt.reality_defect);
        for (i, x) in line.xs().into_iter().enumerate() {
            exact = exact.max((bt.k.components[0][i] + 2.0 * s / (s * x - s.powi(3) * t).cosh()).abs());
        }
    }
    push(Check::new("bt_vacuum_exact", exact, 1e-10), ctx);

    let mut perm: f64 = 0.0;
    let mut pde: f64 = 0.0;
    let probe_xs = [-3.0, -1.0, -0.2, 0.0, 0.5, 1.3, 2.5];
    for _ in 0..5 {
        let s1 = ProjectorSpec::new(1.0, random_unit(&mut rng, 3))?;
        let s2 = ProjectorSpec::new(2.0, random_unit(&mut rng, 3))?;
        let t = 0.1;
        let p = permute(
            &s1,
            &s2,
            &CurvatureField::zeros(line, 3, t),
            &vacuum_slice(line, 3, 2, t, -I),
            &vacuum_slice(line, 3, 2, t, -2.0 * I),
        )?;
        perm = perm.max(p.mismatch);
        tilde = tilde.max(p.d12.identity_defect).max(p.d12.reality_defect).max(p.d21.identity_defect).max(p.d21.reality_defect);
        let pair = [s1.clone(), s2.clone()];
        pde = pde.max(vmkdv_stencil_residual(|x, t| soliton_point(&pair, x, t), &probe_xs, t, 2.5e-3, 1e-3));
        pde = pde.max(vmkdv_stencil_residual(|x, t| soliton_point(std::slice::from_ref(&s1), x, t), &probe_xs, t, 2.5e-3, 1e-3));
    }
    push(Check::new("permutability", perm, 1e-10), ctx);
    push(Check::new("bt_pde_residual", pde, 1e-5), ctx);

    // Transformation of the evolved soliton, against the exact 2-soliton.
    let (numeric, numeric_tilde) = bt_of_evolved(&history, &sol, 0.5)?;
    tilde = tilde.max(numeric_tilde);
    push(Check::new("bt_numeric_vs_exact", numeric, 1e-6), ctx);
    push(Check::new("tilde_identities", tilde, 1e-8), ctx);

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { samples: n_samples, checks, all_pass })
}

/// Transforms the evolved one-soliton history by a second pole `s2` and
/// compares with the algebraic two-soliton. The numerical frame is seeded
/// with the exact dressed frame at the base point and the constant vector is
/// moved through the first simple element, so both describe the same
/// dressing. Returns the max curvature error and the TildeVector defects.
pub(crate) fn bt_of_evolved(history: &[CurvatureField], first: &ProjectorSpec, s2: f64) -> Result<(f64, f64)> {
    let grid = history[0].grid;
    let dim = first.dimension();
    let c2 = {
        let mut v = vec![0.0; dim];
        v[0] = 0.6;
        v[1] = 0.8;
        v
    };
    let second = ProjectorSpec::new(s2, c2)?;
    let lambda = -I * s2;
    // Exact first-step frame at the base point, at lambda = -i s2.
    let base = peak_index(&history[0]);
    let xb = grid.x(base);
    let t0 = history[0].t;
    let probe = Grid::line(1, xb, 1.0);
    let d1: Dressing = vacuum_multi_soliton(probe, 2, t0, std::slice::from_ref(first))?;
    let eb = d1.frame_at(0, |l| vacuum_frame(dim, 2, xb, t0, l), lambda)?;
    let slices = frame_history(history, 2, lambda, &eb, base)?;
    // Constant vector of the second step as seen by the dressed frame.
    let moved = simple_element_with(first.s, &d1.left[0], lambda)? * DVector::from_vec(second.vector());
    let lead = moved[0];
    let c_moved: Vec<f64> = (1..=dim).map(|i| (moved[i] / lead / I).re).collect();
    let spec2 = ProjectorSpec::normalized(s2, c_moved)?;
    let mut worst: f64 = 0.0;
    let mut defects: f64 = 0.0;
    for (k, slice) in history.iter().zip(&slices) {
        let bt = bt_curvature(slice, k, &spec2)?;
        defects = defects.max(bt.identity_defect).max(bt.reality_defect);
        let exact = vacuum_multi_soliton(grid, 2, k.t, &[first.clone(), second.clone()])?.k;
        worst = worst.max(max_abs_diff(&bt.k.components, &exact.components));
    }
    Ok((worst, defects))
}

pub(crate) fn cmd_verify(ctx: &Context) -> Result<i32> {
    let report = run_suite(ctx)?;
    let dir = ctx.out.join("verify");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    if !ctx.quiet {
        println!("{} checks, {} failed; report in {}", report.checks.len(), failed, dir.display());
    }
    Ok(if report.all_pass { 0 } else { 1 })
}
