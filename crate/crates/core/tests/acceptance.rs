//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Built with `harness = false` so the lines appear in plain `cargo test`
//! output.

use std::time::Instant;

use airy_flow::backlund::{
    bt_curvature, bt_curve, permute, simple_element_with, vacuum_frame, vacuum_multi_soliton, vacuum_slice, ProjectorSpec,
};
use airy_flow::diffpoly::{compute_lax_coefficients, dot, rational, DiffPoly};
use airy_flow::frames::{FrameField, GridCurve, Tolerances};
use airy_flow::grid::{CurvatureField, Grid};
use airy_flow::hamiltonian::{conserved_log, pairing, relative_drift, Hamiltonians};
use airy_flow::lax::{frame_history, integrate_frame_x, reconstruct_curve, zero_curvature_residual};
use airy_flow::numerics::{CMatrix, RMatrix};
use airy_flow::vmkdv::{self, evolve, random_smooth_field, FlowSpec};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

struct Outcome {
    id: usize,
    name: &'static str,
    detail: String,
    pass: bool,
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn history(k0: &CurvatureField, dt: f64, times: Vec<f64>, t_final: f64) -> Vec<CurvatureField> {
    let spec = FlowSpec { dt, snapshot_times: times, ..FlowSpec::default() };
    let run = evolve(k0, &spec, t_final).expect("evolution");
    std::iter::once(k0.clone()).chain(run.snapshots).collect()
}

fn scaled(p: &DiffPoly, num: i64, den: i64) -> DiffPoly {
    p.scale(&rational(num, den))
}

fn recursion_fixtures() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for n in 2..=4 {
        let qs = compute_lax_coefficients(n, 4).expect("recursion");
        let k = DiffPoly::jet_vector(n, 0);
        let kx = DiffPoly::jet_vector(n, 1);
        let kxx = DiffPoly::jet_vector(n, 2);
        let kxxx = DiffPoly::jet_vector(n, 3);
        let nk = DiffPoly::norm_squared(n);
        let m = n - 1;

        let mut check = |label: String, got: &DiffPoly, want: &DiffPoly| {
            if got != want {
                mismatches.push(label);
            }
        };
        // Q_0
        for i in 0..m {
            check(format!("n={n} z0[{i}]"), &qs[0].z().unwrap()[i], &k[i]);
            for j in 0..m {
                check(format!("n={n} xi0[{i}][{j}]"), &qs[0].xi().unwrap()[i][j], &DiffPoly::zero(n));
            }
        }
        // Q_1
        check(format!("n={n} y1"), qs[1].y().unwrap(), &scaled(&nk, -1, 2));
        for i in 0..m {
            check(format!("n={n} eta1[{i}]"), &qs[1].eta().unwrap()[i], &-&kx[i]);
        }
        // Q_2
        for i in 0..m {
            let want = -(&kxx[i] + &(&scaled(&nk, 1, 2) * &k[i]));
            check(format!("n={n} z2[{i}]"), &qs[2].z().unwrap()[i], &want);
            for j in 0..m {
                let want = &(&kx[i] * &k[j]) - &(&k[i] * &kx[j]);
                check(format!("n={n} xi2[{i}][{j}]"), &qs[2].xi().unwrap()[i][j], &want);
            }
        }
        // Q_3
        let y3 = &(&dot(&k, &kxx) - &scaled(&dot(&kx, &kx), 1, 2)) + &scaled(&(&nk * &nk), 3, 8);
        check(format!("n={n} y3"), qs[3].y().unwrap(), &y3);
        for i in 0..m {
            let want = &kxxx[i] + &(&scaled(&nk, 3, 2) * &kx[i]);
            check(format!("n={n} eta3[{i}]"), &qs[3].eta().unwrap()[i], &want);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 1,
        name: "recursion fixtures",
        detail: format!("{} mismatching entries {:?}, {secs:.2} s (limit 1 s)", mismatches.len(), mismatches.first()),
        pass: mismatches.is_empty() && secs < 1.0,
    }
}

fn soliton_oracle() -> Outcome {
    let start = Instant::now();
    let length = 80.0 * std::f64::consts::PI;
    let grid = Grid::periodic(4096, -0.5 * length, length);
    let k0 = CurvatureField::from_fn(grid, 2, 0.0, |x| vec![-2.0 * sech(x)]);
    let spec = FlowSpec { dt: 1e-4, ..FlowSpec::default() };
    let run = evolve(&k0, &spec, 0.5).expect("evolution");
    let k = &run.final_state;
    let err = grid.xs().iter().enumerate().map(|(i, &x)| (k.components[0][i] + 2.0 * sech(x - 0.5)).abs()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 2,
        name: "soliton PDE oracle",
        detail: format!("max error {err:.3e} at t = {} (tol 1e-6), {secs:.1} s (limit 60 s)", k.t),
        pass: err < 1e-6 && secs < 60.0,
    }
}

fn bt_vacuum() -> (Outcome, f64) {
    let start = Instant::now();
    let grid = Grid::line(801, -20.0, 0.05);
    let mut err: f64 = 0.0;
    let mut tilde: f64 = 0.0;
    for s in [0.5, 1.0, 2.0] {
        for t in [0.0, 0.3] {
            let spec = ProjectorSpec::new(s, vec![0.0, -1.0]).unwrap();
            let bt = bt_curvature(&vacuum_slice(grid, 2, 2, t, -I * s), &CurvatureField::zeros(grid, 2, t), &spec).expect("bt");
            tilde = tilde.max(bt.identity_defect).max(bt.reality_defect);
            for (i, x) in grid.xs().into_iter().enumerate() {
                err = err.max((bt.k.components[0][i] + 2.0 * s * sech(s * x - s.powi(3) * t)).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        Outcome {
            id: 3,
            name: "transformation of the vacuum",
            detail: format!("max error {err:.3e} (tol 1e-10), {secs:.2} s (limit 1 s)"),
            pass: err < 1e-10 && secs < 1.0,
        },
        tilde,
    )
}

/// Closed-form transformed line `(x - (2/s) tanh d, (2/s) sech d - 2/s)`,
/// `d = s x - s^3 t`.
fn bi1(s: f64, x: f64, t: f64) -> [f64; 2] {
    let d = s * x - s.powi(3) * t;
    [x - 2.0 / s * d.tanh(), 2.0 / s * sech(d) - 2.0 / s]
}

/// Runs the curve transformation of the straight line. The literal output
/// differs from `bi1` by `gamma -> -gamma - (0, 2/s)`, `g -> -g`.
fn curve_bt() -> (Outcome, f64, f64) {
    let tol = Tolerances::default();
    let grid = Grid::line(401, -10.0, 0.05);
    let (mut curve_err, mut frame_err, mut selfsim, mut tilde, mut orth): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let line = GridCurve::from_fn(grid, |x| vec![x, 0.0], &tol).unwrap();
    let flat = FrameField::from_parts(vec![RMatrix::identity(2, 2); grid.len], vec![vec![0.0]; grid.len], grid);
    let run = |s: f64, t: f64| {
        let spec = ProjectorSpec::new(s, vec![0.0, 1.0]).unwrap();
        bt_curve(&line, &flat, &vacuum_slice(grid, 2, 2, t, -I * s), &CurvatureField::zeros(grid, 2, t), &spec, &tol).expect("curve bt")
    };
    let moved = |s: f64, p: &[f64]| [-p[0], -p[1] - 2.0 / s];
    for s in [0.5, 1.0, 2.0] {
        for t in [0.0, 0.7] {
            let out = run(s, t);
            tilde = tilde.max(out.bt.identity_defect).max(out.bt.reality_defect);
            orth = orth.max(out.frame.orthogonality_residual());
            for (i, x) in grid.xs().into_iter().enumerate() {
                let m = moved(s, &out.curve.points()[i]);
                let b = bi1(s, x, t);
                curve_err = curve_err.max((m[0] - b[0]).abs()).max((m[1] - b[1]).abs());
                if s == 1.0 {
                    let (sc, th) = (sech(x - t), (x - t).tanh());
                    let g = [[1.0 - 2.0 * sc * sc, 2.0 * sc * th], [-2.0 * sc * th, 1.0 - 2.0 * sc * sc]];
                    let f = &out.frame.frames[i];
                    for r in 0..2 {
                        for c in 0..2 {
                            frame_err = frame_err.max((-f[(r, c)] - g[r][c]).abs());
                        }
                    }
                }
            }
        }
    }
    // gamma_1(x, t0) = gamma_1(x - s^2 t0, 0) + (s^2 t0, 0), with s^2 t0 a
    // whole number of samples.
    let (s, t0) = (1.0, 0.7);
    let shift = (s * s * t0 / grid.spacing).round() as usize;
    let (late, early) = (run(s, t0), run(s, 0.0));
    for i in shift..grid.len {
        let a = moved(s, &late.curve.points()[i]);
        let b = moved(s, &early.curve.points()[i - shift]);
        selfsim = selfsim.max((a[0] - b[0] - s * s * t0).abs()).max((a[1] - b[1]).abs());
    }
    (
        Outcome {
            id: 4,
            name: "curve transformation",
            detail: format!("curve {curve_err:.3e}, frame {frame_err:.3e} (tol 1e-10); self-similarity {selfsim:.3e} (tol 1e-8)"),
            pass: curve_err < 1e-10 && frame_err < 1e-10 && selfsim < 1e-8,
        },
        tilde,
        orth,
    )
}

fn gamma_exact(x: f64, t: f64) -> Vec<f64> {
    vec![x - 2.0 * (x - t).tanh(), 2.0 * sech(x - t)]
}

fn frame_exact(x: f64, t: f64) -> RMatrix {
    let (s, th) = (sech(x - t), (x - t).tanh());
    let e1 = [1.0 - 2.0 * s * s, -2.0 * s * th];
    RMatrix::from_row_slice(2, 2, &[e1[0], -e1[1], e1[1], e1[0]])
}

fn reconstruction() -> (Outcome, f64) {
    let tol = Tolerances::default();
    let grid = Grid::periodic(1024, -20.0, 40.0);
    let k0 = CurvatureField::from_fn(grid, 2, 0.0, |x| vec![2.0 * sech(x)]);
    let hist = history(&k0, 1e-3, (1..50).map(|m| m as f64 * 0.01).collect(), 0.5);
    let x0 = grid.origin;
    let trail = reconstruct_curve(&hist, 2, &frame_exact(x0, 0.0), &gamma_exact(x0, 0.0), &tol).expect("reconstruction");
    let mut diffs = Vec::new();
    for (m, c) in trail.curves.iter().enumerate() {
        for (i, p) in c.points().iter().enumerate() {
            let g = gamma_exact(grid.x(i), trail.times[m]);
            diffs.push([p[0] - g[0], p[1] - g[1]]);
        }
    }
    let count = diffs.len() as f64;
    let mean = [diffs.iter().map(|d| d[0]).sum::<f64>() / count, diffs.iter().map(|d| d[1]).sum::<f64>() / count];
    let err = diffs.iter().map(|d| (d[0] - mean[0]).abs().max((d[1] - mean[1]).abs())).fold(0.0, f64::max);
    let arc = trail.arc_length_defect();
    let orth = trail.frames.iter().map(|f| f.orthogonality_residual()).fold(0.0, f64::max);
    (
        Outcome {
            id: 5,
            name: "reconstruction consistency",
            detail: format!("error after translation fit {err:.3e} (tol 1e-5), arc-length defect {arc:.3e} (tol 1e-6)"),
            pass: err < 1e-5 && arc < 1e-6,
        },
        orth,
    )
}

fn conservation() -> Outcome {
    let grid = Grid::periodic(1024, -20.0, 40.0);
    let times: Vec<f64> = (1..10).map(|m| m as f64 * 0.05).collect();
    let soliton = vmkdv::soliton_field(grid, 1.0, &[1.0], 0.0);
    let random = random_smooth_field(grid, 3, 11, 6, 0.5);
    let mut worst = [0.0f64; 2];
    let mut lines = Vec::new();
    for (label, k0) in [("soliton", &soliton), ("random", &random)] {
        let d = relative_drift(&conserved_log(&history(k0, 1e-3, times.clone(), 0.5)).expect("log"));
        worst[0] = worst[0].max(d[0]);
        worst[1] = worst[1].max(d[1]);
        lines.push(format!("{label}: F1 {:.2e}, F3 {:.2e}", d[0], d[1]));
    }
    Outcome {
        id: 6,
        name: "conservation",
        detail: format!("{} (tol 1e-8 / 1e-6)", lines.join("; ")),
        pass: worst[0] < 1e-8 && worst[1] < 1e-6,
    }
}

fn hamiltonian() -> Outcome {
    let grid = Grid::periodic(256, 0.0, 2.0 * std::f64::consts::PI);
    let hams = Hamiltonians::new(3, 3).unwrap();
    let (mut ident, mut grad): (f64, f64) = (0.0, 0.0);
    for trial in 0..20u64 {
        let k = random_smooth_field(grid, 3, 100 + trial, 4, 0.8);
        let dir = random_smooth_field(grid, 3, 500 + trial, 4, 1.0);
        for j in 1..=3 {
            ident = ident.max(max_diff(&hams.hamiltonian_field(j, &k).unwrap(), &vmkdv::rhs(j, &k).unwrap()));
            let eps = 1e-4;
            let shifted = |sign: f64| {
                let comps = k
                    .components
                    .iter()
                    .zip(&dir.components)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + sign * eps * y).collect())
                    .collect();
                CurvatureField::new(grid, comps, 0.0)
            };
            let fd = (hams.evaluate(j, &shifted(1.0)).unwrap() - hams.evaluate(j, &shifted(-1.0)).unwrap()) / (2.0 * eps);
            grad = grad.max((fd - pairing(&hams.gradient(j, &k).unwrap(), &dir.components, grid.spacing)).abs());
        }
    }
    Outcome {
        id: 7,
        name: "Hamiltonian identity",
        detail: format!("max |Xi(grad F) - rhs| {ident:.3e} (tol 1e-7), gradient vs central difference {grad:.3e} (tol 1e-6)"),
        pass: ident < 1e-7 && grad < 1e-6,
    }
}

/// `k_t + k_xxx + 3/2 |k|^2 k_x` by fourth-order stencils at a few points.
fn stencil_residual(specs: &[ProjectorSpec], t: f64) -> f64 {
    let at = |x: f64, t: f64| vacuum_multi_soliton(Grid::line(1, x, 1.0), 2, t, specs).unwrap().k.at(0);
    let (h, dt) = (2.5e-3, 1e-3);
    let mut worst: f64 = 0.0;
    for x in [-3.0, -1.0, -0.2, 0.0, 0.5, 1.3, 2.5] {
        let ks: Vec<Vec<f64>> = (-3..=3).map(|m| at(x + m as f64 * h, t)).collect();
        let kt: Vec<Vec<f64>> = [-2.0, -1.0, 1.0, 2.0].iter().map(|m| at(x, t + m * dt)).collect();
        let norm2: f64 = ks[3].iter().map(|v| v * v).sum();
        for c in 0..ks[3].len() {
            let f = |m: usize| ks[m][c];
            let kx = (f(1) - 8.0 * f(2) + 8.0 * f(4) - f(5)) / (12.0 * h);
            let kxxx = (f(0) - 8.0 * f(1) + 13.0 * f(2) - 13.0 * f(4) + 8.0 * f(5) - f(6)) / (8.0 * h.powi(3));
            let ktv = (kt[0][c] - 8.0 * kt[1][c] + 8.0 * kt[2][c] - kt[3][c]) / (12.0 * dt);
            worst = worst.max((ktv + kxxx + 1.5 * norm2 * kx).abs());
        }
    }
    worst
}

fn permutability() -> (Outcome, f64) {
    let grid = Grid::line(401, -10.0, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut mismatch, mut residual, mut tilde): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let t = 0.1;
    for _ in 0..5 {
        let s1 = ProjectorSpec::new(1.0, unit(&mut rng, 3)).unwrap();
        let s2 = ProjectorSpec::new(2.0, unit(&mut rng, 3)).unwrap();
        let p =
            permute(&s1, &s2, &CurvatureField::zeros(grid, 3, t), &vacuum_slice(grid, 3, 2, t, -I), &vacuum_slice(grid, 3, 2, t, -2.0 * I))
                .expect("permutation");
        mismatch = mismatch.max(p.mismatch);
        for d in [&p.d12, &p.d21] {
            tilde = tilde.max(d.identity_defect).max(d.reality_defect);
        }
        residual = residual.max(stencil_residual(&[s1, s2], t));
    }
    (
        Outcome {
            id: 8,
            name: "permutability",
            detail: format!("max |u12 - u21| {mismatch:.3e} (tol 1e-10), stencil residual {residual:.3e} (tol 1e-5)"),
            pass: mismatch < 1e-10 && residual < 1e-5,
        },
        tilde,
    )
}

fn zero_curvature() -> Outcome {
    let grid = Grid::line(2048, -20.0, 40.0 / 2047.0);
    let exact: Vec<CurvatureField> = (0..5)
        .map(|m| {
            let t = 0.25 + m as f64 * 1e-4;
            CurvatureField::from_fn(grid, 2, t, |x| vec![-2.0 * sech(x - t)])
        })
        .collect();
    let residual = zero_curvature_residual(&exact, 2).unwrap().max;
    let vacuum: Vec<CurvatureField> = (0..5).map(|m| CurvatureField::zeros(grid, 3, m as f64 * 1e-2)).collect();
    let zero = zero_curvature_residual(&vacuum, 2).unwrap().max;
    Outcome {
        id: 9,
        name: "zero curvature",
        detail: format!("exact soliton {residual:.3e} (tol 1e-5, N = 2048, dt = 1e-4), vacuum {zero:e} (must be 0)"),
        pass: residual < 1e-5 && zero == 0.0,
    }
}

/// Transforms an evolved soliton with a second pole, seeding the spectral
/// frame at the soliton peak with the exact dressed frame; returns the error
/// against the algebraic 2-soliton and the worst TildeVector defect.
fn numeric_bt() -> (f64, f64) {
    let grid = Grid::periodic(1024, -20.0, 40.0);
    let first = ProjectorSpec::new(1.0, vec![0.0, -1.0]).unwrap();
    let second = ProjectorSpec::new(0.5, vec![0.6, 0.8]).unwrap();
    let k0 = vacuum_multi_soliton(grid, 2, 0.0, std::slice::from_ref(&first)).unwrap().k;
    let hist = history(&k0, 1e-3, (1..20).map(|m| m as f64 * 0.025).collect(), 0.5);
    let lambda = -I * second.s;
    let base = grid.len / 2;
    let xb = grid.x(base);
    let d1 = vacuum_multi_soliton(Grid::line(1, xb, 1.0), 2, 0.0, std::slice::from_ref(&first)).unwrap();
    let seed = d1.frame_at(0, |l| vacuum_frame(2, 2, xb, 0.0, l), lambda).unwrap();
    let slices = frame_history(&hist, 2, lambda, &seed, base).expect("frames");
    let moved = simple_element_with(first.s, &d1.left[0], lambda).unwrap() * DVector::from_vec(second.vector());
    let c: Vec<f64> = (1..=2).map(|i| (moved[i] / moved[0] / I).re).collect();
    let spec = ProjectorSpec::normalized(second.s, c).unwrap();
    let (mut err, mut tilde): (f64, f64) = (0.0, 0.0);
    for (k, slice) in hist.iter().zip(&slices) {
        let bt = bt_curvature(slice, k, &spec).expect("bt");
        tilde = tilde.max(bt.identity_defect).max(bt.reality_defect);
        let exact = vacuum_multi_soliton(grid, 2, k.t, &[first.clone(), second.clone()]).unwrap().k;
        err = err.max(max_diff(&bt.k.components, &exact.components));
    }
    (err, tilde)
}

fn structure(orth: f64, tilde_runs: f64) -> Outcome {
    let grid = Grid::periodic(512, -20.0, 40.0);
    let k = random_smooth_field(grid, 3, 3, 5, 0.7);
    let id = CMatrix::identity(4, 4);
    let mut reality: f64 = 0.0;
    for lam in [Complex64::new(0.7, 0.3), Complex64::new(-0.4, 1.1), Complex64::new(1.5, 0.0)] {
        let e = integrate_frame_x(&k, lam, &id).unwrap();
        reality = reality
            .max(e.orthogonality_residual())
            .max(e.conjugate_reality_residual(&integrate_frame_x(&k, lam.conj(), &id).unwrap()).unwrap())
            .max(e.involution_reality_residual(&integrate_frame_x(&k, -lam, &id).unwrap()).unwrap());
    }
    let (bt_err, bt_tilde) = numeric_bt();
    let tilde = tilde_runs.max(bt_tilde);
    Outcome {
        id: 10,
        name: "structural properties",
        detail: format!(
            "frame orthogonality {orth:.3e}, reality {reality:.3e}, TildeVector identities {tilde:.3e} (tol 1e-8); evolved-soliton transformation vs closed form {bt_err:.3e}"
        ),
        pass: orth < 1e-8 && reality < 1e-8 && tilde < 1e-8,
    }
}

fn main() {
    let mut outcomes = vec![recursion_fixtures(), soliton_oracle()];
    let (c3, tilde3) = bt_vacuum();
    outcomes.push(c3);
    let (c4, tilde4, orth4) = curve_bt();
    outcomes.push(c4);
    let (c5, orth5) = reconstruction();
    outcomes.push(c5);
    outcomes.push(conservation());
    outcomes.push(hamiltonian());
    let (c8, tilde8) = permutability();
    outcomes.push(c8);
    outcomes.push(zero_curvature());
    outcomes.push(structure(orth4.max(orth5), tilde3.max(tilde4).max(tilde8)));

    for o in &outcomes {
        println!("{} criterion {:>2} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
