//! Property tests for the algebraic and structural invariants.

use airy_flow::backlund::{bt_curvature, projector, projector_condition_residual, vacuum_slice, ProjectorSpec};
use airy_flow::diffpoly::{compute_lax_coefficients, rational, DiffPoly, JetVar, Monomial};
use airy_flow::frames::{build_parallel_frame, gauge_rotate, GridCurve, Tolerances};
use airy_flow::grid::{CurvatureField, Grid};
use airy_flow::hamiltonian::{evaluate_f, poisson_bracket};
use airy_flow::lax::integrate_frame_x;
use airy_flow::numerics::{CMatrix, RMatrix};
use airy_flow::vmkdv::{evolve, random_smooth_field, rhs, vmkdv_rhs_direct, FlowSpec};
use num_complex::Complex64;
use proptest::prelude::*;

const DIM: usize = 3;

/// Up to four terms, each a product of up to three jets of order <= 3.
fn poly() -> impl Strategy<Value = DiffPoly> {
    let term = (prop::collection::vec((1..DIM, 0usize..4), 1..4), -5i64..=5, 1i64..=4);
    prop::collection::vec(term, 0..5).prop_map(|terms| {
        let mut p = DiffPoly::zero(DIM);
        for (vars, num, den) in terms {
            let m = vars.into_iter().fold(Monomial::one(), |m, (c, o)| m.mul(&Monomial::var(JetVar::new(c, o))));
            p.add_term(m, rational(num, den));
        }
        p
    })
}

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.1).then(|| v.into_iter().map(|x| x / norm).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws_hold(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn no_zero_coefficients_are_stored(a in poly(), b in poly()) {
        for p in [&a * &b, &a - &b, (&a + &b).derivative()] {
            prop_assert!(p.terms().all(|(_, c)| *c != rational(0, 1)));
        }
    }

    #[test]
    fn derivative_obeys_leibniz(a in poly(), b in poly()) {
        prop_assert_eq!((&a * &b).derivative(), &(&a.derivative() * &b) + &(&a * &b.derivative()));
    }

    #[test]
    fn integration_inverts_differentiation(a in poly()) {
        let constant = a.coefficient(&Monomial::one());
        let expected = &a - &DiffPoly::constant(DIM, constant);
        prop_assert_eq!(a.derivative().integrate().unwrap(), expected);
    }

    #[test]
    fn text_round_trips(a in poly()) {
        prop_assert_eq!(DiffPoly::parse(DIM, &a.to_string()).unwrap(), a);
    }

    #[test]
    fn projector_is_a_rank_one_null_projector(s in 0.2f64..3.0, c in prop::collection::vec(-1.0f64..1.0, 3)) {
        if let Some(c) = unit(c) {
            let spec = ProjectorSpec::new(s, c).unwrap();
            prop_assert!(projector_condition_residual(&projector(&spec)) < 1e-12);
        }
    }

    #[test]
    fn vacuum_transformation_is_a_sech_profile(s in 0.3f64..2.5, t in -1.0f64..1.0) {
        let grid = Grid::line(201, -8.0, 0.08);
        let spec = ProjectorSpec::new(s, vec![0.0, -1.0]).unwrap();
        let out = bt_curvature(&vacuum_slice(grid, 2, 2, t, Complex64::new(0.0, -s)), &CurvatureField::zeros(grid, 2, t), &spec).unwrap();
        for (i, x) in grid.xs().into_iter().enumerate() {
            let exact = -2.0 * s / (s * x - s.powi(3) * t).cosh();
            prop_assert!((out.k.components[0][i] - exact).abs() < 1e-10);
        }
        prop_assert!(out.identity_defect < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectral_frames_are_complex_orthogonal(seed in any::<u64>(), re in -1.5f64..1.5, im in -1.0f64..1.0) {
        let grid = Grid::periodic(256, -10.0, 20.0);
        let k = random_smooth_field(grid, 3, seed, 4, 0.6);
        let e = integrate_frame_x(&k, Complex64::new(re, im), &CMatrix::identity(4, 4)).unwrap();
        prop_assert!(e.orthogonality_residual() < 1e-8);
    }

    #[test]
    fn parallel_frames_stay_orthonormal_under_gauge(r in 0.5f64..3.0, pitch in -1.0f64..1.0, angle in -3.0f64..3.0) {
        let tol = Tolerances::default();
        let c = (r * r + pitch * pitch).sqrt();
        let grid = Grid::line(400, -10.0, 0.05);
        let curve = GridCurve::from_fn(grid, |x| vec![r * (x / c).cos(), r * (x / c).sin(), pitch * x / c], &tol).unwrap();
        let frame = build_parallel_frame(&curve, None, &tol).unwrap();
        prop_assert!(frame.orthogonality_residual() < 1e-8);
        let rot = RMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()]);
        let turned = gauge_rotate(&frame, &rot, &tol).unwrap();
        prop_assert!(turned.orthogonality_residual() < 1e-8);
        let norm = |f: &CurvatureField| f.components[0].iter().zip(&f.components[1]).map(|(x, y)| x * x + y * y).collect::<Vec<_>>();
        for (p, q) in norm(&frame.curvature_field(0.0)).iter().zip(norm(&turned.curvature_field(0.0)).iter()) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn hierarchy_rhs_matches_direct_vmkdv(seed in any::<u64>()) {
        let k = random_smooth_field(Grid::periodic(128, 0.0, 2.0 * std::f64::consts::PI), 3, seed, 4, 0.8);
        let a = rhs(2, &k).unwrap();
        let b = vmkdv_rhs_direct(&k);
        let worst = a.iter().zip(&b).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
        prop_assert!(worst < 1e-9);
    }

    #[test]
    fn first_flows_are_conserved_and_commute(seed in any::<u64>()) {
        let grid = Grid::periodic(128, 0.0, 2.0 * std::f64::consts::PI);
        let k0 = random_smooth_field(grid, 3, seed, 3, 0.5);
        let run = evolve(&k0, &FlowSpec { dt: 2e-3, ..FlowSpec::default() }, 0.05).unwrap();
        for j in 1..=2 {
            let (a, b) = (evaluate_f(j, &k0).unwrap(), evaluate_f(j, &run.final_state).unwrap());
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0));
        }
        prop_assert!(poisson_bracket(1, 2, &k0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn lax_coefficients_have_exactly_skew_xi(n in 2usize..5) {
        for q in compute_lax_coefficients(n, 4).unwrap() {
            if let Some(xi) = q.xi() {
                for i in 0..xi.len() {
                    prop_assert!(xi[i][i].is_zero());
                    for j in 0..xi.len() {
                        prop_assert_eq!(&xi[i][j], &-&xi[j][i]);
                    }
                }
            }
        }
    }
}
