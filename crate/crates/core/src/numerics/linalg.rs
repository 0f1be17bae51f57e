//! Small dense-matrix helpers shared by the frame integrators.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().map(|c| c.abs()).fold(0.0, f64::max)
}

/// `max |M^T M - I|`, scaled by `max(1, |M|^2)` so that complex-orthogonal
/// matrices with large entries (imaginary spectral values) are measured
/// relative to their size.
pub fn orthogonality_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let defect = m.transpose() * m - CMatrix::identity(n, n);
    let scale = max_abs(m).powi(2).max(1.0);
    max_abs(&defect) / scale
}

pub fn real_orthogonality_residual(m: &RMatrix) -> f64 {
    let n = m.nrows();
    max_abs_real(&(m.transpose() * m - RMatrix::identity(n, n)))
}

/// One Newton step of the polar projection back onto `M^T M = I`.
pub fn reorthonormalize(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let gram = m.transpose() * m;
    let three = CMatrix::identity(n, n) * Complex64::new(3.0, 0.0);
    m * (three - gram) * Complex64::new(0.5, 0.0)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Two-stage fourth-order Magnus step for the right-multiplied system
/// `M' = M A`: given `A` at the two Gauss nodes of a step of length `h`,
/// returns `exp(Omega)` so that `M(s + h) = M(s) exp(Omega)`.
pub fn magnus4_propagator(a1: &CMatrix, a2: &CMatrix, h: f64) -> CMatrix {
    let sqrt3_12 = 3f64.sqrt() / 12.0;
    let omega = (a1 + a2) * Complex64::new(0.5 * h, 0.0) + commutator(a1, a2) * Complex64::new(sqrt3_12 * h * h, 0.0);
    omega.exp()
}

/// Gauss–Legendre nodes on `[0, 1]` used by [`magnus4_propagator`].
pub const GAUSS_NODES: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// March `M' = M A(s)` over `steps` uniform steps of size `h` from `start`.
///
/// `generator(step, theta)` returns `A` at position `step + theta`.
pub fn magnus_march<F>(start: &CMatrix, steps: usize, h: f64, reorthonormalize_each_step: bool, mut generator: F) -> Vec<CMatrix>
where
    F: FnMut(usize, f64) -> CMatrix,
{
    let mut out = Vec::with_capacity(steps + 1);
    out.push(start.clone());
    let mut current = start.clone();
    for step in 0..steps {
        let a1 = generator(step, GAUSS_NODES[0]);
        let a2 = generator(step, GAUSS_NODES[1]);
        current = &current * magnus4_propagator(&a1, &a2, h);
        if reorthonormalize_each_step {
            current = reorthonormalize(&current);
        }
        out.push(current.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnus_is_exact_for_constant_generators() {
        let mut a = CMatrix::zeros(2, 2);
        a[(1, 0)] = Complex64::new(1.0, 0.0);
        a[(0, 1)] = Complex64::new(-1.0, 0.0);
        let path = magnus_march(&CMatrix::identity(2, 2), 10, 0.1, true, |_, _| a.clone());
        let last = path.last().unwrap();
        assert!((last[(0, 0)].re - 1f64.cos()).abs() < 1e-13);
        assert!((last[(1, 0)].re - 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn magnus_order_on_time_dependent_rotation() {
        // A(s) rotates in two noncommuting planes; compare against a fine run.
        let gen = |s: f64| {
            let mut a = CMatrix::zeros(3, 3);
            let (p, q) = (s.cos(), (2.0 * s).sin());
            a[(1, 0)] = Complex64::new(p, 0.0);
            a[(0, 1)] = Complex64::new(-p, 0.0);
            a[(2, 1)] = Complex64::new(q, 0.0);
            a[(1, 2)] = Complex64::new(-q, 0.0);
            a
        };
        let run = |steps: usize| {
            let h = 2.0 / steps as f64;
            magnus_march(&CMatrix::identity(3, 3), steps, h, false, |i, th| gen((i as f64 + th) * h)).pop().unwrap()
        };
        let reference = run(2000);
        let e1 = max_abs(&(run(20) - &reference));
        let e2 = max_abs(&(run(40) - &reference));
        assert!(e1 / e2 > 14.0, "{}", e1 / e2);
    }
}
