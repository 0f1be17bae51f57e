//! Finite-difference stencils on uniform grids.
//!
//! Weights come from Fornberg's recursion, so any derivative order and any
//! (possibly one-sided) stencil placement is handled by the same code.

/// Fornberg weights for derivatives `0..=max_order` at `z` using the nodes `x`.
///
/// `result[m][j]` multiplies `f(x[j])` in the approximation of `f^{(m)}(z)`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Number of points in a centered stencil for derivative `order` with the
/// given (even) accuracy.
pub fn centered_width(order: usize, accuracy: usize) -> usize {
    2 * order.div_ceil(2) - 1 + accuracy
}

/// Derivative of `order` of uniformly sampled `values` with spacing `h`.
///
/// Periodic data wraps around; otherwise the stencil window is shifted
/// inward near the ends (same number of points, one-sided placement).
pub fn derivative(values: &[f64], h: f64, order: usize, accuracy: usize, periodic: bool) -> Vec<f64> {
    let n = values.len();
    if order == 0 {
        return values.to_vec();
    }
    let width = centered_width(order, accuracy).min(n);
    let half = (width / 2) as isize;
    let scale = h.powi(order as i32);

    let offsets: Vec<f64> = (-half..=half).map(|o| o as f64).collect();
    let centered = fornberg_weights(0.0, &offsets[..width], order)[order].clone();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ii = i as isize;
        if periodic {
            let mut acc = 0.0;
            for (w, o) in centered.iter().zip(-half..=half) {
                let idx = (ii + o).rem_euclid(n as isize) as usize;
                acc += w * values[idx];
            }
            out[i] = acc / scale;
            continue;
        }
        let start = (ii - half).clamp(0, n as isize - width as isize) as usize;
        let acc = if start as isize == ii - half {
            centered.iter().enumerate().map(|(j, w)| w * values[start + j]).sum::<f64>()
        } else {
            let nodes: Vec<f64> = (0..width).map(|j| (start + j) as f64 - i as f64).collect();
            let w = &fornberg_weights(0.0, &nodes, order)[order];
            w.iter().enumerate().map(|(j, w)| w * values[start + j]).sum::<f64>()
        };
        out[i] = acc / scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_second_derivative_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_sided_stencils_are_accurate_near_ends() {
        let h = 0.01;
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let d3 = derivative(&f, h, 3, 6, false);
        for (x, d) in xs.iter().zip(&d3) {
            assert!((d + x.cos()).abs() < 1e-6, "x = {x}: {d}");
        }
    }

    #[test]
    fn periodic_wraps() {
        let n = 64;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
        let d = derivative(&f, h, 1, 6, true);
        for i in 0..n {
            assert!((d[i] + (i as f64 * h).sin()).abs() < 1e-6);
        }
    }
}
