//! FFT-based operators on a uniform periodic grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transforms and Fourier multipliers for `len` samples on a
/// box of the given physical length.
#[derive(Clone)]
pub struct Spectral {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("len", &self.len).finish()
    }
}

impl Spectral {
    pub fn new(len: usize, box_length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let base = 2.0 * PI / box_length;
        let wavenumbers = (0..len)
            .map(|m| {
                let signed = if m <= len / 2 { m as f64 } else { m as f64 - len as f64 };
                signed * base
            })
            .collect();
        Spectral { len, forward, inverse, wavenumbers }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Index of the unpaired Nyquist mode, if the length is even.
    pub fn nyquist(&self) -> Option<usize> {
        self.len.is_multiple_of(2).then_some(self.len / 2)
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, normalized, returning the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Fourier symbol `(i xi)^order`, with the Nyquist mode removed for odd orders.
    pub fn derivative_symbol(&self, order: usize) -> Vec<Complex64> {
        let nyq = self.nyquist();
        self.wavenumbers
            .iter()
            .enumerate()
            .map(
                |(m, &xi)| {
                    if order % 2 == 1 && Some(m) == nyq {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, xi).powu(order as u32)
                    }
                },
            )
            .collect()
    }

    pub fn derivative_of_coeffs(&self, coeffs: &[Complex64], order: usize) -> Vec<f64> {
        if order == 0 {
            return self.inverse(coeffs);
        }
        let symbol = self.derivative_symbol(order);
        let spec: Vec<Complex64> = coeffs.iter().zip(&symbol).map(|(c, s)| c * s).collect();
        self.inverse(&spec)
    }

    pub fn derivative(&self, values: &[f64], order: usize) -> Vec<f64> {
        if order == 0 {
            return values.to_vec();
        }
        self.derivative_of_coeffs(&self.forward(values), order)
    }

    /// Zero-mean antiderivative. The mean of `values` is discarded; callers
    /// that care check it first.
    pub fn antiderivative(&self, values: &[f64]) -> Vec<f64> {
        let nyq = self.nyquist();
        let spec: Vec<Complex64> = self
            .forward(values)
            .iter()
            .zip(&self.wavenumbers)
            .enumerate()
            .map(|(m, (c, &xi))| if m == 0 || Some(m) == nyq { Complex64::new(0.0, 0.0) } else { c / Complex64::new(0.0, xi) })
            .collect();
        self.inverse(&spec)
    }

    /// Mask that keeps the lowest two thirds of the resolved modes.
    pub fn two_thirds_mask(&self) -> Vec<f64> {
        let cutoff = self.len as f64 / 3.0;
        (0..self.len)
            .map(|m| {
                let signed = if m <= self.len / 2 { m as f64 } else { self.len as f64 - m as f64 };
                if signed < cutoff && Some(m) != self.nyquist() {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}
