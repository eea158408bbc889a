//! Periodic Fourier helpers shared by the pseudo-spectral solvers.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse transforms of one length.
pub struct Fourier1D {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fourier1D {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward_complex(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse transform, normalised, keeping the real part.
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.iter().map(|c| c.re * scale).collect()
    }

    pub fn inverse_complex(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }
}

/// Angular wavenumbers in FFT order for a period of `length`.
pub fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let signed = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
            base * signed as f64
        })
        .collect()
}

/// Wavenumbers for odd-order derivatives: the Nyquist mode of an even-length
/// grid has no consistent real derivative and is zeroed.
pub fn derivative_wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let mut k = wavenumbers(n, length);
    if n.is_multiple_of(2) {
        k[n / 2] = 0.0;
    }
    k
}

/// Two-thirds rule mask: keeps modes with |index| < n/3.
pub fn dealias_mask(n: usize) -> Vec<bool> {
    (0..n)
        .map(|j| {
            let signed = if j <= n / 2 { j } else { n - j };
            3 * signed < n
        })
        .collect()
}

/// Band-limited translation: returns `u(x - shift)` sampled on the same
/// periodic grid.
pub fn fourier_shift(values: &[f64], shift: f64, length: f64) -> Vec<f64> {
    let n = values.len();
    let fft = Fourier1D::new(n);
    let mut coeffs = fft.forward(values);
    let k = derivative_wavenumbers(n, length);
    for (c, &kj) in coeffs.iter_mut().zip(&k) {
        *c *= Complex64::from_polar(1.0, -kj * shift);
    }
    if n.is_multiple_of(2) {
        // The Nyquist mode of a real signal is cos(π x / dx); shifting it
        // by a non-integer number of cells leaves the representable space.
        let kn = PI * n as f64 / length;
        coeffs[n / 2] *= (kn * shift).cos();
    }
    fft.inverse(coeffs)
}

/// Row/column transforms on an `ny × nx` row-major array.
pub struct Fourier2D {
    nx: usize,
    ny: usize,
    fx: Fourier1D,
    fy: Fourier1D,
}

impl Fourier2D {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny, fx: Fourier1D::new(nx), fy: Fourier1D::new(ny) }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        buf
    }

    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut coeffs, true);
        coeffs.iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        for row in buf.chunks_mut(self.nx) {
            if inverse {
                self.fx.inverse_complex(row);
            } else {
                self.fx.forward_complex(row);
            }
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.ny];
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                col[iy] = buf[iy * self.nx + ix];
            }
            if inverse {
                self.fy.inverse_complex(&mut col);
            } else {
                self.fy.forward_complex(&mut col);
            }
            for iy in 0..self.ny {
                buf[iy * self.nx + ix] = col[iy];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = Fourier1D::new(16);
        let x: Vec<f64> = (0..16).map(|i| (i as f64 * 0.7).sin() + 0.1 * i as f64).collect();
        let back = f.inverse(f.forward(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_of_a_sine_is_exact() {
        let n = 32;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let u: Vec<f64> = xs.iter().map(|x| (2.0 * PI * x).sin()).collect();
        let shifted = fourier_shift(&u, 0.123, 1.0);
        for (x, s) in xs.iter().zip(&shifted) {
            assert!((s - (2.0 * PI * (x - 0.123)).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let m = dealias_mask(12);
        assert!(m[0] && m[3] && !m[4] && !m[6] && !m[8] && m[9]);
    }
}
