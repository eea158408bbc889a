//! Initial conditions and problem data generators.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pde::grid::{Grid1D, Grid2D};

/// Truncated random Fourier series on a periodic grid:
/// `Σ_{k=1..modes} (amplitude / k) (a_k sin(2πkx/L) + b_k cos(2πkx/L))`
/// with `a_k, b_k ~ U(-1, 1)`.
pub fn random_fourier(grid: &Grid1D, modes: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> =
        (0..modes).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let length = grid.length();
    grid.points()
        .iter()
        .map(|&x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let k = (i + 1) as f64;
                    let phase = 2.0 * PI * k * (x - grid.x_min) / length;
                    amplitude / k * (a * phase.sin() + b * phase.cos())
                })
                .sum()
        })
        .collect()
}

/// KdV soliton `3c sech²(√c (x - x0) / 2)` travelling at speed `c`.
pub fn kdv_soliton(grid: &Grid1D, speed: f64, center: f64) -> Vec<f64> {
    let half_width = 0.5 * speed.sqrt();
    grid.points()
        .iter()
        .map(|&x| {
            let s = 1.0 / (half_width * (x - center)).cosh();
            3.0 * speed * s * s
        })
        .collect()
}

/// Taylor–Green vorticity `2k sin(kx) sin(ky)` with velocity
/// `(sin kx cos ky, -cos kx sin ky)`.
pub fn taylor_green_vorticity(grid: &Grid2D, wavenumber: f64) -> Vec<f64> {
    let xs = grid.x.points();
    let ys = grid.y.points();
    let mut out = Vec::with_capacity(grid.len());
    for &y in &ys {
        for &x in &xs {
            out.push(2.0 * wavenumber * (wavenumber * x).sin() * (wavenumber * y).sin());
        }
    }
    out
}

/// Smooth random vorticity built from low Fourier modes `1 <= |kx|, |ky| <= modes`.
pub fn random_vorticity(grid: &Grid2D, modes: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for kx in 1..=modes {
        for ky in 1..=modes {
            let a: f64 = rng.random_range(-1.0..1.0);
            let px: f64 = rng.random_range(0.0..2.0 * PI);
            let py: f64 = rng.random_range(0.0..2.0 * PI);
            terms.push((kx as f64, ky as f64, a, px, py));
        }
    }
    let (lx, ly) = (grid.x.length(), grid.y.length());
    let xs = grid.x.points();
    let ys = grid.y.points();
    let mut out = Vec::with_capacity(grid.len());
    for &y in &ys {
        for &x in &xs {
            let w: f64 = terms
                .iter()
                .map(|&(kx, ky, a, px, py)| {
                    a / (kx * kx + ky * ky).sqrt()
                        * (2.0 * PI * kx * x / lx + px).sin()
                        * (2.0 * PI * ky * y / ly + py).sin()
                })
                .sum();
            out.push(amplitude * w);
        }
    }
    out
}

/// Random elliptic data on `[x_min, x_max]`: a coefficient
/// `1 + 0.5 c sin(πx + φ)` at cell faces (positive since |c| ≤ 1) and a
/// smooth random source at the nodes.
pub fn random_elliptic_data(grid: &Grid1D, modes: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.random_range(-1.0..1.0)).collect();
    let length = grid.length();
    let dx = grid.dx();
    let a_faces = (0..grid.nx - 1)
        .map(|i| {
            let x = (grid.point(i) + dx / 2.0 - grid.x_min) / length;
            1.0 + 0.5 * c * (PI * x + phi).sin()
        })
        .collect();
    let f = grid
        .points()
        .iter()
        .map(|&x| {
            let s = (x - grid.x_min) / length;
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a * 10.0 * (PI * (k + 1) as f64 * s).sin())
                .sum()
        })
        .collect();
    (a_faces, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_ic_is_deterministic() {
        let g = Grid1D::periodic(0.0, 1.0, 64).unwrap();
        assert_eq!(random_fourier(&g, 4, 0.5, 3), random_fourier(&g, 4, 0.5, 3));
        assert_ne!(random_fourier(&g, 4, 0.5, 3), random_fourier(&g, 4, 0.5, 4));
        let mean: f64 = random_fourier(&g, 4, 0.5, 3).iter().sum::<f64>() / 64.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn soliton_peak() {
        let g = Grid1D::periodic(0.0, 40.0, 400).unwrap();
        let u = kdv_soliton(&g, 1.0, 20.0);
        assert!((u[200] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn elliptic_coefficient_positive() {
        let g = Grid1D::bounded(0.0, 1.0, 33).unwrap();
        for seed in 0..10 {
            let (a, f) = random_elliptic_data(&g, 3, seed);
            assert!(a.iter().all(|&v| v >= 0.5));
            assert_eq!(f.len(), 33);
        }
    }
}
