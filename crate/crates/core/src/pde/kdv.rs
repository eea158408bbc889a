use rustfft::num_complex::Complex64;

use crate::error::{shape_err, Error, Result};
use crate::pde::grid::{Grid1D, TimeAxis};
use crate::pde::spectral::{dealias_mask, derivative_wavenumbers, Fourier1D};
use crate::pde::trajectory::{PdeTag, Trajectory1D};

/// Bound on `dt · max|u| · k_max` for the explicit RK4 treatment of the
/// advective term (RK4 reaches about 2.83 on the imaginary axis).
pub const KDV_STABILITY: f64 = 2.5;

fn retained_kmax(grid: &Grid1D) -> f64 {
    let n = grid.nx;
    let k = derivative_wavenumbers(n, grid.length());
    let mask = dealias_mask(n);
    k.iter().zip(&mask).filter(|(_, &m)| m).fold(0.0, |acc, (kj, _)| acc.max(kj.abs()))
}

pub fn kdv_max_step(h: &[f64], grid: &Grid1D) -> f64 {
    let umax = h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let rate = umax * retained_kmax(grid);
    if rate == 0.0 {
        f64::INFINITY
    } else {
        KDV_STABILITY / rate
    }
}

/// Solves `u_t + u u_x + u_xxx = 0` on a periodic grid.
///
/// The stiff dispersive term is integrated exactly in Fourier space; the
/// nonlinear term `-(u²/2)_x` is advanced with RK4 and dealiased by the
/// two-thirds rule.
pub fn solve_kdv_1d(h: &[f64], grid: &Grid1D, times: &TimeAxis) -> Result<Trajectory1D> {
    grid.validate()?;
    times.validate()?;
    if !grid.periodic {
        return Err(Error::InvalidConfig("KdV solver needs a periodic grid".into()));
    }
    let n = grid.nx;
    if h.len() != n {
        return Err(shape_err(format!("initial field has {} values, grid has {n}", h.len())));
    }
    let dt = times.step();
    let limit = kdv_max_step(h, grid);
    if dt > limit {
        return Err(Error::UnstableConfig(format!(
            "KdV step {dt:.3e} exceeds the dispersive stability bound {limit:.3e}"
        )));
    }

    let fft = Fourier1D::new(n);
    let k = derivative_wavenumbers(n, grid.length());
    let mask = dealias_mask(n);
    // û_t = i k³ û for the linear part
    let half: Vec<Complex64> =
        k.iter().map(|kj| Complex64::from_polar(1.0, kj.powi(3) * dt / 2.0)).collect();
    let full: Vec<Complex64> = half.iter().map(|e| e * e).collect();
    // dt · N̂(v) with N(u) = -(u²)_x / 2
    let g: Vec<Complex64> = k
        .iter()
        .zip(&mask)
        .map(|(&kj, &m)| if m { Complex64::new(0.0, -0.5 * dt * kj) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let nonlinear = |v: &[Complex64]| -> Vec<Complex64> {
        let u = fft.inverse(v.to_vec());
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let mut s = fft.forward(&sq);
        for (sj, gj) in s.iter_mut().zip(&g) {
            *sj *= gj;
        }
        s
    };

    let mut v = fft.forward(h);
    let mut out = Vec::with_capacity(n * times.nt);
    out.extend_from_slice(h);
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    for _ in 1..times.nt {
        for _ in 0..times.substeps {
            let a = nonlinear(&v);
            for j in 0..n {
                tmp[j] = half[j] * (v[j] + a[j] / 2.0);
            }
            let b = nonlinear(&tmp);
            for j in 0..n {
                tmp[j] = half[j] * v[j] + b[j] / 2.0;
            }
            let c = nonlinear(&tmp);
            for j in 0..n {
                tmp[j] = full[j] * v[j] + half[j] * c[j];
            }
            let d = nonlinear(&tmp);
            for j in 0..n {
                v[j] = full[j] * v[j] + (full[j] * a[j] + 2.0 * half[j] * (b[j] + c[j]) + d[j]) / 6.0;
            }
        }
        out.extend(fft.inverse(v.clone()));
    }
    Trajectory1D::new(grid.clone(), times.clone(), out, PdeTag::Kdv)
}
