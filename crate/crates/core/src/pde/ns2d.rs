use rustfft::num_complex::Complex64;

use crate::error::{shape_err, Error, Result};
use crate::pde::grid::{Grid2D, TimeAxis};
use crate::pde::spectral::{dealias_mask, derivative_wavenumbers, wavenumbers, Fourier2D};
use crate::pde::trajectory::Trajectory2D;

/// Advective bound `dt · max|u| · k_max` for the RK4 stage.
pub const NS_STABILITY: f64 = 2.5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Spectral operators on one periodic grid.
struct Spectral2D {
    nx: usize,
    ny: usize,
    fft: Fourier2D,
    /// first-derivative wavenumbers (Nyquist zeroed), per flat index
    kx: Vec<f64>,
    ky: Vec<f64>,
    /// |k|² with full wavenumbers
    k2: Vec<f64>,
    dealias: Vec<bool>,
}

impl Spectral2D {
    fn new(grid: &Grid2D) -> Self {
        let (nx, ny) = (grid.x.nx, grid.y.nx);
        let dkx = derivative_wavenumbers(nx, grid.x.length());
        let dky = derivative_wavenumbers(ny, grid.y.length());
        let fkx = wavenumbers(nx, grid.x.length());
        let fky = wavenumbers(ny, grid.y.length());
        let (mx, my) = (dealias_mask(nx), dealias_mask(ny));
        let mut kx = Vec::with_capacity(nx * ny);
        let mut ky = Vec::with_capacity(nx * ny);
        let mut k2 = Vec::with_capacity(nx * ny);
        let mut dealias = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                kx.push(dkx[ix]);
                ky.push(dky[iy]);
                k2.push(fkx[ix] * fkx[ix] + fky[iy] * fky[iy]);
                dealias.push(mx[ix] && my[iy]);
            }
        }
        Self { nx, ny, fft: Fourier2D::new(nx, ny), kx, ky, k2, dealias }
    }

    fn len(&self) -> usize {
        self.nx * self.ny
    }

    /// Streamfunction from vorticity: ∇²ψ = -ω, zero-mean.
    fn streamfunction(&self, w_hat: &[Complex64]) -> Vec<Complex64> {
        w_hat
            .iter()
            .zip(&self.k2)
            .map(|(w, &k2)| if k2 == 0.0 { ZERO } else { w / k2 })
            .collect()
    }

    /// Velocity `(ψ_y, -ψ_x)` in physical space.
    fn velocity(&self, w_hat: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let psi = self.streamfunction(w_hat);
        let u_hat: Vec<Complex64> = psi.iter().zip(&self.ky).map(|(p, &ky)| I * ky * p).collect();
        let v_hat: Vec<Complex64> = psi.iter().zip(&self.kx).map(|(p, &kx)| -I * kx * p).collect();
        (self.fft.inverse(u_hat), self.fft.inverse(v_hat))
    }

    fn dx(&self, f_hat: &[Complex64]) -> Vec<f64> {
        self.fft.inverse(f_hat.iter().zip(&self.kx).map(|(f, &k)| I * k * f).collect())
    }

    fn dy(&self, f_hat: &[Complex64]) -> Vec<f64> {
        self.fft.inverse(f_hat.iter().zip(&self.ky).map(|(f, &k)| I * k * f).collect())
    }

    /// Dealiased `-(u·∇ω)` in spectral space.
    fn advection(&self, w_hat: &[Complex64]) -> Vec<Complex64> {
        let (u, v) = self.velocity(w_hat);
        let wx = self.dx(w_hat);
        let wy = self.dy(w_hat);
        let adv: Vec<f64> = (0..self.len()).map(|i| -(u[i] * wx[i] + v[i] * wy[i])).collect();
        let mut a = self.fft.forward(&adv);
        for (c, &keep) in a.iter_mut().zip(&self.dealias) {
            if !keep {
                *c = ZERO;
            }
        }
        a
    }

    /// Pressure from ∇²p = -∇·((u·∇)u), zero-mean.
    fn pressure(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let u_hat = self.fft.forward(u);
        let v_hat = self.fft.forward(v);
        let (ux, uy) = (self.dx(&u_hat), self.dy(&u_hat));
        let (vx, vy) = (self.dx(&v_hat), self.dy(&v_hat));
        let ax: Vec<f64> = (0..self.len()).map(|i| u[i] * ux[i] + v[i] * uy[i]).collect();
        let ay: Vec<f64> = (0..self.len()).map(|i| u[i] * vx[i] + v[i] * vy[i]).collect();
        let ax_hat = self.fft.forward(&ax);
        let ay_hat = self.fft.forward(&ay);
        let p_hat: Vec<Complex64> = (0..self.len())
            .map(|i| {
                if self.k2[i] == 0.0 {
                    return ZERO;
                }
                let div = I * self.kx[i] * ax_hat[i] + I * self.ky[i] * ay_hat[i];
                // -|k|² p̂ = -div  =>  p̂ = div / |k|²
                div / self.k2[i]
            })
            .collect();
        self.fft.inverse(p_hat)
    }
}

/// Largest stable step for the given initial vorticity.
pub fn ns_max_step(omega0: &[f64], grid: &Grid2D) -> f64 {
    let ops = Spectral2D::new(grid);
    let (u, v) = ops.velocity(&ops.fft.forward(omega0));
    let umax = u.iter().chain(&v).fold(0.0_f64, |m, x| m.max(x.abs()));
    let kmax = ops
        .kx
        .iter()
        .zip(&ops.ky)
        .zip(&ops.dealias)
        .filter(|(_, &keep)| keep)
        .fold(0.0_f64, |m, ((kx, ky), _)| m.max(kx.abs()).max(ky.abs()));
    if umax == 0.0 {
        f64::INFINITY
    } else {
        NS_STABILITY / (umax * kmax)
    }
}

/// Spectral divergence `u_x + v_y` of one velocity slice.
pub fn divergence(grid: &Grid2D, u: &[f64], v: &[f64]) -> Vec<f64> {
    let ops = Spectral2D::new(grid);
    let ux = ops.dx(&ops.fft.forward(u));
    let vy = ops.dy(&ops.fft.forward(v));
    ux.iter().zip(&vy).map(|(a, b)| a + b).collect()
}

/// Solves 2D incompressible Navier–Stokes in vorticity–streamfunction form
/// on a doubly periodic grid, storing velocity and the Poisson-recovered
/// pressure at every output time.
pub fn solve_ns_2d(omega0: &[f64], nu: f64, grid: &Grid2D, times: &TimeAxis) -> Result<Trajectory2D> {
    grid.x.validate()?;
    grid.y.validate()?;
    times.validate()?;
    if !(grid.x.periodic && grid.y.periodic) {
        return Err(Error::InvalidConfig("Navier–Stokes solver needs a periodic grid".into()));
    }
    if omega0.len() != grid.len() {
        return Err(shape_err(format!(
            "initial vorticity has {} values, grid has {}",
            omega0.len(),
            grid.len()
        )));
    }
    if !(nu >= 0.0) {
        return Err(Error::InvalidConfig(format!("viscosity must be >= 0, got {nu}")));
    }
    let dt = times.step();
    let limit = ns_max_step(omega0, grid);
    if dt > limit {
        return Err(Error::UnstableConfig(format!(
            "Navier–Stokes step {dt:.3e} exceeds the advective bound {limit:.3e}"
        )));
    }

    let ops = Spectral2D::new(grid);
    let n = ops.len();
    let half: Vec<f64> = ops.k2.iter().map(|k2| (-nu * k2 * dt / 2.0).exp()).collect();
    let full: Vec<f64> = half.iter().map(|e| e * e).collect();

    let mut w = ops.fft.forward(omega0);
    let mut us = Vec::with_capacity(n * times.nt);
    let mut vs = Vec::with_capacity(n * times.nt);
    let mut ps = Vec::with_capacity(n * times.nt);
    let mut store = |w: &[Complex64]| {
        let (u, v) = ops.velocity(w);
        ps.extend(ops.pressure(&u, &v));
        us.extend(u);
        vs.extend(v);
    };
    store(&w);

    let mut tmp = vec![ZERO; n];
    for _ in 1..times.nt {
        for _ in 0..times.substeps {
            let a: Vec<Complex64> = ops.advection(&w).iter().map(|x| x * dt).collect();
            for j in 0..n {
                tmp[j] = half[j] * (w[j] + a[j] / 2.0);
            }
            let b: Vec<Complex64> = ops.advection(&tmp).iter().map(|x| x * dt).collect();
            for j in 0..n {
                tmp[j] = half[j] * w[j] + b[j] / 2.0;
            }
            let c: Vec<Complex64> = ops.advection(&tmp).iter().map(|x| x * dt).collect();
            for j in 0..n {
                tmp[j] = full[j] * w[j] + half[j] * c[j];
            }
            let d: Vec<Complex64> = ops.advection(&tmp).iter().map(|x| x * dt).collect();
            for j in 0..n {
                w[j] = full[j] * w[j] + (full[j] * a[j] + 2.0 * half[j] * (b[j] + c[j]) + d[j]) / 6.0;
            }
        }
        store(&w);
    }
    if us.iter().chain(&vs).chain(&ps).any(|x| !x.is_finite()) {
        return Err(Error::UnstableConfig("Navier–Stokes solution became non-finite".into()));
    }
    Ok(Trajectory2D { grid: grid.clone(), times: times.clone(), u: us, v: vs, p: ps, nu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_vorticity_is_at_rest() {
        let g = Grid2D::periodic_square(2.0 * PI, 16).unwrap();
        let t = TimeAxis::new(0.1, 3).unwrap();
        let traj = solve_ns_2d(&vec![0.0; 256], 0.01, &g, &t).unwrap();
        assert!(traj.u.iter().chain(&traj.v).chain(&traj.p).all(|&x| x == 0.0));
    }

    #[test]
    fn taylor_green_pressure() {
        // u = sin x cos y, v = -cos x sin y  =>  p = (cos 2x + cos 2y) / 4
        let n = 16;
        let g = Grid2D::periodic_square(2.0 * PI, n).unwrap();
        let xs = g.x.points();
        let mut w = Vec::new();
        for &y in &xs {
            for &x in &xs {
                w.push(2.0 * x.sin() * y.sin());
            }
        }
        let t = TimeAxis::new(0.01, 2).unwrap().with_substeps(2).unwrap();
        let traj = solve_ns_2d(&w, 0.0, &g, &t).unwrap();
        for (iy, &y) in xs.iter().enumerate() {
            for (ix, &x) in xs.iter().enumerate() {
                let p = traj.p[iy * n + ix];
                assert!((p - ((2.0 * x).cos() + (2.0 * y).cos()) / 4.0).abs() < 1e-12);
                assert!((traj.u[iy * n + ix] - x.sin() * y.cos()).abs() < 1e-12);
            }
        }
    }
}
