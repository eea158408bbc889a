use crate::error::{shape_err, Error, Result};
use crate::pde::grid::{Grid1D, TimeAxis};
use crate::pde::trajectory::{Boundary, PdeTag, Trajectory1D};

/// Largest forward-Euler step for which the upwind/central update stays
/// monotone: `dt (max|u| / dx + 2 nu / dx²) <= 1`.
pub fn burgers_max_step(h: &[f64], nu: f64, dx: f64) -> f64 {
    let umax = h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let rate = umax / dx + 2.0 * nu / (dx * dx);
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// Godunov flux for `f(u) = u² / 2`.
fn godunov_flux(left: f64, right: f64) -> f64 {
    let l = left.max(0.0);
    let r = right.min(0.0);
    (0.5 * l * l).max(0.5 * r * r)
}

/// Solves `u_t + (u²/2)_x = nu u_xx` in conservative flux form.
///
/// Periodic runs need a periodic grid; Dirichlet runs hold the two end
/// values of `h` fixed.
pub fn solve_burgers_1d(
    h: &[f64],
    nu: f64,
    grid: &Grid1D,
    times: &TimeAxis,
    bc: Boundary,
) -> Result<Trajectory1D> {
    grid.validate()?;
    times.validate()?;
    let n = grid.nx;
    if h.len() != n {
        return Err(shape_err(format!("initial field has {} values, grid has {n}", h.len())));
    }
    if !(nu >= 0.0) {
        return Err(Error::InvalidConfig(format!("viscosity must be >= 0, got {nu}")));
    }
    match (bc, grid.periodic) {
        (Boundary::Periodic, false) => {
            return Err(Error::InvalidConfig("periodic boundary needs a periodic grid".into()))
        }
        (Boundary::Dirichlet, true) => {
            return Err(Error::InvalidConfig("Dirichlet boundary needs a bounded grid".into()))
        }
        _ => {}
    }
    let dx = grid.dx();
    let dt = times.step();
    let limit = burgers_max_step(h, nu, dx);
    if dt > limit {
        return Err(Error::UnstableConfig(format!(
            "Burgers step {dt:.3e} exceeds the monotonicity bound {limit:.3e}"
        )));
    }

    let lambda = dt / dx;
    let r = nu * dt / (dx * dx);
    let mut u = h.to_vec();
    let mut next = vec![0.0; n];
    let mut flux = vec![0.0; n];
    let mut out = Vec::with_capacity(n * times.nt);
    out.extend_from_slice(&u);

    for _ in 1..times.nt {
        for _ in 0..times.substeps {
            match bc {
                Boundary::Periodic => {
                    // flux[i] sits on the face between i and i + 1
                    for i in 0..n {
                        flux[i] = godunov_flux(u[i], u[(i + 1) % n]);
                    }
                    for i in 0..n {
                        let im = (i + n - 1) % n;
                        let ip = (i + 1) % n;
                        next[i] = u[i] - lambda * (flux[i] - flux[im])
                            + r * (u[ip] - 2.0 * u[i] + u[im]);
                    }
                }
                Boundary::Dirichlet => {
                    for i in 0..n - 1 {
                        flux[i] = godunov_flux(u[i], u[i + 1]);
                    }
                    next[0] = u[0];
                    next[n - 1] = u[n - 1];
                    for i in 1..n - 1 {
                        next[i] = u[i] - lambda * (flux[i] - flux[i - 1])
                            + r * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
                    }
                }
            }
            std::mem::swap(&mut u, &mut next);
        }
        out.extend_from_slice(&u);
    }
    Trajectory1D::new(grid.clone(), times.clone(), out, PdeTag::Burgers { nu, boundary: bc })
}
