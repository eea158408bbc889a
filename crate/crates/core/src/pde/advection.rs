use crate::error::{shape_err, Error, Result};
use crate::pde::grid::{Grid1D, TimeAxis};
use crate::pde::interp;
use crate::pde::trajectory::{PdeTag, Trajectory1D};

/// Semi-Lagrangian steps keep the departure point within one cell so the
/// four-point stencil stays centred on it.
pub const ADVECTION_MAX_COURANT: f64 = 1.0;

pub fn advection_max_step(speed: f64, dx: f64) -> f64 {
    if speed == 0.0 {
        f64::INFINITY
    } else {
        ADVECTION_MAX_COURANT * dx / speed.abs()
    }
}

/// Solves `u_t + c u_x = 0` on a periodic grid by tracing characteristics
/// back one step and interpolating with cubic Lagrange polynomials.
pub fn solve_advection_1d(
    h: &[f64],
    speed: f64,
    grid: &Grid1D,
    times: &TimeAxis,
) -> Result<Trajectory1D> {
    grid.validate()?;
    times.validate()?;
    if !grid.periodic {
        return Err(Error::InvalidConfig("advection solver needs a periodic grid".into()));
    }
    let n = grid.nx;
    if h.len() != n {
        return Err(shape_err(format!("initial field has {} values, grid has {n}", h.len())));
    }
    let dx = grid.dx();
    let dt = times.step();
    let courant = speed * dt / dx;
    if courant.abs() > ADVECTION_MAX_COURANT {
        return Err(Error::UnstableConfig(format!(
            "advection Courant number {courant:.3} exceeds {ADVECTION_MAX_COURANT}"
        )));
    }

    let mut u = h.to_vec();
    let mut out = Vec::with_capacity(n * times.nt);
    out.extend_from_slice(&u);
    for _ in 1..times.nt {
        for _ in 0..times.substeps {
            u = (0..n)
                .map(|i| interp::cubic(grid, &u, grid.point(i) - speed * dt))
                .collect();
        }
        out.extend_from_slice(&u);
    }
    Trajectory1D::new(grid.clone(), times.clone(), out, PdeTag::Advection { speed })
}
