use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::pde::grid::{Grid1D, Grid2D, TimeAxis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

/// Which equation produced a trajectory, with its physical parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "snake_case")]
pub enum PdeTag {
    Burgers { nu: f64, boundary: Boundary },
    Advection { speed: f64 },
    Kdv,
    NavierStokes { nu: f64 },
    Elliptic,
}

impl PdeTag {
    /// Short description of the discretisation, recorded in file metadata.
    pub fn scheme(&self) -> &'static str {
        match self {
            PdeTag::Burgers { .. } => "conservative Godunov upwind flux + central diffusion, forward Euler",
            PdeTag::Advection { .. } => "semi-Lagrangian, cubic Lagrange interpolation",
            PdeTag::Kdv => "Fourier pseudo-spectral, integrating-factor RK4, 2/3 dealiasing",
            PdeTag::NavierStokes { .. } => {
                "vorticity-streamfunction pseudo-spectral, integrating-factor RK4, 2/3 dealiasing"
            }
            PdeTag::Elliptic => "conservative three-point finite differences, Thomas algorithm",
        }
    }
}

/// Scalar field `u(x, t)` stored slice by slice: `u[it * nx + ix]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory1D {
    pub grid: Grid1D,
    pub times: TimeAxis,
    pub u: Vec<f64>,
    pub pde: PdeTag,
}

impl Trajectory1D {
    pub fn new(grid: Grid1D, times: TimeAxis, u: Vec<f64>, pde: PdeTag) -> Result<Self> {
        if u.len() != grid.nx * times.nt {
            return Err(shape_err(format!(
                "trajectory holds {} values, grid needs {} x {}",
                u.len(),
                times.nt,
                grid.nx
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::UnstableConfig("trajectory contains non-finite values".into()));
        }
        Ok(Self { grid, times, u, pde })
    }

    pub fn nt(&self) -> usize {
        self.times.nt
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn slice(&self, it: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.u[it * nx..(it + 1) * nx]
    }

    pub fn at(&self, it: usize, ix: usize) -> f64 {
        self.u[it * self.grid.nx + ix]
    }

    /// `Σ u Δx` for every stored slice.
    pub fn mass(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        (0..self.nt()).map(|it| self.slice(it).iter().sum::<f64>() * dx).collect()
    }

    /// `Σ u² Δx` for every stored slice.
    pub fn energy(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        (0..self.nt())
            .map(|it| self.slice(it).iter().map(|v| v * v).sum::<f64>() * dx)
            .collect()
    }
}

/// Incompressible velocity `(u, v)` and pressure `p`, stored as
/// `field[(it * ny + iy) * nx + ix]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory2D {
    pub grid: Grid2D,
    pub times: TimeAxis,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub nu: f64,
}

impl Trajectory2D {
    pub fn nt(&self) -> usize {
        self.times.nt
    }

    pub fn slice_len(&self) -> usize {
        self.grid.len()
    }

    pub fn slice<'a>(&self, field: &'a [f64], it: usize) -> &'a [f64] {
        let n = self.slice_len();
        &field[it * n..(it + 1) * n]
    }

    /// `½ Σ (u² + v²) ΔA` per stored slice.
    pub fn kinetic_energy(&self) -> Vec<f64> {
        let da = self.grid.cell_area();
        (0..self.nt())
            .map(|it| {
                let u = self.slice(&self.u, it);
                let v = self.slice(&self.v, it);
                0.5 * u.iter().zip(v).map(|(a, b)| a * a + b * b).sum::<f64>() * da
            })
            .collect()
    }
}

/// Solution triple of the Dirichlet problem `(a u')' = f` on `[x_min, x_max]`.
///
/// `a_faces[i]` is the coefficient at the midpoint between nodes `i` and
/// `i + 1`; `f` and `u` live on the nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticSolution {
    pub grid: Grid1D,
    pub a_faces: Vec<f64>,
    pub f: Vec<f64>,
    pub u: Vec<f64>,
}
