use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D grid. Periodic grids omit the right endpoint, so
/// `dx = (x_max - x_min) / nx`; bounded grids include both endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub periodic: bool,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(x_min: f64, x_max: f64, nx: usize, periodic: bool) -> Result<Self> {
        let grid = Self { x_min, x_max, nx, periodic };
        grid.validate()?;
        Ok(grid)
    }

    pub fn periodic(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        Self::new(x_min, x_max, nx, true)
    }

    pub fn bounded(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        Self::new(x_min, x_max, nx, false)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < Self::MIN_POINTS {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least {} points, got {}",
                Self::MIN_POINTS,
                self.nx
            )));
        }
        if !(self.x_min < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid bounds must satisfy x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        if self.periodic {
            self.length() / self.nx as f64
        } else {
            self.length() / (self.nx - 1) as f64
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.point(i)).collect()
    }

    /// Returns the grid stretched by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.x_min * factor, self.x_max * factor, self.nx, self.periodic)
    }
}

/// Doubly periodic square grid with `nx` points along x and `ny` along y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn periodic_square(length: f64, n: usize) -> Result<Self> {
        Ok(Self { x: Grid1D::periodic(0.0, length, n)?, y: Grid1D::periodic(0.0, length, n)? })
    }

    pub fn cell_area(&self) -> f64 {
        self.x.dx() * self.y.dx()
    }

    pub fn len(&self) -> usize {
        self.x.nx * self.y.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Stored output times `t_start + i * dt` for `i in 0..nt`.
///
/// Solvers advance `substeps` internal steps between consecutive stored
/// slices, so the step actually checked against stability bounds is
/// `dt / substeps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub t_start: f64,
    pub t_end: f64,
    pub nt: usize,
    pub substeps: usize,
}

impl TimeAxis {
    pub fn new(t_end: f64, nt: usize) -> Result<Self> {
        let axis = Self { t_start: 0.0, t_end, nt, substeps: 1 };
        axis.validate()?;
        Ok(axis)
    }

    pub fn with_substeps(mut self, substeps: usize) -> Result<Self> {
        self.substeps = substeps;
        self.validate()?;
        Ok(self)
    }

    /// Same spacing, shifted so the first stored time is `t_start`.
    pub fn starting_at(&self, t_start: f64) -> Self {
        let span = self.t_end - self.t_start;
        Self { t_start, t_end: t_start + span, ..self.clone() }
    }

    /// Rescales both endpoints about t = 0.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { t_start: self.t_start * factor, t_end: self.t_end * factor, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt < 2 {
            return Err(Error::InvalidConfig(format!("time axis needs nt >= 2, got {}", self.nt)));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidConfig("substeps must be >= 1".into()));
        }
        if !(self.t_end > self.t_start) || !self.t_end.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "time axis needs t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    /// Spacing between stored slices.
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.nt - 1) as f64
    }

    /// The solver's internal step.
    pub fn step(&self) -> f64 {
        self.dt() / self.substeps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|i| self.time(i)).collect()
    }

    /// Smallest substep count that brings the internal step under `max_step`.
    pub fn substeps_for(&self, max_step: f64) -> usize {
        ((self.dt() / max_step).ceil() as usize).max(1)
    }
}
