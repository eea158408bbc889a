//! Data augmentation baselines.
//!
//! - Lie point symmetries map a KdV or Burgers trajectory to another exact
//!   solution (time and space translation, Galilean boost, scaling).
//! - General covariance remaps the coordinate of a 1D elliptic problem and
//!   transforms coefficient, source and solution together.
//!
//! A finite-difference residual oracle checks that transformed trajectories
//! still solve their equation.

mod covariance;
mod lie;
mod residual;

pub use covariance::{gcda_transform, CoordinateMap, MapSamples};
pub use lie::{compose_lie, lie_transform, LieKind, LieParams};
pub use residual::{burgers_residual, kdv_residual, pde_residual};
