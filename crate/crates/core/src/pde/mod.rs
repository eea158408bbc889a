//! Reference solvers and dataset sampling.
//!
//! Every solver is deterministic and checks its stability bound up front,
//! returning [`Error::UnstableConfig`](crate::Error::UnstableConfig) instead of
//! producing a blown-up trajectory. Use [`TimeAxis::with_substeps`] together
//! with the `*_max_step` helpers to pick a stable internal step.

mod advection;
mod burgers;
mod dataset;
mod elliptic;
mod grid;
pub mod initial;
pub mod interp;
mod kdv;
mod ns2d;
pub mod spectral;
mod trajectory;

pub use advection::{advection_max_step, solve_advection_1d, ADVECTION_MAX_COURANT};
pub use burgers::{burgers_max_step, solve_burgers_1d};
pub use dataset::{dataset_from_indices, generate_dataset, Dataset, FieldLayout, SampledSolution, Sampling};
pub use elliptic::{elliptic_solution, solve_elliptic_1d};
pub use grid::{Grid1D, Grid2D, TimeAxis};
pub use kdv::{kdv_max_step, solve_kdv_1d, KDV_STABILITY};
pub use ns2d::{divergence, ns_max_step, solve_ns_2d, NS_STABILITY};
pub use trajectory::{Boundary, EllipticSolution, PdeTag, Trajectory1D, Trajectory2D};
