//! Adversarially augmented training for coordinate-MLP PDE surrogates.
//!
//! The crate is organised bottom-up:
//!
//! - [`autodiff`]: tensors and a reverse-mode tape (gradients with respect to
//!   parameters and to input coordinates).
//! - [`pde`]: reference solvers (Burgers, advection, KdV, 1D elliptic, 2D
//!   Navier–Stokes) and dataset sampling.
//! - [`surrogate`]: the tanh MLP `f(x, t; θ)`, supervised losses and min–max
//!   normalization.
//! - [`adversarial`]: the iterative sign-gradient attack on coordinates with
//!   budget and domain clipping, plus the random-noise baseline.
//! - [`augmentation`]: Lie point symmetry and coordinate-transformation
//!   augmentation baselines.
//! - [`training`]: standard and adversarial training loops, evaluation and
//!   the coverage measure.
//! - [`metrics`]: RMSE family and the gain formula.
//! - [`io`] and [`experiment`]: file formats, experiment configs and the
//!   commands behind the `smartpde` binary.

pub mod adversarial;
pub mod augmentation;
pub mod autodiff;
mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod pde;
pub mod surrogate;
pub mod training;

pub use error::{Error, Result};
