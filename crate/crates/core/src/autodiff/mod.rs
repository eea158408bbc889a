//! Dense tensors with define-by-run reverse-mode differentiation.
//!
//! A [`Tape`] records every operation of one forward pass. Leaves flagged with
//! `requires_grad` receive gradients from [`Tape::backward`], which is how the
//! surrogate obtains both parameter gradients (for training) and coordinate
//! gradients (for the attack) from the same machinery.
//!
//! ```
//! use smartpde::autodiff::{Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.leaf(Tensor::scalar(3.0), true);
//! let y = tape.square(x);
//! let grads = tape.backward(y).unwrap();
//! assert_eq!(grads.get(x).unwrap().item().unwrap(), 6.0);
//! ```

mod tape;
mod tensor;

pub use tape::{Gradients, OpKind, Tape, Var};
pub use tensor::Tensor;
