//! Event-camera motion compensation by focus maximization.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod error;
pub mod event;
pub mod filter;
pub mod image;
pub mod iwe;
pub mod loss;
pub mod optim;
pub mod pipeline;
pub mod scalar;
pub(crate) mod so3;
pub mod synth;
pub mod warp;

pub use error::{DataError, Error, IweError, LossError, OptimError, Result};
pub use scalar::Scalar;
