//! Affine-invariant L_p data-depth classification with a data-driven
//! exponent: depth geometry, density estimation through depth, per-class
//! exponent selection, two depth-based classifiers, samplers for l_p-symmetric
//! test distributions, and an experiment harness.

pub mod classify;
pub mod error;
pub mod fit;
pub mod harness;
pub mod kde;
pub mod lp;
pub mod model_io;
pub mod synth;

mod gamma;
mod hexfloat;
mod stats;

pub use error::{Error, ErrorClass, Result};
