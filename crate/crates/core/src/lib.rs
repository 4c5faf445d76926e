pub mod dictionary;
pub mod energy;
pub mod error;
mod fft2;
pub mod graphcut;
pub mod image;
pub mod io;
pub mod kv;
pub mod linalg;
pub mod pipeline;
pub mod predict;
pub mod scalar;
pub mod sensing;
pub mod sparse;

pub use error::{Error, Result};
pub use image::{Dims, Image};
pub use scalar::Scalar;

/// Default working precision.
pub type Real = f64;
pub type Image64 = Image<f64>;
pub type Image32 = Image<f32>;
pub type Observation64 = sensing::Observation<f64>;
pub type Observation32 = sensing::Observation<f32>;
pub type SparseApprox64 = sparse::SparseApprox<f64>;
pub type SparseApprox32 = sparse::SparseApprox<f32>;
