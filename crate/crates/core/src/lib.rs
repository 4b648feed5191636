//! Higher-order spectral clustering for soft geometric block models.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod theory;
pub mod torus;
pub mod validate;

pub use error::{Error, Result};
