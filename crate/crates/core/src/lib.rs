//! Contextualized code search over a latent Gaussian model.
//!
//! A class with a missing method body is turned into typed evidence, fused
//! into a Gaussian over a latent vector, and compared in closed form against
//! precomputed Gaussians for every indexed program sketch.

mod binio;
pub mod context;
pub mod error;
pub mod eval;
pub mod gauss;
pub mod index;
pub mod model;
pub mod rng;
pub mod search;
pub mod sketch;

pub use error::{Error, ErrorKind, Result};
pub use gauss::DiagGaussian;
