//! Pseudo-spectral boundary-integral simulator for a closed elastic string
//! (bending, stretching, surface tension) immersed in 2-D Stokes flow.
//!
//! The shape is carried by the tangent angle θ(α) in arc-length coordinate,
//! the stretching field y_s(s) in material coordinate, and the perimeter 𝔰.

pub mod acceptance;
pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod spectral;
pub mod velocity;

pub use error::{Error, Result};
