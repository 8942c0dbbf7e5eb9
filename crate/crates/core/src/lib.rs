//! Particle/spectral solver for the FitzHugh–Nagumo transport equation with
//! strong local interactions, with asymptotic-preserving IMEX time schemes
//! and their reaction-diffusion limits.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kernel;
pub mod model;
pub mod particles;
pub mod quadrature;
pub mod spectral;
pub mod timestepping;

pub use error::{Error, Result};
