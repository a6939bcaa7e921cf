//! Numerical toolkit for Newtonian gravity coupled to quantum matter:
//! relativistic kinematics and phase space, tree and one-loop amplitudes,
//! optical-theorem checks, Gaussian two-mass entanglement, a
//! measurement-and-feedback gravity model, and light-deflection estimates.

pub mod amplitudes;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod estimators;
pub mod kinematics;
pub mod numeric;
pub mod rng;
pub mod semiclassical;
pub mod unitarity;

pub use error::{GravitasError, Result};
