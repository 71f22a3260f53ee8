//! Gap and critical-value-curve analysis for trigonometric Hamiltonian paths
//! H(θ) = H₀cosθ + H₁sinθ.

pub mod curves;
pub mod error;
pub mod fixtures;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod sweep;
pub mod topology;

pub use error::{Error, Result};
