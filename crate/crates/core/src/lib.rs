//! Simulation toolkit for the linear-optical Bell measurement on GHZ-encoded
//! photonic qubits.

pub mod bell;
pub mod cli;
pub mod comparison;
pub mod error;
pub mod ft;
pub mod linalg;
pub mod logical;
pub mod loss;
pub mod photonic;
pub mod protocols;
pub mod rng;

pub use bell::{BellState, Family, Sign};
pub use error::{Error, Result};
