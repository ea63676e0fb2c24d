//! Fault-tolerance threshold estimation for concatenated seven-qubit code
//! telecorrection under the photon-loss error model.

pub mod circuit;
pub mod sim;

pub use circuit::{Location, LocationKind, MeasuredWord, TelecorrectionCircuitSpec, WordRole};
pub use sim::{
    contraction_curve, decode_block, find_threshold, find_threshold_with, level1_error_model, simulate_telecorrection, CompiledRound,
    ContractionCurve, ErrorRateVector, RoundOutcome, RoundStats, ThresholdResult, ThresholdSearch,
};
