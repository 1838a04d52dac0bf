//! Simulation toolkit for discriminating commuting from anti-commuting gate pairs
//! with a superposition of gate orders, and for bounding what any fixed-order
//! circuit can achieve on the same task.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the experiment and SDP layers use.

pub mod comb;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod linalg;
pub mod scalar;
pub mod switch;
pub mod tables;
pub mod waveplate;

pub use error::{Error, Result};

pub type CMatrix = linalg::ComplexMatrix<f64>;
pub type State = linalg::StateVector<f64>;
pub type Unitary = linalg::Unitary2<f64>;
pub type Pair = gates::GatePair<f64>;
pub type Triple = waveplate::WaveplateTriple<f64>;
pub type Score = comb::ScoreOperator<f64>;
pub type Comb = comb::CombOperator<f64>;

pub type CMatrix32 = linalg::ComplexMatrix<f32>;
pub type Unitary32 = linalg::Unitary2<f32>;
