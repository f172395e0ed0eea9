//! Security analysis and Monte Carlo simulation of coherent-state quantum
//! digital signatures.
//!
//! All quantum computations are exact within the `N`-dimensional span of the
//! phase alphabet; see [`coherent`] for the basis conventions.

pub mod bounds;
pub mod channel;
pub mod coherent;
pub mod cost;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod parallel;
pub mod reference;
pub mod sim;

pub use channel::{ChannelModel, Receiver};
pub use coherent::{ComplexAmplitude, DensityMatrix, PhaseAlphabet, SpectralDecomposition};
pub use cost::CostMatrix;
pub use error::{QdsError, Result};
pub use measurement::{ForgingAnalysis, HelstromReport, Povm};
pub use parallel::Execution;
