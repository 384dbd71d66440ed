//! Bell magic: a measure of non-stabilizerness that is efficiently estimable
//! from Bell-basis measurements on two copies of a state.

pub mod discrimination;
pub mod error;
pub mod estimation;
pub mod magic;
pub mod pauli;
pub mod rng;
pub mod simulator;
pub mod stabilizer;
pub mod transform;
pub mod variational;

pub use error::{Error, Result};
pub use estimation::{EstimationResult, EstimatorConfig, SamplingMode};
pub use magic::MagicValue;
pub use pauli::{check_commute, symplectic_product, BellOutcome, PauliString};
pub use simulator::{BellDistribution, CircuitSpec, DensityMatrix, Gate, StateVector};
pub use stabilizer::StabilizerTableau;
