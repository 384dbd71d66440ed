//! Dense state-vector and density-matrix simulation of Bell sampling.

pub mod bell;
pub mod circuit;
pub mod density;
pub mod state;

pub use bell::{
    bell_distribution, cross_distribution, mixed_bell_distribution, noisy_bell_distribution,
    BellDistribution, BellSampler, MAX_DENSE_QUBITS, MAX_MIXED_QUBITS,
};
pub use circuit::{clifford_plus_t_params, hardware_efficient_ansatz, magic_input_circuit, CircuitSpec, Gate};
pub use density::DensityMatrix;
pub use state::StateVector;
