//! Shared inputs for the criterion benchmarks.

use bell_magic::rng::stream_rng;
use bell_magic::simulator::{bell_distribution, magic_input_circuit};
use bell_magic::{BellDistribution, BellOutcome, StateVector};
use std::f64::consts::FRAC_PI_4;

/// Haar-random state with a fixed seed.
pub fn random_state(n_qubits: usize) -> StateVector {
    StateVector::haar_random(n_qubits, &mut stream_rng(0xbe9c, n_qubits as u64))
}

/// Bell distribution of a Clifford circuit fed three `|T>`-like qubits.
pub fn magic_distribution(n_qubits: usize) -> BellDistribution {
    let mut rng = stream_rng(0xbe9c, 100 + n_qubits as u64);
    let circuit = magic_input_circuit(n_qubits, 3.min(n_qubits), FRAC_PI_4, 4, &mut rng).expect("valid sizes");
    bell_distribution(&StateVector::from_circuit(&circuit).expect("valid circuit")).expect("dense size")
}

/// `n_samples` outcomes of [`magic_distribution`].
pub fn magic_outcomes(n_qubits: usize, n_samples: usize) -> Vec<BellOutcome> {
    magic_distribution(n_qubits).sample(n_samples, &mut stream_rng(0xbe9c, 200)).expect("non-empty")
}
