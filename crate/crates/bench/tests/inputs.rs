use bell_magic::magic::{additive, bell_magic_from_distribution};
use bell_magic_bench::{magic_distribution, magic_outcomes, random_state};

#[test]
fn benchmark_inputs_are_valid() {
    assert_eq!(random_state(4).num_qubits(), 4);
    let b = bell_magic_from_distribution(&magic_distribution(6));
    assert!((additive(b) - 3.0).abs() < 1e-9);
    assert_eq!(magic_outcomes(6, 100).len(), 100);
}
