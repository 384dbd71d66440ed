//! Exact Bell magic and related non-stabilizerness and entanglement measures.
//!
//! With `Q(n) = sum_r P(r) P(r ^ n)` the Bell magic is
//! `B = sum_{n,q} Q(n) Q(q) check_commute(n, q)`. Writing
//! `A(n) = sum_q Q(q) [n, q anticommute] = (1 - Qhat(Jn)) / 2`, where `Qhat` is
//! the Walsh-Hadamard transform and `J` swaps the two bits of every pair,
//! gives `B = 2 sum_n Q(n) A(n)` in `O(N 4^N)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pauli::{dense_symplectic, swap_pairs};
use crate::simulator::{bell_distribution, mixed_bell_distribution, BellDistribution, DensityMatrix, StateVector};
use crate::transform::{fwht, xor_convolve};

/// Below this value of `1 - B` the additive magic is reported as infinite.
pub const ADDITIVE_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagicValue {
    pub bell_magic: f64,
    pub additive: f64,
    /// Present for mixed inputs.
    pub purity: Option<f64>,
    pub mixed: Option<f64>,
    pub mixed_additive: Option<f64>,
}

impl MagicValue {
    pub fn pure(bell_magic: f64) -> Self {
        Self { bell_magic, additive: additive(bell_magic), purity: None, mixed: None, mixed_additive: None }
    }

    pub fn with_purity(bell_magic: f64, purity: f64) -> Self {
        let (mixed, mixed_additive) = mixed_magic(bell_magic, purity);
        Self { purity: Some(purity), mixed: Some(mixed), mixed_additive: Some(mixed_additive), ..Self::pure(bell_magic) }
    }
}

/// `-log2(1 - B)`, infinite once `1 - B` drops below [`ADDITIVE_FLOOR`].
pub fn additive(bell_magic: f64) -> f64 {
    let gap = 1.0 - bell_magic;
    if gap < ADDITIVE_FLOOR { f64::INFINITY } else { -gap.log2() }
}

/// Purity-corrected `(B_m, B_{a,m})` for a state of purity `tr(rho^2)`.
pub fn mixed_magic(bell_magic: f64, purity: f64) -> (f64, f64) {
    let gap = 1.0 - bell_magic;
    let mixed = 1.0 - gap / (purity * purity);
    let mixed_additive = if gap < ADDITIVE_FLOOR { f64::INFINITY } else { -gap.log2() + 2.0 * purity.log2() };
    (mixed, mixed_additive)
}

/// `Q(n) = sum_r P(r) P(r ^ n)` by XOR convolution.
pub fn q_distribution(dist: &BellDistribution) -> Vec<f64> {
    xor_convolve(dist.probs(), dist.probs())
}

/// Direct `O(16^N)` evaluation of [`q_distribution`].
pub fn q_distribution_direct(dist: &BellDistribution) -> Vec<f64> {
    let p = dist.probs();
    (0..p.len()).map(|n| p.iter().enumerate().map(|(r, pr)| pr * p[r ^ n]).sum()).collect()
}

/// `A(n)`: the `Q`-mass anticommuting with `n`.
pub fn anticommuting_mass(q: &[f64]) -> Vec<f64> {
    let mut hat = q.to_vec();
    fwht(&mut hat);
    (0..q.len()).map(|n| (1.0 - hat[swap_pairs(n)]) / 2.0).collect()
}

/// Bell magic of a Bell-outcome distribution in `O(N 4^N)`.
pub fn bell_magic_from_distribution(dist: &BellDistribution) -> f64 {
    let q = q_distribution(dist);
    let a = anticommuting_mass(&q);
    2.0 * q.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>()
}

/// Double loop over `(n, q)` with explicit commutation checks.
pub fn bell_magic_direct(dist: &BellDistribution) -> f64 {
    let q = q_distribution_direct(dist);
    let mut b = 0.0;
    for (n, qn) in q.iter().enumerate() {
        for (m, qm) in q.iter().enumerate() {
            b += qn * qm * 2.0 * dense_symplectic(n, m) as f64;
        }
    }
    b
}

pub fn bell_magic_exact(state: &StateVector) -> Result<MagicValue> {
    Ok(MagicValue::pure(bell_magic_from_distribution(&bell_distribution(state)?)))
}

/// Bell magic of `rho (x) rho` together with its purity-corrected variants.
pub fn bell_magic_mixed(rho: &DensityMatrix) -> Result<MagicValue> {
    let b = bell_magic_from_distribution(&mixed_bell_distribution(rho)?);
    Ok(MagicValue::with_purity(b, rho.purity()))
}

/// Additive Bell magic of `prod_i (cos(t_i/2)|0> + e^{-i f_i} sin(t_i/2)|1>)`
/// in closed form, for `(t_i, f_i)` pairs.
pub fn product_state_magic(angles: &[(f64, f64)]) -> f64 {
    angles
        .iter()
        .map(|&(theta, phi)| {
            let s2 = theta.sin().powi(2);
            let inner = 35.0 + 28.0 * (2.0 * theta).cos() + (4.0 * theta).cos() - 8.0 * (4.0 * phi).cos() * s2 * s2;
            -(1.0 - s2 * inner / 32.0).log2()
        })
        .sum()
}

/// Upper bound on the Bell magic of any pure `N`-qubit state.
pub fn pure_state_bound(n_qubits: usize) -> f64 {
    let d = 2f64.powi(n_qubits as i32);
    let d2 = d * d;
    d2 * (1.0 + 1.0 / d - 2.0 / d2).powi(2) / ((d2 - 1.0) * (1.0 + 1.0 / d).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerRenyi {
    /// Second stabilizer Renyi entropy, base-2 logarithm.
    pub m2: f64,
    /// Linear stabilizer entropy.
    pub m_lin: f64,
}

/// Stabilizer entropies from the collision probability of the Bell distribution.
pub fn stabilizer_renyi(dist: &BellDistribution) -> StabilizerRenyi {
    let s = 2f64.powi(dist.num_qubits() as i32) * dist.collision();
    StabilizerRenyi { m2: -s.log2(), m_lin: 1.0 - s }
}

/// `2 (1 - mean_k tr(rho_k^2))`.
pub fn meyer_wallach(state: &StateVector) -> f64 {
    let n = state.num_qubits();
    2.0 * (1.0 - (0..n).map(|k| state.reduced_purity(k)).sum::<f64>() / n as f64)
}

/// Meyer-Wallach measure implied by a Bell distribution, using
/// `tr(rho_k^2) = 1 - 2 P(AND bit of pair k is set)`.
pub fn meyer_wallach_from_distribution(dist: &BellDistribution) -> f64 {
    let n = dist.num_qubits();
    let mean: f64 = (0..n).map(|k| 1.0 - 2.0 * dist.odd_mass_at(k)).sum::<f64>() / n as f64;
    2.0 * (1.0 - mean)
}

/// Haar average of the Meyer-Wallach measure.
pub fn haar_meyer_wallach_mean(n_qubits: usize) -> f64 {
    let d = 2f64.powi(n_qubits as i32);
    (d - 2.0) / (d + 1.0)
}

/// Reference states with known Bell magic.
pub mod fixtures {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `|T>^N`.
    pub fn t_product(n_qubits: usize) -> StateVector {
        StateVector::product(&vec![StateVector::t_state(); n_qubits.max(1)]).expect("non-empty")
    }

    /// Single-qubit state maximizing the Bell magic.
    pub fn r_state() -> StateVector {
        StateVector::single_qubit((1.0 / 3f64.sqrt()).acos(), std::f64::consts::FRAC_PI_4)
    }

    /// Two-qubit maximizer `1/2 (1, 1, 1, i)`.
    pub fn two_qubit_max() -> StateVector {
        StateVector::from_amplitudes(vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.5)]).expect("normalized")
    }

    /// Three-qubit Hoggar-type maximizer, rescaled to unit norm.
    pub fn hoggar() -> StateVector {
        let amps = vec![c(1.0, 1.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        StateVector::normalized(amps).expect("non-zero")
    }

    /// Four-qubit state with the largest Bell magic found numerically.
    pub fn four_qubit_max() -> StateVector {
        let raw = [
            (4.0, 0.0), (1.0, 1.0), (0.0, 4.0), (-1.0, 1.0),
            (0.0, 4.0), (3.0, 3.0), (0.0, 2.0), (-1.0, -1.0),
            (-1.0, 1.0), (0.0, 4.0), (3.0, -3.0), (0.0, -2.0),
            (-1.0, -1.0), (0.0, 2.0), (-1.0, 1.0), (2.0, 0.0),
        ];
        let scale = 1.0 / (8.0 * 2f64.sqrt());
        StateVector::from_amplitudes(raw.iter().map(|&(re, im)| c(re * scale, im * scale)).collect())
            .expect("normalized")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::pauli::dense_symplectic;
    use crate::simulator::CircuitSpec;
    use crate::stabilizer::random_clifford;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Literal quadruple sum over outcomes.
    fn quadruple_sum(dist: &BellDistribution) -> f64 {
        let p = dist.probs();
        let len = p.len();
        let mut b = 0.0;
        for r in 0..len {
            for rp in 0..len {
                let w = p[r] * p[rp];
                if w == 0.0 {
                    continue;
                }
                for q in 0..len {
                    for qp in 0..len {
                        b += w * p[q] * p[qp] * 2.0 * dense_symplectic(r ^ rp, q ^ qp) as f64;
                    }
                }
            }
        }
        b
    }

    #[test]
    fn single_qubit_values() {
        let t = bell_magic_exact(&StateVector::t_state()).unwrap();
        assert!((t.bell_magic - 0.5).abs() < 1e-12);
        assert!((t.additive - 1.0).abs() < 1e-12);
        let r = bell_magic_exact(&r_state()).unwrap();
        assert!((r.bell_magic - 16.0 / 27.0).abs() < 1e-12);
        assert!((r.additive - (27f64 / 11.0).log2()).abs() < 1e-12);
        assert_eq!(bell_magic_exact(&StateVector::zero(2)).unwrap().bell_magic.abs(), 0.0);
    }

    #[test]
    fn additive_is_infinite_at_one() {
        assert!(additive(1.0).is_infinite());
        assert!(additive(1.0 - 1e-16).is_infinite());
        assert!(additive(0.5).is_finite());
    }

    #[test]
    fn maximally_mixed_values() {
        for n in 1..=4 {
            let v = bell_magic_mixed(&DensityMatrix::maximally_mixed(n)).unwrap();
            let exact = 1.0 - 4f64.powi(-(n as i32));
            assert!((v.bell_magic - exact).abs() < 1e-12);
            assert!(v.mixed.unwrap().abs() < 1e-12);
            assert!(v.mixed_additive.unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn bound_is_attained_at_one_qubit() {
        assert!((pure_state_bound(1) - 16.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn t_state_renyi_entropy() {
        let s = stabilizer_renyi(&bell_distribution(&StateVector::t_state()).unwrap());
        assert!((s.m2 - (4f64 / 3.0).log2()).abs() < 1e-12);
        assert!((s.m_lin - 0.25).abs() < 1e-12);
    }

    #[test]
    fn renyi_matches_pauli_spectrum() {
        let psi = StateVector::haar_random(3, &mut ChaCha8Rng::seed_from_u64(2));
        let fourth: f64 = psi.all_pauli_expectations().iter().map(|e| e.powi(4)).sum();
        let s = stabilizer_renyi(&bell_distribution(&psi).unwrap());
        assert!((s.m2 + (fourth / 8.0).log2()).abs() < 1e-10);
    }

    #[test]
    fn meyer_wallach_values() {
        let mut ghz = CircuitSpec::empty(3);
        ghz.push(crate::Gate::H { qubit: 0 });
        ghz.push(crate::Gate::Cnot { control: 0, target: 1 });
        ghz.push(crate::Gate::Cnot { control: 1, target: 2 });
        let ghz = StateVector::from_circuit(&ghz).unwrap();
        assert!((meyer_wallach(&ghz) - 1.0).abs() < 1e-12);
        assert!(meyer_wallach(&t_product(4)).abs() < 1e-12);
        assert!((haar_meyer_wallach_mean(4) - 14.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn quadruple_sum_oracle() {
        for n in 1..=2 {
            let psi = StateVector::haar_random(n, &mut ChaCha8Rng::seed_from_u64(n as u64));
            let d = bell_distribution(&psi).unwrap();
            assert!((quadruple_sum(&d) - bell_magic_from_distribution(&d)).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fast_matches_direct(seed in 0u64..100_000, n in 1usize..4) {
            let psi = StateVector::haar_random(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let d = bell_distribution(&psi).unwrap();
            prop_assert!((bell_magic_from_distribution(&d) - bell_magic_direct(&d)).abs() < 1e-12);
            let (fast, slow) = (q_distribution(&d), q_distribution_direct(&d));
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-13);
            }
        }

        #[test]
        fn mixed_entanglement_from_distribution(seed in 0u64..100_000) {
            let psi = StateVector::haar_random(3, &mut ChaCha8Rng::seed_from_u64(seed));
            let d = bell_distribution(&psi).unwrap();
            prop_assert!((meyer_wallach_from_distribution(&d) - meyer_wallach(&psi)).abs() < 1e-10);
        }

        #[test]
        fn product_closed_form(angles in proptest::collection::vec((0.0f64..3.2, 0.0f64..6.3), 1..4)) {
            let factors: Vec<StateVector> = angles.iter().map(|&(t, f)| StateVector::single_qubit(t, f)).collect();
            let psi = StateVector::product(&factors).unwrap();
            let exact = bell_magic_exact(&psi).unwrap().additive;
            prop_assert!((exact - product_state_magic(&angles)).abs() < 1e-9);
        }

        #[test]
        fn stabilizer_states_have_zero_magic(seed in 0u64..100_000, n in 1usize..5) {
            let (_, c) = random_clifford(n, 3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = bell_magic_exact(&StateVector::from_circuit(&c).unwrap()).unwrap().bell_magic;
            prop_assert!(b.abs() < 1e-12);
        }
    }
}
