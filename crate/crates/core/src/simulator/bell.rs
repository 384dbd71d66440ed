//! Bell-sampling outcome distributions.
//!
//! For a pure state, `P(r) = 2^-N |<psi| sigma_r |psi*>|^2`. The outcome label
//! of each qubit pair is the Pauli letter `sigma` whose Bell state is
//! `(sigma (x) I) |Phi+>`.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;

use super::density::DensityMatrix;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::pauli::{interleave, swap_pairs, BellOutcome, PauliString};
use crate::transform::fwht;

/// Largest register for dense `4^N` distributions.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest register for the density-matrix route.
pub const MAX_MIXED_QUBITS: usize = 5;
/// Tolerance on the total probability of a distribution.
pub const SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BellDistribution {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl BellDistribution {
    /// Checks length `4^N`, non-negativity and unit mass.
    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        let len = 1usize << (2 * n_qubits);
        if probs.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: probs.len() });
        }
        if let Some(p) = probs.iter().find(|p| p.is_nan() || **p < -SUM_TOL) {
            return Err(Error::InvalidInput(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let len = 1usize << (2 * n_qubits);
        Self { n_qubits, probs: vec![1.0 / len as f64; len] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Probabilities indexed by the dense interleaved outcome index.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: &PauliString) -> f64 {
        self.probs[outcome.index()]
    }

    /// Total mass on outcomes whose per-pair AND string has odd parity.
    pub fn odd_mass(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| crate::pauli::dense_and_parity(*i))
            .map(|(_, p)| p)
            .sum()
    }

    /// Expected swap-test purity `1 - 2 P_odd`.
    pub fn purity(&self) -> f64 {
        1.0 - 2.0 * self.odd_mass()
    }

    /// Collision probability `sum_r P(r)^2`.
    pub fn collision(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    /// Mass on outcomes whose pair for qubit `q` has its AND bit set.
    pub fn odd_mass_at(&self, q: usize) -> f64 {
        let shift = 2 * (self.n_qubits - 1 - q);
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> shift) & 3 == 3)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn sampler(&self) -> Result<BellSampler> {
        let weights = WeightedIndex::new(self.probs.iter().map(|p| p.max(0.0)))
            .map_err(|e| Error::InvalidInput(format!("cannot sample: {e}")))?;
        Ok(BellSampler { n_qubits: self.n_qubits, weights })
    }

    /// Draws `n_samples` i.i.d. outcomes.
    pub fn sample<R: Rng + ?Sized>(&self, n_samples: usize, rng: &mut R) -> Result<Vec<BellOutcome>> {
        Ok(self.sampler()?.sample_n(n_samples, rng))
    }

    /// CSV with columns `outcome` (bit string, pair order `z x`) and `probability`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["outcome", "probability"])?;
        let width = 2 * self.n_qubits;
        for (i, p) in self.probs.iter().enumerate() {
            w.write_record([format!("{i:0width$b}"), format!("{p:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut entries = Vec::new();
        let mut width = None;
        for rec in r.records() {
            let rec = rec?;
            let bits = rec.get(0).ok_or_else(|| Error::Parse("missing outcome column".into()))?;
            if *width.get_or_insert(bits.len()) != bits.len() || bits.len() % 2 != 0 {
                return Err(Error::Parse(format!("bad outcome width in {bits:?}")));
            }
            let idx = usize::from_str_radix(bits, 2).map_err(|e| Error::Parse(e.to_string()))?;
            let p: f64 = rec
                .get(1)
                .ok_or_else(|| Error::Parse("missing probability column".into()))?
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
            entries.push((idx, p));
        }
        let n_qubits = width.unwrap_or(0) / 2;
        let mut probs = vec![0.0; 1usize << (2 * n_qubits)];
        for (i, p) in entries {
            probs[i] = p;
        }
        Self::new(n_qubits, probs)
    }
}

/// Precomputed sampler over a fixed distribution.
#[derive(Clone, Debug)]
pub struct BellSampler {
    n_qubits: usize,
    weights: WeightedIndex<f64>,
}

impl BellSampler {
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.weights.sample(rng)
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n_samples: usize, rng: &mut R) -> Vec<BellOutcome> {
        (0..n_samples)
            .map(|_| PauliString::from_index(self.n_qubits, self.sample_index(rng)))
            .collect()
    }
}

fn check_dense(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::InvalidInput(format!(
            "{n_qubits} qubits exceed the dense limit of {MAX_DENSE_QUBITS}"
        )));
    }
    Ok(())
}

/// `2^-N |<a| sigma_r |b*>|^2` for every `r`, via one transform per `x` pattern.
fn overlap_distribution(a: &StateVector, b: &StateVector) -> Vec<f64> {
    let n = a.num_qubits();
    let dim = a.dim();
    let (aa, ba) = (a.amplitudes(), b.amplitudes());
    let scale = 1.0 / dim as f64;
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|x| {
            let mut f: Vec<Complex64> = (0..dim).map(|k| (aa[k ^ x] * ba[k]).conj()).collect();
            fwht(&mut f);
            f.iter().map(|v| v.norm_sqr() * scale).collect()
        })
        .collect();
    let mut probs = vec![0.0; 1usize << (2 * n)];
    for (x, row) in rows.iter().enumerate() {
        for (z, p) in row.iter().enumerate() {
            probs[interleave(z, x)] = *p;
        }
    }
    probs
}

/// Bell-sampling distribution of `|psi>|psi>`.
pub fn bell_distribution(state: &StateVector) -> Result<BellDistribution> {
    check_dense(state.num_qubits())?;
    BellDistribution::new(state.num_qubits(), overlap_distribution(state, state))
}

/// Bell-sampling distribution of `|a>|b>`.
pub fn cross_distribution(a: &StateVector, b: &StateVector) -> Result<BellDistribution> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch { expected: a.num_qubits(), got: b.num_qubits() });
    }
    check_dense(a.num_qubits())?;
    BellDistribution::new(a.num_qubits(), overlap_distribution(a, b))
}

/// Outcome distribution when each copy passes through a global depolarizing
/// channel of strength `p`: `(1-p)^2 P + p(2-p) 4^-N`.
pub fn noisy_bell_distribution(dist: &BellDistribution, p: f64) -> Result<BellDistribution> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("depolarizing probability {p} outside [0, 1]")));
    }
    let keep = (1.0 - p) * (1.0 - p);
    let flat = p * (2.0 - p) / dist.probs.len() as f64;
    let probs = dist.probs.iter().map(|q| keep * q + flat).collect();
    BellDistribution::new(dist.n_qubits, probs)
}

/// Bell-sampling distribution of `rho (x) rho`.
///
/// Each pair projector is `1/4 sum_P E_r(P) P (x) P` over `P in {I, X, Y, Z}`
/// with `E_r(P) = (-1)^{[P = Y]} (-1)^{<r, P>}`, so
/// `P(r) = 4^-N sum_P E_r(P) tr(rho P)^2`, evaluated with one transform.
pub fn mixed_bell_distribution(rho: &DensityMatrix) -> Result<BellDistribution> {
    let n = rho.num_qubits();
    if n > MAX_MIXED_QUBITS {
        return Err(Error::InvalidInput(format!(
            "{n} qubits exceed the density-matrix limit of {MAX_MIXED_QUBITS}"
        )));
    }
    let expectations = rho.all_pauli_expectations();
    let len = expectations.len();
    let mut h = vec![0.0; len];
    for (idx, e) in expectations.iter().enumerate() {
        let sign = if crate::pauli::dense_and_parity(idx) { -1.0 } else { 1.0 };
        h[swap_pairs(idx)] = sign * e * e;
    }
    fwht(&mut h);
    let scale = 1.0 / len as f64;
    BellDistribution::new(n, h.into_iter().map(|v| (v * scale).max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{circuit::Gate, CircuitSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Mat = Vec<Vec<Complex64>>;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kron(a: &Mat, b: &Mat) -> Mat {
        let (ra, rb) = (a.len(), b.len());
        let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..rb {
                    for l in 0..rb {
                        out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    fn paulis() -> [Mat; 4] {
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        [
            vec![vec![l, o], vec![o, l]],
            vec![vec![o, l], vec![l, o]],
            vec![vec![o, c(0.0, -1.0)], vec![c(0.0, 1.0), o]],
            vec![vec![l, o], vec![o, -l]],
        ]
    }

    /// Two-qubit Bell projector for pair label `(z, x)`, built from the
    /// `1/4 (II + E^x XX + E^y YY + E^z ZZ)` decomposition.
    fn pair_projector(z: bool, x: bool) -> Mat {
        let [i, px, py, pz] = paulis();
        // E^a = c_a * (-1)^{[label anticommutes with a]}, c = (1, -1, 1).
        let ex = if z { -1.0 } else { 1.0 };
        let ey = if z ^ x { 1.0 } else { -1.0 };
        let ez = if x { -1.0 } else { 1.0 };
        let terms = [(1.0, kron(&i, &i)), (ex, kron(&px, &px)), (ey, kron(&py, &py)), (ez, kron(&pz, &pz))];
        let mut out = vec![vec![c(0.0, 0.0); 4]; 4];
        for (e, m) in terms {
            for r in 0..4 {
                for s in 0..4 {
                    out[r][s] += m[r][s] * (e / 4.0);
                }
            }
        }
        out
    }

    /// Explicit `tr((rho (x) rho) O_r)` with `O_r` acting on pairs `(A_q, B_q)`.
    fn explicit_mixed(rho: &DensityMatrix) -> Vec<f64> {
        let n = rho.num_qubits();
        let dim = rho.dim();
        let mut out = vec![0.0; 1 << (2 * n)];
        for (r, slot) in out.iter_mut().enumerate() {
            let label = PauliString::from_index(n, r);
            // O_r in the pair-ordered basis (A_0 B_0 A_1 B_1 ...).
            let mut op: Mat = vec![vec![c(1.0, 0.0)]];
            for q in 0..n {
                op = kron(&op, &pair_projector(label.z_bit(q), label.x_bit(q)));
            }
            let mut acc = c(0.0, 0.0);
            for (row, op_row) in op.iter().enumerate() {
                for (col, v) in op_row.iter().enumerate() {
                    if v.norm() == 0.0 {
                        continue;
                    }
                    // Map pair-ordered basis bits to (a, b) register indices.
                    let split = |idx: usize| {
                        let (mut a, mut b) = (0, 0);
                        for q in 0..n {
                            let pair = (idx >> (2 * (n - 1 - q))) & 3;
                            a = (a << 1) | (pair >> 1);
                            b = (b << 1) | (pair & 1);
                        }
                        (a, b)
                    };
                    let ((ra, rb), (ca, cb)) = (split(row), split(col));
                    // (rho (x) rho)[col, row] * O[row, col]
                    acc += rho.at(ca, ra) * rho.at(cb, rb) * v;
                }
            }
            debug_assert!(dim > 0);
            *slot = acc.re;
        }
        out
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        StateVector::haar_random(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn single_qubit_fixtures() {
        let zero = bell_distribution(&StateVector::zero(1)).unwrap();
        assert_eq!(zero.probs(), &[0.5, 0.0, 0.5, 0.0]);
        let mut plus = StateVector::zero(1);
        plus.apply_gate(Gate::H { qubit: 0 }, None).unwrap();
        let p = bell_distribution(&plus).unwrap();
        let expect = [0.5, 0.5, 0.0, 0.0];
        for (a, b) in p.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_route_matches_explicit_projectors() {
        for n in 1..=3 {
            let psi = random_state(n, 10 + n as u64);
            let rho = DensityMatrix::from_pure(&psi);
            let explicit = explicit_mixed(&rho);
            let pure = bell_distribution(&psi).unwrap();
            let mixed = mixed_bell_distribution(&rho).unwrap();
            for r in 0..explicit.len() {
                assert!((explicit[r] - pure.probs()[r]).abs() < 1e-12, "n={n} r={r}");
                assert!((explicit[r] - mixed.probs()[r]).abs() < 1e-12, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn mixed_route_matches_explicit_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let members: Vec<(f64, StateVector)> =
            [0.5, 0.3, 0.2].iter().map(|&w| (w, StateVector::haar_random(2, &mut rng))).collect();
        let rho = DensityMatrix::from_ensemble(&members).unwrap();
        let explicit = explicit_mixed(&rho);
        let fast = mixed_bell_distribution(&rho).unwrap();
        for r in 0..explicit.len() {
            assert!((explicit[r] - fast.probs()[r]).abs() < 1e-12);
        }
        assert!((fast.purity() - rho.purity()).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let d = mixed_bell_distribution(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(d.probs().iter().all(|p| (p - 1.0 / 16.0).abs() < 1e-12));
        assert!((d.purity() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn noisy_distribution_matches_depolarized_density() {
        let psi = random_state(3, 9);
        let p = 0.1;
        let noisy = noisy_bell_distribution(&bell_distribution(&psi).unwrap(), p).unwrap();
        let direct = mixed_bell_distribution(&DensityMatrix::depolarized(&psi, p).unwrap()).unwrap();
        for (a, b) in noisy.probs().iter().zip(direct.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(noisy_bell_distribution(&noisy, 1.5).is_err());
    }

    #[test]
    fn stabilizer_noise_check_value() {
        let mut circuit = CircuitSpec::empty(3);
        circuit.push(Gate::H { qubit: 0 });
        circuit.push(Gate::Cnot { control: 0, target: 1 });
        circuit.push(Gate::Cnot { control: 1, target: 2 });
        let d = bell_distribution(&StateVector::from_circuit(&circuit).unwrap()).unwrap();
        let noisy = noisy_bell_distribution(&d, 0.1).unwrap();
        let max = noisy.probs().iter().cloned().fold(0.0, f64::max);
        // 0.81 / 8 + 0.19 / 64
        assert!((max - 0.104_218_75).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let d = bell_distribution(&random_state(2, 4)).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = BellDistribution::read_csv(buf.as_slice()).unwrap();
        for (a, b) in d.probs().iter().zip(back.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_frequencies() {
        let d = bell_distribution(&random_state(2, 8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let mut counts = vec![0usize; 16];
        for o in d.sample(n, &mut rng).unwrap() {
            counts[o.index()] += 1;
        }
        for (c, p) in counts.iter().zip(d.probs()) {
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() <= 5.0 * sd + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pure_distribution_invariants(seed in 0u64..10_000, n in 1usize..5) {
            let psi = random_state(n, seed);
            let d = bell_distribution(&psi).unwrap();
            let bound = 1.0 / (1u64 << n) as f64;
            prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            for (i, p) in d.probs().iter().enumerate() {
                prop_assert!(*p <= bound + 1e-12);
                if crate::pauli::dense_and_parity(i) {
                    prop_assert!(p.abs() < 1e-12);
                }
            }
            prop_assert!((d.purity() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn cross_distribution_sums_to_one(seed in 0u64..10_000) {
            let a = random_state(3, seed);
            let b = random_state(3, seed + 1);
            let d = cross_distribution(&a, &b).unwrap();
            // Swap-test purity of the pair equals |<a|b>|^2.
            prop_assert!((d.purity() - a.inner(&b).norm_sqr()).abs() < 1e-10);
        }
    }
}
