use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::circuit::{CircuitSpec, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::transform::fwht;

/// Normalization tolerance for user-supplied amplitudes.
pub const NORM_TOL: f64 = 1e-9;

/// Dense pure state; qubit `q` is bit `N-1-q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Accepts amplitudes whose squared norm is within [`NORM_TOL`] of one.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let s = Self::unchecked(amps)?;
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::unchecked(amps)?;
        let norm = s.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        let scale = 1.0 / norm.sqrt();
        s.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(s)
    }

    fn unchecked(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidInput(format!("amplitude count {len} is not 2^N with N >= 1")));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amps })
    }

    /// `cos(theta/2)|0> + e^{-i phi} sin(theta/2)|1>`.
    pub fn single_qubit(theta: f64, phi: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self {
            n_qubits: 1,
            amps: vec![Complex64::new(c, 0.0), Complex64::from_polar(s, -phi)],
        }
    }

    /// `(|0> + e^{-i pi/4}|1>)/sqrt(2)`.
    pub fn t_state() -> Self {
        Self::single_qubit(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4)
    }

    /// Tensor product with `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Self { n_qubits: self.n_qubits + other.n_qubits, amps }
    }

    pub fn product(factors: &[Self]) -> Result<Self> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| Error::InvalidInput("empty product".into()))?;
        Ok(rest.iter().fold(first.clone(), |acc, f| acc.tensor(f)))
    }

    /// Haar-random state from normalized complex Gaussian amplitudes.
    pub fn haar_random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n_qubits)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        Self::normalized(amps).expect("Gaussian vector is non-zero")
    }

    /// Runs `circuit` on `|0...0>`.
    pub fn from_circuit(circuit: &CircuitSpec) -> Result<Self> {
        let mut s = Self::zero(circuit.n_qubits());
        s.apply_circuit(circuit)?;
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.n_qubits, other.n_qubits, "qubit count mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn conj(&self) -> Self {
        Self { n_qubits: self.n_qubits, amps: self.amps.iter().map(|a| a.conj()).collect() }
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    pub fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let b = self.bit(q);
        for i in 0..self.amps.len() {
            if i & b == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | b]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | b] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (self.bit(control), self.bit(target));
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// Applies one gate; `param` is required for rotations.
    pub fn apply_gate(&mut self, gate: Gate, param: Option<f64>) -> Result<()> {
        let q_max = gate.qubits().into_iter().max().unwrap_or(0);
        if q_max >= self.n_qubits {
            return Err(Error::InvalidInput(format!("gate {gate:?} outside {} qubits", self.n_qubits)));
        }
        match gate {
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            _ => {
                let q = gate.qubits()[0];
                self.apply_single(q, gate.matrix(param)?);
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &CircuitSpec) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: circuit.n_qubits() });
        }
        circuit.validate()?;
        for (gate, param) in circuit.gates_with_params() {
            self.apply_gate(gate, param)?;
        }
        Ok(())
    }

    /// `<psi| sigma_p |psi>` including the phase of `Y` letters.
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        assert_eq!(p.num_qubits(), self.n_qubits, "qubit count mismatch");
        let (z, x) = masks(p);
        let raw: Complex64 = (0..self.amps.len())
            .map(|k| {
                let v = self.amps[k ^ x].conj() * self.amps[k];
                if (z & k).count_ones() % 2 == 0 { v } else { -v }
            })
            .sum();
        (raw * i_pow(p.y_count())).re
    }

    /// All `4^N` Pauli expectations, indexed densely.
    pub fn all_pauli_expectations(&self) -> Vec<f64> {
        let dim = self.amps.len();
        let mut out = vec![0.0; dim * dim];
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for x in 0..dim {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = self.amps[k ^ x].conj() * self.amps[k];
            }
            fwht(&mut buf);
            for (z, v) in buf.iter().enumerate() {
                out[crate::pauli::interleave(z, x)] = (v * i_pow((z & x).count_ones() as usize)).re;
            }
        }
        out
    }

    /// Purity `tr(rho_q^2)` of the single-qubit reduced state.
    pub fn reduced_purity(&self, q: usize) -> f64 {
        let b = self.bit(q);
        let (mut p0, mut p1, mut coh) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for i in (0..self.amps.len()).filter(|i| i & b == 0) {
            let (a0, a1) = (self.amps[i], self.amps[i | b]);
            p0 += a0.norm_sqr();
            p1 += a1.norm_sqr();
            coh += a0 * a1.conj();
        }
        p0 * p0 + p1 * p1 + 2.0 * coh.norm_sqr()
    }
}

/// Basis-ordered `(z_mask, x_mask)` of a Pauli string.
pub(crate) fn masks(p: &PauliString) -> (usize, usize) {
    let n = p.num_qubits();
    (0..n).fold((0, 0), |(z, x), q| {
        let bit = 1 << (n - 1 - q);
        (z | if p.z_bit(q) { bit } else { 0 }, x | if p.x_bit(q) { bit } else { 0 })
    })
}

pub(crate) fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn pauli_expectations_of_t_state() {
        let t = StateVector::t_state();
        let ex = |s: &str| t.pauli_expectation(&s.parse::<PauliString>().unwrap());
        assert!((ex("X") - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((ex("Y").abs() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(ex("Z").abs() < 1e-12);
        let all = t.all_pauli_expectations();
        for idx in 0..4 {
            assert!((all[idx] - t.pauli_expectation(&PauliString::from_index(1, idx))).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unnormalized_amplitudes() {
        let amps = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(StateVector::from_amplitudes(amps.clone()), Err(Error::NotNormalized(_))));
        assert!((StateVector::normalized(amps).unwrap().norm_sqr() - 1.0).abs() < 1e-15);
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn reduced_purity_of_bell_pair() {
        let mut s = StateVector::zero(2);
        s.apply_gate(Gate::H { qubit: 0 }, None).unwrap();
        s.apply_gate(Gate::Cnot { control: 0, target: 1 }, None).unwrap();
        assert!((s.reduced_purity(0) - 0.5).abs() < 1e-12);
        assert!((StateVector::zero(3).reduced_purity(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = StateVector::zero(3);
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        s.apply_single(0, [[o, l], [l, o]]);
        assert!((s.amplitudes()[4].re - 1.0).abs() < 1e-15);
    }
}
