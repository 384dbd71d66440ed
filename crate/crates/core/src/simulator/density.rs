use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{i_pow, masks, StateVector};
use crate::error::{Error, Result};
use crate::pauli::{interleave, PauliString};
use crate::transform::fwht;

/// Tolerance for the Hermiticity, trace and positivity checks.
pub const DENSITY_TOL: f64 = 1e-9;

/// Dense row-major density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(n_qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        let rho = Self { n_qubits, data };
        rho.check()?;
        Ok(rho)
    }

    fn check(&self) -> Result<()> {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                if (self.at(i, j) - self.at(j, i).conj()).norm() > DENSITY_TOL {
                    return Err(Error::InvalidDensityMatrix(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| self.at(i, i).re).sum();
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let m = DMatrix::from_row_slice(dim, dim, &self.data);
        let min = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self::from_ensemble(&[(1.0, state.clone())]).expect("pure state is a valid ensemble")
    }

    /// `sum_i w_i |psi_i><psi_i|` with non-negative weights summing to one.
    pub fn from_ensemble(members: &[(f64, StateVector)]) -> Result<Self> {
        let n_qubits = members
            .first()
            .map(|(_, s)| s.num_qubits())
            .ok_or_else(|| Error::InvalidInput("empty ensemble".into()))?;
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (w, s) in members {
            if s.num_qubits() != n_qubits || *w < 0.0 {
                return Err(Error::InvalidInput("ensemble members must share N and have w >= 0".into()));
            }
            let a = s.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    data[i * dim + j] += a[i] * a[j].conj() * *w;
                }
            }
        }
        Self::new(n_qubits, data)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { n_qubits, data }
    }

    /// `(1 - p) |psi><psi| + p I / 2^N`.
    pub fn depolarized(state: &StateVector, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("depolarizing probability {p} outside [0, 1]")));
        }
        let pure = Self::from_pure(state);
        let mixed = Self::maximally_mixed(state.num_qubits());
        let data = pure.data.iter().zip(&mixed.data).map(|(a, b)| a * (1.0 - p) + b * p).collect();
        Ok(Self { n_qubits: state.num_qubits(), data })
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `tr(rho sigma_p)`.
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let (z, x) = masks(p);
        let raw: Complex64 = (0..self.dim())
            .map(|k| {
                let v = self.at(k, k ^ x);
                if (z & k).count_ones() % 2 == 0 { v } else { -v }
            })
            .sum();
        (raw * i_pow(p.y_count())).re
    }

    /// All `4^N` Pauli expectations, indexed densely.
    pub fn all_pauli_expectations(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; dim * dim];
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for x in 0..dim {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = self.at(k, k ^ x);
            }
            fwht(&mut buf);
            for (z, v) in buf.iter().enumerate() {
                out[interleave(z, x)] = (v * i_pow((z & x).count_ones() as usize)).re;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_matrices() {
        let c = |re: f64| Complex64::new(re, 0.0);
        // Trace one but an eigenvalue of -0.5.
        let bad = vec![c(1.5), c(0.0), c(0.0), c(-0.5)];
        assert!(matches!(DensityMatrix::new(1, bad), Err(Error::InvalidDensityMatrix(_))));
        let skew = vec![c(0.5), Complex64::new(0.0, 0.1), Complex64::new(0.0, 0.1), c(0.5)];
        assert!(DensityMatrix::new(1, skew).is_err());
        assert!(DensityMatrix::new(1, vec![c(0.5), c(0.0), c(0.0), c(0.6)]).is_err());
    }

    #[test]
    fn purity_and_expectations() {
        let t = StateVector::t_state();
        let rho = DensityMatrix::depolarized(&t, 0.2).unwrap();
        // Bloch vector shrinks by (1 - p).
        let x: PauliString = "X".parse().unwrap();
        assert!((rho.pauli_expectation(&x) - 0.8 * t.pauli_expectation(&x)).abs() < 1e-12);
        assert!((rho.purity() - (1.0 + 0.64) / 2.0).abs() < 1e-12);
        assert!((DensityMatrix::maximally_mixed(3).purity() - 0.125).abs() < 1e-15);
        let all = rho.all_pauli_expectations();
        assert!((all[0] - 1.0).abs() < 1e-12);
    }
}
