//! Gate-level circuit descriptions and the standard ansatz builders.
//!
//! Rotations are `R_a(theta) = exp(-i theta sigma_a / 2)`. `S = diag(1, -i)`
//! and `T = diag(1, e^{-i pi/4})`, so `T^2 = S`. Parameterized gates consume
//! `params` in order of appearance.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    H { qubit: usize },
    S { qubit: usize },
    T { qubit: usize },
    Cnot { control: usize, target: usize },
    Ry { qubit: usize },
    Rz { qubit: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { qubit } | Gate::S { qubit } | Gate::T { qubit } => vec![qubit],
            Gate::Ry { qubit } | Gate::Rz { qubit } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn is_parameterized(&self) -> bool {
        matches!(self, Gate::Ry { .. } | Gate::Rz { .. })
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self, Gate::H { .. } | Gate::S { .. } | Gate::Cnot { .. })
    }

    /// 2x2 matrix of a single-qubit gate.
    pub fn matrix(&self, param: Option<f64>) -> Result<[[Complex64; 2]; 2]> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (zero, one) = (c(0.0, 0.0), c(1.0, 0.0));
        let need = || param.ok_or_else(|| Error::InvalidInput(format!("{self:?} needs a parameter")));
        Ok(match *self {
            Gate::H { .. } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
            }
            Gate::S { .. } => [[one, zero], [zero, c(0.0, -1.0)]],
            Gate::T { .. } => [[one, zero], [zero, Complex64::from_polar(1.0, -FRAC_PI_4)]],
            Gate::Ry { .. } => {
                let (s, co) = (need()? / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            Gate::Rz { .. } => {
                let half = need()? / 2.0;
                [[Complex64::from_polar(1.0, -half), zero], [zero, Complex64::from_polar(1.0, half)]]
            }
            Gate::Cnot { .. } => return Err(Error::InvalidInput("CNOT is not a single-qubit gate".into())),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    n_qubits: usize,
    gates: Vec<Gate>,
    params: Vec<f64>,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, gates: Vec<Gate>, params: Vec<f64>) -> Result<Self> {
        let c = Self { n_qubits, gates, params };
        c.validate()?;
        Ok(c)
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), params: Vec::new() }
    }

    /// Checks qubit ranges, CNOT operands and the parameter count.
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidInput("circuit needs at least one qubit".into()));
        }
        for g in &self.gates {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= self.n_qubits) {
                return Err(Error::InvalidInput(format!("{g:?} outside {} qubits", self.n_qubits)));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::InvalidInput(format!("{g:?} has equal control and target")));
            }
        }
        let expected = self.num_parameterized();
        if expected != self.params.len() {
            return Err(Error::DimensionMismatch { expected, got: self.params.len() });
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite circuit parameter".into()));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn num_parameterized(&self) -> usize {
        self.gates.iter().filter(|g| g.is_parameterized()).count()
    }

    /// Appends a fixed gate.
    pub fn push(&mut self, gate: Gate) {
        assert!(!gate.is_parameterized(), "use push_rotation for {gate:?}");
        self.gates.push(gate);
    }

    pub fn push_rotation(&mut self, gate: Gate, angle: f64) {
        assert!(gate.is_parameterized(), "{gate:?} takes no parameter");
        self.gates.push(gate);
        self.params.push(angle);
    }

    /// Concatenates `other` after `self`.
    pub fn then(mut self, other: &CircuitSpec) -> Result<Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        self.gates.extend_from_slice(&other.gates);
        self.params.extend_from_slice(&other.params);
        Ok(self)
    }

    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        Self::new(self.n_qubits, self.gates.clone(), params.to_vec())
    }

    /// Copy with parameter `k` shifted by `delta`.
    pub fn shifted(&self, k: usize, delta: f64) -> Self {
        let mut c = self.clone();
        c.params[k] += delta;
        c
    }

    /// Gates paired with their parameter, if any.
    pub fn gates_with_params(&self) -> impl Iterator<Item = (Gate, Option<f64>)> + '_ {
        let mut next = self.params.iter();
        self.gates
            .iter()
            .map(move |&g| (g, if g.is_parameterized() { next.next().copied() } else { None }))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }
}

/// Layered ansatz: per layer `Ry` on every qubit, `Rz` on every qubit, then a
/// CNOT chain `q -> q+1`. Takes `2 * n_qubits * depth` parameters, layer-major.
pub fn hardware_efficient_ansatz(n_qubits: usize, depth: usize, params: &[f64]) -> Result<CircuitSpec> {
    let expected = 2 * n_qubits * depth;
    if params.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: params.len() });
    }
    let mut c = CircuitSpec::empty(n_qubits);
    let mut it = params.iter().copied();
    for _ in 0..depth {
        for q in 0..n_qubits {
            c.push_rotation(Gate::Ry { qubit: q }, it.next().unwrap());
        }
        for q in 0..n_qubits {
            c.push_rotation(Gate::Rz { qubit: q }, it.next().unwrap());
        }
        for q in 0..n_qubits.saturating_sub(1) {
            c.push(Gate::Cnot { control: q, target: q + 1 });
        }
    }
    c.validate()?;
    Ok(c)
}

/// Ansatz parameters drawn from multiples of `pi/2`, with `n_t` distinct
/// positions shifted by `pi/4`.
pub fn clifford_plus_t_params<R: Rng + ?Sized>(
    n_qubits: usize,
    depth: usize,
    n_t: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let k = 2 * n_qubits * depth;
    if n_t > k {
        return Err(Error::InvalidInput(format!("n_t = {n_t} exceeds {k} parameters")));
    }
    let mut params: Vec<f64> = (0..k).map(|_| rng.gen_range(0..4) as f64 * FRAC_PI_2).collect();
    for i in sample(rng, k, n_t) {
        params[i] += FRAC_PI_4;
    }
    Ok(params)
}

/// `Ry(phi)` on `n_magic` random distinct qubits of `|0...0>`, producing
/// `cos(phi/2)|0> + sin(phi/2)|1>` there, followed by a Clifford-valued ansatz.
pub fn magic_input_circuit<R: Rng + ?Sized>(
    n_qubits: usize,
    n_magic: usize,
    phi: f64,
    depth: usize,
    rng: &mut R,
) -> Result<CircuitSpec> {
    if n_magic > n_qubits {
        return Err(Error::InvalidInput(format!("{n_magic} magic qubits exceed {n_qubits}")));
    }
    let mut c = CircuitSpec::empty(n_qubits);
    let mut positions = sample(rng, n_qubits, n_magic).into_vec();
    positions.sort_unstable();
    for q in positions {
        c.push_rotation(Gate::Ry { qubit: q }, phi);
    }
    let clifford = clifford_plus_t_params(n_qubits, depth, 0, rng)?;
    c.then(&hardware_efficient_ansatz(n_qubits, depth, &clifford)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn t_squared_is_s() {
        let t = Gate::T { qubit: 0 }.matrix(None).unwrap();
        let s = Gate::S { qubit: 0 }.matrix(None).unwrap();
        assert!(close(t[1][1] * t[1][1], s[1][1]));
    }

    #[test]
    fn ry_prepares_real_amplitudes() {
        let mut c = CircuitSpec::empty(1);
        c.push_rotation(Gate::Ry { qubit: 0 }, 0.7);
        let s = StateVector::from_circuit(&c).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new((0.35f64).cos(), 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new((0.35f64).sin(), 0.0)));
    }

    #[test]
    fn ansatz_shape() {
        let c = hardware_efficient_ansatz(3, 2, &[0.1; 12]).unwrap();
        assert_eq!(c.num_parameterized(), 12);
        assert_eq!(c.gates().len(), 12 + 4);
        assert!(hardware_efficient_ansatz(3, 2, &[0.1; 11]).is_err());
    }

    #[test]
    fn validation_rejects_bad_circuits() {
        assert!(CircuitSpec::new(2, vec![Gate::H { qubit: 2 }], vec![]).is_err());
        assert!(CircuitSpec::new(2, vec![Gate::Cnot { control: 1, target: 1 }], vec![]).is_err());
        assert!(CircuitSpec::new(2, vec![Gate::Ry { qubit: 0 }], vec![]).is_err());
        assert!(CircuitSpec::new(2, vec![Gate::Rz { qubit: 0 }], vec![f64::NAN]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = magic_input_circuit(4, 2, 0.3, 2, &mut rng).unwrap();
        let back = CircuitSpec::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(CircuitSpec::from_json(r#"{"n_qubits":1,"gates":[{"gate":"ry","qubit":0}],"params":[]}"#).is_err());
    }

    #[test]
    fn clifford_t_params_have_requested_t_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = clifford_plus_t_params(3, 4, 5, &mut rng).unwrap();
        let shifted = p.iter().filter(|x| ((*x / FRAC_PI_2).fract() - 0.5).abs() < 1e-9).count();
        assert_eq!(shifted, 5);
        assert!(clifford_plus_t_params(1, 1, 3, &mut rng).is_err());
    }
}
