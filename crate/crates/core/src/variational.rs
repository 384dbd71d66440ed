//! Gradients of the Bell magic for parameterized circuits and Adam ascent.
//!
//! Each parameter enters through one rotation `exp(-i theta sigma / 2)`. A
//! shift on one copy of the two-copy Bell measurement gives
//! `dP(r)/dtheta_k = [P_x(theta + s e_k) - P_x(theta - s e_k)] / sin(s)`,
//! where `P_x(a)` is the cross distribution of `|psi(a)>|psi(theta)>` and
//! `s = pi / (4 v)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{distinct, OutcomeBlock};
use crate::magic::{anticommuting_mass, bell_magic_from_distribution, q_distribution};
use crate::pauli::BellOutcome;
use crate::rng::stream_rng;
use crate::simulator::{
    bell_distribution, cross_distribution, hardware_efficient_ansatz, noisy_bell_distribution, CircuitSpec, Gate,
    StateVector,
};
use crate::stabilizer::random_clifford_circuit;
use crate::transform::xor_convolve;

/// Generator frequency of `exp(-i theta sigma / 2)`.
pub const DEFAULT_FREQUENCY: f64 = 0.5;

fn shift_for(frequency: f64) -> Result<f64> {
    let s = PI / (4.0 * frequency);
    if frequency.is_nan() || frequency <= 0.0 || s.sin().abs() < 1e-12 {
        return Err(Error::InvalidInput(format!("unusable shift frequency {frequency}")));
    }
    Ok(s)
}

/// `dP(r)/dtheta_k` for every outcome `r`.
pub fn grad_p_shift(circuit: &CircuitSpec, k: usize, frequency: f64) -> Result<Vec<f64>> {
    if k >= circuit.params().len() {
        return Err(Error::InvalidInput(format!("parameter {k} out of range")));
    }
    let s = shift_for(frequency)?;
    let base = StateVector::from_circuit(circuit)?;
    grad_p_with_base(circuit, &base, k, s)
}

fn grad_p_with_base(circuit: &CircuitSpec, base: &StateVector, k: usize, s: f64) -> Result<Vec<f64>> {
    let plus = cross_distribution(&StateVector::from_circuit(&circuit.shifted(k, s))?, base)?;
    let minus = cross_distribution(&StateVector::from_circuit(&circuit.shifted(k, -s))?, base)?;
    let scale = 1.0 / s.sin();
    Ok(plus.probs().iter().zip(minus.probs()).map(|(a, b)| (a - b) * scale).collect())
}

/// Bell magic and its exact gradient.
///
/// `dB = 4 sum_n dQ(n) A(n)` with `dQ = 2 (dP * P)` (XOR convolution).
pub fn bell_magic_and_gradient(circuit: &CircuitSpec, frequency: f64) -> Result<(f64, Vec<f64>)> {
    let s = shift_for(frequency)?;
    let base = StateVector::from_circuit(circuit)?;
    let dist = bell_distribution(&base)?;
    let q = q_distribution(&dist);
    let a = anticommuting_mass(&q);
    let b = 2.0 * q.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>();
    let grad = (0..circuit.params().len())
        .map(|k| {
            let dp = grad_p_with_base(circuit, &base, k, s)?;
            let dq = xor_convolve(&dp, dist.probs());
            Ok(8.0 * dq.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((b, grad))
}

pub fn grad_bell_magic_exact(circuit: &CircuitSpec, frequency: f64) -> Result<Vec<f64>> {
    Ok(bell_magic_and_gradient(circuit, frequency)?.1)
}

/// Central finite differences of the exact Bell magic.
pub fn grad_bell_magic_fd(circuit: &CircuitSpec, step: f64) -> Result<Vec<f64>> {
    let b = |c: &CircuitSpec| -> Result<f64> { Ok(bell_magic_from_distribution(&bell_distribution(&StateVector::from_circuit(c)?)?)) };
    (0..circuit.params().len())
        .map(|k| Ok((b(&circuit.shifted(k, step))? - b(&circuit.shifted(k, -step))?) / (2.0 * step)))
        .collect()
}

/// Unbiased sampled gradient from `3 N_Q` unshifted outcomes and `N_Q` outcomes
/// each of the `+` and `-` shifted cross settings (shift `pi/2`).
///
/// Each trial draws three distinct base outcomes and one shifted index `m`,
/// scoring `check_commute(r1 ^ r2, r3 ^ q_m)` for both shifted sets.
pub fn estimate_gradient<R: Rng + ?Sized>(
    base: &[BellOutcome],
    plus: &[BellOutcome],
    minus: &[BellOutcome],
    n_trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if base.len() < 3 || plus.is_empty() || plus.len() != minus.len() {
        return Err(Error::InvalidInput("need >= 3 base outcomes and equal, non-empty shifted sets".into()));
    }
    if n_trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let (b, p, m) = (OutcomeBlock::new(base)?, OutcomeBlock::new(plus)?, OutcomeBlock::new(minus)?);
    let (mut up, mut down) = (0i64, 0i64);
    for _ in 0..n_trials {
        let [i, j, k] = distinct::<3, _>(b.len(), rng);
        let s = rng.gen_range(0..p.len());
        up += OutcomeBlock::check((&b, i), (&b, j), (&b, k), (&p, s)) as i64;
        down += OutcomeBlock::check((&b, i), (&b, j), (&b, k), (&m, s)) as i64;
    }
    Ok(4.0 * (up - down) as f64 / n_trials as f64)
}

/// Diagonal of the quantum Fisher information: `2 (1 - |<psi|psi(theta + pi/2 e_k)>|^2)`.
pub fn qfim_diagonal(circuit: &CircuitSpec) -> Result<Vec<f64>> {
    let base = StateVector::from_circuit(circuit)?;
    (0..circuit.params().len())
        .map(|k| {
            let shifted = StateVector::from_circuit(&circuit.shifted(k, PI / 2.0))?;
            Ok(2.0 * (1.0 - base.inner(&shifted).norm_sqr()))
        })
        .collect()
}

/// QFIM diagonal entry from swap-test outcomes of the `+pi/2` cross setting.
pub fn qfim_from_outcomes(plus: &[BellOutcome]) -> Result<f64> {
    let overlap = crate::estimation::estimate_purity(plus)?;
    Ok(2.0 * (1.0 - overlap))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    /// One ascent step on `params` along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let (c1, c2) = (1.0 - self.beta1.powi(self.t as i32), 1.0 - self.beta2.powi(self.t as i32));
        for ((p, g), (m, v)) in params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p += self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

/// Multiples of `pi/2` plus uniform noise in `[-amplitude, amplitude]`.
pub fn near_stabilizer_init<R: Rng + ?Sized>(n_params: usize, amplitude: f64, rng: &mut R) -> Vec<f64> {
    (0..n_params)
        .map(|_| rng.gen_range(0..4) as f64 * PI / 2.0 + rng.gen_range(-amplitude..=amplitude))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GradientMode {
    Exact,
    /// `N_Q (2K + 3)` samples per epoch for `K` parameters.
    Sampled { n_samples: usize, trials_per_sample: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub n_qubits: usize,
    pub depth: usize,
    pub epochs: usize,
    pub lr: f64,
    pub mode: GradientMode,
    /// Depolarizing noise on each copy in sampled mode.
    pub noise: f64,
    pub init_amplitude: f64,
    pub seed: u64,
}

impl OptimizeConfig {
    pub fn new(n_qubits: usize, depth: usize, epochs: usize) -> Self {
        Self { n_qubits, depth, epochs, lr: 0.1, mode: GradientMode::Exact, noise: 0.0, init_amplitude: 0.05, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub epoch: usize,
    pub bell_magic: f64,
    pub grad_norm: f64,
    pub lr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub params: Vec<f64>,
    pub optimizer: Adam,
    pub epoch: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingResult {
    pub history: Vec<TrainingRecord>,
    pub best_bell_magic: f64,
    pub best_params: Vec<f64>,
    pub checkpoint: Checkpoint,
}

/// Gradient ascent of the Bell magic over the hardware-efficient ansatz.
///
/// `resume` continues from a checkpoint instead of a fresh near-stabilizer start.
pub fn optimize(config: &OptimizeConfig, resume: Option<Checkpoint>) -> Result<TrainingResult> {
    let k = 2 * config.n_qubits * config.depth;
    let mut checkpoint = match resume {
        Some(c) if c.params.len() == k => c,
        Some(c) => return Err(Error::DimensionMismatch { expected: k, got: c.params.len() }),
        None => {
            let mut rng = stream_rng(config.seed, 0);
            let params = near_stabilizer_init(k, config.init_amplitude, &mut rng);
            Checkpoint { params, optimizer: Adam::new(k, config.lr), epoch: 0, seed: config.seed }
        }
    };
    let mut history = Vec::with_capacity(config.epochs);
    let (mut best, mut best_params) = (f64::NEG_INFINITY, checkpoint.params.clone());
    for _ in 0..config.epochs {
        let circuit = hardware_efficient_ansatz(config.n_qubits, config.depth, &checkpoint.params)?;
        let (b, grad) = match config.mode {
            GradientMode::Exact => bell_magic_and_gradient(&circuit, DEFAULT_FREQUENCY)?,
            GradientMode::Sampled { n_samples, trials_per_sample } => {
                let mut rng = stream_rng(config.seed, 1 + checkpoint.epoch as u64);
                let b = bell_magic_from_distribution(&bell_distribution(&StateVector::from_circuit(&circuit)?)?);
                (b, sampled_gradient(&circuit, config.noise, n_samples, trials_per_sample, &mut rng)?)
            }
        };
        if b > best {
            best = b;
            best_params = checkpoint.params.clone();
        }
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        history.push(TrainingRecord { epoch: checkpoint.epoch, bell_magic: b, grad_norm, lr: checkpoint.optimizer.lr });
        checkpoint.optimizer.step(&mut checkpoint.params, &grad);
        checkpoint.epoch += 1;
    }
    Ok(TrainingResult { history, best_bell_magic: best, best_params, checkpoint })
}

/// Full sampled gradient for every parameter, sharing one base sample set.
pub fn sampled_gradient<R: Rng + ?Sized>(
    circuit: &CircuitSpec,
    noise: f64,
    n_samples: usize,
    trials_per_sample: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let base_state = StateVector::from_circuit(circuit)?;
    let base = noisy_bell_distribution(&bell_distribution(&base_state)?, noise)?.sample(3 * n_samples, rng)?;
    (0..circuit.params().len())
        .map(|k| {
            let mut shifted = |sign: f64| -> Result<Vec<BellOutcome>> {
                let s = StateVector::from_circuit(&circuit.shifted(k, sign * PI / 2.0))?;
                noisy_bell_distribution(&cross_distribution(&s, &base_state)?, noise)?.sample(n_samples, rng)
            };
            let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
            estimate_gradient(&base, &plus, &minus, trials_per_sample * n_samples, rng)
        })
        .collect()
}

/// `Ry(theta)` on qubit 0 of `|0...0>` followed by a random Clifford circuit.
pub fn trainability_circuit<R: Rng + ?Sized>(n_qubits: usize, depth: usize, theta: f64, rng: &mut R) -> Result<CircuitSpec> {
    let mut c = CircuitSpec::empty(n_qubits);
    c.push_rotation(Gate::Ry { qubit: 0 }, theta);
    c.then(&random_clifford_circuit(n_qubits, depth, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientStats {
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `variance`.
    pub variance_se: f64,
    pub samples: usize,
}

/// Statistics of `dB/dtheta` over uniform `theta` and random Clifford circuits.
pub fn gradient_variance(n_qubits: usize, depth: usize, samples: usize, seed: u64) -> Result<GradientStats> {
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let grads = (0..samples)
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let theta = rng.gen_range(0.0..2.0 * PI);
            let c = trainability_circuit(n_qubits, depth, theta, &mut rng)?;
            Ok(grad_bell_magic_exact(&c, DEFAULT_FREQUENCY)?[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = samples as f64;
    let mean = grads.iter().sum::<f64>() / n;
    let dev2: Vec<f64> = grads.iter().map(|g| (g - mean).powi(2)).collect();
    let variance = dev2.iter().sum::<f64>() / (n - 1.0);
    let m4 = dev2.iter().map(|d| d * d).sum::<f64>() / n;
    Ok(GradientStats { mean, variance, variance_se: ((m4 - variance * variance).max(0.0) / n).sqrt(), samples })
}
