//! Stabilizer-versus-magic discrimination with the sampled Bell magic.
//!
//! A stabilizer state never produces an anticommuting quadruple, so any
//! positive estimate certifies magic. Errors are one-sided: a magical state
//! whose samples happen to commute pairwise is misclassified.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::estimate_bell_magic;
use crate::rng::stream_rng;
use crate::simulator::{
    bell_distribution, clifford_plus_t_params, hardware_efficient_ansatz, magic_input_circuit,
    noisy_bell_distribution, StateVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Stabilizer,
    Magical,
}

impl Label {
    fn sign(self) -> i64 {
        match self {
            Label::Stabilizer => -1,
            Label::Magical => 1,
        }
    }
}

/// Magical iff `b_hat > threshold`; ties go to stabilizer.
pub fn classify(b_hat: f64, threshold: f64) -> Label {
    if b_hat > threshold { Label::Magical } else { Label::Stabilizer }
}

/// Probability that `n_samples` Bell samples of a Clifford-rotated
/// `cos(phi/2)|0> + sin(phi/2)|1>` (padded with stabilizer qubits) never
/// reveal magic.
///
/// Per qubit the outcomes `I, Z, X` carry mass `1/2, cos^2(phi)/2,
/// sin^2(phi)/2`; an error occurs iff at most two of them appear, which by
/// inclusion-exclusion gives
/// `4^-N [(3 - cos 2phi)^N + (3 + cos 2phi)^N] - 2^-N [sin^2N phi + cos^2N phi]`.
/// At `phi = 0` the state is a stabilizer state and the value is 1.
pub fn p_error_single_magic(phi: f64, n_samples: usize) -> f64 {
    let n = n_samples as i32;
    let c2 = (2.0 * phi).cos();
    let (s2, co2) = (phi.sin().powi(2), phi.cos().powi(2));
    let quarter = |v: f64| (v / 4.0).powi(n);
    let half = |v: f64| (v / 2.0).powi(n);
    quarter(3.0 - c2) + quarter(3.0 + c2) - half(s2) - half(co2)
}

/// Approximate error for highly magical states: `2^{-(N_Q - 1)(N_Q - 2)/2}`.
pub fn p_error_random(n_samples: usize) -> f64 {
    if n_samples < 2 {
        return 1.0;
    }
    let e = (n_samples as f64 - 1.0) * (n_samples as f64 - 2.0) / 2.0;
    2f64.powf(-e)
}

/// Smallest `N_Q` with `p_error_single_magic(phi, N_Q) < target`.
pub fn samples_for_error(phi: f64, target: f64, max_samples: usize) -> Option<usize> {
    (1..=max_samples).find(|&n| p_error_single_magic(phi, n) < target)
}

/// Heuristic helper: sample count for a target `delta_b` under depolarizing
/// noise, `N_Q ~ 1 / ((1-p)^16 delta_b^2)`. Not a bound.
pub fn noisy_sample_scaling(delta_b: f64, p: f64) -> f64 {
    1.0 / ((1.0 - p).powi(16) * delta_b * delta_b)
}

/// Fraction of misclassified examples.
pub fn classification_error(b_hats: &[f64], labels: &[Label], threshold: f64) -> f64 {
    let wrong = b_hats.iter().zip(labels).filter(|(b, l)| classify(**b, threshold) != **l).count();
    wrong as f64 / b_hats.len().max(1) as f64
}

/// Threshold maximizing `sum_i sign(b_i - t) y_i` over midpoints between
/// distinct estimates plus `-inf` and `+inf`; ties pick the smallest `t`.
pub fn learn_threshold(b_hats: &[f64], labels: &[Label]) -> Result<f64> {
    if b_hats.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: b_hats.len(), got: labels.len() });
    }
    if b_hats.is_empty() || b_hats.iter().any(|b| b.is_nan()) {
        return Err(Error::InvalidInput("need non-empty, non-NaN estimates".into()));
    }
    let mut sorted = b_hats.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut candidates = vec![f64::NEG_INFINITY];
    candidates.extend(sorted.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    candidates.push(f64::INFINITY);
    let score = |t: f64| -> i64 {
        b_hats.iter().zip(labels).map(|(b, l)| if *b > t { l.sign() } else { -l.sign() }).sum()
    };
    let mut best = (candidates[0], score(candidates[0]));
    for &t in &candidates[1..] {
        let s = score(t);
        if s > best.1 {
            best = (t, s);
        }
    }
    Ok(best.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n_qubits: usize,
    pub n_magic: usize,
    pub phi: f64,
    pub depth: usize,
    pub reps: usize,
    /// Trials per sample; `N_R = trials_per_sample * N_Q`. The closed-form
    /// error probabilities assume large `N_R`, hence the generous default.
    pub trials_per_sample: usize,
    pub seed: u64,
}

impl MonteCarloConfig {
    pub fn new(n_qubits: usize, n_magic: usize, phi: f64) -> Self {
        Self { n_qubits, n_magic, phi, depth: 4, reps: 2000, trials_per_sample: 500, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub n_samples: usize,
    pub p_error: f64,
    /// Binomial standard error of `p_error`.
    pub std_err: f64,
    pub reps: usize,
}

impl ErrorEstimate {
    fn from_counts(n_samples: usize, errors: usize, reps: usize) -> Self {
        let p = errors as f64 / reps as f64;
        Self { n_samples, p_error: p, std_err: (p * (1.0 - p) / reps as f64).sqrt(), reps }
    }
}

/// Empirical misclassification rate of magic-input states at each `N_Q`.
///
/// Every repetition draws a fresh circuit and fresh samples; an error is an
/// estimate of exactly zero.
pub fn monte_carlo_error(config: &MonteCarloConfig, sample_counts: &[usize]) -> Result<Vec<ErrorEstimate>> {
    if config.reps == 0 || config.trials_per_sample == 0 {
        return Err(Error::InvalidInput("reps and trials_per_sample must be positive".into()));
    }
    let per_rep: Vec<Vec<bool>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(config.seed, rep as u64);
            let circuit = magic_input_circuit(config.n_qubits, config.n_magic, config.phi, config.depth, &mut rng)?;
            let dist = bell_distribution(&StateVector::from_circuit(&circuit)?)?;
            let sampler = dist.sampler()?;
            sample_counts
                .iter()
                .map(|&nq| {
                    let outcomes = sampler.sample_n(nq, &mut rng);
                    Ok(estimate_bell_magic(&outcomes, config.trials_per_sample * nq, &mut rng)? <= 0.0)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(sample_counts
        .iter()
        .enumerate()
        .map(|(i, &nq)| ErrorEstimate::from_counts(nq, per_rep.iter().filter(|r| r[i]).count(), config.reps))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningConfig {
    pub n_qubits: usize,
    pub depth: usize,
    pub n_per_class: usize,
    pub p: f64,
    pub splits: usize,
    pub train_fraction: f64,
    pub trials_per_sample: usize,
    pub seed: u64,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self { n_qubits: 3, depth: 2, n_per_class: 20, p: 0.15, splits: 10, train_fraction: 0.8, trials_per_sample: 10, seed: 0 }
    }
}

/// Labelled estimate for one state, as written to the labelled-runs CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledRun {
    pub b_hat: f64,
    pub label: Label,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningPoint {
    pub n_samples: usize,
    pub train_error: f64,
    pub test_error: f64,
    pub mean_threshold: f64,
}

/// Noisy estimates for a balanced set of Clifford and random-angle circuits.
pub fn labeled_runs(config: &LearningConfig, n_samples: usize) -> Result<Vec<LabeledRun>> {
    let k = 2 * config.n_qubits * config.depth;
    (0..2 * config.n_per_class)
        .into_par_iter()
        .map(|i| {
            let seed = crate::rng::derive_seed(config.seed, i as u64);
            let mut state_rng = stream_rng(config.seed, i as u64);
            let label = if i < config.n_per_class { Label::Stabilizer } else { Label::Magical };
            let params = match label {
                Label::Stabilizer => clifford_plus_t_params(config.n_qubits, config.depth, 0, &mut state_rng)?,
                Label::Magical => (0..k).map(|_| state_rng.gen_range(0.0..2.0 * PI)).collect(),
            };
            let circuit = hardware_efficient_ansatz(config.n_qubits, config.depth, &params)?;
            let clean = bell_distribution(&StateVector::from_circuit(&circuit)?)?;
            let noisy = noisy_bell_distribution(&clean, config.p)?;
            let mut rng = stream_rng(seed, n_samples as u64);
            let outcomes = noisy.sample(n_samples, &mut rng)?;
            let b_hat = estimate_bell_magic(&outcomes, config.trials_per_sample * n_samples, &mut rng)?;
            Ok(LabeledRun { b_hat, label, n_samples, seed })
        })
        .collect()
}

/// Train/test errors of the learned threshold, averaged over random splits.
pub fn learning_curve(config: &LearningConfig, sample_counts: &[usize]) -> Result<Vec<LearningPoint>> {
    sample_counts
        .iter()
        .map(|&nq| {
            let runs = labeled_runs(config, nq)?;
            let mut rng = stream_rng(config.seed ^ 0x5eed, nq as u64);
            let n_train = ((runs.len() as f64) * config.train_fraction).round() as usize;
            let (mut train_err, mut test_err, mut thr) = (0.0, 0.0, 0.0);
            for _ in 0..config.splits {
                let mut idx: Vec<usize> = (0..runs.len()).collect();
                idx.shuffle(&mut rng);
                let (tr, te) = idx.split_at(n_train);
                let pick = |s: &[usize]| -> (Vec<f64>, Vec<Label>) { s.iter().map(|&i| (runs[i].b_hat, runs[i].label)).unzip() };
                let (trb, trl) = pick(tr);
                let (teb, tel) = pick(te);
                let t = learn_threshold(&trb, &trl)?;
                train_err += classification_error(&trb, &trl, t);
                test_err += classification_error(&teb, &tel, t);
                thr += t;
            }
            let s = config.splits as f64;
            Ok(LearningPoint { n_samples: nq, train_error: train_err / s, test_error: test_err / s, mean_threshold: thr / s })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    /// Exact probability that a multinomial sample over three categories
    /// misses at least one of them, by enumerating all count vectors.
    fn missing_category_probability(p: [f64; 3], n: usize) -> f64 {
        let mut total = 0.0;
        let ln_fact = |k: usize| (1..=k).map(|v| (v as f64).ln()).sum::<f64>();
        for a in 0..=n {
            for b in 0..=n - a {
                let c = n - a - b;
                if a > 0 && b > 0 && c > 0 {
                    continue;
                }
                let mut lp = ln_fact(n) - ln_fact(a) - ln_fact(b) - ln_fact(c);
                for (k, pk) in [(a, p[0]), (b, p[1]), (c, p[2])] {
                    if k > 0 {
                        lp += k as f64 * pk.ln();
                    }
                }
                let zero = [(a, p[0]), (b, p[1]), (c, p[2])].iter().any(|&(k, pk)| k > 0 && pk == 0.0);
                if !zero {
                    total += lp.exp();
                }
            }
        }
        total
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for phi in [PI / 20.0, PI / 8.0, FRAC_PI_4, 1.0] {
            let probs = [0.5, phi.cos().powi(2) / 2.0, phi.sin().powi(2) / 2.0];
            for n in [1, 2, 5, 10, 30] {
                let exact = missing_category_probability(probs, n);
                assert!((p_error_single_magic(phi, n) - exact).abs() < 1e-12, "phi={phi} n={n}");
            }
        }
        assert!((p_error_single_magic(0.0, 7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_count_examples() {
        assert_eq!(samples_for_error(FRAC_PI_4, 0.01, 1000), Some(19));
        let n = samples_for_error(PI / 20.0, 0.01, 10_000).unwrap();
        assert!((370..=380).contains(&n), "{n}");
    }

    #[test]
    fn random_state_error() {
        assert_eq!(p_error_random(2), 1.0);
        assert!((p_error_random(5) - 2f64.powi(-6)).abs() < 1e-18);
    }

    #[test]
    fn threshold_learning() {
        let b = [0.0, 0.1, 0.5, 0.6];
        let y = [Label::Stabilizer, Label::Stabilizer, Label::Magical, Label::Magical];
        let t = learn_threshold(&b, &y).unwrap();
        assert!((t - 0.3).abs() < 1e-15);
        assert_eq!(classification_error(&b, &y, t), 0.0);
        // All-magical data: the -inf sentinel classifies everything magical.
        assert_eq!(learn_threshold(&[0.2, 0.4], &[Label::Magical; 2]).unwrap(), f64::NEG_INFINITY);
        assert_eq!(classify(0.3, 0.3), Label::Stabilizer);
        assert!(learn_threshold(&[0.1], &[]).is_err());
    }

    proptest! {
        #[test]
        fn learned_threshold_is_optimal(data in proptest::collection::vec((0.0f64..1.0, any::<bool>()), 1..30)) {
            let b: Vec<f64> = data.iter().map(|d| d.0).collect();
            let y: Vec<Label> = data.iter().map(|d| if d.1 { Label::Magical } else { Label::Stabilizer }).collect();
            let t = learn_threshold(&b, &y).unwrap();
            let err = classification_error(&b, &y, t);
            // No threshold at any data point does better.
            for &c in &b {
                prop_assert!(err <= classification_error(&b, &y, c) + 1e-12);
            }
        }
    }
}
