//! Sample-based Bell magic estimation, noise characterization and mitigation.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::BellOutcome;
use crate::simulator::{noisy_bell_distribution, BellDistribution};

/// Trials per sample when the trial count is not given.
pub const DEFAULT_TRIALS_PER_SAMPLE: usize = 10;

/// Outcomes packed into contiguous word arrays for the trial loops.
pub(crate) struct OutcomeBlock {
    words: usize,
    z: Vec<u64>,
    x: Vec<u64>,
}

impl OutcomeBlock {
    pub(crate) fn new(outcomes: &[BellOutcome]) -> Result<Self> {
        let first = outcomes.first().ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
        let n = first.num_qubits();
        let words = first.z_words().len();
        let mut z = Vec::with_capacity(words * outcomes.len());
        let mut x = Vec::with_capacity(words * outcomes.len());
        for o in outcomes {
            if o.num_qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, got: o.num_qubits() });
            }
            z.extend_from_slice(o.z_words());
            x.extend_from_slice(o.x_words());
        }
        Ok(Self { words, z, x })
    }

    pub(crate) fn len(&self) -> usize {
        self.z.len() / self.words
    }

    /// `check_commute(o_a ^ o_b, o_c ^ o_d)` across blocks.
    pub(crate) fn check(a: (&Self, usize), b: (&Self, usize), c: (&Self, usize), d: (&Self, usize)) -> u32 {
        let w = a.0.words;
        let mut acc = 0u32;
        for i in 0..w {
            let lz = a.0.z[a.1 * w + i] ^ b.0.z[b.1 * w + i];
            let lx = a.0.x[a.1 * w + i] ^ b.0.x[b.1 * w + i];
            let rz = c.0.z[c.1 * w + i] ^ d.0.z[d.1 * w + i];
            let rx = c.0.x[c.1 * w + i] ^ d.0.x[d.1 * w + i];
            acc ^= ((lz & rx) ^ (lx & rz)).count_ones();
        }
        2 * (acc & 1)
    }
}

/// Draws `K` distinct indices below `n`.
pub(crate) fn distinct<const K: usize, R: Rng + ?Sized>(n: usize, rng: &mut R) -> [usize; K] {
    let mut out = [0; K];
    let mut i = 0;
    while i < K {
        let v = rng.gen_range(0..n);
        if !out[..i].contains(&v) {
            out[i] = v;
            i += 1;
        }
    }
    out
}

/// How trials select outcome quadruples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Each trial draws four distinct outcomes afresh.
    #[default]
    Resample,
    /// Every outcome is used in exactly one quadruple.
    Disjoint,
}

/// Averages `check_commute(r1 ^ r2, r3 ^ r4)` over `n_trials` random quadruples.
///
/// Indices are distinct within a trial; with at most three samples they are
/// drawn with replacement instead.
pub fn estimate_bell_magic<R: Rng + ?Sized>(outcomes: &[BellOutcome], n_trials: usize, rng: &mut R) -> Result<f64> {
    if n_trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let block = OutcomeBlock::new(outcomes)?;
    let n = block.len();
    let mut total = 0u64;
    for _ in 0..n_trials {
        let [a, b, c, d] = if n >= 4 { distinct::<4, _>(n, rng) } else { std::array::from_fn(|_| rng.gen_range(0..n)) };
        total += OutcomeBlock::check((&block, a), (&block, b), (&block, c), (&block, d)) as u64;
    }
    Ok(total as f64 / n_trials as f64)
}

/// Uses each outcome once, in `floor(N_Q / 4)` disjoint quadruples.
pub fn estimate_bell_magic_disjoint<R: Rng + ?Sized>(outcomes: &[BellOutcome], rng: &mut R) -> Result<f64> {
    if outcomes.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: outcomes.len() });
    }
    let block = OutcomeBlock::new(outcomes)?;
    let mut order: Vec<usize> = (0..block.len()).collect();
    order.shuffle(rng);
    let quads: Vec<&[usize]> = order.chunks_exact(4).collect();
    let total: u64 = quads
        .iter()
        .map(|q| OutcomeBlock::check((&block, q[0]), (&block, q[1]), (&block, q[2]), (&block, q[3])) as u64)
        .sum();
    Ok(total as f64 / quads.len() as f64)
}

/// Standard deviation of the disjoint-quadruple estimator: `sqrt(8B/N_Q (1 - B/2))`.
pub fn predicted_std(bell_magic: f64, n_samples: usize) -> f64 {
    (8.0 * bell_magic / n_samples as f64 * (1.0 - bell_magic / 2.0)).max(0.0).sqrt()
}

/// Samples for additive error `delta_b` with failure probability `fail_prob`.
pub fn required_samples(delta_b: f64, fail_prob: f64) -> usize {
    (8.0 / (delta_b * delta_b) * (2.0 / fail_prob).ln()).ceil() as usize
}

/// Bootstrap standard deviation of an arbitrary estimator.
pub fn bootstrap_std<R, F>(outcomes: &[BellOutcome], n_boot: usize, rng: &mut R, mut estimator: F) -> Result<f64>
where
    R: Rng + ?Sized,
    F: FnMut(&[BellOutcome], &mut R) -> Result<f64>,
{
    if n_boot < 2 {
        return Err(Error::InvalidInput("need at least two bootstrap replicates".into()));
    }
    let mut values = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let resampled: Vec<BellOutcome> =
            (0..outcomes.len()).map(|_| outcomes[rng.gen_range(0..outcomes.len())].clone()).collect();
        values.push(estimator(&resampled, rng)?);
    }
    let mean = values.iter().sum::<f64>() / n_boot as f64;
    Ok((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_boot - 1) as f64).sqrt())
}

/// Swap-test purity `1 - 2 * (fraction of outcomes with odd AND parity)`.
pub fn estimate_purity(outcomes: &[BellOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let odd = outcomes.iter().filter(|o| o.and_parity()).count();
    Ok(1.0 - 2.0 * odd as f64 / outcomes.len() as f64)
}

/// Unbiased estimate of `sum_r P(r)^2` from pairwise collisions.
pub fn estimate_collision(outcomes: &[BellOutcome]) -> Result<f64> {
    let n = outcomes.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let mut counts: HashMap<&BellOutcome, u64> = HashMap::new();
    for o in outcomes {
        *counts.entry(o).or_default() += 1;
    }
    let pairs: u64 = counts.values().map(|c| c * (c - 1)).sum();
    Ok(pairs as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// `2^-N` without overflow for large registers.
fn inv_dim(n_qubits: usize) -> f64 {
    0.5f64.powi(n_qubits.min(i32::MAX as usize) as i32)
}

/// Global depolarizing probability consistent with a measured purity.
///
/// Purities above one are clamped to one; purities at or below `2^-N` give `p = 1`.
pub fn estimate_depolarizing(purity: f64, n_qubits: usize) -> f64 {
    let inv_d = inv_dim(n_qubits);
    let purity = purity.min(1.0);
    if purity <= inv_d {
        return 1.0;
    }
    // (1 - p)^2 = (d purity - 1) / (d - 1)
    let kept = (purity - inv_d) / (1.0 - inv_d);
    1.0 - kept.sqrt()
}

/// Mitigated Bell magic, raw and clamped to `[0, 2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mitigated {
    pub exact: f64,
    pub exact_clamped: f64,
    /// Form that assumes `B^R ~ B(rho_m) ~ 1`, suited to large registers.
    pub approx: f64,
    pub approx_clamped: f64,
}

/// Inverts `B_dp = (1-pc)^2 B + pc^2 B(rho_m) + 2 pc (1-pc) B^R`, with
/// `pc = 1 - (1-p)^4` and `B^R = 1 - (C - 4^-N pc) / (1 - pc)` for the noisy
/// collision probability `C`.
pub fn mitigate(b_noisy: f64, p: f64, n_qubits: usize, collision: f64) -> Result<Mitigated> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("depolarizing probability {p} outside [0, 1]")));
    }
    let keep = (1.0 - p).powi(4);
    let pc = 1.0 - keep;
    if keep < f64::EPSILON {
        return Err(Error::Mitigation(format!("depolarizing probability {p} leaves no signal")));
    }
    let inv_d2 = inv_dim(n_qubits).powi(2);
    let mixed = 1.0 - inv_d2;
    let residual = 1.0 - (collision - inv_d2 * pc) / keep;
    let exact = (b_noisy - pc * pc * mixed - 2.0 * pc * keep * residual) / (keep * keep);
    let approx = (b_noisy - pc * (2.0 - pc)) / (keep * keep);
    Ok(Mitigated { exact, exact_clamped: exact.clamp(0.0, 2.0), approx, approx_clamped: approx.clamp(0.0, 2.0) })
}

/// Inverts the distribution-level noise map, clipping negatives and renormalizing.
pub fn mitigate_distribution(noisy: &BellDistribution, p: f64) -> Result<BellDistribution> {
    let keep = (1.0 - p) * (1.0 - p);
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Mitigation(format!("cannot invert depolarizing probability {p}")));
    }
    let flat = p * (2.0 - p) / noisy.probs().len() as f64;
    let mut probs: Vec<f64> = noisy.probs().iter().map(|q| ((q - flat) / keep).max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|q| *q /= total);
    BellDistribution::new(noisy.num_qubits(), probs)
}

/// Mitigated Meyer-Wallach measure: `(E_dp - p(2-p)) / (1-p)^2`.
pub fn mitigate_meyer_wallach(e_noisy: f64, p: f64) -> Result<f64> {
    let keep = (1.0 - p) * (1.0 - p);
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Mitigation(format!("cannot invert depolarizing probability {p}")));
    }
    Ok((e_noisy - p * (2.0 - p)) / keep)
}

/// Meyer-Wallach measure from Bell outcomes; `tr(rho_k^2) = 1 - 2 P(AND_k = 1)`.
pub fn estimate_meyer_wallach(outcomes: &[BellOutcome]) -> Result<f64> {
    let first = outcomes.first().ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    let n = first.num_qubits();
    let mut odd = vec![0usize; n];
    for o in outcomes {
        for (k, c) in odd.iter_mut().enumerate() {
            *c += o.and_bit(k) as usize;
        }
    }
    let m = outcomes.len() as f64;
    let mean = odd.iter().map(|&c| 1.0 - 2.0 * c as f64 / m).sum::<f64>() / n as f64;
    Ok(2.0 * (1.0 - mean))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub mode: SamplingMode,
    /// Trials for [`SamplingMode::Resample`]; `None` means `10 N_Q`.
    pub n_trials: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { mode: SamplingMode::Resample, n_trials: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub n_qubits: usize,
    pub n_samples: usize,
    pub n_trials: usize,
    pub mode: SamplingMode,
    pub b_hat: f64,
    pub std_err: f64,
    pub purity: f64,
    pub p_hat: f64,
    /// `None` when the estimated noise leaves nothing to invert.
    pub mitigated: Option<Mitigated>,
}

impl EstimationResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Full pipeline: Bell magic, purity, noise estimate and mitigation.
pub fn estimate<R: Rng + ?Sized>(outcomes: &[BellOutcome], config: &EstimatorConfig, rng: &mut R) -> Result<EstimationResult> {
    let n_samples = outcomes.len();
    let n_qubits = outcomes.first().ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?.num_qubits();
    let (b_hat, n_trials) = match config.mode {
        SamplingMode::Resample => {
            let trials = config.n_trials.unwrap_or(DEFAULT_TRIALS_PER_SAMPLE * n_samples);
            (estimate_bell_magic(outcomes, trials, rng)?, trials)
        }
        SamplingMode::Disjoint => (estimate_bell_magic_disjoint(outcomes, rng)?, n_samples / 4),
    };
    let purity = estimate_purity(outcomes)?;
    let p_hat = estimate_depolarizing(purity, n_qubits);
    let collision = if n_samples >= 2 { estimate_collision(outcomes)? } else { 0.0 };
    let mitigated = mitigate(b_hat, p_hat, n_qubits, collision).ok();
    Ok(EstimationResult {
        n_qubits,
        n_samples,
        n_trials,
        mode: config.mode,
        b_hat,
        std_err: predicted_std(b_hat.clamp(0.0, 2.0), n_samples),
        purity,
        p_hat,
        mitigated,
    })
}

/// Samples `n_samples` outcomes of `dist` under depolarizing noise `p` and estimates.
pub fn sample_and_estimate<R: Rng + ?Sized>(
    dist: &BellDistribution,
    p: f64,
    n_samples: usize,
    config: &EstimatorConfig,
    rng: &mut R,
) -> Result<EstimationResult> {
    let noisy = if p > 0.0 { noisy_bell_distribution(dist, p)? } else { dist.clone() };
    let outcomes = noisy.sample(n_samples, rng)?;
    estimate(&outcomes, config, rng)
}

/// Estimation sweep over noise levels and sample counts for magic-input states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_qubits: usize,
    pub n_magic: usize,
    pub phi: f64,
    pub depth: usize,
    pub noise: Vec<f64>,
    pub sample_counts: Vec<usize>,
    pub trials_per_sample: usize,
    pub reps: usize,
    pub seed: u64,
}

/// One row of the sweep CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    #[serde(rename = "N_Q")]
    pub n_samples: usize,
    #[serde(rename = "N_R")]
    pub n_trials: usize,
    pub p: f64,
    #[serde(rename = "B_hat")]
    pub b_hat: f64,
    #[serde(rename = "B_mtg")]
    pub b_mitigated: f64,
    pub std: f64,
    pub seed: u64,
    #[serde(rename = "B_exact")]
    pub b_exact: f64,
    #[serde(rename = "B_mtg_approx")]
    pub b_mitigated_approx: f64,
}

/// Runs every `(rep, p, N_Q)` cell; each rep draws a fresh circuit.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    let per_rep: Vec<Vec<SweepRow>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = crate::rng::derive_seed(config.seed, rep as u64);
            let mut rng = crate::rng::stream_rng(seed, 0);
            let circuit = crate::simulator::magic_input_circuit(config.n_qubits, config.n_magic, config.phi, config.depth, &mut rng)?;
            let clean = crate::simulator::bell_distribution(&crate::simulator::StateVector::from_circuit(&circuit)?)?;
            let b_exact = crate::magic::bell_magic_from_distribution(&clean);
            let mut rows = Vec::new();
            for &p in &config.noise {
                let sampler = noisy_bell_distribution(&clean, p)?.sampler()?;
                for &nq in &config.sample_counts {
                    let outcomes = sampler.sample_n(nq, &mut rng);
                    let cfg = EstimatorConfig { mode: SamplingMode::Resample, n_trials: Some(config.trials_per_sample * nq) };
                    let r = estimate(&outcomes, &cfg, &mut rng)?;
                    let m = r.mitigated.unwrap_or(Mitigated { exact: f64::NAN, exact_clamped: f64::NAN, approx: f64::NAN, approx_clamped: f64::NAN });
                    rows.push(SweepRow {
                        n_qubits: config.n_qubits,
                        n_samples: nq,
                        n_trials: r.n_trials,
                        p,
                        b_hat: r.b_hat,
                        b_mitigated: m.exact,
                        std: r.std_err,
                        seed,
                        b_exact,
                        b_mitigated_approx: m.approx,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magic::{bell_magic_from_distribution, fixtures, meyer_wallach};
    use crate::simulator::{bell_distribution, StateVector};
    use crate::PauliString;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn purity_of_uniform_outcomes() {
        let all: Vec<BellOutcome> = (0..16).map(|i| PauliString::from_index(2, i)).collect();
        assert!((estimate_purity(&all).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(estimate_depolarizing(0.25, 2), 1.0);
        assert_eq!(estimate_depolarizing(1.2, 2), 0.0);
    }

    #[test]
    fn depolarizing_check_value() {
        assert!((estimate_depolarizing(0.83375, 3) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn required_samples_check_value() {
        assert_eq!(required_samples(0.1, 0.05), 2952);
    }

    #[test]
    fn mitigation_rejects_full_noise() {
        assert!(matches!(mitigate(0.9, 1.0, 3, 0.0), Err(Error::Mitigation(_))));
        assert!(mitigate_distribution(&BellDistribution::uniform(1), 1.0).is_err());
    }

    #[test]
    fn collision_estimate_counts_pairs() {
        let a: PauliString = "XZ".parse().unwrap();
        let b: PauliString = "ZZ".parse().unwrap();
        let outs = vec![a.clone(), a.clone(), a, b];
        assert!((estimate_collision(&outs).unwrap() - 6.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn few_samples_use_replacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let outs: Vec<BellOutcome> = vec!["X".parse().unwrap(), "Z".parse().unwrap(), "I".parse().unwrap()];
        let b = estimate_bell_magic(&outs, 10_000, &mut rng).unwrap();
        // Exact value: all 81 ordered draws with replacement.
        let mut total = 0.0;
        for a in &outs {
            for b2 in &outs {
                for c in &outs {
                    for d in &outs {
                        total += crate::pauli::check_commute_xor(a, b2, c, d) as f64;
                    }
                }
            }
        }
        let exact = total / 81.0;
        assert!((b - exact).abs() < 0.05);
        assert!(estimate_bell_magic_disjoint(&outs, &mut rng).is_err());
    }

    #[test]
    fn unbiased_on_t_state() {
        let d = bell_distribution(&StateVector::t_state()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reps = 400;
        let vals: Vec<f64> = (0..reps)
            .map(|_| estimate_bell_magic(&d.sample(100, &mut rng).unwrap(), 1000, &mut rng).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sd / (reps as f64).sqrt());
    }

    #[test]
    fn meyer_wallach_mitigation_closes() {
        let psi = StateVector::haar_random(3, &mut ChaCha8Rng::seed_from_u64(4));
        let clean = bell_distribution(&psi).unwrap();
        for p in [0.0, 0.1, 0.3] {
            let noisy = noisy_bell_distribution(&clean, p).unwrap();
            let e = crate::magic::meyer_wallach_from_distribution(&noisy);
            assert!((mitigate_meyer_wallach(e, p).unwrap() - meyer_wallach(&psi)).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let d = bell_distribution(&fixtures::t_product(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = sample_and_estimate(&d, 0.1, 200, &EstimatorConfig::default(), &mut rng).unwrap();
        assert_eq!(EstimationResult::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Exact noisy inputs reproduce the noiseless Bell magic.
        #[test]
        fn closed_loop_mitigation(seed in 0u64..100_000, n in 1usize..5, p in 0.0f64..0.3) {
            let psi = StateVector::haar_random(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let clean = bell_distribution(&psi).unwrap();
            let noisy = noisy_bell_distribution(&clean, p).unwrap();
            let p_hat = estimate_depolarizing(noisy.purity(), n);
            prop_assert!((p_hat - p).abs() < 1e-9);
            let m = mitigate(bell_magic_from_distribution(&noisy), p_hat, n, noisy.collision()).unwrap();
            prop_assert!((m.exact - bell_magic_from_distribution(&clean)).abs() < 1e-9);
            let back = mitigate_distribution(&noisy, p).unwrap();
            for (a, b) in back.probs().iter().zip(clean.probs()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
