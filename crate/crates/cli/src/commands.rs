use anyhow::{bail, Context};
use bell_magic::discrimination::{
    labeled_runs, learning_curve, monte_carlo_error, p_error_random, p_error_single_magic, LearningConfig,
    MonteCarloConfig,
};
use bell_magic::estimation::{
    estimate, estimate_depolarizing, estimate_meyer_wallach, estimate_purity, log_log_slope, mitigate_meyer_wallach,
    sweep, EstimationResult, EstimatorConfig, SamplingMode, SweepConfig,
};
use bell_magic::magic::{additive, bell_magic_from_distribution, fixtures, meyer_wallach, pure_state_bound, stabilizer_renyi};
use bell_magic::rng::{stream_rng, StreamRng};
use bell_magic::simulator::{
    bell_distribution, magic_input_circuit, noisy_bell_distribution, StateVector, MAX_DENSE_QUBITS,
};
use bell_magic::stabilizer::{random_clifford, DEFAULT_CLIFFORD_DEPTH};
use bell_magic::variational::{optimize, Checkpoint, GradientMode, OptimizeConfig};
use bell_magic::{BellDistribution, BellOutcome, CircuitSpec, StabilizerTableau};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use crate::config::{DiscriminateOpts, StateOpts, SweepOpts, TrainOpts};
use crate::UsageError;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> anyhow::Result<()> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn check_noise(p: f64) -> anyhow::Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        bail!(usage(format!("noise {p} is outside [0, 1]")));
    }
    Ok(p)
}

fn parse_mode(mode: Option<&str>) -> anyhow::Result<SamplingMode> {
    match mode.unwrap_or("resample") {
        "resample" => Ok(SamplingMode::Resample),
        "disjoint" => Ok(SamplingMode::Disjoint),
        other => Err(usage(format!("unknown mode {other:?} (expected resample or disjoint)"))),
    }
}

/// A prepared state: dense when small enough, otherwise a stabilizer tableau.
enum Prepared {
    Dense(StateVector),
    Tableau(StabilizerTableau),
}

fn ghz(n: usize) -> anyhow::Result<StateVector> {
    let mut c = CircuitSpec::empty(n);
    c.push(bell_magic::Gate::H { qubit: 0 });
    for q in 1..n {
        c.push(bell_magic::Gate::Cnot { control: q - 1, target: q });
    }
    Ok(StateVector::from_circuit(&c)?)
}

fn prepare(opts: &StateOpts, rng: &mut StreamRng) -> anyhow::Result<(String, Prepared)> {
    if let Some(path) = &opts.circuit {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let circuit = CircuitSpec::from_json(&text).map_err(|e| usage(format!("invalid circuit: {e}")))?;
        return Ok((path.display().to_string(), Prepared::Dense(StateVector::from_circuit(&circuit)?)));
    }
    let name = opts.state.clone().unwrap_or_else(|| "t".into());
    let n = opts.qubits.unwrap_or(1);
    let depth = opts.depth.unwrap_or(DEFAULT_CLIFFORD_DEPTH);
    if n == 0 {
        bail!(usage("--qubits must be positive"));
    }
    let dense_cap = |n: usize| -> anyhow::Result<()> {
        if n > MAX_DENSE_QUBITS {
            bail!(usage(format!("{name} needs a dense state; {n} qubits exceed {MAX_DENSE_QUBITS}")));
        }
        Ok(())
    };
    let state = match name.as_str() {
        "t" => {
            dense_cap(n)?;
            fixtures::t_product(n)
        }
        "r" => fixtures::r_state(),
        "psi2" => fixtures::two_qubit_max(),
        "hoggar" => fixtures::hoggar(),
        "psi4" => fixtures::four_qubit_max(),
        "zero" => {
            dense_cap(n)?;
            StateVector::zero(n)
        }
        "ghz" => {
            dense_cap(n)?;
            ghz(n)?
        }
        "haar" => {
            dense_cap(n)?;
            StateVector::haar_random(n, rng)
        }
        "clifford" => {
            let (tableau, circuit) = random_clifford(n, depth, rng)?;
            if n > MAX_DENSE_QUBITS {
                return Ok((name, Prepared::Tableau(tableau)));
            }
            StateVector::from_circuit(&circuit)?
        }
        "magic-input" => {
            dense_cap(n)?;
            let circuit = magic_input_circuit(n, opts.n_magic.unwrap_or(1), opts.phi.unwrap_or(FRAC_PI_4), depth, rng)?;
            StateVector::from_circuit(&circuit)?
        }
        other => bail!(usage(format!("unknown state {other:?}"))),
    };
    Ok((name, Prepared::Dense(state)))
}

/// Bell outcomes of the prepared state under depolarizing noise `p`.
fn draw(prepared: &Prepared, dist: Option<&BellDistribution>, p: f64, n: usize, rng: &mut StreamRng) -> anyhow::Result<Vec<BellOutcome>> {
    match (prepared, dist) {
        (_, Some(d)) => Ok(noisy_bell_distribution(d, p)?.sample(n, rng)?),
        (Prepared::Tableau(t), None) => {
            if p > 0.0 {
                bail!(usage("noisy sampling needs a dense state"));
            }
            Ok(t.bell_sample(n, rng))
        }
        (Prepared::Dense(_), None) => unreachable!("dense states carry a distribution"),
    }
}

#[derive(Serialize)]
struct ExactMagic {
    bell_magic: f64,
    additive: f64,
    m2: f64,
    m_lin: f64,
    pure_state_bound: f64,
}

#[derive(Serialize)]
struct MagicSummary {
    command: &'static str,
    seed: u64,
    state: String,
    n_qubits: usize,
    noise: f64,
    exact: Option<ExactMagic>,
    estimate: Option<EstimationResult>,
}

pub fn magic(opts: &StateOpts, seed: u64, out: &Path) -> anyhow::Result<()> {
    let mut rng = stream_rng(seed, 0);
    let (name, prepared) = prepare(opts, &mut rng)?;
    let noise = check_noise(opts.noise.unwrap_or(0.0))?;
    let (n_qubits, dist) = match &prepared {
        Prepared::Dense(s) => (s.num_qubits(), Some(bell_distribution(s)?)),
        Prepared::Tableau(t) => (t.num_qubits(), None),
    };
    let exact = dist.as_ref().map(|d| {
        let b = bell_magic_from_distribution(d);
        let sre = stabilizer_renyi(d);
        ExactMagic { bell_magic: b, additive: additive(b), m2: sre.m2, m_lin: sre.m_lin, pure_state_bound: pure_state_bound(n_qubits) }
    });
    if let Some(d) = &dist {
        let path = out.join("bell_distribution.csv");
        d.write_csv(std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?)?;
    }
    let samples = opts.samples.unwrap_or(0);
    let estimate = if samples > 0 {
        let outcomes = draw(&prepared, dist.as_ref(), noise, samples, &mut rng)?;
        let cfg = EstimatorConfig {
            mode: parse_mode(opts.mode.as_deref())?,
            n_trials: opts.trials_per_sample.map(|t| t * samples),
        };
        Some(estimate(&outcomes, &cfg, &mut rng)?)
    } else {
        None
    };
    let unmitigated = estimate.as_ref().is_some_and(|e| e.mitigated.is_none());
    let summary = MagicSummary { command: "magic", seed, state: name, n_qubits, noise, exact, estimate };
    write_json(out, "magic.json", &summary)?;
    if unmitigated {
        bail!(bell_magic::Error::Mitigation("estimated noise is too close to 1 to mitigate".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct QubitPurity {
    qubit: usize,
    purity_exact: Option<f64>,
    purity_estimated: Option<f64>,
}

#[derive(Serialize)]
struct EntangleSummary {
    command: &'static str,
    seed: u64,
    state: String,
    n_qubits: usize,
    noise: f64,
    exact: Option<f64>,
    n_samples: usize,
    raw: Option<f64>,
    p_hat: Option<f64>,
    mitigated: Option<f64>,
}

pub fn entangle(opts: &StateOpts, seed: u64, out: &Path) -> anyhow::Result<()> {
    let mut rng = stream_rng(seed, 0);
    let (name, prepared) = prepare(opts, &mut rng)?;
    let noise = check_noise(opts.noise.unwrap_or(0.0))?;
    let (n_qubits, state, dist) = match &prepared {
        Prepared::Dense(s) => (s.num_qubits(), Some(s), Some(bell_distribution(s)?)),
        Prepared::Tableau(t) => (t.num_qubits(), None, None),
    };
    let samples = opts.samples.unwrap_or(0);
    let outcomes = if samples > 0 { Some(draw(&prepared, dist.as_ref(), noise, samples, &mut rng)?) } else { None };
    let rows: Vec<QubitPurity> = (0..n_qubits)
        .map(|q| QubitPurity {
            qubit: q,
            purity_exact: state.map(|s| s.reduced_purity(q)),
            purity_estimated: outcomes.as_ref().map(|o| {
                1.0 - 2.0 * o.iter().filter(|r| r.and_bit(q)).count() as f64 / o.len() as f64
            }),
        })
        .collect();
    write_csv(out, "entangle.csv", &rows)?;
    let (raw, p_hat, mitigated) = match &outcomes {
        Some(o) => {
            let raw = estimate_meyer_wallach(o)?;
            let p_hat = estimate_depolarizing(estimate_purity(o)?, n_qubits);
            (Some(raw), Some(p_hat), Some(mitigate_meyer_wallach(raw, p_hat)?))
        }
        None => (None, None, None),
    };
    let summary = EntangleSummary {
        command: "entangle",
        seed,
        state: name,
        n_qubits,
        noise,
        exact: state.map(meyer_wallach),
        n_samples: samples,
        raw,
        p_hat,
        mitigated,
    };
    write_json(out, "entangle.json", &summary)
}

#[derive(Serialize)]
struct DiscriminationRow {
    #[serde(rename = "N")]
    n_qubits: usize,
    #[serde(rename = "N_A")]
    n_magic: usize,
    phi: f64,
    #[serde(rename = "N_Q")]
    n_samples: usize,
    reps: usize,
    #[serde(rename = "P_E")]
    p_error: f64,
    std: f64,
    #[serde(rename = "P_E_theory")]
    theory: Option<f64>,
}

#[derive(Serialize)]
struct LabeledRow {
    #[serde(rename = "N_Q")]
    n_samples: usize,
    b_hat: f64,
    label: &'static str,
    seed: u64,
}

pub fn discriminate(opts: &DiscriminateOpts, seed: u64, out: &Path) -> anyhow::Result<()> {
    let samples = opts.samples.clone().unwrap_or_else(|| vec![5, 10, 20, 50]);
    if samples.iter().any(|&n| n < 4) {
        bail!(usage("sample counts must be at least 4"));
    }
    if opts.learner.unwrap_or(false) {
        let cfg = LearningConfig {
            n_qubits: opts.qubits.unwrap_or(3),
            depth: opts.depth.unwrap_or(2),
            n_per_class: opts.per_class.unwrap_or(20),
            p: check_noise(opts.noise.unwrap_or(0.15))?,
            splits: opts.splits.unwrap_or(10),
            trials_per_sample: opts.trials_per_sample.unwrap_or(10),
            seed,
            ..LearningConfig::default()
        };
        if cfg.n_qubits > MAX_DENSE_QUBITS {
            bail!(usage(format!("learner runs are dense; at most {MAX_DENSE_QUBITS} qubits")));
        }
        let mut labeled = Vec::new();
        for &nq in &samples {
            for r in labeled_runs(&cfg, nq)? {
                let label = match r.label {
                    bell_magic::discrimination::Label::Stabilizer => "stabilizer",
                    bell_magic::discrimination::Label::Magical => "magical",
                };
                labeled.push(LabeledRow { n_samples: nq, b_hat: r.b_hat, label, seed: r.seed });
            }
        }
        write_csv(out, "labeled_runs.csv", &labeled)?;
        let curve = learning_curve(&cfg, &samples)?;
        write_csv(out, "learning_curve.csv", &curve)?;
        #[derive(Serialize)]
        struct Summary<'a> {
            command: &'static str,
            seed: u64,
            config: &'a LearningConfig,
            curve: &'a [bell_magic::discrimination::LearningPoint],
        }
        return write_json(out, "discriminate.json", &Summary { command: "discriminate", seed, config: &cfg, curve: &curve });
    }

    let n = opts.qubits.unwrap_or(8);
    let n_magic = opts.n_magic.unwrap_or(1);
    if n > MAX_DENSE_QUBITS || n_magic > n {
        bail!(usage(format!("need n_magic <= qubits <= {MAX_DENSE_QUBITS}")));
    }
    let phis = opts.phi.clone().unwrap_or_else(|| vec![PI / 20.0, PI / 8.0, FRAC_PI_4]);
    let mut rows = Vec::new();
    for (i, &phi) in phis.iter().enumerate() {
        let base = MonteCarloConfig::new(n, n_magic, phi);
        let cfg = MonteCarloConfig {
            depth: opts.depth.unwrap_or(base.depth),
            reps: opts.reps.unwrap_or(base.reps),
            trials_per_sample: opts.trials_per_sample.unwrap_or(base.trials_per_sample),
            seed: bell_magic::rng::derive_seed(seed, i as u64),
            ..base
        };
        for e in monte_carlo_error(&cfg, &samples)? {
            let theory = if n_magic == 1 {
                Some(p_error_single_magic(phi, e.n_samples))
            } else if n_magic == n && (phi - FRAC_PI_4).abs() < 1e-12 {
                Some(p_error_random(e.n_samples))
            } else {
                None
            };
            rows.push(DiscriminationRow {
                n_qubits: n,
                n_magic,
                phi,
                n_samples: e.n_samples,
                reps: e.reps,
                p_error: e.p_error,
                std: e.std_err,
                theory,
            });
        }
    }
    write_csv(out, "discriminate.csv", &rows)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'static str,
        seed: u64,
        rows: &'a [DiscriminationRow],
    }
    write_json(out, "discriminate.json", &Summary { command: "discriminate", seed, rows: &rows })
}

#[derive(Serialize)]
struct TrainSummary {
    command: &'static str,
    seed: u64,
    config: OptimizeConfig,
    best_bell_magic: f64,
    best_additive: f64,
    pure_state_bound: f64,
    final_epoch: usize,
    best_params: Vec<f64>,
}

pub fn train(opts: &TrainOpts, seed: u64, out: &Path) -> anyhow::Result<()> {
    let n = opts.qubits.unwrap_or(4);
    if n == 0 || n > MAX_DENSE_QUBITS {
        bail!(usage(format!("--qubits must be in 1..={MAX_DENSE_QUBITS}")));
    }
    let samples = opts.samples.unwrap_or(0);
    let mode = match samples {
        0 => GradientMode::Exact,
        n if n < 4 => bail!(usage("sampled gradients need at least 4 samples")),
        n => GradientMode::Sampled { n_samples: n, trials_per_sample: opts.trials_per_sample.unwrap_or(10) },
    };
    let base = OptimizeConfig::new(n, opts.depth.unwrap_or(6), opts.epochs.unwrap_or(200));
    let config = OptimizeConfig {
        lr: opts.lr.unwrap_or(base.lr),
        mode,
        noise: check_noise(opts.noise.unwrap_or(0.0))?,
        init_amplitude: opts.init_amplitude.unwrap_or(base.init_amplitude),
        seed,
        ..base
    };
    let resume = match &opts.resume {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let c: Checkpoint = serde_json::from_str(&text).map_err(|e| usage(format!("invalid checkpoint: {e}")))?;
            Some(c)
        }
        None => None,
    };
    let result = optimize(&config, resume)?;
    write_csv(out, "training_log.csv", &result.history)?;
    write_json(out, "checkpoint.json", &result.checkpoint)?;
    let summary = TrainSummary {
        command: "train",
        seed,
        best_bell_magic: result.best_bell_magic,
        best_additive: additive(result.best_bell_magic),
        pure_state_bound: pure_state_bound(n),
        final_epoch: result.checkpoint.epoch,
        best_params: result.best_params,
        config,
    };
    write_json(out, "train.json", &summary)
}

#[derive(Serialize)]
struct SweepCell {
    p: f64,
    n_samples: usize,
    mean_abs_error_raw: f64,
    mean_abs_error_mitigated: f64,
}

#[derive(Serialize)]
struct SweepSlope {
    p: f64,
    slope_vs_samples: Option<f64>,
}

pub fn sweep_cmd(opts: &SweepOpts, seed: u64, out: &Path) -> anyhow::Result<()> {
    let config = SweepConfig {
        n_qubits: opts.qubits.unwrap_or(8),
        n_magic: opts.n_magic.unwrap_or(3),
        phi: opts.phi.unwrap_or(FRAC_PI_4),
        depth: opts.depth.unwrap_or(DEFAULT_CLIFFORD_DEPTH),
        noise: opts.noise.clone().unwrap_or_else(|| vec![0.0, 0.02]),
        sample_counts: opts.samples.clone().unwrap_or_else(|| vec![100, 1000, 10_000]),
        trials_per_sample: opts.trials_per_sample.unwrap_or(10),
        reps: opts.reps.unwrap_or(20),
        seed,
    };
    if config.n_qubits > MAX_DENSE_QUBITS || config.n_magic > config.n_qubits {
        bail!(usage(format!("need n_magic <= qubits <= {MAX_DENSE_QUBITS}")));
    }
    if config.sample_counts.iter().any(|&n| n < 4) || config.noise.iter().any(|p| !(0.0..1.0).contains(p)) {
        bail!(usage("sample counts must be >= 4 and noise in [0, 1)"));
    }
    let rows = sweep(&config)?;
    if rows.iter().any(|r| !r.b_mitigated.is_finite()) {
        bail!(bell_magic::Error::Mitigation("mitigation produced non-finite values".into()));
    }
    write_csv(out, "sweep.csv", &rows)?;
    let mut cells = Vec::new();
    let mut slopes = Vec::new();
    for &p in &config.noise {
        let mut errs = Vec::new();
        for &nq in &config.sample_counts {
            let sel: Vec<_> = rows.iter().filter(|r| r.p == p && r.n_samples == nq).collect();
            let k = sel.len() as f64;
            let mitigated = sel.iter().map(|r| (r.b_mitigated - r.b_exact).abs()).sum::<f64>() / k;
            cells.push(SweepCell {
                p,
                n_samples: nq,
                mean_abs_error_raw: sel.iter().map(|r| (r.b_hat - r.b_exact).abs()).sum::<f64>() / k,
                mean_abs_error_mitigated: mitigated,
            });
            errs.push(mitigated);
        }
        let xs: Vec<f64> = config.sample_counts.iter().map(|&n| n as f64).collect();
        let usable = xs.len() >= 2 && errs.iter().all(|&e| e > 0.0);
        slopes.push(SweepSlope { p, slope_vs_samples: usable.then(|| log_log_slope(&xs, &errs)) });
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        command: &'static str,
        seed: u64,
        config: &'a SweepConfig,
        cells: Vec<SweepCell>,
        slopes: Vec<SweepSlope>,
    }
    write_json(out, "sweep.json", &Summary { command: "sweep", seed, config: &config, cells, slopes })
}
