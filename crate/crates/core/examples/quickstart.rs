//! Exact and sampled Bell magic of a few reference states.

use bell_magic::estimation::{sample_and_estimate, EstimatorConfig};
use bell_magic::magic::{bell_magic_exact, fixtures};
use bell_magic::simulator::bell_distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bell_magic::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, state) in [("|T>^2", fixtures::t_product(2)), ("hoggar", fixtures::hoggar())] {
        let exact = bell_magic_exact(&state)?;
        let est = sample_and_estimate(&bell_distribution(&state)?, 0.0, 2000, &EstimatorConfig::default(), &mut rng)?;
        println!("{name}: B = {:.4} (B_a = {:.4}), sampled {:.4} +- {:.4}", exact.bell_magic, exact.additive, est.b_hat, est.std_err);
    }
    Ok(())
}
