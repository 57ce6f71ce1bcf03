//! Initialize with K-means++ and run fixed-round EM on generated data.

use gmm_init::core_math::log_likelihood;
use gmm_init::datagen::{generate, GeneratorSpec};
use gmm_init::em::{em_run, EmConfig};
use gmm_init::init::run_method;
use gmm_init::MethodSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gmm_init::Result<()> {
    let set = generate(&GeneratorSpec {
        k: 4,
        d: 3,
        separation: 1.0,
        n_points: 3000,
        seed: 11,
        ..GeneratorSpec::default()
    })?;
    let data = &set.data;

    let mut init_rng = ChaCha8Rng::seed_from_u64(1);
    let theta0 = run_method(data, 4, &MethodSpec::KmeansPP, &mut init_rng)?;

    let mut em_rng = ChaCha8Rng::seed_from_u64(2);
    let (theta, trace) = em_run(data, &theta0, &EmConfig::default(), &mut em_rng)?;

    for (round, ll) in trace.log_likelihood.iter().enumerate().step_by(10) {
        println!("round {:>2}  nll {:.3}", round + 1, -ll);
    }
    println!("initial nll {:.3}", -trace.initial_log_likelihood);
    println!("final   nll {:.3}", -trace.final_log_likelihood());
    println!("truth   nll {:.3}", -log_likelihood(data, &set.truth)?);
    println!("degeneracy events {}", trace.degeneracy_events());

    for c in theta.components() {
        println!("w {:.3}  mean {:?}", c.weight(), c.mean().as_slice());
    }
    Ok(())
}
