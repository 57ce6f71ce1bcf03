//! Every initializer of the default roster on one data set, before and
//! after EM.

use gmm_init::core_math::log_likelihood;
use gmm_init::datagen::{generate, GeneratorSpec};
use gmm_init::em::{em_run, EmConfig};
use gmm_init::init::run_method;
use gmm_init::MethodSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gmm_init::Result<()> {
    let k = 8;
    let set = generate(&GeneratorSpec {
        k,
        d: 2,
        separation: 2.0,
        n_points: 2000,
        noise_fraction: 0.1,
        seed: 3,
        ..GeneratorSpec::default()
    })?;
    let data = &set.data;
    println!("{:<26} {:>12} {:>12}", "method", "initial", "final");
    for spec in MethodSpec::roster() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let theta0 = run_method(data, k, &spec, &mut rng)?;
        let (_, trace) = em_run(data, &theta0, &EmConfig::default(), &mut rng)?;
        println!(
            "{:<26} {:>12.2} {:>12.2}",
            spec.label(),
            -log_likelihood(data, &theta0)?,
            -trace.final_log_likelihood()
        );
    }
    Ok(())
}
