//! Draw a random mixture with controlled separation and write it as CSV.
//!
//!     cargo run --example generate_dataset -- [out.csv]

use gmm_init::datagen::{eccentricity, generate, separation, EccentricityMode, GeneratorSpec, Label, SizeMode};
use gmm_init::io::write_dataset_csv;

fn main() -> gmm_init::Result<()> {
    let spec = GeneratorSpec {
        k: 5,
        d: 2,
        separation: 2.0,
        weight_exponent: 0.5,
        eccentricity: EccentricityMode::Range(1.0, 10.0),
        size: SizeMode::Constant,
        n_points: 2000,
        noise_fraction: 0.05,
        seed: 7,
        ..GeneratorSpec::default()
    };
    let set = generate(&spec)?;

    println!("separation {:.4}", separation(&set.truth)?);
    for (i, c) in set.truth.components().iter().enumerate() {
        println!(
            "component {i}: weight {:.3}  eccentricity {:.2}  mean {:?}",
            c.weight(),
            eccentricity(c.covariance()),
            c.mean().as_slice()
        );
    }
    let noise = set.labels.iter().filter(|l| matches!(l, Label::Noise)).count();
    println!("{} points, {noise} noise", set.data.n());

    if let Some(path) = std::env::args().nth(1) {
        write_dataset_csv(path.as_ref(), &set, true)?;
        println!("wrote {path}");
    }
    Ok(())
}
