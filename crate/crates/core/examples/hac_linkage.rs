//! Average-linkage clustering on a handful of points, then the HAC
//! initializer on a larger sample.

use gmm_init::datagen::{generate, GeneratorSpec};
use gmm_init::init::{average_linkage, hac_init};
use gmm_init::DataMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gmm_init::Result<()> {
    let points = DataMatrix::new(vec![
        vec![0.0, 0.0],
        vec![0.1, 0.0],
        vec![5.0, 5.0],
        vec![5.0, 5.2],
        vec![2.5, 9.0],
    ])?;
    println!("{:?}", average_linkage(&points, 2));

    let set = generate(&GeneratorSpec {
        k: 3,
        d: 2,
        separation: 2.0,
        n_points: 1500,
        seed: 9,
        ..GeneratorSpec::default()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let theta = hac_init(&set.data, 3, 0.1, &mut rng)?;
    for c in theta.components() {
        println!("w {:.3}  mean {:?}", c.weight(), c.mean().as_slice());
    }
    Ok(())
}
