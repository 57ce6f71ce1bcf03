//! A small seed grid over two generated data sets, summarized into rank
//! tables.

use gmm_init::bench::{rank_all, run_grid, summarize, BenchDataset, EmPooling, GridConfig};
use gmm_init::cli::format_table;
use gmm_init::datagen::{generate, GeneratorSpec};
use gmm_init::em::EmConfig;
use gmm_init::MethodSpec;

fn main() -> gmm_init::Result<()> {
    let datasets = (0..2)
        .map(|i| {
            let set = generate(&GeneratorSpec {
                k: 5,
                d: 2,
                separation: 1.0,
                n_points: 1000,
                seed: 100 + i,
                ..GeneratorSpec::default()
            })?;
            Ok(BenchDataset { id: format!("blobs{i}"), data: set.data })
        })
        .collect::<gmm_init::Result<Vec<_>>>()?;

    let methods = [
        MethodSpec::Uniform,
        MethodSpec::KmeansPP,
        MethodSpec::Gonzalez,
        MethodSpec::Adaptive { alpha: 0.5 },
    ];
    let cfg = GridConfig {
        k: 5,
        init_seeds: 5,
        em_seeds: 2,
        em: EmConfig::with_rounds(20)?,
        base_seed: 1,
        ..GridConfig::default()
    };
    let outcome = run_grid(&datasets, &methods, &cfg)?;
    println!("{} runs, {} failures\n", outcome.records.len(), outcome.failures.len());

    let summaries = summarize(&outcome.records, EmPooling::Pooled);
    for t in rank_all(&summaries)? {
        println!("{}", format_table(&t));
    }
    Ok(())
}
