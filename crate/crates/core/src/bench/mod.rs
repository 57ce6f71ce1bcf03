//! Benchmark grids over (data set × method × init seed × EM seed), NLL
//! statistics per (data set, method), and rank-count tables.

mod report;
pub mod seed;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::core_math::{log_likelihood, DataMatrix};
use crate::em::{em_run, EmConfig};
use crate::error::{Error, Result};
use crate::init::{run_method, MethodSpec};

pub use report::{
    export_report, read_records_csv, write_failures_csv, write_rank_tables_csv, write_records_csv,
    write_summaries_csv, RecordRow, ReportFormat, RECORD_COLUMNS,
};
pub use seed::{stream_seed, Stream};

#[derive(Clone, Debug)]
pub struct BenchDataset {
    pub id: String,
    pub data: DataMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub k: usize,
    pub init_seeds: usize,
    pub em_seeds: usize,
    pub em: EmConfig,
    /// Mixed into every derived stream seed.
    pub base_seed: u64,
    /// Worker threads; 1 runs everything on the calling thread.
    pub jobs: usize,
    /// Record wall-clock milliseconds (otherwise 0, keeping output
    /// reproducible byte for byte).
    pub record_timing: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            k: 10,
            init_seeds: 30,
            em_seeds: 3,
            em: EmConfig::default(),
            base_seed: 0,
            jobs: 1,
            record_timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub dataset_id: String,
    pub method: MethodSpec,
    pub init_seed: u64,
    pub em_seed: u64,
    pub nll_initial: f64,
    pub nll_final: f64,
    pub resamples: usize,
    pub mixes: usize,
    pub keeps: usize,
    pub millis: u64,
}

impl RunRecord {
    pub fn degeneracy_events(&self) -> usize {
        self.resamples + self.mixes + self.keeps
    }

    fn sort_key(&self) -> (&str, String, u64, u64) {
        (&self.dataset_id, self.method.label(), self.init_seed, self.em_seed)
    }
}

/// A grid cell that could not be run.
#[derive(Clone, Debug, PartialEq)]
pub struct FailedCell {
    pub dataset_id: String,
    pub method: MethodSpec,
    pub init_seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<FailedCell>,
}

impl GridOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

fn run_cell(
    set: &BenchDataset,
    method: &MethodSpec,
    init_index: u64,
    cfg: &GridConfig,
) -> std::result::Result<Vec<RunRecord>, FailedCell> {
    let label = method.label();
    let fail = |message: String| FailedCell {
        dataset_id: set.id.clone(),
        method: *method,
        init_seed: init_index,
        message,
    };
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
        cfg.base_seed,
        &set.id,
        &label,
        init_index,
        Stream::Init,
    ));
    let theta0 = run_method(&set.data, cfg.k, method, &mut rng).map_err(|e| fail(e.to_string()))?;
    let init_ms = started.elapsed().as_millis() as u64;
    let nll_initial = -log_likelihood(&set.data, &theta0).map_err(|e| fail(e.to_string()))?;
    if !nll_initial.is_finite() {
        return Err(fail("initial NLL is not finite".into()));
    }

    let mut out = Vec::with_capacity(cfg.em_seeds);
    for em_index in 0..cfg.em_seeds as u64 {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(
            cfg.base_seed,
            &set.id,
            &label,
            init_index,
            Stream::Em(em_index),
        ));
        let (_, trace) = em_run(&set.data, &theta0, &cfg.em, &mut rng).map_err(|e| fail(e.to_string()))?;
        let nll_final = -trace.final_log_likelihood();
        if !nll_final.is_finite() {
            return Err(fail(format!("final NLL is not finite (EM seed {em_index})")));
        }
        out.push(RunRecord {
            dataset_id: set.id.clone(),
            method: *method,
            init_seed: init_index,
            em_seed: em_index,
            nll_initial,
            nll_final,
            resamples: trace.resample_events,
            mixes: trace.covariance_mix_events,
            keeps: trace.covariance_keep_events,
            millis: if cfg.record_timing {
                init_ms + started.elapsed().as_millis() as u64
            } else {
                0
            },
        });
    }
    Ok(out)
}

/// Runs every (data set, method, init seed, EM seed) combination.
///
/// Each initialization is shared by its `em_seeds` EM runs. Cells whose
/// initializer rejects its arguments are reported in
/// [`GridOutcome::failures`] and excluded from the records. Output order
/// is sorted by cell key and does not depend on `cfg.jobs`.
pub fn run_grid(datasets: &[BenchDataset], methods: &[MethodSpec], cfg: &GridConfig) -> Result<GridOutcome> {
    if datasets.is_empty() || methods.is_empty() {
        return Err(Error::invalid("benchmark needs at least one data set and one method"));
    }
    if cfg.init_seeds == 0 || cfg.em_seeds == 0 {
        return Err(Error::invalid("seed counts must be at least 1"));
    }
    cfg.em.validate()?;
    for m in methods {
        m.validate()?;
    }
    let mut ids = BTreeSet::new();
    for set in datasets {
        if !ids.insert(set.id.as_str()) {
            return Err(Error::invalid(format!("duplicate data set id '{}'", set.id)));
        }
    }

    let cells: Vec<(&BenchDataset, &MethodSpec, u64)> = datasets
        .iter()
        .flat_map(|set| {
            methods
                .iter()
                .flat_map(move |m| (0..cfg.init_seeds as u64).map(move |i| (set, m, i)))
        })
        .collect();

    let results: Vec<_> = if cfg.jobs <= 1 {
        cells.iter().map(|&(s, m, i)| run_cell(s, m, i, cfg)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {} workers: {e}", cfg.jobs)))?;
        pool.install(|| cells.par_iter().map(|&(s, m, i)| run_cell(s, m, i, cfg)).collect())
    };

    let mut outcome = GridOutcome::default();
    for r in results {
        match r {
            Ok(records) => outcome.records.extend(records),
            Err(f) => outcome.failures.push(f),
        }
    }
    outcome.records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    outcome
        .failures
        .sort_by(|a, b| (&a.dataset_id, a.method.label(), a.init_seed).cmp(&(&b.dataset_id, b.method.label(), b.init_seed)));
    Ok(outcome)
}

/// How EM seeds are combined per initialization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmPooling {
    /// Every (init, EM) pair is one sample.
    #[default]
    Pooled,
    /// Per init seed only the best final NLL over its EM seeds counts.
    BestOf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub dataset_id: String,
    pub method: MethodSpec,
    pub count: usize,
    pub mean_initial: f64,
    pub var_initial: f64,
    pub mean_final: f64,
    pub var_final: f64,
}

impl Summary {
    /// Variance is reported as 0 for a single sample.
    pub fn is_single_sample(&self) -> bool {
        self.count < 2
    }

    pub fn value(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::MeanInitial => self.mean_initial,
            Criterion::MeanFinal => self.mean_final,
            Criterion::VarInitial => self.var_initial,
            Criterion::VarFinal => self.var_final,
        }
    }
}

/// Arithmetic mean and unbiased variance (0 for one value).
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

fn method_order(a: &MethodSpec, b: &MethodSpec) -> std::cmp::Ordering {
    a.canonical_cmp(b)
}

/// Mean and variance of the initial and final NLL per (data set, method).
///
/// Records are ordered by seed before summation, so the result does not
/// depend on the input order.
pub fn summarize(records: &[RunRecord], pooling: EmPooling) -> Vec<Summary> {
    let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.dataset_id.clone(), r.method.label()))
            .or_default()
            .push(r);
    }
    let mut out: Vec<Summary> = groups
        .into_values()
        .map(|mut rs| {
            rs.sort_by_key(|r| (r.init_seed, r.em_seed));
            let (initial, fin): (Vec<f64>, Vec<f64>) = match pooling {
                EmPooling::Pooled => rs.iter().map(|r| (r.nll_initial, r.nll_final)).unzip(),
                EmPooling::BestOf => {
                    let mut best: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
                    for r in &rs {
                        let e = best.entry(r.init_seed).or_insert((r.nll_initial, r.nll_final));
                        if r.nll_final < e.1 {
                            *e = (r.nll_initial, r.nll_final);
                        }
                    }
                    best.into_values().unzip()
                }
            };
            let (mean_initial, var_initial) = mean_variance(&initial);
            let (mean_final, var_final) = mean_variance(&fin);
            Summary {
                dataset_id: rs[0].dataset_id.clone(),
                method: rs[0].method,
                count: initial.len(),
                mean_initial,
                var_initial,
                mean_final,
                var_final,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.dataset_id
            .cmp(&b.dataset_id)
            .then_with(|| method_order(&a.method, &b.method))
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    MeanInitial,
    MeanFinal,
    VarInitial,
    VarFinal,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::MeanInitial,
        Criterion::MeanFinal,
        Criterion::VarInitial,
        Criterion::VarFinal,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Criterion::MeanInitial => "mean_initial",
            Criterion::MeanFinal => "mean_final",
            Criterion::VarInitial => "var_initial",
            Criterion::VarFinal => "var_final",
        }
    }
}

/// Ranks of every method on one data set.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRanking {
    pub dataset_id: String,
    /// `(method, rank)` in canonical method order; ranks start at 1.
    pub ranks: Vec<(MethodSpec, usize)>,
}

impl DatasetRanking {
    pub fn rank_of(&self, method: &MethodSpec) -> Option<usize> {
        self.ranks.iter().find(|(m, _)| m == method).map(|(_, r)| *r)
    }
}

fn methods_of(summaries: &[Summary]) -> Vec<MethodSpec> {
    let mut methods: Vec<MethodSpec> = Vec::new();
    for s in summaries {
        if !methods.contains(&s.method) {
            methods.push(s.method);
        }
    }
    methods.sort_by(method_order);
    methods
}

/// Competition ranking ("1224") per data set, lower value is better.
pub fn rank_datasets(summaries: &[Summary], criterion: Criterion) -> Result<Vec<DatasetRanking>> {
    let methods = methods_of(summaries);
    let mut by_set: BTreeMap<&str, Vec<&Summary>> = BTreeMap::new();
    for s in summaries {
        by_set.entry(s.dataset_id.as_str()).or_default().push(s);
    }
    by_set
        .into_iter()
        .map(|(id, rows)| {
            let values: Vec<f64> = methods
                .iter()
                .map(|m| {
                    let hits: Vec<&&Summary> = rows.iter().filter(|s| &s.method == m).collect();
                    match hits.as_slice() {
                        [one] => Ok(one.value(criterion)),
                        [] => Err(Error::invalid(format!("method {m} has no summary on data set '{id}'"))),
                        _ => Err(Error::invalid(format!("method {m} summarized twice on data set '{id}'"))),
                    }
                })
                .collect::<Result<_>>()?;
            let ranks = methods
                .iter()
                .zip(&values)
                .map(|(m, v)| (*m, 1 + values.iter().filter(|w| w < &v).count()))
                .collect();
            Ok(DatasetRanking {
                dataset_id: id.to_string(),
                ranks,
            })
        })
        .collect()
}

/// How often each method reached rank 1..M under one criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTable {
    pub criterion: Criterion,
    pub methods: Vec<MethodSpec>,
    /// `counts[m][r]`: data sets on which method `m` had rank `r + 1`.
    pub counts: Vec<Vec<usize>>,
    pub datasets: usize,
}

impl RankTable {
    pub fn row(&self, method: &MethodSpec) -> Option<&[usize]> {
        self.methods
            .iter()
            .position(|m| m == method)
            .map(|i| self.counts[i].as_slice())
    }

    /// Sums the counts of two tables over the same methods and criterion.
    pub fn merge(&self, other: &RankTable) -> Result<RankTable> {
        if self.criterion != other.criterion || self.methods != other.methods {
            return Err(Error::invalid("rank tables differ in criterion or methods"));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(RankTable {
            criterion: self.criterion,
            methods: self.methods.clone(),
            counts,
            datasets: self.datasets + other.datasets,
        })
    }
}

pub fn rank_methods(summaries: &[Summary], criterion: Criterion) -> Result<RankTable> {
    let methods = methods_of(summaries);
    let rankings = rank_datasets(summaries, criterion)?;
    let m = methods.len();
    let mut counts = vec![vec![0usize; m]; m];
    for ranking in &rankings {
        for (i, (_, rank)) in ranking.ranks.iter().enumerate() {
            counts[i][rank - 1] += 1;
        }
    }
    Ok(RankTable {
        criterion,
        methods,
        counts,
        datasets: rankings.len(),
    })
}

/// The four tables (initial/final × mean/variance).
pub fn rank_all(summaries: &[Summary]) -> Result<Vec<RankTable>> {
    Criterion::ALL
        .iter()
        .map(|&c| rank_methods(summaries, c))
        .collect()
}
