//! The `gmm-init` command line: `generate`, `fit`, `bench` and `rank`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{
    self, export_report, rank_all, summarize, BenchDataset, EmPooling, GridConfig, ReportFormat,
};
use crate::core_math::log_likelihood;
use crate::datagen::{self, EccentricityMode, GeneratorSpec, Label, SizeMode};
use crate::em::{em_run, EmConfig, DEFAULT_ROUNDS};
use crate::error::{Error, Result};
use crate::init::{run_method, MethodKind, MethodSpec};
use crate::io::{read_data_csv, write_dataset_csv, write_mixture_json, CsvOptions};

#[derive(Debug, Parser)]
#[command(name = "gmm-init", version, about = "EM initialization for Gaussian mixtures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random mixture and sample a data set from it.
    Generate(GenerateArgs),
    /// Initialize and run EM on a CSV data set.
    Fit(FitArgs),
    /// Run a benchmark grid described by a TOML manifest.
    Bench(BenchArgs),
    /// Recompute summaries and rank tables from a records CSV.
    Rank(RankArgs),
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("'{s}' is not a positive number")),
    }
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..1.0).contains(&v) => Ok(v),
        _ => Err(format!("'{s}' is not in [0, 1)")),
    }
}

fn eccentricity_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got '{s}'"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound '{lo}'"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound '{hi}'"))?;
    if lo >= 1.0 && hi >= lo {
        Ok((lo, hi))
    } else {
        Err(format!("need 1 <= LO <= HI, got {lo},{hi}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SizeArg {
    Constant,
    Different,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub d: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Target separation c_θ.
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub sep: f64,
    /// Fraction of uniform noise points.
    #[arg(long, default_value_t = 0.0, value_parser = unit_interval)]
    pub noise: f64,
    /// Weight exponent c_w; weights ∝ 2^(c_w·i).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub weight_exponent: f64,
    /// Fixed eccentricity for every component.
    #[arg(long, default_value_t = 1.0, conflicts_with = "eccentricity_range")]
    pub eccentricity: f64,
    /// Per-component eccentricity drawn from LO,HI.
    #[arg(long, value_parser = eccentricity_range)]
    pub eccentricity_range: Option<(f64, f64)>,
    #[arg(long, value_enum, default_value_t = SizeArg::Constant)]
    pub size: SizeArg,
    #[arg(long, value_parser = positive_f64)]
    pub cube_side: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Output JSON for the generating mixture.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Append the origin label (component index, -1 for noise) as a last column.
    #[arg(long)]
    pub labels: bool,
}

impl GenerateArgs {
    pub fn spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            k: self.k as usize,
            d: self.d as usize,
            separation: self.sep,
            weight_exponent: self.weight_exponent,
            eccentricity: match self.eccentricity_range {
                Some((lo, hi)) => EccentricityMode::Range(lo, hi),
                None => EccentricityMode::Fixed(self.eccentricity),
            },
            size: match self.size {
                SizeArg::Constant => SizeMode::Constant,
                SizeArg::Different => SizeMode::Different,
            },
            cube_side: self.cube_side,
            n_points: self.n as usize,
            noise_fraction: self.noise,
            seed: self.seed,
        }
    }
}

fn print_config(label: &str, value: &impl Serialize) {
    println!(
        "{label}: {}",
        serde_json::to_string(value).expect("config serializes")
    );
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let spec = args.spec();
    spec.validate()?;
    print_config("config", &spec);
    println!("seed: {}", spec.seed);
    let set = datagen::generate(&spec)?;
    write_dataset_csv(&args.out, &set, args.labels)?;
    if let Some(truth) = &args.truth {
        write_mixture_json(truth, &set.truth)?;
    }
    let noise = set.labels.iter().filter(|l| **l == Label::Noise).count();
    println!(
        "wrote {} rows ({} signal, {} noise) to {}",
        set.data.n(),
        set.data.n() - noise,
        noise,
        args.out.display()
    );
    if set.truth.k() >= 2 {
        println!("separation: {}", datagen::separation(&set.truth)?);
    }
    let ecc: Vec<String> = set
        .truth
        .components()
        .iter()
        .map(|c| format!("{:.6}", datagen::eccentricity(c.covariance())))
        .collect();
    println!("eccentricities: {}", ecc.join(" "));
    Ok(())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV (numeric columns, optional header).
    #[arg(long)]
    pub data: PathBuf,
    /// Initializer: uniform, kmeans++, gonzalez, adaptive, gonzalez-for-gmm,
    /// kwedlos-gonzalez, agglomerative (optionally `name:param`).
    #[arg(long, default_value = "kmeans++")]
    pub method: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sample fraction for the subsampling methods.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = DEFAULT_ROUNDS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    /// Minimum expected points per component (default D + 1).
    #[arg(long, value_parser = positive_f64)]
    pub min_count: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub init_seed: u64,
    #[arg(long, default_value_t = 0)]
    pub em_seed: u64,
    /// 0-based columns to ignore, e.g. a label column.
    #[arg(long, value_delimiter = ',')]
    pub exclude_columns: Vec<usize>,
    /// Output JSON for the fitted mixture.
    #[arg(long)]
    pub out: PathBuf,
    /// Output CSV with the per-round log-likelihood.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

impl FitArgs {
    pub fn method_spec(&self) -> Result<MethodSpec> {
        let base: MethodSpec = self.method.parse()?;
        if self.alpha.is_none() && self.s.is_none() {
            return Ok(base);
        }
        let kind = base.kind();
        let alpha = self.alpha.or(base.alpha());
        let s = self.s.or(base.sample_fraction());
        let alpha = if kind == MethodKind::Adaptive { alpha } else { self.alpha };
        let s = if matches!(
            kind,
            MethodKind::GonzalezForGmm | MethodKind::KwedlosGonzalez | MethodKind::Agglomerative
        ) {
            s
        } else {
            self.s
        };
        MethodSpec::from_parts(kind, alpha, s)
    }
}

#[derive(Serialize)]
struct FitConfig<'a> {
    data: &'a Path,
    method: String,
    k: u64,
    rounds: u64,
    min_count: Option<f64>,
    init_seed: u64,
    em_seed: u64,
    exclude_columns: &'a [usize],
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let method = args.method_spec()?;
    let cfg = EmConfig {
        rounds: args.rounds as usize,
        min_effective_count: args.min_count,
    };
    cfg.validate()?;
    print_config(
        "config",
        &FitConfig {
            data: &args.data,
            method: method.label(),
            k: args.k,
            rounds: args.rounds,
            min_count: args.min_count,
            init_seed: args.init_seed,
            em_seed: args.em_seed,
            exclude_columns: &args.exclude_columns,
        },
    );
    println!("seed: init={} em={}", args.init_seed, args.em_seed);
    let data = read_data_csv(
        &args.data,
        &CsvOptions {
            exclude_columns: args.exclude_columns.clone(),
        },
    )?;
    let k = args.k as usize;
    if k > data.n() {
        return Err(Error::invalid(format!(
            "K = {k} exceeds the number of points N = {}",
            data.n()
        )));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(args.init_seed);
    let theta0 = run_method(&data, k, &method, &mut init_rng)?;
    println!("initial NLL: {}", -log_likelihood(&data, &theta0)?);
    let mut em_rng = ChaCha8Rng::seed_from_u64(args.em_seed);
    let (theta, trace) = em_run(&data, &theta0, &cfg, &mut em_rng)?;
    println!("final NLL: {}", -trace.final_log_likelihood());
    println!(
        "degeneracy events: resamples={} mixes={} keeps={}",
        trace.resample_events, trace.covariance_mix_events, trace.covariance_keep_events
    );
    write_mixture_json(&args.out, &theta)?;
    if let Some(path) = &args.trace {
        let mut text = String::from("round,log_likelihood\n");
        for (i, ll) in trace.log_likelihood.iter().enumerate() {
            text.push_str(&format!("{},{ll}\n", i + 1));
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Benchmark manifest (TOML).
///
/// ```toml
/// k = 10
/// init_seeds = 30
/// em_seeds = 3
/// rounds = 50
/// seed = 0
/// methods = ["uniform", "kmeans++", "adaptive:1"]   # default: all eight
///
/// [[datasets]]
/// id = "blobs"
/// path = "blobs.csv"          # relative to the manifest
/// exclude_columns = [3]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub k: usize,
    #[serde(default = "default_init_seeds")]
    pub init_seeds: usize,
    #[serde(default = "default_em_seeds")]
    pub em_seeds: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub min_count: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub methods: Option<Vec<String>>,
    pub datasets: Vec<ManifestDataset>,
}

fn default_init_seeds() -> usize {
    30
}
fn default_em_seeds() -> usize {
    3
}
fn default_rounds() -> usize {
    DEFAULT_ROUNDS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDataset {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub exclude_columns: Vec<usize>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn method_specs(&self) -> Result<Vec<MethodSpec>> {
        match &self.methods {
            None => Ok(MethodSpec::roster()),
            Some(list) => list.iter().map(|m| m.parse()).collect(),
        }
    }

    /// Loads every data set, resolving relative paths against `base`.
    pub fn load_datasets(&self, base: &Path) -> Result<Vec<BenchDataset>> {
        self.datasets
            .iter()
            .map(|entry| {
                let path = if entry.path.is_absolute() {
                    entry.path.clone()
                } else {
                    base.join(&entry.path)
                };
                let opts = CsvOptions {
                    exclude_columns: entry.exclude_columns.clone(),
                };
                let data = read_data_csv(&path, &opts).map_err(|e| Error::Format {
                    path: path.clone(),
                    message: format!("data set '{}': {e}", entry.id),
                })?;
                Ok(BenchDataset {
                    id: entry.id.clone(),
                    data,
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    /// Use the best final NLL over EM seeds per initialization.
    #[arg(long)]
    pub best_of_em: bool,
    /// Record wall-clock time per run (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

/// Result of a benchmark command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchStatus {
    Complete,
    Partial { failed_cells: usize },
}

fn write_report(
    out_dir: &Path,
    records: &[bench::RunRecord],
    failures: &[bench::FailedCell],
    pooling: EmPooling,
    format: FormatArg,
) -> Result<BenchStatus> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let summaries = summarize(records, pooling);
    let tables = if summaries.is_empty() {
        Vec::new()
    } else {
        rank_all(&summaries)?
    };
    let format = match format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    export_report(out_dir, &tables, records, format)?;
    bench::write_summaries_csv(&out_dir.join("summaries.csv"), &summaries)?;
    bench::write_failures_csv(&out_dir.join("failures.csv"), failures)?;
    let status = if failures.is_empty() {
        BenchStatus::Complete
    } else {
        BenchStatus::Partial {
            failed_cells: failures.len(),
        }
    };
    let text = match status {
        BenchStatus::Complete => "complete\n".to_string(),
        BenchStatus::Partial { failed_cells } => format!("partial: {failed_cells} failed cells\n"),
    };
    let status_path = out_dir.join("status.txt");
    fs::write(&status_path, text).map_err(|e| Error::io(&status_path, e))?;
    for t in &tables {
        println!("{}", format_table(t));
    }
    Ok(status)
}

/// Plain-text rendering of a rank table.
pub fn format_table(t: &bench::RankTable) -> String {
    let width = t.methods.iter().map(|m| m.label().len()).max().unwrap_or(6).max(6);
    let mut s = format!("{} ({} data sets)\n{:width$}", t.criterion.id(), t.datasets, "");
    for r in 1..=t.methods.len() {
        s.push_str(&format!(" {:>5}", format!("#{r}")));
    }
    for (m, row) in t.methods.iter().zip(&t.counts) {
        s.push_str(&format!("\n{:width$}", m.label()));
        for c in row {
            s.push_str(&format!(" {c:>5}"));
        }
    }
    s
}

#[derive(Serialize)]
struct BenchConfig<'a> {
    manifest: &'a Manifest,
    methods: Vec<String>,
    jobs: u64,
    best_of_em: bool,
    timing: bool,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchStatus> {
    let manifest = Manifest::load(&args.manifest)?;
    let methods = manifest.method_specs()?;
    print_config(
        "config",
        &BenchConfig {
            manifest: &manifest,
            methods: methods.iter().map(MethodSpec::label).collect(),
            jobs: args.jobs,
            best_of_em: args.best_of_em,
            timing: args.timing,
        },
    );
    println!("seed: {}", manifest.seed);
    let base = args.manifest.parent().unwrap_or_else(|| Path::new("."));
    let datasets = manifest.load_datasets(base)?;
    let cfg = GridConfig {
        k: manifest.k,
        init_seeds: manifest.init_seeds,
        em_seeds: manifest.em_seeds,
        em: EmConfig {
            rounds: manifest.rounds,
            min_effective_count: manifest.min_count,
        },
        base_seed: manifest.seed,
        jobs: args.jobs as usize,
        record_timing: args.timing,
    };
    let outcome = bench::run_grid(&datasets, &methods, &cfg)?;
    let pooling = if args.best_of_em {
        EmPooling::BestOf
    } else {
        EmPooling::Pooled
    };
    write_report(&args.out_dir, &outcome.records, &outcome.failures, pooling, args.format)
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub best_of_em: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

pub fn cmd_rank(args: &RankArgs) -> Result<BenchStatus> {
    println!(
        "config: {{\"records\":{:?},\"best_of_em\":{}}}",
        args.records.display().to_string(),
        args.best_of_em
    );
    let records = bench::read_records_csv(&args.records)?;
    let pooling = if args.best_of_em {
        EmPooling::BestOf
    } else {
        EmPooling::Pooled
    };
    write_report(&args.out_dir, &records, &[], pooling, args.format)
}

/// Runs a parsed command line; usage errors exit with 2, failed work with 1.
pub fn run(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a).map(|_| BenchStatus::Complete),
        Command::Fit(a) => cmd_fit(a).map(|_| BenchStatus::Complete),
        Command::Bench(a) => cmd_bench(a),
        Command::Rank(a) => cmd_rank(a),
    };
    match result {
        Ok(BenchStatus::Complete) => ExitCode::SUCCESS,
        Ok(BenchStatus::Partial { failed_cells }) => {
            eprintln!("error: partial report, {failed_cells} grid cells failed (see failures.csv)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

pub fn main() -> ExitCode {
    run(Cli::parse())
}
