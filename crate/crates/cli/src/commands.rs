use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use spe_core::metrics::{float_or_inf, power_ratio, psnr, rwde, ssim, wdpr, SSIM_WINDOW};
use spe_core::tasks::{
    compare_encodings, gen_signal_1d, read_image, run_experiment, run_theory_checks, spectrum_csv, synthetic_image, write_image,
    DatasetSpec, ExperimentSpec, TheoryCheckConfig, Variant,
};
use spe_core::{EncoderSpec, Error, Model, SpeMode};

use crate::overrides::{apply_override, parse_override};

const DEFAULT_OUTPUT_DIR: &str = "spe-output";

#[derive(Parser, Debug)]
#[command(name = "spe", version, about = "Coordinate-network encodings: data, training, comparisons, metrics and theory checks")]
pub struct Cli {
    /// Log progress at info level.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a 1D signal CSV or a synthetic test image.
    GenData(GenDataArgs),
    /// Train one experiment from a JSON spec.
    Train(TrainArgs),
    /// Train several encoders over several seeds and tabulate the results.
    Compare(CompareArgs),
    /// Print the learned effective frequencies stored in a checkpoint.
    Spectrum(SpectrumArgs),
    /// Evaluate the encoder identities and bounds over parameter grids.
    TheoryCheck(TheoryCheckArgs),
    /// Compare a reconstruction against ground truth.
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Directory receiving every file the command writes.
    #[arg(short, long, env = "SPE_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DataKind {
    Signal1d,
    Image,
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    #[arg(long, value_enum)]
    pub kind: DataKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 8)]
    pub n_modes: usize,
    #[arg(long, default_value_t = 64)]
    pub max_frequency: u32,
    /// Side length of the synthetic image.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// ExperimentSpec JSON file.
    #[arg(short, long)]
    pub config: PathBuf,
    /// `dotted.key=value`, applied in order before validation.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated encoder names (identity, pe, spe, spe_diagonal,
    /// grff, ape, hash) sized from the base spec, or `@file.json` holding a
    /// list of variants.
    #[arg(long, required = true)]
    pub encoders: String,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// Parallel runs; 1 keeps logs in a reproducible order.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TheoryCheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = 4)]
    pub min_octaves: usize,
    #[arg(long, default_value_t = 12)]
    pub max_octaves: usize,
    #[arg(long, default_value_t = 8)]
    pub max_omega: u32,
    #[arg(long, default_value_t = 14)]
    pub grid_resolution: u32,
    #[arg(long, default_value_t = 1e-6)]
    pub small_omega: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Ground-truth image.
    #[arg(long = "true", value_name = "PATH")]
    pub truth: PathBuf,
    /// Synthesised image.
    #[arg(long, value_name = "PATH")]
    pub syn: PathBuf,
    /// Training image; enables RWDE.
    #[arg(long, value_name = "PATH")]
    pub train: Option<PathBuf>,
    /// Wavelet levels 1..=levels.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = SSIM_WINDOW)]
    pub window: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration: exit 2.
    Usage(String),
    /// A run or check failed: exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Failure(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::Compare(a) => compare(a),
        Command::Spectrum(a) => spectrum(a),
        Command::TheoryCheck(a) => theory_check(a),
        Command::Metrics(a) => metrics(a),
    }
}

fn output_dir(args: &OutputArgs, fallback: Option<&Path>) -> PathBuf {
    args.output_dir
        .clone()
        .or_else(|| fallback.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| failure(Error::io(parent, e)))?;
    }
    fs::write(path, text).map_err(|e| failure(Error::io(path, e)))
}

fn gen_data(a: GenDataArgs) -> CliResult<()> {
    let dir = output_dir(&a.output, None);
    fs::create_dir_all(&dir).map_err(|e| failure(Error::io(&dir, e)))?;
    let path = match a.kind {
        DataKind::Signal1d => {
            let d = gen_signal_1d(a.seed, a.n_samples, a.n_modes, a.max_frequency).map_err(usage)?;
            let path = dir.join(format!("signal1d_seed{}.csv", a.seed));
            write_file(&path, &d.to_csv())?;
            path
        }
        DataKind::Image => {
            let img = synthetic_image(a.size, a.seed).map_err(usage)?;
            let path = dir.join(format!("image_seed{}.pgm", a.seed));
            write_image(&path, &img).map_err(failure)?;
            path
        }
    };
    println!("{}", path.display());
    Ok(())
}

/// Reads a spec, applies overrides and validates it against the schema.
fn load_spec(args: &ConfigArgs) -> CliResult<ExperimentSpec> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {} is not valid JSON: {e}", args.config.display())))?;
    for raw in &args.overrides {
        let (path, v) = parse_override(raw).map_err(usage)?;
        apply_override(&mut value, &path, v).map_err(usage)?;
    }
    let mut spec: ExperimentSpec = serde_json::from_value(value).map_err(|e| usage(format!("invalid config: {e}")))?;
    spec.output_dir = Some(output_dir(&args.output, spec.output_dir.as_deref()));
    spec.validate().map_err(usage)?;
    Ok(spec)
}

fn fmt_loss(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into())
}

fn train(a: TrainArgs) -> CliResult<()> {
    let spec = load_spec(&a.config)?;
    let dir = spec.output_dir.clone().expect("output dir resolved");
    match run_experiment(&spec) {
        Ok(report) => {
            println!("final train loss: {}", fmt_loss(report.final_train_loss));
            println!("final test loss:  {}", fmt_loss(report.final_test_loss));
            if let Some(p) = report.test_psnr {
                println!("test PSNR:        {p:.3} dB");
            }
            println!("artifacts in {}", dir.display());
            Ok(())
        }
        Err(Error::Diverged { iteration, loss, record }) => {
            let path = dir.join("record.csv");
            write_file(&path, &record.to_csv())?;
            Err(failure(format!(
                "training diverged at iteration {iteration} (loss {loss}); partial record in {}",
                path.display()
            )))
        }
        Err(e @ (Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::MalformedImage { .. } | Error::Io { .. })) => {
            Err(usage(e))
        }
        Err(e) => Err(failure(e)),
    }
}

/// Encoder named `name`, sized from the base spec's PE settings.
fn shorthand(name: &str, base: &ExperimentSpec) -> CliResult<Variant> {
    let (octaves, falloff) = match base.encoder {
        EncoderSpec::Pe { octaves, falloff } | EncoderSpec::Spe { octaves, falloff, .. } => (octaves, falloff),
        _ => (8, 0.0),
    };
    let input_dim = match base.dataset {
        DatasetSpec::Signal1d { .. } => 1,
        _ => 2,
    };
    let spe = |mode| EncoderSpec::Spe {
        octaves,
        falloff,
        mode,
        diagonal_init: 1.0,
    };
    let encoder = match name {
        "identity" => EncoderSpec::Identity,
        "pe" => EncoderSpec::Pe { octaves, falloff },
        "spe" => spe(SpeMode::Dense),
        "spe_diagonal" => spe(SpeMode::Diagonal),
        // Same feature count as PE; σ at the geometric centre of the PE band.
        "grff" => EncoderSpec::Grff {
            features: octaves * input_dim,
            sigma: 2f64.powf((octaves as f64 - 1.0) / 2.0) * PI,
            seed: 0,
        },
        "ape" => EncoderSpec::Ape { frequencies: octaves },
        "hash" => EncoderSpec::Hash {
            levels: 8,
            table_size: 1 << 14,
            features_per_entry: 2,
            base_resolution: 16,
            growth_factor: 1.5,
            seed: 0,
        },
        other => return Err(usage(format!("unknown encoder {other:?}"))),
    };
    Ok(Variant::new(encoder))
}

fn parse_variants(raw: &str, base: &ExperimentSpec) -> CliResult<Vec<Variant>> {
    let variants = if let Some(path) = raw.strip_prefix('@') {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read encoder list {path}: {e}")))?;
        serde_json::from_str::<Vec<Variant>>(&text).map_err(|e| usage(format!("invalid encoder list {path}: {e}")))?
    } else {
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| shorthand(name, base))
            .collect::<CliResult<_>>()?
    };
    if variants.is_empty() {
        return Err(usage("the encoder list is empty"));
    }
    Ok(variants)
}

fn compare(a: CompareArgs) -> CliResult<()> {
    let spec = load_spec(&a.config)?;
    let variants = parse_variants(&a.encoders, &spec)?;
    if a.seeds.is_empty() {
        return Err(usage("at least one seed is required"));
    }
    if a.workers == 0 {
        return Err(usage("workers must be >= 1"));
    }
    let report = compare_encodings(&spec, &variants, &a.seeds, a.workers).map_err(usage)?;
    let dir = spec.output_dir.expect("output dir resolved");
    report.write(&dir).map_err(failure)?;
    print!("{}", report.to_table());
    println!("report in {}", dir.display());
    if report.rows.iter().all(|r| !r.is_ok()) {
        return Err(failure("every run failed"));
    }
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> CliResult<()> {
    let model = Model::load(&a.checkpoint).map_err(usage)?;
    let mut entries = model.learned_spectrum().map_err(failure)?;
    entries.sort_by(|x, y| y.omega_star.abs().total_cmp(&x.omega_star.abs()));
    let csv = spectrum_csv(&entries);
    print!("{csv}");
    if let Some(dir) = &a.output.output_dir {
        write_file(&dir.join("spectrum.csv"), &csv)?;
    }
    Ok(())
}

fn theory_check(a: TheoryCheckArgs) -> CliResult<()> {
    let cfg = TheoryCheckConfig {
        seed: a.seed,
        draws: a.draws,
        min_octaves: a.min_octaves,
        max_octaves: a.max_octaves,
        max_omega: a.max_omega,
        grid_resolution: a.grid_resolution,
        small_omega: a.small_omega,
        ..TheoryCheckConfig::default()
    };
    if cfg.min_octaves == 0 || cfg.min_octaves > cfg.max_octaves {
        return Err(usage("octave range must satisfy 1 <= min <= max"));
    }
    let outcomes = run_theory_checks(&cfg).map_err(usage)?;
    for c in &outcomes {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} {:<28} worst={:.3e} tol={:.1e}  {}",
            c.name, c.worst_error, c.tolerance, c.detail
        );
    }
    if let Some(dir) = &a.output.output_dir {
        let json = serde_json::to_string_pretty(&outcomes).map_err(failure)?;
        write_file(&dir.join("theory_check.json"), &json)?;
    }
    if outcomes.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(failure("theory checks failed"))
    }
}

#[derive(Serialize)]
struct MetricsReport {
    #[serde(with = "float_or_inf")]
    psnr: f64,
    ssim: f64,
    /// `null` where the ground truth has no detail power.
    wdpr: Vec<Option<f64>>,
    power_ratio: Vec<Option<f64>>,
    #[serde(with = "float_or_inf::option", skip_serializing_if = "Option::is_none")]
    rwde: Option<f64>,
}

fn metrics(a: MetricsArgs) -> CliResult<()> {
    let truth = read_image(&a.truth).map_err(usage)?;
    let syn = read_image(&a.syn).map_err(usage)?;
    if truth.shape() != syn.shape() {
        return Err(failure(format!(
            "image sizes differ: {:?} vs {:?}",
            truth.shape(),
            syn.shape()
        )));
    }
    let window = a.window.min(truth.width).min(truth.height);
    let mut report = MetricsReport {
        psnr: psnr(&truth, &syn).map_err(failure)?,
        ssim: ssim(&truth, &syn, window).map_err(failure)?,
        wdpr: Vec::new(),
        power_ratio: Vec::new(),
        rwde: None,
    };
    for level in 1..=a.levels {
        let check = |r: spe_core::Result<f64>| match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::Metric(m)) if m.contains("no detail power") => Ok(None),
            Err(e) => Err(failure(e)),
        };
        report.wdpr.push(check(wdpr(&truth, &syn, level))?);
        report.power_ratio.push(check(power_ratio(&truth, &syn, level))?);
    }
    if let Some(path) = &a.train {
        let train = read_image(path).map_err(usage)?;
        report.rwde = Some(match rwde(&train, &syn, &truth) {
            Ok(v) => v,
            Err(Error::PerfectSynthesis) => f64::INFINITY,
            Err(e) => return Err(failure(e)),
        });
    }
    let json = serde_json::to_string_pretty(&report).map_err(failure)?;
    println!("{json}");
    if let Some(dir) = &a.output.output_dir {
        write_file(&dir.join("metrics.json"), &json)?;
    }
    Ok(())
}
