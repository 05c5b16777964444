use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{dataset_from_image, gen_signal_1d, read_image, synthetic_image, write_image, Dataset, DatasetKind};
use crate::encoders::{EncoderSpec, SpectrumEntry};
use crate::error::{Error, Result};
use crate::metrics::{float_or_inf, power_ratio, psnr, rwde, ssim, wdpr, ImageBuffer, SSIM_WINDOW};
use crate::network::{ActivationKind, Model, ModelSpec};
use crate::training::{iterations_to_threshold, train, OptimConfig, TrainRecord};

fn default_n_samples() -> usize {
    256
}

fn default_n_modes() -> usize {
    8
}

fn default_max_frequency() -> u32 {
    64
}

fn default_stride() -> usize {
    2
}

fn default_size() -> usize {
    64
}

fn default_constant_size() -> usize {
    16
}

fn default_constant_value() -> f64 {
    0.5
}

fn default_channels() -> usize {
    1
}

/// Where the samples of an experiment come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Signal1d {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_n_samples")]
        n_samples: usize,
        #[serde(default = "default_n_modes")]
        n_modes: usize,
        #[serde(default = "default_max_frequency")]
        max_frequency: u32,
    },
    Image {
        path: PathBuf,
        #[serde(default = "default_stride")]
        train_stride: usize,
    },
    SyntheticImage {
        #[serde(default = "default_size")]
        size: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_stride")]
        train_stride: usize,
    },
    ConstantImage {
        #[serde(default = "default_constant_size")]
        size: usize,
        #[serde(default = "default_constant_value")]
        value: f64,
        #[serde(default = "default_channels")]
        channels: usize,
        #[serde(default = "default_stride")]
        train_stride: usize,
    },
}

impl DatasetSpec {
    /// Replaces the seed of generated datasets.
    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            DatasetSpec::Signal1d { seed, .. } | DatasetSpec::SyntheticImage { seed, .. } => *seed = new_seed,
            DatasetSpec::Image { .. } | DatasetSpec::ConstantImage { .. } => {}
        }
        spec
    }

    pub fn build(&self) -> Result<Dataset> {
        match self {
            &DatasetSpec::Signal1d {
                seed,
                n_samples,
                n_modes,
                max_frequency,
            } => gen_signal_1d(seed, n_samples, n_modes, max_frequency),
            DatasetSpec::Image { path, train_stride } => dataset_from_image(&read_image(path)?, *train_stride),
            &DatasetSpec::SyntheticImage {
                size,
                seed,
                train_stride,
            } => dataset_from_image(&synthetic_image(size, seed)?, train_stride),
            &DatasetSpec::ConstantImage {
                size,
                value,
                channels,
                train_stride,
            } => {
                let img = ImageBuffer::new(size, size, channels, vec![value; size * size * channels])?;
                dataset_from_image(&img, train_stride)
            }
        }
    }
}

fn default_wdpr_levels() -> usize {
    3
}

fn default_ssim_window() -> usize {
    SSIM_WINDOW
}

/// Image metrics evaluated after training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSet {
    /// Levels `1..=wdpr_levels` that divide the image size are reported.
    #[serde(default = "default_wdpr_levels")]
    pub wdpr_levels: usize,
    /// Clipped to the image size.
    #[serde(default = "default_ssim_window")]
    pub ssim_window: usize,
}

impl Default for MetricSet {
    fn default() -> Self {
        Self {
            wdpr_levels: default_wdpr_levels(),
            ssim_window: default_ssim_window(),
        }
    }
}

/// Everything needed to reproduce one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dataset: DatasetSpec,
    pub encoder: EncoderSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub optim: OptimConfig,
    #[serde(default)]
    pub metrics: MetricSet,
    /// Artifacts are written here when set.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Overrides the encoder, network, optimizer and generated-dataset seeds.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Copy with the run seed pushed into every sub-configuration.
    pub fn resolved(&self) -> Self {
        let mut spec = self.clone();
        if let Some(seed) = self.seed {
            spec.dataset = spec.dataset.with_seed(seed);
            spec.encoder = spec.encoder.with_seed(seed);
            spec.model.seed = seed;
            spec.optim.seed = seed;
        }
        spec
    }

    /// Effective run seed.
    pub fn run_seed(&self) -> u64 {
        self.seed.unwrap_or(self.model.seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.optim.validate()?;
        if self.model.hidden_widths.contains(&0) {
            return Err(Error::InvalidConfig("hidden widths must be >= 1".into()));
        }
        if self.metrics.ssim_window == 0 {
            return Err(Error::InvalidConfig("ssim_window must be >= 1".into()));
        }
        self.encoder.build(1)?;
        Ok(())
    }
}

/// Effective-frequency summary of an adaptive encoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub components: usize,
    /// Octave carrying the largest share of `Σ ω*²`.
    pub dominant_octave: usize,
    pub max_omega_star: f64,
    /// Share of `Σ ω*²` per octave, starting at octave 1.
    pub octave_energy: Vec<f64>,
}

impl SpectrumSummary {
    pub fn from_entries(entries: &[SpectrumEntry]) -> Self {
        let top = entries.iter().map(|e| e.octave).max().unwrap_or(0);
        let mut octave_energy = vec![0.0; top];
        for e in entries {
            octave_energy[e.octave - 1] += e.omega_star.powi(2);
        }
        let total: f64 = octave_energy.iter().sum();
        if total > 0.0 {
            octave_energy.iter_mut().for_each(|v| *v /= total);
        }
        let dominant_octave = octave_energy
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i + 1, v) } else { best })
            .0;
        Self {
            components: entries.len(),
            dominant_octave,
            max_omega_star: entries.iter().map(|e| e.omega_star.abs()).fold(0.0, f64::max),
            octave_energy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// One row of a comparison: a single encoder and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub encoder: String,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default, with = "float_or_inf::option")]
    pub final_train_loss: Option<f64>,
    #[serde(default, with = "float_or_inf::option")]
    pub final_test_loss: Option<f64>,
    #[serde(default, with = "float_or_inf::option")]
    pub test_psnr: Option<f64>,
    #[serde(default, with = "float_or_inf::option")]
    pub test_ssim: Option<f64>,
    /// Level `k` at index `k − 1`; `None` where the ground truth has no power.
    #[serde(default)]
    pub wdpr: Vec<Option<f64>>,
    #[serde(default)]
    pub power_ratio: Vec<Option<f64>>,
    /// `"inf"` when the synthesis matches the test histogram exactly.
    #[serde(default, with = "float_or_inf::option")]
    pub rwde: Option<f64>,
    /// First recorded iteration at or below the comparison threshold.
    #[serde(default)]
    pub iterations_to_threshold: Option<usize>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSummary>,
    /// Location of the persisted loss record, relative to the output root.
    #[serde(default)]
    pub record_path: Option<String>,
    #[serde(skip)]
    pub record: TrainRecord,
}

impl RunReport {
    fn failed(label: String, encoder: String, seed: u64, error: &Error, record: TrainRecord) -> Self {
        Self {
            label,
            encoder,
            seed,
            status: RunStatus::Failed,
            error: Some(error.to_string()),
            final_train_loss: None,
            final_test_loss: None,
            test_psnr: None,
            test_ssim: None,
            wdpr: Vec::new(),
            power_ratio: Vec::new(),
            rwde: None,
            iterations_to_threshold: None,
            spectrum: None,
            record_path: None,
            record,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Trained model and its report.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub model: Model,
    pub dataset: Dataset,
    pub report: RunReport,
}

/// Trains, evaluates on the test partition and persists artifacts when an
/// output directory is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport> {
    run_labelled(spec, &spec.encoder.label()).map(|o| o.report)
}

/// Like [`run_experiment`] but also returns the trained model.
pub fn run_experiment_full(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    run_labelled(spec, &spec.encoder.label())
}

fn run_labelled(spec: &ExperimentSpec, label: &str) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let spec = spec.resolved();
    let dataset = spec.dataset.build()?;
    let model = Model::build(&spec.encoder, &spec.model, dataset.input_dim(), dataset.output_dim())?;
    let (train_set, test_set) = (dataset.train(), dataset.test());
    let test_split = (!test_set.is_empty()).then(|| test_set.split());
    let (model, record) = train(model, train_set.split(), test_split, &spec.optim)?;

    let final_train_loss = record.final_train_loss();
    let mut report = RunReport {
        label: label.to_string(),
        encoder: spec.encoder.label(),
        seed: spec.run_seed(),
        status: RunStatus::Ok,
        error: None,
        final_train_loss,
        final_test_loss: record.final_test_loss(),
        test_psnr: None,
        test_ssim: None,
        wdpr: Vec::new(),
        power_ratio: Vec::new(),
        rwde: None,
        iterations_to_threshold: final_train_loss.and_then(|l| iterations_to_threshold(&record, l)),
        spectrum: None,
        record_path: None,
        record,
    };
    if spec.encoder.has_spectrum() {
        report.spectrum = Some(SpectrumSummary::from_entries(&model.learned_spectrum()?));
    }
    let prediction = model.predict(dataset.coords.view())?;
    if let DatasetKind::Image2d { .. } = dataset.kind {
        evaluate_image(&spec.metrics, &dataset, &prediction, &mut report)?;
    }
    if let Some(dir) = &spec.output_dir {
        persist(dir, &spec, &model, &dataset, &prediction, &mut report)?;
    }
    Ok(ExperimentOutcome {
        model,
        dataset,
        report,
    })
}

fn rows_image(rows: &Array2<f64>, idx: &[usize]) -> Result<ImageBuffer> {
    let c = rows.ncols();
    let values = idx.iter().flat_map(|&i| rows.row(i).to_vec()).collect();
    ImageBuffer::new(idx.len(), 1, c, values)
}

fn evaluate_image(metrics: &MetricSet, dataset: &Dataset, prediction: &Array2<f64>, report: &mut RunReport) -> Result<()> {
    let DatasetKind::Image2d {
        width,
        height,
        channels,
    } = dataset.kind
    else {
        return Ok(());
    };
    let truth = dataset.image().expect("image dataset");
    let synthesized = ImageBuffer::new(width, height, channels, prediction.iter().copied().collect())?;
    let test_idx = dataset.test().indices;
    let train_idx = dataset.train().indices;
    if !test_idx.is_empty() {
        let syn_test = rows_image(prediction, &test_idx)?;
        let true_test = rows_image(&dataset.targets, &test_idx)?;
        report.test_psnr = Some(psnr(&true_test, &syn_test)?);
        report.rwde = match rwde(&rows_image(&dataset.targets, &train_idx)?, &syn_test, &true_test) {
            Ok(v) => Some(v),
            Err(Error::PerfectSynthesis) => Some(f64::INFINITY),
            Err(e) => return Err(e),
        };
    }
    report.test_ssim = Some(ssim(&truth, &synthesized, metrics.ssim_window.min(width).min(height))?);
    for level in 1..=metrics.wdpr_levels {
        let block = 1usize << level;
        if width % block != 0 || height % block != 0 {
            break;
        }
        report.wdpr.push(wdpr(&truth, &synthesized, level).ok());
        report.power_ratio.push(power_ratio(&truth, &synthesized, level).ok());
    }
    Ok(())
}

fn persist(dir: &Path, spec: &ExperimentSpec, model: &Model, dataset: &Dataset, prediction: &Array2<f64>, report: &mut RunReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write("spec.json", serde_json::to_string_pretty(spec)?)?;
    model.save(&dir.join("checkpoint.json"))?;
    report.record.write_csv(&dir.join("record.csv"))?;
    report.record_path = Some("record.csv".into());
    match dataset.kind {
        DatasetKind::Signal1d => {
            let mut csv = String::from("x,y,prediction,train\n");
            for i in 0..dataset.len() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    dataset.coords[[i, 0]],
                    dataset.targets[[i, 0]],
                    prediction[[i, 0]],
                    u8::from(dataset.train_mask[i])
                ));
            }
            write("prediction.csv", csv)?;
        }
        DatasetKind::Image2d {
            width,
            height,
            channels,
        } => {
            let img = ImageBuffer::new(width, height, channels, prediction.iter().copied().collect())?;
            let ext = if channels == 1 { "pgm" } else { "ppm" };
            write_image(&dir.join(format!("prediction.{ext}")), &img)?;
        }
    }
    if spec.encoder.has_spectrum() {
        write("spectrum.csv", spectrum_csv(&model.learned_spectrum()?))?;
    }
    write("report.json", report.to_json()?)
}

/// `component,octave,omega_star` rows.
pub fn spectrum_csv(entries: &[SpectrumEntry]) -> String {
    let mut out = String::from("component,octave,omega_star\n");
    for e in entries {
        out.push_str(&format!("{},{},{}\n", e.component, e.octave, e.omega_star));
    }
    out
}

/// One encoder configuration in a comparison sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    /// Defaults to the encoder label, suffixed with any activation override.
    #[serde(default)]
    pub label: Option<String>,
    pub encoder: EncoderSpec,
    #[serde(default)]
    pub first_activation: Option<ActivationKind>,
    #[serde(default)]
    pub hidden_activation: Option<ActivationKind>,
    #[serde(default)]
    pub learning_rate: Option<f64>,
}

impl Variant {
    pub fn new(encoder: EncoderSpec) -> Self {
        Self {
            label: None,
            encoder,
            first_activation: None,
            hidden_activation: None,
            learning_rate: None,
        }
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let mut label = self.encoder.label();
        if let Some(a) = self.first_activation {
            label.push_str(&format!("+{a}"));
        }
        label
    }

    fn apply(&self, base: &ExperimentSpec) -> ExperimentSpec {
        let mut spec = base.clone();
        spec.encoder = self.encoder.clone();
        if let Some(a) = self.first_activation {
            spec.model.first_activation = a;
        }
        if let Some(a) = self.hidden_activation {
            spec.model.hidden_activation = a;
        }
        if self.learning_rate.is_some() {
            spec.optim.learning_rate = self.learning_rate;
        }
        spec
    }
}

/// Medians over the successful runs of one variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub label: String,
    pub runs: usize,
    pub failed: usize,
    #[serde(with = "float_or_inf::option")]
    pub median_final_train_loss: Option<f64>,
    #[serde(with = "float_or_inf::option")]
    pub median_final_test_loss: Option<f64>,
    #[serde(with = "float_or_inf::option")]
    pub median_test_psnr: Option<f64>,
    #[serde(with = "float_or_inf::option")]
    pub median_test_ssim: Option<f64>,
    #[serde(with = "float_or_inf::option")]
    pub median_iterations_to_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Variant with the highest median final train loss; its per-seed final
    /// loss is the iteration-count threshold for every row of that seed.
    pub threshold_label: Option<String>,
    /// Variant order, then ascending seed.
    pub rows: Vec<RunReport>,
    pub summary: Vec<VariantSummary>,
}

/// Median of the values present; `None` when all are missing.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Runs every variant on every seed with `workers` threads. Failed runs
/// become failed rows.
pub fn compare_encodings(base: &ExperimentSpec, variants: &[Variant], seeds: &[u64], workers: usize) -> Result<ComparisonReport> {
    if variants.is_empty() {
        return Err(Error::InvalidArgument("comparison needs at least one encoder".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("comparison needs at least one seed".into()));
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    let mut labels: Vec<String> = Vec::new();
    for v in variants {
        let l = v.label();
        if labels.contains(&l) {
            return Err(Error::InvalidArgument(format!("duplicate comparison label {l:?}")));
        }
        labels.push(l);
    }
    let jobs: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let run = |&(v, seed): &(usize, u64)| {
        let mut spec = variants[v].apply(base);
        spec.seed = Some(seed);
        let label = &labels[v];
        let rel = format!("{label}/seed-{seed}");
        spec.output_dir = base.output_dir.as_ref().map(|d| d.join(&rel));
        log::info!("running {label} seed {seed}");
        match run_labelled(&spec, label) {
            Ok(mut o) => {
                if o.report.record_path.is_some() {
                    o.report.record_path = Some(format!("{rel}/record.csv"));
                }
                o.report
            }
            Err(e) => {
                log::warn!("{label} seed {seed} failed: {e}");
                let record = match &e {
                    Error::Diverged { record, .. } => (**record).clone(),
                    _ => TrainRecord::default(),
                };
                RunReport::failed(label.clone(), spec.encoder.label(), seed, &e, record)
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let mut rows: Vec<RunReport> = pool.install(|| jobs.par_iter().map(run).collect());

    let loss_median = |label: &str, rows: &[RunReport]| {
        median(rows.iter().filter(|r| r.label == label && r.is_ok()).filter_map(|r| r.final_train_loss))
    };
    let threshold_label = labels
        .iter()
        .filter_map(|l| loss_median(l, &rows).map(|m| (l.clone(), m)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(l, _)| l);
    if let Some(weak) = &threshold_label {
        let fallback = loss_median(weak, &rows);
        for &seed in &seeds {
            let threshold = rows
                .iter()
                .find(|r| &r.label == weak && r.seed == seed && r.is_ok())
                .and_then(|r| r.final_train_loss)
                .or(fallback);
            for r in rows.iter_mut().filter(|r| r.seed == seed && r.is_ok()) {
                r.iterations_to_threshold = threshold.and_then(|t| iterations_to_threshold(&r.record, t));
            }
        }
    }
    let summary = labels
        .iter()
        .map(|label| {
            let mine: Vec<&RunReport> = rows.iter().filter(|r| &r.label == label).collect();
            let ok: Vec<&&RunReport> = mine.iter().filter(|r| r.is_ok()).collect();
            VariantSummary {
                label: label.clone(),
                runs: mine.len(),
                failed: mine.len() - ok.len(),
                median_final_train_loss: median(ok.iter().filter_map(|r| r.final_train_loss)),
                median_final_test_loss: median(ok.iter().filter_map(|r| r.final_test_loss)),
                median_test_psnr: median(ok.iter().filter_map(|r| r.test_psnr)),
                median_test_ssim: median(ok.iter().filter_map(|r| r.test_ssim)),
                median_iterations_to_threshold: median(
                    ok.iter().filter_map(|r| r.iterations_to_threshold.map(|i| i as f64)),
                ),
            }
        })
        .collect();
    Ok(ComparisonReport {
        threshold_label,
        rows,
        summary,
    })
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() && x > 0.0 => "inf".into(),
        Some(x) if x.abs() >= 1e-3 && x.abs() < 1e5 => format!("{x:.4}"),
        Some(x) => format!("{x:.3e}"),
        None => "-".into(),
    }
}

impl ComparisonReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-seed rows as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "label,encoder,seed,status,final_train_loss,final_test_loss,test_psnr,test_ssim,rwde,iterations_to_threshold\n",
        );
        let num = |v: Option<f64>| match v {
            Some(x) if x.is_infinite() => if x > 0.0 { "inf".to_string() } else { "-inf".to_string() },
            Some(x) => x.to_string(),
            None => String::new(),
        };
        for r in &self.rows {
            let status = if r.is_ok() { "ok" } else { "failed" };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.label,
                r.encoder,
                r.seed,
                status,
                num(r.final_train_loss),
                num(r.final_test_loss),
                num(r.test_psnr),
                num(r.test_ssim),
                num(r.rwde),
                r.iterations_to_threshold.map(|i| i.to_string()).unwrap_or_default()
            ));
        }
        out
    }

    /// Fixed-width table of per-variant medians.
    pub fn to_table(&self) -> String {
        let header = ["encoder", "runs", "failed", "train_loss", "test_loss", "psnr", "ssim", "iters"];
        let mut lines = vec![header.iter().map(|h| format!("{h:>14}")).collect::<String>()];
        for s in &self.summary {
            let cells = [
                s.label.clone(),
                s.runs.to_string(),
                s.failed.to_string(),
                cell(s.median_final_train_loss),
                cell(s.median_final_test_loss),
                cell(s.median_test_psnr),
                cell(s.median_test_ssim),
                cell(s.median_iterations_to_threshold),
            ];
            lines.push(cells.iter().map(|c| format!("{c:>14}")).collect());
        }
        if let Some(t) = &self.threshold_label {
            lines.push(format!("iterations measured to the final train loss of {t}"));
        }
        lines.join("\n") + "\n"
    }

    pub fn summary_for(&self, label: &str) -> Option<&VariantSummary> {
        self.summary.iter().find(|s| s.label == label)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in [
            ("comparison.json", self.to_json()?),
            ("comparison.csv", self.to_csv()),
            ("comparison.txt", self.to_table()),
        ] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
