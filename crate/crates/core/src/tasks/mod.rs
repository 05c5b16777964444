//! Regression tasks, experiment runs and encoder comparisons.
//!
//! Dataset coordinates live in `[0, 1]^d`; encoders map them affinely to
//! `[-1, 1]` (hash grids use them directly).

pub mod data;
pub mod experiment;
pub mod theory_check;

pub use data::{
    dataset_from_image, gen_signal_1d, load_image, read_image, signal_modes, synthetic_image, write_image, Dataset, DatasetKind,
    SignalMode, Subset,
};
pub use experiment::{
    compare_encodings, median, run_experiment, run_experiment_full, spectrum_csv, ComparisonReport, DatasetSpec, ExperimentOutcome,
    ExperimentSpec, MetricSet, RunReport, RunStatus, SpectrumSummary, Variant, VariantSummary,
};
pub use theory_check::{run_theory_checks, CheckOutcome, TheoryCheckConfig};
