//! Loss, optimizer and the deterministic training loop.

pub mod optim;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use optim::{Algorithm, OptimConfig, Optimizer};

use crate::error::{Error, Result};
use crate::network::{ActivationKind, Model};

/// Losses above this abort a run as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Mean squared error over all entries and its gradient `2(pred − target)/N`.
pub fn mse_loss(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.dim() != target.dim() {
        return Err(Error::ShapeMismatch {
            context: "MSE prediction vs target",
            expected: target.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("MSE of an empty batch".into()));
    }
    let diff = &pred - &target;
    let n = diff.len() as f64;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    Ok((loss, diff * (2.0 / n)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub iteration: usize,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
}

/// Loss timeline sampled at iteration 0, every `eval_every` steps, and at
/// the final iteration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub entries: Vec<RecordEntry>,
}

impl TrainRecord {
    pub fn last(&self) -> Option<&RecordEntry> {
        self.entries.last()
    }

    pub fn final_train_loss(&self) -> Option<f64> {
        self.last().map(|e| e.train_loss)
    }

    pub fn final_test_loss(&self) -> Option<f64> {
        self.last().and_then(|e| e.test_loss)
    }

    /// `iteration,train_loss,test_loss` with an empty cell when no test set.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,train_loss,test_loss\n");
        for e in &self.entries {
            let test = e.test_loss.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{}", e.iteration, e.train_loss, test).expect("write to string");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// First recorded iteration whose train loss is at or below `threshold`.
pub fn iterations_to_threshold(record: &TrainRecord, threshold: f64) -> Option<usize> {
    record
        .entries
        .iter()
        .find(|e| e.train_loss <= threshold)
        .map(|e| e.iteration)
}

/// Coordinates (`N × d`, unit cube) and targets (`N × c`).
#[derive(Clone, Copy, Debug)]
pub struct Split<'a> {
    pub coords: ArrayView2<'a, f64>,
    pub targets: ArrayView2<'a, f64>,
}

impl Split<'_> {
    fn validate(&self, context: &'static str) -> Result<()> {
        if self.coords.nrows() != self.targets.nrows() {
            return Err(Error::ShapeMismatch {
                context,
                expected: self.coords.nrows(),
                actual: self.targets.nrows(),
            });
        }
        Ok(())
    }
}

/// Trains every parameter of `model` jointly: encoder trainables (SPE
/// diagonal weights, APE frequencies, hash tables) and network layers.
///
/// Deterministic given the model's initial state and `cfg.seed`.
pub fn train(mut model: Model, train_set: Split<'_>, test_set: Option<Split<'_>>, cfg: &OptimConfig) -> Result<(Model, TrainRecord)> {
    cfg.validate()?;
    train_set.validate("training coordinates vs targets")?;
    if train_set.coords.nrows() == 0 {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if let Some(t) = &test_set {
        t.validate("test coordinates vs targets")?;
    }
    let sine_first = model.mlp.layers.len() > 1 && model.mlp.layers[0].activation == ActivationKind::Sine;
    let mut optimizer = Optimizer::new(cfg, cfg.resolved_learning_rate(sine_first));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut record = TrainRecord::default();
    let n = train_set.coords.nrows();

    for it in 0..=cfg.iterations {
        let evaluate = it % cfg.eval_every == 0 || it == cfg.iterations;
        let last = it == cfg.iterations;
        if evaluate {
            let train_loss = guarded(&record, it, || {
                let pred = model.predict(train_set.coords)?;
                Ok(mse_loss(pred.view(), train_set.targets)?.0)
            })?;
            let test_loss = match &test_set {
                Some(t) if t.coords.nrows() > 0 => Some(guarded(&record, it, || {
                    let pred = model.predict(t.coords)?;
                    Ok(mse_loss(pred.view(), t.targets)?.0)
                })?),
                _ => None,
            };
            record.entries.push(RecordEntry {
                iteration: it,
                train_loss,
                test_loss,
            });
        }
        if last {
            break;
        }
        let grads = match cfg.batch_size {
            Some(b) if b < n => {
                let idx = sample(&mut rng, n, b).into_vec();
                let coords = train_set.coords.select(Axis(0), &idx);
                let targets = train_set.targets.select(Axis(0), &idx);
                gradient(&model, &record, it, coords.view(), targets.view())?
            }
            _ => gradient(&model, &record, it, train_set.coords, train_set.targets)?,
        };
        optimizer.step(&mut model, &grads)?;
    }
    Ok((model, record))
}

fn gradient(model: &Model, record: &TrainRecord, it: usize, coords: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<Vec<Vec<f64>>> {
    let mut grads = None;
    guarded(record, it, || {
        let (pred, cache) = model.forward(coords)?;
        let (loss, g) = mse_loss(pred.view(), targets)?;
        grads = Some(model.backward(&cache, g.view())?);
        Ok(loss)
    })?;
    Ok(grads.expect("gradient computed"))
}

/// Runs a loss computation and converts divergence into [`Error::Diverged`].
fn guarded<F: FnOnce() -> Result<f64>>(record: &TrainRecord, it: usize, f: F) -> Result<f64> {
    let loss = match f() {
        Ok(l) => l,
        Err(Error::NonFiniteActivation { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    if !loss.is_finite() || loss > DIVERGENCE_THRESHOLD {
        return Err(Error::Diverged {
            iteration: it,
            loss,
            record: Box::new(record.clone()),
        });
    }
    Ok(loss)
}
