use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pe::PeConfig;
use super::EncodedFeatures;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeMode {
    /// One trainable `ω` per PE component: `sin(ω_j·f_j + φ_j)`.
    Diagonal,
    /// Full first layer followed by a sine: `sin(W·f + φ)`.
    #[default]
    Dense,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpeWeights {
    Diagonal(Vec<f64>),
    /// `width × pe.output_len()`.
    Dense(Array2<f64>),
}

/// Trainable sine layer applied on top of a positional encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeLayerParams {
    pub weights: SpeWeights,
    pub phase: Vec<f64>,
    pub inner_pe: PeConfig,
}

impl SpeLayerParams {
    /// Diagonal layer with every `ω` set to `omega` and zero phase.
    pub fn diagonal(inner_pe: PeConfig, omega: f64) -> Self {
        let n = inner_pe.output_len();
        Self {
            weights: SpeWeights::Diagonal(vec![omega; n]),
            phase: vec![0.0; n],
            inner_pe,
        }
    }

    /// Dense layer with SIREN first-layer initialisation, `U(-1/fan_in, 1/fan_in)`.
    pub fn dense(inner_pe: PeConfig, width: usize, seed: u64) -> Self {
        let fan_in = inner_pe.output_len();
        let bound = 1.0 / fan_in as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Array2::from_shape_simple_fn((width, fan_in), || rng.random_range(-bound..=bound));
        Self {
            weights: SpeWeights::Dense(w),
            phase: vec![0.0; width],
            inner_pe,
        }
    }

    pub fn mode(&self) -> SpeMode {
        match self.weights {
            SpeWeights::Diagonal(_) => SpeMode::Diagonal,
            SpeWeights::Dense(_) => SpeMode::Dense,
        }
    }

    pub fn input_len(&self) -> usize {
        self.inner_pe.output_len()
    }

    pub fn output_len(&self) -> usize {
        self.phase.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.input_len();
        match &self.weights {
            SpeWeights::Diagonal(w) => {
                if w.len() != n {
                    return Err(Error::ShapeMismatch {
                        context: "diagonal SPE weights",
                        expected: n,
                        actual: w.len(),
                    });
                }
                if self.phase.len() != n {
                    return Err(Error::ShapeMismatch {
                        context: "diagonal SPE phase",
                        expected: n,
                        actual: self.phase.len(),
                    });
                }
            }
            SpeWeights::Dense(w) => {
                if w.ncols() != n {
                    return Err(Error::ShapeMismatch {
                        context: "dense SPE weight columns",
                        expected: n,
                        actual: w.ncols(),
                    });
                }
                if self.phase.len() != w.nrows() {
                    return Err(Error::ShapeMismatch {
                        context: "dense SPE phase",
                        expected: w.nrows(),
                        actual: self.phase.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Batch form of the diagonal layer. Returns `(output, pre_activation)`.
    pub(crate) fn diagonal_forward(&self, features: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let SpeWeights::Diagonal(w) = &self.weights else {
            unreachable!("diagonal_forward on dense SPE");
        };
        let mut pre = features.clone();
        for mut row in pre.rows_mut() {
            for ((v, wj), pj) in row.iter_mut().zip(w).zip(&self.phase) {
                *v = *v * wj + pj;
            }
        }
        (pre.mapv(f64::sin), pre)
    }

    /// Gradients `(dω, dφ)` of the diagonal layer.
    pub(crate) fn diagonal_backward(
        &self,
        features: &Array2<f64>,
        pre: &Array2<f64>,
        grad: ArrayView2<f64>,
    ) -> (Vec<f64>, Vec<f64>) {
        let local = &grad * &pre.mapv(f64::cos);
        let d_phase = local.sum_axis(Axis(0)).to_vec();
        let d_omega = (&local * features).sum_axis(Axis(0)).to_vec();
        (d_omega, d_phase)
    }
}

/// Applies the SPE sine layer to one encoded feature vector.
pub fn spe_apply(features: &EncodedFeatures, params: &SpeLayerParams) -> Result<Vec<f64>> {
    params.validate()?;
    let f = &features.values;
    if f.len() != params.input_len() {
        return Err(Error::ShapeMismatch {
            context: "SPE input features",
            expected: params.input_len(),
            actual: f.len(),
        });
    }
    let out = match &params.weights {
        SpeWeights::Diagonal(w) => f
            .iter()
            .zip(w)
            .zip(&params.phase)
            .map(|((fj, wj), pj)| (wj * fj + pj).sin())
            .collect(),
        SpeWeights::Dense(w) => {
            // Same kernel and shapes as a batch-of-one network layer, so the
            // two agree bit for bit.
            let x = ndarray::ArrayView2::from_shape((1, f.len()), f).expect("contiguous features");
            let z = x.dot(&w.t()) + ndarray::ArrayView1::from(&params.phase);
            z.iter().map(|v| v.sin()).collect()
        }
    };
    Ok(out)
}
