use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use super::mlp::{backward, forward, init_params, DenseLayer, ForwardCache, InitScheme, MlpConfig, MlpParams};
use crate::encoders::{ape_spectrum, learned_spectrum, Encoder, EncoderCache, EncoderSpec, SpeWeights, SpectrumEntry};
use crate::error::{Error, Result};
use crate::params::Parameters;

fn default_hidden_widths() -> Vec<usize> {
    vec![256, 256, 256]
}

/// Network shape independent of the encoder in front of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Hidden widths; `[256, 256, 256]` gives four dense layers.
    #[serde(default = "default_hidden_widths")]
    pub hidden_widths: Vec<usize>,
    #[serde(default)]
    pub hidden_activation: ActivationKind,
    /// Dense SPE forces `sine` here regardless of this value.
    #[serde(default)]
    pub first_activation: ActivationKind,
    /// Defaults to `siren` for sine-first networks and `he` otherwise.
    #[serde(default)]
    pub init_scheme: Option<InitScheme>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            hidden_widths: default_hidden_widths(),
            hidden_activation: ActivationKind::Relu,
            first_activation: ActivationKind::Relu,
            init_scheme: None,
            seed: 0,
        }
    }
}

impl ModelSpec {
    pub fn effective_first_activation(&self, encoder: &EncoderSpec) -> ActivationKind {
        if encoder.forces_sine_first_layer() {
            ActivationKind::Sine
        } else {
            self.first_activation
        }
    }

    pub fn mlp_config(&self, encoder: &EncoderSpec, input_width: usize, output_width: usize) -> MlpConfig {
        let first_activation = self.effective_first_activation(encoder);
        let init_scheme = self.init_scheme.unwrap_or(if first_activation == ActivationKind::Sine {
            InitScheme::Siren
        } else {
            InitScheme::He
        });
        let mut layer_widths = vec![input_width];
        layer_widths.extend(&self.hidden_widths);
        layer_widths.push(output_width);
        MlpConfig {
            layer_widths,
            hidden_activation: self.hidden_activation,
            first_activation,
            init_scheme,
            seed: self.seed,
        }
    }
}

/// Encoder followed by a dense network.
///
/// Parameters are exposed encoder first, then network layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub encoder_spec: EncoderSpec,
    pub encoder: Encoder,
    pub mlp: MlpParams,
}

#[derive(Clone, Debug)]
pub struct ModelCache {
    pub encoder: EncoderCache,
    pub mlp: ForwardCache,
}

impl Model {
    pub fn build(encoder_spec: &EncoderSpec, spec: &ModelSpec, input_dim: usize, output_dim: usize) -> Result<Self> {
        let encoder = encoder_spec.build(input_dim)?;
        let cfg = spec.mlp_config(encoder_spec, encoder.output_len(), output_dim);
        let mlp = init_params(&cfg)?;
        Ok(Self {
            encoder_spec: encoder_spec.clone(),
            encoder,
            mlp,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.mlp.output_width()
    }

    /// Runs encoder and network on unit-cube coordinates.
    pub fn forward(&self, coords: ArrayView2<f64>) -> Result<(Array2<f64>, ModelCache)> {
        let (features, encoder, _) = self.encoder.forward(coords)?;
        let (out, mlp) = forward(&self.mlp, features.view())?;
        Ok((out, ModelCache { encoder, mlp }))
    }

    pub fn predict(&self, coords: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward(coords)?.0)
    }

    /// Gradients of `Σ output_gradient ⊙ forward(coords)` in parameter order.
    pub fn backward(&self, cache: &ModelCache, output_gradient: ArrayView2<f64>) -> Result<Vec<Vec<f64>>> {
        let (mlp_grads, feature_grad) = backward(&self.mlp, &cache.mlp, output_gradient)?;
        let mut grads = if self.encoder.num_params() > 0 {
            self.encoder.backward(&cache.encoder, feature_grad.view())?
        } else {
            Vec::new()
        };
        grads.extend(mlp_grads);
        Ok(grads)
    }

    /// Effective frequencies of the adaptive encoding.
    pub fn learned_spectrum(&self) -> Result<Vec<SpectrumEntry>> {
        match &self.encoder {
            Encoder::SpeDiagonal(p) => Ok(learned_spectrum(&p.weights, &p.inner_pe)),
            Encoder::Ape(p) => Ok(ape_spectrum(p)),
            Encoder::Pe(pe)
                if self.mlp.layers.len() > 1 && self.mlp.layers[0].activation == ActivationKind::Sine =>
            {
                Ok(learned_spectrum(&SpeWeights::Dense(self.mlp.layers[0].weight.clone()), pe))
            }
            _ => Err(Error::NoLearnedSpectrum),
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            encoder: self.encoder_spec.clone(),
            input_dim: self.input_dim(),
            encoder_state: self.encoder.param_slices().iter().map(|s| s.to_vec()).collect(),
            layers: self
                .mlp
                .layers
                .iter()
                .map(|l| LayerState {
                    activation: l.activation,
                    rows: l.fan_out(),
                    cols: l.fan_in(),
                    weight: l.weight.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        let mut encoder = ckpt.encoder.build(ckpt.input_dim)?;
        {
            let mut slots = encoder.param_slices_mut();
            if slots.len() != ckpt.encoder_state.len() {
                return Err(Error::ShapeMismatch {
                    context: "checkpoint encoder state slices",
                    expected: slots.len(),
                    actual: ckpt.encoder_state.len(),
                });
            }
            for (dst, src) in slots.iter_mut().zip(&ckpt.encoder_state) {
                if dst.len() != src.len() {
                    return Err(Error::ShapeMismatch {
                        context: "checkpoint encoder state length",
                        expected: dst.len(),
                        actual: src.len(),
                    });
                }
                dst.copy_from_slice(src);
            }
        }
        let layers = ckpt
            .layers
            .iter()
            .map(|l| {
                let weight = Array2::from_shape_vec((l.rows, l.cols), l.weight.clone()).map_err(|_| Error::ShapeMismatch {
                    context: "checkpoint weight length",
                    expected: l.rows * l.cols,
                    actual: l.weight.len(),
                })?;
                Ok(DenseLayer {
                    weight,
                    bias: Array1::from(l.bias.clone()),
                    activation: l.activation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mlp = MlpParams { layers };
        mlp.validate()?;
        if mlp.input_width() != encoder.output_len() {
            return Err(Error::ShapeMismatch {
                context: "checkpoint network input width",
                expected: encoder.output_len(),
                actual: mlp.input_width(),
            });
        }
        Ok(Self {
            encoder_spec: ckpt.encoder.clone(),
            encoder,
            mlp,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_checkpoint())?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_checkpoint(&serde_json::from_str(&text)?)
    }
}

impl Parameters for Model {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut v = self.encoder.param_slices();
        v.extend(self.mlp.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.encoder.param_slices_mut();
        v.extend(self.mlp.param_slices_mut());
        v
    }
}

pub const CHECKPOINT_FORMAT: &str = "spe-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON checkpoint.
///
/// The encoder is rebuilt from its spec (frozen GRFF matrices are
/// re-drawn from the seed) and its trainable slices are overwritten from
/// `encoder_state`. Layer weights are row-major `rows × cols`. Floats are
/// written with round-trip precision, so loading is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub encoder: EncoderSpec,
    pub input_dim: usize,
    pub encoder_state: Vec<Vec<f64>>,
    pub layers: Vec<LayerState>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerState {
    pub activation: ActivationKind,
    pub rows: usize,
    pub cols: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}
