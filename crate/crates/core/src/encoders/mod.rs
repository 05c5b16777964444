//! Input encodings and the encoding-level theory.
//!
//! Each family has a configuration type and a pure single-point function
//! (`pe_encode`, `grff_encode`, ...). [`EncoderSpec`] describes a family in
//! serialisable form and [`Encoder`] is its runtime counterpart used inside
//! a model, with batched forward and backward passes.
//!
//! Dataset coordinates live in `[0, 1]^d`. Sinusoidal families see them
//! mapped affinely to `[-1, 1]^d` (`x ↦ 2x − 1`); the hash grid works on the
//! unit cube directly.

pub mod ape;
pub mod grff;
pub mod hash;
pub mod pe;
pub mod spe;
pub mod spectrum;
pub mod theory;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

pub use ape::{ape_encode, ApeParams};
pub use grff::{grff_encode, GrffConfig};
pub use hash::{hash_encode, hash_index, HashEncoding, HashGridConfig, DEFAULT_PRIMES};
pub use pe::{pe_encode, PeConfig};
pub use spe::{spe_apply, SpeLayerParams, SpeMode, SpeWeights};
pub use spectrum::{ape_spectrum, learned_spectrum, spectrum_energy_fraction, SpectrumEntry};
pub use theory::{delta_pe, delta_pe_brute_force, is_gates, sawtooth_s_function, theorem1_error};

use crate::error::{Error, Result};
use crate::params::Parameters;
use hash::CornerWeight;

/// Encoded representation of one coordinate vector.
///
/// Layout: per input dimension, then per octave (or frequency) ascending,
/// then `(sin, cos)`. GRFF is the exception: all sines, then all cosines.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedFeatures {
    pub values: Vec<f64>,
}

impl EncodedFeatures {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteInput {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

fn default_diagonal_init() -> f64 {
    1.0
}

fn default_table_size() -> usize {
    1 << 14
}

fn default_features_per_entry() -> usize {
    2
}

fn default_base_resolution() -> usize {
    16
}

fn default_growth_factor() -> f64 {
    1.5
}

/// Serialisable description of an encoder family and its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncoderSpec {
    /// Raw coordinates in `[-1, 1]`.
    Identity,
    Pe {
        octaves: usize,
        #[serde(default)]
        falloff: f64,
    },
    /// Dense mode puts a sine on the first network layer; diagonal mode adds
    /// a per-component trainable sine stage in front of the network.
    Spe {
        octaves: usize,
        #[serde(default)]
        falloff: f64,
        #[serde(default)]
        mode: SpeMode,
        /// Initial `ω` for diagonal mode.
        #[serde(default = "default_diagonal_init")]
        diagonal_init: f64,
    },
    Grff {
        features: usize,
        sigma: f64,
        #[serde(default)]
        seed: u64,
    },
    Ape {
        frequencies: usize,
    },
    Hash {
        levels: usize,
        #[serde(default = "default_table_size")]
        table_size: usize,
        #[serde(default = "default_features_per_entry")]
        features_per_entry: usize,
        #[serde(default = "default_base_resolution")]
        base_resolution: usize,
        #[serde(default = "default_growth_factor")]
        growth_factor: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl EncoderSpec {
    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            EncoderSpec::Identity => "identity".into(),
            EncoderSpec::Pe { .. } => "pe".into(),
            EncoderSpec::Spe {
                mode: SpeMode::Dense,
                ..
            } => "spe".into(),
            EncoderSpec::Spe {
                mode: SpeMode::Diagonal,
                ..
            } => "spe_diagonal".into(),
            EncoderSpec::Grff { .. } => "grff".into(),
            EncoderSpec::Ape { .. } => "ape".into(),
            EncoderSpec::Hash { .. } => "hash".into(),
        }
    }

    /// SPE and APE carry trainable frequencies with a learned spectrum.
    pub fn has_spectrum(&self) -> bool {
        matches!(self, EncoderSpec::Spe { .. } | EncoderSpec::Ape { .. })
    }

    /// Dense SPE is realised as PE followed by a sine-activated first layer.
    pub fn forces_sine_first_layer(&self) -> bool {
        matches!(
            self,
            EncoderSpec::Spe {
                mode: SpeMode::Dense,
                ..
            }
        )
    }

    /// Replaces any family-specific seed.
    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            EncoderSpec::Grff { seed, .. } | EncoderSpec::Hash { seed, .. } => *seed = new_seed,
            _ => {}
        }
        spec
    }

    /// PE configuration underlying SPE or PE, if any.
    pub fn pe_config(&self, input_dim: usize) -> Result<Option<PeConfig>> {
        match *self {
            EncoderSpec::Pe { octaves, falloff } | EncoderSpec::Spe { octaves, falloff, .. } => {
                PeConfig::new(octaves, falloff, input_dim).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn build(&self, input_dim: usize) -> Result<Encoder> {
        if input_dim == 0 {
            return Err(Error::InvalidConfig("input dimension must be >= 1".into()));
        }
        Ok(match *self {
            EncoderSpec::Identity => Encoder::Identity { input_dim },
            EncoderSpec::Pe { octaves, falloff } => {
                Encoder::Pe(PeConfig::new(octaves, falloff, input_dim)?)
            }
            EncoderSpec::Spe {
                octaves,
                falloff,
                mode,
                diagonal_init,
            } => {
                let pe = PeConfig::new(octaves, falloff, input_dim)?;
                match mode {
                    SpeMode::Dense => Encoder::Pe(pe),
                    SpeMode::Diagonal => {
                        if !diagonal_init.is_finite() {
                            return Err(Error::InvalidConfig(
                                "SPE diagonal_init must be finite".into(),
                            ));
                        }
                        Encoder::SpeDiagonal(SpeLayerParams::diagonal(pe, diagonal_init))
                    }
                }
            }
            EncoderSpec::Grff {
                features,
                sigma,
                seed,
            } => Encoder::Grff(GrffConfig::new(features, sigma, seed, input_dim)?),
            EncoderSpec::Ape { frequencies } => {
                Encoder::Ape(ApeParams::geometric(frequencies, input_dim)?)
            }
            EncoderSpec::Hash {
                levels,
                table_size,
                features_per_entry,
                base_resolution,
                growth_factor,
                seed,
            } => Encoder::Hash(HashGridConfig::new(
                levels,
                table_size,
                features_per_entry,
                base_resolution,
                growth_factor,
                input_dim,
                seed,
            )?),
        })
    }
}

/// Runtime encoder with its trainable state.
#[derive(Clone, Debug, PartialEq)]
pub enum Encoder {
    Identity { input_dim: usize },
    Pe(PeConfig),
    SpeDiagonal(SpeLayerParams),
    Grff(GrffConfig),
    Ape(ApeParams),
    Hash(HashGridConfig),
}

/// Intermediate values kept by [`Encoder::forward`] for the backward pass.
#[derive(Clone, Debug)]
pub enum EncoderCache {
    Stateless,
    SpeDiagonal {
        features: Array2<f64>,
        pre: Array2<f64>,
    },
    Ape {
        coords: Array2<f64>,
    },
    Hash {
        corners: Vec<CornerWeight>,
        points: usize,
    },
}

impl Encoder {
    pub fn input_dim(&self) -> usize {
        match self {
            Encoder::Identity { input_dim } => *input_dim,
            Encoder::Pe(c) => c.input_dim,
            Encoder::SpeDiagonal(p) => p.inner_pe.input_dim,
            Encoder::Grff(c) => c.input_dim(),
            Encoder::Ape(p) => p.input_dim,
            Encoder::Hash(c) => c.input_dim,
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            Encoder::Identity { input_dim } => *input_dim,
            Encoder::Pe(c) => c.output_len(),
            Encoder::SpeDiagonal(p) => p.output_len(),
            Encoder::Grff(c) => c.output_len(),
            Encoder::Ape(p) => p.output_len(),
            Encoder::Hash(c) => c.output_len(),
        }
    }

    /// Encodes a batch of unit-cube coordinates (`N × d`).
    ///
    /// Returns the features and whether the hash grid had to clamp.
    pub fn forward(&self, coords: ArrayView2<f64>) -> Result<(Array2<f64>, EncoderCache, bool)> {
        if coords.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "encoder input dimension",
                expected: self.input_dim(),
                actual: coords.ncols(),
            });
        }
        if let Encoder::Hash(cfg) = self {
            let (out, corners, clamped) = cfg.encode_batch(coords)?;
            let cache = EncoderCache::Hash {
                corners,
                points: coords.nrows(),
            };
            return Ok((out, cache, clamped));
        }
        let centred = coords.mapv(|v| 2.0 * v - 1.0);
        let (out, cache) = match self {
            Encoder::Identity { .. } => {
                for row in centred.rows() {
                    check_finite(row.as_slice().expect("row-major coordinates"))?;
                }
                (centred, EncoderCache::Stateless)
            }
            Encoder::Pe(c) => (c.encode_batch(centred.view())?, EncoderCache::Stateless),
            Encoder::SpeDiagonal(p) => {
                let features = p.inner_pe.encode_batch(centred.view())?;
                let (out, pre) = p.diagonal_forward(&features);
                (out, EncoderCache::SpeDiagonal { features, pre })
            }
            Encoder::Grff(c) => (c.encode_batch(centred.view())?, EncoderCache::Stateless),
            Encoder::Ape(p) => {
                let out = p.encode_batch(centred.view())?;
                (out, EncoderCache::Ape { coords: centred })
            }
            Encoder::Hash(_) => unreachable!(),
        };
        Ok((out, cache, false))
    }

    /// Gradients of the trainable state, in [`Parameters::param_slices`] order.
    pub fn backward(&self, cache: &EncoderCache, grad: ArrayView2<f64>) -> Result<Vec<Vec<f64>>> {
        if grad.ncols() != self.output_len() {
            return Err(Error::ShapeMismatch {
                context: "encoder output gradient",
                expected: self.output_len(),
                actual: grad.ncols(),
            });
        }
        match (self, cache) {
            (Encoder::Identity { .. } | Encoder::Pe(_) | Encoder::Grff(_), EncoderCache::Stateless) => {
                Ok(Vec::new())
            }
            (Encoder::SpeDiagonal(p), EncoderCache::SpeDiagonal { features, pre }) => {
                check_rows(features.nrows(), grad.nrows())?;
                let (d_omega, d_phase) = p.diagonal_backward(features, pre, grad);
                Ok(vec![d_omega, d_phase])
            }
            (Encoder::Ape(p), EncoderCache::Ape { coords }) => {
                check_rows(coords.nrows(), grad.nrows())?;
                Ok(vec![p.backward(coords.view(), grad)])
            }
            (Encoder::Hash(c), EncoderCache::Hash { corners, points }) => {
                check_rows(*points, grad.nrows())?;
                Ok(vec![c.backward(corners, grad)])
            }
            _ => Err(Error::CacheMismatch(
                "encoder cache was produced by a different encoder family".into(),
            )),
        }
    }

    /// PE configuration this encoder is built on, if any.
    pub fn pe_config(&self) -> Option<&PeConfig> {
        match self {
            Encoder::Pe(c) => Some(c),
            Encoder::SpeDiagonal(p) => Some(&p.inner_pe),
            _ => None,
        }
    }
}

fn check_rows(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::CacheMismatch(format!(
            "cache holds {expected} rows, gradient has {actual}"
        )));
    }
    Ok(())
}

impl Parameters for Encoder {
    fn param_slices(&self) -> Vec<&[f64]> {
        match self {
            Encoder::SpeDiagonal(p) => {
                let SpeWeights::Diagonal(w) = &p.weights else {
                    unreachable!("diagonal encoder holds diagonal weights")
                };
                vec![w, &p.phase]
            }
            Encoder::Ape(p) => vec![&p.omegas],
            Encoder::Hash(c) => vec![&c.tables],
            _ => Vec::new(),
        }
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Encoder::SpeDiagonal(p) => {
                let SpeWeights::Diagonal(w) = &mut p.weights else {
                    unreachable!("diagonal encoder holds diagonal weights")
                };
                vec![w, &mut p.phase]
            }
            Encoder::Ape(p) => vec![&mut p.omegas],
            Encoder::Hash(c) => vec![&mut c.tables],
            _ => Vec::new(),
        }
    }
}
