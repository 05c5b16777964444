use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{check_finite, EncodedFeatures};
use crate::error::{Error, Result};

/// Fixed positional encoding with geometrically spaced frequencies `2^l·π`.
///
/// Octave `l` (0-based) is scaled by the amplitude `(l+1)^-p`; `p = 0` gives
/// the plain encoding. Output layout is per input dimension, then per octave
/// ascending, then `(sin, cos)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeConfig {
    pub octaves: usize,
    #[serde(default)]
    pub falloff: f64,
    pub input_dim: usize,
}

impl PeConfig {
    pub fn new(octaves: usize, falloff: f64, input_dim: usize) -> Result<Self> {
        let cfg = Self {
            octaves,
            falloff,
            input_dim,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.octaves == 0 {
            return Err(Error::InvalidConfig("PE needs at least one octave".into()));
        }
        if !(self.falloff.is_finite() && self.falloff >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "PE amplitude falloff must be finite and >= 0, got {}",
                self.falloff
            )));
        }
        if self.input_dim == 0 {
            return Err(Error::InvalidConfig("PE input dimension must be >= 1".into()));
        }
        Ok(())
    }

    pub fn output_len(&self) -> usize {
        2 * self.octaves * self.input_dim
    }

    /// Amplitude `(l+1)^-p` of 0-based octave `l`.
    pub fn amplitude(&self, octave: usize) -> f64 {
        ((octave + 1) as f64).powf(-self.falloff)
    }

    /// Angular frequency `2^l·π` of 0-based octave `l`.
    pub fn frequency(octave: usize) -> f64 {
        (1u64 << octave) as f64 * PI
    }

    /// 0-based octave of output component `j`.
    pub fn octave_of(&self, component: usize) -> usize {
        (component % (2 * self.octaves)) / 2
    }

    pub(crate) fn encode_into(&self, x: &[f64], out: &mut [f64]) {
        let per_dim = 2 * self.octaves;
        for (i, &xi) in x.iter().enumerate() {
            for l in 0..self.octaves {
                let a = self.amplitude(l);
                let (s, c) = (Self::frequency(l) * xi).sin_cos();
                out[i * per_dim + 2 * l] = a * s;
                out[i * per_dim + 2 * l + 1] = a * c;
            }
        }
    }

    /// Encodes each row of `coords` (already in `[-1, 1]`).
    pub fn encode_batch(&self, coords: ArrayView2<f64>) -> Result<Array2<f64>> {
        if coords.ncols() != self.input_dim {
            return Err(Error::ShapeMismatch {
                context: "PE input dimension",
                expected: self.input_dim,
                actual: coords.ncols(),
            });
        }
        let mut out = Array2::zeros((coords.nrows(), self.output_len()));
        for (row, mut dst) in coords.rows().into_iter().zip(out.rows_mut()) {
            let x = row.to_vec();
            check_finite(&x)?;
            self.encode_into(&x, dst.as_slice_mut().expect("row-major output"));
        }
        Ok(out)
    }
}

/// Encodes a single coordinate vector.
pub fn pe_encode(x: &[f64], cfg: &PeConfig) -> Result<EncodedFeatures> {
    cfg.validate()?;
    if x.len() != cfg.input_dim {
        return Err(Error::ShapeMismatch {
            context: "PE input dimension",
            expected: cfg.input_dim,
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let mut values = vec![0.0; cfg.output_len()];
    cfg.encode_into(x, &mut values);
    Ok(EncodedFeatures::new(values))
}
