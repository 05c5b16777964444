use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};

use super::{check_finite, EncodedFeatures};
use crate::error::{Error, Result};

/// Adaptive positional encoding: `[sin(ω_k x_i), cos(ω_k x_i)]` with
/// trainable frequencies `ω_k` applied directly to the raw coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ApeParams {
    pub omegas: Vec<f64>,
    pub input_dim: usize,
}

impl ApeParams {
    pub fn new(omegas: Vec<f64>, input_dim: usize) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidConfig("APE needs at least one frequency".into()));
        }
        if input_dim == 0 {
            return Err(Error::InvalidConfig("APE input dimension must be >= 1".into()));
        }
        Ok(Self { omegas, input_dim })
    }

    /// Starts at the fixed PE frequencies `π, 2π, …, 2^(K-1)π`.
    pub fn geometric(frequencies: usize, input_dim: usize) -> Result<Self> {
        let omegas = (0..frequencies).map(|k| (1u64 << k) as f64 * PI).collect();
        Self::new(omegas, input_dim)
    }

    pub fn output_len(&self) -> usize {
        2 * self.omegas.len() * self.input_dim
    }

    fn encode_into(&self, x: &[f64], out: &mut [f64]) {
        let per_dim = 2 * self.omegas.len();
        for (i, &xi) in x.iter().enumerate() {
            for (k, &w) in self.omegas.iter().enumerate() {
                let (s, c) = (w * xi).sin_cos();
                out[i * per_dim + 2 * k] = s;
                out[i * per_dim + 2 * k + 1] = c;
            }
        }
    }

    pub fn encode_batch(&self, coords: ArrayView2<f64>) -> Result<Array2<f64>> {
        if coords.ncols() != self.input_dim {
            return Err(Error::ShapeMismatch {
                context: "APE input dimension",
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

    /// Gradient of `Σ grad ⊙ encode(coords)` with respect to the frequencies.
    ///
    /// `d sin(ωx)/dω = x cos(ωx)`, `d cos(ωx)/dω = -x sin(ωx)`.
    pub fn backward(&self, coords: ArrayView2<f64>, grad: ArrayView2<f64>) -> Vec<f64> {
        let per_dim = 2 * self.omegas.len();
        let mut g = vec![0.0; self.omegas.len()];
        for (x, gr) in coords.rows().into_iter().zip(grad.rows()) {
            for (i, &xi) in x.iter().enumerate() {
                for (k, &w) in self.omegas.iter().enumerate() {
                    let (s, c) = (w * xi).sin_cos();
                    let base = i * per_dim + 2 * k;
                    g[k] += gr[base] * xi * c - gr[base + 1] * xi * s;
                }
            }
        }
        g
    }
}

pub fn ape_encode(x: &[f64], params: &ApeParams) -> Result<EncodedFeatures> {
    if x.len() != params.input_dim {
        return Err(Error::ShapeMismatch {
            context: "APE input dimension",
            expected: params.input_dim,
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let mut values = vec![0.0; params.output_len()];
    params.encode_into(x, &mut values);
    Ok(EncodedFeatures::new(values))
}
