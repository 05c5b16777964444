use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_finite, EncodedFeatures};
use crate::error::{Error, Result};

/// Default per-dimension hash primes; the first is 1 so 1D grids hash by
/// plain modulo.
pub const DEFAULT_PRIMES: [u64; 3] = [1, 2_654_435_761, 805_459_861];

/// Multi-level grid of trainable feature vectors addressed through an
/// XOR-of-primes hash of the integer grid corners.
#[derive(Clone, Debug, PartialEq)]
pub struct HashGridConfig {
    pub levels: usize,
    pub table_size: usize,
    pub features_per_entry: usize,
    pub base_resolution: usize,
    pub growth_factor: f64,
    pub input_dim: usize,
    pub primes: Vec<u64>,
    /// `levels × table_size × features_per_entry`, row-major.
    pub tables: Vec<f64>,
}

/// Result of encoding one point.
#[derive(Clone, Debug, PartialEq)]
pub struct HashEncoding {
    pub features: EncodedFeatures,
    /// Set when some coordinate lay outside `[0, 1]` and was clamped.
    pub clamped: bool,
}

/// One corner contribution: table slot and its interpolation weight.
#[derive(Clone, Copy, Debug)]
pub struct CornerWeight {
    pub slot: usize,
    pub weight: f64,
}

impl HashGridConfig {
    /// Tables initialised uniformly in `±1e-4`.
    pub fn new(
        levels: usize,
        table_size: usize,
        features_per_entry: usize,
        base_resolution: usize,
        growth_factor: f64,
        input_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        if levels == 0 || table_size == 0 || features_per_entry == 0 || base_resolution == 0 {
            return Err(Error::InvalidConfig(
                "hash grid levels, table size, features and base resolution must be >= 1".into(),
            ));
        }
        if !(growth_factor > 1.0 && growth_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "hash grid growth factor must be > 1, got {growth_factor}"
            )));
        }
        if input_dim == 0 || input_dim > DEFAULT_PRIMES.len() {
            return Err(Error::InvalidConfig(format!(
                "hash grid supports 1 to 3 input dimensions, got {input_dim}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = (0..levels * table_size * features_per_entry)
            .map(|_| rng.random_range(-1e-4..=1e-4))
            .collect();
        Ok(Self {
            levels,
            table_size,
            features_per_entry,
            base_resolution,
            growth_factor,
            input_dim,
            primes: DEFAULT_PRIMES[..input_dim].to_vec(),
            tables,
        })
    }

    pub fn output_len(&self) -> usize {
        self.levels * self.features_per_entry
    }

    /// Grid resolution of `level`: `floor(base · growth^level)`.
    pub fn resolution(&self, level: usize) -> u64 {
        (self.base_resolution as f64 * self.growth_factor.powi(level as i32)).floor() as u64
    }

    fn row(&self, level: usize, index: usize) -> usize {
        (level * self.table_size + index) * self.features_per_entry
    }

    /// Clamps `x` into the unit cube and lists the `2^d` corner slots per
    /// level with their d-linear weights.
    pub(crate) fn corners(&self, x: &[f64], out: &mut Vec<CornerWeight>) -> bool {
        let d = self.input_dim;
        let mut clamped = false;
        let unit: Vec<f64> = x
            .iter()
            .map(|&v| {
                let c = v.clamp(0.0, 1.0);
                clamped |= c != v;
                c
            })
            .collect();
        let mut lower = vec![0u64; d];
        let mut frac = vec![0.0; d];
        let mut corner = vec![0u64; d];
        for level in 0..self.levels {
            let res = self.resolution(level);
            for i in 0..d {
                let scaled = unit[i] * res as f64;
                let base = (scaled.floor() as u64).min(res.saturating_sub(1));
                lower[i] = base;
                frac[i] = scaled - base as f64;
            }
            for mask in 0..(1usize << d) {
                let mut weight = 1.0;
                for i in 0..d {
                    if mask >> i & 1 == 1 {
                        corner[i] = lower[i] + 1;
                        weight *= frac[i];
                    } else {
                        corner[i] = lower[i];
                        weight *= 1.0 - frac[i];
                    }
                }
                let index = hash_index(&corner, &self.primes, self.table_size);
                out.push(CornerWeight {
                    slot: self.row(level, index),
                    weight,
                });
            }
        }
        clamped
    }

    fn gather(&self, corners: &[CornerWeight], out: &mut [f64]) {
        let f = self.features_per_entry;
        let per_level = 1usize << self.input_dim;
        for (level, chunk) in corners.chunks(per_level).enumerate() {
            let dst = &mut out[level * f..(level + 1) * f];
            dst.fill(0.0);
            for c in chunk {
                for (k, v) in dst.iter_mut().enumerate() {
                    *v += c.weight * self.tables[c.slot + k];
                }
            }
        }
    }

    /// Encodes each row of `coords` (in `[0, 1]^d`). Returns the features, the
    /// corner list for the backward pass, and whether any point was clamped.
    pub(crate) fn encode_batch(
        &self,
        coords: ArrayView2<f64>,
    ) -> Result<(Array2<f64>, Vec<CornerWeight>, bool)> {
        if coords.ncols() != self.input_dim {
            return Err(Error::ShapeMismatch {
                context: "hash grid input dimension",
                expected: self.input_dim,
                actual: coords.ncols(),
            });
        }
        let per_point = self.levels << self.input_dim;
        let mut corners = Vec::with_capacity(coords.nrows() * per_point);
        let mut out = Array2::zeros((coords.nrows(), self.output_len()));
        let mut any_clamped = false;
        for (row, mut dst) in coords.rows().into_iter().zip(out.rows_mut()) {
            let x = row.to_vec();
            check_finite(&x)?;
            let start = corners.len();
            any_clamped |= self.corners(&x, &mut corners);
            self.gather(&corners[start..], dst.as_slice_mut().expect("row-major output"));
        }
        Ok((out, corners, any_clamped))
    }

    /// Scatters output gradients back into a table-shaped gradient.
    pub(crate) fn backward(&self, corners: &[CornerWeight], grad: ArrayView2<f64>) -> Vec<f64> {
        let f = self.features_per_entry;
        let per_level = 1usize << self.input_dim;
        let per_point = self.levels * per_level;
        let mut g = vec![0.0; self.tables.len()];
        for (point, gr) in corners.chunks(per_point).zip(grad.rows()) {
            for (level, chunk) in point.chunks(per_level).enumerate() {
                for c in chunk {
                    for k in 0..f {
                        g[c.slot + k] += c.weight * gr[level * f + k];
                    }
                }
            }
        }
        g
    }
}

/// `(⊕_i corner_i · prime_i) mod table_size` with wrapping 64-bit products.
pub fn hash_index(corner: &[u64], primes: &[u64], table_size: usize) -> usize {
    let h = corner
        .iter()
        .zip(primes)
        .fold(0u64, |acc, (&c, &p)| acc ^ c.wrapping_mul(p));
    (h % table_size as u64) as usize
}

pub fn hash_encode(x: &[f64], cfg: &HashGridConfig) -> Result<HashEncoding> {
    if x.len() != cfg.input_dim {
        return Err(Error::ShapeMismatch {
            context: "hash grid input dimension",
            expected: cfg.input_dim,
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let mut corners = Vec::new();
    let clamped = cfg.corners(x, &mut corners);
    let mut values = vec![0.0; cfg.output_len()];
    cfg.gather(&corners, &mut values);
    Ok(HashEncoding {
        features: EncodedFeatures::new(values),
        clamped,
    })
}
