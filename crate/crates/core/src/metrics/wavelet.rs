use ndarray::Array2;

use super::image::ImageBuffer;
use crate::error::{Error, Result};

/// Detail coefficients of one analysis level.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailBands {
    /// Horizontal differences.
    pub lh: Array2<f64>,
    /// Vertical differences.
    pub hl: Array2<f64>,
    /// Diagonal differences.
    pub hh: Array2<f64>,
}

impl DetailBands {
    pub fn energy(&self) -> f64 {
        [&self.lh, &self.hl, &self.hh]
            .iter()
            .map(|b| b.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }
}

/// Orthonormal 2D Haar pyramid; `details[0]` is the finest level.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletPyramid {
    pub details: Vec<DetailBands>,
    pub approximation: Array2<f64>,
}

impl WaveletPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn energy(&self) -> f64 {
        self.details.iter().map(DetailBands::energy).sum::<f64>()
            + self.approximation.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Applies `levels` orthonormal Haar steps to a single-channel image.
///
/// Each 2×2 block `[[a, b], [c, d]]` maps to `(a+b+c+d)/2` (approximation),
/// `(a−b+c−d)/2`, `(a+b−c−d)/2` and `(a−b−c+d)/2`.
pub fn haar_decompose(img: &ImageBuffer, levels: usize) -> Result<WaveletPyramid> {
    if img.channels != 1 {
        return Err(Error::Metric("Haar decomposition takes a single-channel image".into()));
    }
    decompose_plane(img.channel(0), levels)
}

pub(crate) fn decompose_plane(plane: Array2<f64>, levels: usize) -> Result<WaveletPyramid> {
    let (h, w) = plane.dim();
    let block = 1usize.checked_shl(levels as u32).unwrap_or(0);
    if levels == 0 || block == 0 || h % block != 0 || w % block != 0 {
        return Err(Error::Metric(format!(
            "a {w}x{h} image cannot be decomposed into {levels} Haar levels"
        )));
    }
    let mut approx = plane;
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (h, w) = approx.dim();
        let (h2, w2) = (h / 2, w / 2);
        let mut ll = Array2::zeros((h2, w2));
        let mut lh = Array2::zeros((h2, w2));
        let mut hl = Array2::zeros((h2, w2));
        let mut hh = Array2::zeros((h2, w2));
        for y in 0..h2 {
            for x in 0..w2 {
                let a = approx[[2 * y, 2 * x]];
                let b = approx[[2 * y, 2 * x + 1]];
                let c = approx[[2 * y + 1, 2 * x]];
                let d = approx[[2 * y + 1, 2 * x + 1]];
                ll[[y, x]] = (a + b + c + d) / 2.0;
                lh[[y, x]] = (a - b + c - d) / 2.0;
                hl[[y, x]] = (a + b - c - d) / 2.0;
                hh[[y, x]] = (a - b - c + d) / 2.0;
            }
        }
        details.push(DetailBands { lh, hl, hh });
        approx = ll;
    }
    Ok(WaveletPyramid {
        details,
        approximation: approx,
    })
}

/// Inverse of [`haar_decompose`], returning the `height × width` plane.
pub fn haar_reconstruct(pyramid: &WaveletPyramid) -> Array2<f64> {
    let mut approx = pyramid.approximation.clone();
    for bands in pyramid.details.iter().rev() {
        let (h2, w2) = approx.dim();
        let mut out = Array2::zeros((2 * h2, 2 * w2));
        for y in 0..h2 {
            for x in 0..w2 {
                let (s, p, q, r) = (approx[[y, x]], bands.lh[[y, x]], bands.hl[[y, x]], bands.hh[[y, x]]);
                out[[2 * y, 2 * x]] = (s + p + q + r) / 2.0;
                out[[2 * y, 2 * x + 1]] = (s - p + q - r) / 2.0;
                out[[2 * y + 1, 2 * x]] = (s + p - q - r) / 2.0;
                out[[2 * y + 1, 2 * x + 1]] = (s - p - q + r) / 2.0;
            }
        }
        approx = out;
    }
    approx
}

/// Detail energy at level `level` (1 = finest), summed over channels.
pub fn band_power(img: &ImageBuffer, level: usize) -> Result<f64> {
    let mut total = 0.0;
    for c in 0..img.channels {
        let pyramid = decompose_plane(img.channel(c), level)?;
        total += pyramid.details[level - 1].energy();
    }
    Ok(total)
}

fn powers(y_true: &ImageBuffer, y_syn: &ImageBuffer, level: usize) -> Result<(f64, f64)> {
    if y_true.shape() != y_syn.shape() {
        return Err(Error::Metric(format!(
            "image shapes differ: {:?} vs {:?}",
            y_true.shape(),
            y_syn.shape()
        )));
    }
    let pt = band_power(y_true, level)?;
    if pt == 0.0 {
        return Err(Error::Metric(format!(
            "ground truth has no detail power at level {level}"
        )));
    }
    Ok((pt, band_power(y_syn, level)?))
}

/// `|P_true − P_syn| / P_true` for the level-`level` detail bands.
pub fn wdpr(y_true: &ImageBuffer, y_syn: &ImageBuffer, level: usize) -> Result<f64> {
    let (pt, ps) = powers(y_true, y_syn, level)?;
    Ok((pt - ps).abs() / pt)
}

/// `P_syn / P_true` for the level-`level` detail bands.
pub fn power_ratio(y_true: &ImageBuffer, y_syn: &ImageBuffer, level: usize) -> Result<f64> {
    let (pt, ps) = powers(y_true, y_syn, level)?;
    Ok(ps / pt)
}
