//! Image fidelity and frequency metrics: PSNR, SSIM, orthonormal Haar
//! pyramids with the detail-band power ratio, and histogram Wasserstein
//! distances.

pub mod image;
pub mod wavelet;

use ndarray::Array2;

pub use image::ImageBuffer;
pub use wavelet::{haar_decompose, haar_reconstruct, power_ratio, wdpr, DetailBands, WaveletPyramid};

use crate::error::{Error, Result};

pub const SSIM_C1: f64 = 1e-4;
pub const SSIM_C2: f64 = 9e-4;
pub const SSIM_WINDOW: usize = 8;
pub const HISTOGRAM_BINS: usize = 256;

fn same_shape(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Metric(format!(
            "image shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `10·log10(1/MSE)`; identical images give `+∞`.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    same_shape(a, b)?;
    let mse = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        / a.values.len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    })
}

/// Mean SSIM over all `window × window` patches at stride 1, uniform
/// weights and population statistics, averaged over channels.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer, window: usize) -> Result<f64> {
    same_shape(a, b)?;
    if window == 0 || window > a.width.min(a.height) {
        return Err(Error::Metric(format!(
            "SSIM window {window} does not fit a {}x{} image",
            a.width, a.height
        )));
    }
    let mut total = 0.0;
    for c in 0..a.channels {
        total += ssim_channel(&a.channel(c), &b.channel(c), window);
    }
    Ok(total / a.channels as f64)
}

/// Summed-area table with a zero border row and column.
fn integral(img: &Array2<f64>) -> Array2<f64> {
    let (h, w) = img.dim();
    let mut s = Array2::zeros((h + 1, w + 1));
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += img[[y, x]];
            s[[y + 1, x + 1]] = s[[y, x + 1]] + row;
        }
    }
    s
}

fn box_sum(s: &Array2<f64>, y: usize, x: usize, k: usize) -> f64 {
    s[[y + k, x + k]] - s[[y, x + k]] - s[[y + k, x]] + s[[y, x]]
}

fn ssim_channel(a: &Array2<f64>, b: &Array2<f64>, k: usize) -> f64 {
    let (h, w) = a.dim();
    let sa = integral(a);
    let sb = integral(b);
    let saa = integral(&(a * a));
    let sbb = integral(&(b * b));
    let sab = integral(&(a * b));
    let n = (k * k) as f64;
    let mut total = 0.0;
    for y in 0..=h - k {
        for x in 0..=w - k {
            let ma = box_sum(&sa, y, x, k) / n;
            let mb = box_sum(&sb, y, x, k) / n;
            let va = (box_sum(&saa, y, x, k) / n - ma * ma).max(0.0);
            let vb = (box_sum(&sbb, y, x, k) / n - mb * mb).max(0.0);
            let cov = box_sum(&sab, y, x, k) / n - ma * mb;
            total += ssim_formula(ma, mb, va, vb, cov);
        }
    }
    total / ((h - k + 1) * (w - k + 1)) as f64
}

pub(crate) fn ssim_formula(ma: f64, mb: f64, va: f64, vb: f64, cov: f64) -> f64 {
    ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
        / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2))
}

/// Exact 1D optimal transport between two histograms with unit bin width:
/// the L1 distance between their normalised CDFs.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Metric(format!(
            "histogram lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Metric("histograms must be finite and nonnegative".into()));
    }
    let (ma, mb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if ma <= 0.0 || mb <= 0.0 {
        return Err(Error::Metric("histogram has zero mass".into()));
    }
    let (mut ca, mut cb, mut dist) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ca += x / ma;
        cb += y / mb;
        dist += (ca - cb).abs();
    }
    Ok(dist)
}

/// Intensity histogram of one channel with `bins` uniform bins on `[0, 1]`.
pub fn histogram(img: &ImageBuffer, channel: usize, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    for v in img.values.iter().skip(channel).step_by(img.channels) {
        let i = ((v * bins as f64) as usize).min(bins - 1);
        h[i] += 1.0;
    }
    h
}

/// `WD(train, syn) / WD(true, syn)` over 256-bin histograms, each distance
/// averaged across channels before taking the ratio.
///
/// Images may differ in pixel count but must agree in channel count.
pub fn rwde(y_train: &ImageBuffer, y_syn: &ImageBuffer, y_true: &ImageBuffer) -> Result<f64> {
    let c = y_syn.channels;
    if y_train.channels != c || y_true.channels != c {
        return Err(Error::Metric("RWDE images must have the same channel count".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ch in 0..c {
        let hs = histogram(y_syn, ch, HISTOGRAM_BINS);
        num += wasserstein_1d(&histogram(y_train, ch, HISTOGRAM_BINS), &hs)?;
        den += wasserstein_1d(&histogram(y_true, ch, HISTOGRAM_BINS), &hs)?;
    }
    if den == 0.0 {
        return Err(Error::PerfectSynthesis);
    }
    Ok(num / den)
}

/// Serde helpers that write non-finite floats as `"inf"`, `"-inf"` or `"nan"`.
pub mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {other:?}"))),
            },
        }
    }

    /// Same encoding for `Option<f64>`, with `None` as `null`.
    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] f64);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}
