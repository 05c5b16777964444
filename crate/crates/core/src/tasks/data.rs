use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ImageBuffer;
use crate::training::Split;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetKind {
    Signal1d,
    Image2d {
        width: usize,
        height: usize,
        channels: usize,
    },
}

/// Coordinates in `[0, 1]^d` with targets and a train/test partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub kind: DatasetKind,
    /// `N × d`.
    pub coords: Array2<f64>,
    /// `N × c`.
    pub targets: Array2<f64>,
    /// `true` for training samples; everything else is test.
    pub train_mask: Vec<bool>,
}

/// Owned subset of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Subset {
    pub indices: Vec<usize>,
    pub coords: Array2<f64>,
    pub targets: Array2<f64>,
}

impl Subset {
    pub fn split(&self) -> Split<'_> {
        Split {
            coords: self.coords.view(),
            targets: self.targets.view(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.ncols()
    }

    fn subset(&self, want_train: bool) -> Subset {
        let indices: Vec<usize> = (0..self.len()).filter(|&i| self.train_mask[i] == want_train).collect();
        Subset {
            coords: self.coords.select(Axis(0), &indices),
            targets: self.targets.select(Axis(0), &indices),
            indices,
        }
    }

    pub fn train(&self) -> Subset {
        self.subset(true)
    }

    pub fn test(&self) -> Subset {
        self.subset(false)
    }

    /// Ground-truth image for 2D datasets.
    pub fn image(&self) -> Option<ImageBuffer> {
        match self.kind {
            DatasetKind::Image2d {
                width,
                height,
                channels,
            } => ImageBuffer::new(width, height, channels, self.targets.iter().copied().collect()).ok(),
            DatasetKind::Signal1d => None,
        }
    }

    /// 1D datasets as `x,y` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in self.coords.column(0).iter().zip(self.targets.column(0)) {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }
}

/// One sinusoidal component `amplitude · sin(2π·frequency·x + phase)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalMode {
    pub frequency: u32,
    pub amplitude: f64,
    pub phase: f64,
}

/// Frequencies uniform on the integers `1..=max_frequency`, amplitudes
/// `1/f`, phases uniform on `[0, 2π)`.
pub fn signal_modes(seed: u64, n_modes: usize, max_frequency: u32) -> Vec<SignalMode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_modes)
        .map(|_| {
            let frequency = rng.random_range(1..=max_frequency.max(1));
            let phase = rng.random_range(0.0..2.0 * PI);
            SignalMode {
                frequency,
                amplitude: 1.0 / frequency as f64,
                phase,
            }
        })
        .collect()
}

/// Sum of random sinusoids on the grid `x_k = k/n`; even indices train,
/// odd indices test.
pub fn gen_signal_1d(seed: u64, n_samples: usize, n_modes: usize, max_frequency: u32) -> Result<Dataset> {
    if n_samples < 4 || n_samples % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "1D signal needs an even sample count >= 4, got {n_samples}"
        )));
    }
    if n_modes == 0 || max_frequency == 0 {
        return Err(Error::InvalidArgument("1D signal needs at least one mode and max_frequency >= 1".into()));
    }
    let modes = signal_modes(seed, n_modes, max_frequency);
    let coords = Array2::from_shape_fn((n_samples, 1), |(k, _)| k as f64 / n_samples as f64);
    let targets = coords.mapv(|x| {
        modes
            .iter()
            .map(|m| m.amplitude * (2.0 * PI * m.frequency as f64 * x + m.phase).sin())
            .sum()
    });
    Ok(Dataset {
        kind: DatasetKind::Signal1d,
        coords,
        targets,
        train_mask: (0..n_samples).map(|k| k % 2 == 0).collect(),
    })
}

/// Pixel-centre coordinates; pixels with both indices divisible by
/// `train_stride` train.
pub fn dataset_from_image(img: &ImageBuffer, train_stride: usize) -> Result<Dataset> {
    if train_stride == 0 {
        return Err(Error::InvalidArgument("train stride must be >= 1".into()));
    }
    let (w, h, c) = img.shape();
    let coords = Array2::from_shape_fn((w * h, 2), |(i, j)| {
        let (x, y) = (i % w, i / w);
        if j == 0 {
            (x as f64 + 0.5) / w as f64
        } else {
            (y as f64 + 0.5) / h as f64
        }
    });
    let targets = Array2::from_shape_vec((w * h, c), img.values.clone()).expect("image value count");
    let train_mask = (0..w * h)
        .map(|i| (i % w) % train_stride == 0 && (i / w) % train_stride == 0)
        .collect();
    Ok(Dataset {
        kind: DatasetKind::Image2d {
            width: w,
            height: h,
            channels: c,
        },
        coords,
        targets,
        train_mask,
    })
}

/// Reads a PGM or PPM file (P2, P3, P5, P6; maxval 255 or 65535).
pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pnm(&bytes).map_err(|reason| Error::MalformedImage {
        path: path.to_path_buf(),
        reason,
    })
}

/// Reads an image and splits it with the default stride of 2.
pub fn load_image(path: &Path) -> Result<Dataset> {
    dataset_from_image(&read_image(path)?, 2)
}

fn parse_pnm(bytes: &[u8]) -> std::result::Result<ImageBuffer, String> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or("missing magic number")?;
    let (channels, binary) = match magic.as_str() {
        "P2" => (1, false),
        "P5" => (1, true),
        "P3" => (3, false),
        "P6" => (3, true),
        other => return Err(format!("unsupported magic number {other:?}")),
    };
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = next_token(bytes, &mut pos).ok_or(format!("missing {name}"))?;
        *slot = tok.parse().map_err(|_| format!("invalid {name} {tok:?}"))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    if maxval != 255 && maxval != 65535 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    let count = width * height * channels;
    let scale = maxval as f64;
    let values: Vec<f64> = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let size = if maxval == 255 { 1 } else { 2 };
        let raster = bytes.get(pos..pos + count * size).ok_or("raster is truncated")?;
        if maxval == 255 {
            raster.iter().map(|&b| b as f64 / scale).collect()
        } else {
            raster
                .chunks_exact(2)
                .map(|p| u16::from_be_bytes([p[0], p[1]]) as f64 / scale)
                .collect()
        }
    } else {
        (0..count)
            .map(|_| {
                let tok = next_token(bytes, &mut pos).ok_or("raster is truncated")?;
                let v: usize = tok.parse().map_err(|_| format!("invalid sample {tok:?}"))?;
                if v > maxval {
                    return Err(format!("sample {v} exceeds maxval {maxval}"));
                }
                Ok(v as f64 / scale)
            })
            .collect::<std::result::Result<_, String>>()?
    };
    ImageBuffer::new(width, height, channels, values).map_err(|e| e.to_string())
}

/// Whitespace-separated header token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

/// Writes an 8-bit binary PGM (1 channel) or PPM (3 channels).
pub fn write_image(path: &Path, img: &ImageBuffer) -> Result<()> {
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut bytes = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    bytes.extend(img.values.iter().map(|v| (v * 255.0).round() as u8));
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Deterministic test image: oriented gratings of increasing frequency
/// plus a disc, quantised to 8 bits.
pub fn synthetic_image(size: usize, seed: u64) -> Result<ImageBuffer> {
    if size == 0 {
        return Err(Error::InvalidArgument("image size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gratings: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|k| {
            let angle = rng.random_range(0.0..PI);
            let freq = 2.0 * (k + 1) as f64;
            let phase = rng.random_range(0.0..2.0 * PI);
            (angle, freq, phase, 0.12 / (k + 1) as f64)
        })
        .collect();
    let (cx, cy) = (rng.random_range(0.3..0.7), rng.random_range(0.3..0.7));
    let radius = rng.random_range(0.15..0.25);
    let mut values = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let (u, v) = ((x as f64 + 0.5) / size as f64, (y as f64 + 0.5) / size as f64);
            let mut s = 0.45;
            for &(angle, freq, phase, amp) in &gratings {
                let t = u * angle.cos() + v * angle.sin();
                s += amp * (2.0 * PI * freq * t + phase).sin();
            }
            if (u - cx).powi(2) + (v - cy).powi(2) < radius * radius {
                s += 0.2;
            }
            values.push((s.clamp(0.0, 1.0) * 255.0).round() / 255.0);
        }
    }
    ImageBuffer::new(size, size, 1, values)
}
