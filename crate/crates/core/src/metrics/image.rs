use ndarray::Array2;

use crate::error::{Error, Result};

/// Row-major image with interleaved channels and values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub values: Vec<f64>,
}

impl ImageBuffer {
    /// Clamps values into `[0, 1]`; NaN is rejected.
    pub fn new(width: usize, height: usize, channels: usize, mut values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Metric("image must have nonzero size".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Metric(format!("images have 1 or 3 channels, got {channels}")));
        }
        if values.len() != width * height * channels {
            return Err(Error::ShapeMismatch {
                context: "image value count",
                expected: width * height * channels,
                actual: values.len(),
            });
        }
        for v in &mut values {
            if v.is_nan() {
                return Err(Error::Metric("image contains NaN".into()));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self {
            width,
            height,
            channels,
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.values[(y * self.width + x) * self.channels + c]
    }

    /// One channel as a `height × width` array.
    pub fn channel(&self, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((self.height, self.width), |(y, x)| self.get(x, y, c))
    }

    /// Builds an image from `height × width` channel planes.
    pub fn from_channels(planes: &[Array2<f64>]) -> Result<Self> {
        let (h, w) = planes
            .first()
            .ok_or_else(|| Error::Metric("no channel planes".into()))?
            .dim();
        if planes.iter().any(|p| p.dim() != (h, w)) {
            return Err(Error::Metric("channel planes differ in size".into()));
        }
        let mut values = Vec::with_capacity(h * w * planes.len());
        for y in 0..h {
            for x in 0..w {
                values.extend(planes.iter().map(|p| p[[y, x]]));
            }
        }
        Self::new(w, h, planes.len(), values)
    }
}
