use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{check_finite, EncodedFeatures};
use crate::error::{Error, Result};

/// Gaussian random Fourier features `[sin(Bx), cos(Bx)]`.
///
/// `B` (features × input_dim) is drawn once from `N(0, sigma²)` and never
/// trained.
#[derive(Clone, Debug, PartialEq)]
pub struct GrffConfig {
    pub sigma: f64,
    pub seed: u64,
    matrix: Array2<f64>,
}

impl GrffConfig {
    pub fn new(features: usize, sigma: f64, seed: u64, input_dim: usize) -> Result<Self> {
        if features == 0 || input_dim == 0 {
            return Err(Error::InvalidConfig(
                "GRFF needs at least one feature and one input dimension".into(),
            ));
        }
        let normal = Normal::new(0.0, sigma).map_err(|_| {
            Error::InvalidConfig(format!("GRFF sigma must be positive, got {sigma}"))
        })?;
        if sigma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "GRFF sigma must be positive, got {sigma}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = Array2::from_shape_simple_fn((features, input_dim), || normal.sample(&mut rng));
        Ok(Self {
            sigma,
            seed,
            matrix,
        })
    }

    /// Uses an explicit frequency matrix instead of a random draw.
    pub fn from_matrix(matrix: Array2<f64>) -> Self {
        Self {
            sigma: f64::NAN,
            seed: 0,
            matrix,
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn features(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn output_len(&self) -> usize {
        2 * self.features()
    }

    fn encode_into(&self, x: &[f64], out: &mut [f64]) {
        let m = self.features();
        for (k, row) in self.matrix.rows().into_iter().enumerate() {
            let phase: f64 = row.iter().zip(x).map(|(b, xi)| b * xi).sum();
            let (s, c) = phase.sin_cos();
            out[k] = s;
            out[m + k] = c;
        }
    }

    pub fn encode_batch(&self, coords: ArrayView2<f64>) -> Result<Array2<f64>> {
        if coords.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "GRFF input dimension",
                expected: self.input_dim(),
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

pub fn grff_encode(x: &[f64], cfg: &GrffConfig) -> Result<EncodedFeatures> {
    if x.len() != cfg.input_dim() {
        return Err(Error::ShapeMismatch {
            context: "GRFF input dimension",
            expected: cfg.input_dim(),
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let mut values = vec![0.0; cfg.output_len()];
    cfg.encode_into(x, &mut values);
    Ok(EncodedFeatures::new(values))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use ndarray::array;

    use super::*;

    #[test]
    fn zero_matrix() {
        let cfg = GrffConfig::from_matrix(Array2::zeros((3, 2)));
        let f = grff_encode(&[0.3, -0.7], &cfg).unwrap();
        assert_eq!(f.values, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn explicit_pi() {
        let cfg = GrffConfig::from_matrix(array![[PI]]);
        let f = grff_encode(&[0.5], &cfg).unwrap();
        assert!((f.values[0] - 1.0).abs() < 1e-15);
        assert!(f.values[1].abs() < 1e-15);
    }

    #[test]
    fn seeded_draw_is_stable() {
        let a = GrffConfig::new(4, 10.0, 42, 1).unwrap();
        let b = GrffConfig::new(4, 10.0, 42, 1).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let fa = grff_encode(&[0.3], &a).unwrap();
        let fb = grff_encode(&[0.3], &b).unwrap();
        assert_eq!(fa.values, fb.values);
        let c = GrffConfig::new(4, 10.0, 43, 1).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn seeded_golden_vector() {
        // Recorded from the seed-42 draw; the loop re-derives every entry
        // from the drawn matrix before comparing.
        let cfg = GrffConfig::new(4, 10.0, 42, 1).unwrap();
        let b: Vec<f64> = cfg.matrix().iter().copied().collect();
        let f = grff_encode(&[0.3], &cfg).unwrap();
        for (k, bk) in b.iter().enumerate() {
            assert_eq!(f.values[k], (0.3 * bk).sin());
            assert_eq!(f.values[4 + k], (0.3 * bk).cos());
        }
        let golden = GOLDEN_SEED42;
        for (v, g) in f.values.iter().zip(golden) {
            assert!((v - g).abs() < 1e-12, "{:?}", f.values);
        }
    }

    const GOLDEN_SEED42: [f64; 8] = [
        0.9906502872861143,
        -0.7582463919416614,
        -0.5912436759626484,
        0.9899694947645223,
        0.13642583443006454,
        -0.6519681043635894,
        0.8064929730841893,
        0.14128127772523982,
    ];

    #[test]
    fn dimension_mismatch() {
        let cfg = GrffConfig::new(4, 1.0, 1, 2).unwrap();
        assert!(matches!(
            grff_encode(&[0.1], &cfg),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(GrffConfig::new(4, 0.0, 1, 1).is_err());
        assert!(GrffConfig::new(4, -1.0, 1, 1).is_err());
    }
}
