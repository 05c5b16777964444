use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::params::{central_difference, Parameters};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Layer 0 `U(±1/fan_in)`, deeper sine layers `U(±√(6/fan_in))`, other
    /// layers He.
    Siren,
    /// `N(0, 2/fan_in)` everywhere.
    #[default]
    He,
}

/// Dense network shape and activation schedule.
///
/// Layer 0 uses `first_activation`, middle layers `hidden_activation`, and
/// the output layer is linear. A network with a single dense layer is a
/// plain affine map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpConfig {
    /// Input width, hidden widths, output width.
    pub layer_widths: Vec<usize>,
    #[serde(default)]
    pub hidden_activation: ActivationKind,
    #[serde(default)]
    pub first_activation: ActivationKind,
    #[serde(default)]
    pub init_scheme: InitScheme,
    #[serde(default)]
    pub seed: u64,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "an MLP needs at least input and output widths, got {:?}",
                self.layer_widths
            )));
        }
        if self.layer_widths.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "layer widths must be positive, got {:?}",
                self.layer_widths
            )));
        }
        Ok(())
    }

    pub fn num_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    pub fn activation(&self, layer: usize) -> ActivationKind {
        let n = self.num_layers();
        if layer + 1 == n {
            ActivationKind::Identity
        } else if layer == 0 {
            self.first_activation
        } else {
            self.hidden_activation
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `out × in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: ActivationKind,
}

impl DenseLayer {
    pub fn fan_in(&self) -> usize {
        self.weight.ncols()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.nrows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<DenseLayer>,
}

/// Layer inputs and pre-activations from one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub inputs: Vec<Array2<f64>>,
    pub pre_activations: Vec<Array2<f64>>,
}

pub fn init_params(cfg: &MlpConfig) -> Result<MlpParams> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let layers = cfg
        .layer_widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let activation = cfg.activation(i);
            let weight = match (cfg.init_scheme, i, activation) {
                (InitScheme::Siren, 0, _) => uniform(&mut rng, fan_out, fan_in, 1.0 / fan_in as f64),
                (InitScheme::Siren, _, ActivationKind::Sine) => {
                    uniform(&mut rng, fan_out, fan_in, (6.0 / fan_in as f64).sqrt())
                }
                _ => he_normal(&mut rng, fan_out, fan_in),
            };
            DenseLayer {
                weight,
                bias: Array1::zeros(fan_out),
                activation,
            }
        })
        .collect();
    Ok(MlpParams { layers })
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-bound..=bound))
}

fn he_normal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let normal = Normal::new(0.0, (2.0 / cols as f64).sqrt()).expect("positive std");
    Array2::from_shape_simple_fn((rows, cols), || normal.sample(rng))
}

impl MlpParams {
    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().expect("at least one layer").fan_out()
    }

    /// Verifies layer chaining and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidConfig("MLP has no layers".into()));
        }
        for pair in self.layers.windows(2) {
            if pair[0].fan_out() != pair[1].fan_in() {
                return Err(Error::ShapeMismatch {
                    context: "consecutive layer widths",
                    expected: pair[0].fan_out(),
                    actual: pair[1].fan_in(),
                });
            }
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.bias.len() != layer.fan_out() {
                return Err(Error::ShapeMismatch {
                    context: "bias length",
                    expected: layer.fan_out(),
                    actual: layer.bias.len(),
                });
            }
            if layer.weight.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("layer {i} holds non-finite parameters")));
            }
        }
        Ok(())
    }
}

impl Parameters for MlpParams {
    fn param_slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout weight"),
                    l.bias.as_slice().expect("contiguous bias"),
                ]
            })
            .collect()
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    l.weight.as_slice_mut().expect("standard layout weight"),
                    l.bias.as_slice_mut().expect("contiguous bias"),
                ]
            })
            .collect()
    }
}

/// Runs the network on a batch (`N × input_width`).
pub fn forward(params: &MlpParams, batch: ArrayView2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
    if batch.ncols() != params.input_width() {
        return Err(Error::ShapeMismatch {
            context: "MLP input width",
            expected: params.input_width(),
            actual: batch.ncols(),
        });
    }
    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut pre_activations = Vec::with_capacity(params.layers.len());
    let mut x = batch.to_owned();
    for (i, layer) in params.layers.iter().enumerate() {
        let z = x.dot(&layer.weight.t()) + &layer.bias;
        let a = z.mapv(|v| layer.activation.apply(v));
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteActivation { layer: i });
        }
        inputs.push(x);
        pre_activations.push(z);
        x = a;
    }
    Ok((
        x,
        ForwardCache {
            inputs,
            pre_activations,
        },
    ))
}

/// Exact gradients of `Σ output_gradient ⊙ forward(batch)`.
///
/// Returns per-parameter gradients in [`Parameters::param_slices`] order and
/// the gradient with respect to the batch.
pub fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    output_gradient: ArrayView2<f64>,
) -> Result<(Vec<Vec<f64>>, Array2<f64>)> {
    let n = params.layers.len();
    if cache.inputs.len() != n || cache.pre_activations.len() != n {
        return Err(Error::CacheMismatch(format!(
            "cache has {} layers, network has {n}",
            cache.inputs.len()
        )));
    }
    for (i, (layer, z)) in params.layers.iter().zip(&cache.pre_activations).enumerate() {
        if z.ncols() != layer.fan_out() || cache.inputs[i].ncols() != layer.fan_in() {
            return Err(Error::CacheMismatch(format!("layer {i} widths differ from the cache")));
        }
    }
    let rows = cache.inputs[0].nrows();
    if output_gradient.dim() != (rows, params.output_width()) {
        return Err(Error::CacheMismatch(format!(
            "output gradient is {:?}, expected ({rows}, {})",
            output_gradient.dim(),
            params.output_width()
        )));
    }
    let mut grads = vec![Vec::new(); 2 * n];
    let mut upstream = output_gradient.to_owned();
    for i in (0..n).rev() {
        let layer = &params.layers[i];
        let act = layer.activation;
        let delta = if act == ActivationKind::Identity {
            upstream
        } else {
            let mut d = upstream;
            d.zip_mut_with(&cache.pre_activations[i], |g, &z| *g *= act.derivative(z));
            d
        };
        let dw = delta.t().dot(&cache.inputs[i]);
        let db = delta.sum_axis(Axis(0));
        grads[2 * i] = dw.into_raw_vec_and_offset().0;
        grads[2 * i + 1] = db.to_vec();
        upstream = delta.dot(&layer.weight);
    }
    Ok((grads, upstream))
}

/// Central-difference gradient of `loss(forward(batch))`.
pub fn finite_diff_gradient<F>(
    params: &MlpParams,
    batch: ArrayView2<f64>,
    mut loss_fn: F,
    step: f64,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&Array2<f64>) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let mut probe = params.clone();
    let mut failure = None;
    let grads = central_difference(&mut probe, step, |p| match forward(p, batch) {
        Ok((out, _)) => loss_fn(&out),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(grads),
    }
}

#[cfg(test)]
mod tests {
    use ndarray::{array, s};
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;
    use crate::encoders::{pe_encode, spe_apply, PeConfig, SpeLayerParams, SpeWeights};
    use crate::params::max_relative_error;

    fn cfg(widths: &[usize], first: ActivationKind, hidden: ActivationKind, init: InitScheme, seed: u64) -> MlpConfig {
        MlpConfig {
            layer_widths: widths.to_vec(),
            hidden_activation: hidden,
            first_activation: first,
            init_scheme: init,
            seed,
        }
    }

    fn random_batch(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
    }

    #[test]
    fn init_is_deterministic() {
        let c = cfg(&[3, 16, 16, 1], ActivationKind::Sine, ActivationKind::Relu, InitScheme::Siren, 5);
        assert_eq!(init_params(&c).unwrap(), init_params(&c).unwrap());
    }

    #[test]
    fn siren_bounds() {
        let c = cfg(&[12, 32, 32, 1], ActivationKind::Sine, ActivationKind::Sine, InitScheme::Siren, 1);
        let p = init_params(&c).unwrap();
        assert!(p.layers[0].weight.iter().all(|v| v.abs() <= 1.0 / 12.0));
        let b = (6.0f64 / 32.0).sqrt();
        assert!(p.layers[1].weight.iter().all(|v| v.abs() <= b));
        assert!(p.layers.iter().all(|l| l.bias.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn he_variance() {
        // 400 × 256 = 102400 draws.
        let c = cfg(&[256, 400, 1], ActivationKind::Relu, ActivationKind::Relu, InitScheme::He, 11);
        let w = &init_params(&c).unwrap().layers[0].weight;
        let n = w.len() as f64;
        let mean = w.sum() / n;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let expected = 2.0 / 256.0;
        assert!((var - expected).abs() / expected < 0.2, "{var}");
    }

    #[test]
    fn zero_params_give_zero_output() {
        let c = cfg(&[3, 8, 2], ActivationKind::Relu, ActivationKind::Relu, InitScheme::He, 0);
        let mut p = init_params(&c).unwrap();
        for l in &mut p.layers {
            l.weight.fill(0.0);
        }
        let (out, _) = forward(&p, random_batch(4, 3, 1).view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_layer_is_affine() {
        let p = MlpParams {
            layers: vec![DenseLayer {
                weight: array![[1.0, 2.0], [-1.0, 0.5], [0.0, 3.0]],
                bias: array![0.5, 0.0, -1.0],
                activation: ActivationKind::Identity,
            }],
        };
        let (out, _) = forward(&p, array![[1.0, 1.0], [2.0, -1.0]].view()).unwrap();
        assert_eq!(out, array![[3.5, -0.5, 2.0], [0.5, -2.5, -4.0]]);
    }

    #[test]
    fn sine_first_layer_matches_dense_spe() {
        let pe = PeConfig::new(4, 0.0, 1).unwrap();
        let c = cfg(&[8, 6, 1], ActivationKind::Sine, ActivationKind::Relu, InitScheme::Siren, 3);
        let mut p = init_params(&c).unwrap();
        p.layers[0].bias = array![0.1, -0.2, 0.3, 0.0, 0.05, -0.5];
        let f = pe_encode(&[0.37], &pe).unwrap();
        let batch = Array2::from_shape_vec((1, 8), f.values.clone()).unwrap();
        let (_, cache) = forward(&p, batch.view()).unwrap();
        let hidden = cache.inputs[1].row(0).to_vec();
        let layer = SpeLayerParams {
            weights: SpeWeights::Dense(p.layers[0].weight.clone()),
            phase: p.layers[0].bias.to_vec(),
            inner_pe: pe,
        };
        assert_eq!(hidden, spe_apply(&f, &layer).unwrap());
    }

    #[test]
    fn zero_output_gradient() {
        let c = cfg(&[2, 5, 5, 1], ActivationKind::Sine, ActivationKind::Relu, InitScheme::Siren, 4);
        let p = init_params(&c).unwrap();
        let (out, cache) = forward(&p, random_batch(3, 2, 2).view()).unwrap();
        let (g, gx) = backward(&p, &cache, Array2::zeros(out.dim()).view()).unwrap();
        assert!(g.iter().flatten().all(|&v| v == 0.0));
        assert!(gx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_gradient_at_zero_is_weight_row() {
        let p = MlpParams {
            layers: vec![
                DenseLayer {
                    weight: array![[0.7, -1.3]],
                    bias: array![0.0],
                    activation: ActivationKind::Sine,
                },
                DenseLayer {
                    weight: array![[1.0]],
                    bias: array![0.0],
                    activation: ActivationKind::Identity,
                },
            ],
        };
        let (_, cache) = forward(&p, array![[0.0, 0.0]].view()).unwrap();
        let (_, gx) = backward(&p, &cache, array![[1.0]].view()).unwrap();
        assert_eq!(gx, array![[0.7, -1.3]]);
    }

    #[test]
    fn mismatched_cache_rejected() {
        let a = init_params(&cfg(&[2, 4, 1], ActivationKind::Relu, ActivationKind::Relu, InitScheme::He, 0)).unwrap();
        let b = init_params(&cfg(&[2, 4, 4, 1], ActivationKind::Relu, ActivationKind::Relu, InitScheme::He, 0)).unwrap();
        let (out, cache) = forward(&a, random_batch(2, 2, 0).view()).unwrap();
        assert!(matches!(backward(&b, &cache, out.view()), Err(Error::CacheMismatch(_))));
    }

    #[test]
    fn non_finite_layer_named() {
        let mut p = init_params(&cfg(&[1, 3, 1], ActivationKind::Relu, ActivationKind::Relu, InitScheme::He, 0)).unwrap();
        p.layers[0].weight.fill(f64::MAX);
        p.layers[1].weight.fill(f64::MAX);
        let err = forward(&p, array![[1.0]].view()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteActivation { layer: 1 }), "{err}");
    }

    #[test]
    fn finite_difference_step_validated() {
        let p = init_params(&cfg(&[1, 1], ActivationKind::Relu, ActivationKind::Relu, InitScheme::He, 0)).unwrap();
        let batch = array![[0.5]];
        assert!(finite_diff_gradient(&p, batch.view(), |o| o.sum(), 0.0).is_err());
    }

    #[test]
    fn finite_difference_quadratic_error_is_second_order() {
        // loss = (w·x)² with x = 1: exact gradient 2w; the central difference
        // of a quadratic is exact up to rounding.
        let mut p = init_params(&cfg(&[1, 1], ActivationKind::Relu, ActivationKind::Relu, InitScheme::He, 0)).unwrap();
        p.layers[0].weight[[0, 0]] = 0.8;
        let batch = array![[1.0]];
        for step in [1e-2, 1e-3] {
            let g = finite_diff_gradient(&p, batch.view(), |o| o[[0, 0]].powi(2), step).unwrap();
            assert!((g[0][0] - 1.6).abs() < 1e-9);
        }
    }

    fn kinks_are_far(p: &MlpParams, batch: &Array2<f64>) -> bool {
        let (_, cache) = forward(p, batch.view()).unwrap();
        p.layers
            .iter()
            .zip(&cache.pre_activations)
            .all(|(l, z)| z.iter().all(|&v| l.activation.distance_to_kink(v) > 1e-3))
    }

    fn gradient_error(c: &MlpConfig, batch_seed: u64) -> Option<f64> {
        let p = init_params(c).unwrap();
        let batch = random_batch(8, c.layer_widths[0], batch_seed);
        if !kinks_are_far(&p, &batch) {
            return None;
        }
        let target = random_batch(8, *c.layer_widths.last().unwrap(), batch_seed + 1);
        let loss = |o: &Array2<f64>| (o - &target).mapv(|v| v * v).sum() / 8.0;
        let (out, cache) = forward(&p, batch.view()).unwrap();
        let g_out = (&out - &target) * (2.0 / 8.0);
        let (analytic, _) = backward(&p, &cache, g_out.view()).unwrap();
        let numeric = finite_diff_gradient(&p, batch.view(), loss, 1e-5).unwrap();
        Some(max_relative_error(&analytic, &numeric, 1e-6))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn backward_matches_finite_differences(
            first in 0usize..5,
            hidden in 0usize..5,
            siren in any::<bool>(),
            depth in 1usize..=3,
            width in 2usize..=32,
            seed in 0u64..1000,
        ) {
            let mut widths = vec![3];
            widths.extend(std::iter::repeat_n(width, depth));
            widths.push(2);
            let init = if siren { InitScheme::Siren } else { InitScheme::He };
            let c = cfg(&widths, ActivationKind::ALL[first], ActivationKind::ALL[hidden], init, seed);
            if let Some(err) = gradient_error(&c, seed) {
                prop_assert!(err <= 1e-4, "{err}");
            }
        }

        #[test]
        fn forward_is_batch_order_equivariant(seed in 0u64..500, shift in 1usize..6) {
            let c = cfg(&[2, 8, 8, 1], ActivationKind::Sine, ActivationKind::Relu, InitScheme::Siren, seed);
            let p = init_params(&c).unwrap();
            let batch = random_batch(6, 2, seed);
            let mut rolled = batch.clone();
            for i in 0..6 {
                rolled.row_mut((i + shift) % 6).assign(&batch.row(i));
            }
            let (a, _) = forward(&p, batch.view()).unwrap();
            let (b, _) = forward(&p, rolled.view()).unwrap();
            for i in 0..6 {
                prop_assert_eq!(a.row(i), b.row((i + shift) % 6));
            }
        }

        #[test]
        fn sine_first_layer_is_bounded(seed in 0u64..500, scale in 0.0f64..1e3) {
            let c = cfg(&[3, 10, 1], ActivationKind::Sine, ActivationKind::Relu, InitScheme::He, seed);
            let mut p = init_params(&c).unwrap();
            p.layers[0].weight.mapv_inplace(|v| v * scale);
            let (_, cache) = forward(&p, random_batch(5, 3, seed).view()).unwrap();
            prop_assert!(cache.inputs[1].iter().all(|v| v.abs() <= 1.0));
            prop_assert_eq!(cache.inputs[1].slice(s![.., ..]).ncols(), 10);
        }
    }
}
