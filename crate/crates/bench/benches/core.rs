use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use spe_core::encoders::{hash_encode, HashGridConfig, SpeMode};
use spe_core::metrics::{ssim, wasserstein_1d, wdpr, ImageBuffer, HISTOGRAM_BINS, SSIM_WINDOW};
use spe_core::network::{backward, forward, init_params, MlpConfig};
use spe_core::tasks::synthetic_image;
use spe_core::{ActivationKind, EncoderSpec, InitScheme};

fn coords(n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |(i, j)| ((i * 7919 + j * 104_729) % 1000) as f64 / 1000.0)
}

fn encoders(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode_batch_1024x2");
    let x = coords(1024, 2);
    let specs = [
        EncoderSpec::Pe { octaves: 10, falloff: 0.0 },
        EncoderSpec::Spe {
            octaves: 10,
            falloff: 0.0,
            mode: SpeMode::Diagonal,
            diagonal_init: 1.0,
        },
        EncoderSpec::Grff {
            features: 20,
            sigma: 10.0,
            seed: 0,
        },
        EncoderSpec::Ape { frequencies: 10 },
        EncoderSpec::Hash {
            levels: 8,
            table_size: 1 << 14,
            features_per_entry: 2,
            base_resolution: 16,
            growth_factor: 1.5,
            seed: 0,
        },
    ];
    for spec in specs {
        let enc = spec.build(2).unwrap();
        group.bench_function(spec.label(), |b| b.iter(|| enc.forward(black_box(x.view())).unwrap()));
    }
    group.finish();

    let cfg = HashGridConfig::new(16, 1 << 14, 2, 16, 1.5, 2, 0).unwrap();
    c.bench_function("hash_encode_point_16_levels", |b| b.iter(|| hash_encode(black_box(&[0.3, 0.7]), &cfg).unwrap()));
}

fn network(c: &mut Criterion) {
    let mut group = c.benchmark_group("mlp_forward_backward_batch128");
    group.sample_size(20);
    for width in [64, 256] {
        let cfg = MlpConfig {
            layer_widths: vec![20, width, width, width, 1],
            hidden_activation: ActivationKind::Relu,
            first_activation: ActivationKind::Sine,
            init_scheme: InitScheme::Siren,
            seed: 0,
        };
        let params = init_params(&cfg).unwrap();
        let x = coords(128, 20);
        group.bench_with_input(BenchmarkId::new("forward", width), &width, |b, _| {
            b.iter(|| forward(&params, black_box(x.view())).unwrap())
        });
        let (out, cache) = forward(&params, x.view()).unwrap();
        group.bench_with_input(BenchmarkId::new("backward", width), &width, |b, _| {
            b.iter(|| backward(&params, &cache, black_box(out.view())).unwrap())
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let a = synthetic_image(64, 0).unwrap();
    let b = ImageBuffer::new(64, 64, 1, a.values.iter().map(|v| v * 0.9 + 0.05).collect()).unwrap();
    c.bench_function("ssim_64x64", |bench| bench.iter(|| ssim(black_box(&a), black_box(&b), SSIM_WINDOW).unwrap()));
    c.bench_function("wdpr_64x64_level3", |bench| bench.iter(|| wdpr(black_box(&a), black_box(&b), 3).unwrap()));
    let h1: Vec<f64> = (0..HISTOGRAM_BINS).map(|i| (i % 17) as f64).collect();
    let h2: Vec<f64> = (0..HISTOGRAM_BINS).map(|i| (i % 23) as f64).collect();
    c.bench_function("wasserstein_256_bins", |bench| {
        bench.iter(|| wasserstein_1d(black_box(&h1), black_box(&h2)).unwrap())
    });
}

criterion_group!(benches, encoders, network, metrics);
criterion_main!(benches);
