//! Closed-form quantities behind the SPE construction: the distance from an
//! arbitrary frequency to the fixed PE feature set, the anchor-gated
//! approximation error of a single SPE term, the sawtooth corrective
//! function, and the small-weight limit.

use std::f64::consts::{FRAC_PI_2, PI};

use super::pe::PeConfig;
use crate::error::{Error, Result};

/// Distance from `omega_a` to the nearest hard-coded PE frequency in
/// `{π, 2π, …, 2^(L-1)π}`.
///
/// Below `2^(L-1)π` the answer is `min(2^β0·π − ω_a, ω_a − 2^β1·π)` with
/// `β0 = ⌈log2(ω_a/π)⌉`, `β1 = ⌊log2(ω_a/π)⌋`; at or above it, `ω_a − 2^(L-1)π`.
/// Frequencies under `π` have only `π` as a neighbour.
pub fn delta_pe(omega_a: f64, octaves: usize) -> Result<f64> {
    if !(omega_a > 0.0 && omega_a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "delta_pe needs a positive finite frequency, got {omega_a}"
        )));
    }
    if octaves == 0 {
        return Err(Error::InvalidArgument("delta_pe needs L >= 1".into()));
    }
    let top = PeConfig::frequency(octaves - 1);
    if omega_a >= top {
        return Ok(omega_a - top);
    }
    if omega_a <= PI {
        return Ok(PI - omega_a);
    }
    let ratio = (omega_a / PI).log2();
    let mut upper = ratio.ceil() as i32;
    let mut lower = ratio.floor() as i32;
    // log2 can land one ulp on the wrong side of an integer.
    while pow2_pi(lower) > omega_a {
        lower -= 1;
    }
    while pow2_pi(upper) < omega_a {
        upper += 1;
    }
    Ok((pow2_pi(upper) - omega_a).min(omega_a - pow2_pi(lower)))
}

fn pow2_pi(beta: i32) -> f64 {
    PeConfig::frequency(beta as usize)
}

/// Enumerates the feature set and returns the smallest absolute distance.
pub fn delta_pe_brute_force(omega_a: f64, octaves: usize) -> f64 {
    (0..octaves)
        .map(|l| (omega_a - PeConfig::frequency(l)).abs())
        .fold(f64::INFINITY, f64::min)
}

/// ω-agnostic gates `(I, S)` for phase `t`.
///
/// Near `t = nπ` the sine component is linear in `t` and is selected
/// (`I = 1, S = 0`); near `t = (n+½)π` the cosine component is (`I = 0, S = 1`).
pub fn is_gates(t: f64) -> (f64, f64) {
    let k = (t / FRAC_PI_2).round() as i64;
    if k.rem_euclid(2) == 0 {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    }
}

/// Anchor-gated approximation error of the highest-octave SPE term.
///
/// The target is the feature of effective frequency `ω·π` (a trainable PE
/// feature `sin(ω π x)`), realised on the top octave `t = 2^(L-1)·π·x` by the
/// SPE weight `ω / 2^(L-1)`. Every input is written as `x = n/2^L + ε`;
/// points with `|ε| ≤ 2^-(L+2)` take part. The gate picks the PE component
/// that is linear at the anchor, and the gated term `sin(ω_L·component)` is
/// compared with the target re-anchored at `n/2^L`, `±sin(ω_L·(t − t_n))`.
/// The per-anchor phase and sign are what the ω-agnostic downstream layer
/// absorbs. Returns the maximum absolute error over participating points.
pub fn theorem1_error(omega: f64, x_grid: &[f64], octaves: usize) -> f64 {
    assert!(octaves >= 1, "theorem1_error needs L >= 1");
    let top = PeConfig::frequency(octaves - 1);
    let weight = omega / (1u64 << (octaves - 1)) as f64;
    let scale = (1u64 << octaves) as f64;
    let window = 1.0 / (4.0 * scale);
    let mut worst: f64 = 0.0;
    for &x in x_grid {
        let k = (x * scale).round();
        let eps = x - k / scale;
        if eps.abs() > window {
            continue;
        }
        let t = top * x;
        let local = top * eps;
        let k = k as i64;
        let m = k.div_euclid(2);
        let sign_m = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let (component, slope) = if is_gates(t).1 == 0.0 {
            (t.sin(), sign_m)
        } else {
            (t.cos(), -sign_m)
        };
        let approx = (weight * component).sin();
        let target = slope * (weight * local).sin();
        worst = worst.max((approx - target).abs());
    }
    worst
}

/// Uniform dyadic grid `k / 2^resolution` on `[-1, 1]`.
pub fn dyadic_grid(resolution: u32) -> Vec<f64> {
    let n = 1i64 << resolution;
    (-n..=n).map(|k| k as f64 / n as f64).collect()
}

/// Corrective function a piecewise-linear periodic activation would need
/// downstream: `sin(ω t) / (√(ω² − (2nπ)²) mod 2π)`.
///
/// Depends on `ω`, unlike the sine gates of [`is_gates`].
pub fn sawtooth_s_function(omega: f64, n: i64, t: f64) -> Result<f64> {
    let radicand = omega * omega - (2.0 * n as f64 * PI).powi(2);
    if radicand <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "S(t) needs ω² > (2nπ)², got ω = {omega}, n = {n}"
        )));
    }
    let denom = radicand.sqrt().rem_euclid(2.0 * PI);
    if denom.abs() < 1e-12 || (2.0 * PI - denom).abs() < 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "S(t) denominator vanishes for ω = {omega}, n = {n}"
        )));
    }
    Ok((omega * t).sin() / denom)
}

/// Worst `|sin(ω f) / (ω f) − 1|` over PE components with `|f| > 1e-3`.
///
/// Diagonal SPE with a uniform small weight `omega` versus the scaled PE it
/// should reproduce.
pub fn small_weight_deviation(omega: f64, inputs: &[f64], cfg: &PeConfig) -> Result<f64> {
    use super::pe::pe_encode;
    use super::spe::{spe_apply, SpeLayerParams};

    let layer = SpeLayerParams::diagonal(cfg.clone(), omega);
    let mut worst: f64 = 0.0;
    for &x in inputs {
        let f = pe_encode(&[x], cfg)?;
        let out = spe_apply(&f, &layer)?;
        for (o, fj) in out.iter().zip(&f.values) {
            if fj.abs() > 1e-3 {
                worst = worst.max((o / (omega * fj) - 1.0).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn delta_pe_examples() {
        assert_eq!(delta_pe(2.0 * PI, 3).unwrap(), 0.0);
        assert!((delta_pe(3.0 * PI, 3).unwrap() - PI).abs() < 1e-12);
        assert!((delta_pe(16.0 * PI, 3).unwrap() - 12.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn delta_pe_below_pi() {
        assert!((delta_pe(0.6 * PI, 4).unwrap() - 0.4 * PI).abs() < 1e-12);
    }

    #[test]
    fn delta_pe_rejects_non_positive() {
        assert!(delta_pe(0.0, 3).is_err());
        assert!(delta_pe(-1.0, 3).is_err());
        assert!(delta_pe(1.0, 0).is_err());
    }

    #[test]
    fn delta_pe_exact_powers() {
        for l in 0..10usize {
            let f = PeConfig::frequency(l);
            assert_eq!(delta_pe(f, 10).unwrap(), 0.0);
        }
    }

    proptest! {
        #[test]
        fn delta_pe_matches_enumeration(u in 0.0f64..1.0, octaves in 1usize..14) {
            let hi = PeConfig::frequency(octaves + 1);
            let w = (u * hi).max(1e-9);
            prop_assert_eq!(delta_pe(w, octaves).unwrap(), delta_pe_brute_force(w, octaves));
        }
    }

    #[test]
    fn theorem1_zero_frequency() {
        assert_eq!(theorem1_error(0.0, &dyadic_grid(12), 6), 0.0);
    }

    #[test]
    fn theorem1_monotone_in_octaves() {
        let grid = dyadic_grid(14);
        for w in 1..=8 {
            let errs: Vec<f64> = (4..=12)
                .map(|l| theorem1_error(w as f64, &grid, l))
                .collect();
            for pair in errs.windows(2) {
                assert!(pair[1] <= pair[0], "ω = {w}: {errs:?}");
            }
            assert!(errs[0] > 0.0);
        }
    }

    #[test]
    fn theorem1_exact_at_anchors() {
        for l in 4..=12usize {
            let scale = (1u64 << l) as f64;
            let anchors: Vec<f64> = (-(1i64 << l)..=(1i64 << l))
                .map(|n| n as f64 / scale)
                .collect();
            for w in 1..=8 {
                assert!(theorem1_error(w as f64, &anchors, l) < 1e-9);
            }
        }
    }

    #[test]
    fn sine_component_matches_target_at_integer_anchors() {
        // sin(ω·sin(nπ)) = 0 = sin(ω·nπ) for integer ω.
        for n in -20..=20 {
            let t = n as f64 * PI;
            for w in 1..=8 {
                let w = w as f64;
                assert!(((w * t.sin()).sin() - (w * t).sin()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gates_alternate() {
        assert_eq!(is_gates(0.0), (1.0, 0.0));
        assert_eq!(is_gates(PI), (1.0, 0.0));
        assert_eq!(is_gates(FRAC_PI_2), (0.0, 1.0));
        assert_eq!(is_gates(1.5 * PI + 0.1), (0.0, 1.0));
    }

    #[test]
    fn sawtooth_degenerate_denominator() {
        assert!(sawtooth_s_function(2.0 * PI, 0, 0.25).is_err());
        assert!(sawtooth_s_function(PI, 1, 0.25).is_err());
    }

    #[test]
    fn sawtooth_depends_on_omega() {
        let t = 0.37;
        let a = sawtooth_s_function(3.0 * PI, 1, t).unwrap();
        let b = sawtooth_s_function(3.2 * PI, 1, t).unwrap();
        assert!(a.is_finite() && b.is_finite());
        assert_ne!(a, b);
    }

    #[test]
    fn small_weight_limit() {
        let cfg = PeConfig::new(8, 0.0, 1).unwrap();
        let xs: Vec<f64> = (0..200).map(|i| -1.0 + i as f64 / 100.0 + 0.003).collect();
        assert!(small_weight_deviation(1e-6, &xs, &cfg).unwrap() <= 1e-9);
    }
}
