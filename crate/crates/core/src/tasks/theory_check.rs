use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoders::theory::{dyadic_grid, small_weight_deviation};
use crate::encoders::{delta_pe, delta_pe_brute_force, pe_encode, sawtooth_s_function, theorem1_error, PeConfig};
use crate::error::Result;

/// Parameter grids for [`run_theory_checks`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryCheckConfig {
    pub seed: u64,
    /// Random draws for the sampled checks.
    pub draws: usize,
    pub min_octaves: usize,
    pub max_octaves: usize,
    /// Integer frequencies `1..=max_omega` for the monotonicity check.
    pub max_omega: u32,
    /// Dyadic grid `k / 2^grid_resolution` on `[-1, 1]`.
    pub grid_resolution: u32,
    pub small_omega: f64,
    pub small_omega_tolerance: f64,
}

impl Default for TheoryCheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            draws: 1000,
            min_octaves: 4,
            max_octaves: 12,
            max_omega: 8,
            grid_resolution: 14,
            small_omega: 1e-6,
            small_omega_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest violation observed; 0 when the check is exact.
    pub worst_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Search bound: closed form versus enumeration of the PE frequencies.
pub fn check_delta_pe(cfg: &TheoryCheckConfig) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.draws {
        let octaves = rng.random_range(1..=cfg.max_octaves.max(1));
        let omega = rng.random_range(1e-9..PeConfig::frequency(octaves + 1));
        worst = worst.max((delta_pe(omega, octaves)? - delta_pe_brute_force(omega, octaves)).abs());
    }
    Ok(CheckOutcome {
        name: "delta_pe_exact".into(),
        passed: worst == 0.0,
        worst_error: worst,
        tolerance: 0.0,
        detail: format!("{} random frequencies, octaves 1..={}", cfg.draws, cfg.max_octaves),
    })
}

/// Approximation error of one SPE term is non-increasing in `L`.
pub fn check_theorem1(cfg: &TheoryCheckConfig) -> CheckOutcome {
    let grid = dyadic_grid(cfg.grid_resolution);
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for w in 1..=cfg.max_omega {
        let errs: Vec<f64> = (cfg.min_octaves..=cfg.max_octaves)
            .map(|l| theorem1_error(w as f64, &grid, l))
            .collect();
        for (i, pair) in errs.windows(2).enumerate() {
            let rise = pair[1] - pair[0];
            if rise > worst {
                worst = rise;
                worst_at = format!(" (ω = {w}, L = {})", cfg.min_octaves + i + 1);
            }
        }
    }
    CheckOutcome {
        name: "theorem1_monotone".into(),
        passed: worst == 0.0,
        worst_error: worst,
        tolerance: 0.0,
        detail: format!(
            "ω in 1..={}, L in {}..={}, dyadic grid 2^-{}{worst_at}",
            cfg.max_omega, cfg.min_octaves, cfg.max_octaves, cfg.grid_resolution
        ),
    }
}

/// Sine-activated SPE with a tiny uniform weight reduces to scaled PE.
pub fn check_theorem3(cfg: &TheoryCheckConfig) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let inputs: Vec<f64> = (0..cfg.draws).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let pe = PeConfig::new(cfg.max_octaves.max(1), 0.0, 1)?;
    let worst = small_weight_deviation(cfg.small_omega, &inputs, &pe)?;
    Ok(CheckOutcome {
        name: "theorem3_small_weight".into(),
        passed: worst <= cfg.small_omega_tolerance,
        worst_error: worst,
        tolerance: cfg.small_omega_tolerance,
        detail: format!("|ω| = {:e}, {} random inputs", cfg.small_omega, cfg.draws),
    })
}

/// PE components stay within their amplitude envelope.
pub fn check_pe_bounds(cfg: &TheoryCheckConfig) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xbead);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.draws {
        let pe = PeConfig::new(rng.random_range(1..=cfg.max_octaves.max(1)), rng.random_range(0.0..2.0), 1)?;
        let f = pe_encode(&[rng.random_range(-1.0..=1.0)], &pe)?;
        for (j, v) in f.values.iter().enumerate() {
            worst = worst.max(v.abs() - pe.amplitude(pe.octave_of(j)));
        }
    }
    Ok(CheckOutcome {
        name: "pe_amplitude_bound".into(),
        passed: worst <= 0.0,
        worst_error: worst.max(0.0),
        tolerance: 0.0,
        detail: format!("{} random encodings", cfg.draws),
    })
}

/// The sawtooth corrective term is finite off its singular set and varies
/// with `ω`.
pub fn check_sawtooth(cfg: &TheoryCheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5a3);
    let mut non_finite = 0usize;
    let mut constant_in_omega = 0usize;
    let mut evaluated = 0usize;
    for _ in 0..cfg.draws {
        let n = rng.random_range(0..4i64);
        let t = rng.random_range(-PI..PI);
        let base = 2.0 * n as f64 * PI + rng.random_range(0.5..4.0);
        let (Ok(a), Ok(b)) = (sawtooth_s_function(base, n, t), sawtooth_s_function(base + 0.1, n, t)) else {
            continue;
        };
        evaluated += 1;
        if !a.is_finite() || !b.is_finite() {
            non_finite += 1;
        } else if a == b && a != 0.0 {
            constant_in_omega += 1;
        }
    }
    CheckOutcome {
        name: "sawtooth_omega_dependence".into(),
        passed: non_finite == 0 && constant_in_omega == 0 && evaluated > 0,
        worst_error: (non_finite + constant_in_omega) as f64,
        tolerance: 0.0,
        detail: format!("{evaluated} valid draws, {non_finite} non-finite, {constant_in_omega} independent of ω"),
    }
}

pub fn run_theory_checks(cfg: &TheoryCheckConfig) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_delta_pe(cfg)?,
        check_theorem1(cfg),
        check_theorem3(cfg)?,
        check_pe_bounds(cfg)?,
        check_sawtooth(cfg),
    ])
}
