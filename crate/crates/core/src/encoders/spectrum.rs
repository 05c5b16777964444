//! Effective frequencies learned on top of a positional encoding.
//!
//! A weight `ω` acting on octave `l` (1-based, PE frequency `2^(l-1)·π`)
//! produces the effective frequency `ω* = |ω|·2^(l-1)`, in units of `π`.

use serde::{Deserialize, Serialize};

use super::ape::ApeParams;
use super::pe::PeConfig;
use super::spe::SpeWeights;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// Diagonal: PE component index. Dense: weight row. APE: frequency index.
    pub component: usize,
    /// 1-based octave.
    pub octave: usize,
    pub omega_star: f64,
}

/// Per-component effective frequencies, sorted by descending `ω*`.
///
/// Dense rows are assigned to the octave of their largest-magnitude column
/// (first one on ties).
pub fn learned_spectrum(weights: &SpeWeights, cfg: &PeConfig) -> Vec<SpectrumEntry> {
    let mut entries: Vec<SpectrumEntry> = match weights {
        SpeWeights::Diagonal(w) => w
            .iter()
            .enumerate()
            .map(|(j, &wj)| entry(j, cfg.octave_of(j), wj))
            .collect(),
        SpeWeights::Dense(w) => w
            .rows()
            .into_iter()
            .enumerate()
            .map(|(r, row)| {
                let mut best = 0;
                for (c, v) in row.iter().enumerate() {
                    if v.abs() > row[best].abs() {
                        best = c;
                    }
                }
                entry(r, cfg.octave_of(best), row[best])
            })
            .collect(),
    };
    sort_descending(&mut entries);
    entries
}

fn entry(component: usize, zero_based_octave: usize, weight: f64) -> SpectrumEntry {
    SpectrumEntry {
        component,
        octave: zero_based_octave + 1,
        omega_star: weight.abs() * (1u64 << zero_based_octave) as f64,
    }
}

/// APE frequencies expressed the same way: `ω* = |ω|/π`, octave
/// `⌊log2 ω*⌋ + 1` (at least 1).
pub fn ape_spectrum(params: &ApeParams) -> Vec<SpectrumEntry> {
    let mut entries: Vec<SpectrumEntry> = params
        .omegas
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let omega_star = w.abs() / std::f64::consts::PI;
            let octave = if omega_star >= 1.0 {
                omega_star.log2().floor() as usize + 1
            } else {
                1
            };
            SpectrumEntry {
                component: k,
                octave,
                omega_star,
            }
        })
        .collect();
    sort_descending(&mut entries);
    entries
}

fn sort_descending(entries: &mut [SpectrumEntry]) {
    entries.sort_by(|a, b| {
        b.omega_star
            .total_cmp(&a.omega_star)
            .then(a.component.cmp(&b.component))
    });
}

/// Share of `Σ ω*²` carried by entries with `octave ≤ max_octave`.
///
/// An all-zero spectrum counts as fully contained.
pub fn spectrum_energy_fraction(entries: &[SpectrumEntry], max_octave: usize) -> f64 {
    let total: f64 = entries.iter().map(|e| e.omega_star.powi(2)).sum();
    if total == 0.0 {
        return 1.0;
    }
    let inside: f64 = entries
        .iter()
        .filter(|e| e.octave <= max_octave)
        .map(|e| e.omega_star.powi(2))
        .sum();
    inside / total
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    fn pe(octaves: usize) -> PeConfig {
        PeConfig::new(octaves, 0.0, 1).unwrap()
    }

    #[test]
    fn all_ones_diagonal() {
        let s = learned_spectrum(&SpeWeights::Diagonal(vec![1.0; 6]), &pe(3));
        let values: Vec<f64> = s.iter().map(|e| e.omega_star).collect();
        assert_eq!(values, vec![4.0, 4.0, 2.0, 2.0, 1.0, 1.0]);
        assert_eq!(s[0].octave, 3);
        assert_eq!(s[5].octave, 1);
    }

    #[test]
    fn all_zero_weights() {
        let s = learned_spectrum(&SpeWeights::Diagonal(vec![0.0; 6]), &pe(3));
        assert!(s.iter().all(|e| e.omega_star == 0.0));
        assert_eq!(spectrum_energy_fraction(&s, 1), 1.0);
    }

    #[test]
    fn dense_rows_use_dominant_column() {
        // Columns: (sin, cos) of octave 1, then octave 2.
        let w = array![[0.1, -0.2, 3.0, 0.0], [-2.0, 0.5, 0.1, 0.1]];
        let s = learned_spectrum(&SpeWeights::Dense(w), &pe(2));
        assert_eq!(s[0], SpectrumEntry { component: 0, octave: 2, omega_star: 6.0 });
        assert_eq!(s[1], SpectrumEntry { component: 1, octave: 1, omega_star: 2.0 });
    }

    #[test]
    fn energy_fraction() {
        let s = learned_spectrum(&SpeWeights::Diagonal(vec![1.0; 4]), &pe(2));
        // ω* = 1, 1, 2, 2 → energy 1+1 of 10 in octave 1.
        assert!((spectrum_energy_fraction(&s, 1) - 0.2).abs() < 1e-15);
        assert_eq!(spectrum_energy_fraction(&s, 2), 1.0);
    }

    #[test]
    fn ape_octaves() {
        let p = ApeParams::geometric(3, 1).unwrap();
        let s = ape_spectrum(&p);
        let octaves: Vec<usize> = s.iter().map(|e| e.octave).collect();
        assert_eq!(octaves, vec![3, 2, 1]);
        assert!((s[0].omega_star - 4.0).abs() < 1e-12);
    }
}
