use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Parameters;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Adam,
    Sgd,
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_eps() -> f64 {
    1e-8
}

fn default_iterations() -> usize {
    2000
}

fn default_eval_every() -> usize {
    10
}

/// Optimizer and schedule settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimConfig {
    #[serde(default)]
    pub algorithm: Algorithm,
    /// `None` picks 1e-3, or 1e-4 when the first layer is sine-activated.
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    /// `None` trains on the full training set every step.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Adam,
            learning_rate: None,
            adam_beta1: default_beta1(),
            adam_beta2: default_beta2(),
            adam_eps: default_eps(),
            iterations: default_iterations(),
            eval_every: default_eval_every(),
            batch_size: None,
            seed: 0,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.adam_beta1) || !unit(self.adam_beta2) {
            return Err(Error::InvalidConfig(format!(
                "Adam betas must lie in (0, 1), got {} and {}",
                self.adam_beta1, self.adam_beta2
            )));
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "Adam eps must be positive, got {}",
                self.adam_eps
            )));
        }
        if let Some(lr) = self.learning_rate {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "learning rate must be positive, got {lr}"
                )));
            }
        }
        if self.eval_every == 0 {
            return Err(Error::InvalidConfig("eval_every must be >= 1".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn resolved_learning_rate(&self, sine_first: bool) -> f64 {
        self.learning_rate
            .unwrap_or(if sine_first { 1e-4 } else { 1e-3 })
    }
}

/// First-order optimizer over [`Parameters`] slices.
#[derive(Clone, Debug)]
pub struct Optimizer {
    algorithm: Algorithm,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(cfg: &OptimConfig, learning_rate: f64) -> Self {
        Self {
            algorithm: cfg.algorithm,
            learning_rate,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_eps,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Applies one update with gradients in parameter-slice order.
    pub fn step<P: Parameters + ?Sized>(&mut self, params: &mut P, grads: &[Vec<f64>]) -> Result<()> {
        let mut slices = params.param_slices_mut();
        if slices.len() != grads.len() {
            return Err(Error::ShapeMismatch {
                context: "gradient slice count",
                expected: slices.len(),
                actual: grads.len(),
            });
        }
        for (p, g) in slices.iter().zip(grads) {
            if p.len() != g.len() {
                return Err(Error::ShapeMismatch {
                    context: "gradient slice length",
                    expected: p.len(),
                    actual: g.len(),
                });
            }
        }
        match self.algorithm {
            Algorithm::Sgd => {
                for (p, g) in slices.iter_mut().zip(grads) {
                    for (pi, gi) in p.iter_mut().zip(g) {
                        *pi -= self.learning_rate * gi;
                    }
                }
            }
            Algorithm::Adam => {
                if self.m.is_empty() {
                    self.m = grads.iter().map(|g| vec![0.0; g.len()]).collect();
                    self.v = self.m.clone();
                }
                self.step += 1;
                let (b1, b2) = (self.beta1, self.beta2);
                let c1 = 1.0 - b1.powi(self.step);
                let c2 = 1.0 - b2.powi(self.step);
                for (((p, g), m), v) in slices.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
                    for i in 0..p.len() {
                        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        p[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flat(Vec<f64>);

    impl Parameters for Flat {
        fn param_slices(&self) -> Vec<&[f64]> {
            vec![&self.0]
        }

        fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn adam_zero_gradient_is_a_no_op() {
        let mut p = Flat(vec![0.3, -1.2, 5.0]);
        let mut opt = Optimizer::new(&OptimConfig::default(), 1e-2);
        for _ in 0..5 {
            opt.step(&mut p, &[vec![0.0; 3]]).unwrap();
        }
        assert_eq!(p.0, vec![0.3, -1.2, 5.0]);
    }

    #[test]
    fn adam_first_step_has_learning_rate_magnitude() {
        let mut p = Flat(vec![1.0, 1.0]);
        let mut opt = Optimizer::new(&OptimConfig::default(), 0.1);
        opt.step(&mut p, &[vec![3.0, -0.01]]).unwrap();
        assert!((p.0[0] - 0.9).abs() < 1e-6);
        assert!((p.0[1] - 1.1).abs() < 1e-5);
    }

    #[test]
    fn sgd_step() {
        let cfg = OptimConfig {
            algorithm: Algorithm::Sgd,
            ..OptimConfig::default()
        };
        let mut p = Flat(vec![1.0]);
        Optimizer::new(&cfg, 0.5).step(&mut p, &[vec![2.0]]).unwrap();
        assert_eq!(p.0, vec![0.0]);
    }

    #[test]
    fn validation() {
        let bad = OptimConfig {
            adam_beta1: 1.0,
            ..OptimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimConfig {
            eval_every: 0,
            ..OptimConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(OptimConfig::default().resolved_learning_rate(true), 1e-4);
        assert_eq!(OptimConfig::default().resolved_learning_rate(false), 1e-3);
    }
}
