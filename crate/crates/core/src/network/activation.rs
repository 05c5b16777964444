use serde::{Deserialize, Serialize};

/// Pointwise nonlinearity of a dense layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    #[default]
    Relu,
    Sine,
    /// `x − ⌊x⌋`.
    Sawtooth,
    /// `max(0, x) + sin(x)`.
    PeriodicRelu,
    Identity,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [
        ActivationKind::Relu,
        ActivationKind::Sine,
        ActivationKind::Sawtooth,
        ActivationKind::PeriodicRelu,
        ActivationKind::Identity,
    ];

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            ActivationKind::Relu => z.max(0.0),
            ActivationKind::Sine => z.sin(),
            ActivationKind::Sawtooth => z - z.floor(),
            ActivationKind::PeriodicRelu => z.max(0.0) + z.sin(),
            ActivationKind::Identity => z,
        }
    }

    /// Derivative with `relu'(0) = 0` and `sawtooth' = 1` everywhere.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            ActivationKind::Relu => relu_step(z),
            ActivationKind::Sine => z.cos(),
            ActivationKind::Sawtooth | ActivationKind::Identity => 1.0,
            ActivationKind::PeriodicRelu => relu_step(z) + z.cos(),
        }
    }

    /// Distance from `z` to the nearest point where the derivative jumps.
    pub fn distance_to_kink(self, z: f64) -> f64 {
        match self {
            ActivationKind::Relu | ActivationKind::PeriodicRelu => z.abs(),
            ActivationKind::Sawtooth => (z - z.round()).abs(),
            ActivationKind::Sine | ActivationKind::Identity => f64::INFINITY,
        }
    }
}

#[inline]
fn relu_step(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        0.0
    }
}

impl std::fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Sine => "sine",
            ActivationKind::Sawtooth => "sawtooth",
            ActivationKind::PeriodicRelu => "periodic_relu",
            ActivationKind::Identity => "identity",
        };
        f.write_str(s)
    }
}
