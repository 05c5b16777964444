//! Dense feed-forward networks with exact reverse-mode gradients.
//!
//! Batches are `N × features`; weights are `out × in`, so a layer computes
//! `Z = X·Wᵀ + b`. Switching the first activation to `sine` on top of a PE
//! encoder turns the first layer into a dense SPE layer.

pub mod activation;
pub mod mlp;
pub mod model;

pub use activation::ActivationKind;
pub use mlp::{backward, finite_diff_gradient, forward, init_params, DenseLayer, ForwardCache, InitScheme, MlpConfig, MlpParams};
pub use model::{Checkpoint, LayerState, Model, ModelCache, ModelSpec, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
