//! Desk-scale neural-ODE surrogate in stretched time: a state network
//! and a strictly positive dilation network trained jointly through
//! forward-Euler rollouts.

pub mod lhs;
pub mod mlp;
pub mod scaling;
mod train;

pub use lhs::{lhs_matrix, sample_configs, width_for_budget, SampledConfig};
pub use mlp::{Adam, ForwardCache, Mlp};
pub use scaling::{AffineScale, ScalingSet, TrainingCase};
pub use train::{rollout, train, RolloutSeries, TrainedModel};

use serde::{Deserialize, Serialize};

/// Architecture of one network pair: both networks share the hidden
/// shape; the state net maps (z, t, mu) to d derivatives, the dilation
/// net to one output wrapped in an exponential.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MlpSpec {
    pub hidden_layers: usize,
    pub hidden_width: usize,
}

impl MlpSpec {
    pub fn state_widths(&self, state_dim: usize) -> Vec<usize> {
        self.widths(state_dim, state_dim)
    }

    pub fn dilation_widths(&self, state_dim: usize) -> Vec<usize> {
        self.widths(state_dim, 1)
    }

    fn widths(&self, state_dim: usize, output: usize) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_layers + 2);
        w.push(state_dim + 2);
        w.extend(std::iter::repeat(self.hidden_width).take(self.hidden_layers));
        w.push(output);
        w
    }
}

/// Training schedule. The learning rate decays geometrically from
/// `learning_rate` to `final_lr` over the epochs; the rollout horizon
/// starts at `initial_horizon` steps and doubles every
/// `horizon_interval` epochs, within a per-case budget of
/// `prediction_budget` Euler steps per epoch.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub final_lr: f64,
    pub initial_horizon: usize,
    pub horizon_interval: usize,
    pub pretrain_iters: usize,
    pub epochs: usize,
    pub prediction_budget: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        // Desk-scale defaults; full-scale runs use 1000 pretrain
        // iterations and 5000 epochs.
        Self {
            learning_rate: 5e-3,
            final_lr: 1e-8,
            initial_horizon: 10,
            horizon_interval: 5,
            pretrain_iters: 200,
            epochs: 200,
            prediction_budget: 1000,
            seed: 0,
        }
    }
}
