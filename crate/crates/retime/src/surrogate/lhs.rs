//! Latin-hypercube sampling of training configurations. The same seeded
//! sample set is served to every reparameterization method so the
//! comparison is apples to apples.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{MlpSpec, TrainConfig};

/// One sampled (architecture, training schedule) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledConfig {
    pub spec: MlpSpec,
    pub train: TrainConfig,
    /// The parameter budget the width was solved from.
    pub param_budget: usize,
}

/// Stratified uniform samples: one per stratum per dimension, shuffled
/// independently per dimension. Rows are samples, columns dimensions.
pub fn lhs_matrix(n: usize, dims: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dims);
    for _ in 0..dims {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        let column: Vec<f64> = strata
            .into_iter()
            .map(|k| (k as f64 + rng.gen_range(0.0..1.0)) / n as f64)
            .collect();
        columns.push(column);
    }
    (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect()
}

/// Hidden width realizing a parameter budget for one network of `depth`
/// hidden layers: params = (in*W + W) + (depth-1)(W^2 + W) + (W*out + out).
pub fn width_for_budget(depth: usize, budget: usize, input: usize, output: usize) -> usize {
    let p = budget as f64 - output as f64;
    let linear = (input + depth + output) as f64;
    let w = if depth >= 2 {
        let a = (depth - 1) as f64;
        ((linear * linear + 4.0 * a * p).sqrt() - linear) / (2.0 * a)
    } else {
        p / linear
    };
    (w.round() as usize).max(2)
}

/// Draw `n` stratified configurations over the five search dimensions:
/// hidden-layer count [1,10], parameter count [100,2500], learning-rate
/// exponent [-5,-1] (lr = 5*10^x), initial horizon [2,50], and
/// horizon-increase interval [1,10] epochs.
pub fn sample_configs(
    n: usize,
    seed: u64,
    input_dim: usize,
    output_dim: usize,
    base: &TrainConfig,
) -> Result<Vec<SampledConfig>> {
    if n < 1 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    let matrix = lhs_matrix(n, 5, seed);
    let mut out = Vec::with_capacity(n);
    for row in matrix {
        let depth = 1 + (row[0] * 10.0).floor().min(9.0) as usize;
        let budget = (100.0 + row[1] * 2400.0).round() as usize;
        let lr = 5.0 * 10f64.powf(-5.0 + row[2] * 4.0);
        let initial_horizon = 2 + (row[3] * 49.0).floor().min(48.0) as usize;
        let horizon_interval = 1 + (row[4] * 10.0).floor().min(9.0) as usize;
        let width = width_for_budget(depth, budget, input_dim, output_dim);
        out.push(SampledConfig {
            spec: MlpSpec {
                hidden_layers: depth,
                hidden_width: width,
            },
            train: TrainConfig {
                learning_rate: lr,
                initial_horizon,
                horizon_interval,
                ..base.clone()
            },
            param_budget: budget,
        });
    }
    Ok(out)
}
