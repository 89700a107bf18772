//! Joint training of the state and dilation networks by backpropagation
//! through forward-Euler rollouts in stretched time, with a growing
//! prediction horizon: many short windows early, few long ones late.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

use super::mlp::{Adam, ForwardCache, Mlp};
use super::scaling::{ScalingSet, TrainingCase};
use super::{MlpSpec, TrainConfig};

/// Trained network pair plus the scaling required to evaluate it.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub state_net: Mlp,
    pub dilation_net: Mlp,
    pub scaling: ScalingSet,
    /// Mean loss per epoch (one entry when training was skipped).
    pub loss_history: Vec<f64>,
    /// Mean single-step batch loss per pretraining iteration.
    pub pretrain_history: Vec<f64>,
}

/// Predicted stretched-time series from a forward-Euler rollout.
#[derive(Debug, Clone)]
pub struct RolloutSeries {
    pub tau_grid: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub times: Vec<f64>,
}

/// Forward-Euler unroll of the learned augmented system from (z0, t0):
/// inputs are scaled per step, derivative outputs descaled, and the time
/// dilation is strictly positive by construction.
pub fn rollout(
    state_net: &Mlp,
    dilation_net: &Mlp,
    scaling: &ScalingSet,
    z0: &[f64],
    t0: f64,
    mu: f64,
    n_steps: usize,
    dtau: f64,
) -> Result<RolloutSeries> {
    let d = scaling.state_dim();
    let mut z = z0.to_vec();
    let mut t = t0;
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut tau_grid = Vec::with_capacity(n_steps + 1);
    states.push(z.clone());
    times.push(t);
    tau_grid.push(0.0);

    let mut x = Vec::with_capacity(d + 2);
    let mut f = Vec::with_capacity(d);
    for step in 1..=n_steps {
        scaling.network_input(&z, t, mu, &mut x);
        let f_out = state_net.forward(&x);
        scaling.state_derivative(&f_out, &mut f);
        let a_out = dilation_net.forward(&x);
        let alpha = scaling.dilation(a_out[0]);
        for c in 0..d {
            z[c] += dtau * f[c];
        }
        let t_prev = t;
        t += dtau * alpha;
        if z.iter().any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::NonFinite { step });
        }
        debug_assert!(t >= t_prev, "dilation positivity violated");
        states.push(z.clone());
        times.push(t);
        tau_grid.push(dtau * step as f64);
    }
    Ok(RolloutSeries {
        tau_grid,
        states,
        times,
    })
}

/// Reference data of one case, flattened for the training loop.
struct CaseView {
    mu: f64,
    states: Vec<Vec<f64>>,
    times: Vec<f64>,
}

struct Workspace {
    caches_f: Vec<ForwardCache>,
    caches_a: Vec<ForwardCache>,
    alphas: Vec<f64>,
    z_path: Vec<Vec<f64>>,
    t_path: Vec<f64>,
}

impl Workspace {
    fn new() -> Self {
        Self {
            caches_f: vec![],
            caches_a: vec![],
            alphas: vec![],
            z_path: vec![],
            t_path: vec![],
        }
    }
}

/// Loss of one rollout window starting at data index `j0` over `h` Euler
/// steps, with gradients accumulated into the two flat gradient buffers.
/// The loss is the stretched-time MSE over nondimensionalized states
/// plus the [0,5]-rescaled time, normalized by (N_q + 1) * h.
#[allow(clippy::too_many_arguments)]
fn window_loss_and_grads(
    state_net: &Mlp,
    dilation_net: &Mlp,
    scaling: &ScalingSet,
    case: &CaseView,
    j0: usize,
    h: usize,
    dtau: f64,
    ws: &mut Workspace,
    state_grads: Option<&mut [f64]>,
    dil_grads: Option<&mut [f64]>,
) -> f64 {
    let d = scaling.state_dim();
    let norm = 1.0 / ((d + 1) as f64 * h as f64);

    // Forward, caching activations per step.
    ws.caches_f.resize_with(h, ForwardCache::default);
    ws.caches_a.resize_with(h, ForwardCache::default);
    ws.alphas.resize(h, 0.0);
    ws.z_path.clear();
    ws.t_path.clear();

    let mut z = case.states[j0].clone();
    let mut t = case.times[j0];
    ws.z_path.push(z.clone());
    ws.t_path.push(t);

    let mut x = Vec::with_capacity(d + 2);
    let mut f = Vec::with_capacity(d);
    let mut loss = 0.0;
    for k in 0..h {
        scaling.network_input(&z, t, mu_of(case), &mut x);
        let f_out = state_net.forward_cached(&x, &mut ws.caches_f[k]);
        scaling.state_derivative(&f_out, &mut f);
        let a_out = dilation_net.forward_cached(&x, &mut ws.caches_a[k]);
        let alpha = scaling.dilation(a_out[0]);
        ws.alphas[k] = alpha;
        for c in 0..d {
            z[c] += dtau * f[c];
        }
        t += dtau * alpha;
        ws.z_path.push(z.clone());
        ws.t_path.push(t);

        let ref_z = &case.states[j0 + k + 1];
        let ref_t = case.times[j0 + k + 1];
        for c in 0..d {
            let diff = (z[c] - ref_z[c]) / scaling.state_in[c].half_span;
            loss += norm * diff * diff;
        }
        let tdiff = (t - ref_t) * scaling.time_loss_factor;
        loss += norm * tdiff * tdiff;
    }

    let (state_grads, dil_grads) = match (state_grads, dil_grads) {
        (Some(s), Some(a)) => (s, a),
        _ => return loss,
    };

    // Reverse sweep: adjoints on (z, t) walked back through the unroll.
    let mut lam_z = vec![0.0; d];
    let mut lam_t = 0.0;
    let mut d_out_f = vec![0.0; d];
    for k in (0..h).rev() {
        let zk = &ws.z_path[k + 1];
        let tk = ws.t_path[k + 1];
        let ref_z = &case.states[j0 + k + 1];
        let ref_t = case.times[j0 + k + 1];
        for c in 0..d {
            let hs = scaling.state_in[c].half_span;
            lam_z[c] += 2.0 * norm * (zk[c] - ref_z[c]) / (hs * hs);
        }
        lam_t += 2.0 * norm * (tk - ref_t) * scaling.time_loss_factor * scaling.time_loss_factor;

        for c in 0..d {
            d_out_f[c] = dtau * lam_z[c] * scaling.state_deriv[c].half_span;
        }
        let d_out_a = dtau * lam_t * ws.alphas[k] * scaling.log_dilation.half_span;

        let dx_f = state_net.backward(&ws.caches_f[k], &d_out_f, state_grads);
        let dx_a = dilation_net.backward(&ws.caches_a[k], &[d_out_a], dil_grads);

        for c in 0..d {
            lam_z[c] += (dx_f[c] + dx_a[c]) / scaling.state_in[c].half_span;
        }
        lam_t += (dx_f[d] + dx_a[d]) / scaling.time_in.half_span;
    }
    loss
}

fn mu_of(case: &CaseView) -> f64 {
    case.mu
}

fn geometric_lr(cfg: &TrainConfig, epoch: usize) -> f64 {
    if cfg.epochs <= 1 {
        return cfg.learning_rate;
    }
    let ratio = cfg.final_lr / cfg.learning_rate;
    cfg.learning_rate * ratio.powf(epoch as f64 / (cfg.epochs - 1) as f64)
}

fn horizon_at(cfg: &TrainConfig, epoch: usize, n_tau: usize) -> usize {
    let doublings = (epoch / cfg.horizon_interval.max(1)).min(30);
    cfg.initial_horizon
        .saturating_mul(1usize << doublings)
        .min(n_tau - 1)
        .max(1)
}

/// Train a state/dilation network pair on reparameterized trajectories.
///
/// Pretraining fits single-step targets; the main phase backpropagates
/// through rollouts whose horizon doubles every `horizon_interval`
/// epochs, spending roughly `prediction_budget` Euler steps per case
/// per epoch (round-robin over cases).
pub fn train(cases: &[TrainingCase], spec: &MlpSpec, cfg: &TrainConfig) -> Result<TrainedModel> {
    let scaling = ScalingSet::fit(cases)?;
    let d = scaling.state_dim();
    let n_tau = cases[0].result.n_tau();
    let dtau = cases[0].result.tau_grid[1] - cases[0].result.tau_grid[0];
    for case in cases {
        let dt = case.result.tau_grid[1] - case.result.tau_grid[0];
        if (dt - dtau).abs() > 1e-12 * dtau {
            return Err(Error::GridMismatch(
                "training cases must share the tau spacing".into(),
            ));
        }
    }

    let views: Vec<CaseView> = cases
        .iter()
        .map(|c| CaseView {
            mu: c.mu,
            states: c.result.y_of_tau.clone(),
            times: c.result.t_of_tau(),
        })
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut state_net = Mlp::new(spec.state_widths(d), &mut rng);
    let mut dilation_net = Mlp::new(spec.dilation_widths(d), &mut rng);
    let mut ws = Workspace::new();

    if cfg.epochs == 0 {
        // Contract: nets untouched, history carries the initial loss.
        let loss = mean_single_step_loss(&state_net, &dilation_net, &scaling, &views, dtau, &mut ws);
        return Ok(TrainedModel {
            state_net,
            dilation_net,
            scaling,
            loss_history: vec![loss],
            pretrain_history: vec![],
        });
    }

    // Pretraining on single-step batches at a fixed learning rate.
    let mut sg = vec![0.0; state_net.n_params()];
    let mut ag = vec![0.0; dilation_net.n_params()];
    let mut pretrain_history = Vec::with_capacity(cfg.pretrain_iters);
    {
        let mut adam_s = Adam::new(state_net.n_params());
        let mut adam_a = Adam::new(dilation_net.n_params());
        let batch = 32;
        for _ in 0..cfg.pretrain_iters {
            sg.iter_mut().for_each(|g| *g = 0.0);
            ag.iter_mut().for_each(|g| *g = 0.0);
            let mut batch_loss = 0.0;
            for _ in 0..batch {
                let case = &views[rng.gen_range(0..views.len())];
                let j0 = rng.gen_range(0..n_tau - 1);
                batch_loss += window_loss_and_grads(
                    &state_net,
                    &dilation_net,
                    &scaling,
                    case,
                    j0,
                    1,
                    dtau,
                    &mut ws,
                    Some(&mut sg),
                    Some(&mut ag),
                );
            }
            let inv = 1.0 / batch as f64;
            sg.iter_mut().for_each(|g| *g *= inv);
            ag.iter_mut().for_each(|g| *g *= inv);
            pretrain_history.push(batch_loss * inv);
            adam_s.step(state_net.params_mut(), &sg, cfg.learning_rate);
            adam_a.step(dilation_net.params_mut(), &ag, cfg.learning_rate);
        }
    }

    // Main phase with the horizon schedule and per-case updates.
    let mut adam_s = Adam::new(state_net.n_params());
    let mut adam_a = Adam::new(dilation_net.n_params());
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = geometric_lr(cfg, epoch);
        let h = horizon_at(cfg, epoch, n_tau);
        let windows = (cfg.prediction_budget / h).max(1);
        let mut epoch_loss = 0.0;
        for case in &views {
            sg.iter_mut().for_each(|g| *g = 0.0);
            ag.iter_mut().for_each(|g| *g = 0.0);
            let mut case_loss = 0.0;
            for _ in 0..windows {
                let j0 = rng.gen_range(0..n_tau - h);
                case_loss += window_loss_and_grads(
                    &state_net,
                    &dilation_net,
                    &scaling,
                    case,
                    j0,
                    h,
                    dtau,
                    &mut ws,
                    Some(&mut sg),
                    Some(&mut ag),
                );
            }
            let inv = 1.0 / windows as f64;
            case_loss *= inv;
            sg.iter_mut().for_each(|g| *g *= inv);
            ag.iter_mut().for_each(|g| *g *= inv);
            adam_s.step(state_net.params_mut(), &sg, lr);
            adam_a.step(dilation_net.params_mut(), &ag, lr);
            epoch_loss += case_loss;
        }
        epoch_loss /= views.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        loss_history.push(epoch_loss);
    }

    Ok(TrainedModel {
        state_net,
        dilation_net,
        scaling,
        loss_history,
        pretrain_history,
    })
}

fn mean_single_step_loss(
    state_net: &Mlp,
    dilation_net: &Mlp,
    scaling: &ScalingSet,
    views: &[CaseView],
    dtau: f64,
    ws: &mut Workspace,
) -> f64 {
    let mut loss = 0.0;
    let mut count = 0usize;
    for case in views {
        for j0 in 0..case.times.len() - 1 {
            loss += window_loss_and_grads(
                state_net,
                dilation_net,
                scaling,
                case,
                j0,
                1,
                dtau,
                ws,
                None,
                None,
            );
            count += 1;
        }
    }
    loss / count as f64
}
