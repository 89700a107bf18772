//! `train`: one surrogate per method, fitted to the reparameterized
//! training-grid data, written as a JSON checkpoint plus loss history.
//! With `train.lhs_configs` set, a seeded Latin-hypercube search runs
//! instead and the checkpoint with the lowest on-reference MSIE is kept
//! (every method sees the identical sampled configuration set).

use retime::integrate::Trajectory;
use retime::io::{self, Checkpoint};
use retime::metrics::msie;
use retime::reparam::Method;
use retime::surrogate::{
    rollout, sample_configs, train, SampledConfig, TrainedModel, TrainingCase,
};

use crate::config::RunConfig;
use crate::error::{AppError, AppResult};

use super::{
    case_dir, model_paths, read_reparam, read_trajectory, report_failures, run_parallel,
    system_dir, write_atomic,
};

pub fn run(config: &RunConfig) -> AppResult<()> {
    let sys = config.system()?;
    let exponents: Vec<f64> = sys.training_exponents().to_vec();
    let methods = config.methods();

    let results = run_parallel(config.jobs, methods, |&method| {
        let mut cases = Vec::with_capacity(exponents.len());
        let mut trajectories = Vec::with_capacity(exponents.len());
        for &exponent in &exponents {
            let dir = case_dir(config, exponent);
            let (result, _) = read_reparam(&dir, method).map_err(|e| {
                AppError::runtime(format!(
                    "training data missing for {} (run 'generate' and 'reparam' over the \
                     training grid first): {e}",
                    method.name()
                ))
            })?;
            let (traj, _) = read_trajectory(&dir)?;
            cases.push(TrainingCase {
                mu: 10f64.powf(exponent),
                result,
            });
            trajectories.push(traj);
        }

        let model = match config.train.lhs_configs {
            None => {
                let spec = config.train.spec(sys.dim());
                let train_cfg = config.train.train_config(config.seed);
                train(&cases, &spec, &train_cfg)?
            }
            Some(n) => lhs_search(config, method, n, sys.dim(), &cases, &trajectories)?,
        };

        let (model_path, loss_path) = model_paths(config, method);
        write_atomic(
            &model_path,
            io::to_json_pretty(&Checkpoint::from_model(&model))?.as_bytes(),
        )?;
        let mut loss_csv = Vec::new();
        io::write_loss_history_csv(&mut loss_csv, &model.loss_history)?;
        write_atomic(&loss_path, &loss_csv)?;
        println!(
            "train {} {}: {} cases, final loss {:.6e}",
            config.system,
            method.name(),
            cases.len(),
            model.loss_history.last().copied().unwrap_or(f64::NAN)
        );
        Ok(())
    })?;
    report_failures(
        &results
            .into_iter()
            .map(|(m, r)| (MethodLabel(m), r))
            .collect::<Vec<_>>(),
        "train",
    )
}

/// Mean on-reference MSIE of a trained model over the training cases.
fn mean_msie(
    model: &TrainedModel,
    cases: &[TrainingCase],
    trajectories: &[Trajectory],
) -> AppResult<f64> {
    let mut acc = 0.0;
    for (case, traj) in cases.iter().zip(trajectories.iter()) {
        let n_tau = case.result.n_tau();
        let dtau = case.result.tau_grid[1] - case.result.tau_grid[0];
        let series = rollout(
            &model.state_net,
            &model.dilation_net,
            &model.scaling,
            &case.result.y_of_tau[0],
            0.0,
            case.mu,
            n_tau - 1,
            dtau,
        )?;
        acc += msie(&series.times, &series.states, traj)?.state;
    }
    Ok(acc / cases.len() as f64)
}

fn lhs_search(
    config: &RunConfig,
    method: Method,
    n: usize,
    state_dim: usize,
    cases: &[TrainingCase],
    trajectories: &[Trajectory],
) -> AppResult<TrainedModel> {
    let base = config.train.train_config(config.seed);
    let sampled: Vec<SampledConfig> =
        sample_configs(n, config.seed, state_dim + 2, state_dim, &base)?;

    let mut best: Option<(f64, TrainedModel)> = None;
    let mut summary = String::from(
        "index,hidden_layers,hidden_width,param_budget,learning_rate,initial_horizon,horizon_interval,final_loss,mean_msie,selected\n",
    );
    let mut rows = Vec::with_capacity(n);
    for (index, sc) in sampled.iter().enumerate() {
        let model = match train(cases, &sc.spec, &sc.train) {
            Ok(m) => m,
            Err(e) => {
                eprintln!(
                    "warning: train {} config {index}: {e}; skipping",
                    method.name()
                );
                rows.push((index, sc.clone(), f64::NAN, f64::NAN, false));
                continue;
            }
        };
        let score = match mean_msie(&model, cases, trajectories) {
            Ok(s) => s,
            Err(e) => {
                eprintln!(
                    "warning: eval {} config {index}: {e}; skipping",
                    method.name()
                );
                rows.push((index, sc.clone(), *model.loss_history.last().unwrap(), f64::NAN, false));
                continue;
            }
        };
        let final_loss = *model.loss_history.last().unwrap();
        let is_better = best.as_ref().map_or(true, |(b, _)| score < *b);
        if is_better {
            best = Some((score, model));
        }
        rows.push((index, sc.clone(), final_loss, score, false));
    }
    let (best_score, best_model) = best.ok_or_else(|| {
        AppError::runtime(format!(
            "every sampled configuration failed for {}",
            method.name()
        ))
    })?;
    for (index, sc, final_loss, score, _) in rows {
        summary.push_str(&format!(
            "{index},{},{},{},{},{},{},{final_loss},{score},{}\n",
            sc.spec.hidden_layers,
            sc.spec.hidden_width,
            sc.param_budget,
            sc.train.learning_rate,
            sc.train.initial_horizon,
            sc.train.horizon_interval,
            score == best_score
        ));
    }
    let path = system_dir(config).join(format!("lhs_search_{}.csv", method.name()));
    write_atomic(&path, summary.as_bytes())?;
    Ok(best_model)
}

struct MethodLabel(Method);

impl std::fmt::Display for MethodLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0.name())
    }
}
