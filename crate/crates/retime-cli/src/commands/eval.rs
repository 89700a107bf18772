//! `eval`: roll the trained surrogates out over the selected cases and
//! score them against the stored references, emitting per-case metric
//! JSON, a flat per-(mu, method) table, and an on/off-reference summary
//! per method.

use std::collections::BTreeMap;
use std::fs;

use serde::Serialize;

use retime::io::{self, Checkpoint};
use retime::metrics::{msie, Msie, TauMse};
use retime::reparam::{Method, ReparamResult};
use retime::surrogate::rollout;

use crate::config::{exponent_dir_name, RunConfig};
use crate::error::{with_case_context, AppError, AppResult};

use super::{case_dir, model_paths, read_reparam, read_trajectory, run_parallel, system_dir, write_atomic};

#[derive(Debug, Clone, Serialize)]
struct CaseReport {
    system: String,
    mu_exponent: f64,
    method: String,
    on_reference: bool,
    tau_mse: TauMse,
    msie: Msie,
}

pub fn run(config: &RunConfig) -> AppResult<()> {
    let sys = config.system()?;
    let exponents = config.mu_exponents(&sys);
    let methods = config.methods();
    let training: Vec<f64> = sys.training_exponents().to_vec();

    let mut jobs_list = Vec::new();
    for &method in &methods {
        for &exponent in &exponents {
            jobs_list.push((method, exponent));
        }
    }

    let models: BTreeMap<&'static str, Checkpoint> = methods
        .iter()
        .map(|&m| {
            let (model_path, _) = model_paths(config, m);
            let text = fs::read_to_string(&model_path).map_err(|e| {
                AppError::runtime(format!(
                    "missing checkpoint {} (run 'train' first): {e}",
                    model_path.display()
                ))
            })?;
            Ok((m.name(), io::from_json::<Checkpoint>(&text)?))
        })
        .collect::<AppResult<_>>()?;

    let results = run_parallel(config.jobs, jobs_list, |&(method, exponent)| {
        let dir = case_dir(config, exponent);
        let (reference, _) = read_reparam(&dir, method)?;
        let (ref_traj, _) = read_trajectory(&dir)?;
        let checkpoint = &models[method.name()];
        let model = checkpoint.clone().into_model();

        let n_tau = reference.n_tau();
        let dtau = reference.tau_grid[1] - reference.tau_grid[0];
        let mu = 10f64.powf(exponent);
        let series = with_case_context(
            rollout(
                &model.state_net,
                &model.dilation_net,
                &model.scaling,
                &reference.y_of_tau[0],
                0.0,
                mu,
                n_tau - 1,
                dtau,
            ),
            &config.system,
            exponent,
        )?;

        let tau = tau_mse_series_of(&series.states, &series.times, &reference)?;
        let physical = msie(&series.times, &series.states, &ref_traj)?;
        let report = CaseReport {
            system: config.system.clone(),
            mu_exponent: exponent,
            method: method.name().to_string(),
            on_reference: training.iter().any(|t| (t - exponent).abs() < 1e-12),
            tau_mse: tau,
            msie: physical,
        };
        let path = dir.join(format!("metrics_{}.json", method.name()));
        write_atomic(&path, io::to_json_pretty(&report)?.as_bytes())?;
        Ok(report)
    })?;

    let mut reports = Vec::new();
    let mut failed = 0;
    for ((method, exponent), result) in &results {
        match result {
            Ok(r) => reports.push(r.clone()),
            Err(e) => {
                eprintln!(
                    "error: eval {} mu=10^{}: {e}",
                    method.name(),
                    exponent_dir_name(*exponent)
                );
                failed += 1;
            }
        }
    }

    reports.sort_by(|a, b| {
        a.mu_exponent
            .partial_cmp(&b.mu_exponent)
            .unwrap()
            .then(a.method.cmp(&b.method))
    });
    write_table(config, sys.dim(), &reports)?;
    write_summary(config, sys.dim(), &methods, &reports)?;
    println!(
        "eval {}: {} case(s), table at {}",
        config.system,
        reports.len(),
        system_dir(config).join("metrics_table.csv").display()
    );

    if failed > 0 {
        return Err(AppError::runtime(format!("{failed} eval case(s) failed")));
    }
    Ok(())
}

fn tau_mse_series_of(
    states: &[Vec<f64>],
    times: &[f64],
    reference: &ReparamResult,
) -> AppResult<TauMse> {
    retime::metrics::tau_mse_series(states, times, &reference.y_of_tau, &reference.t_of_tau())
        .map_err(AppError::from)
}

/// One flat row per (mu, method): per-component values plus aggregates.
fn write_table(config: &RunConfig, dim: usize, reports: &[CaseReport]) -> AppResult<()> {
    let mut out = String::from("system,mu,method,on_reference");
    for c in 0..dim {
        out.push_str(&format!(",tau_mse_y{}", c + 1));
    }
    out.push_str(",tau_mse_time,tau_mse_state,tau_mse_all");
    for c in 0..dim {
        out.push_str(&format!(",msie_y{}", c + 1));
    }
    out.push_str(",msie_state,short_horizon\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{}",
            r.system,
            exponent_dir_name(r.mu_exponent),
            r.method,
            r.on_reference
        ));
        for v in &r.tau_mse.per_component {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(
            ",{},{},{}",
            r.tau_mse.time, r.tau_mse.state, r.tau_mse.all
        ));
        for v in &r.msie.per_component {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{},{}\n", r.msie.state, r.msie.short_horizon));
    }
    write_atomic(&system_dir(config).join("metrics_table.csv"), out.as_bytes())
}

/// Mean over on-/off-reference cases per method, one row per
/// component plus Time/State/All aggregates, then the MSIE block.
fn write_summary(
    config: &RunConfig,
    dim: usize,
    methods: &[Method],
    reports: &[CaseReport],
) -> AppResult<()> {
    let mean = |method: Method, on: bool, pick: &dyn Fn(&CaseReport) -> f64| -> f64 {
        let values: Vec<f64> = reports
            .iter()
            .filter(|r| r.method == method.name() && r.on_reference == on)
            .map(pick)
            .collect();
        if values.is_empty() {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        }
    };

    let mut rows: Vec<(String, Box<dyn Fn(&CaseReport) -> f64>)> = Vec::new();
    for c in 0..dim {
        rows.push((
            format!("tau_mse,y{}", c + 1),
            Box::new(move |r: &CaseReport| r.tau_mse.per_component[c]),
        ));
    }
    rows.push(("tau_mse,time".into(), Box::new(|r| r.tau_mse.time)));
    rows.push(("tau_mse,state".into(), Box::new(|r| r.tau_mse.state)));
    rows.push(("tau_mse,all".into(), Box::new(|r| r.tau_mse.all)));
    for c in 0..dim {
        rows.push((
            format!("msie,y{}", c + 1),
            Box::new(move |r: &CaseReport| r.msie.per_component[c]),
        ));
    }
    rows.push(("msie,state".into(), Box::new(|r| r.msie.state)));

    let mut out = String::from("block,metric");
    for m in methods {
        out.push_str(&format!(",{}_on,{}_off", m.name(), m.name()));
    }
    out.push('\n');
    for (label, pick) in &rows {
        out.push_str(label);
        for &m in methods {
            out.push_str(&format!(",{},{}", mean(m, true, pick), mean(m, false, pick)));
        }
        out.push('\n');
    }
    write_atomic(&system_dir(config).join("metrics_summary.csv"), out.as_bytes())
}

