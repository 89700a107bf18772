//! `reparam`: apply the requested methods to each stored trajectory,
//! writing the resampled result, its sidecar, and the full diagnostics.

use retime::io;
use retime::reparam::{extrema_based, solver_directed, totr, Method, ReparamResult};

use crate::config::RunConfig;
use crate::error::{with_case_context, AppResult};

use super::{case_dir, read_trajectory, reparam_paths, report_failures, run_parallel, write_atomic};

pub fn run(config: &RunConfig) -> AppResult<()> {
    let sys = config.system()?;
    let exponents = config.mu_exponents(&sys);
    let methods = config.methods();
    let geo = config.geometry();
    let opt = config.optimizer();

    let results = run_parallel(config.jobs, exponents, |&exponent| {
        let dir = case_dir(config, exponent);
        let (traj, _) = read_trajectory(&dir)?;

        if methods.contains(&Method::SolverDirected) && grid_is_uniform(traj.times()) {
            eprintln!(
                "warning: {} mu=10^{}: trajectory grid is uniform; the \
                 solver-directed map degenerates to linear t(tau)",
                config.system,
                crate::config::exponent_dir_name(exponent)
            );
        }

        for method in &methods {
            let result: ReparamResult = with_case_context(
                match method {
                    Method::SolverDirected => solver_directed(&traj, config.tau_f, config.n_tau),
                    Method::ExtremaBased => extrema_based(&traj, config.tau_f, config.n_tau, &geo),
                    Method::Totr => totr(&traj, config.tau_f, config.n_tau, &opt, &geo),
                },
                &config.system,
                exponent,
            )?;
            let (csv_path, json_path, diag_path) = reparam_paths(&dir, *method);
            let mut csv = Vec::new();
            io::write_reparam_csv(&mut csv, &result)?;
            write_atomic(&csv_path, &csv)?;
            write_atomic(
                &json_path,
                io::to_json_pretty(&io::reparam_sidecar(&result))?.as_bytes(),
            )?;
            write_atomic(
                &diag_path,
                io::to_json_pretty(&result.diagnostics)?.as_bytes(),
            )?;
        }
        println!(
            "reparam {} mu=10^{}: {} method(s)",
            config.system,
            crate::config::exponent_dir_name(exponent),
            methods.len()
        );
        Ok(())
    })?;
    report_failures(&results, "reparam")
}

fn grid_is_uniform(times: &[f64]) -> bool {
    if times.len() < 3 {
        return true;
    }
    let span = times[times.len() - 1] - times[0];
    let step = span / (times.len() - 1) as f64;
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * span)
}
