//! `generate`: reference trajectories for each selected mu, one CSV plus
//! JSON sidecar per case.

use retime::integrate::{integrate_implicit_adaptive, SolverConfig};
use retime::io;

use crate::config::RunConfig;
use crate::error::{with_case_context, AppResult};

use super::{case_dir, run_parallel, trajectory_paths, write_atomic, report_failures};

pub fn run(config: &RunConfig) -> AppResult<()> {
    let sys = config.system()?;
    let exponents = config.mu_exponents(&sys);

    let results = run_parallel(config.jobs, exponents, |&exponent| {
        let mu = 10f64.powf(exponent);
        let horizon = sys.default_horizon(mu);
        let solver_cfg = SolverConfig::for_horizon(config.rtol, config.atol, horizon);
        let traj = with_case_context(
            integrate_implicit_adaptive(&sys, mu, &solver_cfg, horizon),
            &config.system,
            exponent,
        )?;

        let dir = case_dir(config, exponent);
        let (csv_path, json_path) = trajectory_paths(&dir);
        let mut csv = Vec::new();
        io::write_trajectory_csv(&mut csv, &traj)?;
        write_atomic(&csv_path, &csv)?;
        let sidecar = io::trajectory_sidecar(&config.system, &traj);
        write_atomic(&json_path, io::to_json_pretty(&sidecar)?.as_bytes())?;
        println!(
            "generate {} mu=10^{}: {} accepted steps",
            config.system,
            crate::config::exponent_dir_name(exponent),
            traj.len()
        );
        Ok(())
    })?;
    report_failures(&results, "generate")
}
