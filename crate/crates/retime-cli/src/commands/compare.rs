//! `compare`: score the reparameterizations themselves, without any
//! training — stiffness diagnostics plus round-trip reconstruction
//! error per (mu, method).

use retime::metrics::{msie_reparam, stiffness_diag};

use crate::config::{exponent_dir_name, RunConfig};
use crate::error::{AppError, AppResult};

use super::{case_dir, read_reparam, read_trajectory, run_parallel, system_dir, write_atomic};

pub fn run(config: &RunConfig) -> AppResult<()> {
    let sys = config.system()?;
    let exponents = config.mu_exponents(&sys);
    let methods = config.methods();

    let mut jobs_list = Vec::new();
    for &exponent in &exponents {
        for &method in &methods {
            jobs_list.push((exponent, method));
        }
    }

    let results = run_parallel(config.jobs, jobs_list, |&(exponent, method)| {
        let dir = case_dir(config, exponent);
        let (result, sidecar) = read_reparam(&dir, method)?;
        let (traj, _) = read_trajectory(&dir)?;
        let mu = 10f64.powf(exponent);
        let diag = stiffness_diag(&result, &sys, mu);
        let round_trip = msie_reparam(&result, &traj)?;
        Ok((
            exponent,
            method,
            diag,
            round_trip.state,
            sidecar.objective,
            sidecar.iterations,
        ))
    })?;

    let mut rows = Vec::new();
    let mut failed = 0;
    for ((exponent, method), result) in results {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!(
                    "error: compare {} mu=10^{}: {e}",
                    method.name(),
                    exponent_dir_name(exponent)
                );
                failed += 1;
            }
        }
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.name().cmp(b.1.name())));

    let mut out = String::from(
        "system,mu,method,max_second_diff,explicit_euler_stable,roundtrip_msie_state,objective,iterations\n",
    );
    for (exponent, method, diag, round_trip, objective, iterations) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            config.system,
            exponent_dir_name(exponent),
            method.name(),
            diag.max_second_diff,
            diag.explicit_euler_stable,
            round_trip,
            objective.map_or(String::new(), |o| o.to_string()),
            iterations
        ));
    }
    let path = system_dir(config).join("compare_table.csv");
    write_atomic(&path, out.as_bytes())?;
    println!("compare {}: table at {}", config.system, path.display());

    if failed > 0 {
        return Err(AppError::runtime(format!("{failed} compare case(s) failed")));
    }
    Ok(())
}
