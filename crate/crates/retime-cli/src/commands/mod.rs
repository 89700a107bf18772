//! Command implementations and the shared file layout:
//! `out/<system>/<mu-exponent>/<artifact>` for per-case files and
//! `out/<system>/<artifact>` for per-system ones.

pub mod compare;
pub mod eval;
pub mod generate;
pub mod plot;
pub mod reparam;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};

use retime::integrate::Trajectory;
use retime::io::{self, ReparamSidecar, TrajectorySidecar};
use retime::reparam::{Method, ReparamResult};

use crate::config::{exponent_dir_name, RunConfig};
use crate::error::{AppError, AppResult};

pub fn case_dir(config: &RunConfig, exponent: f64) -> PathBuf {
    config
        .out_dir()
        .join(&config.system)
        .join(exponent_dir_name(exponent))
}

pub fn system_dir(config: &RunConfig) -> PathBuf {
    config.out_dir().join(&config.system)
}

pub fn trajectory_paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join("trajectory.csv"), dir.join("trajectory.json"))
}

pub fn reparam_paths(dir: &Path, method: Method) -> (PathBuf, PathBuf, PathBuf) {
    (
        dir.join(format!("reparam_{}.csv", method.name())),
        dir.join(format!("reparam_{}.json", method.name())),
        dir.join(format!("reparam_{}_diag.json", method.name())),
    )
}

pub fn model_paths(config: &RunConfig, method: Method) -> (PathBuf, PathBuf) {
    let dir = system_dir(config);
    (
        dir.join(format!("model_{}.json", method.name())),
        dir.join(format!("loss_{}.csv", method.name())),
    )
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_trajectory(dir: &Path) -> AppResult<(Trajectory, TrajectorySidecar)> {
    let (csv_path, json_path) = trajectory_paths(dir);
    let sidecar_text = fs::read_to_string(&json_path).map_err(|e| {
        AppError::runtime(format!("missing trajectory sidecar {}: {e}", json_path.display()))
    })?;
    let sidecar: TrajectorySidecar = io::from_json(&sidecar_text)?;
    let file = fs::File::open(&csv_path).map_err(|e| {
        AppError::runtime(format!("missing trajectory {}: {e}", csv_path.display()))
    })?;
    let traj = io::read_trajectory_csv(file, &sidecar)?;
    Ok((traj, sidecar))
}

pub fn read_reparam(dir: &Path, method: Method) -> AppResult<(ReparamResult, ReparamSidecar)> {
    let (csv_path, json_path, _) = reparam_paths(dir, method);
    let sidecar_text = fs::read_to_string(&json_path).map_err(|e| {
        AppError::runtime(format!("missing reparam sidecar {}: {e}", json_path.display()))
    })?;
    let sidecar: ReparamSidecar = io::from_json(&sidecar_text)?;
    let file = fs::File::open(&csv_path).map_err(|e| {
        AppError::runtime(format!("missing reparam result {}: {e}", csv_path.display()))
    })?;
    let result = io::read_reparam_csv(file, &sidecar)?;
    Ok((result, sidecar))
}

/// Run one closure per case on a bounded rayon pool, preserving input
/// order in the returned results.
pub fn run_parallel<C, T, F>(jobs: usize, cases: Vec<C>, f: F) -> AppResult<Vec<(C, AppResult<T>)>>
where
    C: Send,
    T: Send,
    F: Fn(&C) -> AppResult<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| AppError::runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        use rayon::prelude::*;
        cases
            .into_par_iter()
            .map(|case| {
                let result = f(&case);
                (case, result)
            })
            .collect()
    }))
}

/// Print per-case failures and turn any failure into a runtime error.
pub fn report_failures<C: std::fmt::Display, T>(
    results: &[(C, AppResult<T>)],
    what: &str,
) -> AppResult<()> {
    let mut failed = 0;
    for (case, result) in results {
        if let Err(e) = result {
            eprintln!("error: {what} {case}: {e}");
            failed += 1;
        }
    }
    if failed > 0 {
        Err(AppError::runtime(format!(
            "{failed} of {} {what} case(s) failed",
            results.len()
        )))
    } else {
        Ok(())
    }
}
