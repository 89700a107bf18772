//! Evaluation metrics: stretched-time MSE (the training objective used
//! offline), the reparameterization-invariant mean squared integral
//! error in physical time, and stiffness diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{Ode, Trajectory};
use crate::interp::PiecewiseCubic;
use crate::reparam::{ReparamResult, TimeMap};

/// Stretched-time MSE decomposition. States are nondimensionalized to
/// [-1, 1] by the reference extrema, time is rescaled to [0, 5]; the
/// `all` aggregate carries the (N_q + 1) normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauMse {
    pub per_component: Vec<f64>,
    pub time: f64,
    pub state: f64,
    pub all: f64,
}

/// Mean squared integral error in physical time, per component and
/// state-aggregated; `short_horizon` flags hold-last extrapolation of a
/// prediction that ended before the reference horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Msie {
    pub per_component: Vec<f64>,
    pub state: f64,
    pub short_horizon: bool,
}

/// Stiffness indicators of a reparameterized trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StiffnessDiag {
    pub max_second_diff: f64,
    pub explicit_euler_stable: bool,
}

/// Stretched-time MSE between prediction and reference sampled on the
/// same tau grid.
pub fn tau_mse_series(
    pred_states: &[Vec<f64>],
    pred_times: &[f64],
    ref_states: &[Vec<f64>],
    ref_times: &[f64],
) -> Result<TauMse> {
    let n = ref_states.len();
    if pred_states.len() != n || pred_times.len() != n || ref_times.len() != n {
        return Err(Error::GridMismatch(format!(
            "tau grids differ: pred {} / ref {}",
            pred_states.len(),
            n
        )));
    }
    if n == 0 {
        return Err(Error::GridMismatch("empty series".into()));
    }
    let d = ref_states[0].len();
    if pred_states[0].len() != d {
        return Err(Error::GridMismatch(format!(
            "state dimensions differ: pred {} / ref {d}",
            pred_states[0].len()
        )));
    }

    // Reference extrema define the scaling so degenerate predictions
    // cannot shrink their own error.
    let mut half_span = vec![1.0; d];
    for c in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in ref_states {
            lo = lo.min(row[c]);
            hi = hi.max(row[c]);
        }
        if hi > lo {
            half_span[c] = 0.5 * (hi - lo);
        }
    }
    let horizon = ref_times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let t_factor = if horizon > 0.0 { 5.0 / horizon } else { 1.0 };

    let mut per_component = vec![0.0; d];
    for j in 0..n {
        for c in 0..d {
            let diff = (pred_states[j][c] - ref_states[j][c]) / half_span[c];
            per_component[c] += diff * diff;
        }
    }
    for v in per_component.iter_mut() {
        *v /= n as f64;
    }
    let mut time = 0.0;
    for j in 0..n {
        let diff = (pred_times[j] - ref_times[j]) * t_factor;
        time += diff * diff;
    }
    time /= n as f64;

    let state_sum: f64 = per_component.iter().sum();
    Ok(TauMse {
        state: state_sum / d as f64,
        all: (state_sum + time) / (d + 1) as f64,
        per_component,
        time,
    })
}

/// Convenience wrapper over two [`ReparamResult`]s on the same grid.
pub fn tau_mse(pred: &ReparamResult, reference: &ReparamResult) -> Result<TauMse> {
    tau_mse_series(
        &pred.y_of_tau,
        &pred.t_of_tau(),
        &reference.y_of_tau,
        &reference.t_of_tau(),
    )
}

/// MSIE of a physical-time prediction against a reference trajectory:
/// the prediction is resampled onto the reference grid by shape-
/// preserving interpolation, holding its last state beyond its horizon
/// (flagged), then integrated by the trapezoidal rule and normalized by
/// the horizon.
pub fn msie(
    pred_times: &[f64],
    pred_states: &[Vec<f64>],
    reference: &Trajectory,
) -> Result<Msie> {
    if pred_times.len() != pred_states.len() || pred_times.len() < 2 {
        return Err(Error::GridMismatch(format!(
            "prediction series malformed: {} times / {} states",
            pred_times.len(),
            pred_states.len()
        )));
    }
    let d = reference.dim();
    if pred_states[0].len() != d {
        return Err(Error::GridMismatch(format!(
            "state dimensions differ: pred {} / ref {d}",
            pred_states[0].len()
        )));
    }
    let horizon = reference.horizon();
    let short_horizon = *pred_times.last().unwrap() < horizon * (1.0 - 1e-9);

    // Strictly increasing abscissae for the interpolant.
    let mut xs: Vec<f64> = Vec::with_capacity(pred_times.len());
    let mut keep: Vec<usize> = Vec::with_capacity(pred_times.len());
    for (i, t) in pred_times.iter().enumerate() {
        if xs.last().map_or(true, |last| t > last) {
            xs.push(*t);
            keep.push(i);
        }
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateTrajectory(
            "prediction has no increasing time span".into(),
        ));
    }

    let ref_times = reference.times();
    let mut per_component = vec![0.0; d];
    for c in 0..d {
        let ys: Vec<f64> = keep.iter().map(|&i| pred_states[i][c]).collect();
        let interp = PiecewiseCubic::pchip(&xs, &ys)?;
        // eval clamps outside the domain, which is exactly hold-last.
        let mut acc = 0.0;
        let mut prev_sq = {
            let diff = interp.eval(ref_times[0]) - reference.states()[0][c];
            diff * diff
        };
        for j in 1..ref_times.len() {
            let diff = interp.eval(ref_times[j]) - reference.states()[j][c];
            let sq = diff * diff;
            acc += 0.5 * (prev_sq + sq) * (ref_times[j] - ref_times[j - 1]);
            prev_sq = sq;
        }
        per_component[c] = acc / horizon;
    }
    let state = per_component.iter().sum::<f64>() / d as f64;
    Ok(Msie {
        per_component,
        state,
        short_horizon,
    })
}

/// Round-trip MSIE: reconstruct y(t) from a reparameterized result and
/// compare against its source trajectory.
pub fn msie_reparam(result: &ReparamResult, reference: &Trajectory) -> Result<Msie> {
    msie(&result.t_of_tau(), &result.y_of_tau, reference)
}

/// Max norm of (phi_{n+1} - 2 phi_n + phi_{n-1}) / dtau^2 over interior
/// points of a series given directly as rows (no internal rescaling).
pub fn max_second_difference_raw(dtau: f64, rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n < 3 {
        return 0.0;
    }
    let dim = rows[0].len();
    let mut max_norm: f64 = 0.0;
    for i in 1..n - 1 {
        let mut sq = 0.0;
        for c in 0..dim {
            let dd = rows[i + 1][c] - 2.0 * rows[i][c] + rows[i - 1][c];
            sq += dd * dd;
        }
        max_norm = max_norm.max(sq.sqrt() / (dtau * dtau));
    }
    max_norm
}

/// Nondimensionalized augmented rows (states by their min-max span, time
/// by the horizon) for a result on its own tau grid.
fn augmented_rows(result: &ReparamResult) -> Vec<Vec<f64>> {
    let d = result.dim();
    let n = result.n_tau();
    let mut mins = vec![f64::INFINITY; d];
    let mut maxs = vec![f64::NEG_INFINITY; d];
    for row in &result.y_of_tau {
        for c in 0..d {
            mins[c] = mins[c].min(row[c]);
            maxs[c] = maxs[c].max(row[c]);
        }
    }
    let spans: Vec<f64> = (0..d)
        .map(|c| if maxs[c] > mins[c] { maxs[c] - mins[c] } else { 1.0 })
        .collect();
    let t = result.t_of_tau();
    let horizon = result.time_map.horizon().max(f64::MIN_POSITIVE);
    (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..d)
                .map(|c| (result.y_of_tau[i][c] - mins[c]) / spans[c])
                .collect();
            row.push(t[i] / horizon);
            row
        })
        .collect()
}

/// Stiffness diagnostics: the second-difference estimate plus an
/// explicit-Euler stability probe of the tau-form system
/// dy/dtau = alpha(tau) f(y, t(tau); mu) on the result's own grid.
pub fn stiffness_diag<S: Ode>(result: &ReparamResult, system: &S, mu: f64) -> StiffnessDiag {
    let rows = augmented_rows(result);
    let dtau = result.tau_grid[1] - result.tau_grid[0];
    let max_second_diff = max_second_difference_raw(dtau, &rows);
    let explicit_euler_stable = tau_form_euler_bounded(result, system, mu, &result.time_map);
    StiffnessDiag {
        max_second_diff,
        explicit_euler_stable,
    }
}

fn tau_form_euler_bounded<S: Ode>(
    result: &ReparamResult,
    system: &S,
    mu: f64,
    map: &TimeMap,
) -> bool {
    let d = result.dim();
    let mut range: f64 = 0.0;
    for c in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &result.y_of_tau {
            lo = lo.min(row[c]);
            hi = hi.max(row[c]);
        }
        range = range.max(hi - lo).max(hi.abs()).max(lo.abs());
    }
    let bound = 10.0 * range.max(1e-6);

    let dtau = result.tau_grid[1] - result.tau_grid[0];
    let mut y = result.y_of_tau[0].clone();
    let mut f = vec![0.0; d];
    for tau in &result.tau_grid[..result.tau_grid.len() - 1] {
        let alpha = map.dilation_at(*tau);
        let t = map.t_at(*tau);
        system.rhs(&y, t, mu, &mut f);
        for c in 0..d {
            y[c] += dtau * alpha * f[c];
        }
        if y.iter().any(|v| !v.is_finite() || v.abs() >= bound) {
            return false;
        }
    }
    true
}
