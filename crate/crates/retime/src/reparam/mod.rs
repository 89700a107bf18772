//! The three time-reparameterization algorithms.
//!
//! Each maps a [`Trajectory`] to a [`ReparamResult`]: the state resampled
//! on a uniform stretched-time grid together with an invertible time map
//! t(tau). The methods differ only in how the clock is constructed:
//! from the implicit solver's accepted grid, from spline conditions at
//! trajectory extrema, or from a variational speed-profile optimization.

mod extrema;
mod solver_directed;
mod totr;

pub use extrema::{extrema_based, extrema_tau_of_s};
pub use solver_directed::solver_directed;
pub use totr::{
    constant_speed, objective_and_gradient, optimize_speed_profile, solve_offset, totr,
    OptimizerConfig, SpeedProfile,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArcCurve;
use crate::interp::{linspace, PiecewiseCubic};

/// Which algorithm produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SolverDirected,
    ExtremaBased,
    Totr,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::SolverDirected => "solver_directed",
            Method::ExtremaBased => "extrema_based",
            Method::Totr => "totr",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "solver_directed" => Ok(Method::SolverDirected),
            "extrema_based" => Ok(Method::ExtremaBased),
            "totr" => Ok(Method::Totr),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}' (expected solver_directed, extrema_based or totr)"
            ))),
        }
    }
}

pub const METHOD_NAMES: [&str; 3] = ["solver_directed", "extrema_based", "totr"];

/// Monotone correspondence between stretched time tau and physical time t,
/// with shape-preserving interpolants in both directions.
#[derive(Debug, Clone)]
pub struct TimeMap {
    tau_knots: Vec<f64>,
    t_knots: Vec<f64>,
    forward: PiecewiseCubic,
    inverse: PiecewiseCubic,
    tau_f: f64,
}

impl TimeMap {
    /// Build from knot pairs. `tau` must start at 0; `t` must start at 0
    /// and be strictly increasing.
    pub fn from_knots(tau: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if tau.len() != t.len() || tau.len() < 2 {
            return Err(Error::GridMismatch(format!(
                "time map needs matching knots, got {} tau / {} t",
                tau.len(),
                t.len()
            )));
        }
        if tau[0] != 0.0 || t[0] != 0.0 {
            return Err(Error::NonMonotoneTimeMap(format!(
                "time map must start at the origin, got ({}, {})",
                tau[0], t[0]
            )));
        }
        for i in 1..t.len() {
            if !(t[i] > t[i - 1]) {
                return Err(Error::NonMonotoneTimeMap(format!(
                    "t not strictly increasing at knot {i}: {} -> {}",
                    t[i - 1],
                    t[i]
                )));
            }
        }
        let forward = PiecewiseCubic::pchip(&tau, &t)?;
        let inverse = PiecewiseCubic::pchip(&t, &tau)?;
        let tau_f = *tau.last().unwrap();
        Ok(Self {
            tau_knots: tau,
            t_knots: t,
            forward,
            inverse,
            tau_f,
        })
    }

    pub fn tau_f(&self) -> f64 {
        self.tau_f
    }

    pub fn horizon(&self) -> f64 {
        *self.t_knots.last().unwrap()
    }

    pub fn tau_knots(&self) -> &[f64] {
        &self.tau_knots
    }

    pub fn t_knots(&self) -> &[f64] {
        &self.t_knots
    }

    /// Physical time at stretched time tau.
    pub fn t_at(&self, tau: f64) -> f64 {
        self.forward.eval(tau)
    }

    /// Stretched time at physical time t.
    pub fn tau_at(&self, t: f64) -> f64 {
        self.inverse.eval(t)
    }

    /// Time dilation dt/dtau at tau.
    pub fn dilation_at(&self, tau: f64) -> f64 {
        self.forward.deriv(tau)
    }
}

/// Optimizer/diagnostic record attached to every result.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    /// Final speed-profile objective (TOTR only).
    pub objective: Option<f64>,
    /// Accepted optimizer iterations (TOTR only).
    pub iterations: usize,
    /// Objective value after each accepted iteration (TOTR only).
    pub objective_trace: Vec<f64>,
    /// Max norm of the second-difference estimate of the augmented state
    /// over the uniform tau grid.
    pub max_second_diff: f64,
    /// Free-form warnings (e.g. a monotonicity fallback fired).
    pub notes: Vec<String>,
}

/// A reparameterized trajectory on a uniform tau grid.
#[derive(Debug, Clone)]
pub struct ReparamResult {
    pub method: Method,
    pub tau_grid: Vec<f64>,
    /// Physical states at each tau, `n_tau x d`.
    pub y_of_tau: Vec<Vec<f64>>,
    pub time_map: TimeMap,
    pub diagnostics: Diagnostics,
}

impl ReparamResult {
    pub fn n_tau(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn dim(&self) -> usize {
        self.y_of_tau[0].len()
    }

    pub fn tau_f(&self) -> f64 {
        *self.tau_grid.last().unwrap()
    }

    /// Physical time at each tau grid point.
    pub fn t_of_tau(&self) -> Vec<f64> {
        self.tau_grid.iter().map(|tau| self.time_map.t_at(*tau)).collect()
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.y_of_tau.iter().map(|row| row[c]).collect()
    }
}

/// Shared geometric settings for the arc-length based methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryConfig {
    /// Uniform s-grid resolution.
    pub n_samples: usize,
    /// Odd moving-average window for the curvature estimate.
    pub curvature_window: usize,
    /// Per-component weights (states then time); `None` = all ones.
    pub weights: Option<Vec<f64>>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            n_samples: 4096,
            curvature_window: 11,
            weights: None,
        }
    }
}

/// Numerically invert a strictly increasing map given as values tau(s) on
/// a grid; returns s(tau) sampled on a uniform tau grid of `n_tau` points.
///
/// Ties within 1e-14 (relative to the final value) are collapsed before
/// the shape-preserving interpolation of the swapped pairs.
pub fn invert_time(s_grid: &[f64], tau_of_s: &[f64], n_tau: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if s_grid.len() != tau_of_s.len() || s_grid.len() < 2 {
        return Err(Error::GridMismatch(format!(
            "invert_time needs matching grids, got {} / {}",
            s_grid.len(),
            tau_of_s.len()
        )));
    }
    let tau_f = *tau_of_s.last().unwrap();
    let tie = 1e-14 * tau_f.abs().max(1.0);
    let mut xs: Vec<f64> = Vec::with_capacity(tau_of_s.len());
    let mut ys: Vec<f64> = Vec::with_capacity(tau_of_s.len());
    for (i, &tau) in tau_of_s.iter().enumerate() {
        match xs.last() {
            None => {
                xs.push(tau);
                ys.push(s_grid[i]);
            }
            Some(&last) => {
                if tau > last + tie {
                    xs.push(tau);
                    ys.push(s_grid[i]);
                } else if tau < last - tie {
                    return Err(Error::NonMonotoneTimeMap(format!(
                        "tau(s) decreases at index {i}: {last} -> {tau}"
                    )));
                }
                // Within the tie band: collapse.
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::NonMonotoneTimeMap(
            "tau(s) collapsed to a single knot".into(),
        ));
    }
    let interp = PiecewiseCubic::pchip(&xs, &ys)?;
    let tau_grid = linspace(tau_of_s[0], tau_f, n_tau);
    let s_of_tau = interp.eval_many(&tau_grid);
    Ok((tau_grid, s_of_tau))
}

/// Assemble a result, filling the second-difference diagnostic.
pub(crate) fn finish_result(
    method: Method,
    tau_grid: Vec<f64>,
    y_of_tau: Vec<Vec<f64>>,
    time_map: TimeMap,
    mut diagnostics: Diagnostics,
) -> ReparamResult {
    diagnostics.max_second_diff = max_second_difference(&tau_grid, &y_of_tau, &time_map);
    ReparamResult {
        method,
        tau_grid,
        y_of_tau,
        time_map,
        diagnostics,
    }
}

/// Compose an arc curve with s(tau) into a [`ReparamResult`]: states are
/// dimensionalized back to physical units, physical time comes from
/// t(s(tau)).
pub(crate) fn compose_result(
    arc: &ArcCurve,
    tau_grid: Vec<f64>,
    s_of_tau: &[f64],
    method: Method,
    diagnostics: Diagnostics,
) -> Result<ReparamResult> {
    let d = arc.state_dim();
    let n_tau = tau_grid.len();

    let mut y_of_tau = vec![Vec::with_capacity(d); n_tau];
    for c in 0..d {
        let vals: Vec<f64> = arc.phi_of_s.iter().map(|row| row[c]).collect();
        let interp = PiecewiseCubic::pchip(&arc.s_grid, &vals)?;
        let sc = &arc.scales[c];
        let w = arc.weights[c];
        for (i, s) in s_of_tau.iter().enumerate() {
            let phi = interp.eval(*s);
            let y = if sc.zero_span {
                sc.offset
            } else {
                let unweighted = if w == 0.0 { 0.0 } else { phi / w };
                unweighted * sc.span + sc.offset
            };
            y_of_tau[i].push(y);
        }
    }

    let t_interp = PiecewiseCubic::pchip(&arc.s_grid, &arc.t_of_s)?;
    let mut t_of_tau: Vec<f64> = s_of_tau.iter().map(|s| t_interp.eval(*s)).collect();
    // Pin the endpoints: s(tau) hits 0 and S up to rounding only.
    t_of_tau[0] = arc.t_of_s[0];
    t_of_tau[n_tau - 1] = *arc.t_of_s.last().unwrap();
    enforce_increasing(&mut t_of_tau)?;

    let time_map = TimeMap::from_knots(tau_grid.clone(), t_of_tau)?;
    Ok(finish_result(method, tau_grid, y_of_tau, time_map, diagnostics))
}

/// Repair flat spots introduced by interpolation rounding; genuine
/// decreases are an error.
fn enforce_increasing(values: &mut [f64]) -> Result<()> {
    let span = values[values.len() - 1] - values[0];
    if !(span > 0.0) {
        return Err(Error::NonMonotoneTimeMap("zero time span".into()));
    }
    let nudge = span * 1e-15;
    for i in 1..values.len() {
        if values[i] <= values[i - 1] {
            if values[i] < values[i - 1] - 1e-9 * span {
                return Err(Error::NonMonotoneTimeMap(format!(
                    "t(tau) decreases at index {i}"
                )));
            }
            values[i] = values[i - 1] + nudge;
        }
    }
    Ok(())
}

/// Max over interior grid points of ||second difference|| / dtau^2 of the
/// nondimensionalized augmented state (states scaled by their spans,
/// time by the horizon).
fn max_second_difference(tau_grid: &[f64], y_of_tau: &[Vec<f64>], map: &TimeMap) -> f64 {
    let n = tau_grid.len();
    if n < 3 {
        return 0.0;
    }
    let d = y_of_tau[0].len();
    let horizon = map.horizon();

    let mut mins = vec![f64::INFINITY; d];
    let mut maxs = vec![f64::NEG_INFINITY; d];
    for row in y_of_tau {
        for c in 0..d {
            mins[c] = mins[c].min(row[c]);
            maxs[c] = maxs[c].max(row[c]);
        }
    }
    let spans: Vec<f64> = (0..d)
        .map(|c| if maxs[c] > mins[c] { maxs[c] - mins[c] } else { 1.0 })
        .collect();

    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..d)
                .map(|c| (y_of_tau[i][c] - mins[c]) / spans[c])
                .collect();
            row.push(map.t_at(tau_grid[i]) / horizon);
            row
        })
        .collect();
    crate::metrics::max_second_difference_raw(tau_grid[1] - tau_grid[0], &rows)
}
