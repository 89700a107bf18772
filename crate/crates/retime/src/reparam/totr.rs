//! Trajectory-optimized time reparameterization: pick a positive
//! traversal speed v(s) = exp(a + v*(s)) over the arc-length coordinate
//! minimizing the squared stretched-time acceleration
//! `J[v] = integral of (v v_s^2 + kappa^2 v^3) ds`
//! subject to the arrival-time constraint integral of ds/v = tau_f. The
//! offset `a` is eliminated in closed form, leaving an unconstrained
//! problem in v* solved by gradient descent with Armijo backtracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{arc_length, curvature, nondimensionalize, ArcCurve};
use crate::integrate::Trajectory;

use super::{compose_result, invert_time, Diagnostics, GeometryConfig, Method, ReparamResult};

/// Gradient-descent settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Stop when the relative objective change drops below this.
    pub rel_obj_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Line-search backtracking factor.
    pub backtrack: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            rel_obj_tol: 1e-10,
            armijo_c: 1e-4,
            backtrack: 0.5,
        }
    }
}

/// Unconstrained field v* on the uniform s grid plus the offset `a`;
/// the realized speed is v(s) = exp(a + v*(s)) > 0.
#[derive(Debug, Clone)]
pub struct SpeedProfile {
    pub v_star: Vec<f64>,
    pub offset: f64,
    pub total_length: f64,
}

impl SpeedProfile {
    pub fn v(&self) -> Vec<f64> {
        self.v_star.iter().map(|u| (self.offset + u).exp()).collect()
    }

    /// Trapezoidal quadrature of ds / v over the uniform grid.
    pub fn traversal_time(&self) -> f64 {
        let v = self.v();
        let n = v.len();
        let ds = self.total_length / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 1..n {
            acc += 0.5 * (1.0 / v[i - 1] + 1.0 / v[i]) * ds;
        }
        acc
    }
}

/// Closed-form offset: a = ln( (1/tau_f) * integral of e^{-v*} ds ),
/// trapezoidal quadrature on the uniform grid.
pub fn solve_offset(v_star: &[f64], total_length: f64, tau_f: f64) -> f64 {
    let n = v_star.len();
    let ds = total_length / (n - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 * ds } else { ds };
        acc += w * (-v_star[i]).exp();
    }
    (acc / tau_f).ln()
}

/// Objective and its exact gradient with respect to v*, including the
/// dependence of the offset on v* through [`solve_offset`].
///
/// v_s uses central differences with one-sided endpoints; the gradient
/// differentiates exactly this discretization, so finite-difference
/// checks agree to rounding rather than to discretization error.
pub fn objective_and_gradient(
    v_star: &[f64],
    offset: f64,
    kappa: &[f64],
    total_length: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = v_star.len();
    if kappa.len() != n {
        return Err(Error::GridMismatch(format!(
            "{} kappa values for {} grid points",
            kappa.len(),
            n
        )));
    }
    if n < 3 {
        return Err(Error::InvalidConfig("speed grid needs >= 3 points".into()));
    }
    let ds = total_length / (n - 1) as f64;
    let v: Vec<f64> = v_star.iter().map(|u| (offset + u).exp()).collect();

    // p = Dv: central interior, one-sided ends.
    let mut p = vec![0.0; n];
    p[0] = (v[1] - v[0]) / ds;
    p[n - 1] = (v[n - 1] - v[n - 2]) / ds;
    for i in 1..n - 1 {
        p[i] = (v[i + 1] - v[i - 1]) / (2.0 * ds);
    }

    let w = |i: usize| if i == 0 || i == n - 1 { 0.5 * ds } else { ds };

    let mut objective = 0.0;
    for i in 0..n {
        objective += w(i) * (v[i] * p[i] * p[i] + kappa[i] * kappa[i] * v[i].powi(3));
    }

    // dJ/dv: direct terms plus the transpose of the difference stencil
    // applied to q = 2 w v p.
    let mut dj_dv = vec![0.0; n];
    for i in 0..n {
        dj_dv[i] = w(i) * (p[i] * p[i] + 3.0 * kappa[i] * kappa[i] * v[i] * v[i]);
    }
    for i in 1..n - 1 {
        let q = 2.0 * w(i) * v[i] * p[i];
        dj_dv[i + 1] += q / (2.0 * ds);
        dj_dv[i - 1] -= q / (2.0 * ds);
    }
    let q0 = 2.0 * w(0) * v[0] * p[0];
    dj_dv[1] += q0 / ds;
    dj_dv[0] -= q0 / ds;
    let qn = 2.0 * w(n - 1) * v[n - 1] * p[n - 1];
    dj_dv[n - 1] += qn / ds;
    dj_dv[n - 2] -= qn / ds;

    // Chain rule through v = exp(a + u) with a = ln((1/tau_f) sum w e^{-u}):
    // dv_k/du_j = v_k (delta_kj + da/du_j), da/du_j = -w_j e^{-u_j} / E.
    let mut e_total = 0.0;
    for i in 0..n {
        e_total += w(i) * (-v_star[i]).exp();
    }
    let mut sum_qv = 0.0;
    for k in 0..n {
        sum_qv += dj_dv[k] * v[k];
    }
    let mut grad = vec![0.0; n];
    for j in 0..n {
        let da = -w(j) * (-v_star[j]).exp() / e_total;
        grad[j] = dj_dv[j] * v[j] + sum_qv * da;
    }
    Ok((objective, grad))
}

/// Minimize the speed-profile objective from the constant-speed start.
/// Returns the profile and the objective value after the initialization
/// and each accepted step.
pub fn optimize_speed_profile(
    kappa: &[f64],
    total_length: f64,
    tau_f: f64,
    cfg: &OptimizerConfig,
) -> Result<(SpeedProfile, Vec<f64>)> {
    if !(tau_f > 0.0) {
        return Err(Error::InvalidConfig("tau_f must be positive".into()));
    }
    let n = kappa.len();
    let mut u = vec![0.0; n];
    let mut a = solve_offset(&u, total_length, tau_f);
    let (mut obj, mut grad) = objective_and_gradient(&u, a, kappa, total_length)?;
    let initial_obj = obj;
    let mut trace = vec![obj];

    let mut step = {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax > 0.0 {
            (1.0 / gmax).min(1.0)
        } else {
            1.0
        }
    };

    for _ in 0..cfg.max_iters {
        let gnorm_sq: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm_sq == 0.0 {
            break;
        }
        let mut t = step * 2.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(grad.iter()).map(|(ui, gi)| ui - t * gi).collect();
            let trial_a = solve_offset(&trial, total_length, tau_f);
            let (trial_obj, trial_grad) =
                objective_and_gradient(&trial, trial_a, kappa, total_length)?;
            if trial_obj.is_finite() && trial_obj <= obj - cfg.armijo_c * t * gnorm_sq {
                let rel_change = (obj - trial_obj) / obj.abs().max(1e-300);
                u = trial;
                a = trial_a;
                obj = trial_obj;
                grad = trial_grad;
                step = t;
                trace.push(obj);
                accepted = true;
                if rel_change < cfg.rel_obj_tol {
                    return Ok((
                        SpeedProfile {
                            v_star: u,
                            offset: a,
                            total_length,
                        },
                        trace,
                    ));
                }
                break;
            }
            t *= cfg.backtrack;
        }
        if !accepted {
            // A full backtracking cascade failed; with an exact gradient
            // this means we are at numerical stationarity.
            if obj > initial_obj * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::OptimizerDiverged(format!(
                    "line search failed with objective {obj} above the initial {initial_obj}"
                )));
            }
            break;
        }
    }
    Ok((
        SpeedProfile {
            v_star: u,
            offset: a,
            total_length,
        },
        trace,
    ))
}

/// Full trajectory-optimized reparameterization.
pub fn totr(
    traj: &Trajectory,
    tau_f: f64,
    n_tau: usize,
    opt: &OptimizerConfig,
    geo: &GeometryConfig,
) -> Result<ReparamResult> {
    if n_tau < 2 {
        return Err(Error::InvalidConfig("n_tau must be >= 2".into()));
    }
    let aug = nondimensionalize(traj, geo.weights.as_deref())?;
    let mut arc = arc_length(&aug, geo.n_samples)?;
    arc.kappa = curvature(&arc, geo.curvature_window);

    let (profile, trace) = optimize_speed_profile(&arc.kappa, arc.total_length, tau_f, opt)?;
    reparam_from_profile(&arc, &profile, trace, tau_f, n_tau, Method::Totr)
}

/// Constant-speed arc-length baseline: v = S / tau_f, i.e. the linear
/// map tau(s) = s tau_f / S. Used as the TOTR initialization and as the
/// comparison point for the stiffness diagnostics.
pub fn constant_speed(
    traj: &Trajectory,
    tau_f: f64,
    n_tau: usize,
    geo: &GeometryConfig,
) -> Result<ReparamResult> {
    if n_tau < 2 {
        return Err(Error::InvalidConfig("n_tau must be >= 2".into()));
    }
    let aug = nondimensionalize(traj, geo.weights.as_deref())?;
    let mut arc = arc_length(&aug, geo.n_samples)?;
    arc.kappa = curvature(&arc, geo.curvature_window);
    let n = arc.n_samples();
    let u = vec![0.0; n];
    let a = solve_offset(&u, arc.total_length, tau_f);
    let (obj, _) = objective_and_gradient(&u, a, &arc.kappa, arc.total_length)?;
    let profile = SpeedProfile {
        v_star: u,
        offset: a,
        total_length: arc.total_length,
    };
    reparam_from_profile(&arc, &profile, vec![obj], tau_f, n_tau, Method::Totr)
}

fn reparam_from_profile(
    arc: &ArcCurve,
    profile: &SpeedProfile,
    trace: Vec<f64>,
    tau_f: f64,
    n_tau: usize,
    method: Method,
) -> Result<ReparamResult> {
    let v = profile.v();
    let n = v.len();
    let ds = profile.total_length / (n - 1) as f64;
    let mut tau_of_s = vec![0.0; n];
    for i in 1..n {
        tau_of_s[i] = tau_of_s[i - 1] + 0.5 * (1.0 / v[i - 1] + 1.0 / v[i]) * ds;
    }
    // The cumulative trapezoid reproduces the constraint quadrature, so
    // the endpoint equals tau_f up to rounding; snap it.
    let end = tau_of_s[n - 1];
    if (end - tau_f).abs() > 1e-9 * tau_f {
        return Err(Error::NonMonotoneTimeMap(format!(
            "arrival time {end} drifted from tau_f {tau_f}"
        )));
    }
    tau_of_s[n - 1] = tau_f;

    let (tau_grid, s_of_tau) = invert_time(&arc.s_grid, &tau_of_s, n_tau)?;
    let diagnostics = Diagnostics {
        objective: trace.last().copied(),
        iterations: trace.len().saturating_sub(1),
        objective_trace: trace,
        max_second_diff: 0.0,
        notes: vec![],
    };
    compose_result(arc, tau_grid, &s_of_tau, method, diagnostics)
}
