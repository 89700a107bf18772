//! Solver-directed time map: the clock is inherited from the adaptive
//! implicit solver's accepted-step grid. Step n of N maps to
//! tau_n = (n/N) tau_f with t(tau_n) = t_n held exactly at the knots.

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::interp::{linspace, PiecewiseCubic};

use super::{finish_result, Diagnostics, Method, ReparamResult, TimeMap};

/// Reparameterize using the trajectory's own (nonuniform) grid. The
/// input should be an adaptive solver's accepted grid; on a uniform grid
/// the construction degenerates to a linear time map.
pub fn solver_directed(traj: &Trajectory, tau_f: f64, n_tau: usize) -> Result<ReparamResult> {
    if !(tau_f > 0.0) {
        return Err(Error::InvalidConfig("tau_f must be positive".into()));
    }
    if n_tau < 2 {
        return Err(Error::InvalidConfig("n_tau must be >= 2".into()));
    }
    let n_knots = traj.len();
    let segments = (n_knots - 1) as f64;
    let tau_knots: Vec<f64> = (0..n_knots)
        .map(|n| tau_f * (n as f64 / segments))
        .collect();

    let time_map = TimeMap::from_knots(tau_knots.clone(), traj.times().to_vec())?;

    let tau_grid = linspace(0.0, tau_f, n_tau);
    let d = traj.dim();
    let mut y_of_tau = vec![Vec::with_capacity(d); n_tau];
    for c in 0..d {
        let vals = traj.component(c);
        let interp = PiecewiseCubic::pchip(&tau_knots, &vals)?;
        for (i, tau) in tau_grid.iter().enumerate() {
            y_of_tau[i].push(interp.eval(*tau));
        }
    }

    Ok(finish_result(
        Method::SolverDirected,
        tau_grid,
        y_of_tau,
        time_map,
        Diagnostics::default(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::TrajectoryMeta;

    fn traj(times: Vec<f64>) -> Trajectory {
        let states = times.iter().map(|t| vec![*t * 2.0, 1.0 - *t]).collect();
        Trajectory::new(
            times,
            states,
            1.0,
            TrajectoryMeta {
                solver: "trbdf2".into(),
                rtol: 1e-6,
                atol: 1e-9,
            },
        )
        .unwrap()
    }

    #[test]
    fn uniform_grid_gives_identity_map() {
        let r = solver_directed(&traj(vec![0.0, 0.5, 1.0]), 1.0, 11).unwrap();
        assert_eq!(r.time_map.tau_knots(), &[0.0, 0.5, 1.0]);
        for tau in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert!((r.time_map.t_at(tau) - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn skewed_grid_knots() {
        // Grid {0, 1e-6, 1} with tau_f = 2: knots {0, 1, 2}, t(1) = 1e-6.
        let r = solver_directed(&traj(vec![0.0, 1e-6, 1.0]), 2.0, 5).unwrap();
        assert_eq!(r.time_map.tau_knots(), &[0.0, 1.0, 2.0]);
        assert_eq!(r.time_map.t_at(1.0), 1e-6);
        assert_eq!(r.time_map.t_at(2.0), 1.0);
    }

    #[test]
    fn knot_spacing_is_tau_f_over_n() {
        let times = vec![0.0, 0.001, 0.002, 0.4, 0.9, 1.7];
        let r = solver_directed(&traj(times), 5.0, 8).unwrap();
        let knots = r.time_map.tau_knots();
        let expected = 5.0 / 5.0;
        for w in knots.windows(2) {
            assert!((w[1] - w[0] - expected).abs() <= 4.0 * f64::EPSILON * expected);
        }
    }

    #[test]
    fn knot_time_values_exact() {
        let times = vec![0.0, 3e-7, 5e-4, 0.123456789, 2.5];
        let t = traj(times.clone());
        let r = solver_directed(&t, 5.0, 100).unwrap();
        for (tau, t_expect) in r.time_map.tau_knots().iter().zip(times.iter()) {
            assert_eq!(r.time_map.t_at(*tau), *t_expect, "exact at knot {tau}");
        }
    }
}
