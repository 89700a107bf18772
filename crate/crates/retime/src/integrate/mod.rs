//! Reference-trajectory generation.
//!
//! Fixed-step explicit integrators serve the stability experiments and
//! surrogate rollouts; the adaptive implicit TR-BDF2 solver produces the
//! accepted-step grids that feed the solver-directed reparameterization.

mod trbdf2;

pub use trbdf2::integrate_implicit_adaptive;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::OdeSystem;

/// Right-hand side + Jacobian of a parameterized ODE.
///
/// The default Jacobian is a central finite difference; the benchmark
/// systems override it analytically.
pub trait Ode {
    fn dim(&self) -> usize;

    fn y0(&self, mu: f64) -> Vec<f64>;

    fn rhs(&self, y: &[f64], t: f64, mu: f64, out: &mut [f64]);

    fn jacobian(&self, y: &[f64], t: f64, mu: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut j = DMatrix::zeros(d, d);
        let mut fp = vec![0.0; d];
        let mut fm = vec![0.0; d];
        let mut yw = y.to_vec();
        for col in 0..d {
            let h = 1e-7 * (1.0 + y[col].abs());
            yw[col] = y[col] + h;
            self.rhs(&yw, t, mu, &mut fp);
            yw[col] = y[col] - h;
            self.rhs(&yw, t, mu, &mut fm);
            yw[col] = y[col];
            for row in 0..d {
                j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        j
    }
}

impl Ode for OdeSystem {
    fn dim(&self) -> usize {
        OdeSystem::dim(self)
    }

    fn y0(&self, mu: f64) -> Vec<f64> {
        OdeSystem::y0(self, mu)
    }

    fn rhs(&self, y: &[f64], t: f64, mu: f64, out: &mut [f64]) {
        OdeSystem::rhs(self, y, t, mu, out)
    }

    fn jacobian(&self, y: &[f64], t: f64, mu: f64) -> DMatrix<f64> {
        OdeSystem::jacobian(self, y, t, mu)
    }
}

/// Metadata describing how a trajectory was produced.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrajectoryMeta {
    pub solver: String,
    pub rtol: f64,
    pub atol: f64,
}

/// A sampled ODE solution: ordered (t, y) pairs plus the parameter mu.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    mu: f64,
    meta: TrajectoryMeta,
}

impl Trajectory {
    /// Validates the invariants: t0 = 0, strictly increasing times,
    /// consistent lengths, finite entries.
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>, mu: f64, meta: TrajectoryMeta) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::DegenerateTrajectory(format!(
                "need at least 2 samples, got {}",
                times.len()
            )));
        }
        if times.len() != states.len() {
            return Err(Error::GridMismatch(format!(
                "{} times vs {} states",
                times.len(),
                states.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::DegenerateTrajectory(format!(
                "trajectories start at t = 0, got {}",
                times[0]
            )));
        }
        let dim = states[0].len();
        for (i, t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite { step: i });
            }
            if i > 0 && !(times[i] > times[i - 1]) {
                return Err(Error::NonMonotoneAbscissa { index: i });
            }
            if states[i].len() != dim {
                return Err(Error::GridMismatch(format!(
                    "state {} has {} components, expected {dim}",
                    i,
                    states[i].len()
                )));
            }
            if states[i].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: i });
            }
        }
        Ok(Self { times, states, mu, meta })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Component `c` as a contiguous series.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[c]).collect()
    }
}

/// Fixed-step explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplicitScheme {
    Euler,
    Rk4,
}

impl ExplicitScheme {
    pub fn name(&self) -> &'static str {
        match self {
            ExplicitScheme::Euler => "euler",
            ExplicitScheme::Rk4 => "rk4",
        }
    }
}

/// Adaptive implicit solver settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl SolverConfig {
    /// Defaults scaled to an integration horizon.
    pub fn for_horizon(rtol: f64, atol: f64, horizon: f64) -> Self {
        Self {
            rtol,
            atol,
            h_init: 1e-8 * horizon,
            h_min: 1e-15 * horizon,
            h_max: horizon,
            max_steps: 2_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < h_min <= h_init <= h_max, got {:.3e} / {:.3e} / {:.3e}",
                self.h_min, self.h_init, self.h_max
            )));
        }
        Ok(())
    }
}

/// Fixed-step explicit integration on a uniform grid of `n_steps + 1`
/// points over `[0, horizon]`.
///
/// Non-finite states are an expected outcome in the stiffness
/// demonstrations; they are reported with the failing step index rather
/// than clipped.
pub fn integrate_explicit<S: Ode>(
    system: &S,
    mu: f64,
    scheme: ExplicitScheme,
    n_steps: usize,
    horizon: f64,
) -> Result<Trajectory> {
    if n_steps < 1 {
        return Err(Error::InvalidConfig("n_steps must be >= 1".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    let y0 = system.y0(mu);
    let (times, states) = integrate_explicit_from(system, mu, scheme, n_steps, horizon, y0)?;
    Ok(Trajectory {
        times,
        states,
        mu,
        meta: TrajectoryMeta {
            solver: scheme.name().to_string(),
            rtol: 0.0,
            atol: 0.0,
        },
    })
}

/// Same as [`integrate_explicit`] but from an explicit initial state,
/// returning the raw grid.
pub fn integrate_explicit_from<S: Ode>(
    system: &S,
    mu: f64,
    scheme: ExplicitScheme,
    n_steps: usize,
    horizon: f64,
    y0: Vec<f64>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = system.dim();
    assert_eq!(y0.len(), d, "initial state dimension mismatch");
    let h = horizon / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut y = y0;
    times.push(0.0);
    states.push(y.clone());

    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];

    for step in 1..=n_steps {
        let t = h * (step - 1) as f64;
        match scheme {
            ExplicitScheme::Euler => {
                system.rhs(&y, t, mu, &mut k1);
                for i in 0..d {
                    y[i] += h * k1[i];
                }
            }
            ExplicitScheme::Rk4 => {
                system.rhs(&y, t, mu, &mut k1);
                for i in 0..d {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                system.rhs(&tmp, t + 0.5 * h, mu, &mut k2);
                for i in 0..d {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                system.rhs(&tmp, t + 0.5 * h, mu, &mut k3);
                for i in 0..d {
                    tmp[i] = y[i] + h * k3[i];
                }
                system.rhs(&tmp, t + h, mu, &mut k4);
                for i in 0..d {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        let t_next = if step == n_steps { horizon } else { h * step as f64 };
        times.push(t_next);
        states.push(y.clone());
    }
    Ok((times, states))
}
