//! Input/output scaling fitted on the training set.
//!
//! Network inputs are mapped to [-1, 1] from the ranges seen in the
//! reference data; predicted derivatives are mapped back to physical
//! units from the finite-difference derivative extrema of the same data.
//! The time coordinate is additionally rescaled to [0, 5] for the loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reparam::ReparamResult;

/// One affine map: scaled = (x - center) / half_span.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AffineScale {
    pub center: f64,
    pub half_span: f64,
}

impl AffineScale {
    fn from_range(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Self {
                center: 0.5 * (hi + lo),
                half_span: 0.5 * (hi - lo),
            }
        } else {
            Self {
                center: lo,
                half_span: 1.0,
            }
        }
    }

    pub fn scale(&self, x: f64) -> f64 {
        (x - self.center) / self.half_span
    }

    pub fn descale(&self, s: f64) -> f64 {
        s * self.half_span + self.center
    }
}

/// A training case: one reparameterized trajectory and its parameter.
#[derive(Debug, Clone)]
pub struct TrainingCase {
    pub mu: f64,
    pub result: ReparamResult,
}

/// All affine maps used by the surrogate.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScalingSet {
    /// Per state component.
    pub state_in: Vec<AffineScale>,
    /// Physical-time input.
    pub time_in: AffineScale,
    /// Parameter input.
    pub mu_in: AffineScale,
    /// Per-component state derivative (dz/dtau) output maps.
    pub state_deriv: Vec<AffineScale>,
    /// ln(dt/dtau) output map; the realized dilation is
    /// exp(descale(net_output)) > 0.
    pub log_dilation: AffineScale,
    /// Loss-side time rescale: [0, t_max] to [0, 5].
    pub time_loss_factor: f64,
}

impl ScalingSet {
    /// Fit from a training set; all cases must share the tau-grid length
    /// and spacing.
    pub fn fit(cases: &[TrainingCase]) -> Result<Self> {
        if cases.is_empty() {
            return Err(Error::InvalidConfig("no training cases".into()));
        }
        let d = cases[0].result.dim();
        let n_tau = cases[0].result.n_tau();
        for c in cases {
            if c.result.dim() != d || c.result.n_tau() != n_tau {
                return Err(Error::GridMismatch(
                    "training cases must share dimensions and tau grid".into(),
                ));
            }
        }
        let dtau = cases[0].result.tau_grid[1] - cases[0].result.tau_grid[0];

        let mut state_lo = vec![f64::INFINITY; d];
        let mut state_hi = vec![f64::NEG_INFINITY; d];
        let mut t_hi = f64::NEG_INFINITY;
        let mut mu_lo = f64::INFINITY;
        let mut mu_hi = f64::NEG_INFINITY;
        let mut deriv_lo = vec![f64::INFINITY; d];
        let mut deriv_hi = vec![f64::NEG_INFINITY; d];
        let mut logdil_lo = f64::INFINITY;
        let mut logdil_hi = f64::NEG_INFINITY;

        for case in cases {
            mu_lo = mu_lo.min(case.mu);
            mu_hi = mu_hi.max(case.mu);
            let t = case.result.t_of_tau();
            t_hi = t_hi.max(*t.last().unwrap());
            let states = &case.result.y_of_tau;
            for j in 0..n_tau {
                for c in 0..d {
                    state_lo[c] = state_lo[c].min(states[j][c]);
                    state_hi[c] = state_hi[c].max(states[j][c]);
                }
                if j + 1 < n_tau {
                    for c in 0..d {
                        let fd = (states[j + 1][c] - states[j][c]) / dtau;
                        deriv_lo[c] = deriv_lo[c].min(fd);
                        deriv_hi[c] = deriv_hi[c].max(fd);
                    }
                    let dt = (t[j + 1] - t[j]) / dtau;
                    if dt > 0.0 {
                        logdil_lo = logdil_lo.min(dt.ln());
                        logdil_hi = logdil_hi.max(dt.ln());
                    }
                }
            }
        }
        if !logdil_lo.is_finite() {
            return Err(Error::DegenerateTrajectory(
                "no positive time increments in training data".into(),
            ));
        }

        Ok(Self {
            state_in: (0..d)
                .map(|c| AffineScale::from_range(state_lo[c], state_hi[c]))
                .collect(),
            time_in: AffineScale::from_range(0.0, t_hi),
            mu_in: AffineScale::from_range(mu_lo, mu_hi),
            state_deriv: (0..d)
                .map(|c| AffineScale::from_range(deriv_lo[c], deriv_hi[c]))
                .collect(),
            log_dilation: AffineScale::from_range(logdil_lo, logdil_hi),
            time_loss_factor: 5.0 / t_hi.max(f64::MIN_POSITIVE),
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_in.len()
    }

    /// Network input vector (z, t, mu) scaled to [-1, 1].
    pub fn network_input(&self, z: &[f64], t: f64, mu: f64, out: &mut Vec<f64>) {
        out.clear();
        for (c, s) in self.state_in.iter().enumerate() {
            out.push(s.scale(z[c]));
        }
        out.push(self.time_in.scale(t));
        out.push(self.mu_in.scale(mu));
    }

    /// Physical state derivative from the state-net output.
    pub fn state_derivative(&self, net_out: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (c, s) in self.state_deriv.iter().enumerate() {
            out.push(s.descale(net_out[c]));
        }
    }

    /// Positive time dilation from the dilation-net scalar output.
    pub fn dilation(&self, net_out: f64) -> f64 {
        self.log_dilation.descale(net_out).exp()
    }
}
