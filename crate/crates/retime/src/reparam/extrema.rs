//! Extrema-based time map: cubic Hermite segments in arc length with
//! zero slope at every knot — the endpoints and each detected extremum —
//! so that the clock slows to a halt where the state turns around.

use crate::error::{Error, Result};
use crate::geometry::{arc_length, find_extrema, nondimensionalize, ArcCurve};
use crate::integrate::Trajectory;
use crate::interp::PiecewiseCubic;

use super::{compose_result, invert_time, Diagnostics, GeometryConfig, Method, ReparamResult};

/// Knot locations and the tau(s) curve with tau(s_k) = (s_k/S) tau_f and
/// tau'(s_k) = 0 at every knot including both endpoints.
pub fn extrema_tau_of_s(arc: &ArcCurve, tau_f: f64) -> Result<(Vec<f64>, PiecewiseCubic)> {
    let total = arc.total_length;
    let ds = arc.s_grid[1] - arc.s_grid[0];
    let mut knots = vec![0.0];
    for s in find_extrema(arc) {
        if s > ds && s < total - ds {
            knots.push(s);
        }
    }
    knots.push(total);

    let tau_values: Vec<f64> = knots.iter().map(|s| s / total * tau_f).collect();
    let slopes = vec![0.0; knots.len()];
    let curve = PiecewiseCubic::hermite(&knots, &tau_values, &slopes)?;
    Ok((knots, curve))
}

/// Reparameterize by the extrema construction.
pub fn extrema_based(
    traj: &Trajectory,
    tau_f: f64,
    n_tau: usize,
    geo: &GeometryConfig,
) -> Result<ReparamResult> {
    if !(tau_f > 0.0) {
        return Err(Error::InvalidConfig("tau_f must be positive".into()));
    }
    if n_tau < 2 {
        return Err(Error::InvalidConfig("n_tau must be >= 2".into()));
    }
    let aug = nondimensionalize(traj, geo.weights.as_deref())?;
    let arc = arc_length(&aug, geo.n_samples)?;

    let (knots, curve) = extrema_tau_of_s(&arc, tau_f)?;
    let mut tau_of_s: Vec<f64> = arc.s_grid.iter().map(|s| curve.eval(*s)).collect();

    // Zero-slope Hermite segments between increasing values are monotone
    // by the Fritsch-Carlson bound; the check guards the numerics anyway.
    let mut diagnostics = Diagnostics::default();
    let monotone = tau_of_s.windows(2).all(|w| w[1] >= w[0]);
    if !monotone {
        diagnostics.notes.push(
            "hermite time map lost monotonicity; fell back to monotone knot slopes".to_string(),
        );
        let tau_values: Vec<f64> = knots.iter().map(|s| s / arc.total_length * tau_f).collect();
        let fallback = PiecewiseCubic::pchip(&knots, &tau_values)?;
        tau_of_s = arc.s_grid.iter().map(|s| fallback.eval(*s)).collect();
    }

    let (tau_grid, s_of_tau) = invert_time(&arc.s_grid, &tau_of_s, n_tau)?;
    compose_result(&arc, tau_grid, &s_of_tau, Method::ExtremaBased, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArcCurve;
    use crate::interp::linspace;

    #[test]
    fn no_extrema_gives_smoothstep() {
        // Monotone curve: single segment with tau(0)=0, tau(S)=tau_f and
        // zero end slopes, i.e. tau(s) = tau_f (3u^2 - 2u^3), u = s/S.
        let n = 256;
        let total = 2.0;
        let s = linspace(0.0, total, n);
        let phi: Vec<Vec<f64>> = s.iter().map(|v| vec![*v / total, *v / total]).collect();
        let arc = ArcCurve::synthetic(s, phi, vec![0.0; n]);
        let tau_f = 5.0;
        let (knots, curve) = extrema_tau_of_s(&arc, tau_f).unwrap();
        assert_eq!(knots.len(), 2);
        assert!((curve.eval(total / 2.0) - tau_f / 2.0).abs() < 1e-12);
        for k in 0..=16 {
            let u = k as f64 / 16.0;
            let expect = tau_f * (3.0 * u * u - 2.0 * u * u * u);
            assert!(
                (curve.eval(u * total) - expect).abs() < 1e-12,
                "u = {u}"
            );
        }
    }

    #[test]
    fn knot_conditions_hold() {
        // One extremum at S/2: tau(S/2) = tau_f/2 and tau'(S/2) = 0.
        let n = 1024;
        let total = 2.0;
        let s = linspace(0.0, total, n);
        let phi: Vec<Vec<f64>> = s
            .iter()
            .map(|v| vec![(std::f64::consts::PI * v / total).sin(), *v / total])
            .collect();
        let ds = s[1] - s[0];
        let arc = ArcCurve::synthetic(s, phi, vec![0.0; n]);
        let tau_f = 5.0;
        let (knots, curve) = extrema_tau_of_s(&arc, tau_f).unwrap();
        assert_eq!(knots.len(), 3, "{knots:?}");
        let s1 = knots[1];
        assert!((s1 - total / 2.0).abs() < 2.0 * ds);
        for (k, sk) in knots.iter().enumerate() {
            let expect = sk / total * tau_f;
            assert!(
                (curve.eval(*sk) - expect).abs() < 1e-12 * tau_f,
                "knot {k} value"
            );
            assert!(
                curve.deriv(*sk).abs() < 1e-10 * tau_f / total,
                "knot {k} slope {}",
                curve.deriv(*sk)
            );
        }
    }

    #[test]
    fn interior_value_matches_hermite_basis_oracle() {
        // First segment [0, s1] with s1 = S/3, evaluated at s = S/6:
        // independent evaluation from the Hermite basis polynomials.
        let n = 4096;
        let total = 3.0;
        let s = linspace(0.0, total, n);
        // Peak close to S/3 in arc position: use a tent-like smooth bump.
        let s1_target = total / 3.0;
        let phi: Vec<Vec<f64>> = s
            .iter()
            .map(|v| {
                let x = (v - s1_target) / total * std::f64::consts::PI;
                vec![-(x * x) * 0.5 + 1.0, *v / total]
            })
            .collect();
        let arc = ArcCurve::synthetic(s.clone(), phi, vec![0.0; n]);
        let tau_f = 7.0;
        let (knots, curve) = extrema_tau_of_s(&arc, tau_f).unwrap();
        assert_eq!(knots.len(), 3);
        let s1 = knots[1];
        assert!((s1 - s1_target).abs() < 2.0 * (s[1] - s[0]));

        // Oracle: cubic Hermite basis formula on [0, s1] with values
        // (0, s1/S*tau_f) and zero slopes.
        let eval_point = s1 / 2.0;
        let xi = eval_point / s1;
        let h00 = 2.0 * xi.powi(3) - 3.0 * xi.powi(2) + 1.0;
        let h01 = -2.0 * xi.powi(3) + 3.0 * xi.powi(2);
        let oracle = h00 * 0.0 + h01 * (s1 / total * tau_f);
        assert!(
            (curve.eval(eval_point) - oracle).abs() < 1e-12 * tau_f,
            "{} vs {oracle}",
            curve.eval(eval_point)
        );
    }
}
