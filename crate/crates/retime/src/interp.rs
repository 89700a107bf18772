//! Piecewise-cubic interpolation in Hermite form.
//!
//! Two slope constructions are provided: `pchip` (Fritsch–Carlson
//! monotonicity-preserving, no overshoot on any source interval) and
//! `natural` (C² natural cubic spline). The extrema-based time map
//! additionally builds curves from explicit knot slopes via `hermite`.

use crate::error::{Error, Result};

/// A piecewise cubic curve stored as knot values plus knot slopes.
#[derive(Debug, Clone)]
pub struct PiecewiseCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

/// Interpolation family for [`PiecewiseCubic`] construction and resampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpMode {
    /// Monotonicity-preserving piecewise cubic (PCHIP).
    ShapePreserving,
    /// C² natural cubic spline.
    Cubic,
}

fn check_increasing(xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::DegenerateTrajectory(format!(
            "need at least 2 points, got {}",
            xs.len()
        )));
    }
    for i in 1..xs.len() {
        if !(xs[i] > xs[i - 1]) {
            return Err(Error::NonMonotoneAbscissa { index: i });
        }
    }
    Ok(())
}

impl PiecewiseCubic {
    /// Fritsch–Carlson shape-preserving slopes.
    pub fn pchip(xs: &[f64], ys: &[f64]) -> Result<Self> {
        check_increasing(xs)?;
        if ys.len() != xs.len() {
            return Err(Error::GridMismatch(format!(
                "xs has {} points, ys has {}",
                xs.len(),
                ys.len()
            )));
        }
        let n = xs.len();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            let d = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            slopes[0] = d;
            slopes[1] = d;
        } else {
            let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
            let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
            for i in 1..n - 1 {
                let (d0, d1) = (delta[i - 1], delta[i]);
                if d0 == 0.0 || d1 == 0.0 || (d0 > 0.0) != (d1 > 0.0) {
                    slopes[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes,
        })
    }

    /// Natural cubic spline (second derivative zero at both ends),
    /// converted to Hermite form.
    pub fn natural(xs: &[f64], ys: &[f64]) -> Result<Self> {
        check_increasing(xs)?;
        if ys.len() != xs.len() {
            return Err(Error::GridMismatch(format!(
                "xs has {} points, ys has {}",
                xs.len(),
                ys.len()
            )));
        }
        let n = xs.len();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            let d = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            slopes[0] = d;
            slopes[1] = d;
            return Ok(Self {
                xs: xs.to_vec(),
                ys: ys.to_vec(),
                slopes,
            });
        }
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        // Tridiagonal system for interior second derivatives, M_0 = M_{n-1} = 0.
        let m = n - 2;
        let mut diag = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * (delta[i + 1] - delta[i]);
        }
        let sub: Vec<f64> = (1..m).map(|i| h[i]).collect();
        let sup: Vec<f64> = (0..m.saturating_sub(1)).map(|i| h[i + 1]).collect();
        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let mut m2 = vec![0.0; n];
        m2[1..n - 1].copy_from_slice(&inner);

        for i in 0..n - 1 {
            slopes[i] = delta[i] - h[i] * (2.0 * m2[i] + m2[i + 1]) / 6.0;
        }
        slopes[n - 1] = delta[n - 2] + h[n - 2] * (m2[n - 2] + 2.0 * m2[n - 1]) / 6.0;
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes,
        })
    }

    /// Piecewise cubic from explicit knot slopes.
    pub fn hermite(xs: &[f64], ys: &[f64], slopes: &[f64]) -> Result<Self> {
        check_increasing(xs)?;
        if ys.len() != xs.len() || slopes.len() != xs.len() {
            return Err(Error::GridMismatch(
                "hermite arrays must share one length".into(),
            ));
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes: slopes.to_vec(),
        })
    }

    pub fn with_mode(xs: &[f64], ys: &[f64], mode: InterpMode) -> Result<Self> {
        match mode {
            InterpMode::ShapePreserving => Self::pchip(xs, ys),
            InterpMode::Cubic => Self::natural(xs, ys),
        }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn segment(&self, x: f64) -> usize {
        // Largest i with xs[i] <= x, clamped to a valid segment start.
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite abscissa"))
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    /// Evaluate at `x`. Outside the knot range the nearest endpoint value
    /// is returned; knot values are reproduced exactly.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let xi = (x - self.xs[i]) / h;
        // Factored basis: exact at xi = 0 and xi = 1.
        let om = 1.0 - xi;
        let h00 = (1.0 + 2.0 * xi) * om * om;
        let h10 = xi * om * om;
        let h01 = xi * xi * (3.0 - 2.0 * xi);
        let h11 = xi * xi * (xi - 1.0);
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Derivative dy/dx at `x` (zero outside the knot range).
    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        if x == self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let xi = (x - self.xs[i]) / h;
        let d00 = 6.0 * xi * (xi - 1.0);
        let d10 = (3.0 * xi - 1.0) * (xi - 1.0);
        let d01 = -d00;
        let d11 = xi * (3.0 * xi - 2.0);
        d00 * self.ys[i] / h + d10 * self.slopes[i] + d01 * self.ys[i + 1] / h + d11 * self.slopes[i + 1]
    }

    /// Evaluate on many points.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

// Fritsch–Carlson one-sided boundary slope with monotonicity clamps.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    if d0 == 0.0 {
        return 0.0;
    }
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m > 0.0) != (d0 > 0.0) {
        0.0
    } else if (d0 > 0.0) != (d1 > 0.0) && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Thomas algorithm. `sub`/`sup` have length n-1, `diag`/`rhs` length n.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return vec![];
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { sup[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = sup[i] / m;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Uniform grid of `n` points spanning `[a, b]` with exact endpoints.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least 2 points");
    let mut out = Vec::with_capacity(n);
    let step = (b - a) / (n - 1) as f64;
    for i in 0..n {
        out.push(a + step * i as f64);
    }
    out[n - 1] = b;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_data_reproduced_exactly() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        for mode in [InterpMode::ShapePreserving, InterpMode::Cubic] {
            let c = PiecewiseCubic::with_mode(&xs, &ys, mode).unwrap();
            for k in 0..=50 {
                let x = 5.0 * k as f64 / 50.0;
                let expect = 2.0 * x + 1.0;
                assert!(
                    (c.eval(x) - expect).abs() <= 1e-14 * expect.abs(),
                    "mode {mode:?} at x={x}: {} vs {expect}",
                    c.eval(x)
                );
            }
        }
    }

    #[test]
    fn knot_values_exact() {
        let xs = [0.0, 0.3, 1.1, 2.0, 5.5];
        let ys = [1.0, -2.0, 7.0, 0.25, 3.0];
        for mode in [InterpMode::ShapePreserving, InterpMode::Cubic] {
            let c = PiecewiseCubic::with_mode(&xs, &ys, mode).unwrap();
            for (x, y) in xs.iter().zip(ys.iter()) {
                assert_eq!(c.eval(*x), *y);
            }
        }
    }

    #[test]
    fn pchip_no_overshoot_per_interval() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [0.0, 0.0, 1.0, 10.0, 10.5];
        let c = PiecewiseCubic::pchip(&xs, &ys).unwrap();
        for i in 0..xs.len() - 1 {
            let (lo, hi) = (ys[i].min(ys[i + 1]), ys[i].max(ys[i + 1]));
            for k in 0..=100 {
                let x = xs[i] + (xs[i + 1] - xs[i]) * k as f64 / 100.0;
                let v = c.eval(x);
                assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "overshoot at {x}: {v}");
            }
        }
    }

    #[test]
    fn natural_spline_sin_accuracy() {
        // 50 samples resampled to 500: max error vs analytic < 1e-5.
        let xs = linspace(0.0, std::f64::consts::PI * 2.0, 50);
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let c = PiecewiseCubic::natural(&xs, &ys).unwrap();
        let fine = linspace(0.0, std::f64::consts::PI * 2.0, 500);
        let mut max_err: f64 = 0.0;
        for x in fine {
            max_err = max_err.max((c.eval(x) - x.sin()).abs());
        }
        assert!(max_err < 1e-5, "max spline error {max_err}");
    }

    #[test]
    fn non_monotone_abscissa_rejected() {
        let xs = [0.0, 1.0, 1.0, 2.0];
        let ys = [0.0, 1.0, 2.0, 3.0];
        match PiecewiseCubic::pchip(&xs, &ys) {
            Err(Error::NonMonotoneAbscissa { index: 2 }) => {}
            other => panic!("expected NonMonotoneAbscissa, got {other:?}"),
        }
    }

    #[test]
    fn deriv_matches_finite_difference() {
        let xs = linspace(0.0, 3.0, 17);
        let ys: Vec<f64> = xs.iter().map(|x| (x * 1.3).cos() + 0.2 * x * x).collect();
        for mode in [InterpMode::ShapePreserving, InterpMode::Cubic] {
            let c = PiecewiseCubic::with_mode(&xs, &ys, mode).unwrap();
            for k in 1..60 {
                // Offset keeps the FD stencil away from knots, where the
                // second derivative of the piecewise cubic jumps.
                let x = 3.0 * k as f64 / 60.0 - 0.004;
                let h = 1e-6;
                let fd = (c.eval(x + h) - c.eval(x - h)) / (2.0 * h);
                assert!((c.deriv(x) - fd).abs() < 1e-6, "mode {mode:?} x={x}");
            }
        }
    }

    proptest! {
        #[test]
        fn pchip_preserves_monotonicity(raw in prop::collection::vec(0.01f64..1.0, 3..20)) {
            // Build strictly increasing data from positive increments.
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (i, dy) in raw.iter().enumerate() {
                xs.push((i + 1) as f64);
                ys.push(ys.last().unwrap() + dy);
            }
            let c = PiecewiseCubic::pchip(&xs, &ys).unwrap();
            let fine = linspace(0.0, *xs.last().unwrap(), 400);
            for w in fine.windows(2) {
                prop_assert!(c.eval(w[1]) >= c.eval(w[0]) - 1e-12);
            }
        }

        #[test]
        fn linear_random_reproduced(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let xs = linspace(-1.0, 2.0, 9);
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let c = PiecewiseCubic::pchip(&xs, &ys).unwrap();
            for k in 0..=30 {
                let x = -1.0 + 3.0 * k as f64 / 30.0;
                prop_assert!((c.eval(x) - (a * x + b)).abs() < 1e-12);
            }
        }
    }
}
