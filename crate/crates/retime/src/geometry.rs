//! Augmented-state geometry: nondimensionalization, arc-length
//! parameterization, curvature estimation and extrema detection.
//!
//! The augmented state appends physical time to the state vector so the
//! time map becomes one more curve component. All geometric operations
//! act on the nondimensionalized augmented curve.

use std::io::Write;

use crate::error::{Error, Result};
use crate::integrate::{Trajectory, TrajectoryMeta};
use crate::interp::{linspace, InterpMode, PiecewiseCubic};

/// Affine scaling of one augmented component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentScale {
    pub offset: f64,
    pub span: f64,
    /// Set when the component was constant; the span is recorded as 1 so
    /// the map stays invertible (a constant carries no geometry).
    pub zero_span: bool,
}

/// Trajectory with time appended as an extra component, min-max scaled
/// per component and weighted.
#[derive(Debug, Clone)]
pub struct AugmentedCurve {
    phi: Vec<Vec<f64>>,
    raw_t: Vec<f64>,
    scales: Vec<ComponentScale>,
    weights: Vec<f64>,
    mu: f64,
    meta: TrajectoryMeta,
}

impl AugmentedCurve {
    /// Direct construction from already-scaled parts (synthetic curves,
    /// tests).
    pub fn from_parts(
        phi: Vec<Vec<f64>>,
        raw_t: Vec<f64>,
        scales: Vec<ComponentScale>,
        weights: Vec<f64>,
        mu: f64,
        meta: TrajectoryMeta,
    ) -> Self {
        Self {
            phi,
            raw_t,
            scales,
            weights,
            mu,
            meta,
        }
    }

    /// Augmented samples, one vector of `dim + 1` weighted scaled
    /// components per time point (time last).
    pub fn phi(&self) -> &[Vec<f64>] {
        &self.phi
    }

    pub fn raw_t(&self) -> &[f64] {
        &self.raw_t
    }

    pub fn scales(&self) -> &[ComponentScale] {
        &self.scales
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    /// Number of state components (excluding the time component).
    pub fn state_dim(&self) -> usize {
        self.scales.len() - 1
    }
}

/// Per-trajectory min-max scales for each augmented component (states
/// first, time last).
pub fn fit_scales(traj: &Trajectory) -> Vec<ComponentScale> {
    let d = traj.dim();
    let mut scales = Vec::with_capacity(d + 1);
    for c in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in traj.states() {
            lo = lo.min(s[c]);
            hi = hi.max(s[c]);
        }
        scales.push(span_scale(lo, hi));
    }
    let t0 = traj.times()[0];
    let t1 = *traj.times().last().unwrap();
    scales.push(span_scale(t0, t1));
    scales
}

fn span_scale(lo: f64, hi: f64) -> ComponentScale {
    if hi > lo {
        ComponentScale {
            offset: lo,
            span: hi - lo,
            zero_span: false,
        }
    } else {
        ComponentScale {
            offset: lo,
            span: 1.0,
            zero_span: true,
        }
    }
}

/// Min-max scale every state component and time to [0, 1], then apply
/// the per-component weights (time weight last; `None` means all ones).
pub fn nondimensionalize(traj: &Trajectory, weights: Option<&[f64]>) -> Result<AugmentedCurve> {
    let scales = fit_scales(traj);
    nondimensionalize_with_scales(traj, weights, scales)
}

/// Same as [`nondimensionalize`] but with externally supplied scales
/// (global scaling across a parametric batch).
pub fn nondimensionalize_with_scales(
    traj: &Trajectory,
    weights: Option<&[f64]>,
    scales: Vec<ComponentScale>,
) -> Result<AugmentedCurve> {
    let d = traj.dim();
    if traj.len() < 2 {
        return Err(Error::DegenerateTrajectory("fewer than 2 points".into()));
    }
    if scales.len() != d + 1 {
        return Err(Error::GridMismatch(format!(
            "{} scales for dim {} (+ time)",
            scales.len(),
            d
        )));
    }
    let weights = match weights {
        Some(w) => {
            if w.len() != d + 1 {
                return Err(Error::GridMismatch(format!(
                    "{} weights for dim {} (+ time)",
                    w.len(),
                    d
                )));
            }
            if w.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::InvalidConfig("weights must be nonnegative".into()));
            }
            w.to_vec()
        }
        None => vec![1.0; d + 1],
    };
    let n = traj.len();
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(d + 1);
        for c in 0..d {
            let sc = &scales[c];
            let v = if sc.zero_span {
                0.0
            } else {
                (traj.states()[i][c] - sc.offset) / sc.span
            };
            row.push(v * weights[c]);
        }
        let sc = &scales[d];
        let tv = if sc.zero_span {
            0.0
        } else {
            (traj.times()[i] - sc.offset) / sc.span
        };
        row.push(tv * weights[d]);
        phi.push(row);
    }
    Ok(AugmentedCurve {
        phi,
        raw_t: traj.times().to_vec(),
        scales,
        weights,
        mu: traj.mu(),
        meta: traj.meta().clone(),
    })
}

/// Invert the affine maps; exact up to rounding.
pub fn dimensionalize(curve: &AugmentedCurve) -> Result<Trajectory> {
    let d = curve.state_dim();
    let mut states = Vec::with_capacity(curve.phi.len());
    for row in &curve.phi {
        let mut y = Vec::with_capacity(d);
        for c in 0..d {
            let sc = &curve.scales[c];
            let w = curve.weights[c];
            if sc.zero_span {
                y.push(sc.offset);
            } else {
                let unweighted = if w == 0.0 { 0.0 } else { row[c] / w };
                y.push(unweighted * sc.span + sc.offset);
            }
        }
        states.push(y);
    }
    Trajectory::new(curve.raw_t.clone(), states, curve.mu, curve.meta.clone())
}

/// The augmented trajectory resampled uniformly in arc length.
#[derive(Debug, Clone)]
pub struct ArcCurve {
    pub s_grid: Vec<f64>,
    /// Augmented components on the uniform s grid, `n_samples x (d+1)`.
    pub phi_of_s: Vec<Vec<f64>>,
    /// Physical time at each s, strictly increasing.
    pub t_of_s: Vec<f64>,
    /// Total arc length.
    pub total_length: f64,
    /// Curvature estimate at each grid point (unsmoothed by default).
    pub kappa: Vec<f64>,
    pub scales: Vec<ComponentScale>,
    pub weights: Vec<f64>,
    pub mu: f64,
    pub meta: TrajectoryMeta,
}

impl ArcCurve {
    pub fn n_samples(&self) -> usize {
        self.s_grid.len()
    }

    pub fn state_dim(&self) -> usize {
        self.scales.len() - 1
    }

    /// Synthetic construction for optimizer tests: a curve with a given
    /// uniform s grid and curvature profile.
    pub fn synthetic(s_grid: Vec<f64>, phi_of_s: Vec<Vec<f64>>, kappa: Vec<f64>) -> Self {
        let total = *s_grid.last().expect("nonempty grid");
        let n = s_grid.len();
        let dim = phi_of_s[0].len();
        Self {
            s_grid: s_grid.clone(),
            phi_of_s,
            t_of_s: linspace(0.0, 1.0, n),
            total_length: total,
            kappa,
            scales: vec![
                ComponentScale {
                    offset: 0.0,
                    span: 1.0,
                    zero_span: false
                };
                dim
            ],
            weights: vec![1.0; dim],
            mu: 0.0,
            meta: TrajectoryMeta {
                solver: "synthetic".into(),
                rtol: 0.0,
                atol: 0.0,
            },
        }
    }

    /// Debug dump: `s,kappa,t,phi1..phid+1`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.phi_of_s[0].len();
        write!(w, "s,kappa,t")?;
        for c in 0..dim {
            write!(w, ",phi{}", c + 1)?;
        }
        writeln!(w)?;
        for i in 0..self.s_grid.len() {
            write!(w, "{},{},{}", self.s_grid[i], self.kappa[i], self.t_of_s[i])?;
            for c in 0..dim {
                write!(w, ",{}", self.phi_of_s[i][c])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// First derivatives d(phi_c)/d(param) on a possibly nonuniform grid:
/// three-point central stencils inside, one-sided at the ends.
fn derivative_nonuniform(param: &[f64], values: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = param.len();
    let mut d = vec![0.0; n];
    d[0] = (values(1) - values(0)) / (param[1] - param[0]);
    d[n - 1] = (values(n - 1) - values(n - 2)) / (param[n - 1] - param[n - 2]);
    for i in 1..n - 1 {
        let h0 = param[i] - param[i - 1];
        let h1 = param[i + 1] - param[i];
        let f0 = values(i - 1);
        let f1 = values(i);
        let f2 = values(i + 1);
        d[i] = -h1 / (h0 * (h0 + h1)) * f0 + (h1 - h0) / (h0 * h1) * f1
            + h0 / (h1 * (h0 + h1)) * f2;
    }
    d
}

/// Cumulative arc length of the augmented curve followed by a
/// shape-preserving resample onto a uniform s grid of `n_samples` points.
///
/// The arc-length integrand is sqrt(w_t^2 + ||d(phi_state)/d(that)||^2)
/// with the scaled time as the curve parameter, accumulated by the
/// trapezoidal rule.
pub fn arc_length(curve: &AugmentedCurve, n_samples: usize) -> Result<ArcCurve> {
    if n_samples < 8 {
        return Err(Error::InvalidConfig(format!(
            "n_samples must be >= 8, got {n_samples}"
        )));
    }
    let n = curve.phi.len();
    if n < 2 {
        return Err(Error::DegenerateTrajectory("fewer than 2 points".into()));
    }
    let d = curve.state_dim();
    let w_t = curve.weights[d];
    let t_sc = &curve.scales[d];
    // Unweighted scaled time as the curve parameter.
    let that: Vec<f64> = if w_t > 0.0 {
        curve.phi.iter().map(|row| row[d] / w_t).collect()
    } else {
        curve
            .raw_t
            .iter()
            .map(|t| if t_sc.zero_span { 0.0 } else { (t - t_sc.offset) / t_sc.span })
            .collect()
    };

    let mut slopes = Vec::with_capacity(d);
    for c in 0..d {
        slopes.push(derivative_nonuniform(&that, |i| curve.phi[i][c]));
    }
    let mut integrand = vec![0.0; n];
    for i in 0..n {
        let mut sq = w_t * w_t;
        for comp in slopes.iter() {
            sq += comp[i] * comp[i];
        }
        integrand[i] = sq.sqrt();
    }
    let mut s = vec![0.0; n];
    for i in 1..n {
        s[i] = s[i - 1] + 0.5 * (integrand[i - 1] + integrand[i]) * (that[i] - that[i - 1]);
    }
    let total = s[n - 1];
    if !(total > 0.0) {
        return Err(Error::DegenerateTrajectory("zero arc length".into()));
    }

    // Collapse duplicate abscissae (possible only with zero time weight).
    let mut keep = vec![0usize];
    for i in 1..n {
        if s[i] > s[*keep.last().unwrap()] {
            keep.push(i);
        }
    }
    let s_knots: Vec<f64> = keep.iter().map(|&i| s[i]).collect();

    let s_grid = linspace(0.0, total, n_samples);
    let mut phi_of_s = vec![Vec::with_capacity(d + 1); n_samples];
    for c in 0..=d {
        let vals: Vec<f64> = keep.iter().map(|&i| curve.phi[i][c]).collect();
        let interp = PiecewiseCubic::pchip(&s_knots, &vals)?;
        for (i, sv) in s_grid.iter().enumerate() {
            phi_of_s[i].push(interp.eval(*sv));
        }
    }
    let t_vals: Vec<f64> = keep.iter().map(|&i| curve.raw_t[i]).collect();
    let t_interp = PiecewiseCubic::pchip(&s_knots, &t_vals)?;
    let t_of_s = t_interp.eval_many(&s_grid);

    let mut arc = ArcCurve {
        s_grid,
        phi_of_s,
        t_of_s,
        total_length: total,
        kappa: vec![],
        scales: curve.scales.clone(),
        weights: curve.weights.clone(),
        mu: curve.mu,
        meta: curve.meta.clone(),
    };
    arc.kappa = curvature(&arc, 1);
    Ok(arc)
}

/// Curvature estimate kappa(s) = ||d2 phi / ds2|| by central second
/// differences on the uniform grid (endpoints copy their neighbour).
///
/// The moving average of odd width `smoothing_window` is applied to the
/// signed per-component second differences before taking the norm, so
/// zero-mean noise cancels instead of accumulating.
pub fn curvature(arc: &ArcCurve, smoothing_window: usize) -> Vec<f64> {
    let n = arc.s_grid.len();
    let dim = arc.phi_of_s[0].len();
    let ds = arc.s_grid[1] - arc.s_grid[0];
    let mut dd = vec![vec![0.0; n]; dim];
    for c in 0..dim {
        for i in 1..n - 1 {
            dd[c][i] = (arc.phi_of_s[i + 1][c] - 2.0 * arc.phi_of_s[i][c]
                + arc.phi_of_s[i - 1][c])
                / (ds * ds);
        }
        dd[c][0] = dd[c][1];
        dd[c][n - 1] = dd[c][n - 2];
    }

    if smoothing_window > 1 {
        let half = smoothing_window / 2;
        for comp in dd.iter_mut() {
            let mut smoothed = vec![0.0; n];
            for i in 0..n {
                let lo = i.saturating_sub(half);
                let hi = (i + half).min(n - 1);
                let mut acc = 0.0;
                for k in lo..=hi {
                    acc += comp[k];
                }
                smoothed[i] = acc / (hi - lo + 1) as f64;
            }
            *comp = smoothed;
        }
    }

    (0..n)
        .map(|i| dd.iter().map(|comp| comp[i] * comp[i]).sum::<f64>().sqrt())
        .collect()
}

/// Arc-length locations of state-component extrema (time excluded):
/// interior sign changes of the first difference, pruned by a relative
/// prominence filter, sorted, deduplicated within one grid cell.
pub fn find_extrema(arc: &ArcCurve) -> Vec<f64> {
    const PROMINENCE_FRACTION: f64 = 1e-3;
    let n = arc.s_grid.len();
    let d = arc.state_dim();
    let ds = arc.s_grid[1] - arc.s_grid[0];
    let mut locations: Vec<f64> = Vec::new();

    for c in 0..d {
        let v: Vec<f64> = arc.phi_of_s.iter().map(|row| row[c]).collect();
        let range = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - v.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(range > 0.0) {
            continue;
        }
        let threshold = PROMINENCE_FRACTION * range;

        // Candidate extremum indices from slope sign flips, carrying the
        // sign across flat runs.
        let mut cands: Vec<usize> = Vec::new();
        let mut last_sign = 0i8;
        for i in 0..n - 1 {
            let diff = v[i + 1] - v[i];
            let sign = if diff > 0.0 {
                1
            } else if diff < 0.0 {
                -1
            } else {
                0
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    cands.push(i);
                }
                last_sign = sign;
            }
        }

        // Iteratively drop the weakest candidate until every survivor has
        // both flanking excursions above the threshold.
        while !cands.is_empty() {
            let mut weakest = 0;
            let mut weakest_prom = f64::INFINITY;
            for (k, &idx) in cands.iter().enumerate() {
                let left = if k == 0 { v[0] } else { v[cands[k - 1]] };
                let right = if k + 1 == cands.len() {
                    v[n - 1]
                } else {
                    v[cands[k + 1]]
                };
                let prom = (v[idx] - left).abs().min((v[idx] - right).abs());
                if prom < weakest_prom {
                    weakest_prom = prom;
                    weakest = k;
                }
            }
            if weakest_prom >= threshold {
                break;
            }
            cands.remove(weakest);
        }

        for idx in cands {
            locations.push(arc.s_grid[idx]);
        }
    }

    locations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut dedup: Vec<f64> = Vec::new();
    for s in locations {
        if dedup.last().map_or(true, |last| s - last > ds) {
            dedup.push(s);
        }
    }
    dedup
}

/// Resample `(xs, ys)` onto a uniform grid of `n` points spanning the
/// same range.
pub fn resample_uniform(
    xs: &[f64],
    ys: &[f64],
    n: usize,
    mode: InterpMode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::InvalidConfig("resample needs n >= 2".into()));
    }
    let interp = PiecewiseCubic::with_mode(xs, ys, mode)?;
    let grid = linspace(xs[0], *xs.last().unwrap(), n);
    let vals = interp.eval_many(&grid);
    Ok((grid, vals))
}
