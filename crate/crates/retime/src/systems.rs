//! Benchmark stiff ODE systems behind a uniform interface.
//!
//! Three systems are provided: a parameterized stiff linear system (`sls`),
//! the Van der Pol oscillator in its stiff scaling (`vdp`), and the HIRES
//! chemical kinetics model (`hires`). In every case the parameter `mu`
//! controls the stiffness ratio.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Orthogonal mixing matrix `A` and decay-rate block `B(mu)` of the
/// stiff linear system `dy/dt = A B(mu) A^T y`.
#[derive(Debug, Clone)]
pub struct SlsMatrices {
    a: DMatrix<f64>,
}

impl SlsMatrices {
    pub fn new() -> Self {
        // QR of a fixed dense seed matrix; R's diagonal is forced positive
        // so A is unique across implementations.
        let seed = DMatrix::from_row_slice(
            5,
            5,
            &[
                5.0, 1.0, -1.0, 0.0, 0.0, //
                -1.0, 3.0, -10.0, 1.0, 2.0, //
                2.0, -1.0, 5.0, 1.0, -1.0, //
                0.0, 1.0, 2.0, 3.0, -3.0, //
                1.0, 12.0, -1.0, -2.0, 5.0,
            ],
        );
        let qr = seed.qr();
        let r = qr.r();
        let mut a = qr.q();
        for i in 0..5 {
            if r[(i, i)] < 0.0 {
                for k in 0..5 {
                    a[(k, i)] = -a[(k, i)];
                }
            }
        }
        Self { a }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Block matrix of parameter-dependent decay rates: a 2x2
    /// rotation-decay block scaled by `mu` plus three diagonal entries.
    pub fn b(&self, mu: f64) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(5, 5);
        b[(0, 0)] = -0.25 * mu;
        b[(0, 1)] = 0.97 * mu;
        b[(1, 0)] = -0.97 * mu;
        b[(1, 1)] = -0.25 * mu;
        b[(2, 2)] = -10.0 * mu / (mu.powf(0.3) + 10.0);
        b[(3, 3)] = -100.0 * mu / (mu.powf(0.6) + 100.0);
        b[(4, 4)] = -mu / (mu + 1.0);
        b
    }

    /// Full system matrix `A B(mu) A^T`.
    pub fn system_matrix(&self, mu: f64) -> DMatrix<f64> {
        &self.a * self.b(mu) * self.a.transpose()
    }
}

impl Default for SlsMatrices {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
enum SystemKind {
    Sls(SlsMatrices),
    Vdp,
    Hires,
}

/// A benchmark ODE system: right-hand side, Jacobian, initial condition,
/// default horizon and mu grids.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    name: &'static str,
    dim: usize,
    kind: SystemKind,
    training_exponents: Vec<f64>,
    test_exponents: Vec<f64>,
    y0_override: Option<Vec<f64>>,
    horizon_override: Option<f64>,
}

impl OdeSystem {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// dy/dt at state `y`, time `t`, parameter `mu`, written into `out`.
    pub fn rhs(&self, y: &[f64], _t: f64, mu: f64, out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            SystemKind::Sls(m) => {
                // A (B (A^T y)) without forming the product matrix.
                let a = m.a();
                let mut w = [0.0; 5];
                for i in 0..5 {
                    let mut acc = 0.0;
                    for k in 0..5 {
                        acc += a[(k, i)] * y[k];
                    }
                    w[i] = acc;
                }
                let u = [
                    -0.25 * mu * w[0] + 0.97 * mu * w[1],
                    -0.97 * mu * w[0] - 0.25 * mu * w[1],
                    -10.0 * mu / (mu.powf(0.3) + 10.0) * w[2],
                    -100.0 * mu / (mu.powf(0.6) + 100.0) * w[3],
                    -mu / (mu + 1.0) * w[4],
                ];
                for i in 0..5 {
                    let mut acc = 0.0;
                    for k in 0..5 {
                        acc += a[(i, k)] * u[k];
                    }
                    out[i] = acc;
                }
            }
            SystemKind::Vdp => {
                out[0] = y[1];
                out[1] = mu * mu * ((1.0 - y[0] * y[0]) * y[1] - y[0]);
            }
            SystemKind::Hires => {
                out[0] = -1.71 * y[0] + 0.43 * y[1] + 8.32 * y[2] + 0.0007;
                out[1] = 1.71 * y[0] - 8.75 * y[1];
                out[2] = -10.03 * y[2] + 0.43 * y[3] + 0.035 * y[4];
                out[3] = 8.32 * y[1] + 1.71 * y[2] - 1.12 * y[3];
                out[4] = -1.745 * y[4] + 0.43 * y[5] + 0.43 * y[6];
                out[5] = -mu * y[5] * y[7] + 0.69 * y[3] + 1.71 * y[4] - 0.43 * y[5] + 0.69 * y[6];
                out[6] = mu * y[5] * y[7] - 1.81 * y[6];
                out[7] = -mu * y[5] * y[7] + 1.81 * y[6];
            }
        }
    }

    pub fn rhs_alloc(&self, y: &[f64], t: f64, mu: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.rhs(y, t, mu, &mut out);
        out
    }

    /// Jacobian d(rhs)/dy.
    pub fn jacobian(&self, y: &[f64], _t: f64, mu: f64) -> DMatrix<f64> {
        match &self.kind {
            SystemKind::Sls(m) => m.system_matrix(mu),
            SystemKind::Vdp => {
                let m2 = mu * mu;
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        0.0,
                        1.0,
                        m2 * (-2.0 * y[0] * y[1] - 1.0),
                        m2 * (1.0 - y[0] * y[0]),
                    ],
                )
            }
            SystemKind::Hires => {
                let mut j = DMatrix::zeros(8, 8);
                j[(0, 0)] = -1.71;
                j[(0, 1)] = 0.43;
                j[(0, 2)] = 8.32;
                j[(1, 0)] = 1.71;
                j[(1, 1)] = -8.75;
                j[(2, 2)] = -10.03;
                j[(2, 3)] = 0.43;
                j[(2, 4)] = 0.035;
                j[(3, 1)] = 8.32;
                j[(3, 2)] = 1.71;
                j[(3, 3)] = -1.12;
                j[(4, 4)] = -1.745;
                j[(4, 5)] = 0.43;
                j[(4, 6)] = 0.43;
                j[(5, 3)] = 0.69;
                j[(5, 4)] = 1.71;
                j[(5, 5)] = -mu * y[7] - 0.43;
                j[(5, 6)] = 0.69;
                j[(5, 7)] = -mu * y[5];
                j[(6, 5)] = mu * y[7];
                j[(6, 6)] = -1.81;
                j[(6, 7)] = mu * y[5];
                j[(7, 5)] = -mu * y[7];
                j[(7, 6)] = 1.81;
                j[(7, 7)] = -mu * y[5];
                j
            }
        }
    }

    /// Initial condition (independent of t).
    pub fn y0(&self, _mu: f64) -> Vec<f64> {
        if let Some(y0) = &self.y0_override {
            return y0.clone();
        }
        match self.kind {
            SystemKind::Sls(_) => vec![1.0, 0.0, 0.0, 0.0, 0.0],
            SystemKind::Vdp => vec![2.0, 0.0],
            SystemKind::Hires => vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0057],
        }
    }

    /// Default integration horizon in seconds.
    pub fn default_horizon(&self, mu: f64) -> f64 {
        if let Some(t) = self.horizon_override {
            return t;
        }
        match self.kind {
            // 10 / slowest decay rate, capped at 10 s. The slowest SLS mode
            // decays at mu/(mu+1) < 1 so the cap always binds.
            SystemKind::Sls(_) => (10.0 * (mu + 1.0) / mu).min(10.0),
            SystemKind::Vdp => 2.0 * vdp_period_estimate(mu),
            SystemKind::Hires => 450.0,
        }
    }

    /// mu grid used to generate training data (log-spaced).
    pub fn training_mus(&self) -> Vec<f64> {
        self.training_exponents.iter().map(|e| 10f64.powf(*e)).collect()
    }

    /// Off-reference test mu grid.
    pub fn test_mus(&self) -> Vec<f64> {
        self.test_exponents.iter().map(|e| 10f64.powf(*e)).collect()
    }

    pub fn training_exponents(&self) -> &[f64] {
        &self.training_exponents
    }

    pub fn test_exponents(&self) -> &[f64] {
        &self.test_exponents
    }

    /// Replace the initial condition (config override).
    pub fn with_y0(mut self, y0: Vec<f64>) -> Result<Self> {
        if y0.len() != self.dim {
            return Err(Error::InvalidConfig(format!(
                "y0 override has {} components, system {} needs {}",
                y0.len(),
                self.name,
                self.dim
            )));
        }
        self.y0_override = Some(y0);
        Ok(self)
    }

    /// Replace the default horizon (config override).
    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        self.horizon_override = Some(horizon);
        Ok(self)
    }
}

/// Asymptotic relaxation-oscillation period of the scaled Van der Pol
/// system (classic period divided by mu). Validated numerically in tests.
pub fn vdp_period_estimate(mu: f64) -> f64 {
    (3.0 - 2.0 * 2f64.ln()) + 7.0143 * mu.powf(-4.0 / 3.0)
}

fn exponent_grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start + step * k as f64).collect()
}

/// Parameterized stiff linear system, 5 states.
pub fn build_sls() -> OdeSystem {
    OdeSystem {
        name: "sls",
        dim: 5,
        kind: SystemKind::Sls(SlsMatrices::new()),
        training_exponents: exponent_grid(1.0, 0.1, 31),
        test_exponents: vec![1.05, 1.65, 2.25, 2.75, 3.35, 3.95],
        y0_override: None,
        horizon_override: None,
    }
}

/// Van der Pol oscillator in the stiff mu^2 scaling, 2 states.
pub fn build_vdp() -> OdeSystem {
    OdeSystem {
        name: "vdp",
        dim: 2,
        kind: SystemKind::Vdp,
        training_exponents: exponent_grid(2.0, 0.04, 51),
        test_exponents: vec![2.01, 2.67, 3.33, 3.99],
        y0_override: None,
        horizon_override: None,
    }
}

/// HIRES chemical kinetics model, 8 states.
pub fn build_hires() -> OdeSystem {
    OdeSystem {
        name: "hires",
        dim: 8,
        kind: SystemKind::Hires,
        training_exponents: exponent_grid(2.0, 0.1, 21),
        test_exponents: vec![2.025, 2.675, 3.325, 3.975],
        y0_override: None,
        horizon_override: None,
    }
}

/// Look a system up by its CLI name.
pub fn by_name(name: &str) -> Result<OdeSystem> {
    match name {
        "sls" => Ok(build_sls()),
        "vdp" => Ok(build_vdp()),
        "hires" => Ok(build_hires()),
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

/// All system names known to [`by_name`].
pub const SYSTEM_NAMES: [&str; 3] = ["sls", "vdp", "hires"];

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sls_a_is_orthogonal() {
        let m = SlsMatrices::new();
        let prod = m.a().transpose() * m.a();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).abs() < 1e-12);
            }
        }
        // Column norms are 1 within 1e-12.
        for j in 0..5 {
            let norm: f64 = (0..5).map(|i| m.a()[(i, j)].powi(2)).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sls_a_has_positive_diagonal_r() {
        // Uniqueness convention: re-doing the QR of A^T * seed recovers
        // an R with positive diagonal. Cheaper check: A^T seed = R.
        let m = SlsMatrices::new();
        let seed = DMatrix::from_row_slice(
            5,
            5,
            &[
                5.0, 1.0, -1.0, 0.0, 0.0, -1.0, 3.0, -10.0, 1.0, 2.0, 2.0, -1.0, 5.0, 1.0, -1.0,
                0.0, 1.0, 2.0, 3.0, -3.0, 1.0, 12.0, -1.0, -2.0, 5.0,
            ],
        );
        let r = m.a().transpose() * seed;
        for i in 0..5 {
            assert!(r[(i, i)] > 0.0, "R[{i},{i}] = {}", r[(i, i)]);
        }
        // Below-diagonal entries vanish.
        for i in 0..5 {
            for j in 0..i {
                assert!(r[(i, j)].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sls_rhs_zero_at_origin() {
        let sys = build_sls();
        let out = sys.rhs_alloc(&[0.0; 5], 0.0, 123.0);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sls_rhs_matches_matrix_product() {
        let sys = build_sls();
        let m = SlsMatrices::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mu = 10f64.powf(rng.gen_range(1.0..4.0));
            let y: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let out = sys.rhs_alloc(&y, 0.0, mu);
            let yv = nalgebra::DVector::from_column_slice(&y);
            let expect = m.system_matrix(mu) * yv;
            for i in 0..5 {
                assert!((out[i] - expect[i]).abs() < 1e-10 * (1.0 + expect[i].abs()));
            }
        }
    }

    #[test]
    fn sls_eigenvalue_scaling() {
        // Similarity: eig(A B A^T) = eig(B); fastest decay grows with mu
        // while the slowest stays O(1). Eigen-solve oracle over both routes.
        let m = SlsMatrices::new();
        for mu in [1e2, 1e4] {
            let eig_sys = m.system_matrix(mu).complex_eigenvalues();
            let eig_b = m.b(mu).complex_eigenvalues();
            let mut re_sys: Vec<f64> = eig_sys.iter().map(|z| z.re).collect();
            let mut re_b: Vec<f64> = eig_b.iter().map(|z| z.re).collect();
            re_sys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            re_b.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in re_sys.iter().zip(re_b.iter()) {
                assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "mu={mu}: {a} vs {b}");
            }
        }
        let rates = |mu: f64| {
            let eig = m.b(mu).complex_eigenvalues();
            let mut decay: Vec<f64> = eig.iter().map(|z| -z.re).collect();
            decay.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (decay[0], decay[decay.len() - 1])
        };
        let (slow2, fast2) = rates(1e2);
        let (slow4, fast4) = rates(1e4);
        assert!((0.5..1.5).contains(&slow2) && (0.5..1.5).contains(&slow4));
        // Stiffness ratio grows strongly with mu (O(mu) in the large-mu limit).
        assert!(fast4 / slow4 > 10.0 * (fast2 / slow2));
    }

    #[test]
    fn vdp_rhs_examples() {
        let sys = build_vdp();
        let out = sys.rhs_alloc(&[2.0, 0.0], 0.0, 100.0);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], -2.0e4);
        let out = sys.rhs_alloc(&[0.0, 0.0], 0.0, 100.0);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn vdp_jacobian_example() {
        let sys = build_vdp();
        let j = sys.jacobian(&[2.0, 0.0], 0.0, 10.0);
        assert_eq!(j[(0, 0)], 0.0);
        assert_eq!(j[(0, 1)], 1.0);
        assert_eq!(j[(1, 0)], -100.0);
        assert_eq!(j[(1, 1)], -300.0);
    }

    #[test]
    fn hires_rhs_examples() {
        let sys = build_hires();
        let out = sys.rhs_alloc(&[0.0; 8], 0.0, 100.0);
        assert_eq!(out[0], 0.0007);
        assert!(out[1..].iter().all(|v| *v == 0.0));

        // y7 + y8 conservation: component sums of the rhs cancel.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let y: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mu = 10f64.powf(rng.gen_range(2.0..4.0));
            let out = sys.rhs_alloc(&y, 0.0, mu);
            assert!((out[6] + out[7]).abs() < 1e-12 * (1.0 + out[6].abs()));
        }
    }

    #[test]
    fn hires_jacobian_entry() {
        let sys = build_hires();
        let mut y = [0.0; 8];
        y[7] = 0.0057;
        let j = sys.jacobian(&y, 0.0, 100.0);
        assert!((j[(6, 5)] - 0.57).abs() < 1e-14);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        // Central finite difference of rhs, step 1e-6 * (1 + |y_i|),
        // within 1e-5 relative at 100 random states per system.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for sys in [build_sls(), build_vdp(), build_hires()] {
            let (lo, hi) = match sys.name() {
                "sls" => (1.0, 4.0),
                _ => (2.0, 4.0),
            };
            for _ in 0..100 {
                let mu = 10f64.powf(rng.gen_range(lo..hi));
                let y: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let j = sys.jacobian(&y, 0.0, mu);
                let scale = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for col in 0..sys.dim() {
                    let h = 1e-6 * (1.0 + y[col].abs());
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[col] += h;
                    ym[col] -= h;
                    let fp = sys.rhs_alloc(&yp, 0.0, mu);
                    let fm = sys.rhs_alloc(&ym, 0.0, mu);
                    for row in 0..sys.dim() {
                        let fd = (fp[row] - fm[row]) / (2.0 * h);
                        let err = (j[(row, col)] - fd).abs();
                        assert!(
                            err <= 1e-5 * scale.max(1.0),
                            "{} J[{row},{col}] = {} vs fd {} (mu={mu})",
                            sys.name(),
                            j[(row, col)],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn grids_have_expected_shape() {
        let sls = build_sls();
        assert_eq!(sls.training_mus().len(), 31);
        assert!((sls.training_mus()[0] - 10.0).abs() < 1e-12);
        assert!((sls.training_mus()[30] - 1e4).abs() < 1e-8);
        assert_eq!(sls.test_mus().len(), 6);

        let vdp = build_vdp();
        assert_eq!(vdp.training_mus().len(), 51);
        assert!((vdp.training_exponents()[1] - 2.04).abs() < 1e-12);
        assert_eq!(vdp.test_mus().len(), 4);

        let hires = build_hires();
        assert_eq!(hires.training_mus().len(), 21);
        assert_eq!(hires.test_mus().len(), 4);
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(by_name("lorenz"), Err(Error::UnknownSystem(_))));
    }

    #[test]
    fn overrides_apply() {
        let sys = build_vdp().with_y0(vec![1.0, -1.0]).unwrap().with_horizon(3.5).unwrap();
        assert_eq!(sys.y0(100.0), vec![1.0, -1.0]);
        assert_eq!(sys.default_horizon(100.0), 3.5);
        assert!(build_vdp().with_y0(vec![1.0]).is_err());
    }
}
