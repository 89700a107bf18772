//! Run configuration: a JSON file plus command-line flag overrides
//! (flags win). Parameters are addressed by their log10 exponents, which
//! also name the per-case output directories.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use retime::reparam::{GeometryConfig, Method, OptimizerConfig};
use retime::surrogate::{MlpSpec, TrainConfig};
use retime::systems::{self, OdeSystem};

use crate::error::{AppError, AppResult};

/// Which mu exponents a command runs over.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum MuSelection {
    Grid(GridKind),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Training,
    Test,
    Both,
}

impl Default for MuSelection {
    fn default() -> Self {
        MuSelection::Grid(GridKind::Both)
    }
}

/// Surrogate architecture and schedule section.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct TrainSection {
    /// When set, run a Latin-hypercube search of this many sampled
    /// configurations per method (same seeded set for every method) and
    /// keep the checkpoint with the lowest on-reference MSIE.
    pub lhs_configs: Option<usize>,
    pub hidden_layers: usize,
    /// Explicit width; when absent it is solved from `param_budget`.
    pub hidden_width: Option<usize>,
    pub param_budget: usize,
    pub learning_rate: f64,
    pub final_lr: f64,
    pub epochs: usize,
    pub pretrain_iters: usize,
    pub initial_horizon: usize,
    pub horizon_interval: usize,
    pub prediction_budget: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            lhs_configs: None,
            hidden_layers: 3,
            hidden_width: None,
            param_budget: 500,
            learning_rate: 5e-3,
            final_lr: 1e-8,
            epochs: 200,
            pretrain_iters: 200,
            initial_horizon: 10,
            horizon_interval: 5,
            prediction_budget: 1000,
        }
    }
}

impl TrainSection {
    pub fn spec(&self, state_dim: usize) -> MlpSpec {
        let width = self.hidden_width.unwrap_or_else(|| {
            retime::surrogate::width_for_budget(
                self.hidden_layers,
                self.param_budget,
                state_dim + 2,
                state_dim,
            )
        });
        MlpSpec {
            hidden_layers: self.hidden_layers,
            hidden_width: width,
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            final_lr: self.final_lr,
            initial_horizon: self.initial_horizon,
            horizon_interval: self.horizon_interval,
            pretrain_iters: self.pretrain_iters,
            epochs: self.epochs,
            prediction_budget: self.prediction_budget,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    pub system: String,
    pub mu: MuSelection,
    pub rtol: f64,
    pub atol: f64,
    pub tau_f: f64,
    pub n_tau: usize,
    pub methods: Vec<String>,
    pub n_samples: usize,
    pub curvature_window: usize,
    pub horizon: Option<f64>,
    pub y0: Option<Vec<f64>>,
    pub train: TrainSection,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: "sls".to_string(),
            mu: MuSelection::default(),
            rtol: 1e-6,
            atol: 1e-9,
            tau_f: 5.0,
            n_tau: 1000,
            methods: retime::reparam::METHOD_NAMES.iter().map(|s| s.to_string()).collect(),
            n_samples: 4096,
            curvature_window: 11,
            horizon: None,
            y0: None,
            train: TrainSection::default(),
            out: None,
            seed: 42,
            jobs: 1,
        }
    }
}

/// Flag overrides shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub system: Option<String>,
    pub mu: Option<String>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub tau_f: Option<f64>,
    pub n_tau: Option<usize>,
    pub methods: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> AppResult<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    AppError::usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| AppError::usage(format!("config {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(system) = &overrides.system {
            config.system = system.clone();
        }
        if let Some(mu) = &overrides.mu {
            config.mu = parse_mu_selection(mu)?;
        }
        if let Some(v) = overrides.rtol {
            config.rtol = v;
        }
        if let Some(v) = overrides.atol {
            config.atol = v;
        }
        if let Some(v) = overrides.tau_f {
            config.tau_f = v;
        }
        if let Some(v) = overrides.n_tau {
            config.n_tau = v;
        }
        if let Some(methods) = &overrides.methods {
            config.methods = methods.split(',').map(|s| s.trim().to_string()).collect();
        }
        if let Some(v) = overrides.seed {
            config.seed = v;
        }
        if let Some(v) = overrides.jobs {
            config.jobs = v;
        }
        if let Some(v) = &overrides.out {
            config.out = Some(v.clone());
        }
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> AppResult<()> {
        systems::by_name(&self.system).map_err(AppError::usage_from)?;
        if !(self.tau_f > 0.0) {
            return Err(AppError::usage("tau_f must be positive"));
        }
        if self.n_tau < 8 {
            return Err(AppError::usage("n_tau must be >= 8"));
        }
        if self.methods.is_empty() {
            return Err(AppError::usage("at least one method is required"));
        }
        for m in &self.methods {
            Method::from_name(m).map_err(AppError::usage_from)?;
        }
        if self.jobs == 0 {
            return Err(AppError::usage("jobs must be >= 1"));
        }
        if let MuSelection::List(list) = &self.mu {
            if list.is_empty() {
                return Err(AppError::usage("mu list must not be empty"));
            }
        }
        Ok(())
    }

    /// Output root: flag/config, else RETIME_OUT, else ./out.
    pub fn out_dir(&self) -> PathBuf {
        if let Some(out) = &self.out {
            return out.clone();
        }
        if let Ok(env) = std::env::var("RETIME_OUT") {
            if !env.is_empty() {
                return PathBuf::from(env);
            }
        }
        PathBuf::from("out")
    }

    /// The configured system with y0/horizon overrides applied.
    pub fn system(&self) -> AppResult<OdeSystem> {
        let mut sys = systems::by_name(&self.system).map_err(AppError::usage_from)?;
        if let Some(y0) = &self.y0 {
            sys = sys.with_y0(y0.clone()).map_err(AppError::usage_from)?;
        }
        if let Some(h) = self.horizon {
            sys = sys.with_horizon(h).map_err(AppError::usage_from)?;
        }
        Ok(sys)
    }

    /// Selected mu exponents in ascending order.
    pub fn mu_exponents(&self, sys: &OdeSystem) -> Vec<f64> {
        let mut exps = match &self.mu {
            MuSelection::Grid(GridKind::Training) => sys.training_exponents().to_vec(),
            MuSelection::Grid(GridKind::Test) => sys.test_exponents().to_vec(),
            MuSelection::Grid(GridKind::Both) => {
                let mut v = sys.training_exponents().to_vec();
                v.extend_from_slice(sys.test_exponents());
                v
            }
            MuSelection::List(list) => list.clone(),
        };
        exps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        exps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        exps
    }

    pub fn methods(&self) -> Vec<Method> {
        self.methods
            .iter()
            .map(|m| Method::from_name(m).expect("validated"))
            .collect()
    }

    pub fn geometry(&self) -> GeometryConfig {
        GeometryConfig {
            n_samples: self.n_samples,
            curvature_window: self.curvature_window,
            weights: None,
        }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig::default()
    }
}

fn parse_mu_selection(arg: &str) -> AppResult<MuSelection> {
    match arg {
        "training" => Ok(MuSelection::Grid(GridKind::Training)),
        "test" => Ok(MuSelection::Grid(GridKind::Test)),
        "both" => Ok(MuSelection::Grid(GridKind::Both)),
        list => {
            let exps: Result<Vec<f64>, _> = list.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match exps {
                Ok(v) if !v.is_empty() => Ok(MuSelection::List(v)),
                _ => Err(AppError::usage(format!(
                    "--mu expects 'training', 'test', 'both' or a comma list of exponents, got '{arg}'"
                ))),
            }
        }
    }
}

/// Directory name for a mu exponent: trailing zeros trimmed, at least
/// one decimal, so float formatting drift cannot split a case across
/// directories.
pub fn exponent_dir_name(exponent: f64) -> String {
    let mut s = format!("{exponent:.4}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.push('0');
    }
    s
}
