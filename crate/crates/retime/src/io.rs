//! File formats: trajectory and reparameterization CSVs with JSON
//! sidecars, model checkpoints, and loss histories. Floats are written
//! with the shortest round-trip representation so reruns are
//! byte-identical.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{Trajectory, TrajectoryMeta};
use crate::reparam::{Diagnostics, Method, ReparamResult, TimeMap};
use crate::surrogate::{Mlp, ScalingSet, TrainedModel};

/// Sidecar of a trajectory CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrajectorySidecar {
    pub system: String,
    pub mu: f64,
    pub solver: String,
    pub rtol: f64,
    pub atol: f64,
}

/// Sidecar of a reparameterization CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReparamSidecar {
    pub method: String,
    pub tau_f: f64,
    pub objective: Option<f64>,
    pub iterations: usize,
}

/// `t,y1,...,yd` rows, one per sample.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> Result<()> {
    write!(w, "t")?;
    for c in 0..traj.dim() {
        write!(w, ",y{}", c + 1)?;
    }
    writeln!(w)?;
    for (t, state) in traj.times().iter().zip(traj.states().iter()) {
        write!(w, "{t}")?;
        for v in state {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(r: R, sidecar: &TrajectorySidecar) -> Result<Trajectory> {
    let reader = BufReader::new(r);
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if !line.starts_with("t,") {
                return Err(Error::Parse(format!("unexpected header '{line}'")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t: f64 = parse_field(fields.next(), lineno)?;
        let state: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("line {lineno}: {e}"))))
            .collect::<Result<_>>()?;
        times.push(t);
        states.push(state);
    }
    Trajectory::new(
        times,
        states,
        sidecar.mu,
        TrajectoryMeta {
            solver: sidecar.solver.clone(),
            rtol: sidecar.rtol,
            atol: sidecar.atol,
        },
    )
}

fn parse_field(field: Option<&str>, lineno: usize) -> Result<f64> {
    field
        .ok_or_else(|| Error::Parse(format!("line {lineno}: missing field")))?
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))
}

/// `tau,t,y1,...,yd` rows on the uniform tau grid.
pub fn write_reparam_csv<W: Write>(mut w: W, result: &ReparamResult) -> Result<()> {
    write!(w, "tau,t")?;
    for c in 0..result.dim() {
        write!(w, ",y{}", c + 1)?;
    }
    writeln!(w)?;
    let t = result.t_of_tau();
    for i in 0..result.n_tau() {
        write!(w, "{},{}", result.tau_grid[i], t[i])?;
        for v in &result.y_of_tau[i] {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_reparam_csv<R: Read>(r: R, sidecar: &ReparamSidecar) -> Result<ReparamResult> {
    let reader = BufReader::new(r);
    let mut tau_grid = Vec::new();
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if !line.starts_with("tau,t") {
                return Err(Error::Parse(format!("unexpected header '{line}'")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        tau_grid.push(parse_field(fields.next(), lineno)?);
        times.push(parse_field(fields.next(), lineno)?);
        let state: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("line {lineno}: {e}"))))
            .collect::<Result<_>>()?;
        states.push(state);
    }
    let method = Method::from_name(&sidecar.method)?;
    let time_map = TimeMap::from_knots(tau_grid.clone(), times)?;
    Ok(ReparamResult {
        method,
        tau_grid,
        y_of_tau: states,
        time_map,
        diagnostics: Diagnostics {
            objective: sidecar.objective,
            iterations: sidecar.iterations,
            objective_trace: vec![],
            max_second_diff: 0.0,
            notes: vec![],
        },
    })
}

pub fn trajectory_sidecar(system: &str, traj: &Trajectory) -> TrajectorySidecar {
    TrajectorySidecar {
        system: system.to_string(),
        mu: traj.mu(),
        solver: traj.meta().solver.clone(),
        rtol: traj.meta().rtol,
        atol: traj.meta().atol,
    }
}

pub fn reparam_sidecar(result: &ReparamResult) -> ReparamSidecar {
    ReparamSidecar {
        method: result.method.name().to_string(),
        tau_f: result.tau_f(),
        objective: result.diagnostics.objective,
        iterations: result.diagnostics.iterations,
    }
}

/// Model checkpoint: layer shapes plus the flat row-major weight arrays
/// of both networks, and the scaling needed to evaluate them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub state_widths: Vec<usize>,
    pub state_params: Vec<f64>,
    pub dilation_widths: Vec<usize>,
    pub dilation_params: Vec<f64>,
    pub scaling: ScalingSet,
}

impl Checkpoint {
    pub fn from_model(model: &TrainedModel) -> Self {
        Self {
            state_widths: model.state_net.widths().to_vec(),
            state_params: model.state_net.params().to_vec(),
            dilation_widths: model.dilation_net.widths().to_vec(),
            dilation_params: model.dilation_net.params().to_vec(),
            scaling: model.scaling.clone(),
        }
    }

    pub fn into_model(self) -> TrainedModel {
        TrainedModel {
            state_net: Mlp::from_params(self.state_widths, self.state_params),
            dilation_net: Mlp::from_params(self.dilation_widths, self.dilation_params),
            scaling: self.scaling,
            loss_history: vec![],
            pretrain_history: vec![],
        }
    }
}

/// `epoch,loss` rows.
pub fn write_loss_history_csv<W: Write>(mut w: W, history: &[f64]) -> Result<()> {
    writeln!(w, "epoch,loss")?;
    for (epoch, loss) in history.iter().enumerate() {
        writeln!(w, "{epoch},{loss}")?;
    }
    Ok(())
}

/// Serialize any JSON-able value with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("json encode: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("json decode: {e}")))
}
