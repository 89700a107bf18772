//! `plot`: deterministic SVG line plots plus the plotted series as CSV,
//! mirroring the usual views — states over physical time, states over
//! stretched time, the time map, and its derivative (optionally on a
//! log scale).

use std::path::Path;

use retime::reparam::Method;

use crate::config::RunConfig;
use crate::error::{AppError, AppResult};
use crate::svg::{Plot, Series};

use super::{case_dir, read_reparam, report_failures, run_parallel, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    StateT,
    StateTau,
    TimeMap,
    Dilation,
}

impl PlotKind {
    pub fn from_name(name: &str) -> AppResult<Self> {
        match name {
            "state-t" => Ok(PlotKind::StateT),
            "state-tau" => Ok(PlotKind::StateTau),
            "time-map" => Ok(PlotKind::TimeMap),
            "dilation" => Ok(PlotKind::Dilation),
            other => Err(AppError::usage(format!(
                "unknown plot kind '{other}' (expected state-t, state-tau, time-map or dilation)"
            ))),
        }
    }

    fn stem(&self) -> &'static str {
        match self {
            PlotKind::StateT => "state_t",
            PlotKind::StateTau => "state_tau",
            PlotKind::TimeMap => "time_map",
            PlotKind::Dilation => "dilation",
        }
    }
}

pub fn run(config: &RunConfig, kind: PlotKind, log_scale: bool) -> AppResult<()> {
    if log_scale && kind != PlotKind::Dilation {
        return Err(AppError::usage("--log applies to the dilation plot only"));
    }
    let sys = config.system()?;
    let exponents = config.mu_exponents(&sys);
    let methods = config.methods();

    let results = run_parallel(config.jobs, exponents, |&exponent| {
        let dir = case_dir(config, exponent);
        match kind {
            PlotKind::StateT | PlotKind::StateTau => {
                for &method in &methods {
                    plot_states(config, &dir, exponent, method, kind)?;
                }
            }
            PlotKind::TimeMap | PlotKind::Dilation => {
                plot_clock(config, &dir, exponent, &methods, kind, log_scale)?;
            }
        }
        Ok(())
    })?;
    report_failures(&results, "plot")
}

fn plot_states(
    config: &RunConfig,
    dir: &Path,
    exponent: f64,
    method: Method,
    kind: PlotKind,
) -> AppResult<()> {
    let (result, _) = read_reparam(dir, method)?;
    let xs = match kind {
        PlotKind::StateT => result.t_of_tau(),
        _ => result.tau_grid.clone(),
    };
    let series: Vec<Series> = (0..result.dim())
        .map(|c| Series {
            label: format!("y{}", c + 1),
            xs: xs.clone(),
            ys: result.component(c),
        })
        .collect();
    let (x_label, title_coord) = match kind {
        PlotKind::StateT => ("t [s]", "physical time"),
        _ => ("tau", "stretched time"),
    };
    let plot = Plot {
        title: format!(
            "{} mu=10^{exponent} ({}): states over {title_coord}",
            config.system,
            method.name()
        ),
        x_label: x_label.into(),
        y_label: "y".into(),
        log_y: false,
        series,
    };
    let stem = format!("plot_{}_{}", kind.stem(), method.name());
    write_atomic(&dir.join(format!("{stem}.svg")), plot.render()?.as_bytes())?;
    write_atomic(&dir.join(format!("{stem}.csv")), plot.series_csv()?.as_bytes())?;
    Ok(())
}

fn plot_clock(
    config: &RunConfig,
    dir: &Path,
    exponent: f64,
    methods: &[Method],
    kind: PlotKind,
    log_scale: bool,
) -> AppResult<()> {
    let mut series = Vec::new();
    for &method in methods {
        let (result, _) = read_reparam(dir, method)?;
        let ys = match kind {
            PlotKind::TimeMap => result.t_of_tau(),
            _ => result
                .tau_grid
                .iter()
                .map(|tau| result.time_map.dilation_at(*tau))
                .collect(),
        };
        series.push(Series {
            label: method.name().to_string(),
            xs: result.tau_grid.clone(),
            ys,
        });
    }
    let (y_label, what) = match kind {
        PlotKind::TimeMap => ("t [s]", "time map t(tau)"),
        _ => ("dt/dtau", "time dilation dt/dtau"),
    };
    let plot = Plot {
        title: format!("{} mu=10^{exponent}: {what}", config.system),
        x_label: "tau".into(),
        y_label: y_label.into(),
        log_y: log_scale,
        series,
    };
    let stem = if log_scale {
        format!("plot_{}_log", kind.stem())
    } else {
        format!("plot_{}", kind.stem())
    };
    write_atomic(&dir.join(format!("{stem}.svg")), plot.render()?.as_bytes())?;
    write_atomic(&dir.join(format!("{stem}.csv")), plot.series_csv()?.as_bytes())?;
    Ok(())
}
