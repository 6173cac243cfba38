//! Runs one configured experiment and persists its outputs.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Mode};
use crate::discrete::{discrete_monitors, run_discrete, DiscreteConfig, StepRule};
use crate::error::{Error, Result};
use crate::flow::{integrate_accelerated, integrate_first_order, FlowConfig};
use crate::io::{iterates_csv, trajectory_csv};

/// CSV text and summary of a finished run. The summary carries the wall
/// time, so only the CSV is reproducible byte for byte.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub csv: String,
    pub summary: Value,
}

impl Outcome {
    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Writes the CSV and then the summary to the configured paths.
    pub fn write(&self, cfg: &ExperimentConfig) -> Result<()> {
        if let Some(out) = &cfg.out {
            write_file(out, &self.csv)?;
        }
        if let Some(summary) = &cfg.summary {
            write_file(summary, &self.summary_json())?;
        }
        Ok(())
    }
}

fn write_file(path: &str, text: &str) -> Result<()> {
    if let Some(dir) = Path::new(path)
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{path}: {e}"))))
}

/// Validates `cfg`, runs it and writes the configured outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let outcome = compute(cfg)?;
    outcome.write(cfg)?;
    Ok(outcome)
}

/// Like [`run_experiment`] without touching the filesystem.
pub fn compute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let p = cfg.problem()?;
    let x0 = cfg.start()?;
    let started = Instant::now();

    let mut summary = json!({
        "problem": p.name,
        "mode": cfg.mode.name(),
        "scaling": cfg.scaling.to_string(),
        "x0": x0,
        "seed": cfg.seed,
    });
    let csv = match cfg.mode {
        Mode::Flow | Mode::Accel => {
            let traj = if cfg.mode == Mode::Flow {
                let fc =
                    FlowConfig::first_order(cfg.t_end, cfg.dt).with_record_every(cfg.record_every);
                integrate_first_order(&p, &cfg.scaling, &x0, &fc)?
            } else {
                let fc = FlowConfig::accelerated(cfg.t_end, cfg.dt, cfg.r, cfg.theta)
                    .with_record_every(cfg.record_every)
                    .with_scheme(cfg.scheme);
                summary["r"] = json!(cfg.r);
                summary["theta"] = json!(cfg.theta);
                summary["scheme"] = json!(cfg.scheme.to_string());
                integrate_accelerated(&p, &cfg.scaling, &x0, &fc)?
            };
            let last = traj.last();
            summary["dt"] = json!(cfg.dt);
            summary["records"] = json!(traj.records.len());
            summary["final"] = json!({
                "t": last.t,
                "x": last.x,
                "f": last.f,
                "crit_unscaled": last.crit_unscaled,
                "crit_scaled": last.crit_scaled,
            });
            summary["monitors"] = serde_json::to_value(&traj.monitors).expect("monitors serialize");
            trajectory_csv(&traj)
        }
        Mode::Discrete => {
            let dc = DiscreteConfig {
                max_iters: cfg.iters,
                step: StepRule::CurvatureScaled { safety: cfg.safety },
                tolerance: 0.0,
            };
            let run = run_discrete(&p, &cfg.scaling, &x0, &dc)?;
            let mon = discrete_monitors(&p, &run, None)?;
            let last = run.last();
            summary["safety"] = json!(cfg.safety);
            summary["step"] = json!(run.s_min);
            summary["records"] = json!(run.iterates.len());
            summary["final"] = json!({
                "k": last.k,
                "x": last.x,
                "f": last.f,
                "crit_unscaled": last.crit_unscaled,
                "crit_scaled": last.crit_scaled,
            });
            summary["monitors"] = json!({
                "monotone": mon.monotone,
                "auxiliary_nonincreasing": mon.energy_nonincreasing,
                "min_decrease": mon.min_decrease,
                "max_auxiliary_increase": mon.max_energy_increase,
            });
            iterates_csv(&run)
        }
    };
    summary["wall_time_s"] = json!(started.elapsed().as_secs_f64());
    Ok(Outcome { csv, summary })
}
