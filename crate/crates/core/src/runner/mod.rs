//! Configuration, scenario catalog, artifact output and run orchestration.

pub mod config;
mod expr;
pub mod gradcheck;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};

pub use config::{parse_config, parse_str, Scenario};
pub use output::{Mode, RunSummary};
pub use scenario::{builtin, prepare, Prepared};

use crate::energy::dissipation_balance;
use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::forward::{run_forward, StateTrajectory};
use crate::optim::{gradient_descent, Termination};
use output::{snapshot_levels, write_snapshot, write_text, SnapshotFields};

pub const ADJOINT_NOTE: &str = "gradient from the exact transpose of the linearized forward step; \
the transport, mobility and concave-potential terms are taken at the levels the forward scheme uses \
rather than as printed for the continuous backward scheme";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub snapshot_every: Option<usize>,
    pub mirror: bool,
    pub record_timing: bool,
}

/// Process exit code for a finished run.
pub fn exit_code(summary: &RunSummary) -> i32 {
    if summary.status != "ok" {
        return 1;
    }
    match summary.termination {
        None | Some(Termination::Converged) => 0,
        Some(Termination::IterationCap) => 3,
        Some(Termination::LineSearchStalled) => 4,
        Some(Termination::SolverFailure) => 5,
    }
}

/// Runs a scenario and writes its artifacts into `opts.out_dir`. Setup errors
/// are returned; failures during the run are recorded in the summary, which
/// is written either way.
pub fn run_scenario(scenario: &Scenario, mode: Mode, opts: &RunOptions) -> Result<RunSummary> {
    let start = Instant::now();
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
    let prepared = prepare(scenario)?;
    let mut summary = RunSummary::new(scenario.clone(), mode);
    summary.target_rate = prepared.target_rate;
    let outcome = match mode {
        Mode::Forward => forward_mode(scenario, &prepared, opts, &mut summary),
        Mode::Optimize => optimize_mode(scenario, &prepared, opts, &mut summary),
    };
    if let Err(e) = outcome {
        warn!("run failed: {e}");
        summary.status = "failed".into();
        summary.message = Some(e.to_string());
    }
    if opts.record_timing {
        summary.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    summary.files.push("summary.json".into());
    write_text(&opts.out_dir.join("summary.json"), &summary.to_json()?)?;
    Ok(summary)
}

fn forward_mode(
    scenario: &Scenario,
    prepared: &Prepared,
    opts: &RunOptions,
    summary: &mut RunSummary,
) -> Result<()> {
    let f = SpaceTimeField::zeros(prepared.grid.n_levels(), prepared.disc.n_nodes());
    let state = run_forward(
        &prepared.disc,
        &scenario.phys,
        &prepared.grid,
        &prepared.h0,
        &prepared.s0,
        &f,
    )?;
    record_state(&state, summary);
    if let Some(target) = &prepared.target {
        let n = prepared.grid.n_steps;
        let err = state
            .observed(n, scenario.beta_f64())
            .iter()
            .zip(target.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        summary.terminal_linf_err = Some(err);
        summary.uncontrolled_terminal_linf_err = Some(err);
    }
    write_artifacts(scenario, prepared, &state, &f, opts, summary)
}

fn optimize_mode(
    scenario: &Scenario,
    prepared: &Prepared,
    opts: &RunOptions,
    summary: &mut RunSummary,
) -> Result<()> {
    let problem = prepared.problem(scenario)?;
    summary.notes.push(ADJOINT_NOTE.into());
    let result = gradient_descent(&problem, &scenario.optimizer, None)?;
    let report = &result.report;
    let first = &report.history[0];
    let last = report.last();
    summary.termination = Some(report.termination.clone());
    summary.message = report.message.clone();
    summary.iterations = Some(report.iterations);
    summary.initial_cost = Some(first.cost);
    summary.final_cost = Some(last.cost);
    summary.final_grad_norm = Some(last.grad_norm);
    summary.final_linf_err = Some(last.linf_err);
    summary.terminal_linf_err = Some(last.terminal_linf_err);
    summary.uncontrolled_terminal_linf_err = Some(first.terminal_linf_err);
    summary.mass_reachable = Some(report.mass_reachable);
    match report.termination {
        Termination::Converged => info!("converged after {} iterations", report.iterations),
        ref t => warn!("optimizer stopped: {t}"),
    }
    write_text(&opts.out_dir.join("optim.csv"), &report.to_csv())?;
    summary.files.push("optim.csv".into());
    let state = match result.state {
        Some(s) => s,
        None => problem.run_state(&result.control)?,
    };
    record_state(&state, summary);
    write_artifacts(scenario, prepared, &state, &result.control, opts, summary)
}

fn record_state(state: &StateTrajectory, summary: &mut RunSummary) {
    summary.mass_drift = Some(state.max_relative_mass_drift());
    summary.min_h = Some(state.min_h.iter().copied().fold(f64::INFINITY, f64::min));
}

fn write_artifacts(
    scenario: &Scenario,
    prepared: &Prepared,
    state: &StateTrajectory,
    f: &SpaceTimeField,
    opts: &RunOptions,
    summary: &mut RunSummary,
) -> Result<()> {
    let mesh = &prepared.disc.mesh;
    let n = prepared.grid.n_steps;
    let width = n.to_string().len();
    for k in snapshot_levels(n, opts.snapshot_every) {
        let name = format!("snapshot_{k:0width$}.csv");
        let fields = SnapshotFields {
            h: state.h.row(k),
            s: state.s.row(k),
            mu: state.mu.row(k),
            f: f.row(k),
        };
        write_snapshot(&opts.out_dir.join(&name), mesh, &fields, opts.mirror)?;
        summary.files.push(name.into());
    }
    if let Some(target) = &prepared.target {
        output::write_field(&opts.out_dir.join("target.csv"), mesh, target)?;
        summary.files.push("target.csv".into());
    }
    if scenario.phys.gamma > 0.0 {
        let report = dissipation_balance(state, f, &scenario.phys, &prepared.grid, &prepared.disc)?;
        summary.energy_max_residual = Some(report.max_abs_residual());
        report.write_csv(&opts.out_dir.join("energy.csv"))?;
        summary.files.push("energy.csv".into());
    }
    Ok(())
}

/// Loads a built-in scenario by name or a config file by path.
pub fn load(name_or_path: &str) -> Result<Scenario> {
    if scenario::builtin_text(name_or_path).is_some() {
        builtin(name_or_path)
    } else {
        parse_config(Path::new(name_or_path))
    }
}
