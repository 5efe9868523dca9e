use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::error;

use thinfilm::energy::dissipation_balance;
use thinfilm::field::SpaceTimeField;
use thinfilm::forward::{run_forward, TimeGrid};
use thinfilm::runner::gradcheck::{delta_sweep, random_directions, PASS_TOL};
use thinfilm::runner::{self, exit_code, output, prepare, Mode, RunOptions};
use thinfilm::Error;

#[derive(Parser)]
#[command(
    name = "thinfilm",
    version,
    about = "Thin-film flow over a deformable substrate: simulation and optimal control"
)]
struct Cli {
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Snapshot every K steps (default: ceil(N/100)).
    #[arg(long, global = true)]
    snapshot_every: Option<usize>,
    /// Reflect snapshots onto [-L, L].
    #[arg(long, global = true)]
    mirror: bool,
    /// Seed for random finite-difference directions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record wall time in summary.json (breaks byte-identical output).
    #[arg(long, global = true)]
    record_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Forward,
    Optimize,
}

#[derive(Subcommand)]
enum Command {
    /// Uncontrolled simulation.
    Forward { config: PathBuf },
    /// Gradient-descent optimal control.
    Optimize { config: PathBuf },
    /// Run a built-in scenario.
    Scenario {
        name: String,
        #[arg(long, value_enum, default_value = "optimize")]
        mode: ModeArg,
        /// Print the scenario config and exit.
        #[arg(long)]
        dump: bool,
    },
    /// Compare the adjoint gradient with central finite differences.
    GradCheck {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        dirs: usize,
        /// Step size; repeat for a sweep.
        #[arg(long, default_values_t = vec![1e-5])]
        delta: Vec<f64>,
    },
    /// Uncontrolled run with the energy dissipation balance (needs gamma > 0).
    EnergyCheck { config: PathBuf },
    /// Write the scenario's target as an `x,value` file.
    MakeTarget {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            ExitCode::from(match e {
                Error::Config { .. } => 2,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> thinfilm::Result<u8> {
    let opts = RunOptions {
        out_dir: cli.out_dir.clone(),
        snapshot_every: cli.snapshot_every,
        mirror: cli.mirror,
        record_timing: cli.record_timing,
    };
    let finish = |summary: runner::RunSummary| {
        print_summary(&summary);
        exit_code(&summary) as u8
    };
    match cli.command {
        Command::Forward { config } => {
            let s = runner::parse_config(&config)?;
            Ok(finish(runner::run_scenario(&s, Mode::Forward, &opts)?))
        }
        Command::Optimize { config } => {
            let s = runner::parse_config(&config)?;
            Ok(finish(runner::run_scenario(&s, Mode::Optimize, &opts)?))
        }
        Command::Scenario { name, mode, dump } => {
            let s = runner::builtin(&name)?;
            if dump {
                print!("{}", s.to_config_string());
                return Ok(0);
            }
            let mode = match mode {
                ModeArg::Forward => Mode::Forward,
                ModeArg::Optimize => Mode::Optimize,
            };
            Ok(finish(runner::run_scenario(&s, mode, &opts)?))
        }
        Command::GradCheck {
            config,
            dirs,
            delta,
        } => {
            let s = runner::load(&config.to_string_lossy())?;
            let prepared = prepare(&s)?;
            let problem = prepared.problem(&s)?;
            let directions = random_directions(&problem, dirs, cli.seed);
            let f = problem.zero_control();
            let reports = delta_sweep(&problem, &f, &directions, &delta)?;
            println!("delta,max_rel_err,passed");
            for r in &reports {
                println!("{:e},{:e},{}", r.delta, r.max_rel_err, r.passed);
            }
            std::fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
            let path = opts.out_dir.join("gradcheck.json");
            output::write_text(&path, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
            let ok = reports.iter().all(|r| r.max_rel_err < PASS_TOL);
            Ok(if ok { 0 } else { 1 })
        }
        Command::EnergyCheck { config } => {
            let s = runner::load(&config.to_string_lossy())?;
            let prepared = prepare(&s)?;
            let grid: TimeGrid = prepared.grid;
            let f = SpaceTimeField::zeros(grid.n_levels(), prepared.disc.n_nodes());
            let state = run_forward(
                &prepared.disc,
                &s.phys,
                &grid,
                &prepared.h0,
                &prepared.s0,
                &f,
            )?;
            let report = dissipation_balance(&state, &f, &s.phys, &grid, &prepared.disc)?;
            std::fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
            report.write_csv(&opts.out_dir.join("energy.csv"))?;
            let worst = report.worst_relative_increase();
            println!("max_abs_residual = {:e}", report.max_abs_residual());
            println!("worst_relative_increase = {worst:e}");
            Ok(if worst <= 1e-8 { 0 } else { 6 })
        }
        Command::MakeTarget {
            config,
            output: out,
        } => {
            let s = runner::load(&config.to_string_lossy())?;
            let prepared = prepare(&s)?;
            let target = prepared.target.ok_or_else(|| {
                Error::InvalidParameter(format!("scenario `{}` has no target", s.name))
            })?;
            output::write_field(&out, &prepared.disc.mesh, &target)?;
            Ok(0)
        }
    }
}

fn print_summary(s: &runner::RunSummary) {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
    println!("scenario        {}", s.scenario.name);
    println!("status          {}", s.status);
    if let Some(t) = &s.termination {
        println!(
            "termination     {t} after {} iterations",
            s.iterations.unwrap_or(0)
        );
        println!(
            "J               {} -> {}",
            opt(s.initial_cost),
            opt(s.final_cost)
        );
        println!("grad norm       {}", opt(s.final_grad_norm));
        println!("linf (max t)    {}", opt(s.final_linf_err));
    }
    println!("linf (T)        {}", opt(s.terminal_linf_err));
    println!("uncontrolled    {}", opt(s.uncontrolled_terminal_linf_err));
    println!("mass drift      {}", opt(s.mass_drift));
    println!("min h           {}", opt(s.min_h));
    if let Some(m) = &s.message {
        println!("message         {m}");
    }
}
