//! `damped-ns` command line. Summaries go to stdout as `key=value` lines or
//! CSV tables; artifacts go under the configured output directory.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 usage or
//! configuration error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};

use super::config::{parse_config, preset, presets, steady_config, RunConfig};
use super::execute_run;
use crate::error::Error;
use crate::experiment::{
    run_convergence_speed_sweep, run_trajectory_separation, ExperimentKind, ExperimentSpec,
    Perturbation, DEFAULT_STEADY_TOL,
};
use crate::spectral::stokes_lambda1;
use crate::verify::{run_all_checks, CheckStatus};

#[derive(Parser, Debug)]
#[command(
    name = "damped-ns",
    version,
    about = "Damped Navier-Stokes on a periodic box"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Source {
    /// Configuration file.
    #[arg(short, long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration (see `presets`).
    #[arg(short, long)]
    preset: Option<String>,
    /// Overrides `[run] output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `[run] t_end`.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one configuration.
    Run {
        #[command(flatten)]
        source: Source,
        /// Continue from this snapshot instead of the initial condition.
        #[arg(long)]
        restart: Option<PathBuf>,
    },
    /// Integrate and run every estimate check; exit 1 if any fails.
    Verify {
        #[command(flatten)]
        source: Source,
    },
    /// Steady-state sweep over (alpha, beta) with monotonicity verdicts.
    Sweep {
        /// Base configuration; defaults to the cylinder-forced box.
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.5")]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 200.0)]
        max_t: f64,
        #[arg(long, default_value_t = DEFAULT_STEADY_TOL)]
        steady_tol: f64,
        #[arg(long, default_value_t = 1.0)]
        steady_stride: f64,
        /// Write each cell's final state to `<output_dir>/<cell>/final.bin`.
        #[arg(long)]
        persist: bool,
    },
    /// Separation of perturbed trajectories; exit 1 if the ratio test fails.
    Separate {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List built-in configurations.
    Presets,
}

enum Failure {
    Usage(String),
    Check,
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter { .. } | Error::InvalidGrid(_) => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Runtime(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        })
    }
}

fn load(source: &Source, fallback: Option<RunConfig>) -> Result<RunConfig, Failure> {
    let mut cfg = match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => preset(name)
            .ok_or_else(|| Failure::Usage(format!("unknown preset {name:?}; see `presets`")))?,
        (None, None) => fallback
            .ok_or_else(|| Failure::Usage("one of --config or --preset is required".into()))?,
    };
    if let Some(d) = &source.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(t) = source.t_end {
        cfg.t_end = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Presets => {
            for (name, description) in presets() {
                writeln!(out, "{name}\t{description}")?;
            }
        }
        Command::Run { source, restart } => {
            let cfg = load(&source, None)?;
            let run = execute_run(&cfg, restart.as_deref())?;
            let end = &run.final_state;
            let last = crate::diagnostics::record(&end.u, end.t, &run.physics)?;
            writeln!(out, "run_id={}", cfg.run_id)?;
            writeln!(out, "t={}", run.final_state.t)?;
            writeln!(out, "steps={}", run.final_state.step_count)?;
            writeln!(out, "E={:.16e}", last.e)?;
            writeln!(out, "umax={:.16e}", last.umax)?;
            writeln!(out, "diagnostics={}", run.diagnostics_path.display())?;
            writeln!(out, "snapshot={}", run.final_snapshot.display())?;
        }
        Command::Verify { source } => {
            let cfg = load(&source, None)?;
            let run = execute_run(&cfg, None)?;
            let checks = run_all_checks(
                &run.records,
                cfg.mu,
                cfg.alpha,
                cfg.beta,
                stokes_lambda1(&run.grid),
                run.physics.forcing.norm_sq(),
            )?;
            let mut failed = false;
            for c in &checks {
                failed |= c.status == CheckStatus::Fail;
                write!(
                    out,
                    "check={} status={} min_margin={:e} tolerance={:e}",
                    c.name,
                    c.status.name(),
                    c.min_margin,
                    c.tolerance
                )?;
                if !c.note.is_empty() {
                    write!(out, " note={:?}", c.note)?;
                }
                writeln!(out)?;
            }
            writeln!(out, "verdict={}", if failed { "fail" } else { "pass" })?;
            if failed {
                return Err(Failure::Check);
            }
        }
        Command::Sweep {
            source,
            alphas,
            betas,
            max_t,
            steady_tol,
            steady_stride,
            persist,
        } => {
            let mut base = load(&source, Some(steady_config(alphas[0], betas[0])))?;
            base.run_id = "sweep".into();
            let spec = ExperimentSpec {
                kind: ExperimentKind::ParameterSweep,
                base,
                alphas,
                betas,
                perturbation: None,
                steady_tol,
                steady_stride,
                max_t,
                persist,
            };
            let res = run_convergence_speed_sweep(&spec)?;
            writeln!(out, "alpha,beta,converged,t_c,t_end,E,V2,umax,snapshot")?;
            for c in &res.cells {
                writeln!(
                    out,
                    "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{}",
                    c.alpha,
                    c.beta,
                    c.converged,
                    c.t_c.map_or("none".to_string(), |t| t.to_string()),
                    c.t_end,
                    c.final_energy,
                    c.final_v2,
                    c.final_umax,
                    c.snapshot
                        .as_ref()
                        .map_or(String::new(), |p| p.display().to_string()),
                )?;
            }
            for v in &res.verdicts {
                let (along, fixed) = match v.along {
                    crate::experiment::SweepAxis::Alpha => ("alpha", "beta"),
                    crate::experiment::SweepAxis::Beta => ("beta", "alpha"),
                };
                writeln!(
                    out,
                    "verdict along={along} {fixed}={} non_increasing={}",
                    v.fixed, v.non_increasing
                )?;
            }
        }
        Command::Separate {
            source,
            deltas,
            seed,
        } => {
            let base = load(&source, None)?;
            let mut spec = ExperimentSpec::new(ExperimentKind::TrajectorySeparation, base);
            spec.perturbation = Some(Perturbation { seed, deltas });
            let res = run_trajectory_separation(&spec).map_err(|e| match e {
                Error::Precondition(m) => Failure::Usage(m),
                e => e.into(),
            })?;
            let sep = res.separation.expect("separation result");
            for r in &sep.runs {
                writeln!(
                    out,
                    "delta={:e} max_ratio={:.16e} growth_rate={:.16e} starts_at_delta={}",
                    r.delta, r.max_ratio, r.growth_rate, r.starts_at_delta
                )?;
            }
            writeln!(out, "ratio_span={:.16e}", sep.ratio_span)?;
            writeln!(out, "verdict={}", if sep.pass { "pass" } else { "fail" })?;
            if !sep.pass {
                return Err(Failure::Check);
            }
        }
    }
    Ok(())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_cli<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Usage(msg)) => {
            let usage = Cli::command().render_usage();
            let _ = writeln!(err, "error: {msg}\n\n{usage}");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Entry point over the process streams.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(argv, &mut stdout.lock(), &mut stderr.lock())
}
