//! Configuration, persistence and the command-line front end.

pub mod cli;
pub mod config;
pub mod csv;
pub mod snapshot;

use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::WaveGrid;
use crate::integrator::{integrate, Observer, Physics, SolverState};

use self::config::RunConfig;
use self::csv::CsvRecorder;
use self::snapshot::{read_snapshot, write_snapshot, SnapshotWriter};

pub use cli::cli_main;
pub use config::{parse_config, preset, presets};

#[derive(Debug)]
pub struct RunOutput {
    pub grid: WaveGrid,
    pub physics: Physics,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SolverState,
    pub diagnostics_path: PathBuf,
    pub final_snapshot: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

/// Integrates `cfg` to `cfg.t_end`, streaming diagnostics to
/// `<run_dir>/diagnostics.csv`, writing periodic snapshots if configured and
/// `<run_dir>/final.bin` at the end. With `restart`, the run continues from
/// that snapshot instead of the configured initial condition.
pub fn execute_run(cfg: &RunConfig, restart: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let physics = cfg.physics(&grid)?;
    let state = match restart {
        Some(path) => {
            let snap = read_snapshot(path)?;
            snap.check_grid(&grid)?;
            snap.state
        }
        None => cfg.initial_state(&grid)?,
    };
    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let diagnostics_path = dir.join("diagnostics.csv");
    let mut recorder = CsvRecorder::create(&diagnostics_path, cfg.diag_stride)?;
    let mut snapper = cfg.snapshot_stride.map(|s| SnapshotWriter::new(&dir, s));
    let end = {
        let mut observers: Vec<&mut dyn Observer> = vec![&mut recorder];
        if let Some(s) = snapper.as_mut() {
            observers.push(s);
        }
        integrate(state, cfg.t_end, &cfg.scheme, &physics, &mut observers)?
    };
    let records = recorder.finish()?;
    let final_snapshot = dir.join("final.bin");
    write_snapshot(&end, &physics, &final_snapshot)?;
    Ok(RunOutput {
        grid,
        physics,
        records,
        final_state: end,
        diagnostics_path,
        final_snapshot,
        snapshots: snapper.map(|s| s.written().to_vec()).unwrap_or_default(),
    })
}
