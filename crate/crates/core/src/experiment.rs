//! Multi-run experiments: steady-state sweeps over `(α, β)`, independence of
//! the steady state from the initial data, trajectory separation in the
//! uniqueness regime and absorbing-ball sweeps.

use std::path::PathBuf;

use crate::cli_io::config::RunConfig;
use crate::cli_io::snapshot::write_snapshot;
use crate::diagnostics::{DiagnosticsRecord, DiagnosticsRecorder};
use crate::error::{Error, Result};
use crate::field::SpectralVelocity;
use crate::initial::{make_initial_condition, InitialCondition};
use crate::integrator::{
    adapt_dt, integrate, step_with_dt, Flow, Observer, Physics, SchemeConfig, SolverState, Stride,
};
use crate::par;
use crate::spectral::stokes_lambda1;
use crate::verify::{check_absorbing_ball, AbsorbingReport, Regime};

/// Consecutive strides the quotient must stay below tolerance.
pub const STEADY_WINDOW: usize = 10;
pub const DEFAULT_STEADY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SteadyState,
    ParameterSweep,
    TrajectorySeparation,
    AbsorbingSweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub seed: u64,
    /// Amplitudes of the perturbed runs.
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub base: RunConfig,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub perturbation: Option<Perturbation>,
    pub steady_tol: f64,
    /// Observer stride `Δ` of the steady-state test.
    pub steady_stride: f64,
    pub max_t: f64,
    /// Write final snapshots under `base.output_dir`.
    pub persist: bool,
}

impl ExperimentSpec {
    /// Single-cell spec around `base` with default tolerances.
    pub fn new(kind: ExperimentKind, base: RunConfig) -> Self {
        ExperimentSpec {
            kind,
            alphas: vec![base.alpha],
            betas: vec![base.beta],
            max_t: base.t_end,
            base,
            perturbation: None,
            steady_tol: DEFAULT_STEADY_TOL,
            steady_stride: 1.0,
            persist: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.betas.is_empty() {
            return Err(Error::Precondition("sweep lists must be non-empty".into()));
        }
        if !(self.steady_tol > 0.0) {
            return Err(Error::param("steady_tol", self.steady_tol, "must be > 0"));
        }
        if !(self.steady_stride > 0.0 && self.steady_stride.is_finite()) {
            return Err(Error::param(
                "steady_stride",
                self.steady_stride,
                "must be > 0",
            ));
        }
        if !(self.max_t > 0.0 && self.max_t.is_finite()) {
            return Err(Error::param("max_t", self.max_t, "must be > 0"));
        }
        if let Some(p) = &self.perturbation {
            if p.deltas.is_empty() {
                return Err(Error::Precondition("no perturbation amplitudes".into()));
            }
            if let Some(&d) = p.deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
                return Err(Error::param(
                    "delta",
                    d,
                    "perturbation amplitude must be > 0",
                ));
            }
        }
        for &a in &self.alphas {
            for &b in &self.betas {
                crate::spectral::validate_damping(a, b)?;
            }
        }
        self.base.validate()
    }

    fn cells(&self) -> Vec<(f64, f64)> {
        self.alphas
            .iter()
            .flat_map(|&a| self.betas.iter().map(move |&b| (a, b)))
            .collect()
    }
}

/// `|u(t+Δ) − u(t)| / (Δ · max(1, |u(t)|))`.
pub fn steady_quotient(prev: &SpectralVelocity, next: &SpectralVelocity, stride: f64) -> f64 {
    prev.distance(next) / (stride * prev.norm().max(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyOutcome {
    pub converged: bool,
    pub t_c: Option<f64>,
    /// `(t, quotient)` per stride, `t` being the earlier sample.
    pub quotients: Vec<(f64, f64)>,
}

/// Sliding-window test shared by the batch and online detectors.
#[derive(Debug, Clone)]
struct Window {
    tol: f64,
    start: Option<f64>,
    len: usize,
    t_c: Option<f64>,
}

impl Window {
    fn new(tol: f64) -> Self {
        Window {
            tol,
            start: None,
            len: 0,
            t_c: None,
        }
    }

    fn push(&mut self, t: f64, q: f64) {
        if self.t_c.is_some() {
            return;
        }
        if q <= self.tol {
            if self.len == 0 {
                self.start = Some(t);
            }
            self.len += 1;
            if self.len >= STEADY_WINDOW {
                self.t_c = self.start;
            }
        } else {
            self.len = 0;
            self.start = None;
        }
    }
}

/// Batch steady-state test over states sampled at a uniform stride.
pub fn detect_steady_state(
    samples: &[(f64, &SpectralVelocity)],
    tol: f64,
) -> Result<SteadyOutcome> {
    if !(tol > 0.0) {
        return Err(Error::param("steady_tol", tol, "must be > 0"));
    }
    if samples.len() < 2 {
        return Ok(SteadyOutcome {
            converged: false,
            t_c: None,
            quotients: Vec::new(),
        });
    }
    let stride = samples[1].0 - samples[0].0;
    if !(stride > 0.0) {
        return Err(Error::Precondition(
            "samples must be increasing in time".into(),
        ));
    }
    let mut window = Window::new(tol);
    let mut quotients = Vec::with_capacity(samples.len() - 1);
    for w in samples.windows(2) {
        let d = w[1].0 - w[0].0;
        if (d - stride).abs() > 1e-9 * stride {
            return Err(Error::Precondition(format!(
                "non-uniform stride {d} vs {stride} at t = {}",
                w[0].0
            )));
        }
        let q = steady_quotient(w[0].1, w[1].1, stride);
        quotients.push((w[0].0, q));
        window.push(w[0].0, q);
    }
    Ok(SteadyOutcome {
        converged: window.t_c.is_some(),
        t_c: window.t_c,
        quotients,
    })
}

/// Online form of [`detect_steady_state`]; optionally stops the run once the
/// window is complete.
pub struct SteadyStateDetector {
    stride: f64,
    prev: Option<(f64, SpectralVelocity)>,
    window: Window,
    quotients: Vec<(f64, f64)>,
    stop_on_converge: bool,
}

impl SteadyStateDetector {
    pub fn new(stride: f64, tol: f64, stop_on_converge: bool) -> Self {
        SteadyStateDetector {
            stride,
            prev: None,
            window: Window::new(tol),
            quotients: Vec::new(),
            stop_on_converge,
        }
    }

    pub fn outcome(&self) -> SteadyOutcome {
        SteadyOutcome {
            converged: self.window.t_c.is_some(),
            t_c: self.window.t_c,
            quotients: self.quotients.clone(),
        }
    }
}

impl Observer for SteadyStateDetector {
    fn stride(&self) -> Stride {
        Stride::Time(self.stride)
    }

    fn observe(&mut self, state: &SolverState, _physics: &Physics) -> Result<Flow> {
        if let Some((t0, prev)) = &self.prev {
            if *t0 == state.t {
                return Ok(Flow::Continue);
            }
            let q = steady_quotient(prev, &state.u, state.t - t0);
            self.quotients.push((*t0, q));
            self.window.push(*t0, q);
        }
        self.prev = Some((state.t, state.u.clone()));
        if self.stop_on_converge && self.window.t_c.is_some() {
            Ok(Flow::Stop)
        } else {
            Ok(Flow::Continue)
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub alpha: f64,
    pub beta: f64,
    pub converged: bool,
    /// Convergence time; `None` when not converged by `max_t`.
    pub t_c: Option<f64>,
    /// Time at which the run stopped.
    pub t_end: f64,
    pub final_energy: f64,
    pub final_v2: f64,
    pub final_umax: f64,
    pub steps: u64,
    pub snapshot: Option<PathBuf>,
    pub final_state: SolverState,
}

impl CellResult {
    pub fn id(&self) -> String {
        cell_id(self.alpha, self.beta)
    }
}

fn cell_id(alpha: f64, beta: f64) -> String {
    format!("a{alpha}-b{beta}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Alpha,
    Beta,
}

/// Whether `T_c` is non-increasing along one axis with the other held fixed.
/// Unconverged cells count as `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityVerdict {
    pub along: SweepAxis,
    pub fixed: f64,
    /// `(varying parameter, T_c)` in increasing parameter order.
    pub points: Vec<(f64, Option<f64>)>,
    pub non_increasing: bool,
}

#[derive(Debug, Clone)]
pub struct SeparationRun {
    pub delta: f64,
    pub times: Vec<f64>,
    /// `|u₁(t) − u₂(t)|`.
    pub distances: Vec<f64>,
    pub max_ratio: f64,
    /// Smallest `c` with `d(t) ≤ δ e^{ct}` on the record.
    pub growth_rate: f64,
    /// `|d(0) − δ| ≤ 10⁻¹²·δ`.
    pub starts_at_delta: bool,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub runs: Vec<SeparationRun>,
    /// `max/min` of `max_t d_δ(t)/δ` across the amplitudes.
    pub ratio_span: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct AbsorbingCell {
    pub alpha: f64,
    pub beta: f64,
    pub report: AbsorbingReport,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub cells: Vec<CellResult>,
    pub verdicts: Vec<MonotonicityVerdict>,
    pub separation: Option<SeparationReport>,
    pub absorbing: Vec<AbsorbingCell>,
}

impl SweepResult {
    pub fn cell(&self, alpha: f64, beta: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.alpha == alpha && c.beta == beta)
    }
}

fn with_params(base: &RunConfig, alpha: f64, beta: f64) -> RunConfig {
    let mut cfg = base.clone();
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.run_id = cell_id(alpha, beta);
    cfg
}

fn in_cell<T>(alpha: f64, beta: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Cell {
        alpha,
        beta,
        source: Box::new(e),
    })
}

/// Runs one configuration until steady or `max_t`.
pub fn run_to_steady_state(
    cfg: &RunConfig,
    steady_tol: f64,
    steady_stride: f64,
    max_t: f64,
) -> Result<CellResult> {
    let grid = cfg.grid()?;
    let physics = cfg.physics(&grid)?;
    let state = cfg.initial_state(&grid)?;
    let mut detector = SteadyStateDetector::new(steady_stride, steady_tol, true);
    let end = integrate(state, max_t, &cfg.scheme, &physics, &mut [&mut detector])?;
    let outcome = detector.outcome();
    let rec = crate::diagnostics::record(&end.u, end.t, &physics)?;
    Ok(CellResult {
        alpha: cfg.alpha,
        beta: cfg.beta,
        converged: outcome.converged,
        t_c: outcome.t_c,
        t_end: end.t,
        final_energy: rec.e,
        final_v2: rec.v2,
        final_umax: rec.umax,
        steps: end.step_count,
        snapshot: None,
        final_state: end,
    })
}

/// Every `(α, β)` cell from the base initial condition.
pub fn run_steady_state_experiment(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cells = spec.cells();
    let results = par::map_slice(&cells, |&(alpha, beta)| {
        let cfg = with_params(&spec.base, alpha, beta);
        in_cell(
            alpha,
            beta,
            (|| {
                let mut cell =
                    run_to_steady_state(&cfg, spec.steady_tol, spec.steady_stride, spec.max_t)?;
                if spec.persist {
                    let dir = cfg.run_dir();
                    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                    let path = dir.join("final.bin");
                    let physics = cfg.physics(cell.final_state.u.grid())?;
                    write_snapshot(&cell.final_state, &physics, &path)?;
                    cell.snapshot = Some(path);
                }
                Ok(cell)
            })(),
        )
    });
    Ok(SweepResult {
        cells: results.into_iter().collect::<Result<_>>()?,
        ..Default::default()
    })
}

/// Monotonicity of `T_c` along each axis of a completed sweep.
pub fn monotonicity_verdicts(cells: &[CellResult]) -> Vec<MonotonicityVerdict> {
    let key = |t: Option<f64>| t.unwrap_or(f64::INFINITY);
    let mut out = Vec::new();
    for along in [SweepAxis::Beta, SweepAxis::Alpha] {
        type Key = fn(&CellResult) -> f64;
        let (fixed_of, var_of): (Key, Key) = match along {
            SweepAxis::Beta => (|c| c.alpha, |c| c.beta),
            SweepAxis::Alpha => (|c| c.beta, |c| c.alpha),
        };
        let mut fixed: Vec<f64> = cells.iter().map(fixed_of).collect();
        fixed.sort_by(f64::total_cmp);
        fixed.dedup();
        for f in fixed {
            let mut points: Vec<(f64, Option<f64>)> = cells
                .iter()
                .filter(|c| fixed_of(c) == f)
                .map(|c| (var_of(c), c.t_c))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let non_increasing = points.windows(2).all(|w| key(w[1].1) <= key(w[0].1));
            out.push(MonotonicityVerdict {
                along,
                fixed: f,
                points,
                non_increasing,
            });
        }
    }
    out
}

/// Steady-state sweep plus observational monotonicity verdicts.
pub fn run_convergence_speed_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    let mut result = run_steady_state_experiment(spec)?;
    result.verdicts = monotonicity_verdicts(&result.cells);
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct IndependenceResult {
    pub a: CellResult,
    pub b: CellResult,
    /// Both runs reached a steady state.
    pub conclusive: bool,
    /// Time both runs were continued to.
    pub t_common: f64,
    /// `|u_A(T) − u_B(T)|`.
    pub distance: f64,
    /// `distance / max(1, |u_A(T)|)`.
    pub relative: f64,
    /// `10 · steady_tol`.
    pub threshold: f64,
    /// `distance ≤ threshold`; false when inconclusive.
    pub same_state: bool,
}

/// Runs the base cell from two initial conditions to steady state, then
/// continues both to the common time `max_t` and compares the states there.
pub fn run_initial_condition_independence(
    spec: &ExperimentSpec,
    first: &InitialCondition,
    second: &InitialCondition,
) -> Result<IndependenceResult> {
    spec.validate()?;
    let configs: Vec<RunConfig> = [first, second]
        .iter()
        .map(|ic| RunConfig {
            initial: (*ic).clone(),
            ..spec.base.clone()
        })
        .collect();
    let runs = par::map_slice(&configs, |cfg| {
        run_to_steady_state(cfg, spec.steady_tol, spec.steady_stride, spec.max_t)
    });
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let t_common = spec.max_t;
    let grid = spec.base.grid()?;
    let physics = spec.base.physics(&grid)?;
    // Fixed points of an integrating-factor step depend on its length, so
    // both runs continue with one common fixed step that divides the stride.
    let scheme = if spec.base.scheme.adaptive {
        let mut nominal = f64::INFINITY;
        for r in &runs {
            nominal = nominal.min(adapt_dt(&r.final_state, &spec.base.scheme, &physics)?);
        }
        let per_stride = (spec.steady_stride / nominal).ceil().max(1.0);
        SchemeConfig::fixed(spec.base.scheme.method, spec.steady_stride / per_stride)
    } else {
        spec.base.scheme.clone()
    };
    for r in runs.iter_mut() {
        if r.t_end < t_common {
            r.final_state = integrate(r.final_state.clone(), t_common, &scheme, &physics, &mut [])?;
            r.t_end = r.final_state.t;
        }
    }
    let b = runs.pop().expect("two runs");
    let a = runs.pop().expect("two runs");
    let distance = a.final_state.u.distance(&b.final_state.u);
    let relative = distance / a.final_state.u.norm().max(1.0);
    let threshold = 10.0 * spec.steady_tol;
    let conclusive = a.converged && b.converged;
    Ok(IndependenceResult {
        conclusive,
        t_common,
        distance,
        relative,
        threshold,
        same_state: conclusive && distance <= threshold,
        a,
        b,
    })
}

/// Unit-norm solenoidal perturbation.
pub fn unit_perturbation(grid: &crate::grid::WaveGrid, seed: u64) -> Result<SpectralVelocity> {
    make_initial_condition(
        &InitialCondition::RandomDivFree {
            seed,
            energy: 1.0,
            slope: -5.0 / 3.0,
        },
        grid,
    )
}

/// Distances `|u₁(t) − u₂(t)|` for perturbed copies of one trajectory,
/// all advanced in lockstep with the fixed step `base.scheme.dt`.
pub fn separation_series(
    base: &RunConfig,
    seed: u64,
    deltas: &[f64],
    t_end: f64,
    record_every: u64,
) -> Result<Vec<SeparationRun>> {
    let grid = base.grid()?;
    let physics = base.physics(&grid)?;
    let reference = base.initial_state(&grid)?;
    let p = unit_perturbation(&grid, seed)?;
    let mut states = vec![reference.clone()];
    for &d in deltas {
        let mut s = reference.clone();
        s.u.axpy(d, &p);
        states.push(s);
    }
    let dt = base.scheme.dt;
    let steps = (t_end / dt).round() as u64;
    let every = record_every.max(1);
    let mut times = vec![0.0];
    let mut dists: Vec<Vec<f64>> = states[1..]
        .iter()
        .map(|s| vec![states[0].u.distance(&s.u)])
        .collect();
    for n in 1..=steps {
        let next = par::map_slice(&states, |s| {
            step_with_dt(s, dt, base.scheme.method, &physics)
        });
        states = next.into_iter().collect::<Result<_>>()?;
        if n % every == 0 || n == steps {
            let t = n as f64 * dt;
            for s in states.iter_mut() {
                s.t = t;
            }
            times.push(t);
            for (d, s) in dists.iter_mut().zip(&states[1..]) {
                d.push(states[0].u.distance(&s.u));
            }
        }
    }
    Ok(deltas
        .iter()
        .zip(dists)
        .map(|(&delta, distances)| {
            let max_ratio = distances.iter().fold(0.0_f64, |m, &d| m.max(d / delta));
            let growth_rate = times
                .iter()
                .zip(&distances)
                .skip(1)
                .map(|(&t, &d)| (d / delta).ln() / t)
                .fold(f64::NEG_INFINITY, f64::max);
            let starts_at_delta = (distances[0] - delta).abs() <= 1e-12 * delta;
            SeparationRun {
                delta,
                times: times.clone(),
                distances,
                max_ratio,
                growth_rate,
                starts_at_delta,
            }
        })
        .collect())
}

/// Largest over smallest `max_t d_δ(t)/δ` across runs.
pub fn ratio_span(runs: &[SeparationRun]) -> f64 {
    let hi = runs
        .iter()
        .map(|r| r.max_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = runs
        .iter()
        .map(|r| r.max_ratio)
        .fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Continuous-dependence test in the uniqueness regime: the ratio
/// `max_t d_δ(t)/δ` must agree across amplitudes within a factor 2.
pub fn run_trajectory_separation(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let b = &spec.base;
    Regime::Uniqueness.require(b.mu, b.alpha, b.beta)?;
    let p = spec
        .perturbation
        .as_ref()
        .ok_or_else(|| Error::Precondition("separation needs a perturbation".into()))?;
    let mut base = b.clone();
    base.scheme.adaptive = false;
    let record_every = match b.diag_stride {
        Stride::Steps(k) => k,
        Stride::Time(d) => ((d / base.scheme.dt).round() as u64).max(1),
    };
    let runs = separation_series(&base, p.seed, &p.deltas, spec.max_t, record_every)?;
    let span = ratio_span(&runs);
    let pass = span < 2.0
        && runs
            .iter()
            .all(|r| r.starts_at_delta && r.max_ratio.is_finite());
    Ok(SweepResult {
        separation: Some(SeparationReport {
            runs,
            ratio_span: span,
            pass,
        }),
        ..Default::default()
    })
}

/// Absorbing-ball check for every cell, run from the base initial condition
/// to `max_t`.
pub fn run_absorbing_sweep(spec: &ExperimentSpec, entry_tol: f64) -> Result<SweepResult> {
    spec.validate()?;
    let cells = spec.cells();
    let results = par::map_slice(&cells, |&(alpha, beta)| {
        let cfg = with_params(&spec.base, alpha, beta);
        in_cell(
            alpha,
            beta,
            (|| {
                let grid = cfg.grid()?;
                let physics = cfg.physics(&grid)?;
                let mut rec = DiagnosticsRecorder::new(cfg.diag_stride);
                integrate(
                    cfg.initial_state(&grid)?,
                    spec.max_t,
                    &cfg.scheme,
                    &physics,
                    &mut [&mut rec],
                )?;
                let records: Vec<DiagnosticsRecord> = rec.finish()?;
                let scale = records.first().map_or(1.0, |r| r.e.max(1.0));
                let report = check_absorbing_ball(
                    &records,
                    cfg.mu,
                    stokes_lambda1(&grid),
                    physics.forcing.norm_sq(),
                    entry_tol,
                    1e-6 * scale,
                    1.0,
                )?;
                Ok(AbsorbingCell {
                    alpha,
                    beta,
                    report,
                })
            })(),
        )
    });
    Ok(SweepResult {
        absorbing: results.into_iter().collect::<Result<_>>()?,
        ..Default::default()
    })
}

/// Dispatches on `spec.kind`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepResult> {
    match spec.kind {
        ExperimentKind::SteadyState => run_steady_state_experiment(spec),
        ExperimentKind::ParameterSweep => run_convergence_speed_sweep(spec),
        ExperimentKind::TrajectorySeparation => run_trajectory_separation(spec),
        ExperimentKind::AbsorbingSweep => run_absorbing_sweep(spec, 1.0),
    }
}
