//! Run configuration: a flat INI-style format with sections `[physics]`,
//! `[grid]`, `[forcing]`, `[initial]`, `[scheme]` and `[run]`.
//!
//! ```text
//! preset = decay-shear-b1     # optional, before any section
//!
//! [physics]
//! mu = 0.1                    # required unless a preset is given
//! alpha = 0.2
//! beta = 1
//!
//! [grid]
//! n = 16
//! l = 2pi                     # numbers may carry a trailing `pi`
//!
//! [forcing]
//! kind = zero                 # zero | cylinder
//! radius = 4                  # cylinder only; default 4
//! height = 4                  # default 4
//! axis = y                    # default y
//! g = 0, 2, 0                 # default (0, 2, 0)
//! center = 6, 6, 6            # default: box center
//!
//! [initial]
//! kind = zero                 # zero | shear | random | uniform_projection
//! amplitude = 1               # shear; default 1
//! seed = 0                    # random; default 0
//! energy = 1                  # random; default 1
//! slope = -1.6667             # random; default -5/3
//! vector = 1, 0, 0            # uniform_projection; default (1, 0, 0)
//!
//! [scheme]
//! method = if-rk2             # if-rk2 | if-rk4; default if-rk2
//! adaptive = true             # default true
//! dt = 0.01                   # fixed step, or first guess when adaptive
//! cfl = 0.4
//! dt_min = 1e-6
//! dt_max = 0.1
//!
//! [run]
//! t_end = 1
//! diag_stride = 10            # steps; or diag_interval = <time>
//! snapshot_interval = 5       # or snapshot_stride = <steps>; default none
//! output_dir = out
//! run_id = run
//! ```
//!
//! Unknown sections and keys, repeated keys and out-of-range values are
//! errors carrying the line number.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use crate::error::{ConfigError, Error, Result};
use crate::forcing::{Axis, Cylinder, ForcingField, ForcingSpec};
use crate::grid::WaveGrid;
use crate::initial::{make_initial_condition, InitialCondition};
use crate::integrator::{Method, Physics, SchemeConfig, SolverState, Stride};

/// Viscosity used by the steady-state presets.
pub const STEADY_MU: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub l: f64,
    pub forcing: ForcingSpec,
    pub initial: InitialCondition,
    pub scheme: SchemeConfig,
    pub diag_stride: Stride,
    pub snapshot_stride: Option<Stride>,
    pub t_end: f64,
    pub output_dir: PathBuf,
    pub run_id: String,
}

impl RunConfig {
    /// Defaults for everything except physics and grid.
    pub fn new(mu: f64, alpha: f64, beta: f64, n: usize, l: f64) -> Self {
        RunConfig {
            mu,
            alpha,
            beta,
            n,
            l,
            forcing: ForcingSpec::Zero,
            initial: InitialCondition::Zero,
            scheme: SchemeConfig::default(),
            diag_stride: Stride::Steps(10),
            snapshot_stride: None,
            t_end: 1.0,
            output_dir: PathBuf::from("out"),
            run_id: "run".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        WaveGrid::new(self.n, self.l)?;
        crate::spectral::validate_damping(self.alpha, self.beta)?;
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::param("mu", self.mu, "viscosity must be > 0"));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::param("t_end", self.t_end, "must be >= 0"));
        }
        self.scheme.validate()?;
        for s in std::iter::once(self.diag_stride).chain(self.snapshot_stride) {
            match s {
                Stride::Steps(0) => {
                    return Err(Error::Precondition("step strides must be >= 1".into()))
                }
                Stride::Time(d) if !(d > 0.0 && d.is_finite()) => {
                    return Err(Error::param("interval", d, "must be > 0"))
                }
                _ => {}
            }
        }
        if self.run_id.is_empty() || self.run_id.contains(['/', '\\']) {
            return Err(Error::Precondition(format!(
                "run_id {:?} must be a non-empty file name",
                self.run_id
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<WaveGrid> {
        WaveGrid::new(self.n, self.l)
    }

    pub fn physics(&self, grid: &WaveGrid) -> Result<Physics> {
        let forcing = ForcingField::new(self.forcing.clone(), grid)?;
        Physics::new(self.mu, self.alpha, self.beta, forcing)
    }

    pub fn initial_state(&self, grid: &WaveGrid) -> Result<SolverState> {
        Ok(SolverState::new(make_initial_condition(
            &self.initial,
            grid,
        )?))
    }

    /// Directory for this run's artifacts.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(&self.run_id)
    }
}

/// Built-in configurations with a one-line description.
pub fn presets() -> Vec<(String, String)> {
    let mut out = vec![(
        "decay-shear-b1".to_string(),
        "single shear mode, linear damping, no forcing (exact exponential decay)".to_string(),
    )];
    for (a, alpha) in [("02", 0.2), ("05", 0.5)] {
        for beta in [1, 2, 4] {
            out.push((
                format!("steady-a{a}-b{beta}"),
                format!("cylinder forcing, u0 = 0, alpha = {alpha}, beta = {beta}"),
            ));
        }
    }
    out.push((
        "steady-a02-b1-u0x".to_string(),
        "as steady-a02-b1, started from the projected ball flow along x".to_string(),
    ));
    out
}

pub fn preset(name: &str) -> Option<RunConfig> {
    if name == "decay-shear-b1" {
        let mut c = RunConfig::new(0.1, 0.2, 1.0, 16, 2.0 * PI);
        c.initial = InitialCondition::Shear { amplitude: 1.0 };
        c.scheme = SchemeConfig::fixed(Method::IfRk2, 1e-3);
        c.t_end = 5.0;
        c.run_id = name.into();
        return Some(c);
    }
    let rest = name.strip_prefix("steady-a")?;
    let (rest, u0x) = match rest.strip_suffix("-u0x") {
        Some(r) => (r, true),
        None => (rest, false),
    };
    let (a, b) = rest.split_once("-b")?;
    let alpha = match a {
        "02" => 0.2,
        "05" => 0.5,
        _ => return None,
    };
    let beta = match b {
        "1" => 1.0,
        "2" => 2.0,
        "4" => 4.0,
        _ => return None,
    };
    if u0x && (a, b) != ("02", "1") {
        return None;
    }
    let mut c = steady_config(alpha, beta);
    if u0x {
        c.initial = InitialCondition::UniformPlusProjection {
            vector: [1.0, 0.0, 0.0],
        };
    }
    c.run_id = name.into();
    Some(c)
}

/// Cylinder-forced box of period 12 at resolution 32, started from rest.
pub fn steady_config(alpha: f64, beta: f64) -> RunConfig {
    let l = 12.0;
    let mut c = RunConfig::new(STEADY_MU, alpha, beta, 32, l);
    c.forcing = ForcingSpec::Cylinder(Cylinder::centered(l));
    c.t_end = 200.0;
    c.diag_stride = Stride::Time(1.0);
    c
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

type Sections = HashMap<String, HashMap<String, Entry>>;

const SECTIONS: [&str; 6] = ["physics", "grid", "forcing", "initial", "scheme", "run"];

fn tokenize(text: &str) -> Result<(Option<(usize, String)>, Sections), ConfigError> {
    let mut sections: Sections = HashMap::new();
    let mut preset_key = None;
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line_no, "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ConfigError::at(
                    line_no,
                    format!(
                        "unknown section [{name}]; expected one of {}",
                        SECTIONS.join(", ")
                    ),
                ));
            }
            if sections.contains_key(&name) {
                return Err(ConfigError::at(
                    line_no,
                    format!("section [{name}] repeated"),
                ));
            }
            sections.insert(name.clone(), HashMap::new());
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::at(line_no, format!("expected `key = value`, got {line:?}"))
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(ConfigError::at(line_no, format!("{key} has no value")));
        }
        match &current {
            None if key == "preset" => {
                if preset_key.is_some() {
                    return Err(ConfigError::at(line_no, "preset given twice"));
                }
                preset_key = Some((line_no, value));
            }
            None => {
                return Err(ConfigError::at(
                    line_no,
                    format!("key {key} outside any section (only `preset` may appear here)"),
                ))
            }
            Some(section) => {
                let table = sections
                    .get_mut(section)
                    .expect("section inserted on header");
                if let Some(prev) = table.get(&key) {
                    return Err(ConfigError::at(
                        line_no,
                        format!("{key} already set on line {}", prev.line),
                    ));
                }
                table.insert(
                    key,
                    Entry {
                        line: line_no,
                        value,
                        used: false,
                    },
                );
            }
        }
    }
    Ok((preset_key, sections))
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        if head.is_empty() {
            PI
        } else {
            head.parse::<f64>().ok()? * PI
        }
    } else {
        s.parse::<f64>().ok()?
    };
    v.is_finite().then_some(v)
}

fn parse_vector(s: &str) -> Option<[f64; 3]> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<f64> = inner.split(',').map(parse_number).collect::<Option<_>>()?;
    parts.try_into().ok()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

/// Typed access to one section with usage tracking.
struct Table {
    name: &'static str,
    entries: Option<HashMap<String, Entry>>,
}

impl Table {
    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        let e = self.entries.as_mut()?.get_mut(key)?;
        e.used = true;
        Some((e.line, e.value.clone()))
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.as_ref()?.get(key).map(|e| e.line)
    }

    fn typed<T>(
        &mut self,
        key: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => parse(&v).map(Some).ok_or_else(|| {
                ConfigError::at(line, format!("[{}] {key} = {v:?} is not {what}", self.name))
            }),
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.typed(key, "a finite number", parse_number)
    }

    fn count(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.typed(key, "a non-negative integer", |s| s.parse::<u64>().ok())
    }

    fn vector(&mut self, key: &str) -> Result<Option<[f64; 3]>, ConfigError> {
        self.typed(key, "three comma-separated numbers", parse_vector)
    }

    fn text(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|(_, v)| v)
    }

    fn finish(self) -> Result<(), ConfigError> {
        let Some(entries) = &self.entries else {
            return Ok(());
        };
        let mut unused: Vec<&Entry> = entries.values().filter(|e| !e.used).collect();
        unused.sort_by_key(|e| e.line);
        if let Some(e) = unused.first() {
            let key = entries
                .iter()
                .find(|(_, v)| v.line == e.line)
                .map(|(k, _)| k.as_str())
                .unwrap_or("?");
            return Err(ConfigError::at(
                e.line,
                format!("unknown key {key} in [{}]", self.name),
            ));
        }
        Ok(())
    }
}

fn required<T>(v: Option<T>, key: &str, section: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::general(format!("missing required key {key} in [{section}]")))
}

/// Parses and validates a configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let (preset_key, mut sections) = tokenize(text)?;
    let base = match &preset_key {
        Some((line, name)) => Some(preset(name).ok_or_else(|| {
            ConfigError::at(*line, format!("unknown preset {name:?}; see `presets`"))
        })?),
        None => None,
    };
    let mut take = |name: &'static str| Table {
        name,
        entries: sections.remove(name),
    };

    let mut physics = take("physics");
    let mu = physics.number("mu")?;
    let alpha = physics.number("alpha")?;
    let beta = physics.number("beta")?;
    let mut grid = take("grid");
    let n = grid.count("n")?;
    let l = grid.number("l")?;

    let mut cfg = match base {
        Some(mut c) => {
            c.mu = mu.unwrap_or(c.mu);
            c.alpha = alpha.unwrap_or(c.alpha);
            c.beta = beta.unwrap_or(c.beta);
            c.n = n.map_or(c.n, |v| v as usize);
            c.l = l.unwrap_or(c.l);
            c
        }
        None => RunConfig::new(
            required(mu, "mu", "physics")?,
            required(alpha, "alpha", "physics")?,
            required(beta, "beta", "physics")?,
            required(n, "n", "grid")? as usize,
            required(l, "l", "grid")?,
        ),
    };
    let range = |table: &Table, key: &str, e: Error| -> ConfigError {
        match table.line(key) {
            Some(line) => ConfigError::at(line, e.to_string()),
            None => ConfigError::general(e.to_string()),
        }
    };
    if let Err(e) = crate::spectral::validate_damping(cfg.alpha, cfg.beta) {
        let key = if cfg.alpha.is_finite() && cfg.alpha > 0.0 {
            "beta"
        } else {
            "alpha"
        };
        return Err(range(&physics, key, e));
    }
    if !(cfg.mu > 0.0) {
        return Err(range(
            &physics,
            "mu",
            Error::param("mu", cfg.mu, "viscosity must be > 0"),
        ));
    }
    if let Err(e) = WaveGrid::new(cfg.n, cfg.l) {
        let key = if cfg.n >= 4 && cfg.n % 2 == 0 {
            "l"
        } else {
            "n"
        };
        return Err(range(&grid, key, e));
    }
    physics.finish()?;
    grid.finish()?;

    let mut forcing = take("forcing");
    let kind = forcing.text("kind");
    let cylinder_keys = ["radius", "height", "axis", "g", "center"];
    let has_geometry = cylinder_keys.iter().any(|k| forcing.line(k).is_some());
    match kind.as_deref() {
        Some("zero") => {
            if has_geometry {
                let line = cylinder_keys.iter().filter_map(|k| forcing.line(k)).min();
                return Err(ConfigError {
                    line,
                    message: "cylinder geometry given with kind = zero".into(),
                });
            }
            cfg.forcing = ForcingSpec::Zero;
        }
        Some("cylinder") => {
            let mut c = match &cfg.forcing {
                ForcingSpec::Cylinder(c) => c.clone(),
                _ => Cylinder::centered(cfg.l),
            };
            c.radius = forcing.number("radius")?.unwrap_or(c.radius);
            c.height = forcing.number("height")?.unwrap_or(c.height);
            c.g = forcing.vector("g")?.unwrap_or(c.g);
            c.center = forcing.vector("center")?.unwrap_or(c.center);
            if let Some(a) = forcing.typed("axis", "one of x, y, z", |s| match s {
                "x" => Some(Axis::X),
                "y" => Some(Axis::Y),
                "z" => Some(Axis::Z),
                _ => None,
            })? {
                c.axis = a;
            }
            for (key, v) in [("radius", c.radius), ("height", c.height)] {
                if !(v > 0.0) {
                    return Err(range(
                        &forcing,
                        key,
                        Error::param("cylinder", v, "radius and height must be > 0"),
                    ));
                }
            }
            cfg.forcing = ForcingSpec::Cylinder(c);
        }
        Some(other) => {
            let line = forcing.line("kind").expect("kind was read");
            return Err(ConfigError::at(
                line,
                format!("[forcing] kind = {other:?}; expected zero or cylinder"),
            ));
        }
        None if has_geometry => {
            return Err(ConfigError::general(
                "[forcing] cylinder geometry given without kind = cylinder",
            ))
        }
        None => {}
    }
    forcing.finish()?;

    let mut initial = take("initial");
    if let Some(kind) = initial.text("kind") {
        let line = initial.line("kind").expect("kind was read");
        cfg.initial = match kind.as_str() {
            "zero" => InitialCondition::Zero,
            "shear" => InitialCondition::Shear {
                amplitude: initial.number("amplitude")?.unwrap_or(1.0),
            },
            "random" => {
                let energy = initial.number("energy")?.unwrap_or(1.0);
                if energy < 0.0 {
                    return Err(range(&initial, "energy", Error::param("energy", energy, "initial energy must be >= 0")));
                }
                InitialCondition::RandomDivFree {
                    seed: initial.count("seed")?.unwrap_or(0),
                    energy,
                    slope: initial.number("slope")?.unwrap_or(-5.0 / 3.0),
                }
            }
            "uniform_projection" => InitialCondition::UniformPlusProjection {
                vector: initial.vector("vector")?.unwrap_or([1.0, 0.0, 0.0]),
            },
            other => {
                return Err(ConfigError::at(
                    line,
                    format!("[initial] kind = {other:?}; expected zero, shear, random or uniform_projection"),
                ))
            }
        };
    }
    initial.finish()?;

    let mut scheme = take("scheme");
    if let Some(m) = scheme.typed("method", "if-rk2 or if-rk4", Method::from_name)? {
        cfg.scheme.method = m;
    }
    if let Some(a) = scheme.typed("adaptive", "a boolean", parse_bool)? {
        cfg.scheme.adaptive = a;
    }
    if let Some(dt) = scheme.number("dt")? {
        cfg.scheme.dt = dt;
        if !cfg.scheme.adaptive {
            cfg.scheme.dt_max = cfg.scheme.dt_max.max(dt);
            cfg.scheme.dt_min = cfg.scheme.dt_min.min(dt);
        }
    }
    if let Some(v) = scheme.number("cfl")? {
        cfg.scheme.cfl_target = v;
    }
    if let Some(v) = scheme.number("dt_min")? {
        cfg.scheme.dt_min = v;
    }
    if let Some(v) = scheme.number("dt_max")? {
        cfg.scheme.dt_max = v;
    }
    if let Err(e) = cfg.scheme.validate() {
        let line = ["dt", "cfl", "dt_min", "dt_max"]
            .iter()
            .filter_map(|k| scheme.line(k))
            .min();
        return Err(ConfigError {
            line,
            message: e.to_string(),
        });
    }
    scheme.finish()?;

    let mut run = take("run");
    if let Some(t) = run.number("t_end")? {
        if t < 0.0 {
            return Err(range(
                &run,
                "t_end",
                Error::param("t_end", t, "must be >= 0"),
            ));
        }
        cfg.t_end = t;
    }
    let stride =
        |run: &mut Table, steps: &str, interval: &str| -> Result<Option<Stride>, ConfigError> {
            match (run.count(steps)?, run.number(interval)?) {
                (Some(_), Some(_)) => Err(ConfigError::at(
                    run.line(interval).expect("interval was read"),
                    format!("{steps} and {interval} are mutually exclusive"),
                )),
                (Some(0), None) => Err(ConfigError::at(
                    run.line(steps).expect("steps was read"),
                    format!("{steps} must be >= 1"),
                )),
                (Some(k), None) => Ok(Some(Stride::Steps(k))),
                (None, Some(d)) if d > 0.0 => Ok(Some(Stride::Time(d))),
                (None, Some(_)) => Err(ConfigError::at(
                    run.line(interval).expect("interval was read"),
                    format!("{interval} must be > 0"),
                )),
                (None, None) => Ok(None),
            }
        };
    if let Some(s) = stride(&mut run, "diag_stride", "diag_interval")? {
        cfg.diag_stride = s;
    }
    if let Some(s) = stride(&mut run, "snapshot_stride", "snapshot_interval")? {
        cfg.snapshot_stride = Some(s);
    }
    if let Some(d) = run.text("output_dir") {
        cfg.output_dir = PathBuf::from(d);
    }
    if let Some(id) = run.text("run_id") {
        cfg.run_id = id;
    }
    let run_id_line = run.line("run_id");
    run.finish()?;

    cfg.validate().map_err(|e| ConfigError {
        line: run_id_line,
        message: e.to_string(),
    })?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c =
            parse_config("[physics]\nmu = 0.1\nalpha = 0.2\nbeta = 3\n[grid]\nn = 16\nl = 2pi\n")
                .unwrap();
        assert_eq!(c.scheme.method, Method::IfRk2);
        assert!(c.scheme.adaptive);
        assert_eq!(c.diag_stride, Stride::Steps(10));
        assert_eq!(c.forcing, ForcingSpec::Zero);
        assert!((c.l - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn range_errors_name_the_constraint() {
        let e =
            parse_config("[physics]\nmu = 0.1\nalpha = 0.2\nbeta = 0.5\n[grid]\nn = 16\nl = 1\n")
                .unwrap_err();
        assert_eq!(e.line, Some(4));
        assert!(
            e.message.contains("beta") && e.message.contains(">= 1"),
            "{e}"
        );
        let e = parse_config("[physics]\nmu = 0.1\nalpha = 0\nbeta = 2\n[grid]\nn = 16\nl = 1\n")
            .unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(
            e.message.contains("alpha") && e.message.contains("> 0"),
            "{e}"
        );
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let base = "[physics]\nmu = 0.1\nalpha = 0.2\nbeta = 1\n[grid]\nn = 16\nl = 1\n";
        let e = parse_config(&format!("{base}[run]\nt_ned = 3\n")).unwrap_err();
        assert_eq!(e.line, Some(9));
        assert!(e.message.contains("t_ned"));
        let e = parse_config(&format!("{base}[output]\n")).unwrap_err();
        assert_eq!(e.line, Some(8));
        let e = parse_config(&format!("{base}[run]\nt_end = 1\nt_end = 2\n")).unwrap_err();
        assert_eq!(e.line, Some(10));
        let e = parse_config("[physics]\nmu = 0.1\n").unwrap_err();
        assert!(e.message.contains("alpha"));
    }

    #[test]
    fn full_config() {
        let text = "\
# comment
[physics]
mu = 0.05
alpha = 0.5
beta = 3
[grid]
n = 32
l = 12
[forcing]
kind = cylinder
axis = y
[initial]
kind = random
seed = 9
energy = 10
[scheme]
method = if-rk4
adaptive = false
dt = 0.002
[run]
t_end = 2.5
diag_interval = 0.25
snapshot_stride = 100
output_dir = /tmp/x
run_id = r1
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.forcing, ForcingSpec::Cylinder(Cylinder::centered(12.0)));
        assert_eq!(
            c.initial,
            InitialCondition::RandomDivFree {
                seed: 9,
                energy: 10.0,
                slope: -5.0 / 3.0
            }
        );
        assert_eq!(c.scheme.method, Method::IfRk4);
        assert!(!c.scheme.adaptive);
        assert_eq!(c.scheme.dt, 0.002);
        assert_eq!(c.diag_stride, Stride::Time(0.25));
        assert_eq!(c.snapshot_stride, Some(Stride::Steps(100)));
        assert_eq!(c.run_dir(), PathBuf::from("/tmp/x/r1"));
    }

    #[test]
    fn presets_resolve() {
        for (name, _) in presets() {
            let c = preset(&name).unwrap();
            c.validate().unwrap();
            assert_eq!(c.run_id, name);
        }
        let c = preset("steady-a02-b1").unwrap();
        assert_eq!((c.alpha, c.beta, c.n, c.l), (0.2, 1.0, 32, 12.0));
        assert_eq!(c.initial, InitialCondition::Zero);
        let c = preset("decay-shear-b1").unwrap();
        assert_eq!((c.mu, c.alpha, c.beta, c.n), (0.1, 0.2, 1.0, 16));
        assert!(!c.scheme.adaptive && c.scheme.dt == 1e-3 && c.t_end == 5.0);
        assert!(preset("steady-a05-b1-u0x").is_none());
        assert!(preset("steady-a03-b1").is_none());

        let c = parse_config("preset = steady-a05-b4\n[run]\nt_end = 10\n").unwrap();
        assert_eq!((c.alpha, c.beta, c.t_end), (0.5, 4.0, 10.0));
        assert!(parse_config("preset = nope\n").unwrap_err().line == Some(1));
    }
}
