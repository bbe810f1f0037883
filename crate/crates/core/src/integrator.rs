//! Integrating-factor Runge–Kutta time stepping.
//!
//! The viscous term `−μAu` is diagonal in Fourier space and is integrated
//! exactly through the per-mode factor `exp(−μ|k|²h)`. Advection, damping and
//! forcing are advanced explicitly.

use crate::error::{Error, Result};
use crate::field::SpectralVelocity;
use crate::forcing::ForcingField;
use crate::spectral::{advection_and_damping, reproject, validate_damping};

/// Coefficient magnitude above which a step is treated as a numerical blow-up.
pub const OVERFLOW_GUARD: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Integrating-factor Heun, second order.
    IfRk2,
    /// Integrating-factor classical Runge–Kutta, fourth order.
    IfRk4,
}

impl Method {
    pub fn order(self) -> i32 {
        match self {
            Method::IfRk2 => 2,
            Method::IfRk4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::IfRk2 => "if-rk2",
            Method::IfRk4 => "if-rk4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "if-rk2" | "ifrk2" | "rk2" => Some(Method::IfRk2),
            "if-rk4" | "ifrk4" | "rk4" => Some(Method::IfRk4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub method: Method,
    /// Step size when `adaptive` is false; initial guess otherwise.
    pub dt: f64,
    pub cfl_target: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub adaptive: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            method: Method::IfRk2,
            dt: 0.01,
            cfl_target: 0.4,
            dt_min: 1e-6,
            dt_max: 0.1,
            adaptive: true,
        }
    }
}

impl SchemeConfig {
    pub fn fixed(method: Method, dt: f64) -> Self {
        SchemeConfig {
            method,
            dt,
            dt_min: dt.min(1e-6),
            dt_max: dt,
            adaptive: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt && self.dt <= self.dt_max) {
            return Err(Error::Precondition(format!(
                "need 0 < dt_min <= dt <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt, self.dt_max
            )));
        }
        if !(self.cfl_target > 0.0 && self.cfl_target <= 1.0) {
            return Err(Error::param(
                "cfl_target",
                self.cfl_target,
                "must lie in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// Physical parameters of one run.
#[derive(Debug, Clone)]
pub struct Physics {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub forcing: ForcingField,
}

impl Physics {
    pub fn new(mu: f64, alpha: f64, beta: f64, forcing: ForcingField) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::param("mu", mu, "viscosity must be > 0"));
        }
        validate_damping(alpha, beta)?;
        Ok(Physics {
            mu,
            alpha,
            beta,
            forcing,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub u: SpectralVelocity,
    pub step_count: u64,
    pub last_dt: f64,
}

impl SolverState {
    pub fn new(u: SpectralVelocity) -> Self {
        SolverState {
            t: 0.0,
            u,
            step_count: 0,
            last_dt: 0.0,
        }
    }
}

/// Non-viscous right-hand side `N(u) + D(u) + P f`.
pub fn explicit_rhs(u: &SpectralVelocity, physics: &Physics) -> Result<SpectralVelocity> {
    let mut rhs = advection_and_damping(u, physics.alpha, physics.beta)?;
    if !physics.forcing.is_zero() {
        rhs.axpy(1.0, physics.forcing.spectral());
    }
    Ok(rhs)
}

/// Multiplies every mode by `exp(−μ|k|²h)`.
fn viscous_factor(u: &mut SpectralVelocity, mu: f64, h: f64) {
    let grid = u.grid().clone();
    let c = u.coeffs_mut();
    for m in grid.modes() {
        let e = (-mu * m.k2 * h).exp();
        for comp in c.iter_mut() {
            comp[m.index] *= e;
        }
    }
}

fn decayed(u: &SpectralVelocity, mu: f64, h: f64) -> SpectralVelocity {
    let mut out = u.clone();
    viscous_factor(&mut out, mu, h);
    out
}

/// Advances one step of size `dt` with the given method.
pub fn step_with_dt(
    state: &SolverState,
    dt: f64,
    method: Method,
    physics: &Physics,
) -> Result<SolverState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", dt, "time step must be > 0"));
    }
    let mu = physics.mu;
    let u = &state.u;
    let mut next = match method {
        Method::IfRk2 => {
            let k1 = explicit_rhs(u, physics)?;
            let mut pred = u.clone();
            pred.axpy(dt, &k1);
            viscous_factor(&mut pred, mu, dt);
            let k2 = explicit_rhs(&pred, physics)?;
            let mut out = u.clone();
            out.axpy(0.5 * dt, &k1);
            viscous_factor(&mut out, mu, dt);
            out.axpy(0.5 * dt, &k2);
            out
        }
        Method::IfRk4 => {
            let half = 0.5 * dt;
            let k1 = explicit_rhs(u, physics)?;
            let mut a = u.clone();
            a.axpy(half, &k1);
            viscous_factor(&mut a, mu, half);
            let k2 = explicit_rhs(&a, physics)?;
            let mut b = decayed(u, mu, half);
            b.axpy(half, &k2);
            let k3 = explicit_rhs(&b, physics)?;
            let mut c = decayed(u, mu, dt);
            c.axpy(dt, &decayed(&k3, mu, half));
            let k4 = explicit_rhs(&c, physics)?;

            // E(dt)u + dt/6 [E(dt)k1 + 2E(dt/2)(k2 + k3) + k4]
            let mut mid = k2;
            mid.axpy(1.0, &k3);
            let mut out = u.clone();
            out.axpy(dt / 6.0, &k1);
            viscous_factor(&mut out, mu, half);
            out.axpy(dt / 3.0, &mid);
            viscous_factor(&mut out, mu, half);
            out.axpy(dt / 6.0, &k4);
            out
        }
    };
    reproject(&mut next);
    let biggest = next.max_coeff();
    if !biggest.is_finite() || biggest > OVERFLOW_GUARD {
        return Err(Error::BlowUp { max_coeff: biggest });
    }
    Ok(SolverState {
        t: state.t + dt,
        u: next,
        step_count: state.step_count + 1,
        last_dt: dt,
    })
}

/// Stable step size from the advective CFL limit and the damping stiffness:
/// `clamp(min(cfl·Δx/max|u|, cfl/(α max|u|^{β−1})), dt_min, dt_max)`.
pub fn adapt_dt(state: &SolverState, scheme: &SchemeConfig, physics: &Physics) -> Result<f64> {
    let grid = state.u.grid();
    let umax = state.u.to_physical().max_speed();
    if !umax.is_finite() {
        return Err(Error::NonFinite("velocity field"));
    }
    let cfl = scheme.cfl_target;
    let advective = if umax > 0.0 {
        cfl * grid.dx() / umax
    } else {
        f64::INFINITY
    };
    let stiffness = if umax > 0.0 {
        physics.alpha * umax.powf(physics.beta - 1.0)
    } else if physics.beta == 1.0 {
        physics.alpha
    } else {
        0.0
    };
    let damping = if stiffness > 0.0 {
        cfl / stiffness
    } else {
        f64::INFINITY
    };
    Ok(advective.min(damping).clamp(scheme.dt_min, scheme.dt_max))
}

/// One step with the scheme's own step-size rule.
pub fn step(state: &SolverState, scheme: &SchemeConfig, physics: &Physics) -> Result<SolverState> {
    let dt = if scheme.adaptive {
        adapt_dt(state, scheme, physics)?
    } else {
        scheme.dt
    };
    step_with_dt(state, dt, scheme.method, physics)
}

/// When an observer fires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stride {
    /// Whenever `step_count` is a multiple of the value.
    Steps(u64),
    /// At every multiple of the interval; steps are shortened to land on them.
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Read-only hook invoked by [`integrate`] at the initial time and at its stride.
pub trait Observer {
    fn stride(&self) -> Stride;
    fn observe(&mut self, state: &SolverState, physics: &Physics) -> Result<Flow>;
}

/// Observer backed by a closure.
pub struct Every<F> {
    pub stride: Stride,
    pub f: F,
}

impl<F> Observer for Every<F>
where
    F: FnMut(&SolverState, &Physics) -> Result<Flow>,
{
    fn stride(&self) -> Stride {
        self.stride
    }

    fn observe(&mut self, state: &SolverState, physics: &Physics) -> Result<Flow> {
        (self.f)(state, physics)
    }
}

const TIME_EPS: f64 = 1e-9;

fn on_time_grid(t: f64, interval: f64) -> bool {
    ((t / interval).round() * interval - t).abs() <= TIME_EPS * interval
}

fn next_time_mark(t: f64, interval: f64) -> f64 {
    ((t / interval + TIME_EPS).floor() + 1.0) * interval
}

fn notify(
    observers: &mut [&mut dyn Observer],
    state: &SolverState,
    physics: &Physics,
    initial: bool,
) -> Result<Flow> {
    let mut flow = Flow::Continue;
    for obs in observers.iter_mut() {
        let due = initial
            || match obs.stride() {
                Stride::Steps(k) => k > 0 && state.step_count.is_multiple_of(k),
                Stride::Time(dt) => on_time_grid(state.t, dt),
            };
        if due && obs.observe(state, physics)? == Flow::Stop {
            flow = Flow::Stop;
        }
    }
    Ok(flow)
}

/// Steps from `state0` to `until`, calling observers along the way.
///
/// With a fixed step the clock is kept on the lattice `n·dt`, so a run that
/// is stopped and restarted lands on exactly the same times.
pub fn integrate(
    state0: SolverState,
    until: f64,
    scheme: &SchemeConfig,
    physics: &Physics,
    observers: &mut [&mut dyn Observer],
) -> Result<SolverState> {
    if until < state0.t {
        return Err(Error::Precondition(format!(
            "integration end {until} precedes the current time {}",
            state0.t
        )));
    }
    scheme.validate()?;
    let at = |t: f64| {
        move |e: Error| Error::AtTime {
            t,
            source: Box::new(e),
        }
    };

    let mut state = state0;
    if notify(observers, &state, physics, true).map_err(at(state.t))? == Flow::Stop {
        return Ok(state);
    }
    loop {
        let remaining = until - state.t;
        let nominal = if scheme.adaptive {
            adapt_dt(&state, scheme, physics).map_err(at(state.t))?
        } else {
            scheme.dt
        };
        if remaining <= TIME_EPS * nominal {
            break;
        }
        let mut target = until;
        for obs in observers.iter() {
            if let Stride::Time(interval) = obs.stride() {
                target = target.min(next_time_mark(state.t, interval));
            }
        }
        let gap = target - state.t;
        let (dt, snap) = if (gap - nominal).abs() <= TIME_EPS * nominal {
            (nominal, Some(target))
        } else if gap < nominal {
            (gap, Some(target))
        } else {
            (nominal, None)
        };
        let mut next = step_with_dt(&state, dt, scheme.method, physics).map_err(at(state.t))?;
        if !scheme.adaptive {
            let lattice = (next.t / scheme.dt).round() * scheme.dt;
            if (lattice - next.t).abs() <= TIME_EPS * scheme.dt {
                next.t = lattice;
            }
        }
        if let Some(t) = snap {
            if (next.t - t).abs() <= TIME_EPS * nominal.max(gap) {
                next.t = t;
            }
        }
        state = next;
        if notify(observers, &state, physics, false).map_err(at(state.t))? == Flow::Stop {
            break;
        }
    }
    Ok(state)
}
