//! Norms and power-budget terms of the energy identity
//! `½ d|u|²/dt + μ‖u‖² + α|u|^{β+1}_{β+1} = (f, u)`.

use crate::error::{Error, Result};
use crate::field::SpectralVelocity;
use crate::integrator::{Flow, Observer, Physics, SolverState, Stride};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `|u|²`.
    pub e: f64,
    /// `‖u‖² = Σ|k|²|û|²`.
    pub v2: f64,
    /// `|u|^{β+1}_{β+1}` by collocation quadrature.
    pub lbp: f64,
    /// `|Au|² = Σ|k|⁴|û|²`.
    pub a2: f64,
    /// `(f, u)`.
    pub p_f: f64,
    /// `α · lbp`.
    pub p_damp: f64,
    /// Finite-difference `d|u|²/dt`, filled in by [`fill_energy_rate`].
    pub dedt: f64,
    /// `max_x |u(x)|`.
    pub umax: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 9] =
        ["t", "E", "V2", "Lbp", "A2", "P_f", "P_damp", "dEdt", "umax"];

    pub fn values(&self) -> [f64; 9] {
        [
            self.t,
            self.e,
            self.v2,
            self.lbp,
            self.a2,
            self.p_f,
            self.p_damp,
            self.dedt,
            self.umax,
        ]
    }

    pub fn from_values(v: [f64; 9]) -> Self {
        DiagnosticsRecord {
            t: v[0],
            e: v[1],
            v2: v[2],
            lbp: v[3],
            a2: v[4],
            p_f: v[5],
            p_damp: v[6],
            dedt: v[7],
            umax: v[8],
        }
    }
}

/// Evaluates every diagnostic at one instant. `dedt` is left at zero.
pub fn record(u: &SpectralVelocity, t: f64, physics: &Physics) -> Result<DiagnosticsRecord> {
    let phys = u.to_physical();
    let lbp = phys.lp_norm_pow(physics.beta + 1.0);
    let rec = DiagnosticsRecord {
        t,
        e: u.energy(),
        v2: u.sobolev_sq(1),
        lbp,
        a2: u.sobolev_sq(2),
        p_f: physics.forcing.spectral().inner(u),
        p_damp: physics.alpha * lbp,
        dedt: 0.0,
        umax: phys.max_speed(),
    };
    if rec.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("diagnostics"));
    }
    Ok(rec)
}

fn check_uniform(records: &[DiagnosticsRecord]) -> Result<f64> {
    let h = records[1].t - records[0].t;
    if !(h > 0.0) {
        return Err(Error::Precondition(
            "records must be strictly increasing in time".into(),
        ));
    }
    for w in records.windows(2) {
        let d = w[1].t - w[0].t;
        if (d - h).abs() > 1e-9 * h {
            return Err(Error::Precondition(format!(
                "non-uniform record stride: {d} vs {h} at t = {}",
                w[0].t
            )));
        }
    }
    Ok(h)
}

/// Second-order rate of `E` from three consecutive, evenly spaced records,
/// evaluated at position `at` of the window.
pub(crate) fn three_point_rate(w: &[DiagnosticsRecord], at: usize) -> f64 {
    let two_h = w[2].t - w[0].t;
    let (e0, e1, e2) = (w[0].e, w[1].e, w[2].e);
    match at {
        0 => (-3.0 * e0 + 4.0 * e1 - e2) / two_h,
        1 => (e2 - e0) / two_h,
        _ => (3.0 * e2 - 4.0 * e1 + e0) / two_h,
    }
}

/// Second-order finite differences of `E`: centered inside, one-sided
/// three-point at the ends. Requires a uniform stride when three or more
/// records are present.
fn energy_rate(records: &[DiagnosticsRecord]) -> Result<Vec<f64>> {
    let n = records.len();
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![0.0]),
        2 => {
            let d = (records[1].e - records[0].e) / (records[1].t - records[0].t);
            Ok(vec![d, d])
        }
        _ => {
            check_uniform(records)?;
            Ok((0..n)
                .map(|i| match i {
                    0 => three_point_rate(&records[..3], 0),
                    _ if i == n - 1 => three_point_rate(&records[n - 3..], 2),
                    _ => three_point_rate(&records[i - 1..i + 2], 1),
                })
                .collect())
        }
    }
}

/// Fills `dedt` on every record.
pub fn fill_energy_rate(records: &mut [DiagnosticsRecord]) -> Result<()> {
    let rates = energy_rate(records)?;
    for (r, d) in records.iter_mut().zip(rates) {
        r.dedt = d;
    }
    Ok(())
}

/// `r(t) = ½ dE/dt + μ‖u‖² + α|u|^{β+1}_{β+1} − (f, u)` per record.
pub fn energy_balance_residual(records: &[DiagnosticsRecord], mu: f64) -> Result<Vec<f64>> {
    if records.len() < 3 {
        return Err(Error::Precondition(
            "energy balance needs at least 3 records".into(),
        ));
    }
    let rates = energy_rate(records)?;
    Ok(records
        .iter()
        .zip(rates)
        .map(|(r, d)| 0.5 * d + mu * r.v2 + r.p_damp - r.p_f)
        .collect())
}

/// First-order proxy for `|u_t|`: `|u(t+Δt) − u(t)| / Δt`.
pub fn time_derivative_proxy(prev: &SpectralVelocity, next: &SpectralVelocity, dt: f64) -> f64 {
    prev.distance(next) / dt
}

/// Observer that stores one record per stride.
#[derive(Debug)]
pub struct DiagnosticsRecorder {
    stride: Stride,
    records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsRecorder {
    pub fn new(stride: Stride) -> Self {
        DiagnosticsRecorder {
            stride,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    /// Records with `dedt` filled in.
    pub fn finish(mut self) -> Result<Vec<DiagnosticsRecord>> {
        fill_energy_rate(&mut self.records)?;
        Ok(self.records)
    }
}

impl Observer for DiagnosticsRecorder {
    fn stride(&self) -> Stride {
        self.stride
    }

    fn observe(&mut self, state: &SolverState, physics: &Physics) -> Result<Flow> {
        // Restarted runs re-observe their initial time.
        if self.records.last().is_some_and(|r| r.t == state.t) {
            return Ok(Flow::Continue);
        }
        self.records.push(record(&state.u, state.t, physics)?);
        Ok(Flow::Continue)
    }
}
