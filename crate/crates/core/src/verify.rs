//! Trajectory checks for the energy estimates of the damped system.
//!
//! Every check is a pure function of a record stream. Failures are reported
//! through [`BoundReport::pass`], never by panicking, and each report carries
//! both the raw margins and the slack used so a violation can be told apart
//! from discretization error.

use std::fmt;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundId {
    /// `|u(t)|² ≤ e^{−μλ₁t}|u₀|² + |f|²/(μ²λ₁²)`.
    Decay,
    /// `μ∫‖u‖² + 2α∫|u|^{β+1}_{β+1} ≤ |u₀|² + |f|²/(μ²λ₁²) + |f|²(t−s)/(μλ₁)`.
    Integral,
    /// Entry into and confinement to `|u|² ≤ 1 + |f|²/(μ²λ₁²)`.
    AbsorbingBall,
    DampingPositivity,
    NormBoundedness,
    /// `|u(t)|² − |f|²t/(μλ₁)` is non-increasing.
    EnergyEnvelope,
}

impl BoundId {
    pub fn name(self) -> &'static str {
        match self {
            BoundId::Decay => "decay",
            BoundId::Integral => "integral",
            BoundId::AbsorbingBall => "absorbing_ball",
            BoundId::DampingPositivity => "damping_positivity",
            BoundId::NormBoundedness => "norm_boundedness",
            BoundId::EnergyEnvelope => "energy_envelope",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bound_id: BoundId,
    pub checked_at: Vec<f64>,
    /// `bound − observed` per checked time.
    pub margin: Vec<f64>,
    pub pass: bool,
    pub tolerance: f64,
}

impl BoundReport {
    fn new(bound_id: BoundId, checked_at: Vec<f64>, margin: Vec<f64>, tolerance: f64) -> Self {
        let pass = margin.iter().all(|m| *m >= -tolerance);
        BoundReport {
            bound_id,
            checked_at,
            margin,
            pass,
            tolerance,
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Parameter sets singled out by the well-posedness theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `β > 3`, or `β = 3` with `4αμ ≥ 1`: unique weak solutions.
    Uniqueness,
    /// `3 < β < 5`, or `β = 3` with `4αμ > 1`: bounded `‖u‖` and `|Au|`.
    Regularity,
}

impl Regime {
    pub fn contains(self, mu: f64, alpha: f64, beta: f64) -> bool {
        let q = 4.0 * alpha * mu;
        match self {
            Regime::Uniqueness => beta > 3.0 || (beta == 3.0 && q >= 1.0),
            Regime::Regularity => (beta > 3.0 && beta < 5.0) || (beta == 3.0 && q > 1.0),
        }
    }

    pub fn require(self, mu: f64, alpha: f64, beta: f64) -> Result<()> {
        if self.contains(mu, alpha, beta) {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "(mu, alpha, beta) = ({mu}, {alpha}, {beta}) is outside the {self:?} regime"
            )))
        }
    }
}

/// `max(10⁻⁸, dt^p · scale)`.
pub fn discretization_tolerance(dt: f64, order: i32, scale: f64) -> f64 {
    (dt.powi(order) * scale).max(1e-8)
}

/// `|f|²/(μ²λ₁²)`: the forcing floor of the decay estimate.
pub fn forcing_floor(mu: f64, lambda1: f64, f_norm_sq: f64) -> f64 {
    f_norm_sq / (mu * lambda1).powi(2)
}

pub fn check_decay_bound(
    records: &[DiagnosticsRecord],
    e0: f64,
    mu: f64,
    lambda1: f64,
    f_norm_sq: f64,
    tolerance: f64,
) -> BoundReport {
    let t0 = records.first().map_or(0.0, |r| r.t);
    let floor = forcing_floor(mu, lambda1, f_norm_sq);
    let (times, margins) = records
        .iter()
        .map(|r| {
            let bound = (-mu * lambda1 * (r.t - t0)).exp() * e0 + floor;
            (r.t, bound - r.e)
        })
        .unzip();
    BoundReport::new(BoundId::Decay, times, margins, tolerance)
}

/// Linear interpolation of `(V2, Lbp)` at time `t` within the record span.
fn sample(records: &[DiagnosticsRecord], t: f64) -> (f64, f64) {
    let i = records.partition_point(|r| r.t <= t);
    if i == 0 {
        return (records[0].v2, records[0].lbp);
    }
    if i == records.len() {
        let r = records[i - 1];
        return (r.v2, r.lbp);
    }
    let (a, b) = (records[i - 1], records[i]);
    let w = (t - a.t) / (b.t - a.t);
    (a.v2 + w * (b.v2 - a.v2), a.lbp + w * (b.lbp - a.lbp))
}

/// Integral estimate over `[s, t]`, trapezoid rule on the record times.
#[allow(clippy::too_many_arguments)]
pub fn check_integral_bound(
    records: &[DiagnosticsRecord],
    s: f64,
    t: f64,
    mu: f64,
    alpha: f64,
    lambda1: f64,
    f_norm_sq: f64,
    tolerance: f64,
) -> Result<BoundReport> {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Err(Error::Precondition("no records".into()));
    };
    let slack = 1e-9 * (last.t - first.t).abs().max(1.0);
    if !(s <= t && s >= first.t - slack && t <= last.t + slack) {
        return Err(Error::Precondition(format!(
            "[{s}, {t}] is not covered by records spanning [{}, {}]",
            first.t, last.t
        )));
    }
    let e0 = first.e;
    let floor = forcing_floor(mu, lambda1, f_norm_sq);
    let rhs = |tau: f64| e0 + floor + f_norm_sq * (tau - s) / (mu * lambda1);

    let mut points = vec![s];
    points.extend(records.iter().map(|r| r.t).filter(|&x| x > s && x < t));
    if t > s {
        points.push(t);
    }
    let mut times = vec![s];
    let mut margins = vec![rhs(s)];
    let (mut v_int, mut l_int) = (0.0, 0.0);
    let mut prev = sample(records, s);
    for w in points.windows(2) {
        let cur = sample(records, w[1]);
        let h = w[1] - w[0];
        v_int += 0.5 * h * (prev.0 + cur.0);
        l_int += 0.5 * h * (prev.1 + cur.1);
        prev = cur;
        times.push(w[1]);
        margins.push(rhs(w[1]) - (mu * v_int + 2.0 * alpha * l_int));
    }
    Ok(BoundReport::new(
        BoundId::Integral,
        times,
        margins,
        tolerance,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingReport {
    /// Margins `radius² − |u|²` from the entry time on.
    pub report: BoundReport,
    pub radius_sq: f64,
    pub entry_time: Option<f64>,
    /// `log(E₀/entry_tol)/(μλ₁) + tol_t`, measured from the first record.
    pub entry_deadline: f64,
    pub pass: bool,
}

pub fn check_absorbing_ball(
    records: &[DiagnosticsRecord],
    mu: f64,
    lambda1: f64,
    f_norm_sq: f64,
    entry_tol: f64,
    tolerance: f64,
    time_tolerance: f64,
) -> Result<AbsorbingReport> {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Err(Error::Precondition("no records".into()));
    };
    if !(entry_tol > 0.0) {
        return Err(Error::param("entry_tol", entry_tol, "must be > 0"));
    }
    let e0 = first.e;
    let rate = mu * lambda1;
    if (-rate * (last.t - first.t)).exp() * e0 > entry_tol {
        return Err(Error::Precondition(format!(
            "run too short: e^(-mu*lambda1*T)*E0 = {} > entry_tol = {entry_tol}",
            (-rate * (last.t - first.t)).exp() * e0
        )));
    }
    let radius_sq = 1.0 + forcing_floor(mu, lambda1, f_norm_sq);
    let deadline = (e0 / entry_tol).ln().max(0.0) / rate + time_tolerance;
    let entry = records.iter().position(|r| r.e <= radius_sq);
    let (times, margins) = match entry {
        Some(i) => records[i..].iter().map(|r| (r.t, radius_sq - r.e)).unzip(),
        None => (vec![last.t], vec![radius_sq - last.e]),
    };
    let report = BoundReport::new(BoundId::AbsorbingBall, times, margins, tolerance);
    let entry_time = entry.map(|i| records[i].t);
    let in_time = entry_time.is_some_and(|t| t - first.t <= deadline);
    Ok(AbsorbingReport {
        pass: report.pass && in_time,
        report,
        radius_sq,
        entry_time,
        entry_deadline: deadline,
    })
}

/// `P_damp ≥ 0` on every record, with zero slack.
pub fn check_damping_positivity(records: &[DiagnosticsRecord]) -> BoundReport {
    let (times, margins) = records.iter().map(|r| (r.t, r.p_damp)).unzip();
    BoundReport::new(BoundId::DampingPositivity, times, margins, 0.0)
}

/// `J(t) = |u(t)|² − |f|²t/(μλ₁)` non-increasing between adjacent records.
pub fn check_energy_envelope(
    records: &[DiagnosticsRecord],
    mu: f64,
    lambda1: f64,
    f_norm_sq: f64,
    tolerance: f64,
) -> BoundReport {
    let j = |r: &DiagnosticsRecord| r.e - f_norm_sq * r.t / (mu * lambda1);
    let (times, margins) = records
        .windows(2)
        .map(|w| (w[1].t, j(&w[0]) - j(&w[1])))
        .unzip();
    BoundReport::new(BoundId::EnergyEnvelope, times, margins, tolerance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundednessReport {
    /// Margins are `−slope` of the log running-sup of `‖u‖²`, `|u|^{β+1}_{β+1}`
    /// and `|Au|²` over the final half of the window; tolerance is the allowed slope.
    pub report: BoundReport,
    pub sup_v2: f64,
    pub sup_lbp: f64,
    pub sup_a2: f64,
    pub slopes: [f64; 3],
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Empirical boundedness of `‖u‖²`, `|u|^{β+1}_{β+1}` and `|Au|²` after `burn_in`.
pub fn check_norm_boundedness(
    records: &[DiagnosticsRecord],
    burn_in: f64,
    mu: f64,
    alpha: f64,
    beta: f64,
    slope_tolerance: f64,
) -> Result<NormBoundednessReport> {
    Regime::Regularity.require(mu, alpha, beta)?;
    let tail: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t >= burn_in).collect();
    if tail.len() < 4 {
        return Err(Error::Precondition(format!(
            "need at least 4 records after burn-in {burn_in}"
        )));
    }
    let t_end = tail[tail.len() - 1].t;
    let mid = 0.5 * (tail[0].t + t_end);

    let quantity = |get: fn(&DiagnosticsRecord) -> f64| -> (f64, f64) {
        let mut running = 0.0_f64;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in &tail {
            running = running.max(get(r));
            if r.t >= mid {
                xs.push(r.t);
                ys.push(running.max(f64::MIN_POSITIVE).ln());
            }
        }
        (running, slope(&xs, &ys))
    };
    let (sup_v2, s_v2) = quantity(|r| r.v2);
    let (sup_lbp, s_lbp) = quantity(|r| r.lbp);
    let (sup_a2, s_a2) = quantity(|r| r.a2);
    let slopes = [s_v2, s_lbp, s_a2];
    let finite = [sup_v2, sup_lbp, sup_a2].iter().all(|v| v.is_finite());
    let mut report = BoundReport::new(
        BoundId::NormBoundedness,
        vec![t_end; 3],
        slopes.iter().map(|s| -s).collect(),
        slope_tolerance,
    );
    report.pass &= finite;
    Ok(NormBoundednessReport {
        report,
        sup_v2,
        sup_lbp,
        sup_a2,
        slopes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable to this run, e.g. outside the parameter regime.
    Skipped,
}

impl CheckStatus {
    pub fn name(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub min_margin: f64,
    pub tolerance: f64,
    pub note: String,
}

impl CheckOutcome {
    fn from_report(name: impl Into<String>, r: &BoundReport) -> Self {
        CheckOutcome {
            name: name.into(),
            status: if r.pass {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            min_margin: r.min_margin(),
            tolerance: r.tolerance,
            note: String::new(),
        }
    }

    fn skipped(name: impl Into<String>, note: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            status: CheckStatus::Skipped,
            min_margin: f64::NAN,
            tolerance: f64::NAN,
            note: note.into(),
        }
    }
}

/// Every check applicable to one run. Energy-type checks use the slack
/// `10⁻⁶·max(1, E₀, |f|²/(μ²λ₁²))`; the absorbing-ball check is skipped when
/// the run is too short to reach its deadline and the norm-boundedness
/// check outside the regularity regime.
pub fn run_all_checks(
    records: &[DiagnosticsRecord],
    mu: f64,
    alpha: f64,
    beta: f64,
    lambda1: f64,
    f_norm_sq: f64,
) -> Result<Vec<CheckOutcome>> {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Err(Error::Precondition("no records".into()));
    };
    let scale = 1f64.max(first.e).max(forcing_floor(mu, lambda1, f_norm_sq));
    let tol = 1e-6 * scale;
    let (t0, t1) = (first.t, last.t);
    let mid = 0.5 * (t0 + t1);
    let mut out = vec![
        CheckOutcome::from_report(
            "decay",
            &check_decay_bound(records, first.e, mu, lambda1, f_norm_sq, tol),
        ),
        CheckOutcome::from_report(
            "integral[0,T]",
            &check_integral_bound(records, t0, t1, mu, alpha, lambda1, f_norm_sq, tol)?,
        ),
        CheckOutcome::from_report(
            "integral[T/2,T]",
            &check_integral_bound(records, mid, t1, mu, alpha, lambda1, f_norm_sq, tol)?,
        ),
        CheckOutcome::from_report("damping_positivity", &check_damping_positivity(records)),
        CheckOutcome::from_report(
            "energy_envelope",
            &check_energy_envelope(records, mu, lambda1, f_norm_sq, tol),
        ),
    ];
    out.push(
        match check_absorbing_ball(records, mu, lambda1, f_norm_sq, 1.0, tol, 1.0) {
            Ok(a) => {
                let mut o = CheckOutcome::from_report("absorbing_ball", &a.report);
                if !a.pass {
                    o.status = CheckStatus::Fail;
                }
                o.note = match a.entry_time {
                    Some(t) => format!("entry at t = {t}, deadline {}", a.entry_deadline),
                    None => format!("no entry, deadline {}", a.entry_deadline),
                };
                o
            }
            Err(Error::Precondition(msg)) => CheckOutcome::skipped("absorbing_ball", msg),
            Err(e) => return Err(e),
        },
    );
    out.push(
        match check_norm_boundedness(records, mid, mu, alpha, beta, 1e-2) {
            Ok(n) => CheckOutcome::from_report("norm_boundedness", &n.report),
            Err(Error::Precondition(msg)) => CheckOutcome::skipped("norm_boundedness", msg),
            Err(e) => return Err(e),
        },
    );
    Ok(out)
}
