//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Criteria run one after another so that the wall
//! clock limits are measured without contention.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use damped_ns::cli_io::config::{preset, steady_config, RunConfig};
use damped_ns::cli_io::snapshot::{
    decode_snapshot, encode_snapshot, read_snapshot, write_snapshot,
};
use damped_ns::cli_io::{execute_run, parse_config};
use damped_ns::experiment::{
    run_convergence_speed_sweep, run_initial_condition_independence, run_trajectory_separation,
    ExperimentKind, ExperimentSpec, Perturbation, SweepAxis,
};
use damped_ns::spectral::stokes_lambda1;
use damped_ns::verify::{check_absorbing_ball, check_decay_bound, check_integral_bound};
use damped_ns::{
    energy_balance_residual, integrate, Axis, Cylinder, DiagnosticsRecorder, ForcingSpec,
    InitialCondition, Method, SchemeConfig, Stride,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = fn() -> Outcome;

/// Cylinder of one third of the box, centered, pushing along y.
fn small_cylinder_geometry(l: f64) -> Cylinder {
    Cylinder {
        center: [l / 2.0; 3],
        radius: l / 3.0,
        height: l / 3.0,
        axis: Axis::Y,
        g: [0.0, 2.0, 0.0],
    }
}

fn small_cylinder(l: f64) -> ForcingSpec {
    ForcingSpec::Cylinder(small_cylinder_geometry(l))
}

fn records_of(cfg: &RunConfig) -> (Vec<damped_ns::DiagnosticsRecord>, f64, f64) {
    let grid = cfg.grid().unwrap();
    let physics = cfg.physics(&grid).unwrap();
    let mut rec = DiagnosticsRecorder::new(cfg.diag_stride);
    integrate(
        cfg.initial_state(&grid).unwrap(),
        cfg.t_end,
        &cfg.scheme,
        &physics,
        &mut [&mut rec],
    )
    .unwrap();
    (
        rec.finish().unwrap(),
        stokes_lambda1(&grid),
        physics.forcing.norm_sq(),
    )
}

fn analytic_decay() -> Outcome {
    let start = Instant::now();
    let cfg = preset("decay-shear-b1").unwrap();
    let grid = cfg.grid().unwrap();
    let physics = cfg.physics(&grid).unwrap();
    let s0 = cfg.initial_state(&grid).unwrap();
    let e0 = s0.u.energy();
    let end = integrate(s0, cfg.t_end, &cfg.scheme, &physics, &mut []).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let exact = (-2.0 * (cfg.mu + cfg.alpha) * cfg.t_end).exp() * e0;
    let rel = (end.u.energy() - exact).abs() / exact;
    outcome(
        rel <= 1e-6 && secs < 10.0,
        format!("relative error {rel:.3e} (<= 1e-6), runtime {secs:.2} s (< 10 s)"),
    )
}

fn energy_identity_order() -> Outcome {
    let start = Instant::now();
    let l = 12.0;
    let mut cfg = RunConfig::new(0.05, 0.5, 3.0, 32, l);
    cfg.forcing = ForcingSpec::Cylinder(Cylinder::centered(l));
    cfg.initial = InitialCondition::RandomDivFree {
        seed: 11,
        energy: 200.0,
        slope: -5.0 / 3.0,
    };
    cfg.t_end = 1.0;
    cfg.diag_stride = Stride::Steps(1);
    let mut maxima = Vec::new();
    for dt in [0.01, 0.005] {
        cfg.scheme = SchemeConfig::fixed(Method::IfRk2, dt);
        let (recs, _, _) = records_of(&cfg);
        let res = energy_balance_residual(&recs, cfg.mu).unwrap();
        maxima.push(res.iter().fold(0.0_f64, |m, r| m.max(r.abs())));
    }
    let ratio = maxima[0] / maxima[1];
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ratio >= 3.5 && secs < 300.0,
        format!(
            "max residual {:.3e} -> {:.3e}, ratio {ratio:.3} (>= 3.5), runtime {secs:.1} s (< 300 s)",
            maxima[0], maxima[1]
        ),
    )
}

/// The five seeds × three energies × forcing on/off runs shared by the
/// decay and integral criteria.
fn estimate_runs() -> Vec<(String, RunConfig)> {
    let l = 12.0;
    let mut out = Vec::new();
    for seed in 1..=5u64 {
        for e0 in [1.0, 10.0, 100.0] {
            for forced in [false, true] {
                let mut cfg = RunConfig::new(0.1, 0.5, 3.0, 32, l);
                cfg.initial = InitialCondition::RandomDivFree {
                    seed,
                    energy: e0,
                    slope: -5.0 / 3.0,
                };
                if forced {
                    cfg.forcing = ForcingSpec::Cylinder(Cylinder::centered(l));
                }
                cfg.t_end = 20.0;
                cfg.diag_stride = Stride::Time(0.25);
                out.push((format!("seed {seed}, E0 {e0}, forced {forced}"), cfg));
            }
        }
    }
    out
}

fn decay_and_integral() -> (Outcome, Outcome) {
    let mut decay_fail = Vec::new();
    let mut integral_fail = Vec::new();
    let mut worst_decay = f64::INFINITY;
    let mut worst_integral = f64::INFINITY;
    let runs = estimate_runs();
    for (name, cfg) in &runs {
        let (recs, lambda1, f2) = records_of(cfg);
        let e0 = recs[0].e;
        let tol = 1e-6 * e0;
        let d = check_decay_bound(&recs, e0, cfg.mu, lambda1, f2, tol);
        // Equality holds at t = 0, so the informative margin starts after it.
        let later = d
            .checked_at
            .iter()
            .zip(&d.margin)
            .filter(|(t, _)| **t > 0.0);
        worst_decay = later.fold(worst_decay, |w, (_, m)| w.min(m / e0));
        if !d.pass {
            decay_fail.push(name.clone());
        }
        for (s, t) in [(0.0, cfg.t_end), (0.5 * cfg.t_end, cfg.t_end)] {
            let r = check_integral_bound(&recs, s, t, cfg.mu, cfg.alpha, lambda1, f2, tol).unwrap();
            worst_integral = worst_integral.min(r.min_margin() / e0);
            if !r.pass {
                integral_fail.push(format!("{name} on [{s}, {t}]"));
            }
        }
    }
    (
        outcome(
            decay_fail.is_empty(),
            format!(
                "{} runs, smallest margin for t > 0 {worst_decay:.3e} E0 (tolerance 1e-6 E0); failures: {decay_fail:?}",
                runs.len()
            ),
        ),
        outcome(
            integral_fail.is_empty(),
            format!(
                "{} runs x 2 windows, smallest margin {worst_integral:.3e} E0 (tolerance 1e-6 E0); failures: {integral_fail:?}",
                runs.len()
            ),
        ),
    )
}

fn absorbing_ball() -> Outcome {
    let l = 2.0 * PI;
    let mut lines = Vec::new();
    let mut pass = true;
    for forced in [false, true] {
        let mut cfg = RunConfig::new(0.1, 0.5, 3.0, 32, l);
        cfg.initial = InitialCondition::RandomDivFree {
            seed: 7,
            energy: 100.0,
            slope: -5.0 / 3.0,
        };
        if forced {
            // Weak enough that the ball radius² (about 13) sits well below E₀.
            cfg.forcing = ForcingSpec::Cylinder(Cylinder {
                g: [0.0, 0.1, 0.0],
                ..small_cylinder_geometry(l)
            });
        }
        // e^{-μλ₁T}·E₀ ≤ 1 needs T ≥ ln(100)/0.1 ≈ 46.1.
        cfg.t_end = 48.0;
        cfg.diag_stride = Stride::Time(0.25);
        let (recs, lambda1, f2) = records_of(&cfg);
        let rep = check_absorbing_ball(&recs, cfg.mu, lambda1, f2, 1.0, 1e-6 * 100.0, 1.0).unwrap();
        pass &= rep.pass;
        lines.push(format!(
            "{}: radius^2 {:.4e}, entry {:?} (deadline {:.2}), min margin after entry {:.3e}",
            if forced { "forced" } else { "unforced" },
            rep.radius_sq,
            rep.entry_time,
            rep.entry_deadline,
            rep.report.min_margin()
        ));
    }
    outcome(pass, lines.join("; "))
}

fn structural_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = 128;
    let mut worst = [0.0_f64; 6];
    for _ in 0..cases {
        let d = common::defects(
            rng.random(),
            rng.random_range(0.01..50.0),
            rng.random_range(-4.0..1.0),
            rng.random_range(0.05..3.0),
            rng.random_range(1.0..5.0),
        );
        let v = [
            d.idempotence,
            d.divergence,
            d.orthogonality,
            d.damping,
            d.parseval,
            d.round_trip,
        ];
        for (w, x) in worst.iter_mut().zip(v) {
            *w = w.max(x);
        }
    }
    let limits = [1e-13, 1e-12, 1e-10, 1e-8, 1e-12, 1e-13];
    let names = [
        "idempotence",
        "divergence",
        "orthogonality",
        "damping",
        "parseval",
        "round trip",
    ];
    let pass = worst.iter().zip(limits).all(|(w, l)| *w <= l);
    let detail = names
        .iter()
        .zip(worst.iter().zip(limits))
        .map(|(n, (w, l))| format!("{n} {w:.1e} (<= {l:.0e})"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("{cases} fields at N = 8: {detail}"))
}

fn separation() -> Outcome {
    let start = Instant::now();
    let l = 2.0 * PI;
    let mut lines = Vec::new();
    let mut pass = true;
    for (mu, alpha, beta) in [(0.1, 0.5, 4.0), (0.3, 1.0, 3.0)] {
        let mut base = RunConfig::new(mu, alpha, beta, 32, l);
        base.initial = InitialCondition::RandomDivFree {
            seed: 21,
            energy: 10.0,
            slope: -5.0 / 3.0,
        };
        base.forcing = small_cylinder(l);
        base.scheme = SchemeConfig::fixed(Method::IfRk2, 0.01);
        base.diag_stride = Stride::Steps(5);
        base.t_end = 5.0;
        let mut spec = ExperimentSpec::new(ExperimentKind::TrajectorySeparation, base);
        spec.perturbation = Some(Perturbation {
            seed: 99,
            deltas: vec![1e-2, 1e-3, 1e-4],
        });
        let sep = run_trajectory_separation(&spec)
            .unwrap()
            .separation
            .unwrap();
        pass &= sep.pass;
        let ratios: Vec<String> = sep
            .runs
            .iter()
            .map(|r| format!("{:.4}", r.max_ratio))
            .collect();
        let finals: Vec<String> = sep
            .runs
            .iter()
            .map(|r| format!("{:.3e}", r.distances.last().unwrap() / r.delta))
            .collect();
        lines.push(format!(
            "beta {beta}, alpha {alpha}, mu {mu}: max d/delta [{}], d(T)/delta [{}], span {:.4} (< 2)",
            ratios.join(", "),
            finals.join(", "),
            sep.ratio_span
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    lines.push(format!("runtime {secs:.1} s (< 900 s)"));
    outcome(pass, lines.join("; "))
}

fn steady_state_reproduction() -> Outcome {
    let base = steady_config(0.2, 1.0);
    let mut spec = ExperimentSpec::new(ExperimentKind::ParameterSweep, base.clone());
    spec.alphas = vec![0.2, 0.5];
    spec.betas = vec![1.0, 2.0, 4.0];
    spec.max_t = 200.0;
    let res = run_convergence_speed_sweep(&spec).unwrap();
    let all_converged = res
        .cells
        .iter()
        .all(|c| c.converged && c.t_c.unwrap() <= spec.max_t);
    let cells: Vec<String> = res
        .cells
        .iter()
        .map(|c| format!("(a {}, b {}) T_c {:?}", c.alpha, c.beta, c.t_c))
        .collect();
    let along_alpha = res.verdicts.iter().filter(|v| v.along == SweepAxis::Alpha);
    let alpha_ok = along_alpha.clone().all(|v| v.non_increasing);
    let beta_trend: Vec<String> = res
        .verdicts
        .iter()
        .filter(|v| v.along == SweepAxis::Beta)
        .map(|v| {
            format!(
                "alpha {}: {}",
                v.fixed,
                if v.non_increasing {
                    "non-increasing"
                } else {
                    "not monotone"
                }
            )
        })
        .collect();

    let ind = run_initial_condition_independence(
        &spec,
        &InitialCondition::Zero,
        &InitialCondition::UniformPlusProjection {
            vector: [1.0, 0.0, 0.0],
        },
    )
    .unwrap();
    outcome(
        all_converged && alpha_ok && ind.same_state,
        format!(
            "mu {}: {}; all converged {all_converged}; T_c non-increasing in alpha {alpha_ok}; \
             beta trend (observational) [{}]; initial-data distance at t = {} is {:.3e} \
             (<= {:.0e}, relative {:.2e})",
            base.mu,
            cells.join(", "),
            beta_trend.join("; "),
            ind.t_common,
            ind.distance,
            ind.threshold,
            ind.relative
        ),
    )
}

fn infrastructure() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let dir = tempfile::tempdir().unwrap();

    // Snapshot round trip.
    let mut cfg = RunConfig::new(0.1, 0.5, 3.0, 16, 2.0 * PI);
    cfg.forcing = small_cylinder(2.0 * PI);
    cfg.initial = InitialCondition::RandomDivFree {
        seed: 5,
        energy: 4.0,
        slope: -5.0 / 3.0,
    };
    let grid = cfg.grid().unwrap();
    let physics = cfg.physics(&grid).unwrap();
    let state = cfg.initial_state(&grid).unwrap();
    let path = dir.path().join("s.bin");
    write_snapshot(&state, &physics, &path).unwrap();
    let back = read_snapshot(&path).unwrap().state;
    let bitwise = state
        .u
        .coeffs()
        .iter()
        .flatten()
        .zip(back.u.coeffs().iter().flatten())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    let mut corrupt = encode_snapshot(&state, &physics);
    let last = corrupt.len() - 1;
    corrupt[last] ^= 1;
    let rejects_corruption = decode_snapshot(&corrupt).is_err();
    pass &= bitwise && rejects_corruption;
    notes.push(format!(
        "snapshot bitwise {bitwise}, corruption rejected {rejects_corruption}"
    ));

    // Restart equivalence.
    cfg.t_end = 2.0;
    cfg.diag_stride = Stride::Time(0.1);
    cfg.snapshot_stride = Some(Stride::Time(1.0));
    cfg.output_dir = dir.path().to_path_buf();
    cfg.run_id = "full".into();
    let full = execute_run(&cfg, None).unwrap();
    let mid = full
        .snapshots
        .iter()
        .find(|p| read_snapshot(p).unwrap().state.t == 1.0)
        .expect("snapshot at t = 1")
        .clone();
    cfg.run_id = "restart".into();
    let restarted = execute_run(&cfg, Some(Path::new(&mid))).unwrap();
    let tail: Vec<_> = full.records.iter().filter(|r| r.t > 1.0).collect();
    let tail_restart: Vec<_> = restarted.records.iter().filter(|r| r.t > 1.0).collect();
    let same = tail.len() == tail_restart.len()
        && tail.iter().zip(&tail_restart).all(|(a, b)| {
            a.values()
                .iter()
                .zip(b.values())
                .all(|(x, y)| x.to_bits() == y.to_bits())
        });
    pass &= same && !tail.is_empty();
    notes.push(format!(
        "restart diagnostics bitwise over {} records: {same}",
        tail.len()
    ));

    // Config rejection.
    let base = |alpha: &str, beta: &str| {
        format!("[physics]\nmu = 0.1\nalpha = {alpha}\nbeta = {beta}\n[grid]\nn = 16\nl = 1\n")
    };
    let beta_rejected = parse_config(&base("0.5", "0.5")).is_err();
    let alpha_zero_rejected = parse_config(&base("0", "2")).is_err();
    let alpha_neg_rejected = parse_config(&base("-1", "2")).is_err();
    let accepted = parse_config(&base("0.5", "1")).is_ok();
    pass &= beta_rejected && alpha_zero_rejected && alpha_neg_rejected && accepted;
    notes.push(format!(
        "config rejects beta < 1 {beta_rejected}, alpha = 0 {alpha_zero_rejected}, alpha < 0 {alpha_neg_rejected}; accepts beta = 1 {accepted}"
    ));
    outcome(pass, notes.join("; "))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: usize| only.as_ref().is_none_or(|v| v.contains(&k));
    // `cargo test` passes harness flags such as `--list`; answer them.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }

    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |k: usize, name: &'static str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {k}: {name} | {}", o.detail);
        results.push((k, name, o));
    };
    let single: [(usize, &str, Criterion); 6] = [
        (1, "analytic decay of a shear mode", analytic_decay),
        (
            2,
            "energy identity residual converges at second order",
            energy_identity_order,
        ),
        (5, "absorbing ball entry and confinement", absorbing_ball),
        (
            6,
            "structural invariants on random fields",
            structural_properties,
        ),
        (
            7,
            "continuous dependence in the uniqueness regime",
            separation,
        ),
        (
            8,
            "steady-state sweep over (alpha, beta)",
            steady_state_reproduction,
        ),
    ];
    for (k, name, f) in single.iter().take(2) {
        if wanted(*k) {
            report(*k, name, f());
        }
    }
    if wanted(3) || wanted(4) {
        let (decay, integral) = decay_and_integral();
        if wanted(3) {
            report(3, "decay estimate", decay);
        }
        if wanted(4) {
            report(4, "integral estimate on [0,T] and [T/2,T]", integral);
        }
    }
    for (k, name, f) in single.iter().skip(2) {
        if wanted(*k) {
            report(*k, name, f());
        }
    }
    if wanted(9) {
        report(
            9,
            "snapshots, restart and config validation",
            infrastructure(),
        );
    }

    let failed = results.iter().filter(|(_, _, o)| !o.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
