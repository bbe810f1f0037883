//! Observed temporal order of the integrating-factor schemes.

use damped_ns::{
    integrate, make_initial_condition, Cylinder, ForcingField, ForcingSpec, InitialCondition,
    Method, Physics, SchemeConfig, SolverState, SpectralVelocity, WaveGrid,
};

fn solve(method: Method, dt: f64) -> SpectralVelocity {
    let l = 2.0 * std::f64::consts::PI;
    let grid = WaveGrid::new(16, l).unwrap();
    let u0 = make_initial_condition(
        &InitialCondition::RandomDivFree {
            seed: 4,
            energy: 5.0,
            slope: -5.0 / 3.0,
        },
        &grid,
    )
    .unwrap();
    let forcing = ForcingField::new(
        ForcingSpec::Cylinder(Cylinder {
            radius: l / 3.0,
            height: l / 3.0,
            ..Cylinder::centered(l)
        }),
        &grid,
    )
    .unwrap();
    let physics = Physics::new(0.1, 0.5, 3.0, forcing).unwrap();
    integrate(
        SolverState::new(u0),
        0.5,
        &SchemeConfig::fixed(method, dt),
        &physics,
        &mut [],
    )
    .unwrap()
    .u
}

/// log2 of successive error ratios against a reference at dt/8.
fn observed_order(method: Method, dt: f64) -> f64 {
    let reference = solve(method, dt / 8.0);
    let e1 = solve(method, dt).distance(&reference);
    let e2 = solve(method, dt / 2.0).distance(&reference);
    (e1 / e2).log2()
}

#[test]
fn if_rk2_is_second_order() {
    let p = observed_order(Method::IfRk2, 0.02);
    assert!((1.8..2.4).contains(&p), "observed order {p}");
}

#[test]
fn if_rk4_is_fourth_order() {
    let p = observed_order(Method::IfRk4, 0.05);
    assert!((3.6..4.6).contains(&p), "observed order {p}");
}
