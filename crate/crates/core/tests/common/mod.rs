#![allow(dead_code)]

use damped_ns::field::Components;
use damped_ns::{
    damping_term, leray_project, make_initial_condition, nonlinear_term, InitialCondition,
    SpectralVelocity, WaveGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

/// Normalized defects of the structural identities for one field.
#[derive(Debug, Clone, Copy)]
pub struct Defects {
    /// `max|P(Pv) − Pv| / max(1, max|Pv|)` for a raw field `v`.
    pub idempotence: f64,
    /// `max|k·û| / max(1, max|k||û|)`.
    pub divergence: f64,
    /// `|⟨N(u), u⟩| / max(1, |N(u)||u|)`.
    pub orthogonality: f64,
    /// `|⟨D(u), u⟩ + α Lbp| / max(1, α Lbp)`.
    pub damping: f64,
    /// `|Σ_k w|û|² L³ − Σ_x |u|² Δx³| / max(1, E)`.
    pub parseval: f64,
    /// `max|F(F⁻¹ û) − û| / max(1, max|û|)`.
    pub round_trip: f64,
}

/// Gaussian coefficients on every stored in-band mode, not projected.
pub fn raw_field(grid: &WaveGrid, seed: u64, amplitude: f64) -> Components<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw: Components<Complex64> =
        std::array::from_fn(|_| vec![Complex64::default(); grid.spectral_len()]);
    for m in grid.modes() {
        for c in raw.iter_mut() {
            c[m.index] = Complex64::new(
                amplitude * (rng.random::<f64>() - 0.5),
                amplitude * (rng.random::<f64>() - 0.5),
            );
        }
    }
    for c in raw.iter_mut() {
        grid.symmetrize_kz0(c);
    }
    raw
}

pub fn max_abs_diff(a: &SpectralVelocity, b: &SpectralVelocity) -> f64 {
    a.sub(b).max_coeff()
}

pub fn defects(seed: u64, energy: f64, slope: f64, alpha: f64, beta: f64) -> Defects {
    let grid = WaveGrid::new(8, 2.0 * std::f64::consts::PI).unwrap();

    let raw = raw_field(&grid, seed ^ 0x5eed, energy.sqrt());
    let p = leray_project(&grid, raw).unwrap();
    let pp = leray_project(&grid, p.coeffs().clone()).unwrap();
    let idempotence = max_abs_diff(&pp, &p) / p.max_coeff().max(1.0);

    let u = make_initial_condition(
        &InitialCondition::RandomDivFree {
            seed,
            energy,
            slope,
        },
        &grid,
    )
    .unwrap();
    let kmax = grid.modes().iter().map(|m| m.k2.sqrt()).fold(0.0, f64::max);
    let divergence = u.max_divergence() / (kmax * u.max_coeff()).max(1.0);

    let n = nonlinear_term(&u);
    let orthogonality = n.inner(&u).abs() / (n.norm() * u.norm()).max(1.0);

    let d = damping_term(&u, alpha, beta).unwrap();
    let phys = u.to_physical();
    let lbp = phys.lp_norm_pow(beta + 1.0);
    let damping = (d.inner(&u) + alpha * lbp).abs() / (alpha * lbp).max(1.0);

    let quad = phys.lp_norm_pow(2.0);
    let parseval = (u.energy() - quad).abs() / u.energy().max(1.0);

    let back: Components<Complex64> = std::array::from_fn(|j| grid.to_spectral(&phys.values()[j]));
    let round_trip = (0..3)
        .flat_map(|j| {
            let (a, b) = (&back[j], &u.coeffs()[j]);
            grid.modes()
                .iter()
                .map(move |m| (a[m.index] - b[m.index]).norm())
        })
        .fold(0.0, f64::max)
        / u.max_coeff().max(1.0);

    Defects {
        idempotence,
        divergence,
        orthogonality,
        damping,
        parseval,
        round_trip,
    }
}
