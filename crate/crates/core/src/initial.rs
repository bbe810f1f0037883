//! Initial velocity fields.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Components, PhysicalVelocity, SpectralVelocity};
use crate::forcing::{periodic_offset, smooth_step};
use crate::grid::WaveGrid;
use crate::spectral::leray_project;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// `u = (A sin(2πy/L), 0, 0)`.
    Shear {
        amplitude: f64,
    },
    /// Gaussian random solenoidal field with shell spectrum `∝ |k|^slope`,
    /// rescaled so that `|u|² = energy`.
    RandomDivFree {
        seed: u64,
        energy: f64,
        slope: f64,
    },
    /// The constant vector restricted to the ball of radius `L/2` about the
    /// box center, then projected. The uniform part itself is a pure mean
    /// and would vanish under projection on the torus.
    UniformPlusProjection {
        vector: [f64; 3],
    },
}

pub fn make_initial_condition(
    spec: &InitialCondition,
    grid: &WaveGrid,
) -> Result<SpectralVelocity> {
    match *spec {
        InitialCondition::Zero => Ok(SpectralVelocity::zeros(grid)),
        InitialCondition::Shear { amplitude } => {
            if !amplitude.is_finite() {
                return Err(Error::NonFinite("shear amplitude"));
            }
            let mut u = SpectralVelocity::zeros(grid);
            let plus = grid.index_of([0, 1, 0]).expect("N >= 4 retains |k| = 1");
            let minus = grid.index_of([0, -1, 0]).expect("N >= 4 retains |k| = 1");
            let c = u.coeffs_mut();
            c[0][plus] = Complex64::new(0.0, -amplitude / 2.0);
            c[0][minus] = Complex64::new(0.0, amplitude / 2.0);
            Ok(u)
        }
        InitialCondition::RandomDivFree {
            seed,
            energy,
            slope,
        } => random_divfree(grid, seed, energy, slope),
        InitialCondition::UniformPlusProjection { vector } => {
            let n = grid.n();
            let (l, dx) = (grid.l(), grid.dx());
            let c = l / 2.0;
            let mut chi = vec![0.0; grid.physical_len()];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let r = [i, j, k]
                            .map(|q| periodic_offset(grid.coord(q), c, l))
                            .iter()
                            .map(|d| d * d)
                            .sum::<f64>()
                            .sqrt();
                        chi[(i * n + j) * n + k] = smooth_step(l / 2.0 - r, dx);
                    }
                }
            }
            let values = [0, 1, 2].map(|m| chi.iter().map(|&v| v * vector[m]).collect());
            leray_project(grid, PhysicalVelocity::new(grid, values).to_spectral_raw())
        }
    }
}

fn random_divfree(grid: &WaveGrid, seed: u64, energy: f64, slope: f64) -> Result<SpectralVelocity> {
    if !(energy >= 0.0 && energy.is_finite()) {
        return Err(Error::param(
            "energy",
            energy,
            "initial energy must be >= 0",
        ));
    }
    if !slope.is_finite() {
        return Err(Error::NonFinite("spectral slope"));
    }
    if energy == 0.0 {
        return Ok(SpectralVelocity::zeros(grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw: Components<Complex64> =
        std::array::from_fn(|_| vec![Complex64::default(); grid.spectral_len()]);
    // Shell spectrum E(k) ~ k^slope: per-mode amplitude ~ k^{(slope-2)/2}.
    for m in grid.modes() {
        let amp = m.k2.powf((slope - 2.0) / 4.0);
        for comp in raw.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            comp[m.index] = Complex64::new(re, im) * amp;
        }
    }
    for comp in raw.iter_mut() {
        grid.symmetrize_kz0(comp);
    }
    let mut u = leray_project(grid, raw)?;
    let e = u.energy();
    u.scale((energy / e).sqrt());
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_and_shear() {
        let grid = WaveGrid::new(8, 3.0).unwrap();
        let z = make_initial_condition(&InitialCondition::Zero, &grid).unwrap();
        assert_eq!(z.energy(), 0.0);
        let a = 1.5;
        let s = make_initial_condition(&InitialCondition::Shear { amplitude: a }, &grid).unwrap();
        let expected = a * a * 27.0 / 2.0;
        assert!((s.energy() - expected).abs() < 1e-13 * expected);
        // Physical values match A sin(2πy/L).
        let p = s.to_physical();
        let n = 8;
        for j in 0..n {
            let y = grid.coord(j);
            let v = p.values()[0][(3 * n + j) * n + 5];
            assert!((v - a * (2.0 * PI * y / 3.0).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn random_field_is_normalized_and_valid() {
        let grid = WaveGrid::new(16, 2.0 * PI).unwrap();
        let spec = InitialCondition::RandomDivFree {
            seed: 1,
            energy: 1.0,
            slope: -5.0 / 3.0,
        };
        let u = make_initial_condition(&spec, &grid).unwrap();
        assert!((u.energy() - 1.0).abs() <= 1e-12);
        assert!(u.max_divergence() <= 1e-12 * u.max_coeff());
        assert_eq!(u.hermitian_defect(), 0.0);
        let again = make_initial_condition(&spec, &grid).unwrap();
        assert_eq!(u.distance(&again), 0.0);
    }

    #[test]
    fn negative_energy_is_rejected() {
        let grid = WaveGrid::new(8, 1.0).unwrap();
        let spec = InitialCondition::RandomDivFree {
            seed: 1,
            energy: -1.0,
            slope: 0.0,
        };
        assert!(make_initial_condition(&spec, &grid).is_err());
    }

    #[test]
    fn windowed_uniform_field_is_nontrivial() {
        let grid = WaveGrid::new(16, 12.0).unwrap();
        let u = make_initial_condition(
            &InitialCondition::UniformPlusProjection {
                vector: [1.0, 0.0, 0.0],
            },
            &grid,
        )
        .unwrap();
        assert!(u.energy() > 1.0);
        assert!(u.max_divergence() <= 1e-12 * u.max_coeff());
        let means = u.to_physical().means();
        assert!(means.iter().all(|m| m.abs() < 1e-14));
    }
}
