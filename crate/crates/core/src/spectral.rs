//! Spatial operators of the damped Navier–Stokes system in Fourier space.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Components, SpectralVelocity};
use crate::grid::WaveGrid;
use crate::par;

/// Leray projection onto divergence-free, zero-mean, dealiased fields:
/// `û(k) = v̂(k) − k (k·v̂(k)) / |k|²`, and `û(0) = 0`.
///
/// Input must be in the grid's half-complex layout and Hermitian on the
/// `kz = 0` plane. Coefficients outside the dealiasing band are dropped.
pub fn leray_project(grid: &WaveGrid, v_hat: Components<Complex64>) -> Result<SpectralVelocity> {
    let len = grid.spectral_len();
    if v_hat.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidGrid(format!(
            "coefficient arrays must have {len} entries for N = {}",
            grid.n()
        )));
    }
    let mut out = SpectralVelocity::zeros(grid);
    {
        let dst = out.coeffs_mut();
        for m in grid.modes() {
            let i = m.index;
            let v = [v_hat[0][i], v_hat[1][i], v_hat[2][i]];
            let kv = v[0] * m.k[0] + v[1] * m.k[1] + v[2] * m.k[2];
            let s = kv / m.k2;
            for j in 0..3 {
                dst[j][i] = v[j] - s * m.k[j];
            }
        }
    }
    for c in v_hat {
        grid.recycle_spectral(c);
    }
    Ok(out)
}

/// Projects a field in place. Used where the input is already a valid field
/// that picked up rounding drift.
pub(crate) fn reproject(u: &mut SpectralVelocity) {
    let grid = u.grid().clone();
    let c = u.coeffs_mut();
    for m in grid.modes() {
        let i = m.index;
        let kv = c[0][i] * m.k[0] + c[1][i] * m.k[1] + c[2][i] * m.k[2];
        let s = kv / m.k2;
        for (cj, kj) in c.iter_mut().zip(m.k) {
            cj[i] -= s * kj;
        }
    }
}

/// Smallest nonzero `|k|²` of the grid, `(2π/L)²`: the Poincaré constant of
/// zero-mean periodic fields.
pub fn stokes_lambda1(grid: &WaveGrid) -> f64 {
    (2.0 * PI / grid.l()).powi(2)
}

pub fn validate_damping(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param(
            "alpha",
            alpha,
            "damping coefficient must be > 0",
        ));
    }
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::param("beta", beta, "damping exponent must be >= 1"));
    }
    Ok(())
}

/// Pointwise damping exponent handling: `|u|^{β−1}` from `s = |u|²`.
#[derive(Clone, Copy)]
enum Power {
    Unit,
    /// `s^e`.
    Int(i32),
    /// `s^e · √s`.
    HalfInt(i32),
    Real(f64),
}

impl Power {
    fn new(beta: f64) -> Self {
        let half = (beta - 1.0) / 2.0;
        if beta == 1.0 {
            Power::Unit
        } else if half < 64.0 && half.fract() == 0.0 {
            Power::Int(half as i32)
        } else if half < 64.0 && half.fract() == 0.5 {
            Power::HalfInt(half as i32)
        } else {
            Power::Real(half)
        }
    }

    #[inline]
    fn of_sq(self, s: f64) -> f64 {
        match self {
            Power::Unit => 1.0,
            Power::Int(e) => s.powi(e),
            Power::HalfInt(e) => s.powi(e) * s.sqrt(),
            Power::Real(h) => s.powf(h),
        }
    }
}

/// Physical-space sum `(u·∇)u + α|u|^{β−1}u`, with either part optional.
fn physical_terms(
    u: &SpectralVelocity,
    advection: bool,
    damping: Option<(f64, Power)>,
) -> Components<f64> {
    let grid = u.grid();
    let n = grid.n();
    let n2 = n * n;
    let phys = u.to_physical();
    let [ux, uy, uz] = phys.values();
    // Advection assigns every point; damping alone accumulates into zeros.
    let mut out: Components<f64> = std::array::from_fn(|_| {
        if advection {
            grid.physical_scratch()
        } else {
            grid.physical_buffer()
        }
    });
    if advection {
        for (j, acc) in out.iter_mut().enumerate() {
            let grads = [0, 1, 2].map(|m| grid.to_physical_derivative(&u.coeffs()[j], m));
            let [gx, gy, gz] = &grads;
            par::for_each_chunk(acc, n2, |i, slab| {
                let off = i * n2;
                for (p, a) in slab.iter_mut().enumerate() {
                    let q = off + p;
                    *a = ux[q] * gx[q] + uy[q] * gy[q] + uz[q] * gz[q];
                }
            });
            for g in grads {
                grid.recycle_physical(g);
            }
        }
    }
    if let Some((alpha, power)) = damping {
        let mut factor = grid.physical_scratch();
        par::for_each_chunk(&mut factor, n2, |i, slab| {
            let off = i * n2;
            for (p, a) in slab.iter_mut().enumerate() {
                let q = off + p;
                let s = ux[q] * ux[q] + uy[q] * uy[q] + uz[q] * uz[q];
                *a = alpha * power.of_sq(s);
            }
        });
        let comps = [ux, uy, uz];
        for (j, acc) in out.iter_mut().enumerate() {
            let uj = comps[j];
            let factor = &factor;
            par::for_each_chunk(acc, n2, |i, slab| {
                let off = i * n2;
                for (p, a) in slab.iter_mut().enumerate() {
                    let q = off + p;
                    *a += factor[q] * uj[q];
                }
            });
        }
        grid.recycle_physical(factor);
    }
    out
}

/// `−P[mask F(w)]` for a physical vector field `w`.
fn project_negated(grid: &WaveGrid, w: Components<f64>) -> SpectralVelocity {
    let raw = w.map(|c| {
        let s = grid.to_spectral(&c);
        grid.recycle_physical(c);
        s
    });
    let mut out = leray_project(grid, raw).expect("arrays come from this grid");
    out.scale(-1.0);
    out
}

/// `N(u) = −P[(u·∇)u]`, pseudo-spectral with 2/3-rule dealiasing.
pub fn nonlinear_term(u: &SpectralVelocity) -> SpectralVelocity {
    let w = physical_terms(u, true, None);
    project_negated(u.grid(), w)
}

/// `−P[α|u|^{β−1}u]`: the damping contribution to the right-hand side.
///
/// For `β = 1` this is exactly `−α u`.
pub fn damping_term(u: &SpectralVelocity, alpha: f64, beta: f64) -> Result<SpectralVelocity> {
    validate_damping(alpha, beta)?;
    match Power::new(beta) {
        Power::Unit => Ok(u.scaled(-alpha)),
        power => {
            let w = physical_terms(u, false, Some((alpha, power)));
            Ok(project_negated(u.grid(), w))
        }
    }
}

/// `nonlinear_term(u) + damping_term(u, α, β)` sharing one set of transforms.
pub fn advection_and_damping(
    u: &SpectralVelocity,
    alpha: f64,
    beta: f64,
) -> Result<SpectralVelocity> {
    validate_damping(alpha, beta)?;
    match Power::new(beta) {
        Power::Unit => {
            let w = physical_terms(u, true, None);
            let mut out = project_negated(u.grid(), w);
            out.axpy(-alpha, u);
            Ok(out)
        }
        power => {
            let w = physical_terms(u, true, Some((alpha, power)));
            Ok(project_negated(u.grid(), w))
        }
    }
}
