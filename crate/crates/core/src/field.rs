//! Velocity fields in spectral and physical representation.

use rustfft::num_complex::Complex64;

use crate::grid::WaveGrid;
use crate::par;

pub type Components<T> = [Vec<T>; 3];

/// Divergence-free, zero-mean, dealiased velocity in half-complex Fourier storage.
///
/// The normalization is `u(x) = Σ_k û(k) e^{ik·x}` over the full spectrum,
/// so `|u|² = L³ Σ_k |û(k)|²`.
#[derive(Debug)]
pub struct SpectralVelocity {
    grid: WaveGrid,
    coeffs: Components<Complex64>,
}

/// Velocity sampled on the `N³` collocation grid.
#[derive(Debug, Clone)]
pub struct PhysicalVelocity {
    grid: WaveGrid,
    values: Components<f64>,
}

impl SpectralVelocity {
    pub fn zeros(grid: &WaveGrid) -> Self {
        SpectralVelocity {
            grid: grid.clone(),
            coeffs: std::array::from_fn(|_| grid.spectral_buffer()),
        }
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &Components<Complex64> {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut Components<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(mut self) -> Components<Complex64> {
        std::mem::take(&mut self.coeffs)
    }

    /// Coefficient vector at a retained mode.
    pub fn at(&self, index: usize) -> [Complex64; 3] {
        [
            self.coeffs[0][index],
            self.coeffs[1][index],
            self.coeffs[2][index],
        ]
    }

    /// Squared H-norm `|u|²`.
    pub fn energy(&self) -> f64 {
        self.inner(self)
    }

    /// L² inner product `(u, v)`.
    pub fn inner(&self, other: &SpectralVelocity) -> f64 {
        let mut sum = 0.0;
        for m in self.grid.modes() {
            let mut s = 0.0;
            for j in 0..3 {
                let a = self.coeffs[j][m.index];
                let b = other.coeffs[j][m.index];
                s += a.re * b.re + a.im * b.im;
            }
            sum += m.weight * s;
        }
        sum * self.grid.volume()
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `|u − v|`.
    pub fn distance(&self, other: &SpectralVelocity) -> f64 {
        let mut sum = 0.0;
        for m in self.grid.modes() {
            let mut s = 0.0;
            for j in 0..3 {
                s += (self.coeffs[j][m.index] - other.coeffs[j][m.index]).norm_sqr();
            }
            sum += m.weight * s;
        }
        (sum * self.grid.volume()).sqrt()
    }

    /// `Σ_k |k|^{2p} |û(k)|²` scaled by L³: p = 1 gives `‖u‖²`, p = 2 gives `|Au|²`.
    pub fn sobolev_sq(&self, power: i32) -> f64 {
        let mut sum = 0.0;
        for m in self.grid.modes() {
            let s: f64 = (0..3).map(|j| self.coeffs[j][m.index].norm_sqr()).sum();
            sum += m.weight * m.k2.powi(power) * s;
        }
        sum * self.grid.volume()
    }

    /// Largest coefficient magnitude `max_k |û(k)|` (NaN if any entry is not finite).
    pub fn max_coeff(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in self.grid.modes() {
            for j in 0..3 {
                let v = self.coeffs[j][m.index];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return f64::NAN;
                }
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    /// `max_k |k·û(k)|` over every stored mode.
    pub fn max_divergence(&self) -> f64 {
        let unit = 2.0 * std::f64::consts::PI / self.grid.l();
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.spectral_len() {
            let f = self.grid.freq_of(idx);
            let d = self.coeffs[0][idx] * (unit * f[0] as f64)
                + self.coeffs[1][idx] * (unit * f[1] as f64)
                + self.coeffs[2][idx] * (unit * f[2] as f64);
            worst = worst.max(d.norm());
        }
        worst
    }

    /// Largest coefficient outside the dealiasing band or at `k = 0`.
    pub fn max_outside_band(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.spectral_len() {
            let f = self.grid.freq_of(idx);
            if f == [0, 0, 0] || !self.grid.in_band(f) {
                for j in 0..3 {
                    worst = worst.max(self.coeffs[j][idx].norm());
                }
            }
        }
        worst
    }

    pub fn hermitian_defect(&self) -> f64 {
        (0..3)
            .map(|j| self.grid.hermitian_defect(&self.coeffs[j]))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> SpectralVelocity {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn scale(&mut self, s: f64) {
        for m in self.grid.modes() {
            for j in 0..3 {
                self.coeffs[j][m.index] *= s;
            }
        }
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralVelocity) {
        for m in self.grid.modes() {
            for j in 0..3 {
                self.coeffs[j][m.index] += x.coeffs[j][m.index] * a;
            }
        }
    }

    pub fn add(&self, other: &SpectralVelocity) -> SpectralVelocity {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralVelocity) -> SpectralVelocity {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn to_physical(&self) -> PhysicalVelocity {
        PhysicalVelocity {
            grid: self.grid.clone(),
            values: [
                self.grid.to_physical(&self.coeffs[0]),
                self.grid.to_physical(&self.coeffs[1]),
                self.grid.to_physical(&self.coeffs[2]),
            ],
        }
    }
}

impl Clone for SpectralVelocity {
    fn clone(&self) -> Self {
        let coeffs = std::array::from_fn(|j| {
            let mut v = self.grid.spectral_scratch();
            v.copy_from_slice(&self.coeffs[j]);
            v
        });
        SpectralVelocity {
            grid: self.grid.clone(),
            coeffs,
        }
    }
}

impl Drop for SpectralVelocity {
    fn drop(&mut self) {
        for c in std::mem::take(&mut self.coeffs) {
            self.grid.recycle_spectral(c);
        }
    }
}

impl Drop for PhysicalVelocity {
    fn drop(&mut self) {
        for v in std::mem::take(&mut self.values) {
            self.grid.recycle_physical(v);
        }
    }
}

impl PhysicalVelocity {
    pub fn new(grid: &WaveGrid, values: Components<f64>) -> Self {
        for v in &values {
            assert_eq!(v.len(), grid.physical_len(), "physical component length");
        }
        PhysicalVelocity {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn values(&self) -> &Components<f64> {
        &self.values
    }

    pub fn into_values(mut self) -> Components<f64> {
        std::mem::take(&mut self.values)
    }

    /// Band-limited spectral coefficients of each component (not projected).
    pub fn to_spectral_raw(&self) -> Components<Complex64> {
        [
            self.grid.to_spectral(&self.values[0]),
            self.grid.to_spectral(&self.values[1]),
            self.grid.to_spectral(&self.values[2]),
        ]
    }

    /// Largest pointwise speed `max_x |u(x)|`.
    pub fn max_speed(&self) -> f64 {
        let n2 = self.grid.n() * self.grid.n();
        let [u, v, w] = &self.values;
        par::max_indexed(self.grid.n(), |i| {
            let mut m: f64 = 0.0;
            for p in i * n2..(i + 1) * n2 {
                let s = u[p] * u[p] + v[p] * v[p] + w[p] * w[p];
                if s.is_nan() {
                    return f64::NAN;
                }
                m = m.max(s);
            }
            m.sqrt()
        })
    }

    /// Rectangle-rule quadrature `(Δx)³ Σ_x |u(x)|^p`.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        let n2 = self.grid.n() * self.grid.n();
        let [u, v, w] = &self.values;
        let half = p / 2.0;
        let even = (half.fract() == 0.0).then_some(half as i32);
        let sum = par::sum_indexed(self.grid.n(), |i| {
            let mut acc = 0.0;
            for q in i * n2..(i + 1) * n2 {
                let s = u[q] * u[q] + v[q] * v[q] + w[q] * w[q];
                acc += match even {
                    Some(e) => s.powi(e),
                    None => s.powf(half),
                };
            }
            acc
        });
        sum * self.grid.cell_volume()
    }

    /// Physical-space mean of each component.
    pub fn means(&self) -> [f64; 3] {
        let len = self.grid.physical_len() as f64;
        [0, 1, 2].map(|j| self.values[j].iter().sum::<f64>() / len)
    }
}
