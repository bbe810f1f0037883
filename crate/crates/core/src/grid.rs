//! Periodic wave grid and the band-limited real-to-complex transforms on it.
//!
//! Physical fields are stored as `N³` reals, index `(i·N + j)·N + l` for the
//! point `(i, j, l)·L/N`. Spectral fields use the half-complex layout
//! `N × N × (N/2+1)`, index `(a·N + b)·(N/2+1) + c`, where `a`, `b` are FFT
//! indices along x and y (signed frequency `a` or `a − N`) and `c ≥ 0` is the
//! z frequency. Modes with `kz < 0` are implied by Hermitian symmetry.
//!
//! Only modes inside the 2/3-rule band (`3|n| < N` on every axis) are ever
//! nonzero, so both transforms skip the lines that are identically zero.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One retained, nonzero Fourier mode in the half-complex storage.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    /// Offset into a spectral component array.
    pub index: usize,
    /// Signed integer frequencies `(nx, ny, nz)`, `nz ≥ 0`.
    pub freq: [i32; 3],
    /// Physical wavevector `2π/L · freq`.
    pub k: [f64; 3],
    pub k2: f64,
    /// Multiplicity in Parseval sums: 1 on the `kz = 0` plane, 2 elsewhere.
    pub weight: f64,
}

/// Recycled buffers. Fresh large allocations are page-faulted in on every
/// use, which costs as much as the FFTs themselves at moderate `N`.
struct Pool<T> {
    free: Mutex<Vec<Vec<T>>>,
}

const POOL_CAP: usize = 96;

impl<T: Copy> Pool<T> {
    fn new() -> Self {
        Pool {
            free: Mutex::new(Vec::new()),
        }
    }

    /// Smallest free buffer that holds `len` elements.
    fn best_fit(&self, len: usize) -> Option<Vec<T>> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        let i = free
            .iter()
            .enumerate()
            .filter(|(_, v)| v.capacity() >= len)
            .min_by_key(|(_, v)| v.capacity())
            .map(|(i, _)| i)?;
        Some(free.swap_remove(i))
    }

    fn take(&self, len: usize, fill: T) -> Vec<T> {
        match self.best_fit(len) {
            Some(mut v) => {
                v.clear();
                v.resize(len, fill);
                v
            }
            None => vec![fill; len],
        }
    }

    /// Like `take`, but recycled contents are left in place. For buffers the
    /// caller overwrites completely.
    fn take_dirty(&self, len: usize, fill: T) -> Vec<T> {
        match self.best_fit(len) {
            Some(mut v) => {
                v.truncate(len);
                v.resize(len, fill);
                v
            }
            None => vec![fill; len],
        }
    }

    fn give(&self, v: Vec<T>) {
        if v.capacity() == 0 {
            return;
        }
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        if free.len() < POOL_CAP {
            free.push(v);
        }
    }
}

struct GridInner {
    n: usize,
    l: f64,
    nh: usize,
    kmax: usize,
    /// Axis indices (x or y) inside the dealiasing band, ascending.
    band: Vec<usize>,
    /// Wavenumber `2π/L · n` of each FFT index along x or y.
    wave: Vec<f64>,
    /// Nonzero retained modes in lexicographic (nx, ny, nz) order.
    modes: Vec<Mode>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    complex_pool: Pool<Complex64>,
    real_pool: Pool<f64>,
}

/// Periodic box `[0, L)³` with `N` collocation points per axis.
///
/// Cheap to clone; the FFT plans and mode tables are shared.
#[derive(Clone)]
pub struct WaveGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for WaveGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveGrid")
            .field("n", &self.inner.n)
            .field("l", &self.inner.l)
            .finish()
    }
}

impl PartialEq for WaveGrid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n && self.inner.l == other.inner.l
    }
}

/// Signed frequency of FFT index `i` on an `n`-point axis.
fn signed_freq(i: usize, n: usize) -> i32 {
    if i <= n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

impl WaveGrid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "N must be an even integer >= 4, got {n}"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {l}")));
        }
        let nh = n / 2 + 1;
        let kmax = (n - 1) / 3;
        let band: Vec<usize> = (0..n)
            .filter(|&i| signed_freq(i, n).unsigned_abs() as usize <= kmax)
            .collect();

        let unit = 2.0 * PI / l;
        let mut modes = Vec::new();
        let k = kmax as i32;
        for fx in -k..=k {
            for fy in -k..=k {
                for fz in 0..=k {
                    if fx == 0 && fy == 0 && fz == 0 {
                        continue;
                    }
                    let a = fx.rem_euclid(n as i32) as usize;
                    let b = fy.rem_euclid(n as i32) as usize;
                    let c = fz as usize;
                    let kv = [unit * fx as f64, unit * fy as f64, unit * fz as f64];
                    modes.push(Mode {
                        index: (a * n + b) * nh + c,
                        freq: [fx, fy, fz],
                        k: kv,
                        k2: kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2],
                        weight: if c == 0 { 1.0 } else { 2.0 },
                    });
                }
            }
        }

        let mut real_planner = RealFftPlanner::<f64>::new();
        let mut planner = FftPlanner::<f64>::new();
        Ok(WaveGrid {
            inner: Arc::new(GridInner {
                n,
                l,
                nh,
                kmax,
                band,
                wave: (0..n).map(|i| unit * signed_freq(i, n) as f64).collect(),
                modes,
                r2c: real_planner.plan_fft_forward(n),
                c2r: real_planner.plan_fft_inverse(n),
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
                complex_pool: Pool::new(),
                real_pool: Pool::new(),
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn l(&self) -> f64 {
        self.inner.l
    }

    /// Grid spacing `L/N`.
    pub fn dx(&self) -> f64 {
        self.inner.l / self.inner.n as f64
    }

    /// Volume of one collocation cell, the quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.inner.l.powi(3)
    }

    /// Largest retained `|n|` per axis.
    pub fn kmax(&self) -> usize {
        self.inner.kmax
    }

    pub fn physical_len(&self) -> usize {
        self.inner.n.pow(3)
    }

    pub fn spectral_len(&self) -> usize {
        self.inner.n * self.inner.n * self.inner.nh
    }

    /// Retained nonzero modes (the zero mode is excluded from the dynamics).
    pub fn modes(&self) -> &[Mode] {
        &self.inner.modes
    }

    /// Spectral storage offset of the mode with signed frequencies `freq` (`nz ≥ 0`).
    pub fn index_of(&self, freq: [i32; 3]) -> Option<usize> {
        let n = self.inner.n as i32;
        if freq[2] < 0 || freq[2] as usize >= self.inner.nh {
            return None;
        }
        if freq[0].abs() > n / 2 || freq[1].abs() > n / 2 {
            return None;
        }
        let a = freq[0].rem_euclid(n) as usize;
        let b = freq[1].rem_euclid(n) as usize;
        Some((a * self.inner.n + b) * self.inner.nh + freq[2] as usize)
    }

    /// Decodes a spectral storage offset into signed frequencies.
    pub fn freq_of(&self, index: usize) -> [i32; 3] {
        let (n, nh) = (self.inner.n, self.inner.nh);
        let c = index % nh;
        let b = (index / nh) % n;
        let a = index / (nh * n);
        [signed_freq(a, n), signed_freq(b, n), c as i32]
    }

    /// The dealiasing mask: true iff `3|n_i| < N` on every axis.
    pub fn in_band(&self, freq: [i32; 3]) -> bool {
        let k = self.inner.kmax as i32;
        freq.iter().all(|f| f.abs() <= k)
    }

    /// Number of modes the dealiasing mask retains over the full (both-sign) spectrum.
    pub fn retained_full_count(&self) -> usize {
        (2 * self.inner.kmax + 1).pow(3)
    }

    /// Physical coordinate of collocation index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Inverse transform of a band-limited spectral component to physical values.
    pub fn to_physical(&self, spec: &[Complex64]) -> Vec<f64> {
        self.inverse(spec, None)
    }

    /// Physical values of `∂_direction` of a band-limited component: the
    /// inverse transform of `i k_direction û`, without forming `i k û`.
    pub fn to_physical_derivative(&self, spec: &[Complex64], direction: usize) -> Vec<f64> {
        assert!(direction < 3, "direction must be 0, 1 or 2");
        self.inverse(spec, Some(direction))
    }

    fn inverse(&self, spec: &[Complex64], derivative: Option<usize>) -> Vec<f64> {
        let g = &*self.inner;
        let unit = 2.0 * PI / g.l;
        let (n, nh, kp) = (g.n, g.nh, g.kmax + 1);
        assert_eq!(spec.len(), self.spectral_len());

        // x-pass: one line per retained (b, c), stored contiguously.
        let mut lines = g.complex_pool.take_dirty(g.band.len() * kp * n, ZERO);
        par::for_each_chunk_init(
            &mut lines,
            n,
            || vec![ZERO; g.inv.get_inplace_scratch_len()],
            |scratch, li, line| {
                let b = g.band[li / kp];
                let c = li % kp;
                line.fill(ZERO);
                for &a in &g.band {
                    let v = spec[(a * n + b) * nh + c];
                    line[a] = match derivative {
                        None => v,
                        Some(d) => {
                            let k = [g.wave[a], g.wave[b], unit * c as f64][d];
                            Complex64::new(-v.im, v.re) * k
                        }
                    };
                }
                g.inv.process_with_scratch(line, scratch);
            },
        );

        // y-pass into full half-complex slabs (one slab per x index).
        let mut work = g.complex_pool.take_dirty(n * n * nh, ZERO);
        par::for_each_chunk_init(
            &mut work,
            n * nh,
            || (vec![ZERO; n], vec![ZERO; g.inv.get_inplace_scratch_len()]),
            |(buf, scratch), i, slab| {
                for c in 0..kp {
                    buf.fill(ZERO);
                    for (bi, &b) in g.band.iter().enumerate() {
                        buf[b] = lines[(bi * kp + c) * n + i];
                    }
                    g.inv.process_with_scratch(buf, scratch);
                    for (j, v) in buf.iter().enumerate() {
                        slab[j * nh + c] = *v;
                    }
                }
                for row in slab.chunks_exact_mut(nh) {
                    row[kp..].fill(ZERO);
                }
            },
        );

        g.complex_pool.give(lines);

        // z-pass: complex-to-real per (i, j) line.
        let mut out = g.real_pool.take_dirty(n * n * n, 0.0);
        par::for_each_chunk_init(
            &mut out,
            n,
            || (vec![ZERO; nh], g.c2r.make_scratch_vec()),
            |(buf, scratch), li, line| {
                buf.copy_from_slice(&work[li * nh..(li + 1) * nh]);
                buf[0].im = 0.0;
                buf[nh - 1].im = 0.0;
                g.c2r
                    .process_with_scratch(buf, line, scratch)
                    .expect("c2r buffer sizes are fixed by the grid");
            },
        );
        g.complex_pool.give(work);
        out
    }

    /// Forward transform of physical values, normalized by `1/N³` and
    /// truncated to the dealiasing band. Everything outside the band is zero.
    pub fn to_spectral(&self, phys: &[f64]) -> Vec<Complex64> {
        let g = &*self.inner;
        let (n, nh, kp) = (g.n, g.nh, g.kmax + 1);
        assert_eq!(phys.len(), self.physical_len());

        // z-pass.
        let mut work = g.complex_pool.take_dirty(n * n * nh, ZERO);
        par::for_each_chunk_init(
            &mut work,
            nh,
            || (vec![0.0; n], g.r2c.make_scratch_vec()),
            |(buf, scratch), li, line| {
                buf.copy_from_slice(&phys[li * n..(li + 1) * n]);
                g.r2c
                    .process_with_scratch(buf, line, scratch)
                    .expect("r2c buffer sizes are fixed by the grid");
            },
        );

        // y-pass in place, band planes only.
        par::for_each_chunk_init(
            &mut work,
            n * nh,
            || (vec![ZERO; n], vec![ZERO; g.fwd.get_inplace_scratch_len()]),
            |(buf, scratch), _i, slab| {
                for c in 0..kp {
                    for (j, v) in buf.iter_mut().enumerate() {
                        *v = slab[j * nh + c];
                    }
                    g.fwd.process_with_scratch(buf, scratch);
                    for &b in &g.band {
                        slab[b * nh + c] = buf[b];
                    }
                }
            },
        );

        // x-pass on retained (b, c) lines.
        let mut lines = g.complex_pool.take_dirty(g.band.len() * kp * n, ZERO);
        par::for_each_chunk_init(
            &mut lines,
            n,
            || vec![ZERO; g.fwd.get_inplace_scratch_len()],
            |scratch, li, line| {
                let b = g.band[li / kp];
                let c = li % kp;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = work[(i * n + b) * nh + c];
                }
                g.fwd.process_with_scratch(line, scratch);
            },
        );

        g.complex_pool.give(work);

        let scale = 1.0 / (n * n * n) as f64;
        let mut out = g.complex_pool.take(n * n * nh, ZERO);
        let in_band: Vec<bool> = (0..n)
            .map(|a| signed_freq(a, n).unsigned_abs() as usize <= g.kmax)
            .collect();
        par::for_each_chunk(&mut out, n * nh, |a, slab| {
            if !in_band[a] {
                return;
            }
            for (bi, &b) in g.band.iter().enumerate() {
                for c in 0..kp {
                    slab[b * nh + c] = lines[(bi * kp + c) * n + a] * scale;
                }
            }
        });
        g.complex_pool.give(lines);
        self.symmetrize_kz0(&mut out);
        out
    }

    /// Zeroed spectral component, possibly recycled.
    pub(crate) fn spectral_buffer(&self) -> Vec<Complex64> {
        self.inner.complex_pool.take(self.spectral_len(), ZERO)
    }

    /// Zeroed physical component, possibly recycled.
    pub(crate) fn physical_buffer(&self) -> Vec<f64> {
        self.inner.real_pool.take(self.physical_len(), 0.0)
    }

    /// Spectral component with unspecified contents, for full overwrites.
    pub(crate) fn spectral_scratch(&self) -> Vec<Complex64> {
        self.inner
            .complex_pool
            .take_dirty(self.spectral_len(), ZERO)
    }

    /// Physical component with unspecified contents, for full overwrites.
    pub(crate) fn physical_scratch(&self) -> Vec<f64> {
        self.inner.real_pool.take_dirty(self.physical_len(), 0.0)
    }

    pub(crate) fn recycle_spectral(&self, v: Vec<Complex64>) {
        self.inner.complex_pool.give(v);
    }

    pub(crate) fn recycle_physical(&self, v: Vec<f64>) {
        self.inner.real_pool.give(v);
    }

    /// Makes the `kz = 0` plane exactly Hermitian: `û(−k) = conj(û(k))`.
    pub fn symmetrize_kz0(&self, spec: &mut [Complex64]) {
        let (n, nh) = (self.inner.n, self.inner.nh);
        for &a in &self.inner.band {
            for &b in &self.inner.band {
                let ma = (n - a) % n;
                let mb = (n - b) % n;
                let i = (a * n + b) * nh;
                let j = (ma * n + mb) * nh;
                if i < j {
                    let avg = (spec[i] + spec[j].conj()) * 0.5;
                    spec[i] = avg;
                    spec[j] = avg.conj();
                } else if i == j {
                    spec[i].im = 0.0;
                }
            }
        }
    }

    /// Largest deviation from Hermitian symmetry on the `kz = 0` plane.
    pub fn hermitian_defect(&self, spec: &[Complex64]) -> f64 {
        let (n, nh) = (self.inner.n, self.inner.nh);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let i = (a * n + b) * nh;
                let j = (((n - a) % n) * n + (n - b) % n) * nh;
                worst = worst.max((spec[i] - spec[j].conj()).norm());
            }
        }
        worst
    }
}
