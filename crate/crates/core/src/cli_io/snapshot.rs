//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                                  |
//! |-------:|-----:|----------------------------------------|
//! | 0      | 8    | magic `DNSSNAP\0`                      |
//! | 8      | 4    | format version (u32)                   |
//! | 12     | 4    | reserved, zero                         |
//! | 16     | 8    | `N` (u64)                              |
//! | 24     | 8    | `L` (f64)                              |
//! | 32     | 8    | `t` (f64)                              |
//! | 40     | 24   | `μ, α, β` (f64 each)                   |
//! | 64     | 8    | step count (u64)                       |
//! | 72     | 8    | last step size (f64)                   |
//! | 80     | 8    | number of stored modes `M` (u64)       |
//! | 88     | 32   | SHA-256 of the payload                 |
//! | 120    | 48·M | payload                                |
//!
//! The payload holds, component by component, the real and imaginary parts
//! of every retained nonzero mode with `nz ≥ 0`, ordered lexicographically
//! by signed frequency `(nx, ny, nz)`.

use std::fs;
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result, SnapshotError};
use crate::field::SpectralVelocity;
use crate::grid::WaveGrid;
use crate::integrator::{Flow, Observer, Physics, SolverState, Stride};

pub const MAGIC: [u8; 8] = *b"DNSSNAP\0";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 120;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub n: usize,
    pub l: f64,
    pub t: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub step_count: u64,
    pub last_dt: f64,
    pub mode_count: usize,
    pub checksum: [u8; 32],
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub state: SolverState,
}

impl Snapshot {
    /// Fails unless the snapshot was taken on `grid`.
    pub fn check_grid(&self, grid: &WaveGrid) -> Result<()> {
        if self.header.n != grid.n() || self.header.l != grid.l() {
            return Err(Error::GridMismatch {
                expected_n: grid.n(),
                expected_l: grid.l(),
                found_n: self.header.n,
                found_l: self.header.l,
            });
        }
        Ok(())
    }
}

/// Storage offsets in payload order.
fn ordered_indices(grid: &WaveGrid) -> Vec<usize> {
    let mut modes: Vec<([i32; 3], usize)> =
        grid.modes().iter().map(|m| (m.freq, m.index)).collect();
    modes.sort_unstable_by_key(|&(f, _)| f);
    modes.into_iter().map(|(_, i)| i).collect()
}

pub fn encode_snapshot(state: &SolverState, physics: &Physics) -> Vec<u8> {
    let grid = state.u.grid();
    let order = ordered_indices(grid);
    let mut payload = Vec::with_capacity(order.len() * 48);
    for comp in state.u.coeffs() {
        for &i in &order {
            payload.extend_from_slice(&comp[i].re.to_le_bytes());
            payload.extend_from_slice(&comp[i].im.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    for v in [grid.l(), state.t, physics.mu, physics.alpha, physics.beta] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&state.step_count.to_le_bytes());
    out.extend_from_slice(&state.last_dt.to_le_bytes());
    out.extend_from_slice(&(order.len() as u64).to_le_bytes());
    out.extend_from_slice(Sha256::digest(&payload).as_slice());
    debug_assert_eq!(out.len(), HEADER_LEN);
    out.extend_from_slice(&payload);
    out
}

fn u64_at(b: &[u8], off: usize) -> u64 {
    u64::from_le_bytes(b[off..off + 8].try_into().expect("8-byte slice"))
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().expect("8-byte slice"))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    if bytes.len() < 12 {
        return Err(SnapshotError::Truncated);
    }
    if bytes[..8] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4-byte slice"));
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    if bytes.len() < HEADER_LEN {
        return Err(SnapshotError::Truncated);
    }
    let header = SnapshotHeader {
        version,
        n: u64_at(bytes, 16) as usize,
        l: f64_at(bytes, 24),
        t: f64_at(bytes, 32),
        mu: f64_at(bytes, 40),
        alpha: f64_at(bytes, 48),
        beta: f64_at(bytes, 56),
        step_count: u64_at(bytes, 64),
        last_dt: f64_at(bytes, 72),
        mode_count: u64_at(bytes, 80) as usize,
        checksum: bytes[88..120].try_into().expect("32-byte slice"),
    };
    let payload = &bytes[HEADER_LEN..];
    let expected_len = header
        .mode_count
        .checked_mul(48)
        .ok_or(SnapshotError::Truncated)?;
    if payload.len() != expected_len {
        return Err(if payload.len() < expected_len {
            SnapshotError::Truncated
        } else {
            SnapshotError::Header(format!(
                "{} payload bytes for {} modes",
                payload.len(),
                header.mode_count
            ))
        });
    }
    if Sha256::digest(payload).as_slice() != header.checksum {
        return Err(SnapshotError::Checksum);
    }
    let grid =
        WaveGrid::new(header.n, header.l).map_err(|e| SnapshotError::Header(e.to_string()))?;
    let order = ordered_indices(&grid);
    if order.len() != header.mode_count {
        return Err(SnapshotError::Header(format!(
            "{} modes stored, N = {} retains {}",
            header.mode_count,
            header.n,
            order.len()
        )));
    }
    let mut u = SpectralVelocity::zeros(&grid);
    let mut chunks = payload.chunks_exact(16);
    for comp in u.coeffs_mut().iter_mut() {
        for &i in &order {
            let c = chunks.next().expect("payload length checked");
            comp[i] = Complex64::new(f64_at(c, 0), f64_at(c, 8));
        }
    }
    if u.coeffs()
        .iter()
        .flatten()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(SnapshotError::Header("non-finite coefficient".into()));
    }
    let state = SolverState {
        t: header.t,
        u,
        step_count: header.step_count,
        last_dt: header.last_dt,
    };
    Ok(Snapshot { header, state })
}

/// Writes atomically through a temporary sibling file.
pub fn write_snapshot(state: &SolverState, physics: &Physics, path: &Path) -> Result<()> {
    let bytes = encode_snapshot(state, physics);
    let tmp = super::csv::partial_path(path);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes).map_err(|kind| Error::Snapshot {
        path: path.to_path_buf(),
        kind,
    })
}

/// Observer that writes `snapshot_<step>.bin` into a directory at its stride.
pub struct SnapshotWriter {
    stride: Stride,
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl SnapshotWriter {
    pub fn new(dir: &Path, stride: Stride) -> Self {
        SnapshotWriter {
            stride,
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

impl Observer for SnapshotWriter {
    fn stride(&self) -> Stride {
        self.stride
    }

    fn observe(&mut self, state: &SolverState, physics: &Physics) -> Result<Flow> {
        let path = self
            .dir
            .join(format!("snapshot_{:010}.bin", state.step_count));
        write_snapshot(state, physics, &path)?;
        self.written.push(path);
        Ok(Flow::Continue)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ForcingField;
    use crate::initial::{make_initial_condition, InitialCondition};

    fn state() -> (SolverState, Physics) {
        let grid = WaveGrid::new(8, 2.5).unwrap();
        let spec = InitialCondition::RandomDivFree {
            seed: 3,
            energy: 2.0,
            slope: -1.0,
        };
        let mut s = SolverState::new(make_initial_condition(&spec, &grid).unwrap());
        s.t = 1.25;
        s.step_count = 17;
        s.last_dt = 0.0625;
        let p = Physics::new(0.3, 0.7, 3.5, ForcingField::zero(&grid)).unwrap();
        (s, p)
    }

    #[test]
    fn round_trip_is_bitwise() {
        let (s, p) = state();
        let snap = decode_snapshot(&encode_snapshot(&s, &p)).unwrap();
        assert_eq!(
            (snap.header.mu, snap.header.alpha, snap.header.beta),
            (0.3, 0.7, 3.5)
        );
        assert_eq!(snap.state.t, 1.25);
        assert_eq!(snap.state.step_count, 17);
        assert_eq!(snap.state.last_dt, 0.0625);
        for (a, b) in s.u.coeffs().iter().zip(snap.state.u.coeffs()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(
                    (x.re.to_bits(), x.im.to_bits()),
                    (y.re.to_bits(), y.im.to_bits())
                );
            }
        }
    }

    #[test]
    fn payload_order_is_lexicographic() {
        let (s, p) = state();
        let bytes = encode_snapshot(&s, &p);
        let grid = s.u.grid();
        let first = grid.modes().iter().map(|m| m.freq).min().unwrap();
        let i = grid.index_of(first).unwrap();
        assert_eq!(f64_at(&bytes, HEADER_LEN), s.u.coeffs()[0][i].re);
        assert_eq!(f64_at(&bytes, HEADER_LEN + 8), s.u.coeffs()[0][i].im);
    }

    #[test]
    fn corruption_is_detected() {
        let (s, p) = state();
        let good = encode_snapshot(&s, &p);
        let mut bad = good.clone();
        bad[HEADER_LEN + 100] ^= 1;
        assert!(matches!(
            decode_snapshot(&bad),
            Err(SnapshotError::Checksum)
        ));
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(
            decode_snapshot(&bad),
            Err(SnapshotError::BadMagic)
        ));
        let mut bad = good.clone();
        bad[8] = 9;
        assert!(matches!(
            decode_snapshot(&bad),
            Err(SnapshotError::Version(9))
        ));
        assert!(matches!(
            decode_snapshot(&good[..good.len() - 1]),
            Err(SnapshotError::Truncated)
        ));
    }

    #[test]
    fn grid_mismatch_on_restart() {
        let (s, p) = state();
        let snap = decode_snapshot(&encode_snapshot(&s, &p)).unwrap();
        snap.check_grid(s.u.grid()).unwrap();
        let other = WaveGrid::new(16, 2.5).unwrap();
        assert!(matches!(
            snap.check_grid(&other),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let (s, p) = state();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        write_snapshot(&s, &p, &path).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.state.u.coeffs(), s.u.coeffs());
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x80;
        fs::write(&path, bytes).unwrap();
        let e = read_snapshot(&path).unwrap_err();
        assert!(matches!(
            e,
            Error::Snapshot {
                kind: SnapshotError::Checksum,
                ..
            }
        ));
    }
}
