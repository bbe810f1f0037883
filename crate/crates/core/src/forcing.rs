//! Time-independent body forcing.

use crate::error::{Error, Result};
use crate::field::{Components, PhysicalVelocity, SpectralVelocity};
use crate::grid::WaveGrid;
use crate::spectral::leray_project;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Constant force `g` inside a finite cylinder, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub center: [f64; 3],
    pub radius: f64,
    pub height: f64,
    pub axis: Axis,
    pub g: [f64; 3],
}

impl Cylinder {
    /// Radius 4, height 4, axis along y, `g = (0, 2, 0)`, centered in a box of side `l`.
    pub fn centered(l: f64) -> Self {
        Cylinder {
            center: [l / 2.0; 3],
            radius: 4.0,
            height: 4.0,
            axis: Axis::Y,
            g: [0.0, 2.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    Zero,
    Cylinder(Cylinder),
    /// Raw grid values, one array of `N³` per component.
    Explicit(Components<f64>),
}

/// Forcing with its projected, dealiased spectral form cached.
#[derive(Debug, Clone)]
pub struct ForcingField {
    spec: ForcingSpec,
    f_hat: SpectralVelocity,
}

/// Linear ramp from 0 to 1 over one grid cell centered on the surface `d = 0`.
pub(crate) fn smooth_step(d: f64, width: f64) -> f64 {
    (0.5 + d / width).clamp(0.0, 1.0)
}

/// Minimal-image displacement on a periodic axis of length `l`.
pub(crate) fn periodic_offset(x: f64, c: f64, l: f64) -> f64 {
    let d = x - c;
    d - l * (d / l).round()
}

impl ForcingField {
    pub fn new(spec: ForcingSpec, grid: &WaveGrid) -> Result<Self> {
        let f_hat = match &spec {
            ForcingSpec::Zero => SpectralVelocity::zeros(grid),
            ForcingSpec::Cylinder(c) => {
                if !(c.radius > 0.0 && c.height > 0.0) {
                    return Err(Error::Precondition(
                        "cylinder radius and height must be positive".into(),
                    ));
                }
                let phys = cylinder_values(c, grid);
                leray_project(grid, phys.to_spectral_raw())?
            }
            ForcingSpec::Explicit(values) => {
                if values.iter().any(|v| v.len() != grid.physical_len()) {
                    return Err(Error::InvalidGrid(format!(
                        "explicit forcing needs {} values per component",
                        grid.physical_len()
                    )));
                }
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("explicit forcing"));
                }
                let phys = PhysicalVelocity::new(grid, values.clone());
                leray_project(grid, phys.to_spectral_raw())?
            }
        };
        Ok(ForcingField { spec, f_hat })
    }

    pub fn zero(grid: &WaveGrid) -> Self {
        ForcingField {
            spec: ForcingSpec::Zero,
            f_hat: SpectralVelocity::zeros(grid),
        }
    }

    pub fn spec(&self) -> &ForcingSpec {
        &self.spec
    }

    /// Projected spectral forcing `P f`.
    pub fn spectral(&self) -> &SpectralVelocity {
        &self.f_hat
    }

    /// `|f|²` of the projected forcing.
    pub fn norm_sq(&self) -> f64 {
        self.f_hat.energy()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.spec, ForcingSpec::Zero)
    }
}

fn cylinder_values(c: &Cylinder, grid: &WaveGrid) -> PhysicalVelocity {
    let n = grid.n();
    let (l, dx) = (grid.l(), grid.dx());
    let ax = c.axis.index();
    let mut chi = vec![0.0; grid.physical_len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = [grid.coord(i), grid.coord(j), grid.coord(k)];
                let d: [f64; 3] = std::array::from_fn(|m| periodic_offset(x[m], c.center[m], l));
                let radial = (0..3)
                    .filter(|&m| m != ax)
                    .map(|m| d[m] * d[m])
                    .sum::<f64>()
                    .sqrt();
                chi[(i * n + j) * n + k] = smooth_step(c.radius - radial, dx)
                    * smooth_step(c.height / 2.0 - d[ax].abs(), dx);
            }
        }
    }
    let values = [0, 1, 2].map(|m| chi.iter().map(|&v| v * c.g[m]).collect());
    PhysicalVelocity::new(grid, values)
}
