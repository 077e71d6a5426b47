//! Magnetization fields and state construction.

use alloc::vec;
use alloc::vec::Vec;

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::vec3::Vec3;

/// Per-cell 3-vector field stored component-wise.
///
/// The physical meaning (A/m, reduced field, dm/dt, ...) is fixed by the
/// producer.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub nx: usize,
    pub ny: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl VectorField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        let n = nx * ny;
        Self { nx, ny, x: vec![0.0; n], y: vec![0.0; n], z: vec![0.0; n] }
    }

    pub fn filled(nx: usize, ny: usize, v: Vec3) -> Self {
        let n = nx * ny;
        Self { nx, ny, x: vec![v.x; n], y: vec![v.y; n], z: vec![v.z; n] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Vec3 {
        Vec3::new(self.x[i], self.y[i], self.z[i])
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: Vec3) {
        self.x[i] = v.x;
        self.y[i] = v.y;
        self.z[i] = v.z;
    }

    pub fn fill(&mut self, v: Vec3) {
        self.x.fill(v.x);
        self.y.fill(v.y);
        self.z.fill(v.z);
    }

    pub fn copy_from(&mut self, other: &VectorField) {
        self.x.copy_from_slice(&other.x);
        self.y.copy_from_slice(&other.y);
        self.z.copy_from_slice(&other.z);
    }

    /// Largest per-cell Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.len()).map(|i| self.get(i).norm()).fold(0.0, f64::max)
    }

    /// Whether both fields are on the same grid.
    pub fn same_grid(&self, other: &VectorField) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.len() == other.len()
    }
}

/// Which way a skyrmion core points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorePolarity {
    /// Core along −z inside a +z background. Topological charge −1.
    Down,
    /// Core along +z inside a −z background. Topological charge +1.
    Up,
}

impl CorePolarity {
    fn sign(self) -> f64 {
        match self {
            CorePolarity::Down => 1.0,
            CorePolarity::Up => -1.0,
        }
    }
}

/// Reduced magnetization `m = M/Ms` plus the simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationState {
    pub m: VectorField,
    /// Simulated time, s.
    pub time: f64,
}

/// Tolerance on `|m| = 1` for public operations.
pub const NORM_TOLERANCE: f64 = 1e-8;

impl MagnetizationState {
    pub fn uniform(device: &DeviceModel, dir: Vec3) -> Result<Self> {
        let norm = dir.norm();
        if !norm.is_finite() || libm::fabs(norm - 1.0) > NORM_TOLERANCE {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { m: VectorField::filled(device.nx, device.ny, dir), time: 0.0 })
    }

    /// Wraps an existing field, checking the grid and the unit-norm contract.
    pub fn from_field(device: &DeviceModel, m: VectorField, time: f64) -> Result<Self> {
        if m.nx != device.nx || m.ny != device.ny || m.len() != device.cells() {
            return Err(Error::GridMismatch { expected: device.cells(), actual: m.len() });
        }
        let s = Self { m, time };
        s.check_normalized()?;
        Ok(s)
    }

    pub fn check_normalized(&self) -> Result<()> {
        for i in 0..self.m.len() {
            let norm = self.m.get(i).norm();
            if !(libm::fabs(norm - 1.0) <= NORM_TOLERANCE) {
                return Err(Error::NotNormalized { cell: i, norm });
            }
        }
        Ok(())
    }

    pub fn normalize(&mut self) {
        normalize_field(&mut self.m);
    }

    /// Writes a Néel skyrmion ansatz into a disk around `center` (m).
    ///
    /// The polar profile is the 360° wall `θ(ρ) = 2·atan2(sinh(R/w), sinh(ρ/w))`
    /// with `w = sqrt(A/K_eff)`; the in-plane part is radial with the
    /// chirality favored by the sign of D. Cells farther than `R + 3w` from
    /// the center are left untouched.
    pub fn seed_skyrmion(
        &mut self,
        device: &DeviceModel,
        params: &MaterialParams,
        center: (f64, f64),
        radius: f64,
        polarity: CorePolarity,
    ) -> Result<()> {
        let (cx, cy) = center;
        if !device.contains_point(cx, cy) {
            return Err(Error::OutOfBounds { x: cx, y: cy });
        }
        if !(radius >= 2.0 * device.dx.max(device.dy)) {
            return Err(Error::RadiusTooSmall);
        }
        let w = params.wall_width();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Material { name: "Ku_film", reason: "effective anisotropy must be positive" });
        }
        let extent = radius + 3.0 * w;
        let s = polarity.sign();
        let chirality = if params.dmi >= 0.0 { 1.0 } else { -1.0 };
        let sinh_r = libm::sinh(radius / w);

        let ix_lo = libm::floor((cx - extent) / device.dx).max(0.0) as usize;
        let ix_hi = (libm::ceil((cx + extent) / device.dx) as usize).min(device.nx);
        let iy_lo = libm::floor((cy - extent) / device.dy).max(0.0) as usize;
        let iy_hi = (libm::ceil((cy + extent) / device.dy) as usize).min(device.ny);
        for iy in iy_lo..iy_hi {
            for ix in ix_lo..ix_hi {
                let idx = device.index(ix, iy);
                let (x, y) = device.cell_center(idx);
                let (rx, ry) = (x - cx, y - cy);
                let rho = libm::hypot(rx, ry);
                if rho > extent {
                    continue;
                }
                let theta = 2.0 * libm::atan2(sinh_r, libm::sinh(rho / w));
                let (st, ct) = (libm::sin(theta), libm::cos(theta));
                let (ux, uy) = if rho > 0.0 { (rx / rho, ry / rho) } else { (0.0, 0.0) };
                let inplane = chirality * s * st;
                self.m.set(idx, Vec3::new(inplane * ux, inplane * uy, s * ct).normalized());
            }
        }
        Ok(())
    }
}

/// Rescales every cell to unit length.
pub fn normalize_field(f: &mut VectorField) {
    let n = f.len();
    let (xs, ys, zs) = (&mut f.x[..n], &mut f.y[..n], &mut f.z[..n]);
    for i in 0..n {
        let (x, y, z) = (xs[i], ys[i], zs[i]);
        let inv = 1.0 / crate::math::sqrt(x * x + y * y + z * z);
        xs[i] = x * inv;
        ys[i] = y * inv;
        zs[i] = z * inv;
    }
}
