//! Nanotrack geometry: the structured grid, the gated barrier and the
//! presynapse/postsynapse partition.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::material::MaterialParams;

/// Which part of the device a cell belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Presynapse,
    Barrier,
    Postsynapse,
}

/// Selects cells for region-restricted observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionFilter {
    All,
    Only(Region),
}

impl RegionFilter {
    #[inline]
    pub fn admits(self, r: Region) -> bool {
        match self {
            RegionFilter::All => true,
            RegionFilter::Only(want) => want == r,
        }
    }
}

/// Rounded rectangle of raised anisotropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    /// Center along the track, m. `None` centers the barrier on the track.
    pub center_x: Option<f64>,
    /// Center across the track, m. `None` centers the barrier on the track.
    pub center_y: Option<f64>,
    /// Extent along the track (x), m.
    pub length: f64,
    /// Extent across the track (y), m.
    pub width: f64,
    pub corner_radius: f64,
}

impl Default for BarrierSpec {
    fn default() -> Self {
        Self { center_x: None, center_y: None, length: 40e-9, width: 56e-9, corner_radius: 10e-9 }
    }
}

impl BarrierSpec {
    /// Rounded-rectangle membership of a point given relative to the center.
    ///
    /// A point is inside when it lies within `corner_radius` of the rectangle
    /// shrunk by `corner_radius` on every side.
    pub fn contains(&self, rel_x: f64, rel_y: f64) -> bool {
        if self.length <= 0.0 || self.width <= 0.0 {
            return false;
        }
        let r = self.corner_radius;
        let qx = (libm::fabs(rel_x) - (0.5 * self.length - r)).max(0.0);
        let qy = (libm::fabs(rel_y) - (0.5 * self.width - r)).max(0.0);
        qx * qx + qy * qy <= r * r
    }
}

/// Everything needed to build a [`DeviceModel`]. Lengths in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceConfig {
    pub length: f64,
    pub width: f64,
    pub cell_x: f64,
    pub cell_y: f64,
    pub cell_z: f64,
    pub barrier: BarrierSpec,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            length: 528e-9,
            width: 120e-9,
            cell_x: 2e-9,
            cell_y: 2e-9,
            cell_z: 1e-9,
            barrier: BarrierSpec::default(),
        }
    }
}

/// Immutable discretized device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub barrier: BarrierSpec,
    /// Resolved barrier center, m.
    pub barrier_center: (f64, f64),
    /// Uniaxial anisotropy per cell, J/m³.
    pub ku_map: Vec<f64>,
    pub region_mask: Vec<Region>,
}

fn cell_count(extent: f64, cell: f64, what: &'static str) -> Result<usize> {
    let n = libm::round(extent / cell);
    if n < 1.0 || libm::fabs(n * cell - extent) > 1e-9 * extent {
        return Err(Error::Geometry(what));
    }
    Ok(n as usize)
}

impl DeviceModel {
    pub fn build(config: &DeviceConfig, params: &MaterialParams) -> Result<Self> {
        params.validate()?;
        let c = config;
        for v in [c.length, c.width, c.cell_x, c.cell_y, c.cell_z] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Geometry("dimensions must be finite and positive"));
            }
        }
        let nx = cell_count(c.length, c.cell_x, "cell size does not divide track length")?;
        let ny = cell_count(c.width, c.cell_y, "cell size does not divide track width")?;
        if libm::fabs(c.cell_z - params.thickness) > 1e-9 * params.thickness {
            return Err(Error::Geometry("cell thickness must equal the film thickness"));
        }

        let l_ex = params.exchange_length();
        let edge = c.cell_x.max(c.cell_y);
        if edge >= l_ex {
            return Err(Error::CellTooCoarse { cell: edge, exchange_length: l_ex });
        }

        let b = c.barrier;
        if b.length < 0.0 || b.width < 0.0 || b.corner_radius < 0.0 {
            return Err(Error::Geometry("barrier extents must be non-negative"));
        }
        if b.length > 0.0 && b.width > 0.0 && 2.0 * b.corner_radius > b.length.min(b.width) {
            return Err(Error::Geometry("barrier corner radius exceeds half its short side"));
        }
        let cx = b.center_x.unwrap_or(0.5 * c.length);
        let cy = b.center_y.unwrap_or(0.5 * c.width);
        if b.width > c.width || cy - 0.5 * b.width < 0.0 || cy + 0.5 * b.width > c.width {
            return Err(Error::Geometry("barrier wider than the track"));
        }
        if cx - 0.5 * b.length < 0.0 || cx + 0.5 * b.length > c.length {
            return Err(Error::Geometry("barrier extends past the track ends"));
        }

        let n = nx * ny;
        let mut ku_map = Vec::with_capacity(n);
        let mut region_mask = Vec::with_capacity(n);
        for iy in 0..ny {
            let y = (iy as f64 + 0.5) * c.cell_y;
            for ix in 0..nx {
                let x = (ix as f64 + 0.5) * c.cell_x;
                let region = if b.contains(x - cx, y - cy) {
                    Region::Barrier
                } else if x < cx {
                    Region::Presynapse
                } else {
                    Region::Postsynapse
                };
                ku_map.push(if region == Region::Barrier { params.ku_barrier } else { params.ku_film });
                region_mask.push(region);
            }
        }

        Ok(Self {
            nx,
            ny,
            dx: c.cell_x,
            dy: c.cell_y,
            dz: c.cell_z,
            barrier: b,
            barrier_center: (cx, cy),
            ku_map,
            region_mask,
        })
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx * iy
    }

    pub fn length(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn width(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    /// Center of cell `idx`, m.
    #[inline]
    pub fn cell_center(&self, idx: usize) -> (f64, f64) {
        let ix = idx % self.nx;
        let iy = idx / self.nx;
        ((ix as f64 + 0.5) * self.dx, (iy as f64 + 0.5) * self.dy)
    }

    pub fn region_size(&self, region: Region) -> usize {
        self.region_mask.iter().filter(|&&r| r == region).count()
    }

    /// Whether `(x, y)` lies on the track.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        (0.0..self.length()).contains(&x) && (0.0..self.width()).contains(&y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_device() -> DeviceModel {
        DeviceModel::build(&DeviceConfig::default(), &MaterialParams::default()).unwrap()
    }

    #[test]
    fn default_grid() {
        let d = default_device();
        assert_eq!((d.nx, d.ny), (264, 60));
        assert!((d.length() - 528e-9).abs() < 1e-15);
        assert!((d.width() - 120e-9).abs() < 1e-15);
    }

    // Independent count: walk the cell centers inside the 40 x 56 nm box and
    // drop the ones whose distance to the inner 20 x 36 nm rectangle exceeds
    // the 10 nm corner radius. Centers sit at odd nm offsets from the middle.
    #[test]
    fn default_barrier_cell_count() {
        let mut expected = 0;
        for px in (-19..=19).step_by(2) {
            for py in (-27..=27).step_by(2) {
                let qx = (i32::abs(px) - 10).max(0);
                let qy = (i32::abs(py) - 18).max(0);
                if qx * qx + qy * qy <= 100 {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 540);
        let d = default_device();
        assert_eq!(d.region_size(Region::Barrier), expected);
        for (k, r) in d.ku_map.iter().zip(&d.region_mask) {
            let want = if *r == Region::Barrier { 0.84e6 } else { 0.7e6 };
            assert_eq!(*k, want);
        }
    }

    #[test]
    fn partition_is_complete() {
        let d = default_device();
        let total =
            d.region_size(Region::Presynapse) + d.region_size(Region::Barrier) + d.region_size(Region::Postsynapse);
        assert_eq!(total, 15_840);
        assert_eq!(d.region_size(Region::Presynapse), d.region_size(Region::Postsynapse));
    }

    #[test]
    fn degenerate_barrier_is_uniform() {
        let cfg = DeviceConfig {
            barrier: BarrierSpec { length: 0.0, width: 0.0, corner_radius: 0.0, ..Default::default() },
            ..Default::default()
        };
        let d = DeviceModel::build(&cfg, &MaterialParams::default()).unwrap();
        assert_eq!(d.region_size(Region::Barrier), 0);
        assert!(d.ku_map.iter().all(|&k| k == 0.7e6));
    }

    #[test]
    fn rejects_bad_geometry() {
        let p = MaterialParams::default();
        let wide = DeviceConfig { barrier: BarrierSpec { width: 130e-9, ..Default::default() }, ..Default::default() };
        assert!(matches!(DeviceModel::build(&wide, &p), Err(Error::Geometry(_))));

        let mismatch = DeviceConfig { cell_x: 2.5e-9, length: 527e-9, ..Default::default() };
        assert!(matches!(DeviceModel::build(&mismatch, &p), Err(Error::Geometry(_))));

        let coarse = DeviceConfig { cell_x: 8e-9, cell_y: 10e-9, ..Default::default() };
        assert!(matches!(DeviceModel::build(&coarse, &p), Err(Error::CellTooCoarse { .. })));
    }

    #[test]
    fn presynapse_left_of_barrier() {
        let d = default_device();
        for (i, r) in d.region_mask.iter().enumerate() {
            let (x, _) = d.cell_center(i);
            match r {
                Region::Presynapse => assert!(x < d.barrier_center.0),
                Region::Postsynapse => assert!(x > d.barrier_center.0),
                Region::Barrier => {}
            }
        }
    }
}
