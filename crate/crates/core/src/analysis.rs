//! Observables: topological charge, skyrmion counts, region averages and the
//! synaptic weight.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::device::{DeviceModel, Region, RegionFilter};
use crate::error::{Error, Result};
use crate::state::{MagnetizationState, VectorField};
use crate::vec3::Vec3;

/// Topological charge by central differences,
/// `Q = (1/4π)·Σ m·(∂x m × ∂y m)·Δx·Δy` over admitted cells.
///
/// Derivatives use the fourth-order central stencil where two neighbors are
/// available on both sides, the second-order one next to an edge, and a
/// one-sided difference on the edge itself.
///
/// The DMI edge twist carries a small fractional charge at the four track
/// corners, so a track holding `k` skyrmions does not sum to exactly `−k`;
/// see [`skyrmion_charges`] for the charge carried by each skyrmion.
pub fn topological_charge(state: &MagnetizationState, device: &DeviceModel, filter: RegionFilter) -> f64 {
    let mut q = 0.0;
    for i in 0..device.cells() {
        if filter.admits(device.region_mask[i]) {
            q += charge_density(&state.m, device, i);
        }
    }
    q / (4.0 * PI)
}

#[inline]
fn derivative(m: &VectorField, i: usize, pos: usize, len: usize, stride: usize) -> Vec3 {
    if pos >= 2 && pos + 2 < len {
        (m.get(i - 2 * stride) - m.get(i + 2 * stride) + (m.get(i + stride) - m.get(i - stride)) * 8.0) * (1.0 / 12.0)
    } else if pos >= 1 && pos + 1 < len {
        (m.get(i + stride) - m.get(i - stride)) * 0.5
    } else if pos + 1 < len {
        m.get(i + stride) - m.get(i)
    } else if pos >= 1 {
        m.get(i) - m.get(i - stride)
    } else {
        Vec3::ZERO
    }
}

/// `m·(∂x m × ∂y m)·Δx·Δy` at cell `i`.
#[inline]
fn charge_density(m: &VectorField, device: &DeviceModel, i: usize) -> f64 {
    let (nx, ny) = (device.nx, device.ny);
    let (ix, iy) = (i % nx, i / nx);
    let dmx = derivative(m, i, ix, nx, 1);
    let dmy = derivative(m, i, iy, ny, nx);
    m.get(i).dot(dmx.cross(dmy))
}

/// Charge per region. `total` is the sum of the three parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionCharges {
    pub presynapse: f64,
    pub barrier: f64,
    pub postsynapse: f64,
    pub total: f64,
}

pub fn charge_by_region(state: &MagnetizationState, device: &DeviceModel) -> RegionCharges {
    let mut c = RegionCharges::default();
    for i in 0..device.cells() {
        let q = charge_density(&state.m, device, i);
        match device.region_mask[i] {
            Region::Presynapse => c.presynapse += q,
            Region::Barrier => c.barrier += q,
            Region::Postsynapse => c.postsynapse += q,
        }
    }
    let s = 1.0 / (4.0 * PI);
    c.presynapse *= s;
    c.barrier *= s;
    c.postsynapse *= s;
    c.total = c.presynapse + c.barrier + c.postsynapse;
    c
}

/// Signed solid angle of the spherical triangle (a, b, c).
#[inline]
pub fn solid_angle(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let num = a.dot(b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * libm::atan2(num, den)
}

/// Lattice topological charge: each plaquette of four neighboring cell
/// centers is split into two counter-clockwise triangles whose solid angles
/// are summed. A plaquette belongs to the region of its lower-left cell.
pub fn topological_charge_solid_angle(state: &MagnetizationState, device: &DeviceModel, filter: RegionFilter) -> f64 {
    let m = &state.m;
    let nx = device.nx;
    let mut omega = 0.0;
    for iy in 0..device.ny.saturating_sub(1) {
        for ix in 0..nx.saturating_sub(1) {
            let i = ix + nx * iy;
            if !filter.admits(device.region_mask[i]) {
                continue;
            }
            let (a, b, c, d) = (m.get(i), m.get(i + 1), m.get(i + 1 + nx), m.get(i + nx));
            omega += solid_angle(a, b, c) + solid_angle(a, c, d);
        }
    }
    omega / (4.0 * PI)
}

/// A 4-connected patch of reversed magnetization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub area: usize,
    /// Cell with the smallest m_z.
    pub core_cell: usize,
    pub region: Region,
    /// Mean cell-center position, m.
    pub centroid: (f64, f64),
}

/// Default m_z threshold for a reversed cell.
pub const DEFAULT_MZ_THRESHOLD: f64 = 0.0;
/// Components smaller than this many cells are noise.
pub const MIN_COMPONENT_AREA: usize = 3;

/// All reversed-core components (`m_z < threshold`, area ≥ 3 cells) of the
/// state, in order of their first cell index. A component is assigned to
/// the region of its minimum-m_z cell.
pub fn skyrmion_components(state: &MagnetizationState, device: &DeviceModel, mz_threshold: f64) -> Vec<Component> {
    let n = device.cells();
    let nx = device.nx;
    let mz = &state.m.z;
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || !(mz[start] < mz_threshold) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut area, mut core, mut sx, mut sy) = (0usize, start, 0.0, 0.0);
        while let Some(i) = stack.pop() {
            area += 1;
            if mz[i] < mz[core] || (mz[i] == mz[core] && i < core) {
                core = i;
            }
            let (x, y) = device.cell_center(i);
            sx += x;
            sy += y;
            let (ix, iy) = (i % nx, i / nx);
            let mut visit = |j: usize| {
                if !seen[j] && mz[j] < mz_threshold {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                visit(i - 1);
            }
            if ix + 1 < nx {
                visit(i + 1);
            }
            if iy > 0 {
                visit(i - nx);
            }
            if iy + 1 < device.ny {
                visit(i + nx);
            }
        }
        if area >= MIN_COMPONENT_AREA {
            out.push(Component {
                area,
                core_cell: core,
                region: device.region_mask[core],
                centroid: (sx / area as f64, sy / area as f64),
            });
        }
    }
    out
}

pub fn count_skyrmions(
    state: &MagnetizationState,
    device: &DeviceModel,
    filter: RegionFilter,
    mz_threshold: f64,
) -> usize {
    skyrmion_components(state, device, mz_threshold).iter().filter(|c| filter.admits(c.region)).count()
}

/// Mean m_z over the admitted cells.
pub fn region_average_mz(state: &MagnetizationState, device: &DeviceModel, filter: RegionFilter) -> Result<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, &r) in device.region_mask.iter().enumerate() {
        if filter.admits(r) {
            sum += state.m.z[i];
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(sum / n as f64)
}

/// Weight readout from the postsynapse magnetization: `(1 − <m_z>)/2`
/// clamped to [0, 1]. More or larger skyrmions give a larger weight.
pub fn weight_from_mz(mz_post: f64) -> f64 {
    (0.5 * (1.0 - mz_post)).clamp(0.0, 1.0)
}

pub fn synaptic_weight(state: &MagnetizationState, device: &DeviceModel) -> Result<f64> {
    Ok(weight_from_mz(region_average_mz(state, device, RegionFilter::Only(Region::Postsynapse))?))
}

/// Cells farther than this from every skyrmion (beyond its equivalent
/// radius) count as background when charges are split per skyrmion, m.
pub const DEFAULT_CHARGE_MARGIN: f64 = 20e-9;

/// Charge carried by each component, finite-difference and solid-angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkyrmionCharge {
    pub finite_difference: f64,
    pub solid_angle: f64,
}

/// Splits the charge density among components: every cell (or plaquette,
/// for the solid-angle variant) goes to the nearest component centroid,
/// provided it lies within the component's equivalent radius plus
/// `margin`. Everything else, including the corner charge of the edge
/// twist, is background.
pub fn skyrmion_charges(
    state: &MagnetizationState,
    device: &DeviceModel,
    comps: &[Component],
    margin: f64,
) -> Vec<SkyrmionCharge> {
    let mut out = vec![SkyrmionCharge { finite_difference: 0.0, solid_angle: 0.0 }; comps.len()];
    if comps.is_empty() {
        return out;
    }
    let reach: Vec<f64> =
        comps.iter().map(|c| crate::math::sqrt(c.area as f64 * device.dx * device.dy / PI) + margin).collect();
    let owner = |x: f64, y: f64| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in comps.iter().enumerate() {
            let d = libm::hypot(x - c.centroid.0, y - c.centroid.1);
            if d <= reach[k] && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        best.map(|(k, _)| k)
    };
    let m = &state.m;
    let nx = device.nx;
    for i in 0..device.cells() {
        let (x, y) = device.cell_center(i);
        if let Some(k) = owner(x, y) {
            out[k].finite_difference += charge_density(m, device, i);
        }
    }
    for iy in 0..device.ny.saturating_sub(1) {
        for ix in 0..nx.saturating_sub(1) {
            let i = ix + nx * iy;
            let (x, y) = device.cell_center(i);
            if let Some(k) = owner(x + 0.5 * device.dx, y + 0.5 * device.dy) {
                let (a, b, c, d) = (m.get(i), m.get(i + 1), m.get(i + 1 + nx), m.get(i + nx));
                out[k].solid_angle += solid_angle(a, b, c) + solid_angle(a, c, d);
            }
        }
    }
    for q in &mut out {
        q.finite_difference /= 4.0 * PI;
        q.solid_angle /= 4.0 * PI;
    }
    out
}

/// All observables of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SkyrmionReport {
    /// s
    pub time: f64,
    pub q_total: f64,
    pub q_pre: f64,
    pub q_post: f64,
    pub n_pre: usize,
    pub n_post: usize,
    /// Components whose core sits on the barrier.
    pub n_barrier: usize,
    pub mz_pre: f64,
    pub mz_post: f64,
    pub weight: f64,
}

impl SkyrmionReport {
    pub fn measure(state: &MagnetizationState, device: &DeviceModel) -> Result<Self> {
        let comps = skyrmion_components(state, device, DEFAULT_MZ_THRESHOLD);
        Self::from_components(state, device, &comps)
    }

    pub fn from_components(state: &MagnetizationState, device: &DeviceModel, comps: &[Component]) -> Result<Self> {
        let q = charge_by_region(state, device);
        let count = |r: Region| comps.iter().filter(|c| c.region == r).count();
        let mz_pre = region_average_mz(state, device, RegionFilter::Only(Region::Presynapse))?;
        let mz_post = region_average_mz(state, device, RegionFilter::Only(Region::Postsynapse))?;
        Ok(Self {
            time: state.time,
            q_total: q.total,
            q_pre: q.presynapse,
            q_post: q.postsynapse,
            n_pre: count(Region::Presynapse),
            n_post: count(Region::Postsynapse),
            n_barrier: count(Region::Barrier),
            mz_pre,
            mz_post,
            weight: weight_from_mz(mz_post),
        })
    }
}
