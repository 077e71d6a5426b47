//! Effective field and energy of the film.
//!
//! The energy is discretized on nearest-neighbor bonds of the cell grid:
//!
//! * exchange: `A·t·Σ (area/length)·|m_j − m_i|²`
//! * interfacial DMI: `D·t·Σ width·d_ij·(m_i × m_j)` with `d_ij = ẑ × r̂_ij`
//! * anisotropy: `Σ K_eff·(1 − m_z²)·V` (zero for the fully perpendicular state)
//! * Zeeman (test hook): `−μ0·Ms·V·Σ m·H_app`
//!
//! Every field term is the exact gradient `H = −∂E/∂m / (μ0·Ms·V)` of its
//! energy. Bonds that would leave the track are simply absent. For exchange
//! this is the Neumann condition; for DMI the missing bond leaves a canting
//! field of magnitude `D/(μ0·Ms·Δ)` at the edge. Together they are the
//! discrete natural boundary condition of this energy,
//! `2A·∂m/∂n = −D·(ẑ × n̂) × m`.
//!
//! Within the kernels, fields are *reduced* (`h = H/Ms`), and all coefficients
//! are pre-divided by `μ0·Ms²`.

use alloc::vec::Vec;

use crate::device::DeviceModel;
use crate::material::{MaterialParams, MU0};
use crate::state::{MagnetizationState, VectorField};
use crate::vec3::Vec3;

/// Which energy terms a kernel evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub exchange: bool,
    pub dmi: bool,
    pub anisotropy: bool,
    pub zeeman: bool,
}

impl Terms {
    pub const ALL: Terms = Terms { exchange: true, dmi: true, anisotropy: true, zeeman: true };
    pub const EXCHANGE: Terms = Terms { exchange: true, dmi: false, anisotropy: false, zeeman: false };
    pub const DMI: Terms = Terms { exchange: false, dmi: true, anisotropy: false, zeeman: false };
    pub const ANISOTROPY: Terms = Terms { exchange: false, dmi: false, anisotropy: true, zeeman: false };
    pub const ZEEMAN: Terms = Terms { exchange: false, dmi: false, anisotropy: false, zeeman: true };
}

/// Energy per term, J.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub exchange: f64,
    pub dmi: f64,
    pub anisotropy: f64,
    pub zeeman: f64,
    pub total: f64,
}

/// Precomputed reduced coefficients for one (device, material) pair.
#[derive(Debug, Clone)]
pub struct FieldKernel {
    nx: usize,
    ny: usize,
    ex_x: f64,
    ex_y: f64,
    dmi_x: f64,
    dmi_y: f64,
    /// `2·K_eff/(μ0·Ms²)` per cell.
    aniso: Vec<f64>,
    /// Applied field / Ms.
    applied: Vec3,
    ms: f64,
    // energy prefactors
    exchange: f64,
    dmi: f64,
    thickness: f64,
    dx: f64,
    dy: f64,
    volume: f64,
    k_eff: Vec<f64>,
}

impl FieldKernel {
    pub fn new(device: &DeviceModel, params: &MaterialParams) -> Self {
        let scale = params.magnetostatic_density();
        let (dx, dy) = (device.dx, device.dy);
        let k_eff: Vec<f64> = device.ku_map.iter().map(|&k| params.effective_anisotropy(k)).collect();
        Self {
            nx: device.nx,
            ny: device.ny,
            ex_x: 2.0 * params.exchange / (scale * dx * dx),
            ex_y: 2.0 * params.exchange / (scale * dy * dy),
            dmi_x: params.dmi / (scale * dx),
            dmi_y: params.dmi / (scale * dy),
            aniso: k_eff.iter().map(|&k| 2.0 * k / scale).collect(),
            applied: Vec3::ZERO,
            ms: params.ms,
            exchange: params.exchange,
            dmi: params.dmi,
            thickness: device.dz,
            dx,
            dy,
            volume: device.cell_volume(),
            k_eff,
        }
    }

    /// Adds a uniform applied field (A/m).
    pub fn with_applied_field(mut self, h: Vec3) -> Self {
        self.applied = h * (1.0 / self.ms);
        self
    }

    pub fn applied_field(&self) -> Vec3 {
        self.applied * self.ms
    }

    /// Upper bound on the spectral radius of the linearized reduced field
    /// operator, used for explicit step-size limits.
    pub fn stiffness_bound(&self) -> f64 {
        let kmax = self.aniso.iter().fold(0.0_f64, |a, &k| a.max(libm::fabs(k)));
        4.0 * (self.ex_x + self.ex_y)
            + 2.0 * (libm::fabs(self.dmi_x) + libm::fabs(self.dmi_y))
            + kmax
            + self.applied.norm()
    }

    /// Reduced effective field of all terms, written into `h`.
    pub fn reduced_field(&self, m: &VectorField, h: &mut VectorField) {
        self.reduced_terms(m, h, Terms::ALL);
    }

    /// Reduced field of the selected terms, written into `h`.
    pub fn reduced_terms(&self, m: &VectorField, h: &mut VectorField, terms: Terms) {
        debug_assert!(m.same_grid(h) && m.nx == self.nx && m.ny == self.ny);
        let nx = self.nx;
        let (cxe, cye) = if terms.exchange { (self.ex_x, self.ex_y) } else { (0.0, 0.0) };
        let (cxd, cyd) = if terms.dmi { (self.dmi_x, self.dmi_y) } else { (0.0, 0.0) };
        let app = if terms.zeeman { self.applied } else { Vec3::ZERO };

        for iy in 0..self.ny {
            let row = iy * nx..(iy + 1) * nx;
            let (mx, my, mz) = (&m.x[row.clone()], &m.y[row.clone()], &m.z[row.clone()]);
            let k = &self.aniso[row.clone()];
            let hx = &mut h.x[row.clone()];
            let hy = &mut h.y[row.clone()];
            let hz = &mut h.z[row.clone()];

            // on-site terms
            if terms.anisotropy {
                for i in 0..nx {
                    hx[i] = app.x;
                    hy[i] = app.y;
                    hz[i] = app.z + k[i] * mz[i];
                }
            } else {
                hx.fill(app.x);
                hy.fill(app.y);
                hz.fill(app.z);
            }

            // bonds along x
            if nx > 1 {
                for i in 1..nx - 1 {
                    hx[i] += cxe * (mx[i - 1] + mx[i + 1] - 2.0 * mx[i]) + cxd * (mz[i + 1] - mz[i - 1]);
                    hy[i] += cxe * (my[i - 1] + my[i + 1] - 2.0 * my[i]);
                    hz[i] += cxe * (mz[i - 1] + mz[i + 1] - 2.0 * mz[i]) - cxd * (mx[i + 1] - mx[i - 1]);
                }
                let l = nx - 1;
                hx[0] += cxe * (mx[1] - mx[0]) + cxd * mz[1];
                hy[0] += cxe * (my[1] - my[0]);
                hz[0] += cxe * (mz[1] - mz[0]) - cxd * mx[1];
                hx[l] += cxe * (mx[l - 1] - mx[l]) - cxd * mz[l - 1];
                hy[l] += cxe * (my[l - 1] - my[l]);
                hz[l] += cxe * (mz[l - 1] - mz[l]) + cxd * mx[l - 1];
            }

            // bonds along y: the row below contributes −m_below to the
            // central difference, the row above +m_above.
            if iy > 0 {
                let b = (iy - 1) * nx..iy * nx;
                let (bx, by, bz) = (&m.x[b.clone()], &m.y[b.clone()], &m.z[b]);
                for i in 0..nx {
                    hx[i] += cye * (bx[i] - mx[i]);
                    hy[i] += cye * (by[i] - my[i]) - cyd * bz[i];
                    hz[i] += cye * (bz[i] - mz[i]) + cyd * by[i];
                }
            }
            if iy + 1 < self.ny {
                let a = (iy + 1) * nx..(iy + 2) * nx;
                let (ax, ay, az) = (&m.x[a.clone()], &m.y[a.clone()], &m.z[a]);
                for i in 0..nx {
                    hx[i] += cye * (ax[i] - mx[i]);
                    hy[i] += cye * (ay[i] - my[i]) + cyd * az[i];
                    hz[i] += cye * (az[i] - mz[i]) - cyd * ay[i];
                }
            }
        }
    }

    /// Energy of the selected terms, J.
    pub fn energy(&self, m: &VectorField) -> EnergyBreakdown {
        let nx = self.nx;
        let t = self.thickness;
        let mut e = EnergyBreakdown::default();
        let mut ex = 0.0;
        let mut dm = 0.0;
        for iy in 0..self.ny {
            for ix in 0..nx {
                let i = ix + nx * iy;
                let mi = m.get(i);
                if ix + 1 < nx {
                    let mj = m.get(i + 1);
                    let d = mj - mi;
                    ex += (self.dy / self.dx) * d.dot(d);
                    // d_ij = ŷ
                    dm += self.dy * mi.cross(mj).y;
                }
                if iy + 1 < self.ny {
                    let mj = m.get(i + nx);
                    let d = mj - mi;
                    ex += (self.dx / self.dy) * d.dot(d);
                    // d_ij = −x̂
                    dm -= self.dx * mi.cross(mj).x;
                }
            }
        }
        e.exchange = self.exchange * t * ex;
        e.dmi = self.dmi * t * dm;
        e.anisotropy = self.k_eff.iter().zip(&m.z).map(|(&k, &z)| k * (1.0 - z * z)).sum::<f64>() * self.volume;
        let app = self.applied_field();
        let mdoth: f64 = (0..m.len()).map(|i| m.get(i).dot(app)).sum();
        e.zeeman = -MU0 * self.ms * self.volume * mdoth;
        e.total = e.exchange + e.dmi + e.anisotropy + e.zeeman;
        e
    }

    /// Maximum per-cell reduced torque `|m × h|`.
    pub fn max_torque(&self, m: &VectorField, h: &VectorField) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..m.len() {
            let t = m.get(i).cross(h.get(i));
            worst = worst.max(t.dot(t));
        }
        crate::math::sqrt(worst)
    }
}

fn field_in_amps(
    state: &MagnetizationState,
    device: &DeviceModel,
    params: &MaterialParams,
    terms: Terms,
) -> VectorField {
    let kernel = FieldKernel::new(device, params);
    let mut h = VectorField::zeros(device.nx, device.ny);
    kernel.reduced_terms(&state.m, &mut h, terms);
    for c in [&mut h.x, &mut h.y, &mut h.z] {
        c.iter_mut().for_each(|v| *v *= params.ms);
    }
    h
}

/// Exchange field, A/m.
pub fn exchange_field(state: &MagnetizationState, device: &DeviceModel, params: &MaterialParams) -> VectorField {
    field_in_amps(state, device, params, Terms::EXCHANGE)
}

/// Interfacial DMI field, A/m.
pub fn dmi_field(state: &MagnetizationState, device: &DeviceModel, params: &MaterialParams) -> VectorField {
    field_in_amps(state, device, params, Terms::DMI)
}

/// Uniaxial (plus effective demag) anisotropy field, A/m.
pub fn anisotropy_field(state: &MagnetizationState, device: &DeviceModel, params: &MaterialParams) -> VectorField {
    field_in_amps(state, device, params, Terms::ANISOTROPY)
}

/// Total reduced effective field `h = H_eff/Ms`.
pub fn effective_field_total(state: &MagnetizationState, device: &DeviceModel, params: &MaterialParams) -> VectorField {
    let kernel = FieldKernel::new(device, params);
    let mut h = VectorField::zeros(device.nx, device.ny);
    kernel.reduced_field(&state.m, &mut h);
    h
}

pub fn total_energy(state: &MagnetizationState, device: &DeviceModel, params: &MaterialParams) -> EnergyBreakdown {
    FieldKernel::new(device, params).energy(&state.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{BarrierSpec, DeviceConfig};
    use crate::material::DemagMode;

    fn small(params: &MaterialParams) -> DeviceModel {
        let cfg = DeviceConfig {
            length: 40e-9,
            width: 30e-9,
            barrier: BarrierSpec { length: 0.0, width: 0.0, corner_radius: 0.0, ..Default::default() },
            ..Default::default()
        };
        DeviceModel::build(&cfg, params).unwrap()
    }

    #[test]
    fn uniform_state_has_no_exchange_or_interior_dmi() {
        let p = MaterialParams::default();
        let d = small(&p);
        let s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        let hex = exchange_field(&s, &d, &p);
        assert_eq!(hex.max_norm(), 0.0);
        let hd = dmi_field(&s, &d, &p);
        for iy in 1..d.ny - 1 {
            for ix in 1..d.nx - 1 {
                assert_eq!(hd.get(d.index(ix, iy)), Vec3::ZERO);
            }
        }
        assert_eq!(total_energy(&s, &d, &p).exchange, 0.0);
    }

    #[test]
    fn flipped_cell_exchange_field() {
        let p = MaterialParams::default();
        let d = small(&p);
        let mut s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        let c = d.index(10, 7);
        s.m.set(c, -Vec3::Z);
        let h = exchange_field(&s, &d, &p);
        let dx = 2e-9;
        let want = 2.0 * p.exchange / (MU0 * p.ms) * 4.0 * 2.0 / (dx * dx);
        let got = h.get(c);
        assert!((got.z - want).abs() < 1e-12 * want, "{} vs {}", got.z, want);
        assert_eq!((got.x, got.y), (0.0, 0.0));
    }

    // Ghost-cell construction for the left edge (n̂ = −x̂) of a uniform +z
    // state: the natural boundary condition 2A·∂m/∂n = −D·(ẑ×n̂)×m gives
    // m_ghost − m = −Δx·(D/2A)·(ẑ×n̂)×m, so the exchange stencil sees
    // (2A/(μ0·Ms·Δx²))·(m_ghost − m) = (D/(μ0·Ms·Δx))·x̂.
    #[test]
    fn edge_canting_field_from_dmi_boundary() {
        let p = MaterialParams::default();
        let d = small(&p);
        let s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        let h = dmi_field(&s, &d, &p);
        let n_left = -Vec3::X;
        let ghost_delta = -(Vec3::Z.cross(n_left).cross(Vec3::Z)) * (d.dx * p.dmi / (2.0 * p.exchange));
        let want = ghost_delta * (2.0 * p.exchange / (MU0 * p.ms * d.dx * d.dx));
        let got = h.get(d.index(0, 7));
        assert!((got - want).norm() < 1e-9 * want.norm(), "{got:?} vs {want:?}");
        assert!((want.norm() - p.dmi / (MU0 * p.ms * d.dx)).abs() < 1e-6 * want.norm());
        let right = h.get(d.index(d.nx - 1, 7));
        assert!((right + want).norm() < 1e-9 * want.norm());
        // bottom edge: n̂ = −ŷ, canting along +ŷ
        let bottom = h.get(d.index(7, 0));
        assert!(bottom.y > 0.0 && bottom.x.abs() < 1e-9 * bottom.y);
    }

    #[test]
    fn anisotropy_field_values() {
        let p = MaterialParams { demag_mode: DemagMode::None, ..Default::default() };
        let d = DeviceModel::build(&DeviceConfig::default(), &p).unwrap();
        let s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        let h = anisotropy_field(&s, &d, &p);
        let film = h.get(0).z;
        assert!((film - 1.921e6).abs() < 0.001e6, "{film}");
        let barrier_cell = d.region_mask.iter().position(|r| *r == crate::device::Region::Barrier).unwrap();
        let ratio = h.get(barrier_cell).z / film;
        assert!((ratio - 1.2).abs() < 1e-12);

        let inplane = MagnetizationState::uniform(&d, Vec3::X).unwrap();
        assert_eq!(anisotropy_field(&inplane, &d, &p).max_norm(), 0.0);
    }

    #[test]
    fn uniform_interior_total_field_is_anisotropy_only() {
        let p = MaterialParams::default();
        let d = small(&p);
        let s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        let h = effective_field_total(&s, &d, &p);
        let want = 2.0 * p.effective_anisotropy(p.ku_film) / p.magnetostatic_density();
        let got = h.get(d.index(5, 5));
        assert!((got.z - want).abs() < 1e-14 && got.x == 0.0 && got.y == 0.0);
    }

    #[test]
    fn energy_parts_sum_to_total() {
        let p = MaterialParams::default();
        let d = small(&p);
        let mut s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        s.seed_skyrmion(&d, &p, (20e-9, 15e-9), 6e-9, crate::state::CorePolarity::Down).unwrap();
        let e = total_energy(&s, &d, &p);
        let sum = e.exchange + e.dmi + e.anisotropy + e.zeeman;
        assert!((e.total - sum).abs() <= 1e-12 * e.total.abs().max(1e-30));
        assert!(e.dmi < 0.0, "favored chirality must lower the DMI energy");
    }
}
