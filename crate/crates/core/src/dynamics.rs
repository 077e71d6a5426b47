//! Landau–Lifshitz–Gilbert dynamics with a Slonczewski-like spin-transfer
//! torque, explicit integrators and energy relaxation.
//!
//! The Gilbert form
//!
//! ```text
//! dm/dt = −γ·m × H + α·m × dm/dt + τ·m × (m_p × m),   τ = u/t
//! ```
//!
//! is solved for `dm/dt`, which gives the explicit Landau–Lifshitz form used
//! by every integrator here:
//!
//! ```text
//! (1 + α²)·dm/dt = −γ·m × H − αγ·m × (m × H) + τ·[T + α·m × T],  T = m × (m_p × m)
//! ```
//!
//! Reductions over cells are plain sequential sums in cell-index order, so
//! fixed-step runs are bit-reproducible.

use alloc::vec::Vec;

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::field::FieldKernel;
use crate::material::{MaterialParams, ELEMENTARY_CHARGE, HBAR, MU0};
use crate::state::{normalize_field, MagnetizationState, VectorField, NORM_TOLERANCE};
use crate::vec3::Vec3;

/// Spin-torque prefactor `u = γ·ħ·j·P/(2·e·μ0·Ms)`, m/s.
///
/// `γ` here already contains μ0 (units m/(A·s)), so the `1/μ0` is what turns
/// `u` into a velocity; `u/t` is then a rate.
pub fn stt_coefficient(current_density: f64, params: &MaterialParams) -> f64 {
    params.gamma * HBAR * current_density * params.polarization / (2.0 * ELEMENTARY_CHARGE * MU0 * params.ms)
}

/// Polarization of the injected spin current for positive (A → B) charge
/// current. With this choice a positive current pushes Néel skyrmions of the
/// default chirality toward +x, i.e. into the postsynapse.
pub const DEFAULT_SPIN_POLARIZATION: Vec3 = Vec3::new(0.0, -1.0, 0.0);

/// Piecewise-constant drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    /// Charge current density, A/m². Positive flows from terminal A to B.
    pub current_density: f64,
    /// Unit polarization of the spin current for positive `current_density`.
    pub polarization_dir: Vec3,
}

impl DriveState {
    pub const OFF: DriveState = DriveState { current_density: 0.0, polarization_dir: DEFAULT_SPIN_POLARIZATION };

    pub fn current(current_density: f64) -> Self {
        Self { current_density, polarization_dir: DEFAULT_SPIN_POLARIZATION }
    }

    pub fn is_off(&self) -> bool {
        self.current_density == 0.0
    }

    /// `u` for this drive, m/s.
    pub fn u(&self, params: &MaterialParams) -> f64 {
        stt_coefficient(self.current_density, params)
    }

    /// Torque rate `u/t`, 1/s.
    pub fn torque_rate(&self, params: &MaterialParams) -> f64 {
        self.u(params) / params.thickness
    }
}

/// Coefficients of the explicit right-hand side, precomputed per drive.
#[derive(Debug, Clone, Copy)]
struct RhsCoeffs {
    /// `γ·Ms/(1+α²)`: multiplies reduced fields.
    prec: f64,
    /// `α·γ·Ms/(1+α²)`.
    damp: f64,
    /// `τ/(1+α²)` along `m_p`.
    stt: f64,
    stt_alpha: f64,
    mp: Vec3,
}

impl RhsCoeffs {
    fn new(params: &MaterialParams, drive: &DriveState, precession: bool) -> Self {
        let a = params.alpha;
        let norm = 1.0 / (1.0 + a * a);
        let w = params.frequency_scale() * norm;
        let tau = drive.torque_rate(params) * norm;
        Self {
            prec: if precession { w } else { 0.0 },
            damp: a * w,
            stt: tau,
            stt_alpha: a * tau,
            mp: drive.polarization_dir,
        }
    }

    #[inline(always)]
    fn eval(&self, m: Vec3, h: Vec3) -> Vec3 {
        let mxh = m.cross(h);
        let mxmxh = m.cross(mxh);
        let mut r = mxh * (-self.prec) - mxmxh * self.damp;
        if self.stt != 0.0 {
            let t = self.mp - m * m.dot(self.mp);
            r += t * self.stt + m.cross(t) * self.stt_alpha;
        }
        r
    }
}

/// Explicit `dm/dt` (1/s) for a given reduced field.
pub fn llg_rhs(
    state: &MagnetizationState,
    h_eff: &VectorField,
    drive: &DriveState,
    params: &MaterialParams,
) -> Result<VectorField> {
    state.check_normalized()?;
    if !state.m.same_grid(h_eff) {
        return Err(Error::GridMismatch { expected: state.m.len(), actual: h_eff.len() });
    }
    let c = RhsCoeffs::new(params, drive, true);
    let mut out = VectorField::zeros(state.m.nx, state.m.ny);
    for i in 0..state.m.len() {
        out.set(i, c.eval(state.m.get(i), h_eff.get(i)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Rk4,
    /// Dormand–Prince 5(4) with error control on the max per-cell change.
    Rk45 {
        tolerance: f64,
        dt_min: f64,
        dt_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Fixed step for RK4, initial step for RK45, s.
    pub dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { scheme: Scheme::Rk4, dt: 2e-14 }
    }
}

/// How [`Integrator::relax`] reaches equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxMethod {
    /// Full damped LLG with the configured integrator.
    Dynamic,
    /// Overdamped flow without precession, stepped with Barzilai–Borwein
    /// step lengths and energy checkpoints.
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxConfig {
    /// Target maximum reduced torque `|m × h|`.
    pub tolerance: f64,
    pub max_steps: usize,
    pub method: RelaxMethod,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self { tolerance: 1e-4, max_steps: 200_000, method: RelaxMethod::Minimize }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxOutcome {
    Converged { steps: usize, torque: f64 },
    MaxStepsReached { steps: usize, torque: f64 },
}

impl RelaxOutcome {
    pub fn converged(&self) -> bool {
        matches!(self, RelaxOutcome::Converged { .. })
    }

    pub fn torque(&self) -> f64 {
        match *self {
            RelaxOutcome::Converged { torque, .. } | RelaxOutcome::MaxStepsReached { torque, .. } => torque,
        }
    }
}

/// One segment of a drive schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub drive: DriveState,
    /// s
    pub duration: f64,
}

/// What an observer sees at each sample.
pub struct Sample<'a> {
    pub state: &'a MagnetizationState,
    pub drive: &'a DriveState,
    /// Index into the schedule, `None` for the initial sample.
    pub segment: Option<usize>,
}

/// Callback invoked by [`Integrator::run`].
pub trait Observer {
    fn observe(&mut self, sample: &Sample<'_>) -> Result<()>;
}

impl<F: FnMut(&Sample<'_>) -> Result<()>> Observer for F {
    fn observe(&mut self, sample: &Sample<'_>) -> Result<()> {
        self(sample)
    }
}

const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Owns the field kernel and scratch buffers for one simulation.
#[derive(Debug, Clone)]
pub struct Integrator {
    kernel: FieldKernel,
    params: MaterialParams,
    config: IntegratorConfig,
    h: VectorField,
    acc: VectorField,
    stage: VectorField,
    k: Vec<VectorField>,
    /// Current adaptive step, s.
    dt_adaptive: f64,
    steps_taken: u64,
}

impl Integrator {
    pub fn new(device: &DeviceModel, params: &MaterialParams, config: IntegratorConfig) -> Result<Self> {
        Self::with_kernel(FieldKernel::new(device, params), device, params, config)
    }

    pub fn with_kernel(
        kernel: FieldKernel,
        device: &DeviceModel,
        params: &MaterialParams,
        config: IntegratorConfig,
    ) -> Result<Self> {
        params.validate()?;
        if !(config.dt.is_finite() && config.dt > 0.0) {
            return Err(Error::Integrator("dt must be positive"));
        }
        let (nx, ny) = (device.nx, device.ny);
        let n_k = match config.scheme {
            Scheme::Rk4 => 0,
            Scheme::Rk45 { tolerance, dt_min, dt_max } => {
                if !(tolerance > 0.0 && dt_min > 0.0 && dt_max >= dt_min) {
                    return Err(Error::Integrator("invalid adaptive tolerances"));
                }
                7
            }
        };
        let it = Self {
            kernel,
            params: *params,
            config,
            h: VectorField::zeros(nx, ny),
            acc: VectorField::zeros(nx, ny),
            stage: VectorField::zeros(nx, ny),
            k: (0..n_k).map(|_| VectorField::zeros(nx, ny)).collect(),
            dt_adaptive: config.dt,
            steps_taken: 0,
        };
        if let Scheme::Rk4 = config.scheme {
            let bound = it.stability_bound();
            if config.dt > bound {
                return Err(Error::UnstableStep { dt: config.dt, bound });
            }
        }
        Ok(it)
    }

    pub fn kernel(&self) -> &FieldKernel {
        &self.kernel
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    /// Largest stable RK4 step for the stiffest linear mode, s.
    pub fn stability_bound(&self) -> f64 {
        let a = self.params.alpha;
        let omega = self.params.frequency_scale() * self.kernel.stiffness_bound() / crate::math::sqrt(1.0 + a * a);
        2.5 / omega
    }

    /// Reduced effective field of `m` (scratch copy).
    pub fn field(&mut self, m: &VectorField) -> &VectorField {
        self.kernel.reduced_field(m, &mut self.h);
        &self.h
    }

    /// Maximum reduced torque `|m × h|` of the state.
    pub fn max_torque(&mut self, m: &VectorField) -> f64 {
        self.kernel.reduced_field(m, &mut self.h);
        self.kernel.max_torque(m, &self.h)
    }

    /// Advances by one step of at most `dt_limit`; returns the step taken, s.
    pub fn step(&mut self, state: &mut MagnetizationState, drive: &DriveState, dt_limit: f64) -> Result<f64> {
        let c = RhsCoeffs::new(&self.params, drive, true);
        let dt = match self.config.scheme {
            Scheme::Rk4 => {
                let dt = self.config.dt.min(dt_limit);
                self.rk4(&mut state.m, &c, dt);
                dt
            }
            Scheme::Rk45 { tolerance, dt_min, dt_max } => {
                self.rk45(&mut state.m, &c, dt_limit, tolerance, dt_min, dt_max)?
            }
        };
        normalize_field(&mut state.m);
        state.time += dt;
        self.steps_taken += 1;
        Ok(dt)
    }

    fn rk4(&mut self, m: &mut VectorField, c: &RhsCoeffs, dt: f64) {
        if c.stt != 0.0 {
            self.rk4_with::<true>(m, c, dt)
        } else {
            self.rk4_with::<false>(m, c, dt)
        }
    }

    fn rk4_with<const STT: bool>(&mut self, m: &mut VectorField, c: &RhsCoeffs, dt: f64) {
        // Each stage evaluates the field at the current stage state, folds
        // k_s into `acc` and overwrites `stage` with the next stage state.
        self.kernel.reduced_field(m, &mut self.h);
        rk4_first::<STT>(c, m, &self.h, &mut self.acc, &mut self.stage, 0.5 * dt);
        for a in [0.5 * dt, dt] {
            self.kernel.reduced_field(&self.stage, &mut self.h);
            rk4_middle::<STT>(c, m, &self.h, &mut self.acc, &mut self.stage, a);
        }
        self.kernel.reduced_field(&self.stage, &mut self.h);
        rk4_last::<STT>(c, m, &self.h, &self.acc, &self.stage, dt / 6.0);
    }

    fn rk45(
        &mut self,
        m: &mut VectorField,
        c: &RhsCoeffs,
        dt_limit: f64,
        tolerance: f64,
        dt_min: f64,
        dt_max: f64,
    ) -> Result<f64> {
        let n = m.len();
        loop {
            let dt = self.dt_adaptive.min(dt_max).min(dt_limit);
            #[allow(clippy::needless_range_loop)] // s also selects the tableau row
            for s in 0..7 {
                if s == 0 {
                    self.stage.copy_from(m);
                } else {
                    for i in 0..n {
                        let mut v = m.get(i);
                        for (j, a) in DP_A[s].iter().enumerate().take(s) {
                            if *a != 0.0 {
                                v += self.k[j].get(i) * (a * dt);
                            }
                        }
                        self.stage.set(i, v);
                    }
                }
                self.kernel.reduced_field(&self.stage, &mut self.h);
                for i in 0..n {
                    let k = c.eval(self.stage.get(i), self.h.get(i));
                    self.k[s].set(i, k);
                }
            }
            // the 7th stage was evaluated at the 5th-order solution
            let mut err = 0.0_f64;
            for i in 0..n {
                let mut e = Vec3::ZERO;
                for s in 0..7 {
                    let w = DP_B5[s] - DP_B4[s];
                    if w != 0.0 {
                        e += self.k[s].get(i) * w;
                    }
                }
                err = err.max(e.norm() * dt);
            }
            let factor = if err > 0.0 { 0.9 * libm::pow(tolerance / err, 0.2) } else { 5.0 };
            if err <= tolerance || dt <= dt_min {
                if err > tolerance {
                    return Err(Error::StepUnderflow { dt_min });
                }
                m.copy_from(&self.stage);
                // only grow the step if it was not clipped by the caller
                if dt >= self.dt_adaptive.min(dt_max) {
                    self.dt_adaptive = (dt * factor.clamp(0.2, 5.0)).clamp(dt_min, dt_max);
                }
                return Ok(dt);
            }
            self.dt_adaptive = (dt * factor.clamp(0.1, 1.0)).max(dt_min);
        }
    }

    /// Integrates `drive` for `duration` seconds.
    pub fn advance(&mut self, state: &mut MagnetizationState, drive: &DriveState, duration: f64) -> Result<()> {
        let end = state.time + duration;
        // relative guard against a trailing sliver step from rounding
        let eps = 1e-9 * self.config.dt;
        while end - state.time > eps {
            self.step(state, drive, end - state.time)?;
        }
        state.time = end;
        Ok(())
    }

    /// Runs a piecewise-constant schedule, sampling every `sample_every`
    /// seconds (plus at the start and at every segment end).
    pub fn run(
        &mut self,
        state: &mut MagnetizationState,
        schedule: &[Segment],
        sample_every: f64,
        observer: &mut dyn Observer,
    ) -> Result<()> {
        state.check_normalized()?;
        if schedule.iter().any(|s| !(s.duration > 0.0)) {
            return Err(Error::Integrator("segment durations must be positive"));
        }
        if !(sample_every > 0.0) {
            return Err(Error::Integrator("sample interval must be positive"));
        }
        if let Scheme::Rk4 = self.config.scheme {
            let bound = self.stability_bound();
            if self.config.dt > bound {
                return Err(Error::UnstableStep { dt: self.config.dt, bound });
            }
        }
        observer.observe(&Sample { state, drive: &DriveState::OFF, segment: None })?;
        for (si, seg) in schedule.iter().enumerate() {
            let start = state.time;
            let n_samples = libm::ceil(seg.duration / sample_every - 1e-9).max(1.0) as usize;
            for k in 1..=n_samples {
                let t = if k == n_samples { start + seg.duration } else { start + k as f64 * sample_every };
                let remaining = t - state.time;
                self.advance(state, &seg.drive, remaining)?;
                state.time = t;
                observer.observe(&Sample { state, drive: &seg.drive, segment: Some(si) })?;
            }
        }
        Ok(())
    }

    /// Drives the state to a torque-free configuration with zero current.
    pub fn relax(&mut self, state: &mut MagnetizationState, config: &RelaxConfig) -> Result<RelaxOutcome> {
        state.check_normalized()?;
        match config.method {
            RelaxMethod::Dynamic => self.relax_dynamic(state, config),
            RelaxMethod::Minimize => Ok(self.minimize(state, config)),
        }
    }

    fn relax_dynamic(&mut self, state: &mut MagnetizationState, config: &RelaxConfig) -> Result<RelaxOutcome> {
        const CHECK_EVERY: usize = 20;
        let mut steps = 0;
        loop {
            let torque = self.max_torque(&state.m);
            if torque < config.tolerance {
                return Ok(RelaxOutcome::Converged { steps, torque });
            }
            if steps >= config.max_steps {
                return Ok(RelaxOutcome::MaxStepsReached { steps, torque });
            }
            for _ in 0..CHECK_EVERY.min(config.max_steps - steps) {
                self.step(state, &DriveState::OFF, f64::INFINITY)?;
                steps += 1;
            }
        }
    }

    /// Projected steepest descent `m ← normalize(m + λ·h_⊥)` with alternating
    /// Barzilai–Borwein step lengths. Every `CHECKPOINT` iterations the
    /// energy is compared with the previous checkpoint; a rise rolls back to
    /// the checkpoint and falls back to the conservative step `1/L` until the
    /// next one.
    fn minimize(&mut self, state: &mut MagnetizationState, config: &RelaxConfig) -> RelaxOutcome {
        const CHECKPOINT: usize = 50;
        let n = state.m.len();
        let lipschitz = self.kernel.stiffness_bound();
        let safe = 1.0 / lipschitz;
        let max_step = 1e3 * safe;

        // acc: previous m, stage: previous gradient g = −h_⊥
        let mut checkpoint = state.m.clone();
        let mut checkpoint_energy = self.kernel.energy(&state.m).total;
        let mut lambda = safe;
        let mut have_prev = false;
        let mut safe_mode = false;
        let mut steps = 0;
        let mut torque;
        loop {
            self.kernel.reduced_field(&state.m, &mut self.h);
            // gradient and torque
            let mut t2 = 0.0_f64;
            let (mut ss, mut sy, mut yy) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let m = state.m.get(i);
                let h = self.h.get(i);
                let g = m * m.dot(h) - h;
                let t = m.cross(h);
                t2 = t2.max(t.dot(t));
                if have_prev {
                    let s = m - self.acc.get(i);
                    let y = g - self.stage.get(i);
                    ss += s.dot(s);
                    sy += s.dot(y);
                    yy += y.dot(y);
                }
                self.stage.set(i, g);
            }
            torque = crate::math::sqrt(t2);
            if torque < config.tolerance {
                return RelaxOutcome::Converged { steps, torque };
            }
            if steps >= config.max_steps {
                return RelaxOutcome::MaxStepsReached { steps, torque };
            }
            if steps > 0 && steps % CHECKPOINT == 0 {
                let e = self.kernel.energy(&state.m).total;
                if e > checkpoint_energy {
                    state.m.copy_from(&checkpoint);
                    have_prev = false;
                    safe_mode = true;
                    lambda = safe;
                    steps += 1;
                    continue;
                }
                checkpoint.copy_from(&state.m);
                checkpoint_energy = e;
                safe_mode = false;
            }
            if have_prev && !safe_mode && sy > 0.0 {
                lambda = if steps % 2 == 0 { ss / sy } else { sy / yy };
                lambda = lambda.clamp(safe, max_step);
            } else if safe_mode || !have_prev {
                lambda = safe;
            }
            for i in 0..n {
                let m = state.m.get(i);
                self.acc.set(i, m);
                let next = m - self.stage.get(i) * lambda;
                state.m.set(i, next.normalized());
            }
            have_prev = true;
            steps += 1;
        }
    }
}

#[inline(always)]
fn rhs_at<const STT: bool>(c: &RhsCoeffs, m: [f64; 3], h: [f64; 3]) -> [f64; 3] {
    let [mx, my, mz] = m;
    let [hx, hy, hz] = h;
    // m × h
    let px = my * hz - mz * hy;
    let py = mz * hx - mx * hz;
    let pz = mx * hy - my * hx;
    // m × (m × h)
    let qx = my * pz - mz * py;
    let qy = mz * px - mx * pz;
    let qz = mx * py - my * px;
    let mut r = [-c.prec * px - c.damp * qx, -c.prec * py - c.damp * qy, -c.prec * pz - c.damp * qz];
    if STT {
        let d = mx * c.mp.x + my * c.mp.y + mz * c.mp.z;
        let tx = c.mp.x - d * mx;
        let ty = c.mp.y - d * my;
        let tz = c.mp.z - d * mz;
        r[0] += c.stt * tx + c.stt_alpha * (my * tz - mz * ty);
        r[1] += c.stt * ty + c.stt_alpha * (mz * tx - mx * tz);
        r[2] += c.stt * tz + c.stt_alpha * (mx * ty - my * tx);
    }
    r
}

fn rk4_first<const STT: bool>(
    c: &RhsCoeffs,
    m: &VectorField,
    h: &VectorField,
    acc: &mut VectorField,
    stage: &mut VectorField,
    a: f64,
) {
    let n = m.len();
    let (mx, my, mz) = (&m.x[..n], &m.y[..n], &m.z[..n]);
    let (hx, hy, hz) = (&h.x[..n], &h.y[..n], &h.z[..n]);
    let (ax, ay, az) = (&mut acc.x[..n], &mut acc.y[..n], &mut acc.z[..n]);
    let (sx, sy, sz) = (&mut stage.x[..n], &mut stage.y[..n], &mut stage.z[..n]);
    for i in 0..n {
        let k = rhs_at::<STT>(c, [mx[i], my[i], mz[i]], [hx[i], hy[i], hz[i]]);
        ax[i] = k[0];
        ay[i] = k[1];
        az[i] = k[2];
        sx[i] = mx[i] + a * k[0];
        sy[i] = my[i] + a * k[1];
        sz[i] = mz[i] + a * k[2];
    }
}

fn rk4_middle<const STT: bool>(
    c: &RhsCoeffs,
    m: &VectorField,
    h: &VectorField,
    acc: &mut VectorField,
    stage: &mut VectorField,
    a: f64,
) {
    let n = m.len();
    let (mx, my, mz) = (&m.x[..n], &m.y[..n], &m.z[..n]);
    let (hx, hy, hz) = (&h.x[..n], &h.y[..n], &h.z[..n]);
    let (ax, ay, az) = (&mut acc.x[..n], &mut acc.y[..n], &mut acc.z[..n]);
    let (sx, sy, sz) = (&mut stage.x[..n], &mut stage.y[..n], &mut stage.z[..n]);
    for i in 0..n {
        let k = rhs_at::<STT>(c, [sx[i], sy[i], sz[i]], [hx[i], hy[i], hz[i]]);
        ax[i] += 2.0 * k[0];
        ay[i] += 2.0 * k[1];
        az[i] += 2.0 * k[2];
        sx[i] = mx[i] + a * k[0];
        sy[i] = my[i] + a * k[1];
        sz[i] = mz[i] + a * k[2];
    }
}

fn rk4_last<const STT: bool>(
    c: &RhsCoeffs,
    m: &mut VectorField,
    h: &VectorField,
    acc: &VectorField,
    stage: &VectorField,
    a: f64,
) {
    let n = m.len();
    let (mx, my, mz) = (&mut m.x[..n], &mut m.y[..n], &mut m.z[..n]);
    let (hx, hy, hz) = (&h.x[..n], &h.y[..n], &h.z[..n]);
    let (ax, ay, az) = (&acc.x[..n], &acc.y[..n], &acc.z[..n]);
    let (sx, sy, sz) = (&stage.x[..n], &stage.y[..n], &stage.z[..n]);
    for i in 0..n {
        let k = rhs_at::<STT>(c, [sx[i], sy[i], sz[i]], [hx[i], hy[i], hz[i]]);
        mx[i] += a * (ax[i] + k[0]);
        my[i] += a * (ay[i] + k[1]);
        mz[i] += a * (az[i] + k[2]);
    }
}

/// Checks that every cell of `m` is a unit vector within the public tolerance.
pub fn is_normalized(m: &VectorField) -> bool {
    (0..m.len()).all(|i| libm::fabs(m.get(i).norm() - 1.0) <= NORM_TOLERANCE)
}
