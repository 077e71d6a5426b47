//! Run configuration: a TOML document whose physical quantities carry
//! explicit units. Every key is optional and defaults to the values in
//! `configs/default.toml`; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use skysyn_core::dynamics::{DriveState, IntegratorConfig, RelaxConfig, RelaxMethod, Scheme, Segment};
use skysyn_core::synapse::{CurrentSweepSpec, ProtocolConfig, PulseTrain, SeedingConfig};
use skysyn_core::{BarrierSpec, DemagMode, DeviceConfig, DeviceModel, MaterialParams};

use crate::units::{
    CurrentDensity, EnergyDensity, Gyromagnetic, Length, Magnetization, Quantity, Stiffness, SurfaceEnergy, Time,
};

/// The configuration shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
    #[error(transparent)]
    Constraint(#[from] skysyn_core::Error),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub material: MaterialSection,
    pub device: DeviceSection,
    pub integrator: IntegratorSection,
    pub relax: RelaxSection,
    pub initialization: InitSection,
    pub tracking: TrackingSection,
    pub output: OutputSection,
    pub protocol: ProtocolSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemagSetting {
    None,
    EffectiveAnisotropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSection {
    #[serde(rename = "Ms")]
    pub ms: Quantity<Magnetization>,
    pub gamma: Quantity<Gyromagnetic>,
    pub alpha: f64,
    #[serde(rename = "P")]
    pub polarization: f64,
    #[serde(rename = "A_ex")]
    pub exchange: Quantity<Stiffness>,
    #[serde(rename = "Ku_film")]
    pub ku_film: Quantity<EnergyDensity>,
    /// Absolute barrier anisotropy; exclusive with `Ku_barrier_ratio`.
    #[serde(rename = "Ku_barrier", skip_serializing_if = "Option::is_none")]
    pub ku_barrier: Option<Quantity<EnergyDensity>>,
    /// Barrier anisotropy as a multiple of `Ku_film` (1.2 when neither key
    /// is given).
    #[serde(rename = "Ku_barrier_ratio", skip_serializing_if = "Option::is_none")]
    pub ku_barrier_ratio: Option<f64>,
    #[serde(rename = "D_dmi")]
    pub dmi: Quantity<SurfaceEnergy>,
    pub t_fm: Quantity<Length>,
    pub demag_mode: DemagSetting,
}

impl Default for MaterialSection {
    fn default() -> Self {
        let p = MaterialParams::default();
        Self {
            ms: Quantity::si(p.ms),
            gamma: Quantity::si(p.gamma),
            alpha: p.alpha,
            polarization: p.polarization,
            exchange: Quantity::si(p.exchange),
            ku_film: Quantity::si(p.ku_film),
            ku_barrier: None,
            ku_barrier_ratio: None,
            dmi: Quantity::si(p.dmi),
            t_fm: Quantity::si(p.thickness),
            demag_mode: DemagSetting::EffectiveAnisotropy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    pub length: Quantity<Length>,
    pub width: Quantity<Length>,
    pub cell_x: Quantity<Length>,
    pub cell_y: Quantity<Length>,
    pub cell_z: Quantity<Length>,
    pub barrier: BarrierSection,
}

impl Default for DeviceSection {
    fn default() -> Self {
        let d = DeviceConfig::default();
        Self {
            length: Quantity::si(d.length),
            width: Quantity::si(d.width),
            cell_x: Quantity::si(d.cell_x),
            cell_y: Quantity::si(d.cell_y),
            cell_z: Quantity::si(d.cell_z),
            barrier: BarrierSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierSection {
    /// Extent along the track.
    pub length: Quantity<Length>,
    /// Extent across the track.
    pub width: Quantity<Length>,
    pub corner_radius: Quantity<Length>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_x: Option<Quantity<Length>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_y: Option<Quantity<Length>>,
}

impl Default for BarrierSection {
    fn default() -> Self {
        let b = BarrierSpec::default();
        Self {
            length: Quantity::si(b.length),
            width: Quantity::si(b.width),
            corner_radius: Quantity::si(b.corner_radius),
            center_x: None,
            center_y: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSetting {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub scheme: SchemeSetting,
    /// Fixed step (RK4) or initial step (RK45).
    pub dt: Quantity<Time>,
    /// RK45 only: allowed max per-cell change of m per step.
    pub tolerance: f64,
    pub dt_min: Quantity<Time>,
    pub dt_max: Quantity<Time>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            scheme: SchemeSetting::Rk4,
            // the library default is finer; 100 fs is accurate enough for
            // the protocols and five times cheaper
            dt: Quantity::si(1e-13),
            tolerance: 1e-5,
            dt_min: Quantity::si(1e-16),
            dt_max: Quantity::si(2e-13),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxSetting {
    Minimize,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxSection {
    /// Target max reduced torque |m × h|.
    pub tolerance: f64,
    pub max_steps: usize,
    pub method: RelaxSetting,
}

impl Default for RelaxSection {
    fn default() -> Self {
        let r = RelaxConfig::default();
        Self { tolerance: r.tolerance, max_steps: r.max_steps, method: RelaxSetting::Minimize }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// Fill the presynapse until saturation.
    Saturated,
    /// One skyrmion in the middle of the presynapse.
    Single,
    /// Uniform +z.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub kind: InitialKind,
    /// OVF snapshot to start from instead of `kind`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Seed of the position jitter.
    pub seed: u64,
    /// Spacing of the staggered candidate-site lattice.
    pub site_pitch: Quantity<Length>,
    pub seed_radius: Quantity<Length>,
    pub margin: Quantity<Length>,
    pub jitter: Quantity<Length>,
    /// Torque tolerance of the relaxation after each trial seed.
    pub trial_tolerance: f64,
    /// Consecutive failed seeds that end the fill.
    pub max_failures: usize,
    /// Skyrmion count at which the fill stops short of saturation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_count: Option<usize>,
}

impl Default for InitSection {
    fn default() -> Self {
        let s = SeedingConfig::default();
        Self {
            kind: InitialKind::Saturated,
            file: None,
            seed: 0,
            site_pitch: Quantity::si(s.pitch),
            seed_radius: Quantity::si(s.radius),
            margin: Quantity::si(s.margin),
            jitter: Quantity::si(s.jitter),
            trial_tolerance: s.trial_tolerance,
            max_failures: s.max_failures,
            max_count: s.max_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingSection {
    pub mz_threshold: f64,
    pub track_every: Quantity<Time>,
    pub max_jump: Quantity<Length>,
}

impl Default for TrackingSection {
    fn default() -> Self {
        let p = ProtocolConfig::default();
        Self {
            mz_threshold: p.mz_threshold,
            track_every: Quantity::si(p.track_every),
            max_jump: Quantity::si(p.max_jump),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub sample_every: Quantity<Time>,
    /// Extra snapshots at this cadence; segment ends are always written.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<Quantity<Time>>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            sample_every: Quantity::si(ProtocolConfig::default().sample_every),
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub run: RunSection,
    pub pulse_train: PulseTrainSection,
    pub sweep_width: SweepWidthSection,
    pub sweep_current: SweepCurrentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub current: Quantity<CurrentDensity>,
    pub duration: Quantity<Time>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Clock value at the start of the schedule.
    pub start: Quantity<Time>,
    pub segments: Vec<SegmentSpec>,
}

impl Default for RunSection {
    /// Potentiation, rest, depression, rest.
    fn default() -> Self {
        let seg = |j: f64, t: f64| SegmentSpec { current: Quantity::si(j), duration: Quantity::si(t) };
        Self {
            start: Quantity::si(35e-9),
            segments: vec![seg(5e10, 30e-9), seg(0.0, 22e-9), seg(-5e10, 30e-9), seg(0.0, 30e-9)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseTrainSection {
    pub amplitude: Quantity<CurrentDensity>,
    pub duration: Quantity<Time>,
    pub gap_between_pulses: Quantity<Time>,
    pub count: usize,
    pub relax_after: Quantity<Time>,
}

impl Default for PulseTrainSection {
    fn default() -> Self {
        Self {
            amplitude: Quantity::si(5e10),
            duration: Quantity::si(1.5e-9),
            gap_between_pulses: Quantity::si(5e-9),
            count: 8,
            relax_after: Quantity::si(20e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepWidthSection {
    pub widths: Vec<Quantity<Length>>,
}

impl Default for SweepWidthSection {
    fn default() -> Self {
        Self { widths: [60e-9, 90e-9, 120e-9, 150e-9, 180e-9].map(Quantity::si).to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepCurrentSection {
    pub densities: Vec<Quantity<CurrentDensity>>,
    pub duration: Quantity<Time>,
    pub relax_after: Quantity<Time>,
    pub depress: bool,
}

impl Default for SweepCurrentSection {
    fn default() -> Self {
        Self {
            densities: [3e10, 5e10, 7e10].map(Quantity::si).to_vec(),
            duration: Quantity::si(30e-9),
            relax_after: Quantity::si(22e-9),
            depress: true,
        }
    }
}

/// Everything a protocol needs, converted to core types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: MaterialParams,
    pub device_config: DeviceConfig,
    pub device: DeviceModel,
    pub protocol: ProtocolConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
            ConfigError::Syntax { line, column, message: e.message().to_string() }
        })
    }

    /// Inverse of [`RunConfig::parse`].
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn material_params(&self) -> Result<MaterialParams, ConfigError> {
        let m = &self.material;
        let ku_barrier = match (m.ku_barrier, m.ku_barrier_ratio) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid {
                    key: "material.Ku_barrier",
                    message: "give either Ku_barrier or Ku_barrier_ratio, not both".into(),
                })
            }
            (Some(k), None) => k.value(),
            (None, r) => r.unwrap_or(1.2) * m.ku_film.value(),
        };
        let p = MaterialParams {
            ms: m.ms.value(),
            gamma: m.gamma.value(),
            alpha: m.alpha,
            polarization: m.polarization,
            exchange: m.exchange.value(),
            ku_film: m.ku_film.value(),
            ku_barrier,
            dmi: m.dmi.value(),
            thickness: m.t_fm.value(),
            demag_mode: match m.demag_mode {
                DemagSetting::None => DemagMode::None,
                DemagSetting::EffectiveAnisotropy => DemagMode::EffectiveAnisotropy,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn device_config(&self) -> DeviceConfig {
        let d = &self.device;
        DeviceConfig {
            length: d.length.value(),
            width: d.width.value(),
            cell_x: d.cell_x.value(),
            cell_y: d.cell_y.value(),
            cell_z: d.cell_z.value(),
            barrier: BarrierSpec {
                center_x: d.barrier.center_x.map(|q| q.value()),
                center_y: d.barrier.center_y.map(|q| q.value()),
                length: d.barrier.length.value(),
                width: d.barrier.width.value(),
                corner_radius: d.barrier.corner_radius.value(),
            },
        }
    }

    pub fn protocol_config(&self) -> ProtocolConfig {
        let i = &self.integrator;
        let scheme = match i.scheme {
            SchemeSetting::Rk4 => Scheme::Rk4,
            SchemeSetting::Rk45 => {
                Scheme::Rk45 { tolerance: i.tolerance, dt_min: i.dt_min.value(), dt_max: i.dt_max.value() }
            }
        };
        let init = &self.initialization;
        ProtocolConfig {
            integrator: IntegratorConfig { scheme, dt: i.dt.value() },
            relax: RelaxConfig {
                tolerance: self.relax.tolerance,
                max_steps: self.relax.max_steps,
                method: match self.relax.method {
                    RelaxSetting::Minimize => RelaxMethod::Minimize,
                    RelaxSetting::Dynamic => RelaxMethod::Dynamic,
                },
            },
            sample_every: self.output.sample_every.value(),
            track_every: self.tracking.track_every.value(),
            max_jump: self.tracking.max_jump.value(),
            mz_threshold: self.tracking.mz_threshold,
            seeding: SeedingConfig {
                pitch: init.site_pitch.value(),
                radius: init.seed_radius.value(),
                margin: init.margin.value(),
                jitter: init.jitter.value(),
                trial_tolerance: init.trial_tolerance,
                max_failures: init.max_failures,
                max_count: init.max_count,
            },
            seed: init.seed,
        }
    }

    /// Validates everything that can be checked without simulating:
    /// material, geometry, integrator stability and protocol settings.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let params = self.material_params()?;
        let device_config = self.device_config();
        let device = DeviceModel::build(&device_config, &params)?;
        let protocol = self.protocol_config();
        // builds the integrator, which checks dt against the stability bound
        skysyn_core::Synapse::new(device.clone(), params, protocol)?;
        self.pulse_train().validate()?;
        if self.protocol.run.segments.iter().any(|s| !(s.duration.value() > 0.0)) {
            return Err(invalid("protocol.run.segments", "durations must be positive"));
        }
        if self.protocol.sweep_width.widths.iter().any(|w| !(w.value() >= 40e-9)) {
            return Err(invalid("protocol.sweep_width.widths", "widths must be at least 40 nm"));
        }
        let sc = &self.protocol.sweep_current;
        if sc.densities.iter().any(|j| !(j.value() > 0.0)) {
            return Err(invalid("protocol.sweep_current.densities", "densities must be positive"));
        }
        if !(sc.duration.value() > 0.0 && sc.relax_after.value() >= 0.0) {
            return Err(invalid("protocol.sweep_current", "duration must be positive"));
        }
        if let Some(s) = self.output.snapshot_every {
            if !(s.value() > 0.0) {
                return Err(invalid("output.snapshot_every", "must be positive"));
            }
        }
        Ok(Resolved { params, device_config, device, protocol })
    }

    pub fn schedule(&self) -> Vec<Segment> {
        self.protocol
            .run
            .segments
            .iter()
            .map(|s| Segment { drive: DriveState::current(s.current.value()), duration: s.duration.value() })
            .collect()
    }

    pub fn pulse_train(&self) -> PulseTrain {
        let p = &self.protocol.pulse_train;
        PulseTrain {
            amplitude: p.amplitude.value(),
            duration: p.duration.value(),
            gap_between_pulses: p.gap_between_pulses.value(),
            count: p.count,
            relax_after: p.relax_after.value(),
        }
    }

    pub fn current_sweep(&self) -> (Vec<f64>, CurrentSweepSpec) {
        let s = &self.protocol.sweep_current;
        (
            s.densities.iter().map(|q| q.value()).collect(),
            CurrentSweepSpec { duration: s.duration.value(), relax_after: s.relax_after.value(), depress: s.depress },
        )
    }
}

fn invalid(key: &'static str, message: &str) -> ConfigError {
    ConfigError::Invalid { key, message: message.into() }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_is_the_default_parameter_set() {
        let c = RunConfig::parse(DEFAULT_CONFIG).unwrap();
        let r = c.resolve().unwrap();
        let p = MaterialParams::default();
        assert_eq!(r.params.ms, p.ms);
        assert_eq!(r.params.exchange, p.exchange);
        assert_eq!(r.params.ku_film, p.ku_film);
        assert_eq!(r.params.dmi, p.dmi);
        assert_eq!(r.params.alpha, p.alpha);
        assert_eq!(r.params.polarization, p.polarization);
        assert!((r.params.ku_barrier - 0.84e6).abs() < 1e-6);
        assert_eq!(r.device_config, DeviceConfig::default());
        assert_eq!((r.device.nx, r.device.ny), (264, 60));
    }

    #[test]
    fn omitted_keys_take_the_shipped_values() {
        let mut shipped = RunConfig::parse(DEFAULT_CONFIG).unwrap();
        // spelled out in the file, implied when omitted
        assert_eq!(shipped.material.ku_barrier_ratio, Some(1.2));
        shipped.material.ku_barrier_ratio = None;
        assert_eq!(shipped, RunConfig::default());
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unitless_quantity_is_rejected_with_position() {
        let err = RunConfig::parse("[material]\nKu_film = 0.7\n").unwrap_err();
        match err {
            ConfigError::Syntax { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("needs a unit"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::parse("[material]\nKu_flim = \"0.7 MJ/m3\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("Ku_flim"), "{msg}");
        assert!(RunConfig::parse("[materials]\n").is_err());
    }

    #[test]
    fn barrier_anisotropy_by_ratio_or_absolute() {
        let c = RunConfig::parse("[material]\nKu_barrier_ratio = 1.5\n").unwrap();
        assert!((c.material_params().unwrap().ku_barrier - 1.05e6).abs() < 1e-6);
        let c = RunConfig::parse("[material]\nKu_barrier = \"0.9 MJ/m3\"\n").unwrap();
        assert_eq!(c.material_params().unwrap().ku_barrier, 0.9e6);
        let c = RunConfig::parse("[material]\nKu_barrier = \"0.9 MJ/m3\"\nKu_barrier_ratio = 1.2\n").unwrap();
        assert!(matches!(c.material_params(), Err(ConfigError::Invalid { .. })));
        assert!((RunConfig::default().material_params().unwrap().ku_barrier - 0.84e6).abs() < 1e-6);
    }

    #[test]
    fn constraint_violations_surface_from_constructors() {
        let c = RunConfig::parse("[device]\ncell_x = \"10 nm\"\n").unwrap();
        assert!(matches!(c.resolve(), Err(ConfigError::Constraint(_))));
        let c = RunConfig::parse("[integrator]\ndt = \"1 ps\"\n").unwrap();
        assert!(matches!(c.resolve(), Err(ConfigError::Constraint(skysyn_core::Error::UnstableStep { .. }))));
    }

    #[test]
    fn printed_config_parses_back_identically() {
        let mut c = RunConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
        c.material.ku_barrier = Some(Quantity::si(0.8123e6));
        c.material.ku_barrier_ratio = None;
        c.device.barrier.center_x = Some(Quantity::si(123.4e-9));
        c.integrator.dt = Quantity::si(1.234567e-14);
        c.output.snapshot_every = Some(Quantity::si(5e-9));
        c.initialization.file = Some("init.ovf".into());
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }
}
