//! Device-level experiments: initialization, potentiation and depression,
//! pulse trains, plasticity classification and parameter sweeps.
//!
//! Every schedule is integrated with zero-drive segments run as full LLG
//! dynamics, so skyrmions pushed against the barrier can drift back once
//! the current stops. Skyrmions are tracked between closely spaced
//! observations by nearest-centroid matching, which yields a log of
//! barrier crossings, annihilations and nucleations.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{skyrmion_components, Component, SkyrmionReport};
use crate::device::{BarrierSpec, DeviceConfig, DeviceModel, Region};
use crate::dynamics::{DriveState, Integrator, IntegratorConfig, RelaxConfig, Segment};
use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::state::{CorePolarity, MagnetizationState};
use crate::vec3::Vec3;

/// Where and how skyrmions are seeded during initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedingConfig {
    /// Spacing of the staggered candidate lattice, m.
    pub pitch: f64,
    /// Ansatz radius of each seed, m.
    pub radius: f64,
    /// Minimum distance of a candidate site from the track edges and the
    /// barrier, m.
    pub margin: f64,
    /// Uniform random offset applied to each seed position, m.
    pub jitter: f64,
    /// Torque tolerance of the relaxation after each trial seed. The final
    /// state is relaxed to the protocol tolerance.
    pub trial_tolerance: f64,
    /// Consecutive failed seeds that end the fill.
    pub max_failures: usize,
    /// Stop filling once this many skyrmions are in place; `None` fills to
    /// saturation.
    pub max_count: Option<usize>,
}

impl Default for SeedingConfig {
    fn default() -> Self {
        Self {
            pitch: 4e-9,
            radius: 10e-9,
            margin: 20e-9,
            jitter: 1e-9,
            trial_tolerance: 1e-3,
            max_failures: 3,
            max_count: None,
        }
    }
}

/// Settings shared by all protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub integrator: IntegratorConfig,
    pub relax: RelaxConfig,
    /// Interval between recorded trace samples, s.
    pub sample_every: f64,
    /// Upper bound on the interval between tracking observations, s.
    pub track_every: f64,
    /// Largest centroid displacement between two observations still
    /// attributed to the same skyrmion, m.
    pub max_jump: f64,
    pub mz_threshold: f64,
    pub seeding: SeedingConfig,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            relax: RelaxConfig::default(),
            sample_every: 0.1e-9,
            track_every: 20e-12,
            max_jump: 8e-9,
            mz_threshold: crate::analysis::DEFAULT_MZ_THRESHOLD,
            seeding: SeedingConfig::default(),
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    fn validate(&self) -> Result<()> {
        if !(self.sample_every > 0.0 && self.track_every > 0.0 && self.max_jump > 0.0) {
            return Err(Error::Protocol("sampling intervals and max_jump must be positive"));
        }
        let s = &self.seeding;
        if !(s.pitch > 0.0 && s.radius > 0.0 && s.margin >= 0.0 && s.jitter >= 0.0) {
            return Err(Error::Protocol("invalid seeding geometry"));
        }
        Ok(())
    }
}

/// A train of identical current pulses separated by zero-drive gaps,
/// followed by a relaxation period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTrain {
    /// Signed current density, A/m².
    pub amplitude: f64,
    /// Pulse length, s.
    pub duration: f64,
    /// Zero-drive time between the end of one pulse and the start of the
    /// next, s.
    pub gap_between_pulses: f64,
    pub count: usize,
    /// Zero-drive time after the last pulse, s.
    pub relax_after: f64,
}

impl PulseTrain {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite()
            && self.duration > 0.0
            && self.gap_between_pulses >= 0.0
            && self.relax_after >= 0.0)
        {
            return Err(Error::Protocol("pulse train needs duration > 0, gap >= 0 and relax_after >= 0"));
        }
        if self.count == 0 {
            return Err(Error::Protocol("pulse train needs at least one pulse"));
        }
        Ok(())
    }

    /// The drive schedule; zero-length segments are dropped.
    pub fn schedule(&self) -> Vec<Segment> {
        let mut s = Vec::with_capacity(2 * self.count + 1);
        for k in 0..self.count {
            s.push(Segment { drive: DriveState::current(self.amplitude), duration: self.duration });
            let gap = if k + 1 < self.count { self.gap_between_pulses } else { self.relax_after };
            if gap > 0.0 {
                s.push(Segment { drive: DriveState::OFF, duration: gap });
            }
        }
        s
    }
}

/// One recorded sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub report: SkyrmionReport,
    /// Current density applied during the interval ending at this sample,
    /// A/m².
    pub current_density: f64,
}

impl TraceSample {
    pub fn pulse_on(&self) -> bool {
        self.current_density != 0.0
    }
}

/// A driven segment of the schedule with the weight at its two ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMark {
    pub start: f64,
    pub end: f64,
    pub current_density: f64,
    pub weight_before: f64,
    pub weight_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A tracked skyrmion changed region.
    Transit { from: Region, to: Region },
    /// A tracked skyrmion vanished (collapse, expulsion or merger).
    Annihilation { region: Region },
    /// A skyrmion appeared with no predecessor.
    Nucleation { region: Region },
}

impl EventKind {
    /// Change of `n_pre + n_post` caused by the event.
    pub fn synapse_count_delta(&self) -> i64 {
        let side = |r: Region| i64::from(r != Region::Barrier);
        match *self {
            EventKind::Transit { from, to } => side(to) - side(from),
            EventKind::Annihilation { region } => -side(region),
            EventKind::Nucleation { region } => side(region),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackEvent {
    /// Time of the observation at which the event was first seen, s.
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plasticity {
    /// Short-term: the weight returns to its initial value.
    Stp,
    /// Long-term: at least one skyrmion permanently crossed.
    Ltp,
}

/// Time series of one protocol run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynapseTrace {
    /// Samples with strictly increasing times.
    pub samples: Vec<TraceSample>,
    pub pulses: Vec<PulseMark>,
    pub events: Vec<TrackEvent>,
    /// Crossings from presynapse to postsynapse minus the reverse.
    pub net_crossings: i64,
    /// Whether the last schedule segment had zero drive.
    pub ends_relaxed: bool,
    pub classification: Option<Plasticity>,
}

impl SynapseTrace {
    pub fn initial(&self) -> Option<&SkyrmionReport> {
        self.samples.first().map(|s| &s.report)
    }

    pub fn last(&self) -> Option<&SkyrmionReport> {
        self.samples.last().map(|s| &s.report)
    }

    /// Weight change over each pulse.
    pub fn pulse_weight_deltas(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.weight_after - p.weight_before).collect()
    }

    /// Weight change over each pulse relative to the initial weight, the
    /// "conductance change rate" `Δw/w₀`. `None` when the initial weight
    /// is zero.
    pub fn conductance_change_rates(&self) -> Option<Vec<f64>> {
        let w0 = self.initial()?.weight;
        if w0 == 0.0 {
            return None;
        }
        Some(self.pulse_weight_deltas().into_iter().map(|d| d / w0).collect())
    }

    /// Time of the first arrival of a skyrmion in the postsynapse.
    pub fn first_crossing(&self) -> Option<f64> {
        self.events
            .iter()
            .find(|e| matches!(e.kind, EventKind::Transit { to: Region::Postsynapse, .. }))
            .map(|e| e.time)
    }

    /// Appends `other`, which must start where this trace ends.
    pub fn extend(&mut self, other: SynapseTrace) {
        let skip = match (self.samples.last(), other.samples.first()) {
            (Some(a), Some(b)) if b.report.time <= a.report.time => 1,
            _ => 0,
        };
        self.samples.extend(other.samples.into_iter().skip(skip));
        self.pulses.extend(other.pulses);
        self.events.extend(other.events);
        self.net_crossings += other.net_crossings;
        self.ends_relaxed = other.ends_relaxed;
        self.classification = None;
    }
}

/// Result of the conservation audit of a trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Audit {
    /// Sample intervals checked.
    pub intervals: usize,
    /// Times of samples whose change in `n_pre + n_post` is not accounted
    /// for by logged events.
    pub unexplained: Vec<f64>,
}

impl Audit {
    pub fn is_clean(&self) -> bool {
        self.unexplained.is_empty()
    }
}

/// Checks that every change of `n_pre + n_post` between consecutive samples
/// equals the net effect of the events logged in that interval.
pub fn audit_conservation(trace: &SynapseTrace) -> Audit {
    let mut audit = Audit::default();
    let mut ev = trace.events.iter().peekable();
    // events at or before the first sample belong to no interval
    let t0 = trace.samples.first().map_or(0.0, |s| s.report.time);
    while ev.next_if(|e| e.time <= t0).is_some() {}
    for w in trace.samples.windows(2) {
        let (a, b) = (&w[0].report, &w[1].report);
        let observed = (b.n_pre + b.n_post) as i64 - (a.n_pre + a.n_post) as i64;
        let mut logged = 0;
        while let Some(e) = ev.next_if(|e| e.time <= b.time) {
            logged += e.kind.synapse_count_delta();
        }
        audit.intervals += 1;
        if observed != logged {
            audit.unexplained.push(b.time);
        }
    }
    audit
}

/// LTP iff the weight grew by more than `epsilon`, which must coincide
/// with at least one net crossing into the postsynapse.
pub fn classify_plasticity(trace: &SynapseTrace, epsilon: f64) -> Result<Plasticity> {
    if !(epsilon > 0.0) {
        return Err(Error::Protocol("epsilon must be positive"));
    }
    if !trace.ends_relaxed {
        return Err(Error::Protocol("trace must end with a zero-drive segment"));
    }
    let (first, last) = match (trace.initial(), trace.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Protocol("empty trace")),
    };
    let weight_delta = last.weight - first.weight;
    let by_weight = weight_delta > epsilon;
    let by_crossings = trace.net_crossings >= 1;
    if by_weight != by_crossings {
        return Err(Error::ClassifierDisagreement { weight_delta, crossings: trace.net_crossings });
    }
    Ok(if by_weight { Plasticity::Ltp } else { Plasticity::Stp })
}

/// Outcome of [`Synapse::initialize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Initialization {
    /// Relaxed saturated state with its clock reset to zero.
    pub state: MagnetizationState,
    pub survivors: usize,
    /// Seeds attempted, including the one that failed.
    pub attempts: usize,
}

#[derive(Debug, Clone, Copy)]
struct Track {
    centroid: (f64, f64),
    region: Region,
    /// Last non-barrier region, `None` for a skyrmion born on the barrier.
    side: Option<Region>,
}

/// Matches components across observations and logs what changed.
#[derive(Debug, Clone, Default)]
struct Tracker {
    tracks: Vec<Track>,
    max_jump: f64,
    events: Vec<TrackEvent>,
    net_crossings: i64,
}

fn side_of(r: Region) -> Option<Region> {
    (r != Region::Barrier).then_some(r)
}

impl Tracker {
    fn new(comps: &[Component], max_jump: f64) -> Self {
        let tracks =
            comps.iter().map(|c| Track { centroid: c.centroid, region: c.region, side: side_of(c.region) }).collect();
        Self { tracks, max_jump, ..Default::default() }
    }

    fn update(&mut self, time: f64, comps: &[Component]) {
        // greedy global matching by increasing distance
        let mut pairs = Vec::new();
        for (i, t) in self.tracks.iter().enumerate() {
            for (j, c) in comps.iter().enumerate() {
                let d = libm::hypot(t.centroid.0 - c.centroid.0, t.centroid.1 - c.centroid.1);
                if d <= self.max_jump {
                    pairs.push((d, i, j));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_of = vec![None; comps.len()];
        let mut matched = vec![false; self.tracks.len()];
        for (_, i, j) in pairs {
            if !matched[i] && track_of[j].is_none() {
                matched[i] = true;
                track_of[j] = Some(i);
            }
        }
        for (i, t) in self.tracks.iter().enumerate() {
            if !matched[i] {
                self.events.push(TrackEvent { time, kind: EventKind::Annihilation { region: t.region } });
            }
        }
        let mut next = Vec::with_capacity(comps.len());
        for (j, c) in comps.iter().enumerate() {
            match track_of[j] {
                Some(i) => {
                    let mut t = self.tracks[i];
                    if c.region != t.region {
                        self.events
                            .push(TrackEvent { time, kind: EventKind::Transit { from: t.region, to: c.region } });
                    }
                    if let Some(s) = side_of(c.region) {
                        match (t.side, s) {
                            (Some(Region::Presynapse), Region::Postsynapse) => self.net_crossings += 1,
                            (Some(Region::Postsynapse), Region::Presynapse) => self.net_crossings -= 1,
                            _ => {}
                        }
                        t.side = Some(s);
                    }
                    t.centroid = c.centroid;
                    t.region = c.region;
                    next.push(t);
                }
                None => {
                    self.events.push(TrackEvent { time, kind: EventKind::Nucleation { region: c.region } });
                    next.push(Track { centroid: c.centroid, region: c.region, side: side_of(c.region) });
                }
            }
        }
        self.tracks = next;
    }
}

/// A device together with the solver that runs experiments on it.
#[derive(Debug, Clone)]
pub struct Synapse {
    device: DeviceModel,
    params: MaterialParams,
    config: ProtocolConfig,
    integrator: Integrator,
}

impl Synapse {
    pub fn new(device: DeviceModel, params: MaterialParams, config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let integrator = Integrator::new(&device, &params, config.integrator)?;
        Ok(Self { device, params, config, integrator })
    }

    pub fn device(&self) -> &DeviceModel {
        &self.device
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn integrator(&mut self) -> &mut Integrator {
        &mut self.integrator
    }

    pub fn components(&self, state: &MagnetizationState) -> Vec<Component> {
        skyrmion_components(state, &self.device, self.config.mz_threshold)
    }

    pub fn report(&self, state: &MagnetizationState) -> Result<SkyrmionReport> {
        SkyrmionReport::from_components(state, &self.device, &self.components(state))
    }

    /// Relaxes with zero drive using the configured relaxation method.
    pub fn relax(&mut self, state: &mut MagnetizationState) -> Result<crate::dynamics::RelaxOutcome> {
        let cfg = self.config.relax;
        self.integrator.relax(state, &cfg)
    }

    /// Candidate seed sites in the presynapse: a staggered lattice whose
    /// rows are spread evenly across the usable width.
    pub fn seed_sites(&self) -> Vec<(f64, f64)> {
        let s = &self.config.seeding;
        let d = &self.device;
        let x_hi = d.barrier_center.0 - 0.5 * d.barrier.length - s.margin;
        let (y_lo, y_hi) = (s.margin, d.width() - s.margin);
        let mut sites = Vec::new();
        if x_hi < s.margin || y_hi < y_lo {
            // too small for the margins: a single central site
            let x = 0.5 * (d.barrier_center.0 - 0.5 * d.barrier.length);
            if x > 0.0 {
                sites.push((x, 0.5 * d.width()));
            }
            return sites;
        }
        let row_pitch = s.pitch * 0.5 * libm::sqrt(3.0);
        let rows = libm::floor((y_hi - y_lo) / row_pitch + 1e-9) as usize + 1;
        let row_step = if rows > 1 { (y_hi - y_lo) / (rows - 1) as f64 } else { 0.0 };
        for r in 0..rows {
            let y = if rows > 1 { y_lo + r as f64 * row_step } else { 0.5 * d.width() };
            let mut x = s.margin + if r % 2 == 1 { 0.5 * s.pitch } else { 0.0 };
            while x <= x_hi + 1e-12 {
                sites.push((x, y));
                x += s.pitch;
            }
        }
        sites
    }

    /// Fills the presynapse one seed at a time, always at the candidate
    /// site farthest from the skyrmions already present. A seed that does
    /// not survive its relaxation, or pushes a skyrmion out of the
    /// presynapse, is discarded together with the sites around it; the fill
    /// ends after `max_failures` such seeds in a row or when no site is left.
    ///
    /// Trial relaxations stop at the looser `trial_tolerance`. If the fully
    /// relaxed result then loses a skyrmion or lets one escape, the last
    /// accepted seed is dropped and the previous state relaxed instead.
    pub fn initialize(&mut self) -> Result<Initialization> {
        let seeding = self.config.seeding;
        let mut state = MagnetizationState::uniform(&self.device, Vec3::Z)?;
        self.relax(&mut state)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut free = self.seed_sites();
        let mut comps = self.components(&state);
        if !comps.is_empty() {
            return Err(Error::Protocol("relaxed empty device already holds reversed domains"));
        }
        let trial_relax =
            RelaxConfig { tolerance: seeding.trial_tolerance.max(self.config.relax.tolerance), ..self.config.relax };
        let walls = (self.device.barrier_center.0 - 0.5 * self.device.barrier.length, self.device.width());
        let mut accepted = vec![state.clone()];
        let (mut attempts, mut failures) = (0, 0);
        let wanted = seeding.max_count.unwrap_or(usize::MAX);
        while !free.is_empty() && failures < seeding.max_failures.max(1) && comps.len() < wanted {
            let site = free.swap_remove(best_site(&free, &comps, walls));
            let center = (
                site.0 + seeding.jitter * symmetric_unit(&mut rng),
                site.1 + seeding.jitter * symmetric_unit(&mut rng),
            );
            let mut trial = state.clone();
            trial.seed_skyrmion(&self.device, &self.params, center, seeding.radius, CorePolarity::Down)?;
            self.integrator.relax(&mut trial, &trial_relax)?;
            attempts += 1;
            let next = self.components(&trial);
            if self.holds(&next, comps.len() + 1) {
                state = trial;
                comps = next;
                accepted.push(state.clone());
                failures = 0;
            } else {
                failures += 1;
                free.retain(|s| libm::hypot(s.0 - site.0, s.1 - site.1) > seeding.radius);
            }
        }
        while let Some(mut state) = accepted.pop() {
            let expected = accepted.len();
            self.relax(&mut state)?;
            let comps = self.components(&state);
            if expected > 0 && self.holds(&comps, expected) {
                state.time = 0.0;
                return Ok(Initialization { survivors: comps.len(), state, attempts });
            }
        }
        Err(Error::NoSurvivors)
    }

    fn holds(&self, comps: &[Component], expected: usize) -> bool {
        comps.len() == expected && comps.iter().all(|c| c.region == Region::Presynapse)
    }

    /// Weight carried by a single relaxed skyrmion in the postsynapse.
    pub fn weight_quantum(&mut self) -> Result<f64> {
        let mut empty = MagnetizationState::uniform(&self.device, Vec3::Z)?;
        self.relax(&mut empty)?;
        let w0 = crate::analysis::synaptic_weight(&empty, &self.device)?;
        let mut one = empty.clone();
        let x = 0.5 * (self.device.barrier_center.0 + 0.5 * self.device.barrier.length + self.device.length());
        one.seed_skyrmion(
            &self.device,
            &self.params,
            (x, 0.5 * self.device.width()),
            self.config.seeding.radius,
            CorePolarity::Down,
        )?;
        self.relax(&mut one)?;
        if self.components(&one).len() != 1 {
            return Err(Error::NoSurvivors);
        }
        Ok(crate::analysis::synaptic_weight(&one, &self.device)? - w0)
    }

    /// Runs a drive schedule, tracking skyrmions every `track_every` and
    /// recording a sample every `sample_every` and at each segment end.
    pub fn run_schedule(&mut self, state: &mut MagnetizationState, schedule: &[Segment]) -> Result<SynapseTrace> {
        self.run_schedule_observed(state, schedule, &mut |_, _| {})
    }

    /// [`Synapse::run_schedule`] that also hands the state to `observe`
    /// after every tracking observation, flagging segment ends.
    pub fn run_schedule_observed(
        &mut self,
        state: &mut MagnetizationState,
        schedule: &[Segment],
        observe: &mut dyn FnMut(&MagnetizationState, bool),
    ) -> Result<SynapseTrace> {
        state.check_normalized()?;
        if schedule.iter().any(|s| !(s.duration > 0.0)) {
            return Err(Error::Protocol("segment durations must be positive"));
        }
        let cfg = self.config;
        let comps = self.components(state);
        let mut tracker = Tracker::new(&comps, cfg.max_jump);
        let first = SkyrmionReport::from_components(state, &self.device, &comps)?;
        let t0 = state.time;
        let mut trace = SynapseTrace {
            samples: vec![TraceSample { report: first, current_density: 0.0 }],
            ends_relaxed: schedule.last().is_none_or(|s| s.drive.is_off()),
            ..Default::default()
        };
        let mut next_sample = 1u64;
        let mut seg_start = t0;
        for seg in schedule {
            let seg_end = seg_start + seg.duration;
            let weight_before = trace.samples.last().map_or(first.weight, |s| s.report.weight);
            let n_obs = libm::ceil(seg.duration / cfg.track_every - 1e-9).max(1.0) as u64;
            let obs_dt = seg.duration / n_obs as f64;
            for k in 1..=n_obs {
                let t = if k == n_obs { seg_end } else { seg_start + k as f64 * obs_dt };
                self.integrator.advance(state, &seg.drive, t - state.time)?;
                state.time = t;
                let comps = self.components(state);
                tracker.update(t, &comps);
                observe(state, k == n_obs);
                let due = t0 + next_sample as f64 * cfg.sample_every;
                let at_sample = t >= due * (1.0 - 1e-12) - 1e-24;
                if at_sample || k == n_obs {
                    let report = SkyrmionReport::from_components(state, &self.device, &comps)?;
                    trace.samples.push(TraceSample { report, current_density: seg.drive.current_density });
                    while t0 + next_sample as f64 * cfg.sample_every <= t * (1.0 + 1e-12) + 1e-24 {
                        next_sample += 1;
                    }
                }
            }
            if !seg.drive.is_off() {
                let weight_after = trace.samples.last().map_or(weight_before, |s| s.report.weight);
                trace.pulses.push(PulseMark {
                    start: seg_start,
                    end: seg_end,
                    current_density: seg.drive.current_density,
                    weight_before,
                    weight_after,
                });
            }
            seg_start = seg_end;
        }
        trace.events = tracker.events;
        trace.net_crossings = tracker.net_crossings;
        Ok(trace)
    }

    /// Positive stimulus of `j_mag` for `duration`, then `relax_after`
    /// with zero drive.
    pub fn potentiate(
        &mut self,
        state: &mut MagnetizationState,
        j_mag: f64,
        duration: f64,
        relax_after: f64,
    ) -> Result<SynapseTrace> {
        if !(j_mag >= 0.0) {
            return Err(Error::Protocol("stimulus magnitude must be non-negative"));
        }
        self.stimulus(state, j_mag, duration, relax_after)
    }

    /// Mirror of [`Synapse::potentiate`] with reversed current.
    pub fn depress(
        &mut self,
        state: &mut MagnetizationState,
        j_mag: f64,
        duration: f64,
        relax_after: f64,
    ) -> Result<SynapseTrace> {
        if !(j_mag >= 0.0) {
            return Err(Error::Protocol("stimulus magnitude must be non-negative"));
        }
        self.stimulus(state, -j_mag, duration, relax_after)
    }

    fn stimulus(
        &mut self,
        state: &mut MagnetizationState,
        j: f64,
        duration: f64,
        relax_after: f64,
    ) -> Result<SynapseTrace> {
        if !(duration > 0.0 && relax_after >= 0.0) {
            return Err(Error::Protocol("stimulus needs duration > 0 and relax_after >= 0"));
        }
        let mut schedule = vec![Segment { drive: DriveState::current(j), duration }];
        if relax_after > 0.0 {
            schedule.push(Segment { drive: DriveState::OFF, duration: relax_after });
        }
        self.run_schedule(state, &schedule)
    }

    pub fn run_pulse_train(&mut self, state: &mut MagnetizationState, train: &PulseTrain) -> Result<SynapseTrace> {
        train.validate()?;
        self.run_schedule(state, &train.schedule())
    }
}

/// Index of the site with the largest clearance: the distance to the
/// nearest component centroid, or twice the distance to the nearest wall
/// (track edge or barrier face) if that is smaller, so walls repel like a
/// mirror skyrmion. Ties go to the lexicographically smallest position,
/// which keeps the choice independent of the site order.
fn best_site(sites: &[(f64, f64)], comps: &[Component], walls: (f64, f64)) -> usize {
    let (x_wall, width) = walls;
    let clearance = |s: &(f64, f64)| {
        let wall = s.0.min(x_wall - s.0).min(s.1).min(width - s.1);
        comps.iter().map(|c| libm::hypot(s.0 - c.centroid.0, s.1 - c.centroid.1)).fold(2.0 * wall, f64::min)
    };
    let mut best = 0;
    let mut best_c = f64::NEG_INFINITY;
    for (i, s) in sites.iter().enumerate() {
        let c = clearance(s);
        if c > best_c || (c == best_c && (s.0, s.1) < (sites[best].0, sites[best].1)) {
            best = i;
            best_c = c;
        }
    }
    best
}

/// Uniform deviate in [−1, 1).
fn symmetric_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when all `y` are equal and fit
    /// exactly.
    pub r_squared: f64,
}

/// `None` with fewer than two distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthRow {
    /// Track width, m.
    pub width: f64,
    pub survivors: usize,
}

/// Saturation count versus track width, with a linear fit over the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthSweep {
    pub rows: Vec<WidthRow>,
    /// Fit of survivors against width in nm; `None` for fewer than two
    /// widths.
    pub fit: Option<LinearFit>,
}

impl WidthSweep {
    pub fn from_rows(rows: Vec<WidthRow>) -> Self {
        let xs: Vec<f64> = rows.iter().map(|r| r.width * 1e9).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.survivors as f64).collect();
        let fit = linear_fit(&xs, &ys);
        Self { rows, fit }
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].width <= w[0].width || w[1].survivors >= w[0].survivors)
    }
}

/// `base` at another track width. The track length and the barrier's
/// extent along the track are kept. Across the track the barrier scales
/// with the width, except that the passages beside it never grow wider
/// than in `base`: wider passages stop confining the presynapse.
pub fn widened_device(base: &DeviceConfig, width: f64) -> DeviceConfig {
    let scale = width / base.width;
    let passages = base.width - base.barrier.width;
    let barrier = BarrierSpec {
        width: (base.barrier.width * scale).max(width - passages),
        center_y: base.barrier.center_y.map(|y| y * scale),
        ..base.barrier
    };
    DeviceConfig { width, barrier, ..*base }
}

/// Saturation count of the [`widened_device`] of one track width.
pub fn width_row(
    width: f64,
    base: &DeviceConfig,
    params: &MaterialParams,
    config: &ProtocolConfig,
) -> Result<WidthRow> {
    if !(width >= 40e-9) {
        return Err(Error::Protocol("track width must be at least 40 nm"));
    }
    let device = DeviceModel::build(&widened_device(base, width), params)?;
    let init = Synapse::new(device, *params, *config)?.initialize()?;
    Ok(WidthRow { width, survivors: init.survivors })
}

/// Runs [`width_row`] for each width in order.
pub fn sweep_width(
    widths: &[f64],
    base: &DeviceConfig,
    params: &MaterialParams,
    config: &ProtocolConfig,
) -> Result<WidthSweep> {
    let rows = widths.iter().map(|&w| width_row(w, base, params, config)).collect::<Result<Vec<_>>>()?;
    Ok(WidthSweep::from_rows(rows))
}

/// Stimulus used by [`sweep_current`]: potentiation, relaxation, then the
/// mirrored depression and relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSweepSpec {
    pub duration: f64,
    pub relax_after: f64,
    pub depress: bool,
}

/// `n_post` versus time for one current density.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentCurve {
    pub current_density: f64,
    pub trace: SynapseTrace,
    /// First arrival in the postsynapse, relative to the start, s.
    pub first_crossing: Option<f64>,
}

impl CurrentCurve {
    pub fn n_post(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        let t0 = self.trace.initial().map_or(0.0, |r| r.time);
        self.trace.samples.iter().map(move |s| (s.report.time - t0, s.report.n_post))
    }
}

pub fn current_curve(
    synapse: &mut Synapse,
    initial: &MagnetizationState,
    density: f64,
    spec: &CurrentSweepSpec,
) -> Result<CurrentCurve> {
    if !(density > 0.0) {
        return Err(Error::Protocol("current densities must be positive"));
    }
    let mut state = initial.clone();
    let t0 = state.time;
    let mut trace = synapse.potentiate(&mut state, density, spec.duration, spec.relax_after)?;
    if spec.depress {
        trace.extend(synapse.depress(&mut state, density, spec.duration, spec.relax_after)?);
    }
    let first_crossing = trace.first_crossing().map(|t| t - t0);
    Ok(CurrentCurve { current_density: density, trace, first_crossing })
}

/// Runs [`current_curve`] for each density in order, each from `initial`.
pub fn sweep_current(
    synapse: &mut Synapse,
    initial: &MagnetizationState,
    densities: &[f64],
    spec: &CurrentSweepSpec,
) -> Result<Vec<CurrentCurve>> {
    densities.iter().map(|&j| current_curve(synapse, initial, j, spec)).collect()
}
