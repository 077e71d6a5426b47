//! Command-line driver.
//!
//! Exit codes: 0 on success, 2 on usage or configuration errors (nothing
//! is written), 1 when a simulation or file operation fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use skysyn_core::analysis::SkyrmionReport;
use skysyn_core::synapse::{classify_plasticity, sweep_current, width_row, WidthRow, WidthSweep};
use skysyn_core::{CorePolarity, MagnetizationState, Synapse, SynapseTrace, Vec3};

use crate::config::{ConfigError, InitialKind, Resolved, RunConfig, DEFAULT_CONFIG};
use crate::{ovf, plot, tables};

#[derive(Debug, Parser)]
#[command(name = "skysyn", version, about = "Skyrmion synapse simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (TOML); the shipped default when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Snapshot cadence in ns; segment ends are always written.
    #[arg(long, global = true, value_name = "NS")]
    pub snapshot_every: Option<f64>,
    /// Trace sampling cadence in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub sample_every: Option<f64>,
    /// Seed of the seeding-position jitter.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Prepare the initial state and relax it.
    Relax,
    /// Run the drive schedule of `protocol.run`.
    Run,
    /// Apply the pulse train of `protocol.pulse_train` and classify it.
    PulseTrain,
    /// Saturation count for each width of `protocol.sweep_width`.
    SweepWidth,
    /// Potentiation and depression for each density of
    /// `protocol.sweep_current`.
    SweepCurrent,
    /// Parse the configuration and print the resolved SI parameters.
    Validate,
}

/// Parses `argv` and runs; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return 2;
        }
    };
    match execute(&cli, &config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Reads the configuration, applies command-line overrides and resolves it.
fn load_config(cli: &Cli) -> anyhow::Result<(RunConfig, Resolved)> {
    let (text, origin) = match &cli.config {
        Some(p) => {
            (fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?, p.display().to_string())
        }
        None => (DEFAULT_CONFIG.to_string(), "default configuration".into()),
    };
    let mut config = RunConfig::parse(&text).with_context(|| origin.clone())?;
    let positive_ns = |flag: &str, v: f64| -> anyhow::Result<f64> {
        if v.is_finite() && v > 0.0 {
            Ok(v * 1e-9)
        } else {
            bail!("--{flag} must be a positive number of ns")
        }
    };
    if let Some(out) = &cli.out {
        config.output.directory = out.display().to_string();
    }
    if let Some(v) = cli.snapshot_every {
        config.output.snapshot_every = Some(crate::units::Quantity::si(positive_ns("snapshot-every", v)?));
    }
    if let Some(v) = cli.sample_every {
        config.output.sample_every = crate::units::Quantity::si(positive_ns("sample-every", v)?);
    }
    if let Some(seed) = cli.seed {
        config.initialization.seed = seed;
    }
    let resolved = config.resolve().map_err(|e: ConfigError| anyhow::anyhow!(e)).with_context(|| origin)?;
    Ok((config, resolved))
}

struct Ctx<'a> {
    config: &'a RunConfig,
    resolved: &'a Resolved,
    out: PathBuf,
    quiet: bool,
}

impl Ctx<'_> {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn synapse(&self) -> anyhow::Result<Synapse> {
        let r = self.resolved;
        Ok(Synapse::new(r.device.clone(), r.params, r.protocol)?)
    }

    fn path(&self, name: &str) -> anyhow::Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(self.out.join(name))
    }

    /// Builds the configured initial state, relaxed.
    fn initial_state(&self, syn: &mut Synapse) -> anyhow::Result<MagnetizationState> {
        let init = &self.config.initialization;
        if let Some(file) = &init.file {
            let s = ovf::read_snapshot(Path::new(file), syn.device()).with_context(|| format!("reading {file}"))?;
            return Ok(s);
        }
        let mut s = MagnetizationState::uniform(syn.device(), Vec3::Z)?;
        match init.kind {
            InitialKind::Uniform => {}
            InitialKind::Single => {
                let d = syn.device();
                let x = 0.5 * (d.barrier_center.0 - 0.5 * d.barrier.length);
                let (params, radius) = (*syn.params(), syn.config().seeding.radius);
                let d = d.clone();
                s.seed_skyrmion(&d, &params, (x, 0.5 * d.width()), radius, CorePolarity::Down)?;
            }
            InitialKind::Saturated => {
                self.say("initializing: filling the presynapse");
                let init = syn.initialize()?;
                self.say(format!("initialized with {} skyrmions ({} seeds tried)", init.survivors, init.attempts));
                return Ok(init.state);
            }
        }
        let outcome = syn.relax(&mut s)?;
        if !outcome.converged() {
            self.say(format!("warning: relaxation stopped at torque {:.3e}", outcome.torque()));
        }
        Ok(s)
    }

    fn write_trace_outputs(&self, trace: &SynapseTrace, title: &str) -> anyhow::Result<()> {
        tables::write_trace(trace, &self.path("trace.csv")?)?;
        tables::write_events(trace, &self.path("events.csv")?)?;
        tables::write_pulses(trace, &self.path("pulses.csv")?)?;
        fs::write(self.path("plot.svg")?, plot::trace_svg(trace, title)?)?;
        Ok(())
    }

    fn write_summary(&self, lines: &[(String, String)]) -> anyhow::Result<()> {
        let text: String = lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        fs::write(self.path("summary.txt")?, &text)?;
        if !self.quiet {
            print!("{text}");
        }
        Ok(())
    }

    /// Runs a schedule writing snapshots at segment ends and, optionally,
    /// at a fixed cadence.
    fn run_with_snapshots(
        &self,
        syn: &mut Synapse,
        state: &mut MagnetizationState,
        schedule: &[skysyn_core::Segment],
    ) -> anyhow::Result<SynapseTrace> {
        let every = self.config.output.snapshot_every.map(|q| q.value());
        let device = syn.device().clone();
        let mut next = every.map(|e| (state.time / e).floor() as i64 + 1);
        let mut failure: Option<anyhow::Error> = None;
        let mut write = |s: &MagnetizationState| {
            if failure.is_some() {
                return;
            }
            let name = format!("m_{:011.4}ns.ovf", s.time * 1e9);
            let r = self.path(&name).and_then(|p| Ok(ovf::write_snapshot(s, &device, &p)?));
            if let Err(e) = r {
                failure = Some(e);
            }
        };
        write(state);
        let mut observe = |s: &MagnetizationState, seg_end: bool| {
            let mut due = seg_end;
            if let (Some(e), Some(k)) = (every, next.as_mut()) {
                if s.time >= *k as f64 * e * (1.0 - 1e-12) {
                    due = true;
                    while *k as f64 * e <= s.time * (1.0 + 1e-12) {
                        *k += 1;
                    }
                }
            }
            if due {
                write(s);
            }
        };
        let trace = syn.run_schedule_observed(state, schedule, &mut observe)?;
        match failure {
            Some(e) => Err(e),
            None => Ok(trace),
        }
    }
}

fn execute(cli: &Cli, (config, resolved): &(RunConfig, Resolved)) -> anyhow::Result<()> {
    let ctx = Ctx { config, resolved, out: PathBuf::from(&config.output.directory), quiet: cli.quiet };
    match cli.command {
        Command::Validate => validate(&ctx),
        Command::Relax => relax(&ctx),
        Command::Run => run(&ctx),
        Command::PulseTrain => pulse_train(&ctx),
        Command::SweepWidth => sweep_width(&ctx),
        Command::SweepCurrent => sweep_current_cmd(&ctx),
    }
}

fn validate(ctx: &Ctx) -> anyhow::Result<()> {
    let r = ctx.resolved;
    let p = &r.params;
    let d = &r.device;
    let syn = ctx.synapse()?;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| out.push_str(&format!("{k:<28} {v}\n"));
    kv("Ms [A/m]", format!("{:e}", p.ms));
    kv("gamma [m/(A s)]", format!("{:e}", p.gamma));
    kv("alpha", format!("{}", p.alpha));
    kv("P", format!("{}", p.polarization));
    kv("A_ex [J/m]", format!("{:e}", p.exchange));
    kv("Ku_film [J/m^3]", format!("{:e}", p.ku_film));
    kv("Ku_barrier [J/m^3]", format!("{:e}", p.ku_barrier));
    kv("D_dmi [J/m^2]", format!("{:e}", p.dmi));
    kv("t_fm [m]", format!("{:e}", p.thickness));
    kv("demag_mode", format!("{:?}", p.demag_mode));
    kv("K_eff [J/m^3]", format!("{:e}", p.effective_anisotropy(p.ku_film)));
    kv("D_c [J/m^2]", format!("{:e}", p.critical_dmi()));
    kv("exchange length [m]", format!("{:e}", p.exchange_length()));
    kv("wall width [m]", format!("{:e}", p.wall_width()));
    kv("grid", format!("{} x {} cells of {:e} x {:e} x {:e} m", d.nx, d.ny, d.dx, d.dy, d.dz));
    kv("barrier cells", format!("{}", d.region_size(skysyn_core::Region::Barrier)));
    kv("integrator", format!("{:?}", r.protocol.integrator.scheme));
    kv("dt [s]", format!("{:e}", r.protocol.integrator.dt));
    kv(
        "RK4 stability bound [s]",
        format!("{:e}", {
            let mut s = syn;
            s.integrator().stability_bound()
        }),
    );
    kv("sample_every [s]", format!("{:e}", r.protocol.sample_every));
    kv("seed", format!("{}", r.protocol.seed));
    print!("{out}");
    Ok(())
}

fn relax(ctx: &Ctx) -> anyhow::Result<()> {
    let mut syn = ctx.synapse()?;
    let mut state = ctx.initial_state(&mut syn)?;
    let outcome = syn.relax(&mut state)?;
    let report = syn.report(&state)?;
    ovf::write_snapshot(&state, syn.device(), &ctx.path("relaxed.ovf")?)?;
    let trace = SynapseTrace {
        samples: vec![skysyn_core::synapse::TraceSample { report, current_density: 0.0 }],
        ends_relaxed: true,
        ..Default::default()
    };
    tables::write_trace(&trace, &ctx.path("trace.csv")?)?;
    let mut lines = report_lines(&report);
    lines.push(("converged".into(), outcome.converged().to_string()));
    lines.push(("max_torque".into(), format!("{:e}", outcome.torque())));
    ctx.write_summary(&lines)
}

fn report_lines(r: &SkyrmionReport) -> Vec<(String, String)> {
    vec![
        ("n_pre".into(), r.n_pre.to_string()),
        ("n_post".into(), r.n_post.to_string()),
        ("n_barrier".into(), r.n_barrier.to_string()),
        ("Q_total".into(), format!("{:.6}", r.q_total)),
        ("mz_pre".into(), format!("{:.6}", r.mz_pre)),
        ("mz_post".into(), format!("{:.6}", r.mz_post)),
        ("weight".into(), format!("{:.6}", r.weight)),
    ]
}

fn run(ctx: &Ctx) -> anyhow::Result<()> {
    let mut syn = ctx.synapse()?;
    let mut state = ctx.initial_state(&mut syn)?;
    state.time = ctx.config.protocol.run.start.value();
    let schedule = ctx.config.schedule();
    ctx.say(format!("running {} segments", schedule.len()));
    let trace = ctx.run_with_snapshots(&mut syn, &mut state, &schedule)?;
    ctx.write_trace_outputs(&trace, "Synapse response")?;
    let mut lines = report_lines(trace.last().expect("trace has an initial sample"));
    lines.push(("net_crossings".into(), trace.net_crossings.to_string()));
    lines.push(("events".into(), trace.events.len().to_string()));
    ctx.write_summary(&lines)
}

fn pulse_train(ctx: &Ctx) -> anyhow::Result<()> {
    let mut syn = ctx.synapse()?;
    let mut state = ctx.initial_state(&mut syn)?;
    let train = ctx.config.pulse_train();
    ctx.say(format!("applying {} pulses", train.count));
    let mut trace = ctx.run_with_snapshots(&mut syn, &mut state, &train.schedule())?;
    ctx.say("measuring the single-skyrmion weight quantum");
    let epsilon = 0.5 * syn.weight_quantum()?;
    let class = classify_plasticity(&trace, epsilon)?;
    trace.classification = Some(class);
    ctx.write_trace_outputs(&trace, "Pulse train")?;
    let mut lines = report_lines(trace.last().expect("trace has an initial sample"));
    lines.push(("net_crossings".into(), trace.net_crossings.to_string()));
    lines.push(("epsilon".into(), format!("{:.6}", epsilon)));
    lines.push(("classification".into(), format!("{class:?}").to_uppercase()));
    ctx.write_summary(&lines)
}

/// Runs `job` for every index on all available cores; results keep the
/// input order.
fn parallel_map<T: Send>(n: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n.max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = job(i);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every job ran")).collect()
}

fn sweep_width(ctx: &Ctx) -> anyhow::Result<()> {
    let widths: Vec<f64> = ctx.config.protocol.sweep_width.widths.iter().map(|q| q.value()).collect();
    let r = ctx.resolved;
    ctx.say(format!("sweeping {} widths", widths.len()));
    let rows = parallel_map(widths.len(), |i| {
        let row = width_row(widths[i], &r.device_config, &r.params, &r.protocol);
        if let Ok(WidthRow { width, survivors }) = &row {
            ctx.say(format!("  width {:.0} nm: {survivors} skyrmions", width * 1e9));
        }
        row
    });
    let sweep = WidthSweep::from_rows(rows.into_iter().collect::<Result<_, _>>()?);
    tables::write_width_sweep(&sweep, &ctx.path("sweep_width.csv")?, &ctx.path("sweep_width_fit.csv")?)?;
    fs::write(ctx.path("sweep_width.svg")?, plot::width_sweep_svg(&sweep)?)?;
    let mut lines: Vec<(String, String)> =
        sweep.rows.iter().map(|r| (format!("survivors_{:.0}nm", r.width * 1e9), r.survivors.to_string())).collect();
    lines.push(("monotone".into(), sweep.is_monotone().to_string()));
    match sweep.fit {
        Some(f) => {
            lines.push(("slope_per_nm".into(), format!("{:.6}", f.slope)));
            lines.push(("intercept".into(), format!("{:.6}", f.intercept)));
            lines.push(("r_squared".into(), format!("{:.6}", f.r_squared)));
        }
        None => lines.push(("fit".into(), "undefined (fewer than two widths)".into())),
    }
    ctx.write_summary(&lines)
}

fn sweep_current_cmd(ctx: &Ctx) -> anyhow::Result<()> {
    let mut syn = ctx.synapse()?;
    let initial = ctx.initial_state(&mut syn)?;
    let (densities, spec) = ctx.config.current_sweep();
    ctx.say(format!("sweeping {} current densities", densities.len()));
    let curves = sweep_current(&mut syn, &initial, &densities, &spec)?;
    tables::write_current_sweep(&curves, &ctx.path("sweep_current.csv")?)?;
    fs::write(ctx.path("sweep_current.svg")?, plot::current_sweep_svg(&curves)?)?;
    let lines: Vec<(String, String)> = curves
        .iter()
        .map(|c| {
            let first = c.first_crossing.map_or("none".to_string(), |t| format!("{:.3} ns", t * 1e9));
            (format!("first_crossing_{}MA_cm2", c.current_density * 1e-10), first)
        })
        .collect();
    ctx.write_summary(&lines)
}
