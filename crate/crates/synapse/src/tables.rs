//! CSV output of traces, event logs and sweep tables.
//!
//! Reals are written in scientific notation with a fixed number of
//! significant digits so files are byte-stable across runs and platforms.

use std::io;
use std::path::Path;

use skysyn_core::synapse::{CurrentCurve, EventKind, SynapseTrace, WidthSweep};
use skysyn_core::Region;

/// Significant digits of every real written to CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const TRACE_HEADER: [&str; 8] =
    ["time_ns", "mz_pre", "mz_post", "n_pre", "n_post", "Q_total", "weight", "pulse_on"];

pub fn real(x: f64) -> String {
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
}

fn region_name(r: Region) -> &'static str {
    match r {
        Region::Presynapse => "presynapse",
        Region::Barrier => "barrier",
        Region::Postsynapse => "postsynapse",
    }
}

fn open(path: &Path) -> io::Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn io_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_trace_to<W: io::Write>(trace: &SynapseTrace, w: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(TRACE_HEADER).map_err(io_err)?;
    for s in &trace.samples {
        let r = &s.report;
        w.write_record([
            real(r.time * 1e9),
            real(r.mz_pre),
            real(r.mz_post),
            r.n_pre.to_string(),
            r.n_post.to_string(),
            real(r.q_total),
            real(r.weight),
            u8::from(s.pulse_on()).to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()
}

pub fn write_trace(trace: &SynapseTrace, path: &Path) -> io::Result<()> {
    write_trace_to(trace, std::fs::File::create(path)?)
}

/// One parsed row of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time_ns: f64,
    pub mz_pre: f64,
    pub mz_post: f64,
    pub n_pre: usize,
    pub n_post: usize,
    pub q_total: f64,
    pub weight: f64,
    pub pulse_on: bool,
}

pub fn read_trace<R: io::Read>(r: R) -> io::Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(io_err)?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "unexpected trace header"));
    }
    let bad = |what: &str| io::Error::new(io::ErrorKind::InvalidData, format!("bad {what}"));
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(io_err)?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(TRACE_HEADER[i]));
        let n = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(TRACE_HEADER[i]));
        rows.push(TraceRow {
            time_ns: f(0)?,
            mz_pre: f(1)?,
            mz_post: f(2)?,
            n_pre: n(3)?,
            n_post: n(4)?,
            q_total: f(5)?,
            weight: f(6)?,
            pulse_on: n(7)? != 0,
        });
    }
    Ok(rows)
}

pub fn write_events(trace: &SynapseTrace, path: &Path) -> io::Result<()> {
    let mut w = open(path)?;
    w.write_record(["time_ns", "event", "from", "to"]).map_err(io_err)?;
    for e in &trace.events {
        let (kind, from, to) = match e.kind {
            EventKind::Transit { from, to } => ("transit", region_name(from), region_name(to)),
            EventKind::Annihilation { region } => ("annihilation", region_name(region), ""),
            EventKind::Nucleation { region } => ("nucleation", "", region_name(region)),
        };
        w.write_record([real(e.time * 1e9).as_str(), kind, from, to]).map_err(io_err)?;
    }
    w.flush()
}

/// Per-pulse weight changes, absolute and relative to the initial weight.
pub fn write_pulses(trace: &SynapseTrace, path: &Path) -> io::Result<()> {
    let mut w = open(path)?;
    w.write_record([
        "start_ns",
        "end_ns",
        "current_MA_cm2",
        "weight_before",
        "weight_after",
        "delta_w",
        "delta_w_over_w0",
    ])
    .map_err(io_err)?;
    let w0 = trace.initial().map_or(0.0, |r| r.weight);
    for p in &trace.pulses {
        let dw = p.weight_after - p.weight_before;
        let rate = if w0 != 0.0 { real(dw / w0) } else { "nan".into() };
        w.write_record([
            real(p.start * 1e9),
            real(p.end * 1e9),
            real(p.current_density * 1e-10),
            real(p.weight_before),
            real(p.weight_after),
            real(dw),
            rate,
        ])
        .map_err(io_err)?;
    }
    w.flush()
}

/// Writes the rows and, in a second file, the linear fit (or a note that
/// it is undefined).
pub fn write_width_sweep(sweep: &WidthSweep, table: &Path, fit: &Path) -> io::Result<()> {
    let mut w = open(table)?;
    w.write_record(["width_nm", "survivors"]).map_err(io_err)?;
    for r in &sweep.rows {
        w.write_record([real(r.width * 1e9), r.survivors.to_string()]).map_err(io_err)?;
    }
    w.flush()?;
    let mut w = open(fit)?;
    w.write_record(["slope_per_nm", "intercept", "r_squared", "status"]).map_err(io_err)?;
    match sweep.fit {
        Some(f) => w.write_record([real(f.slope), real(f.intercept), real(f.r_squared), "ok".into()]),
        None => w.write_record(["", "", "", "undefined: fewer than two widths"]),
    }
    .map_err(io_err)?;
    w.flush()
}

/// Long format: one row per (density, sample).
pub fn write_current_sweep(curves: &[CurrentCurve], path: &Path) -> io::Result<()> {
    let mut w = open(path)?;
    w.write_record(["current_MA_cm2", "time_ns", "n_post", "first_crossing_ns"]).map_err(io_err)?;
    for c in curves {
        let first = c.first_crossing.map_or(String::new(), |t| real(t * 1e9));
        for (t, n) in c.n_post() {
            w.write_record([real(c.current_density * 1e-10), real(t * 1e9), n.to_string(), first.clone()])
                .map_err(io_err)?;
        }
    }
    w.flush()
}
