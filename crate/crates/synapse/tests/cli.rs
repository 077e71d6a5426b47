use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use skysyn::ovf::read_snapshot;
use skysyn::tables::read_trace;
use skysyn::RunConfig;
use skysyn_core::DeviceModel;

/// A short track with one skyrmion, cheap enough for end-to-end runs.
const SMALL: &str = r#"
[device]
length = "200 nm"
width = "60 nm"

[device.barrier]
width = "28 nm"

[initialization]
kind = "single"

[protocol.run]
start = "0 ns"
segments = [
  { current = "5 MA/cm2", duration = "0.3 ns" },
  { current = "0 MA/cm2", duration = "0.2 ns" },
]
"#;

fn skysyn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skysyn")).current_dir(dir).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn validate_prints_derived_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = skysyn(dir.path(), &["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("K_eff") && text.contains("264 x 60 cells"), "{text}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0, "validate writes nothing");
}

#[test]
fn usage_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(skysyn(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(skysyn(dir.path(), &["run", "--sample-every", "abc"]).status.code(), Some(2));
    assert_eq!(skysyn(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_2_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[material]\nMs = 580000\n", "line 2"),
        ("[material]\nKu_barrier = \"0.9 MJ/m3\"\nKu_barrier_ratio = 1.2\n", "not both"),
        ("[device]\ncell_x = \"12 nm\"\n", "exchange length"),
        ("[integrator]\ndt = \"1 ps\"\n", "stab"),
        ("[device]\nlenght = \"100 nm\"\n", "lenght"),
    ];
    for (text, needle) in cases {
        let cfg = write_config(dir.path(), text);
        let out = skysyn(dir.path(), &["--config", &cfg, "--out", "o", "run"]);
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(out.status.code(), Some(2), "{text}: {err}");
        assert!(err.to_lowercase().contains(needle), "{text}: {err}");
        assert!(!dir.path().join("o").exists());
    }
    let out = skysyn(dir.path(), &["--config", "missing.toml", "validate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = skysyn(dir.path(), &["--sample-every", "-1", "validate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("kind = \"single\"", "file = \"nowhere.ovf\""));
    let out = skysyn(dir.path(), &["--config", &cfg, "--quiet", "run"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_writes_every_output_and_is_bit_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for out in ["a", "b"] {
        let o = skysyn(dir.path(), &["--config", &cfg, "--out", out, "--quiet", "--snapshot-every", "0.1", "run"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let trace = fs::read(a.join("trace.csv")).unwrap();
    assert_eq!(trace, fs::read(b.join("trace.csv")).unwrap());
    for f in ["events.csv", "pulses.csv", "plot.svg", "summary.txt"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    let rows = read_trace(trace.as_slice()).unwrap();
    assert_eq!(rows.first().map(|r| r.time_ns), Some(0.0));
    assert!((rows.last().unwrap().time_ns - 0.5).abs() < 1e-9);
    assert!(rows.iter().all(|r| r.n_pre + r.n_post <= 1));
    assert!(rows.iter().any(|r| r.pulse_on) && rows.iter().any(|r| !r.pulse_on));

    let config = RunConfig::parse(SMALL).unwrap().resolve().unwrap();
    let device: &DeviceModel = &config.device;
    let mut snaps: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ovf"))
        .collect();
    snaps.sort();
    // start, every 0.1 ns, and the segment ends (one of which coincides)
    assert_eq!(snaps.len(), 6, "{snaps:?}");
    let last = read_snapshot(snaps.last().unwrap(), device).unwrap();
    assert!((last.time - 0.5e-9).abs() < 1e-18);
}

#[test]
fn relaxed_state_can_seed_a_later_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = skysyn(dir.path(), &["--config", &cfg, "--out", "init", "--quiet", "relax"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("init/summary.txt")).unwrap();
    assert!(summary.contains("n_pre = 1"), "{summary}");

    let from_file = SMALL.replace("kind = \"single\"", "file = \"init/relaxed.ovf\"");
    let cfg = write_config(dir.path(), &from_file);
    let o = skysyn(dir.path(), &["--config", &cfg, "--out", "run", "--quiet", "run"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_trace(fs::File::open(dir.path().join("run/trace.csv")).unwrap()).unwrap();
    assert_eq!(rows[0].n_pre, 1);
}

#[test]
fn single_width_sweep_reports_an_undefined_fit() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[protocol.sweep_width]\nwidths = [\"60 nm\"]\n");
    let cfg = write_config(dir.path(), &text);
    let o = skysyn(dir.path(), &["--config", &cfg, "--out", "w", "--quiet", "sweep-width"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("w/sweep_width.csv")).unwrap();
    assert_eq!(table.lines().count(), 2, "{table}");
    let fit = fs::read_to_string(dir.path().join("w/sweep_width_fit.csv")).unwrap();
    assert!(fit.contains("undefined"), "{fit}");
}
