//! OVF 2.0 text snapshots of the magnetization.
//!
//! Values are written in Rust's shortest round-trip float notation, so a
//! snapshot reads back bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use skysyn_core::{DeviceModel, MagnetizationState, VectorField};

#[derive(Debug, thiserror::Error)]
pub enum OvfError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("snapshot is {nx}x{ny}x{nz}, the device is {dev_nx}x{dev_ny}x1")]
    Mismatch { nx: usize, ny: usize, nz: usize, dev_nx: usize, dev_ny: usize },
    #[error(transparent)]
    State(#[from] skysyn_core::Error),
}

/// Renders a snapshot. The simulation time goes into a `Desc` line.
pub fn format_snapshot(state: &MagnetizationState, device: &DeviceModel) -> String {
    let (nx, ny) = (device.nx, device.ny);
    let mut s = String::with_capacity(64 * nx * ny + 1024);
    let header = [
        "OOMMF OVF 2.0".to_string(),
        String::new(),
        "Segment count: 1".into(),
        String::new(),
        "Begin: Segment".into(),
        "Begin: Header".into(),
        String::new(),
        "Title: m".into(),
        "meshtype: rectangular".into(),
        "meshunit: m".into(),
        String::new(),
        format!("Desc: Total simulation time: {} s", state.time),
        String::new(),
        "xmin: 0".into(),
        "ymin: 0".into(),
        "zmin: 0".into(),
        format!("xmax: {}", nx as f64 * device.dx),
        format!("ymax: {}", ny as f64 * device.dy),
        format!("zmax: {}", device.dz),
        String::new(),
        "valuedim: 3".into(),
        "valuelabels: m_x m_y m_z".into(),
        "valueunits: 1 1 1".into(),
        String::new(),
        format!("xbase: {}", 0.5 * device.dx),
        format!("ybase: {}", 0.5 * device.dy),
        format!("zbase: {}", 0.5 * device.dz),
        format!("xnodes: {nx}"),
        format!("ynodes: {ny}"),
        "znodes: 1".into(),
        format!("xstepsize: {}", device.dx),
        format!("ystepsize: {}", device.dy),
        format!("zstepsize: {}", device.dz),
        "End: Header".into(),
        String::new(),
        "Begin: Data Text".into(),
    ];
    for h in header {
        if h.is_empty() {
            s.push_str("#\n");
        } else {
            let _ = writeln!(s, "# {h}");
        }
    }
    let m = &state.m;
    for i in 0..m.len() {
        let _ = writeln!(s, "{} {} {}", m.x[i], m.y[i], m.z[i]);
    }
    s.push_str("# End: Data Text\n# End: Segment\n");
    s
}

pub fn write_snapshot(state: &MagnetizationState, device: &DeviceModel, path: &Path) -> Result<(), OvfError> {
    fs::write(path, format_snapshot(state, device))?;
    Ok(())
}

/// Parses a single-segment text snapshot on the grid of `device`.
pub fn parse_snapshot(text: &str, device: &DeviceModel) -> Result<MagnetizationState, OvfError> {
    let fail = |line: usize, message: &str| OvfError::Format { line: line + 1, message: message.into() };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim().eq_ignore_ascii_case("# OOMMF OVF 2.0") => {}
        _ => return Err(fail(0, "missing `# OOMMF OVF 2.0` signature")),
    }
    let (mut nodes, mut time) = ([None::<usize>; 3], 0.0);
    let mut data_start = None;
    for (n, l) in lines.by_ref() {
        let Some(body) = l.strip_prefix('#') else {
            return Err(fail(n, "data before `Begin: Data Text`"));
        };
        let Some((key, value)) = body.split_once(':') else { continue };
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        let parse_n = |v: &str| v.parse::<usize>().map_err(|_| fail(n, "bad node count"));
        match key.as_str() {
            "xnodes" => nodes[0] = Some(parse_n(value)?),
            "ynodes" => nodes[1] = Some(parse_n(value)?),
            "znodes" => nodes[2] = Some(parse_n(value)?),
            "valuedim" if value != "3" => return Err(fail(n, "valuedim must be 3")),
            "desc" => {
                if let Some(t) = value.strip_prefix("Total simulation time:") {
                    let t = t.trim().trim_end_matches('s').trim();
                    time = t.parse().map_err(|_| fail(n, "bad simulation time"))?;
                }
            }
            "begin" if value.eq_ignore_ascii_case("data text") => {
                data_start = Some(n);
                break;
            }
            "begin" if value.to_ascii_lowercase().starts_with("data binary") => {
                return Err(fail(n, "only text data is supported"));
            }
            _ => {}
        }
    }
    let Some(start) = data_start else { return Err(fail(0, "missing `Begin: Data Text`")) };
    let [Some(nx), Some(ny), Some(nz)] = nodes else { return Err(fail(start, "missing node counts")) };
    if (nx, ny, nz) != (device.nx, device.ny, 1) {
        return Err(OvfError::Mismatch { nx, ny, nz, dev_nx: device.nx, dev_ny: device.ny });
    }
    let mut m = VectorField::zeros(nx, ny);
    let mut i = 0;
    for (n, l) in lines {
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        if l.starts_with('#') {
            if l.to_ascii_lowercase().contains("end: data") {
                break;
            }
            continue;
        }
        if i >= m.len() {
            return Err(fail(n, "more data lines than cells"));
        }
        let mut it = l.split_whitespace().map(str::parse::<f64>);
        let mut next = || it.next().and_then(|v| v.ok()).ok_or_else(|| fail(n, "expected three numbers"));
        let (x, y, z) = (next()?, next()?, next()?);
        m.x[i] = x;
        m.y[i] = y;
        m.z[i] = z;
        i += 1;
    }
    if i != m.len() {
        return Err(fail(start, "fewer data lines than cells"));
    }
    Ok(MagnetizationState::from_field(device, m, time)?)
}

pub fn read_snapshot(path: &Path, device: &DeviceModel) -> Result<MagnetizationState, OvfError> {
    parse_snapshot(&fs::read_to_string(path)?, device)
}

#[cfg(test)]
mod tests {
    use super::*;
    use skysyn_core::{CorePolarity, DeviceConfig, MaterialParams, Vec3};

    fn device() -> (DeviceModel, MaterialParams) {
        let p = MaterialParams::default();
        (DeviceModel::build(&DeviceConfig::default(), &p).unwrap(), p)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (d, p) = device();
        let mut s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        s.seed_skyrmion(&d, &p, (100e-9, 60e-9), 10e-9, CorePolarity::Down).unwrap();
        s.time = 1.234e-9;
        let back = parse_snapshot(&format_snapshot(&s, &d), &d).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn uniform_state_has_identical_data_lines() {
        let (d, _) = device();
        let s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        let text = format_snapshot(&s, &d);
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 264 * 60);
        assert!(data.iter().all(|l| *l == "0 0 1"));
        assert!(text.contains("# xnodes: 264") && text.contains("# valuedim: 3"));
    }

    #[test]
    fn rejects_wrong_grid_and_truncated_data() {
        let (d, p) = device();
        let s = MagnetizationState::uniform(&d, Vec3::Z).unwrap();
        let text = format_snapshot(&s, &d);
        let small = DeviceModel::build(&DeviceConfig { length: 264e-9, ..Default::default() }, &p).unwrap();
        assert!(matches!(parse_snapshot(&text, &small), Err(OvfError::Mismatch { .. })));
        let cut: String = text.lines().take(100).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_snapshot(&cut, &d), Err(OvfError::Format { .. })));
        assert!(parse_snapshot("hello", &d).is_err());
    }
}
