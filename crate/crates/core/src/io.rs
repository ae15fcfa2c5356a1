//! Curve files (JSON), optimization traces (CSV) and run manifests.
//!
//! All floating-point values are written with 17 significant digits so a
//! save/load cycle reproduces every coordinate bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{ClosedCurve, Vec3};
use crate::optimize::{CriticalityReport, OptimizationTrace, TraceRow};

pub const FORMAT_VERSION: u64 = 1;

pub const TRACE_HEADER: &str = "iter,S_alpha,E_alpha,length,grad_sym_rms,grad_full_rms,bilip,step";

/// Shortest exact decimal form with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn curve_to_json(curve: &ClosedCurve, metadata: Option<&Map<String, Value>>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{{\n  \"format_version\": {FORMAT_VERSION},\n  \"n\": {},", curve.len());
    s.push_str("  \"points\": [\n");
    for (i, p) in curve.points().iter().enumerate() {
        let sep = if i + 1 == curve.len() { "" } else { "," };
        let _ = writeln!(s, "    [{}, {}, {}]{sep}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    s.push_str("  ],\n  \"metadata\": ");
    let meta = metadata.map(|m| Value::Object(m.clone())).unwrap_or(Value::Object(Map::new()));
    s.push_str(&serde_json::to_string(&meta).expect("metadata serializes"));
    s.push_str("\n}\n");
    s
}

pub fn save_curve(curve: &ClosedCurve, path: &Path, metadata: Option<&Map<String, Value>>) -> Result<()> {
    fs::write(path, curve_to_json(curve, metadata)).map_err(io_err(path))
}

pub fn load_curve(path: &Path) -> Result<ClosedCurve> {
    Ok(load_curve_with_metadata(path)?.0)
}

pub fn load_curve_with_metadata(path: &Path) -> Result<(ClosedCurve, Map<String, Value>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_curve(&text).map_err(|msg| format_err(path, msg))
}

/// Parses a curve document; errors are plain messages naming the offending
/// key or index.
pub fn parse_curve(text: &str) -> std::result::Result<(ClosedCurve, Map<String, Value>), String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = doc.as_object().ok_or("top level must be an object")?;
    let version = obj
        .get("format_version")
        .ok_or("missing key format_version")?
        .as_u64()
        .ok_or("format_version must be a non-negative integer")?;
    if version != FORMAT_VERSION {
        return Err(format!("unsupported format_version {version}"));
    }
    let n = obj
        .get("n")
        .ok_or("missing key n")?
        .as_u64()
        .ok_or("n must be a non-negative integer")? as usize;
    let raw = obj
        .get("points")
        .ok_or("missing key points")?
        .as_array()
        .ok_or("points must be an array")?;
    if raw.len() != n {
        return Err(format!("n = {n} but points has {} entries", raw.len()));
    }
    if n < 4 {
        return Err(format!("n = {n}; a closed curve needs at least 4 points"));
    }
    let mut points = Vec::with_capacity(n);
    for (i, p) in raw.iter().enumerate() {
        let triple = p
            .as_array()
            .filter(|t| t.len() == 3)
            .ok_or_else(|| format!("points[{i}] must be an array of 3 numbers"))?;
        let mut xyz = [0.0; 3];
        for (c, v) in triple.iter().enumerate() {
            xyz[c] = v.as_f64().ok_or_else(|| format!("points[{i}][{c}] is not a number"))?;
        }
        points.push(Vec3::from(xyz));
    }
    let metadata = match obj.get("metadata") {
        None | Some(Value::Null) => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err("metadata must be an object".into()),
    };
    let curve = ClosedCurve::new(points).map_err(|e| e.to_string())?;
    Ok((curve, metadata))
}

pub fn trace_to_csv(trace: &OptimizationTrace) -> String {
    let mut s = String::with_capacity(64 + trace.len() * 200);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &trace.rows {
        let vals = [
            r.scaled,
            r.energy,
            r.length,
            r.grad_sym_rms,
            r.grad_full_rms,
            r.bilip,
            r.step,
        ];
        s.push_str(&r.iter.to_string());
        for v in vals {
            s.push(',');
            s.push_str(&fmt_f64(v));
        }
        s.push('\n');
    }
    s
}

pub fn write_trace(trace: &OptimizationTrace, path: &Path) -> Result<()> {
    fs::write(path, trace_to_csv(trace)).map_err(io_err(path))
}

pub fn read_trace(path: &Path) -> Result<OptimizationTrace> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(format_err(path, "trace header mismatch"));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = || format_err(path, format!("trace row {k} is malformed"));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad());
        }
        let iter = f[0].parse().map_err(|_| bad())?;
        let mut v = [0.0; 7];
        for (slot, s) in v.iter_mut().zip(&f[1..]) {
            *slot = s.parse().map_err(|_| bad())?;
        }
        rows.push(TraceRow {
            iter,
            scaled: v[0],
            energy: v[1],
            length: v[2],
            grad_sym_rms: v[3],
            grad_full_rms: v[4],
            bilip: v[5],
            step: v[6],
        });
    }
    Ok(OptimizationTrace { rows })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| format_err(path, e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

/// Record of one CLI invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub parameters: Value,
    pub threads: usize,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub termination: Option<String>,
    pub iterations: Option<usize>,
    pub report: Option<CriticalityReport>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            parameters,
            threads: rayon::current_num_threads(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
            termination: None,
            iterations: None,
            report: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_roundtrips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 5e-324] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn parse_errors_name_the_problem() {
        let err = parse_curve("[1,2]").unwrap_err();
        assert!(err.contains("object"));
        let err = parse_curve(r#"{"format_version":1,"n":5,"points":[[0,0,0],[1,0,0],[1,1,0],[0,1,0]]}"#)
            .unwrap_err();
        assert!(err.contains("n = 5"));
        let err = parse_curve(r#"{"format_version":1,"n":4,"points":[[0,0,0],[1,0,0],[1,"x",0],[0,1,0]]}"#)
            .unwrap_err();
        assert!(err.contains("points[2][1]"));
    }
}
