//! File formats: pattern CSV, trace CSV, sample CSVs, SVG trace plots.
//!
//! Floats are written with 17 significant digits so files re-read to the
//! identical values.

pub mod config;
pub mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::anneal::TraceRecord;
use crate::error::{Error, Result};
use crate::model::ParamVector;
use crate::pattern::{Point, PointPattern, SufficientStats, Window};

pub use config::AppConfig;

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_float(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value {field:?}")));
    }
    Ok(v)
}

/// Header `x,y`, then one point per row.
pub fn pattern_to_csv(pattern: &PointPattern) -> String {
    let mut out = String::from("x,y\n");
    for p in pattern.points() {
        let _ = writeln!(out, "{},{}", fmt_f64(p.x), fmt_f64(p.y));
    }
    out
}

pub fn parse_pattern_csv(path: &Path, text: &str, window: Window) -> Result<PointPattern> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x,y" => {}
        Some((_, h)) => {
            return Err(parse_err(
                path,
                1,
                format!("expected header `x,y`, got {h:?}"),
            ))
        }
        None => return Err(parse_err(path, 1, "missing header `x,y`")),
    }
    let mut pattern = PointPattern::empty(window);
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 2 fields, got {}", fields.len()),
            ));
        }
        let p = Point::new(
            parse_float(path, lineno, fields[0])?,
            parse_float(path, lineno, fields[1])?,
        );
        pattern
            .push(p)
            .map_err(|e| parse_err(path, lineno, e.to_string()))?;
    }
    Ok(pattern)
}

pub fn read_pattern_csv(path: &Path, window: Window) -> Result<PointPattern> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pattern_csv(path, &text, window)
}

pub fn write_pattern_csv(path: &Path, pattern: &PointPattern) -> Result<()> {
    write_file(path, &pattern_to_csv(pattern))
}

fn indexed_header(out: &mut String, prefix: &str, n: usize) {
    for i in 0..n {
        let _ = write!(out, ",{prefix}_{i}");
    }
}

fn push_values(out: &mut String, values: &[f64]) {
    for v in values {
        out.push(',');
        out.push_str(&fmt_f64(*v));
    }
}

/// `iter,theta_0,..,temperature,delta_0,..,accept_rate,aux_stat_0,..`.
pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let d = trace.first().map_or(2, |r| r.theta.len());
    let mut out = String::from("iter");
    indexed_header(&mut out, "theta", d);
    out.push_str(",temperature");
    indexed_header(&mut out, "delta", d);
    out.push_str(",accept_rate");
    indexed_header(&mut out, "aux_stat", d);
    out.push('\n');
    for r in trace {
        let _ = write!(out, "{}", r.iter);
        push_values(&mut out, &r.theta);
        push_values(&mut out, &[r.temperature]);
        push_values(&mut out, &r.delta);
        push_values(&mut out, &[r.accept_rate]);
        push_values(&mut out, &r.aux_stats);
        out.push('\n');
    }
    out
}

pub fn parse_trace_csv(path: &Path, text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty trace file"))?
        .1;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let d = cols.iter().filter(|c| c.starts_with("theta_")).count();
    let mut expected = vec!["iter".to_string()];
    expected.extend((0..d).map(|i| format!("theta_{i}")));
    expected.push("temperature".into());
    expected.extend((0..d).map(|i| format!("delta_{i}")));
    expected.push("accept_rate".into());
    expected.extend((0..d).map(|i| format!("aux_stat_{i}")));
    if d == 0 || cols != expected {
        return Err(parse_err(
            path,
            1,
            format!("unexpected trace header {header:?}"),
        ));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != expected.len() {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {} fields, got {}", expected.len(), f.len()),
            ));
        }
        let iter = f[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad iteration {:?}", f[0])))?;
        let nums = f[1..]
            .iter()
            .map(|s| parse_float(path, lineno, s))
            .collect::<Result<Vec<_>>>()?;
        out.push(TraceRecord {
            iter,
            theta: nums[..d].to_vec(),
            temperature: nums[d],
            delta: nums[d + 1..2 * d + 1].to_vec(),
            accept_rate: nums[2 * d + 1],
            aux_stats: nums[2 * d + 2..].to_vec(),
        });
    }
    Ok(out)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace_csv(path, &text)
}

/// `sweep,theta_0,..`, one row per posterior sample.
pub fn samples_to_csv(samples: &[ParamVector]) -> String {
    let d = samples.first().map_or(0, |s| s.len());
    let mut out = String::from("sweep");
    indexed_header(&mut out, "theta", d);
    out.push('\n');
    for (i, s) in samples.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        push_values(&mut out, s.values());
        out.push('\n');
    }
    out
}

/// `sample,stat_0,..`, one row per reference sample.
pub fn stats_to_csv(samples: &[SufficientStats]) -> String {
    let d = samples.first().map_or(0, |s| s.len());
    let mut out = String::from("sample");
    indexed_header(&mut out, "stat", d);
    out.push('\n');
    for (i, s) in samples.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        push_values(&mut out, s.values());
        out.push('\n');
    }
    out
}

/// Reads the numeric columns of a `samples_to_csv`/`stats_to_csv` file.
pub fn read_numeric_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split(',')
                .skip(1)
                .map(|f| parse_float(path, i + 1, f))
                .collect()
        })
        .collect()
}
