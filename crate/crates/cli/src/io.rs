//! File formats: points CSV, multi-sample spectra TSV, human-readable
//! model files, and the small range/flag parsers shared by subcommands.

use crate::error::{io_error, AppError, AppResult};
use gmix_core::{ClampEvent, ClampKind, MixtureParams, WeightedSample};
use std::fmt::Write as _;
use std::path::Path;

/// Supported input layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// CSV of `x[,y]` rows (optional header); `y` defaults to 1.
    PointsCsv,
    /// TSV with a header row: column 1 = position, columns 2.. = one
    /// intensity series per sample, on a uniform position grid.
    SpectraTsv,
}

/// Reads a points CSV: rows of `x` or `x,y`, an optional header line,
/// duplicate positions merged by summing their weights.
pub fn read_points_csv(path: &Path) -> AppResult<WeightedSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;

    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(idx as u64 + 1);
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        if record.len() > 2 {
            return Err(AppError::Input(format!(
                "{}: line {line}: expected 1 or 2 columns, found {}",
                path.display(),
                record.len()
            )));
        }
        let x: f64 = match record[0].parse() {
            Ok(v) => v,
            Err(_) if idx == 0 => continue, // header line
            Err(_) => {
                return Err(AppError::Input(format!(
                    "{}: line {line}: cannot parse {:?} as a number",
                    path.display(),
                    &record[0]
                )))
            }
        };
        let y: f64 = match record.get(1) {
            None | Some("") => 1.0,
            Some(text) => text.parse().map_err(|_| {
                AppError::Input(format!(
                    "{}: line {line}: cannot parse {text:?} as a weight",
                    path.display()
                ))
            })?,
        };
        pairs.push((x, y));
    }
    if pairs.is_empty() {
        return Err(AppError::Input(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut xs: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut ys: Vec<f64> = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        match xs.last() {
            Some(&last) if last == x => *ys.last_mut().expect("parallel vectors") += y,
            _ => {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    WeightedSample::new(xs, ys, None)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

/// Writes a points CSV with an `x,y` header.
pub fn write_points_csv(path: &Path, data: &WeightedSample) -> AppResult<()> {
    let mut out = String::from("x,y\n");
    for (x, y) in data.xs().iter().zip(data.ys()) {
        let _ = writeln!(out, "{x},{y}");
    }
    std::fs::write(path, out).map_err(|e| io_error(path, e))
}

/// A parsed spectra file: one weighted sample per intensity column.
#[derive(Debug)]
pub struct SpectraData {
    pub samples: Vec<WeightedSample>,
    /// Column headers naming the samples.
    pub names: Vec<String>,
    /// Number of negative intensity cells clipped to zero.
    pub clipped: usize,
}

/// Reads a spectra TSV: header row, position column, one intensity
/// column per sample, positions on a uniform grid (tolerance 1e-6
/// relative). Negative intensities clip to zero (counted); `range`
/// restricts rows to `lo ≤ x ≤ hi` inclusive.
pub fn read_spectra(path: &Path, range: Option<(f64, f64)>) -> AppResult<SpectraData> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
    if headers.len() < 2 {
        return Err(AppError::Input(format!(
            "{}: need a position column and at least one sample column",
            path.display()
        )));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let s = names.len();

    let mut xs: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); s];
    let mut clipped = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != s + 1 {
            return Err(AppError::Input(format!(
                "{}: line {line}: expected {} columns, found {}",
                path.display(),
                s + 1,
                record.len()
            )));
        }
        let cell = |col: usize| -> AppResult<f64> {
            record[col].parse().map_err(|_| {
                AppError::Input(format!(
                    "{}: line {line}, column {}: cannot parse {:?} as a number",
                    path.display(),
                    col + 1,
                    &record[col]
                ))
            })
        };
        let x = cell(0)?;
        let mut row = Vec::with_capacity(s);
        for col in 0..s {
            let mut y = cell(col + 1)?;
            if y < 0.0 {
                y = 0.0;
                clipped += 1;
            }
            row.push(y);
        }
        xs.push(x);
        for (column, y) in columns.iter_mut().zip(row) {
            column.push(y);
        }
    }
    if xs.len() < 2 {
        return Err(AppError::Input(format!(
            "{}: need at least 2 rows to infer the bin step",
            path.display()
        )));
    }

    // The whole file must sit on one uniform grid before any filtering.
    let base = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if !(base.is_finite() && base > 0.0) {
        return Err(AppError::Input(format!(
            "{}: positions must be strictly increasing",
            path.display()
        )));
    }
    for (i, w) in xs.windows(2).enumerate() {
        let step = w[1] - w[0];
        if (step - base).abs() > 1e-6 * base {
            return Err(AppError::Input(format!(
                "{}: rows {}-{}: step {step} deviates from the uniform step {base}",
                path.display(),
                i + 2,
                i + 3
            )));
        }
    }

    let keep: Vec<usize> = match range {
        Some((lo, hi)) => (0..xs.len()).filter(|&i| xs[i] >= lo && xs[i] <= hi).collect(),
        None => (0..xs.len()).collect(),
    };
    if keep.is_empty() {
        let (lo, hi) = range.expect("only a filter can empty the rows");
        return Err(AppError::Input(format!(
            "{}: no rows inside the range {lo}..{hi}",
            path.display()
        )));
    }
    let kept_xs: Vec<f64> = keep.iter().map(|&i| xs[i]).collect();

    let mut samples = Vec::with_capacity(s);
    for (j, column) in columns.iter().enumerate() {
        let ys: Vec<f64> = keep.iter().map(|&i| column[i]).collect();
        let sample = WeightedSample::new(kept_xs.clone(), ys, Some(base)).map_err(|e| {
            AppError::Input(format!(
                "{}: sample {} ({}): {e}",
                path.display(),
                j + 1,
                names[j]
            ))
        })?;
        samples.push(sample);
    }
    Ok(SpectraData { samples, names, clipped })
}

/// A fitted model as stored on disk.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub method: String,
    pub params: MixtureParams,
    pub loglik: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub clamp_events: Vec<ClampEvent>,
}

fn clamp_kind_label(kind: ClampKind) -> &'static str {
    match kind {
        ClampKind::SigmaFloor => "sigma-floor",
        ClampKind::AlphaFloor => "alpha-floor",
        ClampKind::ZeroMass => "zero-mass-restart",
        ClampKind::NumericRescue => "numeric-rescue",
    }
}

/// Renders the model file text: `key = value` lines, floats at full
/// round-trip precision.
pub fn render_model(model: &ModelFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method = {}", model.method);
    let _ = writeln!(out, "components = {}", model.params.k());
    let _ = writeln!(out, "loglik = {}", model.loglik);
    let _ = writeln!(out, "bic = {}", model.bic);
    let _ = writeln!(out, "iterations = {}", model.iterations);
    let _ = writeln!(out, "converged = {}", model.converged);
    for i in 0..model.params.k() {
        let _ = writeln!(out, "weight.{} = {}", i + 1, model.params.weights()[i]);
        let _ = writeln!(out, "mean.{} = {}", i + 1, model.params.means()[i]);
        let _ = writeln!(out, "std.{} = {}", i + 1, model.params.stds()[i]);
    }
    let _ = writeln!(out, "clamp_events = {}", model.clamp_events.len());
    for (i, ev) in model.clamp_events.iter().enumerate() {
        let _ = writeln!(
            out,
            "clamp.{} = iteration={} component={} kind={}",
            i + 1,
            ev.iteration,
            ev.component + 1,
            clamp_kind_label(ev.kind)
        );
    }
    out
}

pub fn write_model(path: &Path, model: &ModelFile) -> AppResult<()> {
    std::fs::write(path, render_model(model)).map_err(|e| io_error(path, e))
}

/// Parses a model file back; clamp detail lines are not reconstructed
/// into events (the file remains the record of those).
pub fn read_model(path: &Path) -> AppResult<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut fields = std::collections::HashMap::<String, String>::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            AppError::Input(format!(
                "{}: line {}: expected `key = value`, got {line:?}",
                path.display(),
                i + 1
            ))
        })?;
        fields.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    let get = |key: &str| -> AppResult<&String> {
        fields
            .get(key)
            .ok_or_else(|| AppError::Input(format!("{}: missing key {key:?}", path.display())))
    };
    let parse_f64 = |key: &str| -> AppResult<f64> {
        get(key)?.parse().map_err(|_| {
            AppError::Input(format!(
                "{}: key {key:?} is not a number: {:?}",
                path.display(),
                fields[key]
            ))
        })
    };
    let k: usize = get("components")?.parse().map_err(|_| {
        AppError::Input(format!("{}: bad components count", path.display()))
    })?;
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut stds = Vec::with_capacity(k);
    for i in 1..=k {
        weights.push(parse_f64(&format!("weight.{i}"))?);
        means.push(parse_f64(&format!("mean.{i}"))?);
        stds.push(parse_f64(&format!("std.{i}"))?);
    }
    let params = MixtureParams::new(weights, means, stds)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
    Ok(ModelFile {
        method: get("method")?.clone(),
        params,
        loglik: parse_f64("loglik")?,
        bic: parse_f64("bic")?,
        iterations: get("iterations")?.parse().map_err(|_| {
            AppError::Input(format!("{}: bad iterations count", path.display()))
        })?,
        converged: get("converged")?.parse().map_err(|_| {
            AppError::Input(format!("{}: bad converged flag", path.display()))
        })?,
        clamp_events: Vec::new(),
    })
}

/// Parses an inclusive integer range written as `a..b` (e.g. `1..6`).
pub fn parse_k_range(text: &str) -> AppResult<(usize, usize)> {
    let (a, b) = text.split_once("..").ok_or_else(|| {
        AppError::Input(format!("range {text:?} must look like a..b"))
    })?;
    let lo: usize = a.trim().parse().map_err(|_| {
        AppError::Input(format!("range start {a:?} is not a count"))
    })?;
    let hi: usize = b.trim().parse().map_err(|_| {
        AppError::Input(format!("range end {b:?} is not a count"))
    })?;
    if lo == 0 || hi < lo {
        return Err(AppError::Input(format!(
            "range {text:?} must satisfy 1 <= a <= b"
        )));
    }
    Ok((lo, hi))
}

/// Parses an inclusive position window written as `lo..hi`.
pub fn parse_x_range(text: &str) -> AppResult<(f64, f64)> {
    let (a, b) = text.split_once("..").ok_or_else(|| {
        AppError::Input(format!("range {text:?} must look like lo..hi"))
    })?;
    let lo: f64 = a.trim().parse().map_err(|_| {
        AppError::Input(format!("range start {a:?} is not a number"))
    })?;
    let hi: f64 = b.trim().parse().map_err(|_| {
        AppError::Input(format!("range end {b:?} is not a number"))
    })?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(AppError::Input(format!(
            "range {text:?} must satisfy lo < hi"
        )));
    }
    Ok((lo, hi))
}
