//! The fit, scan-k and simulate subcommands as testable functions.

use crate::error::{io_error, AppError, AppResult};
use crate::io::{
    read_points_csv, read_spectra, write_model, write_points_csv, InputFormat, ModelFile,
};
use crate::method::Method;
use gmix_core::{
    bic, dataset_rng, draw_mixture, log_likelihood, run_em, sample_mixture, EmConfig, FitResult,
    GroupSpec, MixtureParams, WeightedSample,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Loads the input file into one or more samples plus display names.
/// Points CSV yields one unnamed sample; spectra TSV yields one per
/// intensity column.
pub fn load_input(
    input: &Path,
    format: InputFormat,
    range: Option<(f64, f64)>,
) -> AppResult<(Vec<WeightedSample>, Vec<String>, usize)> {
    match format {
        InputFormat::PointsCsv => {
            if range.is_some() {
                return Err(AppError::Input(
                    "--range applies only to --format spectra-tsv".into(),
                ));
            }
            let data = read_points_csv(input)?;
            Ok((vec![data], vec![String::new()], 0))
        }
        InputFormat::SpectraTsv => {
            let spectra = read_spectra(input, range)?;
            Ok((spectra.samples, spectra.names, spectra.clipped))
        }
    }
}

fn input_stem(input: &Path) -> String {
    input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into())
}

fn fit_once(
    data: &WeightedSample,
    method: &Method,
    k: usize,
    em: &EmConfig,
) -> gmix_core::Result<FitResult> {
    let init = method.initial_params(data, k, em.sigma_min)?;
    run_em(data, &init, em)
}

fn model_from_fit(method: &Method, k: usize, data: &WeightedSample, fit: FitResult) -> ModelFile {
    let loglik = fit.loglik();
    ModelFile {
        method: method.label(),
        params: fit.params,
        loglik,
        bic: bic(loglik, k, data.total_weight()),
        iterations: fit.iterations,
        converged: fit.converged,
        clamp_events: fit.clamp_events,
    }
}

pub struct FitArgs {
    pub input: PathBuf,
    pub format: InputFormat,
    pub method: Method,
    pub k: usize,
    pub em: EmConfig,
    pub range: Option<(f64, f64)>,
    pub out_dir: PathBuf,
}

pub struct FitOutcome {
    pub model_paths: Vec<PathBuf>,
    pub summary: String,
}

/// Fits every sample in the input and writes one model file each:
/// `<stem>.model.txt`, or `<stem>.sample<i>.model.txt` when the input
/// holds several samples.
pub fn cmd_fit(args: &FitArgs) -> AppResult<FitOutcome> {
    let (samples, names, clipped) = load_input(&args.input, args.format, args.range)?;
    let stem = input_stem(&args.input);
    let multi = samples.len() > 1;
    let mut model_paths = Vec::with_capacity(samples.len());
    let mut summary = String::new();
    if clipped > 0 {
        let _ = writeln!(summary, "warning: clipped {clipped} negative intensity cells to 0");
    }
    for (i, data) in samples.iter().enumerate() {
        let fit = fit_once(data, &args.method, args.k, &args.em).map_err(|e| {
            if multi {
                annotate_sample(e.into(), i + 1, &names[i])
            } else {
                e.into()
            }
        })?;
        let model = model_from_fit(&args.method, args.k, data, fit);
        let file_name = if multi {
            format!("{stem}.sample{}.model.txt", i + 1)
        } else {
            format!("{stem}.model.txt")
        };
        let path = args.out_dir.join(file_name);
        write_model(&path, &model)?;
        let label = if multi {
            format!("sample {} ({})", i + 1, names[i])
        } else {
            stem.clone()
        };
        let _ = writeln!(
            summary,
            "{label}: method={} k={} loglik={} bic={} iterations={} converged={} clamp_events={} -> {}",
            model.method,
            args.k,
            model.loglik,
            model.bic,
            model.iterations,
            model.converged,
            model.clamp_events.len(),
            path.display()
        );
        model_paths.push(path);
    }
    Ok(FitOutcome { model_paths, summary })
}

fn annotate_sample(e: AppError, index: usize, name: &str) -> AppError {
    let wrap = |msg: String| format!("sample {index} ({name}): {msg}");
    match e {
        AppError::Input(m) => AppError::Input(wrap(m)),
        AppError::Infeasible(m) => AppError::Infeasible(wrap(m)),
        AppError::Diverged(m) => AppError::Diverged(wrap(m)),
    }
}

pub struct ScanArgs {
    pub input: PathBuf,
    pub format: InputFormat,
    pub method: Method,
    pub k_range: (usize, usize),
    pub em: EmConfig,
    pub range: Option<(f64, f64)>,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct ScanRow {
    pub k: usize,
    pub loglik: Option<f64>,
    pub bic: Option<f64>,
    pub failed: bool,
}

pub struct ScanOutcome {
    pub rows: Vec<ScanRow>,
    pub best_k: usize,
    pub table_path: PathBuf,
    pub model_path: PathBuf,
    pub summary: String,
}

/// Fits every component count in the inclusive range, writes the
/// `(k, loglik, bic)` table, and stores the model whose BIC is lowest.
/// Component counts whose fit fails stay in the table flagged as failed
/// and are skipped when choosing the best count.
pub fn cmd_scan_k(args: &ScanArgs) -> AppResult<ScanOutcome> {
    let (samples, _names, _clipped) = load_input(&args.input, args.format, args.range)?;
    if samples.len() != 1 {
        return Err(AppError::Input(format!(
            "scan-k needs a single-sample input; this file holds {} samples",
            samples.len()
        )));
    }
    let data = &samples[0];
    let stem = input_stem(&args.input);
    let (lo, hi) = args.k_range;

    let mut rows = Vec::with_capacity(hi - lo + 1);
    let mut best: Option<(usize, f64, FitResult)> = None;
    let mut last_error = None;
    for k in lo..=hi {
        match fit_once(data, &args.method, k, &args.em) {
            Ok(fit) => {
                let loglik = fit.loglik();
                let b = bic(loglik, k, data.total_weight());
                rows.push(ScanRow { k, loglik: Some(loglik), bic: Some(b), failed: false });
                let better = best.as_ref().map_or(true, |(_, best_b, _)| b < *best_b);
                if better {
                    best = Some((k, b, fit));
                }
            }
            Err(e) => {
                rows.push(ScanRow { k, loglik: None, bic: None, failed: true });
                last_error = Some(e);
            }
        }
    }

    let table_path = args.out_dir.join(format!("{stem}.scan.csv"));
    let mut table = String::from("k,loglik,bic,failed\n");
    for row in &rows {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            row.k,
            row.loglik.map(|v| v.to_string()).unwrap_or_default(),
            row.bic.map(|v| v.to_string()).unwrap_or_default(),
            row.failed
        );
    }
    std::fs::write(&table_path, table).map_err(|e| io_error(&table_path, e))?;

    let Some((best_k, _, fit)) = best else {
        let detail = last_error.map(|e| e.to_string()).unwrap_or_default();
        return Err(AppError::Infeasible(format!(
            "every component count in {lo}..{hi} failed to fit ({detail})"
        )));
    };
    let model = model_from_fit(&args.method, best_k, data, fit);
    let model_path = args.out_dir.join(format!("{stem}.best.model.txt"));
    write_model(&model_path, &model)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "scanned k={lo}..{hi}: best k={best_k} (bic={}) -> {}; table -> {}",
        model.bic,
        model_path.display(),
        table_path.display()
    );
    Ok(ScanOutcome { rows, best_k, table_path, model_path, summary })
}

pub struct SimulateArgs {
    pub group: u8,
    pub k: usize,
    pub ov: f64,
    pub n: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Output file stem; defaults to a name encoding the settings.
    pub name: Option<String>,
}

pub struct SimulateOutcome {
    pub data_path: PathBuf,
    pub truth_path: PathBuf,
    pub truth: MixtureParams,
    pub summary: String,
}

/// Renders ground-truth parameters as `key = value` text.
pub fn render_truth(params: &MixtureParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "components = {}", params.k());
    for i in 0..params.k() {
        let _ = writeln!(out, "weight.{} = {}", i + 1, params.weights()[i]);
        let _ = writeln!(out, "mean.{} = {}", i + 1, params.means()[i]);
        let _ = writeln!(out, "std.{} = {}", i + 1, params.stds()[i]);
    }
    out
}

/// Draws one dataset from a scenario and writes it as a points CSV plus
/// a ground-truth parameter file.
pub fn cmd_simulate(args: &SimulateArgs) -> AppResult<SimulateOutcome> {
    let spec = GroupSpec::standard_group(args.group, args.k, args.ov, args.n, args.seed)?;
    let mut rng = dataset_rng(args.seed, 0);
    let truth = draw_mixture(&spec, &mut rng);
    let data = sample_mixture(&truth, args.n, &mut rng)?;

    let stem = args.name.clone().unwrap_or_else(|| {
        format!(
            "sim-g{}-k{}-ov{}-n{}-seed{}",
            args.group, args.k, args.ov, args.n, args.seed
        )
    });
    let data_path = args.out_dir.join(format!("{stem}.csv"));
    let truth_path = args.out_dir.join(format!("{stem}.truth.txt"));
    write_points_csv(&data_path, &data)?;
    std::fs::write(&truth_path, render_truth(&truth)).map_err(|e| io_error(&truth_path, e))?;

    let loglik = log_likelihood(&data, &truth);
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "group {} k={} ov={} n={} seed={}: wrote {} and {} (loglik under truth: {loglik})",
        args.group,
        args.k,
        args.ov,
        args.n,
        args.seed,
        data_path.display(),
        truth_path.display()
    );
    Ok(SimulateOutcome { data_path, truth_path, truth, summary })
}
