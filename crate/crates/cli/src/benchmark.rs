//! The benchmark matrix: (group × overlap × replicate × method) fits
//! with deterministic per-dataset streams, long-format and aggregated
//! CSV output.

use crate::error::{io_error, AppError, AppResult};
use crate::method::Method;
use gmix_core::{
    attainment, avg_log_d, avg_p, d_criterion, dataset_rng, draw_mixture, run_em, sample_mixture,
    EmConfig, GroupSpec,
};
use rayon::prelude::*;
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// On-disk benchmark configuration (TOML).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    groups: Vec<u8>,
    ov_values: Vec<f64>,
    replicates: usize,
    n: usize,
    k: usize,
    methods: Vec<String>,
    master_seed: u64,
    #[serde(default)]
    em: EmSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmSection {
    sigma_min: Option<f64>,
    alpha_min: Option<f64>,
    max_iters: Option<usize>,
    rel_tol: Option<f64>,
}

/// A validated benchmark plan.
#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub groups: Vec<u8>,
    pub ov_values: Vec<f64>,
    pub replicates: usize,
    pub n: usize,
    pub k: usize,
    pub methods: Vec<Method>,
    pub em: EmConfig,
    pub master_seed: u64,
}

impl BenchmarkPlan {
    pub fn from_toml_str(text: &str) -> AppResult<Self> {
        let file: ConfigFile = toml::from_str(text)
            .map_err(|e| AppError::Input(format!("benchmark config: {e}")))?;
        if file.groups.is_empty() {
            return Err(AppError::Input("benchmark config: groups must be nonempty".into()));
        }
        if file.ov_values.is_empty() {
            return Err(AppError::Input(
                "benchmark config: ov_values must be nonempty".into(),
            ));
        }
        if file.replicates == 0 {
            return Err(AppError::Input(
                "benchmark config: replicates must be at least 1".into(),
            ));
        }
        if file.methods.is_empty() {
            return Err(AppError::Input(
                "benchmark config: methods must be nonempty".into(),
            ));
        }
        let methods = file
            .methods
            .iter()
            .map(|m| Method::parse(m))
            .collect::<AppResult<Vec<_>>>()?;
        let base = EmConfig::simulation();
        let em = EmConfig::new(
            file.em.sigma_min.unwrap_or(base.sigma_min),
            file.em.alpha_min.unwrap_or(base.alpha_min),
            file.em.max_iters.unwrap_or(base.max_iters),
            file.em.rel_tol.unwrap_or(base.rel_tol),
        )
        .map_err(|e| AppError::Input(format!("benchmark config: {e}")))?;
        // Constructing every scenario up front surfaces bad groups, ov
        // values, n, or k before any work starts.
        for &g in &file.groups {
            for &ov in &file.ov_values {
                GroupSpec::standard_group(g, file.k, ov, file.n, file.master_seed)
                    .map_err(|e| AppError::Input(format!("benchmark config: {e}")))?;
            }
        }
        Ok(BenchmarkPlan {
            groups: file.groups,
            ov_values: file.ov_values,
            replicates: file.replicates,
            n: file.n,
            k: file.k,
            methods,
            em,
            master_seed: file.master_seed,
        })
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// One method's result on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRow {
    pub group: u8,
    pub ov: f64,
    pub replicate: usize,
    pub method: String,
    pub log_d: Option<f64>,
    pub loglik: Option<f64>,
    pub attained: bool,
    pub iterations: Option<usize>,
    pub wall_ms: f64,
    pub failed: bool,
}

/// One method's aggregate over the replicates of a (group, ov) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: u8,
    pub ov: f64,
    pub method: String,
    pub avg_log_d: Option<f64>,
    pub avg_p: f64,
}

#[derive(Debug)]
pub struct BenchmarkResults {
    pub long: Vec<LongRow>,
    pub summary: Vec<SummaryRow>,
    pub failures: usize,
}

#[derive(Debug, Clone)]
struct MethodOutcome {
    d: Option<f64>,
    loglik: Option<f64>,
    iterations: Option<usize>,
    wall_ms: f64,
    failed: bool,
    attained: bool,
}

/// Runs every method on the dataset drawn for this cell. A method's
/// failure produces a flagged outcome and never disturbs the others —
/// each method starts from the same immutable dataset.
fn run_cell(plan: &BenchmarkPlan, dataset_index: u64, group: u8, ov: f64) -> Vec<MethodOutcome> {
    let spec = GroupSpec::standard_group(group, plan.k, ov, plan.n, plan.master_seed)
        .expect("plan validated at load time");
    let mut rng = dataset_rng(plan.master_seed, dataset_index);
    let truth = draw_mixture(&spec, &mut rng);
    let data = sample_mixture(&truth, plan.n, &mut rng).expect("n validated at load time");

    let mut outcomes = Vec::with_capacity(plan.methods.len());
    for method in &plan.methods {
        let start = Instant::now();
        let fitted = method
            .initial_params(&data, plan.k, plan.em.sigma_min)
            .and_then(|init| run_em(&data, &init, &plan.em));
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        outcomes.push(match fitted {
            Ok(fit) => MethodOutcome {
                d: Some(d_criterion(&truth, &fit.params, plan.n as f64)),
                loglik: Some(fit.loglik()),
                iterations: Some(fit.iterations),
                wall_ms,
                failed: false,
                attained: false,
            },
            Err(_) => MethodOutcome {
                d: None,
                loglik: None,
                iterations: None,
                wall_ms,
                failed: true,
                attained: false,
            },
        });
    }
    // Attainment compares the methods that produced a likelihood.
    let successes: Vec<f64> = outcomes.iter().filter_map(|o| o.loglik).collect();
    if !successes.is_empty() {
        let flags = attainment(&successes);
        let mut flags = flags.into_iter();
        for outcome in outcomes.iter_mut().filter(|o| !o.failed) {
            outcome.attained = flags.next().expect("one flag per successful method");
        }
    }
    outcomes
}

/// Runs the whole matrix. Datasets are independent and fan out across
/// the worker pool; row order is fixed by the configuration, not by
/// scheduling.
pub fn run_benchmark(plan: &BenchmarkPlan) -> BenchmarkResults {
    let mut cells = Vec::new();
    let mut index = 0u64;
    for &group in &plan.groups {
        for &ov in &plan.ov_values {
            for replicate in 1..=plan.replicates {
                cells.push((index, group, ov, replicate));
                index += 1;
            }
        }
    }

    let per_cell: Vec<Vec<MethodOutcome>> = cells
        .par_iter()
        .map(|&(idx, group, ov, _)| run_cell(plan, idx, group, ov))
        .collect();

    let labels: Vec<String> = plan.methods.iter().map(Method::label).collect();
    let mut long = Vec::with_capacity(cells.len() * labels.len());
    for ((_, group, ov, replicate), outcomes) in cells.iter().zip(&per_cell) {
        for (label, o) in labels.iter().zip(outcomes) {
            long.push(LongRow {
                group: *group,
                ov: *ov,
                replicate: *replicate,
                method: label.clone(),
                log_d: o.d.map(|d| d.max(1e-300).ln()),
                loglik: o.loglik,
                attained: o.attained,
                iterations: o.iterations,
                wall_ms: o.wall_ms,
                failed: o.failed,
            });
        }
    }

    let mut summary = Vec::new();
    let mut base = 0usize;
    for &group in &plan.groups {
        for &ov in &plan.ov_values {
            let cell_outcomes = &per_cell[base..base + plan.replicates];
            let matrix: Vec<Vec<bool>> = cell_outcomes
                .iter()
                .map(|outcomes| outcomes.iter().map(|o| o.attained).collect())
                .collect();
            let proportions = avg_p(&matrix);
            for (m, label) in labels.iter().enumerate() {
                let ds: Vec<f64> = cell_outcomes
                    .iter()
                    .filter_map(|outcomes| outcomes[m].d)
                    .collect();
                summary.push(SummaryRow {
                    group,
                    ov,
                    method: label.clone(),
                    avg_log_d: if ds.is_empty() { None } else { Some(avg_log_d(&ds)) },
                    avg_p: proportions[m],
                });
            }
            base += plan.replicates;
        }
    }

    let failures = long.iter().filter(|r| r.failed).count();
    BenchmarkResults { long, summary, failures }
}

fn opt(value: Option<impl ToString>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn render_long_csv(rows: &[LongRow]) -> String {
    let mut out = String::from("group,ov,replicate,method,logD,loglik,attained,iterations,wall_ms,failed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.group,
            r.ov,
            r.replicate,
            r.method,
            opt(r.log_d),
            opt(r.loglik),
            r.attained,
            opt(r.iterations),
            r.wall_ms,
            r.failed
        );
    }
    out
}

pub fn render_summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("group,ov,method,AvgLogD,AvgP\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.group,
            r.ov,
            r.method,
            opt(r.avg_log_d),
            r.avg_p
        );
    }
    out
}

pub struct BenchmarkOutcome {
    pub results: BenchmarkResults,
    pub long_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary_text: String,
}

/// Loads the config, runs the matrix, and writes `benchmark_long.csv`
/// and `benchmark_summary.csv` into the output directory.
pub fn cmd_benchmark(config: &Path, out_dir: &Path) -> AppResult<BenchmarkOutcome> {
    let plan = BenchmarkPlan::load(config)?;
    let results = run_benchmark(&plan);
    let long_path = out_dir.join("benchmark_long.csv");
    let summary_path = out_dir.join("benchmark_summary.csv");
    std::fs::write(&long_path, render_long_csv(&results.long))
        .map_err(|e| io_error(&long_path, e))?;
    std::fs::write(&summary_path, render_summary_csv(&results.summary))
        .map_err(|e| io_error(&summary_path, e))?;

    let datasets = plan.groups.len() * plan.ov_values.len() * plan.replicates;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "ran {} fits ({datasets} datasets x {} methods), {} failed",
        results.long.len(),
        plan.methods.len(),
        results.failures
    );
    let _ = writeln!(text, "long table -> {}", long_path.display());
    let _ = writeln!(text, "aggregates -> {}", summary_path.display());
    Ok(BenchmarkOutcome { results, long_path, summary_path, summary_text: text })
}
