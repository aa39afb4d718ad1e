//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line (visible with `--nocapture`).

use gmix_cli::benchmark::{
    cmd_benchmark, run_benchmark, BenchmarkPlan, BenchmarkResults, SummaryRow,
};
use gmix_cli::commands::{cmd_scan_k, cmd_simulate, ScanArgs, SimulateArgs};
use gmix_cli::io::InputFormat;
use gmix_cli::method::Method;
use gmix_core::{
    attainment, brute_force_partition, dataset_rng, dp_partition, draw_mixture, e_step_with_rescues,
    exact_binned_log_likelihood, log_likelihood, m_step, mixture_pdf, overlap, run_em,
    sample_mixture, spacing_from_overlap, EmConfig, GroupSpec, MixtureParams, ScoringSpec,
    WeightedSample,
};
use rand::Rng;
use std::sync::OnceLock;
use std::time::Instant;

fn criterion(number: usize, name: &str, check: impl FnOnce() -> Result<String, String>) {
    match check() {
        Ok(detail) if detail.is_empty() => println!("ACCEPTANCE {number} {name}: PASS"),
        Ok(detail) => println!("ACCEPTANCE {number} {name}: PASS ({detail})"),
        Err(msg) => {
            println!("ACCEPTANCE {number} {name}: FAIL ({msg})");
            panic!("acceptance criterion {number} ({name}) failed: {msg}");
        }
    }
}

// ---------------------------------------------------------------- 1 ----

#[test]
fn acceptance_01_optimal_partition_matches_exhaustive_search() {
    criterion(1, "optimal partition matches exhaustive search", || {
        let start = Instant::now();
        let mut rng = dataset_rng(101, 0);
        let specs = [
            ScoringSpec::q1(),
            ScoringSpec::q2(),
            ScoringSpec::q3(),
            ScoringSpec::q4(0.1).expect("positive delta"),
        ];
        let mut compared = 0usize;
        for instance in 0..200 {
            let n = rng.random_range(2..=12usize);
            let mut xs: Vec<f64> = Vec::with_capacity(n);
            let mut x = rng.random_range(-5.0..5.0);
            for _ in 0..n {
                x += rng.random_range(0.01..3.0);
                xs.push(x);
            }
            let ys: Vec<f64> = if instance % 2 == 0 {
                vec![1.0; n]
            } else {
                (0..n).map(|_| rng.random_range(1..=9) as f64).collect()
            };
            let data = WeightedSample::new(xs, ys, None).map_err(|e| e.to_string())?;
            let k = rng.random_range(1..=4.min(n));
            for spec in &specs {
                match (dp_partition(&data, k, spec), brute_force_partition(&data, k, spec)) {
                    (Ok((p_dp, s_dp)), Ok((p_bf, s_bf))) => {
                        let tol = 1e-12 * s_bf.abs().max(1e-12);
                        if (s_dp - s_bf).abs() > tol {
                            return Err(format!(
                                "instance {instance} {spec:?} k={k}: scores {s_dp} vs {s_bf}"
                            ));
                        }
                        if p_dp.boundaries() != p_bf.boundaries() {
                            return Err(format!(
                                "instance {instance} {spec:?} k={k}: partitions {:?} vs {:?}",
                                p_dp.boundaries(),
                                p_bf.boundaries()
                            ));
                        }
                        compared += 1;
                    }
                    (Err(_), Err(_)) => {}
                    (dp, bf) => {
                        return Err(format!(
                            "instance {instance} {spec:?} k={k}: feasibility disagreement \
                             (dp: {}, exhaustive: {})",
                            dp.is_ok(),
                            bf.is_ok()
                        ));
                    }
                }
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= 10.0 {
            return Err(format!("took {elapsed:.1}s, budget is 10s"));
        }
        Ok(format!("{compared} feasible comparisons in {elapsed:.2}s"))
    });
}

// ---------------------------------------------------------------- 2 ----

#[test]
fn acceptance_02_em_ascent_and_normalization() {
    criterion(2, "em ascent and normalization", || {
        let start = Instant::now();
        let em = EmConfig::simulation();
        let mut fits = 0usize;
        for group in 1..=4u8 {
            for rep in 0..25u64 {
                let ov = if rep % 2 == 0 { 0.1 } else { 0.2 };
                let spec = GroupSpec::standard_group(group, 5, ov, 150, 2000 + group as u64)
                    .map_err(|e| e.to_string())?;
                let mut rng = dataset_rng(spec.seed, rep);
                let truth = draw_mixture(&spec, &mut rng);
                let data = sample_mixture(&truth, spec.n, &mut rng).map_err(|e| e.to_string())?;
                let init = Method::parse("eq")
                    .map_err(|e| e.to_string())?
                    .initial_params(&data, 5, em.sigma_min)
                    .map_err(|e| e.to_string())?;

                // Drive the loop by hand so every intermediate is open to
                // inspection.
                let mut params = init.clone();
                for _ in 0..30 {
                    let (resp, rescued) = e_step_with_rescues(&data, &params);
                    for i in 0..resp.n() {
                        let sum: f64 = resp.row(i).iter().sum();
                        if (sum - 1.0).abs() > 1e-10 {
                            return Err(format!("responsibility row sums to {sum}"));
                        }
                    }
                    let before = log_likelihood(&data, &params);
                    let (next, clamps) = m_step(&data, &resp, &em, &params);
                    let wsum: f64 = next.weights().iter().sum();
                    if (wsum - 1.0).abs() > 1e-12 {
                        return Err(format!("weights sum to {wsum}"));
                    }
                    let after = log_likelihood(&data, &next);
                    if clamps.is_empty() && rescued.is_empty() && after < before - 1e-9 * before.abs()
                    {
                        return Err(format!(
                            "clamp-free iteration decreased the log-likelihood: {before} -> {after}"
                        ));
                    }
                    params = next;
                }

                // The packaged loop must show the same ascent on its trace.
                let fit = run_em(&data, &init, &em).map_err(|e| e.to_string())?;
                for t in 1..fit.loglik_trace.len() {
                    let clamped = fit.clamp_events.iter().any(|ev| ev.iteration == t);
                    let (prev, cur) = (fit.loglik_trace[t - 1], fit.loglik_trace[t]);
                    if !clamped && cur < prev - 1e-9 * prev.abs() {
                        return Err(format!(
                            "trace decreased at iteration {t}: {prev} -> {cur}"
                        ));
                    }
                }
                fits += 1;
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= 60.0 {
            return Err(format!("took {elapsed:.1}s, budget is 60s"));
        }
        Ok(format!("{fits} fits in {elapsed:.2}s"))
    });
}

// ---------------------------------------------------------------- 3 ----

/// EM for raw replicated observations (each point weight 1, duplicates
/// allowed), with the same update equations, floors, and
/// renormalization as the count-weighted implementation.
struct ReplicatedEm {
    points: Vec<f64>,
}

impl ReplicatedEm {
    fn step(&self, params: &MixtureParams, config: &EmConfig) -> MixtureParams {
        let n = self.points.len();
        let k = params.k();
        let mut resp = vec![0.0f64; n * k];
        for (i, &x) in self.points.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let mut max = f64::NEG_INFINITY;
            for c in 0..k {
                let z = (x - params.means()[c]) / params.stds()[c];
                let l = params.weights()[c].ln()
                    - 0.5 * z * z
                    - params.stds()[c].ln()
                    - 0.5 * (2.0 * std::f64::consts::PI).ln();
                row[c] = l;
                max = max.max(l);
            }
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        let total = n as f64;
        let mut weights = vec![0.0f64; k];
        let mut means = vec![0.0f64; k];
        let mut stds = vec![0.0f64; k];
        for c in 0..k {
            let mut mass = 0.0;
            let mut num = 0.0;
            for (i, &x) in self.points.iter().enumerate() {
                mass += resp[i * k + c];
                num += resp[i * k + c] * x;
            }
            weights[c] = mass / total;
            means[c] = num / mass;
            let mut var = 0.0;
            for (i, &x) in self.points.iter().enumerate() {
                var += resp[i * k + c] * (x - means[c]) * (x - means[c]);
            }
            stds[c] = (var / mass).sqrt().max(config.sigma_min);
            weights[c] = weights[c].max(config.alpha_min);
        }
        let wsum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= wsum;
        }
        MixtureParams::new(weights, means, stds).expect("valid update")
    }
}

#[test]
fn acceptance_03_binned_replicated_equivalence() {
    criterion(3, "binned and replicated fits coincide", || {
        let em = EmConfig::simulation();
        for dataset in 0..20u64 {
            let mut rng = dataset_rng(303, dataset);
            let n = rng.random_range(8..=14usize);
            let mut xs: Vec<f64> = Vec::with_capacity(n);
            let mut x = 0.0;
            for _ in 0..n {
                x += rng.random_range(0.2..3.0);
                xs.push(x);
            }
            let ys: Vec<f64> = (0..n).map(|_| rng.random_range(1..=6) as f64).collect();
            let mut replicated = Vec::new();
            for (&x, &y) in xs.iter().zip(&ys) {
                for _ in 0..y as usize {
                    replicated.push(x);
                }
            }
            let data = WeightedSample::new(xs, ys, None).map_err(|e| e.to_string())?;
            let k = rng.random_range(2..=3usize);
            let init = Method::parse("eq")
                .map_err(|e| e.to_string())?
                .initial_params(&data, k, em.sigma_min)
                .map_err(|e| e.to_string())?;

            let oracle = ReplicatedEm { points: replicated };
            let mut binned = init.clone();
            let mut expanded = init;
            for step in 0..10 {
                let resp = gmix_core::e_step(&data, &binned);
                binned = m_step(&data, &resp, &em, &binned).0;
                expanded = oracle.step(&expanded, &em);
                for c in 0..k {
                    for (a, b, what) in [
                        (binned.weights()[c], expanded.weights()[c], "weight"),
                        (binned.means()[c], expanded.means()[c], "mean"),
                        (binned.stds()[c], expanded.stds()[c], "std"),
                    ] {
                        if (a - b).abs() > 1e-10 * b.abs().max(1.0) {
                            return Err(format!(
                                "dataset {dataset} step {step} component {c}: \
                                 {what} {a} (binned) vs {b} (replicated)"
                            ));
                        }
                    }
                }
            }
        }
        Ok(String::new())
    });
}

// ---------------------------------------------------------------- 4 ----

#[test]
fn acceptance_04_overlap_spacing_round_trip() {
    criterion(4, "overlap/spacing round trip", || {
        let mut rng = dataset_rng(404, 0);
        for &ov in &[0.05, 0.1, 0.15, 0.2, 0.25] {
            for pair in 0..1000 {
                let si = rng.random_range(0.05..1.0);
                let sj = rng.random_range(0.05..1.0);
                let spacing = spacing_from_overlap(si, sj, ov).map_err(|e| e.to_string())?;
                let back = overlap(0.0, si, spacing, sj);
                if (back - ov).abs() > 1e-12 {
                    return Err(format!(
                        "ov={ov} pair {pair} (sigmas {si}, {sj}): round trip gave {back}"
                    ));
                }
            }
        }
        Ok("5000 pairs".into())
    });
}

// ------------------------------------------------------------- 5, 6 ----

const DESK_BENCHMARK_CONFIG: &str = r#"
groups = [4]
ov_values = [0.2]
replicates = 50
n = 1000
k = 10
methods = ["eq", "hclu-a", "dp-q1", "dp-q4:0.1"]
master_seed = 20260822
"#;

static DESK_BENCHMARK: OnceLock<(BenchmarkResults, f64)> = OnceLock::new();

fn desk_benchmark() -> &'static (BenchmarkResults, f64) {
    DESK_BENCHMARK.get_or_init(|| {
        let plan = BenchmarkPlan::from_toml_str(DESK_BENCHMARK_CONFIG)
            .expect("benchmark config is well-formed");
        let start = Instant::now();
        let results = run_benchmark(&plan);
        (results, start.elapsed().as_secs_f64())
    })
}

fn summary_of<'a>(results: &'a BenchmarkResults, method: &str) -> &'a SummaryRow {
    results
        .summary
        .iter()
        .find(|r| r.method == method)
        .expect("method present in summary")
}

#[test]
fn acceptance_05_desk_benchmark_direction() {
    criterion(5, "optimal-partition init beats equal quantiles", || {
        let (results, elapsed) = desk_benchmark();
        let dp = summary_of(results, "dp-q4:0.1")
            .avg_log_d
            .ok_or("dp-q4:0.1 never succeeded")?;
        let eq = summary_of(results, "eq")
            .avg_log_d
            .ok_or("eq never succeeded")?;
        if dp >= eq {
            return Err(format!("AvgLogD dp-q4:0.1 = {dp} is not below eq = {eq}"));
        }
        if *elapsed >= 900.0 {
            return Err(format!("took {elapsed:.0}s, budget is 900s"));
        }
        Ok(format!(
            "AvgLogD dp-q4:0.1 = {dp:.3} < eq = {eq:.3}, {} failures, {elapsed:.0}s",
            results.failures
        ))
    });
}

#[test]
fn acceptance_06_metric_anti_correlation() {
    criterion(6, "AvgLogD and AvgP anti-correlate across methods", || {
        let (results, _) = desk_benchmark();
        let pairs: Vec<(f64, f64)> = results
            .summary
            .iter()
            .map(|r| {
                r.avg_log_d
                    .map(|d| (d, r.avg_p))
                    .ok_or_else(|| format!("{} never succeeded", r.method))
            })
            .collect::<Result<_, _>>()?;
        let n = pairs.len() as f64;
        let mean_d = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_p = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let mut cov = 0.0;
        let mut var_d = 0.0;
        let mut var_p = 0.0;
        for (d, p) in &pairs {
            cov += (d - mean_d) * (p - mean_p);
            var_d += (d - mean_d) * (d - mean_d);
            var_p += (p - mean_p) * (p - mean_p);
        }
        if var_d == 0.0 || var_p == 0.0 {
            return Err("a metric is constant across methods; correlation undefined".into());
        }
        let corr = cov / (var_d.sqrt() * var_p.sqrt());
        if corr >= 0.0 {
            return Err(format!("correlation {corr} is not negative"));
        }
        Ok(format!("corr = {corr:.3} over {} methods", pairs.len()))
    });
}

// ---------------------------------------------------------------- 7 ----

#[test]
fn acceptance_07_attainment_rule_exactness() {
    criterion(7, "attainment rule exactness", || {
        let got = attainment(&[-100.0, -101.0, -110.0]);
        if got != vec![true, false, false] {
            return Err(format!("[-100,-101,-110] -> {got:?}"));
        }
        let tied = attainment(&[-42.0, -42.0, -42.0, -42.0]);
        if tied != vec![true; 4] {
            return Err(format!("zero range -> {tied:?}"));
        }
        Ok(String::new())
    });
}

// ---------------------------------------------------------------- 8 ----

#[test]
fn acceptance_08_bic_model_order_recovery() {
    criterion(8, "BIC recovers the component count", || {
        let start = Instant::now();
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut hits = 0usize;
        let mut picks = Vec::new();
        for rep in 0..20u64 {
            let sim = cmd_simulate(&SimulateArgs {
                group: 1,
                k: 3,
                ov: 0.05,
                n: 2000,
                seed: 808 + rep,
                out_dir: dir.path().to_path_buf(),
                name: Some(format!("rep{rep}")),
            })
            .map_err(|e| e.to_string())?;
            let scan = cmd_scan_k(&ScanArgs {
                input: sim.data_path.clone(),
                format: InputFormat::PointsCsv,
                method: Method::parse("dp-q4:0.1").map_err(|e| e.to_string())?,
                k_range: (1, 6),
                em: EmConfig::simulation(),
                range: None,
                out_dir: dir.path().to_path_buf(),
            })
            .map_err(|e| e.to_string())?;
            picks.push(scan.best_k);
            if scan.best_k == 3 {
                hits += 1;
            }
        }
        if hits < 16 {
            return Err(format!("chose 3 components only {hits}/20 times: {picks:?}"));
        }
        Ok(format!(
            "{hits}/20 replicates, {:.0}s",
            start.elapsed().as_secs_f64()
        ))
    });
}

// ---------------------------------------------------------------- 9 ----

#[test]
fn acceptance_09_exact_vs_dense_binned_likelihood() {
    criterion(9, "exact and dense binned likelihoods agree", || {
        let mut rng = dataset_rng(909, 0);
        for model in 0..20 {
            let k = rng.random_range(1..=4usize);
            let mut means = Vec::with_capacity(k);
            let mut m = rng.random_range(-3.0..0.0);
            for _ in 0..k {
                means.push(m);
                m += rng.random_range(1.0..4.0);
            }
            let stds: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..2.0)).collect();
            let mut weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let params = MixtureParams::new(weights, means.clone(), stds.clone())
                .map_err(|e| e.to_string())?;

            let sigma_min = stds.iter().cloned().fold(f64::INFINITY, f64::min);
            let sigma_max = stds.iter().cloned().fold(0.0f64, f64::max);
            let delta = sigma_min / 20.0;
            let lo = means[0] - 5.0 * sigma_max;
            let hi = means[k - 1] + 5.0 * sigma_max;
            let bins = ((hi - lo) / delta).ceil() as usize;
            let xs: Vec<f64> = (0..bins).map(|i| lo + i as f64 * delta).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| mixture_pdf(x, &params)).collect();
            let data =
                WeightedSample::new(xs, ys, Some(delta)).map_err(|e| e.to_string())?;

            let exact = exact_binned_log_likelihood(&data, &params).map_err(|e| e.to_string())?;
            let dense = log_likelihood(&data, &params);
            let offset = data.total_weight() * delta.ln();
            let diff = (exact - offset - dense).abs();
            if diff > 1e-4 * dense.abs() {
                return Err(format!(
                    "model {model} (k={k}): exact-offset {} vs dense {dense} \
                     (relative {})",
                    exact - offset,
                    diff / dense.abs()
                ));
            }
        }
        Ok(String::new())
    });
}

// --------------------------------------------------------------- 10 ----

#[test]
fn acceptance_10_benchmark_determinism() {
    criterion(10, "benchmark aggregates are byte-identical across runs", || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let config_path = dir.path().join("bench.toml");
        std::fs::write(
            &config_path,
            r#"
groups = [2]
ov_values = [0.15]
replicates = 2
n = 80
k = 3
methods = ["eq", "dp-q2"]
master_seed = 5
"#,
        )
        .map_err(|e| e.to_string())?;
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        std::fs::create_dir_all(&out_a).map_err(|e| e.to_string())?;
        std::fs::create_dir_all(&out_b).map_err(|e| e.to_string())?;
        let a = cmd_benchmark(&config_path, &out_a).map_err(|e| e.to_string())?;
        let b = cmd_benchmark(&config_path, &out_b).map_err(|e| e.to_string())?;
        let bytes_a = std::fs::read(&a.summary_path).map_err(|e| e.to_string())?;
        let bytes_b = std::fs::read(&b.summary_path).map_err(|e| e.to_string())?;
        if bytes_a != bytes_b {
            return Err("aggregate CSVs differ between runs".into());
        }
        if bytes_a.is_empty() {
            return Err("aggregate CSV came out empty".into());
        }
        Ok(format!("{} bytes identical", bytes_a.len()))
    });
}
