//! Iterative maximum-likelihood fitting of weighted univariate Gaussian
//! mixtures, with spread/weight floors that keep the heteroscedastic
//! likelihood away from degenerate single-point components.

use crate::error::{Error, Result};
use crate::model::{log_likelihood, log_normal_pdf, MixtureParams, WeightedSample};

/// Tuning knobs for a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    /// Floor applied to every component standard deviation after each
    /// update.
    pub sigma_min: f64,
    /// Floor applied to every component weight after each update (weights
    /// are renormalized afterwards).
    pub alpha_min: f64,
    /// Hard iteration cap.
    pub max_iters: usize,
    /// Stop once the relative log-likelihood change drops below this.
    pub rel_tol: f64,
}

impl EmConfig {
    pub fn new(sigma_min: f64, alpha_min: f64, max_iters: usize, rel_tol: f64) -> Result<Self> {
        if !sigma_min.is_finite() || sigma_min <= 0.0 {
            return Err(Error::InvalidArgument("sigma_min must be positive".into()));
        }
        if !alpha_min.is_finite() || alpha_min <= 0.0 || alpha_min >= 1.0 {
            return Err(Error::InvalidArgument(
                "alpha_min must lie strictly between 0 and 1".into(),
            ));
        }
        if max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !rel_tol.is_finite() || rel_tol <= 0.0 {
            return Err(Error::InvalidArgument("rel_tol must be positive".into()));
        }
        Ok(Self {
            sigma_min,
            alpha_min,
            max_iters,
            rel_tol,
        })
    }

    /// Floors suited to simulated data on a unit-ish scale.
    pub fn simulation() -> Self {
        Self {
            sigma_min: 1e-2,
            alpha_min: 1e-4,
            max_iters: 5000,
            rel_tol: 1e-8,
        }
    }

    /// Floors suited to mass spectra binned at 1 Da.
    pub fn spectra() -> Self {
        Self {
            sigma_min: 1.0,
            alpha_min: 1e-5,
            max_iters: 5000,
            rel_tol: 1e-8,
        }
    }
}

/// Posterior component memberships: an N×K row-major matrix in which row
/// `n` holds the probability that position `n` belongs to each component.
#[derive(Debug, Clone)]
pub struct Responsibilities {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl Responsibilities {
    fn zeros(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            data: vec![0.0; n * k],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Row of posteriors for position `n`.
    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.k..(n + 1) * self.k]
    }

    fn row_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[n * self.k..(n + 1) * self.k]
    }

    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.data[n * self.k + k]
    }
}

/// Which floor or rescue fired during an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampKind {
    /// A component spread fell below `sigma_min` and was floored.
    SigmaFloor,
    /// A component weight fell below `alpha_min` and was floored.
    AlphaFloor,
    /// A component received zero responsibility mass; its mean was kept
    /// and its spread/weight reset to the floors.
    ZeroMass,
    /// Every component underflowed at some position; full responsibility
    /// was assigned to the nearest component in standardized distance.
    NumericRescue,
}

/// One recorded floor/rescue occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClampEvent {
    /// 1-based iteration in which the event fired.
    pub iteration: usize,
    /// Component involved (for rescues: the component that received the
    /// mass).
    pub component: usize,
    pub kind: ClampKind,
}

/// Outcome of a complete fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: MixtureParams,
    /// Log-likelihood after initialization (index 0) and after each
    /// iteration.
    pub loglik_trace: Vec<f64>,
    /// Number of completed iterations.
    pub iterations: usize,
    pub clamp_events: Vec<ClampEvent>,
    /// True when the relative-change criterion was met before the
    /// iteration cap.
    pub converged: bool,
}

impl FitResult {
    /// Final log-likelihood.
    pub fn loglik(&self) -> f64 {
        *self
            .loglik_trace
            .last()
            .expect("trace always holds the initial value")
    }
}

/// Computes posterior memberships for every position under the current
/// parameters, and additionally reports the positions whose densities
/// underflowed in every component and were rescued by nearest-component
/// assignment.
pub fn e_step_with_rescues(
    data: &WeightedSample,
    params: &MixtureParams,
) -> (Responsibilities, Vec<usize>) {
    let n = data.len();
    let k = params.k();
    let mut resp = Responsibilities::zeros(n, k);
    let mut rescued = Vec::new();
    let log_weights: Vec<f64> = params.weights().iter().map(|w| w.ln()).collect();
    let xs = data.xs();
    for i in 0..n {
        let x = xs[i];
        let row = resp.row_mut(i);
        let mut max = f64::NEG_INFINITY;
        for c in 0..k {
            let l = log_weights[c] + log_normal_pdf(x, params.means()[c], params.stds()[c]);
            row[c] = l;
            if l > max {
                max = l;
            }
        }
        if max == f64::NEG_INFINITY {
            // Degenerate underflow: fall back to the nearest component in
            // standardized distance, breaking ties toward lower index.
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for c in 0..k {
                let dist = ((x - params.means()[c]) / params.stds()[c]).abs();
                if dist < best_dist {
                    best_dist = dist;
                    best = c;
                }
            }
            row.fill(0.0);
            row[best] = 1.0;
            rescued.push(i);
            continue;
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
    (resp, rescued)
}

/// Computes posterior memberships for every position under the current
/// parameters.
pub fn e_step(data: &WeightedSample, params: &MixtureParams) -> Responsibilities {
    e_step_with_rescues(data, params).0
}

/// One parameter update from responsibilities: weight = share of total
/// mass, mean = mass-weighted position, spread = mass-weighted deviation
/// around the *new* mean. Spreads and weights are floored per `config`
/// (weights renormalized after flooring), and every floor is reported
/// alongside the updated parameters.
///
/// A component with zero responsibility mass keeps its previous mean and
/// restarts at the floors; `prev` supplies that mean.
pub fn m_step(
    data: &WeightedSample,
    resp: &Responsibilities,
    config: &EmConfig,
    prev: &MixtureParams,
) -> (MixtureParams, Vec<(usize, ClampKind)>) {
    let n = data.len();
    let k = resp.k();
    assert_eq!(resp.n(), n, "responsibility rows must match sample length");
    assert_eq!(prev.k(), k, "previous parameters must match component count");
    let xs = data.xs();
    let ys = data.ys();
    let total: f64 = data.total_weight();
    let mut events = Vec::new();

    let mut mass = vec![0.0f64; k];
    let mut mean_num = vec![0.0f64; k];
    for i in 0..n {
        let y = ys[i];
        if y == 0.0 {
            continue;
        }
        let x = xs[i];
        let row = resp.row(i);
        for c in 0..k {
            let yr = y * row[c];
            mass[c] += yr;
            mean_num[c] += yr * x;
        }
    }

    let mut weights = vec![0.0f64; k];
    let mut means = vec![0.0f64; k];
    for c in 0..k {
        if mass[c] <= 0.0 {
            means[c] = prev.means()[c];
        } else {
            weights[c] = mass[c] / total;
            means[c] = mean_num[c] / mass[c];
        }
    }

    let mut var_num = vec![0.0f64; k];
    for i in 0..n {
        let y = ys[i];
        if y == 0.0 {
            continue;
        }
        let x = xs[i];
        let row = resp.row(i);
        for c in 0..k {
            let d = x - means[c];
            var_num[c] += y * row[c] * d * d;
        }
    }

    let mut stds = vec![0.0f64; k];
    for c in 0..k {
        if mass[c] <= 0.0 {
            weights[c] = config.alpha_min;
            stds[c] = config.sigma_min;
            events.push((c, ClampKind::ZeroMass));
            continue;
        }
        let sigma = (var_num[c] / mass[c]).sqrt();
        if sigma < config.sigma_min {
            stds[c] = config.sigma_min;
            events.push((c, ClampKind::SigmaFloor));
        } else {
            stds[c] = sigma;
        }
        if weights[c] < config.alpha_min {
            weights[c] = config.alpha_min;
            events.push((c, ClampKind::AlphaFloor));
        }
    }

    // Flooring can push the weight total off 1; renormalize so the
    // parameter invariant holds exactly.
    let weight_sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= weight_sum;
    }

    let params = MixtureParams::new(weights, means, stds)
        .expect("updated parameters satisfy the construction invariants");
    (params, events)
}

/// Alternates membership and parameter updates until the log-likelihood
/// stabilizes or the iteration cap is reached. The returned trace holds
/// the initial log-likelihood followed by one entry per iteration.
///
/// A non-finite log-likelihood aborts the fit with a divergence error
/// carrying the most recent parameters that still had a finite value.
pub fn run_em(data: &WeightedSample, init: &MixtureParams, config: &EmConfig) -> Result<FitResult> {
    let k = init.k();
    if config.alpha_min * k as f64 >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha_min {} is too large for {} components",
            config.alpha_min, k
        )));
    }
    EmConfig::new(
        config.sigma_min,
        config.alpha_min,
        config.max_iters,
        config.rel_tol,
    )?;

    let mut params = init.clone();
    let mut l_prev = log_likelihood(data, &params);
    if !l_prev.is_finite() {
        return Err(Error::Diverged {
            iteration: 0,
            last: Box::new(params),
        });
    }
    let mut trace = Vec::with_capacity(config.max_iters.min(1024) + 1);
    trace.push(l_prev);
    let mut clamp_events = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iters {
        let (resp, rescued) = e_step_with_rescues(data, &params);
        let (next, step_events) = m_step(data, &resp, config, &params);
        let l_next = log_likelihood(data, &next);
        if !l_next.is_finite() {
            return Err(Error::Diverged {
                iteration: iter,
                last: Box::new(params),
            });
        }
        for i in rescued {
            // Attribute the rescue to the component that received the mass.
            let row = resp.row(i);
            let component = row
                .iter()
                .position(|&r| r == 1.0)
                .expect("rescued rows are one-hot");
            clamp_events.push(ClampEvent {
                iteration: iter,
                component,
                kind: ClampKind::NumericRescue,
            });
        }
        for (component, kind) in step_events {
            clamp_events.push(ClampEvent {
                iteration: iter,
                component,
                kind,
            });
        }
        params = next;
        trace.push(l_next);
        iterations = iter;
        if (l_next - l_prev).abs() <= config.rel_tol * l_prev.abs() {
            converged = true;
            break;
        }
        l_prev = l_next;
    }

    Ok(FitResult {
        params,
        loglik_trace: trace,
        iterations,
        clamp_events,
        converged,
    })
}
