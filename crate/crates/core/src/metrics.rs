//! Fit-quality metrics: scaled mean-recovery error, its log average,
//! likelihood-attainment indicators, and BIC.

use crate::model::MixtureParams;

/// Floor applied to recovery errors before taking logs, so an exact
/// recovery contributes a very negative value instead of −∞.
const D_FLOOR: f64 = 1e-300;

/// Scaled mean-recovery error of an estimate against the ground truth:
/// the average over true components of |μ_true − μ_est| / σ_true ·
/// √(N·α_true), where μ_est is the estimated mean closest to each true
/// mean (one estimated mean may serve several true components). `n` is
/// the sample size the estimate was fitted on.
pub fn d_criterion(truth: &MixtureParams, est: &MixtureParams, n: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..truth.k() {
        let mu_t = truth.means()[i];
        let nearest = est
            .means()
            .iter()
            .copied()
            .min_by(|a, b| (a - mu_t).abs().total_cmp(&(b - mu_t).abs()))
            .expect("MixtureParams has at least one component");
        total += (mu_t - nearest).abs() / truth.stds()[i] * (n * truth.weights()[i]).sqrt();
    }
    total / truth.k() as f64
}

/// Mean of ln(D) over datasets, with each D floored at 1e-300.
///
/// # Panics
/// Panics on an empty slice.
pub fn avg_log_d(ds: &[f64]) -> f64 {
    assert!(!ds.is_empty(), "avg_log_d needs at least one value");
    ds.iter().map(|&d| d.max(D_FLOOR).ln()).sum::<f64>() / ds.len() as f64
}

/// Which methods attain the per-dataset maximum log-likelihood: method m
/// attains iff L_max − L_m < 0.05·(L_max − L_min). With zero range (all
/// methods equal) every method attains. Inputs of length 0 or 1 return
/// an empty vector or `[true]` respectively.
pub fn attainment(logliks: &[f64]) -> Vec<bool> {
    if logliks.len() <= 1 {
        return vec![true; logliks.len()];
    }
    let max = logliks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = logliks.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = 0.05 * (max - min);
    if threshold == 0.0 {
        return vec![true; logliks.len()];
    }
    logliks.iter().map(|&l| max - l < threshold).collect()
}

/// Per-method attainment proportions: column means of a rectangular
/// dataset × method boolean matrix.
///
/// # Panics
/// Panics on an empty or ragged matrix.
pub fn avg_p(attainments: &[Vec<bool>]) -> Vec<f64> {
    assert!(!attainments.is_empty(), "avg_p needs at least one dataset row");
    let m = attainments[0].len();
    let mut sums = vec![0.0f64; m];
    for row in attainments {
        assert_eq!(row.len(), m, "attainment matrix must be rectangular");
        for (s, &b) in sums.iter_mut().zip(row) {
            *s += b as u8 as f64;
        }
    }
    let rows = attainments.len() as f64;
    sums.iter_mut().for_each(|s| *s /= rows);
    sums
}

/// Bayesian information criterion for a fitted K-component mixture:
/// −2·loglik + (3K − 1)·ln(total_weight). The parameter count 3K−1
/// covers K means, K standard deviations, and K−1 free weights; for
/// binned data `total_weight` is the total count Σ y_n.
pub fn bic(loglik: f64, k: usize, total_weight: f64) -> f64 {
    -2.0 * loglik + (3.0 * k as f64 - 1.0) * total_weight.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(weights: Vec<f64>, means: Vec<f64>, stds: Vec<f64>) -> MixtureParams {
        MixtureParams::new(weights, means, stds).unwrap()
    }

    #[test]
    fn d_is_zero_when_estimate_matches_truth() {
        let p = params(vec![0.4, 0.6], vec![-1.0, 2.0], vec![0.5, 1.5]);
        assert_eq!(d_criterion(&p, &p.clone(), 1000.0), 0.0);
    }

    #[test]
    fn d_matches_hand_computation_for_one_component() {
        let truth = params(vec![1.0], vec![0.0], vec![1.0]);
        let est = params(vec![1.0], vec![0.1], vec![1.0]);
        assert_relative_eq!(d_criterion(&truth, &est, 100.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn d_scales_with_sqrt_of_sample_size() {
        let truth = params(vec![0.5, 0.5], vec![0.0, 5.0], vec![1.0, 2.0]);
        let est = params(vec![0.5, 0.5], vec![0.3, 5.4], vec![1.0, 2.0]);
        let d1 = d_criterion(&truth, &est, 500.0);
        let d2 = d_criterion(&truth, &est, 1000.0);
        assert_relative_eq!(d2, d1 * 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn d_matches_by_value_not_by_index() {
        let truth = params(vec![0.5, 0.5], vec![0.0, 10.0], vec![1.0, 1.0]);
        // Same components listed in the opposite order.
        let est = params(vec![0.5, 0.5], vec![10.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(d_criterion(&truth, &est, 100.0), 0.0);
    }

    #[test]
    fn d_permits_reusing_one_estimated_mean() {
        let truth = params(vec![0.5, 0.5], vec![0.0, 2.0], vec![1.0, 1.0]);
        let est = params(vec![1.0], vec![0.0], vec![1.0]);
        // Both true components match the single estimated mean at 0:
        // contributions 0 and 2·√(100·0.5), averaged over K = 2.
        let expected = 2.0 * 50.0f64.sqrt() / 2.0;
        assert_relative_eq!(d_criterion(&truth, &est, 100.0), expected, epsilon = 1e-12);
    }

    #[test]
    fn d_is_invariant_under_common_component_permutation() {
        let truth = params(vec![0.2, 0.3, 0.5], vec![0.0, 3.0, 9.0], vec![1.0, 0.5, 2.0]);
        let est = params(vec![0.3, 0.3, 0.4], vec![0.2, 3.3, 8.5], vec![1.0, 1.0, 1.0]);
        let permuted = params(vec![0.5, 0.2, 0.3], vec![9.0, 0.0, 3.0], vec![2.0, 1.0, 0.5]);
        assert_relative_eq!(
            d_criterion(&truth, &est, 400.0),
            d_criterion(&permuted, &est, 400.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn avg_log_d_matches_hand_values() {
        let e = std::f64::consts::E;
        assert_eq!(avg_log_d(&[1.0]), 0.0);
        assert_relative_eq!(avg_log_d(&[e, e]), 1.0, epsilon = 1e-12);
        assert_relative_eq!(avg_log_d(&[1.0, e * e]), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn avg_log_d_floors_exact_zero() {
        assert_relative_eq!(avg_log_d(&[0.0]), -690.7755278982137, epsilon = 1e-9);
    }

    #[test]
    fn attainment_matches_hand_examples() {
        assert_eq!(attainment(&[-100.0, -101.0, -110.0]), vec![true, false, false]);
        assert_eq!(attainment(&[-100.0, -100.4, -110.0]), vec![true, true, false]);
    }

    #[test]
    fn attainment_with_zero_range_is_all_true() {
        assert_eq!(attainment(&[-5.0, -5.0, -5.0]), vec![true, true, true]);
    }

    #[test]
    fn attainment_handles_tiny_inputs() {
        assert_eq!(attainment(&[]), Vec::<bool>::new());
        assert_eq!(attainment(&[-3.0]), vec![true]);
    }

    #[test]
    fn attainment_always_includes_the_argmax() {
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..50 {
            let vals: Vec<f64> = (0..6)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    -((state >> 11) as f64 / (1u64 << 53) as f64) * 1000.0
                })
                .collect();
            let att = attainment(&vals);
            let argmax = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert!(att[argmax], "argmax method must always attain");
        }
    }

    #[test]
    fn avg_p_takes_column_means() {
        let single = avg_p(&[vec![true, false]]);
        assert_eq!(single, vec![1.0, 0.0]);

        let rows = vec![
            vec![true, true],
            vec![true, true],
            vec![true, false],
            vec![false, true],
        ];
        assert_eq!(avg_p(&rows), vec![0.75, 0.75]);

        let all = vec![vec![true; 3]; 5];
        assert_eq!(avg_p(&all), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn bic_matches_hand_values() {
        assert_relative_eq!(bic(-100.0, 2, 1000.0), 234.53877639491068, epsilon = 1e-12);
        assert_relative_eq!(bic(0.0, 1, std::f64::consts::E), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bic_grows_linearly_in_component_count() {
        let w = 500.0f64;
        let delta = bic(-40.0, 4, w) - bic(-40.0, 3, w);
        assert_relative_eq!(delta, 3.0 * w.ln(), epsilon = 1e-12);
    }
}
