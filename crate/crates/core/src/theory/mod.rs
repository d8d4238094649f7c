//! Closed-form and quadrature evaluation of the model's derived laws:
//! limit intensity, sojourn survival, rank-conditional survival, a
//! binomial size-bias identity, and the Poisson-stationarity functional.

mod sojourn;
mod stationarity;
mod testfn;

pub use sojourn::{
    expected_censored_fraction, sojourn_survival, sojourn_survival_window, SurvivalValue,
};
pub use stationarity::{
    ranked_reduction_residuals, stationarity_residual, RankedReduction, StationarityEval,
};
pub use testfn::TestFunction;

use thiserror::Error;

use crate::model::{AttributeDistribution, DeletionProb, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("operation is only defined for ranked kernels")]
    RequiresRankedKernel,
    #[error("exact enumeration supports n up to {max}, got {n}")]
    EnumerationTooLarge { n: u64, max: u64 },
}

/// Intensity of the limiting Poisson process with respect to `F`:
/// `1 / (a(x) F̄(x))`. Integrating it against `dF` over a window
/// reproduces the mean measure.
pub fn limit_intensity(dist: &AttributeDistribution, a: &DeletionProb, x: f64) -> f64 {
    1.0 / (a.eval(dist, x) * dist.survival(x))
}

/// Survival probability of a particle given that exactly `nu` of the `n`
/// attributes present (itself included) are at or above it, under a
/// uniformly random arrival order: the particle faces `Q` deletion
/// attempts with `Q` uniform on `{0, …, nu-1}`, so
///
/// ```text
///   (1/nu) Σ_{m=0}^{nu-1} (1-a)^m  =  (1 - (1-a)^nu) / (nu · a).
/// ```
pub fn survival_given_rank(a_x: f64, nu: u64) -> f64 {
    debug_assert!(a_x > 0.0 && a_x <= 1.0);
    debug_assert!(nu >= 1);
    let nu_f = nu as f64;
    if a_x >= 1.0 {
        return 1.0 / nu_f;
    }
    // 1 - (1-a)^nu via expm1 keeps precision for small a.
    -(nu_f * (-a_x).ln_1p()).exp_m1() / (nu_f * a_x)
}

/// Size-bias identity for a binomial `S_n` with parameters `(n, p)`:
/// both sides of
///
/// ```text
///   E[f(S_n)] = E[S_{n+1} f(S_{n+1} - 1) 1(S_{n+1} ≥ 1)] / (p (n + 1))
/// ```
///
/// evaluated by exact pmf summation. `n` is capped at 25 so all binomial
/// coefficients are exact in `f64`.
pub fn binomial_size_bias_identity<F: Fn(u64) -> f64>(
    n: u64,
    p: f64,
    f: F,
) -> Result<(f64, f64), TheoryError> {
    const MAX_N: u64 = 25;
    if n == 0 || n > MAX_N {
        return Err(TheoryError::EnumerationTooLarge { n, max: MAX_N });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(TheoryError::Model(ModelError::InvalidParameter(format!(
            "binomial success probability must be in (0, 1], got {p}"
        ))));
    }
    let lhs = binomial_expectation(n, p, &f);
    let rhs = binomial_expectation(n + 1, p, |k| {
        if k >= 1 {
            k as f64 * f(k - 1)
        } else {
            0.0
        }
    }) / (p * (n + 1) as f64);
    Ok((lhs, rhs))
}

/// Exact `E[g(S_n)]` by pmf summation with compensated accumulation.
fn binomial_expectation<G: Fn(u64) -> f64>(n: u64, p: f64, g: G) -> f64 {
    let q = 1.0 - p;
    let coeffs = pascal_row(n);
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for (k, &c) in coeffs.iter().enumerate() {
        let pmf = c * p.powi(k as i32) * q.powi((n as usize - k) as i32);
        let term = pmf * g(k as u64);
        // Kahan step
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

fn pascal_row(n: u64) -> Vec<f64> {
    let mut row = vec![1.0_f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DeletionKernel, ObservationWindow};
    use crate::quad::{integrate, QuadOptions};
    use approx::assert_abs_diff_eq;

    fn uniform() -> AttributeDistribution {
        AttributeDistribution::standard_uniform()
    }

    #[test]
    fn limit_intensity_hand_values() {
        let half = DeletionProb::constant(0.5).unwrap();
        assert_abs_diff_eq!(limit_intensity(&uniform(), &half, 0.5), 4.0, epsilon = 1e-12);
        let fifth = DeletionProb::constant(0.2).unwrap();
        assert_abs_diff_eq!(limit_intensity(&uniform(), &fifth, 0.75), 20.0, epsilon = 1e-12);
    }

    #[test]
    fn intensity_integrates_to_the_mean_measure() {
        let a = DeletionProb::affine(0.2, 0.5).unwrap();
        let kernel = DeletionKernel::ranked(a.clone());
        let d = AttributeDistribution::exponential(0.8).unwrap();
        let window = ObservationWindow::interval(0.1, 1.4).unwrap();
        let mm = crate::model::mean_measure(&d, &kernel, &window).unwrap();
        let (u_lo, u_hi) = (d.cdf(0.1), d.cdf(1.4));
        let by_intensity = integrate(
            |u| limit_intensity(&d, &a, d.quantile(u)),
            u_lo,
            u_hi,
            &QuadOptions::default(),
        )
        .unwrap()
        .value;
        assert_abs_diff_eq!(mm, by_intensity, epsilon = 1e-8);
    }

    #[test]
    fn rank_conditional_survival_hand_values() {
        assert_eq!(survival_given_rank(0.7, 1), 1.0);
        assert_abs_diff_eq!(survival_given_rank(0.5, 3), 1.75 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(survival_given_rank(1.0, 4), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn rank_conditional_survival_matches_brute_force_average() {
        for &a in &[1e-9, 0.01, 0.3, 0.77, 0.999] {
            for nu in 1..=60u64 {
                let brute: f64 = (0..nu)
                    .map(|m| crate::model::lifetime_survival(a, m))
                    .sum::<f64>()
                    / nu as f64;
                assert_abs_diff_eq!(survival_given_rank(a, nu), brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn size_bias_identity_for_the_constant_function() {
        let (lhs, rhs) = binomial_size_bias_identity(7, 0.3, |_| 1.0).unwrap();
        assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(rhs, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn size_bias_identity_for_the_identity_function() {
        let (lhs, rhs) = binomial_size_bias_identity(2, 0.5, |k| k as f64).unwrap();
        assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(rhs, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn size_bias_identity_degenerate_p() {
        let f = |k: u64| (k * k) as f64;
        let (lhs, rhs) = binomial_size_bias_identity(9, 1.0, f).unwrap();
        assert_eq!(lhs, 81.0);
        assert_abs_diff_eq!(rhs, 81.0, epsilon = 1e-12);
    }

    #[test]
    fn size_bias_identity_rejects_large_n() {
        assert!(matches!(
            binomial_size_bias_identity(26, 0.5, |_| 1.0),
            Err(TheoryError::EnumerationTooLarge { .. })
        ));
    }
}
