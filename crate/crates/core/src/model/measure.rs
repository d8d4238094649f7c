//! Closed-form laws of the model: the limit mean measure and the lifetime
//! survival function.

use rand::Rng;

use crate::quad::{integrate, QuadOptions};

use super::{AttributeDistribution, DeletionKernel, ModelError, ObservationWindow};

/// Draws one attribute from the distribution.
pub fn sample_attribute<R: Rng + ?Sized>(dist: &AttributeDistribution, rng: &mut R) -> f64 {
    dist.sample(rng)
}

/// Mean measure of the limiting Poisson process over a window:
/// `∫_B dF(x) / d(x)` with `d(x) = ∫ p(x, y) dF(y)`.
///
/// For the ranked kernel `d(x) = a(x) F̄(x)`, so the intensity blows up at
/// the essential supremum of the attribute space; windows must stay
/// strictly below it.
pub fn mean_measure(
    dist: &AttributeDistribution,
    kernel: &DeletionKernel,
    window: &ObservationWindow,
) -> Result<f64, ModelError> {
    mean_measure_with(dist, kernel, window, &QuadOptions::default())
}

/// As [`mean_measure`], with explicit quadrature options.
pub fn mean_measure_with(
    dist: &AttributeDistribution,
    kernel: &DeletionKernel,
    window: &ObservationWindow,
    opts: &QuadOptions,
) -> Result<f64, ModelError> {
    window.check_bounded_away(dist)?;
    let mut total = 0.0;
    // Quantile transform: ∫_B g(x) dF(x) = ∫ g(Q(u)) du over the image of
    // B on the probability scale, a proper integral on a bounded domain.
    for (u_lo, u_hi) in window.quantile_image(dist) {
        let q = integrate(
            |u| 1.0 / kernel.denominator(dist, dist.quantile(u)),
            u_lo,
            u_hi,
            opts,
        )
        .map_err(ModelError::from_quad)?;
        total += q.value;
    }
    Ok(total)
}

/// Probability that a particle with deletion probability `a_x` survives
/// `attempts` deletion attempts: `(1 - a_x)^attempts`.
pub fn lifetime_survival(a_x: f64, attempts: u64) -> f64 {
    debug_assert!(a_x > 0.0 && a_x <= 1.0);
    if a_x >= 1.0 {
        return if attempts == 0 { 1.0 } else { 0.0 };
    }
    // exp(ℓ log(1-a)) stays accurate for tiny a and large ℓ.
    (attempts as f64 * (-a_x).ln_1p()).exp()
}
