//! Continuous attribute distributions.
//!
//! The attribute space is `E = {x : 0 < F(x) < 1}`, an open real interval.
//! Only atomless families are constructible, so ties between sampled
//! attributes have probability zero and the ranked deletion rule can use
//! strict comparison.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use super::ModelError;

/// A continuous distribution for particle attributes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AttributeDistribution {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Beta { alpha: f64, beta: f64 },
}

impl AttributeDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ModelError::InvalidParameter(format!(
                "uniform bounds must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(AttributeDistribution::Uniform { lo, hi })
    }

    pub fn standard_uniform() -> Self {
        AttributeDistribution::Uniform { lo: 0.0, hi: 1.0 }
    }

    pub fn exponential(rate: f64) -> Result<Self, ModelError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        Ok(AttributeDistribution::Exponential { rate })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "beta shapes must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(AttributeDistribution::Beta { alpha, beta })
    }

    /// Cumulative distribution function F.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            AttributeDistribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            AttributeDistribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            AttributeDistribution::Beta { alpha, beta } => {
                statrs_beta(alpha, beta).cdf(x.clamp(0.0, 1.0))
            }
        }
    }

    /// Survival function F̄ = 1 − F, computed directly where that is more
    /// accurate in the upper tail.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            AttributeDistribution::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            AttributeDistribution::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            AttributeDistribution::Beta { alpha, beta } => {
                statrs_beta(alpha, beta).sf(x.clamp(0.0, 1.0))
            }
        }
    }

    /// Quantile function, the inverse of `cdf` on (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0, "quantile argument must be in (0,1)");
        match *self {
            AttributeDistribution::Uniform { lo, hi } => lo + u * (hi - lo),
            AttributeDistribution::Exponential { rate } => -(-u).ln_1p() / rate,
            AttributeDistribution::Beta { alpha, beta } => {
                let d = statrs_beta(alpha, beta);
                // Polish the library inverse with a Newton step so that the
                // round trip cdf(quantile(u)) = u holds to ~1e-12.
                let mut x = d.inverse_cdf(u).clamp(f64::MIN_POSITIVE, 1.0);
                for _ in 0..2 {
                    let pdf = statrs::distribution::Continuous::pdf(&d, x);
                    if pdf <= 0.0 || !pdf.is_finite() {
                        break;
                    }
                    x = (x - (d.cdf(x) - u) / pdf).clamp(0.0, 1.0);
                }
                x
            }
        }
    }

    /// Draws one attribute by the quantile transform of an open uniform
    /// variate, so the result always satisfies `0 < F(x) < 1`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }

    /// Bounds of the attribute space `E` (open interval, possibly infinite
    /// on the right).
    pub fn support_bounds(&self) -> (f64, f64) {
        match *self {
            AttributeDistribution::Uniform { lo, hi } => (lo, hi),
            AttributeDistribution::Exponential { .. } => (0.0, f64::INFINITY),
            AttributeDistribution::Beta { .. } => (0.0, 1.0),
        }
    }

    /// Whether `x` lies in the attribute space.
    pub fn contains(&self, x: f64) -> bool {
        let f = self.cdf(x);
        x.is_finite() && f > 0.0 && f < 1.0
    }
}

fn statrs_beta(alpha: f64, beta: f64) -> statrs::distribution::Beta {
    statrs::distribution::Beta::new(alpha, beta).expect("shapes validated at construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_quantile_is_identity() {
        let d = AttributeDistribution::standard_uniform();
        assert_eq!(d.quantile(0.5), 0.5);
    }

    #[test]
    fn exponential_quantile_inverts_cdf_analytically() {
        let d = AttributeDistribution::exponential(1.0).unwrap();
        let u = -(-2.0_f64).exp_m1(); // 1 - e^{-2}
        assert_abs_diff_eq!(d.quantile(u), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn survival_complements_cdf() {
        let dists = [
            AttributeDistribution::standard_uniform(),
            AttributeDistribution::exponential(0.7).unwrap(),
            AttributeDistribution::beta(2.0, 3.5).unwrap(),
        ];
        for d in dists {
            for i in 1..200 {
                let u = f64::from(i) / 200.0;
                let x = d.quantile(u);
                assert_abs_diff_eq!(d.cdf(x) + d.survival(x), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn quantile_round_trip_on_grid() {
        let dists = [
            AttributeDistribution::uniform(-2.0, 5.0).unwrap(),
            AttributeDistribution::exponential(2.5).unwrap(),
            AttributeDistribution::beta(0.8, 1.7).unwrap(),
        ];
        for d in dists {
            for i in 1..500 {
                let u = f64::from(i) / 500.0;
                assert_abs_diff_eq!(d.cdf(d.quantile(u)), u, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn samples_stay_inside_the_attribute_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dists = [
            AttributeDistribution::standard_uniform(),
            AttributeDistribution::exponential(1.0).unwrap(),
            AttributeDistribution::beta(2.0, 2.0).unwrap(),
        ];
        for d in dists {
            for _ in 0..10_000 {
                let x = d.sample(&mut rng);
                assert!(d.contains(x), "sample {x} escaped {d:?}");
            }
        }
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        assert!(AttributeDistribution::uniform(1.0, 1.0).is_err());
        assert!(AttributeDistribution::uniform(f64::NAN, 2.0).is_err());
        assert!(AttributeDistribution::exponential(0.0).is_err());
        assert!(AttributeDistribution::beta(-1.0, 2.0).is_err());
    }
}
