//! Deletion kernels: the probability rule by which an arriving particle
//! deletes particles already in the system.

use serde::{Deserialize, Serialize};

use super::{AttributeDistribution, ModelError};

/// A deletion-probability function `a : E -> (0, 1]`.
///
/// `Affine` is affine along the probability scale, `a(x) = intercept +
/// slope · F(x)`; this keeps the range inside `(0, 1]` for every
/// distribution, including unbounded supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DeletionProb {
    Constant { value: f64 },
    Affine { intercept: f64, slope: f64 },
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
}

impl DeletionProb {
    pub fn constant(value: f64) -> Result<Self, ModelError> {
        check_prob(value, "constant deletion probability")?;
        Ok(DeletionProb::Constant { value })
    }

    pub fn affine(intercept: f64, slope: f64) -> Result<Self, ModelError> {
        for (label, v) in [("intercept", intercept), ("intercept+slope", intercept + slope)] {
            check_prob(v, &format!("affine deletion probability {label}"))?;
        }
        Ok(DeletionProb::Affine { intercept, slope })
    }

    /// Piecewise-linear table on a strictly increasing grid; constant
    /// extrapolation beyond the grid ends.
    pub fn tabulated(xs: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        if xs.len() != values.len() || xs.len() < 2 {
            return Err(ModelError::InvalidParameter(
                "tabulated kernel needs at least two (x, a) pairs of equal length".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidParameter(
                "tabulated kernel grid must be finite and strictly increasing".into(),
            ));
        }
        for v in &values {
            check_prob(*v, "tabulated deletion probability")?;
        }
        Ok(DeletionProb::Tabulated { xs, values })
    }

    /// Evaluates `a(x)`.
    pub fn eval(&self, dist: &AttributeDistribution, x: f64) -> f64 {
        match self {
            DeletionProb::Constant { value } => *value,
            DeletionProb::Affine { intercept, slope } => intercept + slope * dist.cdf(x),
            DeletionProb::Tabulated { xs, values } => {
                if x <= xs[0] {
                    return values[0];
                }
                if x >= xs[xs.len() - 1] {
                    return values[values.len() - 1];
                }
                let i = xs.partition_point(|&g| g <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }
}

fn check_prob(v: f64, what: &str) -> Result<(), ModelError> {
    if !(v.is_finite() && v > 0.0 && v <= 1.0) {
        return Err(ModelError::InvalidParameter(format!(
            "{what} must lie in (0, 1], got {v}"
        )));
    }
    Ok(())
}

/// The deletion rule faced by particles already in the system when a new
/// particle arrives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeletionKernel {
    /// Ranked thinning: an arriving `y`-particle deletes each `x`-particle
    /// with `x < y` independently with probability `a(x)`; particles at or
    /// above `y` are untouched, so `p(x, y) = 1(x < y) a(x)`.
    Ranked { a: DeletionProb },
    /// Rank-free kernel: every particle in the system is at risk from
    /// every arrival, `p(x, y) = a(x)` regardless of `y`.
    RankFree { a: DeletionProb },
}

impl DeletionKernel {
    pub fn ranked(a: DeletionProb) -> Self {
        DeletionKernel::Ranked { a }
    }

    pub fn rank_free(a: DeletionProb) -> Self {
        DeletionKernel::RankFree { a }
    }

    pub fn is_ranked(&self) -> bool {
        matches!(self, DeletionKernel::Ranked { .. })
    }

    pub fn deletion_prob_fn(&self) -> &DeletionProb {
        match self {
            DeletionKernel::Ranked { a } | DeletionKernel::RankFree { a } => a,
        }
    }

    /// `p(x, y)`: probability that an arriving `y`-particle deletes a live
    /// `x`-particle.
    pub fn deletion_prob(&self, dist: &AttributeDistribution, x: f64, y: f64) -> f64 {
        match self {
            DeletionKernel::Ranked { a } => {
                if x < y {
                    a.eval(dist, x)
                } else {
                    0.0
                }
            }
            DeletionKernel::RankFree { a } => a.eval(dist, x),
        }
    }

    /// `d(x) = ∫ p(x, y) dF(y)`: the per-arrival deletion probability of a
    /// live `x`-particle. Closed form for both kernel families: integrating
    /// the ranked rule over the arrival law gives `a(x) F̄(x)`; the
    /// rank-free rule gives `a(x)`.
    pub fn denominator(&self, dist: &AttributeDistribution, x: f64) -> f64 {
        match self {
            DeletionKernel::Ranked { a } => a.eval(dist, x) * dist.survival(x),
            DeletionKernel::RankFree { a } => a.eval(dist, x),
        }
    }

    /// `h(x, x1) = p(x, x1) / d(x)`, the kernel normalized by its
    /// per-arrival deletion probability.
    pub fn normalized(&self, dist: &AttributeDistribution, x: f64, x1: f64) -> f64 {
        self.deletion_prob(dist, x, x1) / self.denominator(dist, x)
    }

    /// Grid check of the kernel invariants over the bulk of the attribute
    /// space: `a` stays in `(0, 1]` (so `1/a` is bounded on compacts) and
    /// the denominator is positive.
    pub fn validate(&self, dist: &AttributeDistribution) -> Result<(), ModelError> {
        const GRID: usize = 512;
        for i in 1..GRID {
            let u = i as f64 / GRID as f64;
            let x = dist.quantile(u);
            let a = self.deletion_prob_fn().eval(dist, x);
            if !(a.is_finite() && a > 0.0 && a <= 1.0) {
                return Err(ModelError::DeletionProbOutOfRange { at: x, value: a });
            }
            if self.denominator(dist, x) <= 0.0 {
                return Err(ModelError::KernelDenominatorZero(x));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform() -> AttributeDistribution {
        AttributeDistribution::standard_uniform()
    }

    #[test]
    fn ranked_kernel_only_threatens_lower_attributes() {
        let k = DeletionKernel::ranked(DeletionProb::constant(0.4).unwrap());
        assert_eq!(k.deletion_prob(&uniform(), 0.3, 0.5), 0.4);
        assert_eq!(k.deletion_prob(&uniform(), 0.5, 0.5), 0.0);
        assert_eq!(k.deletion_prob(&uniform(), 0.7, 0.5), 0.0);
    }

    #[test]
    fn rank_free_kernel_ignores_the_arrival() {
        let k = DeletionKernel::rank_free(DeletionProb::constant(0.5).unwrap());
        assert_eq!(k.deletion_prob(&uniform(), 0.9, 0.1), 0.5);
        assert_eq!(k.denominator(&uniform(), 0.9), 0.5);
    }

    #[test]
    fn ranked_denominator_scales_with_the_upper_tail() {
        let k = DeletionKernel::ranked(DeletionProb::constant(0.5).unwrap());
        assert_abs_diff_eq!(k.denominator(&uniform(), 0.25), 0.5 * 0.75, epsilon = 1e-15);
    }

    #[test]
    fn affine_tracks_the_probability_scale() {
        let d = AttributeDistribution::exponential(1.0).unwrap();
        let a = DeletionProb::affine(0.3, 0.4).unwrap();
        let x = d.quantile(0.5);
        assert_abs_diff_eq!(a.eval(&d, x), 0.3 + 0.4 * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let a = DeletionProb::tabulated(vec![0.2, 0.4, 0.8], vec![0.2, 0.6, 1.0]).unwrap();
        let d = uniform();
        assert_eq!(a.eval(&d, 0.0), 0.2);
        assert_eq!(a.eval(&d, 0.9), 1.0);
        assert_abs_diff_eq!(a.eval(&d, 0.3), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_probabilities_are_rejected() {
        assert!(DeletionProb::constant(0.0).is_err());
        assert!(DeletionProb::constant(1.0001).is_err());
        assert!(DeletionProb::affine(0.5, 0.6).is_err());
        assert!(DeletionProb::tabulated(vec![0.1, 0.1], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn validate_passes_for_well_posed_kernels() {
        let d = AttributeDistribution::beta(2.0, 2.0).unwrap();
        let k = DeletionKernel::ranked(DeletionProb::affine(0.2, 0.5).unwrap());
        assert!(k.validate(&d).is_ok());
    }
}
