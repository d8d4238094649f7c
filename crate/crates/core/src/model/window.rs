//! Observation windows: finite disjoint unions of half-open intervals used
//! to count particles.

use serde::{Deserialize, Serialize};

use super::{AttributeDistribution, ModelError};

/// A finite disjoint union of half-open intervals `[lo, hi)` on the
/// attribute line, kept sorted.
///
/// Construction checks only the geometry. Whether a window is usable for a
/// given distribution — inside the support, and for mean-measure integrals
/// bounded away from the essential supremum — depends on the distribution
/// and is checked by [`ObservationWindow::check_in_space`] and
/// [`ObservationWindow::check_bounded_away`]. Sojourn-law integrals stay
/// finite on windows that reach the supremum, so they only require the
/// weaker check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationWindow {
    intervals: Vec<(f64, f64)>,
}

impl ObservationWindow {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in &intervals {
            if !(w.0.is_finite() && w.1.is_finite() && w.0 < w.1) {
                return Err(ModelError::MalformedWindow { lo: w.0, hi: w.1 });
            }
        }
        if intervals.windows(2).any(|pair| pair[0].1 > pair[1].0) {
            let (lo, hi) = intervals[0];
            return Err(ModelError::MalformedWindow { lo, hi });
        }
        Ok(ObservationWindow { intervals })
    }

    /// Single-interval window `[lo, hi)`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, ModelError> {
        ObservationWindow::new(vec![(lo, hi)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x < hi)
    }

    /// Supremum of the window (negative infinity when empty).
    pub fn sup(&self) -> f64 {
        self.intervals
            .last()
            .map(|&(_, hi)| hi)
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// `F`-measure of the window.
    pub fn f_measure(&self, dist: &AttributeDistribution) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| dist.cdf(hi) - dist.cdf(lo))
            .sum()
    }

    /// The window on the probability scale: intervals `(F(lo), F(hi))`.
    pub fn quantile_image(&self, dist: &AttributeDistribution) -> Vec<(f64, f64)> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| (dist.cdf(lo), dist.cdf(hi)))
            .collect()
    }

    /// The window must lie inside the closure of the attribute space.
    pub fn check_in_space(&self, dist: &AttributeDistribution) -> Result<(), ModelError> {
        let (inf, sup) = dist.support_bounds();
        for &(lo, hi) in &self.intervals {
            if lo < inf || hi > sup {
                return Err(ModelError::WindowOutsideSupport { lo, hi });
            }
        }
        Ok(())
    }

    /// Stronger check for mean-measure integrals: the window must stay
    /// strictly below the essential supremum (`F̄ > 0` at its sup), so the
    /// intensity `1/(a F̄)` is integrable over it.
    pub fn check_bounded_away(&self, dist: &AttributeDistribution) -> Result<(), ModelError> {
        self.check_in_space(dist)?;
        if let Some(&(_, hi)) = self.intervals.last() {
            if dist.survival(hi) <= 0.0 {
                return Err(ModelError::WindowTouchesSupremum { sup: hi });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn intervals_are_sorted_and_disjoint() {
        let w = ObservationWindow::new(vec![(0.5, 0.7), (0.0, 0.25)]).unwrap();
        assert_eq!(w.intervals(), &[(0.0, 0.25), (0.5, 0.7)]);
        assert!(w.contains(0.6));
        assert!(!w.contains(0.25));
        assert!(ObservationWindow::new(vec![(0.0, 0.5), (0.4, 0.8)]).is_err());
    }

    #[test]
    fn touching_intervals_are_allowed() {
        let w = ObservationWindow::new(vec![(0.0, 0.25), (0.25, 0.5)]).unwrap();
        assert_eq!(w.sup(), 0.5);
    }

    #[test]
    fn f_measure_adds_up() {
        let d = AttributeDistribution::standard_uniform();
        let w = ObservationWindow::new(vec![(0.0, 0.25), (0.5, 0.75)]).unwrap();
        assert_abs_diff_eq!(w.f_measure(&d), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn supremum_check_rejects_windows_reaching_the_top() {
        let d = AttributeDistribution::standard_uniform();
        let w = ObservationWindow::interval(0.5, 1.0).unwrap();
        assert!(w.check_in_space(&d).is_ok());
        assert!(matches!(
            w.check_bounded_away(&d),
            Err(ModelError::WindowTouchesSupremum { .. })
        ));
    }

    #[test]
    fn support_check_rejects_outside_intervals() {
        let d = AttributeDistribution::standard_uniform();
        let w = ObservationWindow::interval(-0.5, 0.5).unwrap();
        assert!(w.check_in_space(&d).is_err());
    }
}
