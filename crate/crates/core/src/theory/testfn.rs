//! Compactly supported nonnegative test functions used to probe the
//! Poisson-stationarity functional.

use serde::{Deserialize, Serialize};

use crate::model::{AttributeDistribution, ModelError};

/// A nonnegative function on the attribute line with bounded support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum TestFunction {
    /// `height · 1[lo, hi)`.
    Step { height: f64, lo: f64, hi: f64 },
    /// Smooth bump `height · exp(1 - 1/(1 - s²))` with `s = (x - center)/width`,
    /// supported on `(center - width, center + width)`.
    Bump { center: f64, width: f64, height: f64 },
}

impl TestFunction {
    pub fn step(height: f64, lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !(height.is_finite() && height >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "step height must be nonnegative, got {height}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ModelError::MalformedWindow { lo, hi });
        }
        Ok(TestFunction::Step { height, lo, hi })
    }

    pub fn bump(center: f64, width: f64, height: f64) -> Result<Self, ModelError> {
        if !(height.is_finite() && height >= 0.0) || !(width.is_finite() && width > 0.0) || !center.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "bump needs finite center, positive width, nonnegative height; got ({center}, {width}, {height})"
            )));
        }
        Ok(TestFunction::Bump { center, width, height })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Step { height, lo, hi } => {
                if lo <= x && x < hi {
                    height
                } else {
                    0.0
                }
            }
            TestFunction::Bump { center, width, height } => {
                let s = (x - center) / width;
                if s.abs() < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - s * s)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Support interval `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestFunction::Step { lo, hi, .. } => (lo, hi),
            TestFunction::Bump { center, width, .. } => (center - width, center + width),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            TestFunction::Step { height, .. } | TestFunction::Bump { height, .. } => height == 0.0,
        }
    }

    pub fn max_value(&self) -> f64 {
        match *self {
            TestFunction::Step { height, .. } | TestFunction::Bump { height, .. } => height,
        }
    }

    /// A stationarity test function must vanish strictly below the
    /// essential supremum of the attribute space.
    pub fn check_support_bounded_away(
        &self,
        dist: &AttributeDistribution,
    ) -> Result<(), ModelError> {
        let (_, hi) = self.support();
        if self.is_zero() {
            return Ok(());
        }
        if dist.survival(hi) <= 0.0 {
            return Err(ModelError::WindowTouchesSupremum { sup: hi });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_evaluates_on_half_open_support() {
        let f = TestFunction::step(2.0, 0.2, 0.6).unwrap();
        assert_eq!(f.eval(0.2), 2.0);
        assert_eq!(f.eval(0.6), 0.0);
        assert_eq!(f.eval(0.1), 0.0);
    }

    #[test]
    fn bump_is_smooth_and_compactly_supported() {
        let f = TestFunction::bump(0.5, 0.2, 1.5).unwrap();
        assert_eq!(f.eval(0.5), 1.5);
        assert_eq!(f.eval(0.7), 0.0);
        assert_eq!(f.eval(0.29), 0.0);
        assert!(f.eval(0.69) < 1e-9, "nearly flat at the support edge");
        assert!(f.eval(0.45) > 0.0);
    }

    #[test]
    fn support_against_distribution_is_checked() {
        let d = AttributeDistribution::standard_uniform();
        let good = TestFunction::step(1.0, 0.2, 0.6).unwrap();
        assert!(good.check_support_bounded_away(&d).is_ok());
        let bad = TestFunction::step(1.0, 0.5, 1.0).unwrap();
        assert!(bad.check_support_bounded_away(&d).is_err());
    }
}
