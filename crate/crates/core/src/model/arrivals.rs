//! Arrival processes: when particles enter the system.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;

/// Interarrival law of a renewal arrival process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Interarrival {
    Deterministic { period: f64 },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Interarrival {
    fn validate(&self) -> Result<(), ModelError> {
        let ok = match *self {
            Interarrival::Deterministic { period } => period.is_finite() && period > 0.0,
            Interarrival::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Interarrival::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(format!(
                "invalid interarrival law {self:?}"
            )))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Interarrival::Deterministic { period } => period,
            Interarrival::Exponential { rate } => {
                let u: f64 = rng.sample(Open01);
                -u.ln() / rate
            }
            Interarrival::Uniform { lo, hi } => {
                let u: f64 = rng.sample(Open01);
                lo + u * (hi - lo)
            }
        }
    }
}

/// Specification of the arrival epochs `T_1 ≤ T_2 ≤ …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrivalSpec {
    /// Homogeneous Poisson process.
    Poisson { rate: f64 },
    /// Renewal process started at 0 (first arrival after one interarrival).
    Renewal { interarrival: Interarrival },
    /// Explicit nondecreasing epochs.
    Schedule { epochs: Vec<f64> },
}

impl ArrivalSpec {
    pub fn poisson(rate: f64) -> Result<Self, ModelError> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "poisson rate must be nonnegative, got {rate}"
            )));
        }
        Ok(ArrivalSpec::Poisson { rate })
    }

    pub fn renewal(interarrival: Interarrival) -> Result<Self, ModelError> {
        interarrival.validate()?;
        Ok(ArrivalSpec::Renewal { interarrival })
    }

    pub fn schedule(epochs: Vec<f64>) -> Result<Self, ModelError> {
        if epochs
            .iter()
            .any(|t| !t.is_finite() || *t < 0.0)
            || epochs.windows(2).any(|w| w[0] > w[1])
        {
            return Err(ModelError::InvalidParameter(
                "schedule epochs must be finite, nonnegative and nondecreasing".into(),
            ));
        }
        Ok(ArrivalSpec::Schedule { epochs })
    }

    /// Generates the arrival epochs in `[0, horizon]`. `cap` guards against
    /// arrival explosion: exceeding it is an error, not a truncation.
    pub fn epochs_until<R: Rng + ?Sized>(
        &self,
        horizon: f64,
        cap: u64,
        rng: &mut R,
    ) -> Result<Vec<f64>, ModelError> {
        let mut epochs = Vec::new();
        match self {
            ArrivalSpec::Poisson { rate } => {
                if *rate > 0.0 {
                    let law = Interarrival::Exponential { rate: *rate };
                    accumulate(&law, horizon, cap, rng, &mut epochs)?;
                }
            }
            ArrivalSpec::Renewal { interarrival } => {
                accumulate(interarrival, horizon, cap, rng, &mut epochs)?;
            }
            ArrivalSpec::Schedule { epochs: all } => {
                epochs.extend(all.iter().copied().filter(|t| *t <= horizon));
                if epochs.len() as u64 > cap {
                    return Err(ModelError::InvalidParameter(format!(
                        "schedule contains {} arrivals before the horizon, above the cap {cap}",
                        epochs.len()
                    )));
                }
            }
        }
        Ok(epochs)
    }

    /// Exact number of arrivals in `(0, w]` when the process is
    /// deterministic; `None` for stochastic arrival streams.
    pub fn deterministic_count(&self, w: f64) -> Option<u64> {
        match self {
            ArrivalSpec::Renewal {
                interarrival: Interarrival::Deterministic { period },
            } => Some((w / period).floor() as u64),
            ArrivalSpec::Schedule { epochs } => {
                Some(epochs.iter().filter(|t| **t > 0.0 && **t <= w).count() as u64)
            }
            _ => None,
        }
    }

    /// Rate of the Poisson (or exponential-renewal) stream, if that is what
    /// this spec describes.
    pub fn poisson_rate(&self) -> Option<f64> {
        match self {
            ArrivalSpec::Poisson { rate } => Some(*rate),
            ArrivalSpec::Renewal {
                interarrival: Interarrival::Exponential { rate },
            } => Some(*rate),
            _ => None,
        }
    }
}

fn accumulate<R: Rng + ?Sized>(
    law: &Interarrival,
    horizon: f64,
    cap: u64,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<(), ModelError> {
    let mut t = 0.0;
    loop {
        t += law.sample(rng);
        if t > horizon {
            return Ok(());
        }
        if out.len() as u64 >= cap {
            return Err(ModelError::InvalidParameter(format!(
                "arrival stream exceeded the cap of {cap} events before the horizon"
            )));
        }
        out.push(t);
    }
}
