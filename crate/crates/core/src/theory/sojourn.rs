//! Sojourn-time laws of a tagged particle.
//!
//! A live `x`-particle is deleted by an arbitrary arrival with probability
//! `a(x) F̄(x)`, independently across arrivals, so its sojourn survival
//! after time `w` is `E[(1 - a(x) F̄(x))^{A(w)}]` where `A(w)` counts
//! arrivals in `(0, w]`. Under Poisson arrivals with rate `λ` this
//! collapses to `exp(-λ a(x) F̄(x) w)` — the exponential sojourn law.

use rand::distr::Open01;
use rand::Rng;
use serde::Serialize;

use crate::model::{
    ArrivalSpec, AttributeDistribution, DeletionProb, Interarrival, ModelError, ObservationWindow,
};
use crate::quad::{integrate, QuadOptions};

use super::TheoryError;

/// A survival probability that is either exact (closed form / deterministic
/// count) or a Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurvivalValue {
    Exact { value: f64 },
    Estimate { value: f64, std_error: f64, draws: u64 },
}

impl SurvivalValue {
    pub fn value(&self) -> f64 {
        match *self {
            SurvivalValue::Exact { value } | SurvivalValue::Estimate { value, .. } => value,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SurvivalValue::Exact { .. })
    }
}

/// `P{W(x) > w}`: survival function of the sojourn time of a tagged
/// `x`-particle.
///
/// Exact for Poisson arrivals, deterministic renewals and explicit
/// schedules; estimated by Monte Carlo (with `mc_budget` replications of
/// the arrival stream) for other renewal laws.
pub fn sojourn_survival<R: Rng + ?Sized>(
    arrivals: &ArrivalSpec,
    dist: &AttributeDistribution,
    a: &DeletionProb,
    x: f64,
    w: f64,
    mc_budget: u64,
    rng: &mut R,
) -> Result<SurvivalValue, TheoryError> {
    if !dist.contains(x) {
        return Err(TheoryError::Model(ModelError::AttributeOutsideSpace(x)));
    }
    if !(w.is_finite() && w >= 0.0) {
        return Err(TheoryError::Model(ModelError::InvalidParameter(format!(
            "sojourn horizon must be nonnegative, got {w}"
        ))));
    }
    let risk = a.eval(dist, x) * dist.survival(x);
    debug_assert!(risk > 0.0, "x inside E and a in (0,1] imply positive risk");
    Ok(survival_given_risk(arrivals, risk, w, mc_budget, rng))
}

fn survival_given_risk<R: Rng + ?Sized>(
    arrivals: &ArrivalSpec,
    risk: f64,
    w: f64,
    mc_budget: u64,
    rng: &mut R,
) -> SurvivalValue {
    if w == 0.0 {
        return SurvivalValue::Exact { value: 1.0 };
    }
    if let Some(rate) = arrivals.poisson_rate() {
        return SurvivalValue::Exact {
            value: (-rate * risk * w).exp(),
        };
    }
    if let Some(n) = arrivals.deterministic_count(w) {
        return SurvivalValue::Exact {
            value: retained_pow(risk, n),
        };
    }
    // General renewal: estimate E[(1 - risk)^{A(w)}].
    let ArrivalSpec::Renewal { interarrival } = arrivals else {
        unreachable!("all other arrival specs handled above");
    };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..mc_budget {
        let value = retained_pow(risk, count_renewals(interarrival, w, rng));
        sum += value;
        sum_sq += value * value;
    }
    let n = mc_budget as f64;
    let mean = sum / n;
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    SurvivalValue::Estimate {
        value: mean,
        std_error: (var / n).sqrt(),
        draws: mc_budget,
    }
}

fn count_renewals<R: Rng + ?Sized>(law: &Interarrival, w: f64, rng: &mut R) -> u64 {
    let mut t = 0.0;
    let mut n = 0;
    loop {
        t += law.sample(rng);
        if t > w {
            return n;
        }
        n += 1;
    }
}

fn retained_pow(risk: f64, n: u64) -> f64 {
    if risk >= 1.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * (-risk).ln_1p()).exp()
}

/// `P{W(B) > w}`: sojourn survival of a particle that entered the window
/// `B`, its attribute distributed as `F` restricted to `B`.
pub fn sojourn_survival_window<R: Rng + ?Sized>(
    arrivals: &ArrivalSpec,
    dist: &AttributeDistribution,
    a: &DeletionProb,
    window: &ObservationWindow,
    w: f64,
    mc_budget: u64,
    rng: &mut R,
) -> Result<SurvivalValue, TheoryError> {
    window.check_in_space(dist)?;
    let mass = window.f_measure(dist);
    if mass <= 0.0 {
        return Err(TheoryError::Model(ModelError::InvalidParameter(
            "window has zero attribute-law mass".into(),
        )));
    }
    if w == 0.0 {
        return Ok(SurvivalValue::Exact { value: 1.0 });
    }

    let exact = arrivals.poisson_rate().is_some() || arrivals.deterministic_count(w).is_some();
    if exact {
        let opts = QuadOptions::with_tol(1e-10);
        let mut total = 0.0;
        for (u_lo, u_hi) in window.quantile_image(dist) {
            let q = integrate(
                |u| {
                    let x = dist.quantile(u);
                    let risk = a.eval(dist, x) * dist.survival(x);
                    let mut throwaway = NoRng;
                    survival_given_risk(arrivals, risk, w, 0, &mut throwaway).value()
                },
                u_lo,
                u_hi,
                &opts,
            )
            .map_err(ModelError::from_quad)?;
            total += q.value;
        }
        return Ok(SurvivalValue::Exact {
            value: total / mass,
        });
    }

    // General renewal: double Monte Carlo over the entering attribute and
    // the arrival stream.
    let images = window.quantile_image(dist);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..mc_budget {
        let u = sample_union(&images, mass, rng);
        let x = dist.quantile(u);
        let risk = a.eval(dist, x) * dist.survival(x);
        let value = survival_given_risk(arrivals, risk, w, 1, rng).value();
        sum += value;
        sum_sq += value * value;
    }
    let n = mc_budget as f64;
    let mean = sum / n;
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    Ok(SurvivalValue::Estimate {
        value: mean,
        std_error: (var / n).sqrt(),
        draws: mc_budget,
    })
}

/// Uniform draw over a union of probability-scale intervals with total
/// length `mass`.
fn sample_union<R: Rng + ?Sized>(images: &[(f64, f64)], mass: f64, rng: &mut R) -> f64 {
    let raw: f64 = rng.sample(Open01);
    let mut target = raw * mass;
    for &(lo, hi) in images {
        let len = hi - lo;
        if target <= len {
            return lo + target;
        }
        target -= len;
    }
    images.last().map(|&(_, hi)| hi).unwrap_or(0.5)
}

/// Expected fraction of censored sojourns for particles entering `window`
/// during `[t0, t1]` under Poisson arrivals, with observation cut off at
/// `horizon`. Used to size simulation horizons so censoring bias stays
/// below the reporting threshold.
pub fn expected_censored_fraction(
    rate: f64,
    dist: &AttributeDistribution,
    a: &DeletionProb,
    window: &ObservationWindow,
    t0: f64,
    t1: f64,
    horizon: f64,
) -> Result<f64, TheoryError> {
    if !(0.0 <= t0 && t0 < t1 && t1 <= horizon) {
        return Err(TheoryError::Model(ModelError::InvalidParameter(
            "need 0 <= t0 < t1 <= horizon".into(),
        )));
    }
    window.check_in_space(dist)?;
    let mass = window.f_measure(dist);
    let span = t1 - t0;
    let opts = QuadOptions::with_tol(1e-10);
    let mut total = 0.0;
    for (u_lo, u_hi) in window.quantile_image(dist) {
        let q = integrate(
            |u| {
                let x = dist.quantile(u);
                let risk_rate = rate * a.eval(dist, x) * dist.survival(x);
                // average over the entry time s ~ Uniform[t0, t1] of
                // exp(-risk_rate (horizon - s))
                ((-risk_rate * (horizon - t1)).exp() - (-risk_rate * (horizon - t0)).exp())
                    / (risk_rate * span)
            },
            u_lo,
            u_hi,
            &opts,
        )
        .map_err(ModelError::from_quad)?;
        total += q.value;
    }
    Ok(total / mass)
}

/// Rng stand-in for code paths that are statically known not to sample.
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("exact sojourn evaluation must not sample")
    }

    fn next_u64(&mut self) -> u64 {
        unreachable!("exact sojourn evaluation must not sample")
    }

    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("exact sojourn evaluation must not sample")
    }
}
