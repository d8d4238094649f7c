//! Statistical tests that turn distributional limit claims into pass/fail
//! checks: Poisson goodness of fit, dispersion, cross-window independence,
//! exponential KS, and two-sample homogeneity.
//!
//! All tests are deterministic functions of their samples and the level
//! `alpha`. p-values come from the stated null distributions; the caller
//! decides what to do about multiple testing.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("fewer than two cells remain after merging to expected count {min_expected}")]
    DegenerateHistogram { min_expected: f64 },
    #[error("sample variance is zero; the test statistic is undefined")]
    ZeroVariance,
    #[error("sample mean is zero; the dispersion index is undefined")]
    ZeroMean,
    #[error("samples must be positive, found {0}")]
    NonPositiveSample(f64),
    #[error("paired samples must have equal lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub sample_size: usize,
    pub method: String,
    pub alpha: f64,
    pub pass: bool,
}

impl TestReport {
    fn new(statistic: f64, p_value: f64, sample_size: usize, method: String, alpha: f64) -> Self {
        TestReport {
            statistic,
            p_value,
            sample_size,
            method,
            alpha,
            pass: p_value > alpha,
        }
    }
}

/// Dispersion index (sample variance over sample mean) with a
/// normal-approximation confidence interval.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionIndex {
    pub index: f64,
    pub ci: (f64, f64),
    pub confidence: f64,
    pub sample_size: usize,
}

const MIN_EXPECTED: f64 = 5.0;

/// Chi-square goodness of fit of integer counts against a Poisson law with
/// a theoretically known mean (the mean is not fitted, so degrees of
/// freedom are `cells - 1`). Tail cells are merged until every expected
/// count is at least 5.
pub fn poisson_gof(counts: &[u64], mean: f64, alpha: f64) -> Result<TestReport, StatsError> {
    if counts.len() < 50 {
        return Err(StatsError::InsufficientSamples {
            got: counts.len(),
            need: 50,
        });
    }
    if !(mean.is_finite() && mean > 0.0) {
        return Err(StatsError::InvalidParameter(format!(
            "poisson mean must be positive, got {mean}"
        )));
    }
    let n = counts.len() as f64;
    let max_obs = *counts.iter().max().expect("nonempty") as usize;

    // Cell probabilities 0..=k_top with the upper tail folded into the last
    // cell. Extend past the observed maximum so the tail cell is honest.
    let k_top = max_obs.max(mean.ceil() as usize) + 1;
    let mut probs: Vec<f64> = Vec::with_capacity(k_top + 2);
    let mut pmf = (-mean).exp();
    let mut cum = 0.0;
    for k in 0..=k_top {
        if k > 0 {
            pmf *= mean / k as f64;
        }
        probs.push(pmf);
        cum += pmf;
    }
    probs.push((1.0 - cum).max(0.0)); // P{X > k_top}

    let mut observed = vec![0.0_f64; probs.len()];
    for &c in counts {
        let idx = (c as usize).min(probs.len() - 1);
        observed[idx] += 1.0;
    }

    let (obs_cells, exp_cells) = merge_cells(&observed, &probs.iter().map(|p| p * n).collect::<Vec<_>>());
    if obs_cells.len() < 2 {
        return Err(StatsError::DegenerateHistogram {
            min_expected: MIN_EXPECTED,
        });
    }
    let statistic: f64 = obs_cells
        .iter()
        .zip(&exp_cells)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = (obs_cells.len() - 1) as f64;
    let p = chi2_sf(statistic, df);
    Ok(TestReport::new(
        statistic,
        p,
        counts.len(),
        format!("chi-square GOF vs Poisson({mean}), {} cells", obs_cells.len()),
        alpha,
    ))
}

/// Merges adjacent cells from both ends until every expected count reaches
/// `MIN_EXPECTED`. Interior cells below threshold (possible for very small
/// means) are merged rightward.
fn merge_cells(observed: &[f64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cells: Vec<(f64, f64)> = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o, e))
        .collect();
    // Fold the upper tail down.
    while cells.len() > 1 && cells.last().unwrap().1 < MIN_EXPECTED {
        let (o, e) = cells.pop().unwrap();
        let last = cells.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
    }
    // Fold the lower tail up.
    while cells.len() > 1 && cells.first().unwrap().1 < MIN_EXPECTED {
        let (o, e) = cells.remove(0);
        cells[0].0 += o;
        cells[0].1 += e;
    }
    // Sweep any interior stragglers rightward.
    let mut i = 0;
    while i < cells.len() {
        if cells[i].1 < MIN_EXPECTED && cells.len() > 1 {
            let (o, e) = cells.remove(i);
            let j = if i == cells.len() { i - 1 } else { i };
            cells[j].0 += o;
            cells[j].1 += e;
        } else {
            i += 1;
        }
    }
    cells.into_iter().unzip()
}

/// Sample variance over sample mean, with a normal-approximation
/// confidence interval (default use: Poisson counts have index 1).
pub fn dispersion_index(counts: &[u64], confidence: f64) -> Result<DispersionIndex, StatsError> {
    if counts.len() < 50 {
        return Err(StatsError::InsufficientSamples {
            got: counts.len(),
            need: 50,
        });
    }
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    if mean == 0.0 {
        return Err(StatsError::ZeroMean);
    }
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    let index = var / mean;
    // Under the Poisson null (n-1)·index is approximately chi-square with
    // n-1 degrees of freedom, so sd(index) ≈ sqrt(2/(n-1)).
    let z = normal_quantile(0.5 + confidence / 2.0);
    let half = z * (2.0 / (n - 1.0)).sqrt();
    Ok(DispersionIndex {
        index,
        ci: (index - half, index + half),
        confidence,
        sample_size: counts.len(),
    })
}

/// Pearson correlation between paired window counts with a Fisher-z test
/// against zero correlation.
pub fn cross_window_dependence(
    counts_a: &[u64],
    counts_b: &[u64],
    alpha: f64,
) -> Result<TestReport, StatsError> {
    if counts_a.len() != counts_b.len() {
        return Err(StatsError::LengthMismatch(counts_a.len(), counts_b.len()));
    }
    if counts_a.len() < 100 {
        return Err(StatsError::InsufficientSamples {
            got: counts_a.len(),
            need: 100,
        });
    }
    let n = counts_a.len() as f64;
    let mean = |xs: &[u64]| xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    let (ma, mb) = (mean(counts_a), mean(counts_b));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in counts_a.iter().zip(counts_b) {
        let da = a as f64 - ma;
        let db = b as f64 - mb;
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = sxy / (sxx * syy).sqrt();
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln() * (n - 3.0).sqrt();
        2.0 * normal_sf(z.abs())
    };
    Ok(TestReport::new(
        r,
        p,
        counts_a.len(),
        "Pearson correlation with Fisher-z null of independence".into(),
        alpha,
    ))
}

/// One-sample Kolmogorov–Smirnov test against the unit-rate exponential
/// law. Samples are expected to be pre-rescaled by their own rates.
pub fn ks_exponential_unit(samples: &[f64], alpha: f64) -> Result<TestReport, StatsError> {
    if samples.len() < 200 {
        return Err(StatsError::InsufficientSamples {
            got: samples.len(),
            need: 200,
        });
    }
    if let Some(&bad) = samples.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
        return Err(StatsError::NonPositiveSample(bad));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = -(-x).exp_m1(); // 1 - e^{-x}
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    let p = ks_asymptotic_p(d, n);
    Ok(TestReport::new(
        d,
        p,
        samples.len(),
        "one-sample KS vs unit exponential (asymptotic p)".into(),
        alpha,
    ))
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample
/// correction.
fn ks_asymptotic_p(d: f64, n: f64) -> f64 {
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    kolmogorov_sf(lambda)
}

/// Survival function of the Kolmogorov distribution.
pub(crate) fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        let signed = if k % 2 == 1 { term } else { -term };
        sum += signed;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample chi-square homogeneity test on pooled count histograms.
pub fn homogeneity_test(
    counts_a: &[u64],
    counts_b: &[u64],
    alpha: f64,
) -> Result<TestReport, StatsError> {
    for counts in [counts_a, counts_b] {
        if counts.len() < 100 {
            return Err(StatsError::InsufficientSamples {
                got: counts.len(),
                need: 100,
            });
        }
    }
    let max = counts_a
        .iter()
        .chain(counts_b)
        .max()
        .copied()
        .unwrap_or(0) as usize;
    let mut hist_a = vec![0.0_f64; max + 1];
    let mut hist_b = vec![0.0_f64; max + 1];
    for &c in counts_a {
        hist_a[c as usize] += 1.0;
    }
    for &c in counts_b {
        hist_b[c as usize] += 1.0;
    }
    let na = counts_a.len() as f64;
    let nb = counts_b.len() as f64;
    let total = na + nb;

    // Merge adjacent value bins until the expected count in each bin is at
    // least MIN_EXPECTED for both samples.
    let min_share = na.min(nb) / total;
    let mut bins: Vec<(f64, f64)> = hist_a.into_iter().zip(hist_b).collect();
    let big_enough = |bin: &(f64, f64)| (bin.0 + bin.1) * min_share >= MIN_EXPECTED;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for bin in bins.drain(..) {
        acc.0 += bin.0;
        acc.1 += bin.1;
        if big_enough(&acc) {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        if let Some(last) = merged.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            merged.push(acc);
        }
    }
    if merged.len() < 2 {
        return Err(StatsError::DegenerateHistogram {
            min_expected: MIN_EXPECTED,
        });
    }

    let mut statistic = 0.0;
    for &(oa, ob) in &merged {
        let pooled = oa + ob;
        let ea = pooled * na / total;
        let eb = pooled * nb / total;
        statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let df = (merged.len() - 1) as f64;
    let p = chi2_sf(statistic, df);
    Ok(TestReport::new(
        statistic,
        p,
        counts_a.len() + counts_b.len(),
        format!("two-sample chi-square homogeneity, {} bins", merged.len()),
        alpha,
    ))
}

pub(crate) fn chi2_sf(statistic: f64, df: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    let chi = ChiSquared::new(df).expect("positive degrees of freedom");
    chi.sf(statistic).clamp(0.0, 1.0)
}

fn normal_sf(z: f64) -> f64 {
    Normal::standard().sf(z)
}

fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}
