//! Adaptive Gauss–Kronrod quadrature.
//!
//! All model integrals are mapped to bounded domains (usually the quantile
//! scale `(0, 1)`) before they reach this module, so a globally adaptive
//! G7/K15 rule with interval bisection is enough. Known discontinuity
//! locations (window edges, test-function support edges) are passed as
//! breakpoints so the rule never straddles a jump.

use thiserror::Error;

/// 7-point Gauss / 15-point Kronrod abscissae on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// 7-point Gauss weights for abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];

/// Options controlling an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute tolerance on the returned value.
    pub abs_tol: f64,
    /// Magnitude at which an integrand sample is treated as divergent.
    pub divergence_threshold: f64,
    /// Maximum number of interval bisections.
    pub max_splits: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-9,
            divergence_threshold: 1e12,
            max_splits: 4096,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            ..QuadOptions::default()
        }
    }
}

/// A converged integral value with diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    /// Conservative bound on the remaining error.
    pub error_estimate: f64,
    pub evaluations: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand diverges near {near} (sample exceeded {threshold:e})")]
    Divergent { near: f64, threshold: f64 },
    #[error("quadrature did not reach tolerance {requested:e}; achieved {achieved:e}")]
    NonConvergent { achieved: f64, requested: f64 },
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

struct Sampler<'a, F> {
    f: &'a mut F,
    evaluations: u64,
    diverged_at: Option<f64>,
    threshold: f64,
}

impl<F: FnMut(f64) -> f64> Sampler<'_, F> {
    fn call(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if !v.is_finite() || v.abs() > self.threshold {
            self.diverged_at.get_or_insert(x);
            return 0.0;
        }
        v
    }

    /// G7/K15 on [lo, hi]: returns (kronrod value, |kronrod - gauss|).
    fn panel(&mut self, lo: f64, hi: f64) -> Panel {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (lo + hi);
        let f_mid = self.call(mid);
        let mut kronrod = WGK[7] * f_mid;
        let mut gauss = WG[3] * f_mid;
        for j in 0..7 {
            let offset = half * XGK[j];
            let sum = self.call(mid - offset) + self.call(mid + offset);
            kronrod += WGK[j] * sum;
            if j % 2 == 1 {
                gauss += WG[j / 2] * sum;
            }
        }
        kronrod *= half;
        gauss *= half;
        Panel {
            lo,
            hi,
            value: kronrod,
            error: (kronrod - gauss).abs(),
        }
    }
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> Result<Quadrature, QuadError> {
    integrate_segmented(f, lo, hi, &[], opts)
}

/// Integrates `f` over `[lo, hi]`, pre-splitting at the given breakpoints.
///
/// Breakpoints outside the open interval are ignored; passing the location
/// of every jump or kink keeps each panel smooth, which is what makes the
/// fixed-order rule converge.
pub fn integrate_segmented<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<Quadrature, QuadError> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut sampler = Sampler {
        f: &mut f,
        evaluations: 0,
        diverged_at: None,
        threshold: opts.divergence_threshold,
    };

    let mut panels: Vec<Panel> = Vec::with_capacity(cuts.len() + 1);
    let mut start = lo;
    for cut in cuts.into_iter().chain(std::iter::once(hi)) {
        if cut > start {
            let panel = sampler.panel(start, cut);
            if let Some(near) = sampler.diverged_at {
                return Err(QuadError::Divergent {
                    near,
                    threshold: opts.divergence_threshold,
                });
            }
            panels.push(panel);
            start = cut;
        }
    }

    // Globally adaptive refinement: repeatedly bisect the panel with the
    // largest error estimate until the total is within tolerance.
    let mut splits = 0;
    loop {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        let total_value: f64 = panels.iter().map(|p| p.value).sum();
        let noise_floor = 32.0 * f64::EPSILON * panels.iter().map(|p| p.value.abs()).sum::<f64>();
        if total_error <= opts.abs_tol.max(noise_floor) {
            return Ok(Quadrature {
                value: total_value,
                error_estimate: total_error,
                evaluations: sampler.evaluations,
            });
        }
        if splits >= opts.max_splits {
            return Err(QuadError::NonConvergent {
                achieved: total_error,
                requested: opts.abs_tol,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { lo, hi, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval at floating-point resolution; keep its estimate.
            let panel = sampler.panel(lo, hi);
            let degenerate = Panel {
                error: 0.0,
                ..panel
            };
            panels.push(degenerate);
            splits += 1;
            continue;
        }
        for (a, b) in [(lo, mid), (mid, hi)] {
            let panel = sampler.panel(a, b);
            if let Some(near) = sampler.diverged_at {
                return Err(QuadError::Divergent {
                    near,
                    threshold: opts.divergence_threshold,
                });
            }
            panels.push(panel);
        }
        splits += 1;
    }
}
