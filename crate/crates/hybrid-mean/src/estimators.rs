//! Estimators operating on actual sample arrays.
//!
//! All estimators target the non-private empirical mean of the full cohort,
//! which is the benchmark the closed forms in [`crate::analytics`] measure
//! error against. The hybrid family interpolates between the curator's
//! noised opt-in mean (weight 1) and the average of the local group's noised
//! reports (weight 0); both endpoints share their code path with the
//! interior so the weighted estimators degenerate to the single-group
//! estimators exactly.

use crate::mechanisms::{sample_noise, NoiseRole, NoiseScales};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// One cohort's realized samples, split by trust group, with every value
/// clamped into `[0, support_max]`.
///
/// The noise calibration assumes the bound, so out-of-range values cannot be
/// passed through silently; they are clamped and counted, and the caller can
/// inspect [`SampleSet::clamped_count`] to decide whether the data and the
/// stated bound actually agree.
#[derive(Debug, Clone)]
pub struct SampleSet {
    tcm: Vec<f64>,
    lm: Vec<f64>,
    support_max: f64,
    clamped: u64,
}

impl SampleSet {
    /// Ingests raw per-group samples.
    ///
    /// Requirements: `support_max > 0` finite, both groups nonempty, and no
    /// NaN values (a NaN sample is meaningless and would silently poison
    /// every downstream mean, so it is rejected rather than clamped).
    pub fn new(tcm: Vec<f64>, lm: Vec<f64>, support_max: f64) -> Result<Self> {
        if !support_max.is_finite() || support_max <= 0.0 {
            return Err(Error::invalid(format!(
                "support_max must be positive and finite, got {support_max}"
            )));
        }
        if tcm.is_empty() || lm.is_empty() {
            return Err(Error::invalid(
                "both sample groups must be nonempty (opt-in and local)",
            ));
        }
        let mut set = SampleSet {
            tcm,
            lm,
            support_max,
            clamped: 0,
        };
        for group in [&mut set.tcm, &mut set.lm] {
            for v in group.iter_mut() {
                if v.is_nan() {
                    return Err(Error::invalid("sample values must not be NaN"));
                }
                if *v < 0.0 || *v > support_max {
                    *v = v.clamp(0.0, support_max);
                    set.clamped += 1;
                }
            }
        }
        Ok(set)
    }

    pub fn tcm_values(&self) -> &[f64] {
        &self.tcm
    }

    pub fn lm_values(&self) -> &[f64] {
        &self.lm
    }

    pub fn support_max(&self) -> f64 {
        self.support_max
    }

    /// Number of input values that fell outside `[0, support_max]`.
    pub fn clamped_count(&self) -> u64 {
        self.clamped
    }

    pub fn n(&self) -> usize {
        self.tcm.len() + self.lm.len()
    }

    pub fn tcm_mean(&self) -> f64 {
        self.tcm.iter().sum::<f64>() / self.tcm.len() as f64
    }

    pub fn lm_mean(&self) -> f64 {
        self.lm.iter().sum::<f64>() / self.lm.len() as f64
    }
}

/// Convex weight on the curator's estimate within the hybrid family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridWeight(f64);

impl HybridWeight {
    /// Requirement: `0 <= w <= 1`.
    pub fn new(w: f64) -> Result<Self> {
        if !w.is_finite() || !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid(format!("w must lie in [0, 1], got {w}")));
        }
        Ok(HybridWeight(w))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Non-private empirical mean over the full cohort, the benchmark every
/// private estimator is scored against. Summation order (opt-in group, then
/// local group) matches the zero-noise paths of the estimators so the
/// degenerate identities hold bitwise.
pub fn empirical_mean(samples: &SampleSet) -> f64 {
    let total: f64 = samples.tcm.iter().sum::<f64>() + samples.lm.iter().sum::<f64>();
    total / samples.n() as f64
}

/// Average of the local group's individually noised reports.
fn lm_noised_mean(samples: &SampleSet, scales: &NoiseScales, rng: &mut SeededRng) -> f64 {
    let mut total = 0.0;
    for &x in &samples.lm {
        total += x + sample_noise(scales, NoiseRole::PerUser, rng);
    }
    total / samples.lm.len() as f64
}

/// Shared hybrid evaluation. The endpoint guards skip the unused group's
/// term entirely, so `w = 1` is literally the curator-only estimator and
/// `w = 0` literally the local-only estimator: same arithmetic, same noise
/// draws, same result.
fn hybrid_value(samples: &SampleSet, w: f64, scales: &NoiseScales, rng: &mut SeededRng) -> f64 {
    let mut value = 0.0;
    if w > 0.0 {
        value += w * (samples.tcm_mean() + sample_noise(scales, NoiseRole::Curator, rng));
    }
    if w < 1.0 {
        value += (1.0 - w) * lm_noised_mean(samples, scales, rng);
    }
    value
}

/// Curator-only estimator: the opt-in group's mean plus one curator noise
/// draw. Local users contribute nothing.
pub fn tcm_only(samples: &SampleSet, scales: &NoiseScales, rng: &mut SeededRng) -> f64 {
    hybrid_value(samples, 1.0, scales, rng)
}

/// Everyone-local estimator: the mean over the full cohort of per-user
/// noised reports, opt-in users included. This is the world where no trusted
/// curator exists, so even willing users get the heavy per-report noise.
pub fn full_lm(samples: &SampleSet, scales: &NoiseScales, rng: &mut SeededRng) -> f64 {
    let mut total = 0.0;
    for &x in &samples.tcm {
        total += x + sample_noise(scales, NoiseRole::PerUser, rng);
    }
    for &x in &samples.lm {
        total += x + sample_noise(scales, NoiseRole::PerUser, rng);
    }
    total / samples.n() as f64
}

/// Local-group-only estimator: the average of the local group's noised
/// reports. Opt-in users contribute nothing.
pub fn lm_only(samples: &SampleSet, scales: &NoiseScales, rng: &mut SeededRng) -> f64 {
    hybrid_value(samples, 0.0, scales, rng)
}

/// Convex hybrid: `w` times the curator-only estimate plus `1 - w` times the
/// local-only estimate, with independent noise in the two parts.
pub fn hybrid(
    samples: &SampleSet,
    w: HybridWeight,
    scales: &NoiseScales,
    rng: &mut SeededRng,
) -> f64 {
    hybrid_value(samples, w.value(), scales, rng)
}
