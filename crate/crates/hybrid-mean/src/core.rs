//! Shared domain types: per-group distribution moments, the cohort split
//! between trusted-curator and local users, privacy parameters, and the
//! mixture view the two groups induce together.

use crate::{Error, Result};

/// Moment summary of one group's data-generating distribution, supported on
/// `[0, support_max]`.
///
/// Only the first two moments and the support bound enter any closed form in
/// this crate, so the summary is all the analytics need; samplers that
/// realize these moments live in [`crate::experiments`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupDistribution {
    mean: f64,
    variance: f64,
    support_max: f64,
}

impl GroupDistribution {
    /// Builds a validated moment summary.
    ///
    /// Requirements:
    /// - `support_max` is positive and finite,
    /// - `0 <= mean <= support_max`,
    /// - `0 <= variance <= support_max^2 / 4`.
    ///
    /// The variance cap is Popoviciu's inequality for a distribution on
    /// `[0, support_max]`: a larger variance is not achievable by any such
    /// distribution, so the stated moments would be inconsistent and the
    /// constructor rejects them outright.
    pub fn new(mean: f64, variance: f64, support_max: f64) -> Result<Self> {
        if !support_max.is_finite() || support_max <= 0.0 {
            return Err(Error::invalid(format!(
                "support_max must be positive and finite, got {support_max}"
            )));
        }
        if !mean.is_finite() || mean < 0.0 || mean > support_max {
            return Err(Error::invalid(format!(
                "mean must lie in [0, support_max] = [0, {support_max}], got {mean}"
            )));
        }
        let cap = support_max * support_max / 4.0;
        if !variance.is_finite() || variance < 0.0 {
            return Err(Error::invalid(format!(
                "variance must be nonnegative and finite, got {variance}"
            )));
        }
        if variance > cap {
            return Err(Error::invalid(format!(
                "variance {variance} exceeds support_max^2/4 = {cap}; no distribution on \
                 [0, {support_max}] has that variance"
            )));
        }
        Ok(GroupDistribution {
            mean,
            variance,
            support_max,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn support_max(&self) -> f64 {
        self.support_max
    }
}

/// Cohort composition: total user count `n` and opt-in fraction `c`.
///
/// The requested real-valued `c` is kept as-is and is what every closed form
/// in [`crate::analytics`] consumes. The realized partition rounds `c * n`
/// to the nearest integer in `[1, n - 1]`; sample-path code (estimators on
/// arrays, the Monte Carlo harness, K-means) uses the integer counts, and
/// [`Cohort::effective`] produces the cohort whose analytic fraction matches
/// that realized split exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cohort {
    n: u64,
    c: f64,
    tcm_count: u64,
}

impl Cohort {
    /// Builds a validated cohort.
    ///
    /// Requirements: `n >= 2`, `0 < c < 1`, and both `c * n >= 1` and
    /// `(1 - c) * n >= 1` so that neither group is empty.
    pub fn new(n: u64, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "n must be at least 2 so both groups are nonempty, got {n}"
            )));
        }
        if !c.is_finite() || c <= 0.0 || c >= 1.0 {
            return Err(Error::invalid(format!("c must lie in (0, 1), got {c}")));
        }
        let nf = n as f64;
        if c * nf < 1.0 {
            return Err(Error::invalid(format!(
                "c * n must be at least 1 (opt-in group nonempty), got c = {c}, n = {n}"
            )));
        }
        if (1.0 - c) * nf < 1.0 {
            return Err(Error::invalid(format!(
                "(1 - c) * n must be at least 1 (local group nonempty), got c = {c}, n = {n}"
            )));
        }
        let tcm_count = (c * nf).round().clamp(1.0, nf - 1.0) as u64;
        Ok(Cohort { n, c, tcm_count })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// The requested opt-in fraction, used verbatim by all closed forms.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Realized opt-in head count: `round(c * n)` clamped into `[1, n - 1]`.
    pub fn tcm_count(&self) -> u64 {
        self.tcm_count
    }

    /// Realized local head count: `n - tcm_count()`.
    pub fn lm_count(&self) -> u64 {
        self.n - self.tcm_count
    }

    /// The opt-in fraction the rounded partition actually realizes.
    pub fn effective_c(&self) -> f64 {
        self.tcm_count as f64 / self.n as f64
    }

    /// Cohort whose analytic `c` equals [`Cohort::effective_c`], for use when
    /// closed forms must be evaluated exactly where a simulated integer split
    /// operates.
    pub fn effective(&self) -> Cohort {
        Cohort {
            n: self.n,
            c: self.effective_c(),
            tcm_count: self.tcm_count,
        }
    }
}

/// Mixture-level parameters induced by weighting the opt-in group by `c` and
/// the local group by `1 - c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureView {
    pub mu: f64,
    pub sigma_sq: f64,
    pub m: f64,
}

/// Mixture of the two group distributions under the cohort's opt-in fraction.
///
/// `mu = c * mu_T + (1 - c) * mu_L` and `m = max(m_T, m_L)`. The variance is
/// the mixture's second moment minus `mu^2`, which both pools the group
/// variances and adds the spread between the group means, so the reported
/// `sigma_sq` is a genuine variance (a mixture of distinct point masses has
/// positive variance, for example).
pub fn mixture_of(t: &GroupDistribution, l: &GroupDistribution, cohort: &Cohort) -> MixtureView {
    let c = cohort.c();
    let mu = c * t.mean() + (1.0 - c) * l.mean();
    let second_moment = c * (t.mean() * t.mean() + t.variance())
        + (1.0 - c) * (l.mean() * l.mean() + l.variance());
    MixtureView {
        mu,
        sigma_sq: second_moment - mu * mu,
        m: t.support_max().max(l.support_max()),
    }
}

/// Differential-privacy parameters shared by every user.
///
/// `epsilon = +inf` is accepted and calibrates to zero noise; it is the
/// no-privacy limit used by validation experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
}

impl PrivacyParams {
    /// Requirements: `epsilon > 0` (possibly infinite) and `0 <= delta < 1`.
    /// `delta = 0` is pure DP and is only meaningful for the Laplace
    /// mechanism; the Gaussian mechanism additionally requires `delta > 0`,
    /// enforced at [`crate::mechanisms::Mechanism`] construction.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !delta.is_finite() || !(0.0..1.0).contains(&delta) {
            return Err(Error::invalid(format!(
                "delta must lie in [0, 1), got {delta}"
            )));
        }
        Ok(PrivacyParams { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}
