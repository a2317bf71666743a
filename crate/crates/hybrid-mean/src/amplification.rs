//! Privacy amplification against output-viewing adversaries.
//!
//! A coalition that only sees the released hybrid estimate observes each
//! user's contribution through the estimate's total noise, not through the
//! user's own report alone. Under the Gaussian mechanism the joint noise is
//! Gaussian, so the observed release is itself a Gaussian mechanism with a
//! larger effective scale and the users enjoy a smaller effective epsilon.
//! Under the Laplace mechanism no such amplification holds: the tail ratio
//! of summed Laplace noise approaches the single-report bound, certified by
//! [`laplace_no_amplification_certificate`].

use crate::analytics::{Setting, WeightRule};
use crate::core::{Cohort, GroupDistribution, PrivacyParams};
use crate::estimators::HybridWeight;
use crate::mechanisms::{
    calibrate, laplace_sum_ratio_grid_sup, Mechanism, MechanismKind, NoiseScales,
};
use crate::{Error, Result};

/// Adversary model: a coalition of local-group users who pool their own
/// reports and see the released estimate. Members can subtract their own
/// noise, so only the remaining `|L| - adversarial_lm_count` honest local
/// reports (and the curator's noise) blur the release for them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoalitionModel {
    adversarial_lm_count: u64,
}

impl CoalitionModel {
    pub fn new(adversarial_lm_count: u64) -> Self {
        CoalitionModel {
            adversarial_lm_count,
        }
    }

    pub fn adversarial_lm_count(&self) -> u64 {
        self.adversarial_lm_count
    }
}

/// Which trust group a guarantee refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Tcm,
    Lm,
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Group::Tcm => write!(f, "tcm"),
            Group::Lm => write!(f, "lm"),
        }
    }
}

/// Amplified guarantee for one `(weight, cohort, coalition)` configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationReport {
    /// Headline effective epsilon: the larger of the two per-group values,
    /// capped at the original per-report epsilon (an adversary can always
    /// fall back to analyzing a single report, so the guarantee never gets
    /// worse than the original).
    pub epsilon_prime: f64,
    /// Variance of the joint noise on the released estimate as the
    /// coalition sees it.
    pub s_prime_sq: f64,
    /// Which group's guarantee is the binding (larger) one; ties resolve to
    /// the local group.
    pub binding_group: Group,
    /// Per-group effective epsilons `(opt-in users', local users')`.
    pub per_group_epsilon: (f64, f64),
    /// The original per-report epsilon implied by the scales.
    pub epsilon_original: f64,
}

impl AmplificationReport {
    /// The value the amplification statement's printed case split selects:
    /// the branch whose sensitivity coefficient is smaller (`w/c` when
    /// `w <= c`, else `(1-w)/(1-c)`). The headline [`epsilon_prime`] instead
    /// takes the larger branch, so that both groups are covered.
    ///
    /// [`epsilon_prime`]: AmplificationReport::epsilon_prime
    pub fn theorem_epsilon(&self) -> f64 {
        self.per_group_epsilon.0.min(self.per_group_epsilon.1)
    }
}

/// Variance of the joint noise in the released hybrid estimate after the
/// coalition subtracts its own members' noise:
///
/// ```text
/// s'^2 = w^2 s_T^2 + ((1-w) / ((1-c) n))^2 |L \ A| s_L^2
/// ```
///
/// Requirement: the coalition cannot exceed the local group,
/// `adversarial_lm_count <= lm_count`.
pub fn joint_noise_variance(
    w: &HybridWeight,
    cohort: &Cohort,
    scales: &NoiseScales,
    coalition: &CoalitionModel,
) -> Result<f64> {
    let adv = coalition.adversarial_lm_count();
    if adv > cohort.lm_count() {
        return Err(Error::invalid(format!(
            "adversarial_lm_count must not exceed the local group size {}, got {adv}",
            cohort.lm_count()
        )));
    }
    let honest = (cohort.lm_count() - adv) as f64;
    let w = w.value();
    let per_report = (1.0 - w) / ((1.0 - cohort.c()) * cohort.n() as f64);
    Ok(w * w * scales.s_t_sq() + per_report * per_report * honest * scales.s_l_sq())
}

/// Amplified `(epsilon', delta)`-guarantee under the Gaussian mechanism for
/// data in `[0, m]`.
///
/// The release seen by the coalition is a Gaussian mechanism with scale
/// `n s'` against a substitution of one user's value, whose sensitivity
/// coefficient is `w/c` for an opt-in user and `(1-w)/(1-c)` for a local
/// user. With `k = sqrt(2 ln(1.25/delta))`:
///
/// ```text
/// eps'_group = k m / (n s') * coeff_group
/// ```
///
/// Zero-coefficient groups (`w = 0` or `w = 1`) get epsilon 0 outright: the
/// release provably carries no trace of them even when `s'` is 0.
///
/// Errors on Laplace scales: summed Laplace noise admits no amplification;
/// see [`laplace_no_amplification_certificate`].
pub fn amplified_epsilon_gaussian(
    w: &HybridWeight,
    cohort: &Cohort,
    scales: &NoiseScales,
    coalition: &CoalitionModel,
    delta: f64,
    m: f64,
) -> Result<AmplificationReport> {
    if scales.kind() != MechanismKind::Gaussian {
        return Err(Error::invalid(
            "amplification is a Gaussian-mechanism statement; for Laplace scales use \
             laplace_no_amplification_certificate",
        ));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::invalid(format!(
            "m must be positive and finite, got {m}"
        )));
    }
    let s_prime_sq = joint_noise_variance(w, cohort, scales, coalition)?;
    let k = (2.0 * (1.25 / delta).ln()).sqrt();
    let epsilon_original = if scales.s_l() == 0.0 {
        f64::INFINITY
    } else {
        k * m / scales.s_l()
    };
    let base = k * m / (cohort.n() as f64 * s_prime_sq.sqrt()); // inf when s' = 0
    let (c, wv) = (cohort.c(), w.value());
    let coeff_t = wv / c;
    let coeff_l = (1.0 - wv) / (1.0 - c);
    // A zero coefficient must dominate an infinite base: no dependence on
    // the group means epsilon 0 regardless of the noise level.
    let eps_t = if coeff_t == 0.0 { 0.0 } else { base * coeff_t };
    let eps_l = if coeff_l == 0.0 { 0.0 } else { base * coeff_l };
    let binding_group = if eps_l >= eps_t { Group::Lm } else { Group::Tcm };
    let epsilon_prime = eps_t.max(eps_l).min(epsilon_original);
    Ok(AmplificationReport {
        epsilon_prime,
        s_prime_sq,
        binding_group,
        per_group_epsilon: (eps_t, eps_l),
        epsilon_original,
    })
}

/// One row of an amplification sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationCell {
    pub n: u64,
    pub c: f64,
    pub adversarial_fraction: f64,
    pub adversarial_count: u64,
    pub w: f64,
    pub eps_tcm_group: f64,
    pub eps_lm_group: f64,
    /// Smaller-branch value selected by the printed case split.
    pub eps_theorem: f64,
    /// Headline guarantee: larger branch capped at the original epsilon.
    pub eps_headline: f64,
}

/// Sweeps the amplified guarantee over cohorts and adversarial fractions
/// under the Gaussian mechanism calibrated for the given data distribution
/// (used homogeneously: both groups share it; the weight rule may need its
/// variance). Adversarial counts are `round(fraction * |L|)`.
pub fn amplification_sweep(
    cohorts: &[Cohort],
    adversarial_fractions: &[f64],
    base: &PrivacyParams,
    dist: &GroupDistribution,
    weight_rule: WeightRule,
) -> Result<Vec<AmplificationCell>> {
    if cohorts.is_empty() || adversarial_fractions.is_empty() {
        return Err(Error::invalid(
            "cohorts and adversarial_fractions must be nonempty",
        ));
    }
    for &f in adversarial_fractions {
        if !f.is_finite() || !(0.0..=1.0).contains(&f) {
            return Err(Error::invalid(format!(
                "adversarial fractions must lie in [0, 1], got {f}"
            )));
        }
    }
    let mech = Mechanism::new(MechanismKind::Gaussian, *base)?;
    let mut cells = Vec::with_capacity(cohorts.len() * adversarial_fractions.len());
    for cohort in cohorts {
        let scales = calibrate(&mech, cohort, dist.support_max())?;
        let setting = Setting::with_scales(*dist, *dist, *cohort, scales);
        let w = weight_rule.resolve(&setting)?;
        for &frac in adversarial_fractions {
            let adv = (frac * cohort.lm_count() as f64).round() as u64;
            let adv = adv.min(cohort.lm_count());
            let report = amplified_epsilon_gaussian(
                &w,
                cohort,
                &scales,
                &CoalitionModel::new(adv),
                base.delta(),
                dist.support_max(),
            )?;
            cells.push(AmplificationCell {
                n: cohort.n(),
                c: cohort.c(),
                adversarial_fraction: frac,
                adversarial_count: adv,
                w: w.value(),
                eps_tcm_group: report.per_group_epsilon.0,
                eps_lm_group: report.per_group_epsilon.1,
                eps_theorem: report.theorem_epsilon(),
                eps_headline: report.epsilon_prime,
            });
        }
    }
    Ok(cells)
}

/// Negative certificate for the Laplace mechanism: the observed supremum of
/// the log-ratio of the summed honest noise density under a `shift = m`
/// substitution, together with its analytic limit `m / b_L`, which equals
/// the original epsilon of a single calibrated report. The supremum grid is
/// described at [`laplace_sum_privacy_ratio`]; the observed value sits just
/// below the limit and rules out any materially smaller effective epsilon.
///
/// [`laplace_sum_privacy_ratio`]: crate::mechanisms::laplace_sum_privacy_ratio
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceCertificate {
    /// `m / b_L`, the single-report pure-DP parameter.
    pub epsilon_original: f64,
    /// Analytic supremum of the log-ratio (equals `epsilon_original`).
    pub limit: f64,
    /// Grid supremum of the log-ratio; approaches `limit` from below.
    pub sup_log_ratio: f64,
    /// Number of honest local reports whose noise the coalition cannot
    /// subtract.
    pub honest_lm_count: u64,
}

/// Builds the Laplace no-amplification certificate for a cohort whose local
/// reports carry Laplace noise of variance `s_L^2 = 2 b_L^2`.
///
/// Requirements: Laplace scales with `s_L^2 > 0`, data bound `m > 0`, and at
/// least one honest local user (`adversarial_lm_count < lm_count`).
pub fn laplace_no_amplification_certificate(
    cohort: &Cohort,
    scales: &NoiseScales,
    coalition: &CoalitionModel,
    m: f64,
) -> Result<LaplaceCertificate> {
    if scales.kind() != MechanismKind::Laplace {
        return Err(Error::invalid(
            "the no-amplification certificate applies to Laplace scales",
        ));
    }
    if scales.s_l_sq() == 0.0 {
        return Err(Error::invalid(
            "s_L^2 must be positive to certify anything about the noise ratio",
        ));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::invalid(format!(
            "m must be positive and finite, got {m}"
        )));
    }
    let adv = coalition.adversarial_lm_count();
    if adv >= cohort.lm_count() {
        return Err(Error::invalid(format!(
            "at least one honest local user is required; local group has {}, \
             coalition claims {adv}",
            cohort.lm_count()
        )));
    }
    let honest = cohort.lm_count() - adv;
    let n_terms = u32::try_from(honest).map_err(|_| {
        Error::invalid(format!(
            "honest local count {honest} is too large for the density series"
        ))
    })?;
    let b = (scales.s_l_sq() / 2.0).sqrt();
    let limit = m / b;
    let sup = laplace_sum_ratio_grid_sup(b, n_terms, m)?;
    Ok(LaplaceCertificate {
        epsilon_original: limit,
        limit,
        sup_log_ratio: sup,
        honest_lm_count: honest,
    })
}

#[cfg(test)]
// Frozen reference values are written with a full 17-digit mantissa on
// purpose: they pin exact f64 bits.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian_scales(cohort: &Cohort, eps: f64, delta: f64, m: f64) -> NoiseScales {
        calibrate(&Mechanism::gaussian(eps, delta).unwrap(), cohort, m).unwrap()
    }

    #[test]
    fn joint_noise_matches_frozen_reference() {
        // eps = 1, delta = 1e-7, m = 1, n = 1000, c = 0.1, w = 0.5, |A| = 0.
        let cohort = Cohort::new(1000, 0.1).unwrap();
        let scales = gaussian_scales(&cohort, 1.0, 1e-7, 1.0);
        let w = HybridWeight::new(0.5).unwrap();
        let s2 = joint_noise_variance(&w, &cohort, &scales, &CoalitionModel::new(0)).unwrap();
        assert_relative_eq!(s2, 9.89552818359836460e-3, max_relative = 1e-12);
    }

    #[test]
    fn amplified_epsilon_matches_frozen_reference() {
        let cohort = Cohort::new(1000, 0.1).unwrap();
        let scales = gaussian_scales(&cohort, 1.0, 1e-7, 1.0);
        let w = HybridWeight::new(0.5).unwrap();
        let report = amplified_epsilon_gaussian(
            &w,
            &cohort,
            &scales,
            &CoalitionModel::new(0),
            1e-7,
            1.0,
        )
        .unwrap();
        assert_relative_eq!(
            report.per_group_epsilon.0,
            2.87347885566345385e-1,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            report.per_group_epsilon.1,
            3.19275428407050435e-2,
            max_relative = 1e-12
        );
        // w > c: the case split picks the local branch.
        assert_relative_eq!(
            report.theorem_epsilon(),
            3.19275428407050435e-2,
            max_relative = 1e-12
        );
        assert_eq!(report.binding_group, Group::Tcm);
        assert_relative_eq!(report.epsilon_original, 1.0, max_relative = 1e-12);
        assert!(report.epsilon_prime <= 1.0);
    }

    #[test]
    fn all_adversarial_corner_recovers_the_original_epsilon() {
        // w = c and every local user adversarial: only the curator's noise
        // remains, whose scale is exactly s_L / (c n); the observed release
        // then has per-group epsilon exactly the original epsilon.
        for (n, c, eps) in [(1000u64, 0.1, 1.0), (2540u64, 0.25, 0.3)] {
            let cohort = Cohort::new(n, c).unwrap();
            let scales = gaussian_scales(&cohort, eps, 1e-7, 1.0);
            let w = HybridWeight::new(cohort.c()).unwrap();
            let coalition = CoalitionModel::new(cohort.lm_count());
            let report =
                amplified_epsilon_gaussian(&w, &cohort, &scales, &coalition, 1e-7, 1.0).unwrap();
            assert_relative_eq!(report.epsilon_prime, eps, max_relative = 1e-9);
            assert_relative_eq!(report.per_group_epsilon.0, eps, max_relative = 1e-9);
            assert_relative_eq!(report.per_group_epsilon.1, eps, max_relative = 1e-9);
        }
    }

    #[test]
    fn endpoint_weights_zero_out_the_absent_group() {
        let cohort = Cohort::new(1000, 0.1).unwrap();
        let scales = gaussian_scales(&cohort, 1.0, 1e-7, 1.0);
        // w = 0: no curator term. Even with every local user adversarial
        // (s' = 0), the opt-in group's epsilon must be 0, not NaN.
        let coalition = CoalitionModel::new(cohort.lm_count());
        let report = amplified_epsilon_gaussian(
            &HybridWeight::new(0.0).unwrap(),
            &cohort,
            &scales,
            &coalition,
            1e-7,
            1.0,
        )
        .unwrap();
        assert_eq!(report.per_group_epsilon.0, 0.0);
        assert!(report.per_group_epsilon.1.is_infinite());
        // Headline falls back to the original guarantee.
        assert_relative_eq!(report.epsilon_prime, 1.0, max_relative = 1e-12);

        let report = amplified_epsilon_gaussian(
            &HybridWeight::new(1.0).unwrap(),
            &cohort,
            &scales,
            &CoalitionModel::new(0),
            1e-7,
            1.0,
        )
        .unwrap();
        assert_eq!(report.per_group_epsilon.1, 0.0);
        assert!(report.per_group_epsilon.0 > 0.0);
    }

    #[test]
    fn amplified_epsilon_is_monotone_in_the_protective_quantities() {
        let delta = 1e-7;
        let w = HybridWeight::new(0.4).unwrap();
        // More honest local users (fewer adversaries): epsilon' nonincreasing.
        let cohort = Cohort::new(1000, 0.1).unwrap();
        let scales = gaussian_scales(&cohort, 1.0, delta, 1.0);
        let mut prev = f64::INFINITY;
        for adv in [900u64, 600, 300, 0] {
            let r = amplified_epsilon_gaussian(
                &w,
                &cohort,
                &scales,
                &CoalitionModel::new(adv),
                delta,
                1.0,
            )
            .unwrap();
            assert!(r.epsilon_prime <= prev + 1e-15, "adv {adv}");
            prev = r.epsilon_prime;
        }
        // Larger n at fixed c: epsilon' nonincreasing.
        let mut prev = f64::INFINITY;
        for n in [500u64, 1000, 4000, 16000] {
            let cohort = Cohort::new(n, 0.1).unwrap();
            let scales = gaussian_scales(&cohort, 1.0, delta, 1.0);
            let r = amplified_epsilon_gaussian(
                &w,
                &cohort,
                &scales,
                &CoalitionModel::new(0),
                delta,
                1.0,
            )
            .unwrap();
            assert!(r.epsilon_prime <= prev + 1e-15, "n {n}");
            prev = r.epsilon_prime;
        }
    }

    #[test]
    fn coalition_larger_than_local_group_is_rejected() {
        let cohort = Cohort::new(100, 0.5).unwrap();
        let scales = gaussian_scales(&cohort, 1.0, 1e-7, 1.0);
        let w = HybridWeight::new(0.5).unwrap();
        assert!(joint_noise_variance(&w, &cohort, &scales, &CoalitionModel::new(51)).is_err());
    }

    #[test]
    fn laplace_scales_are_rejected_with_a_pointer_to_the_certificate() {
        let cohort = Cohort::new(100, 0.5).unwrap();
        let scales = calibrate(&Mechanism::laplace(1.0).unwrap(), &cohort, 1.0).unwrap();
        let w = HybridWeight::new(0.5).unwrap();
        let err = amplified_epsilon_gaussian(
            &w,
            &cohort,
            &scales,
            &CoalitionModel::new(0),
            1e-7,
            1.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("laplace_no_amplification_certificate"));
    }

    #[test]
    fn certificate_sup_approaches_the_single_report_epsilon() {
        let cohort = Cohort::new(60, 0.2).unwrap();
        let scales = calibrate(&Mechanism::laplace(0.8).unwrap(), &cohort, 1.0).unwrap();
        let cert =
            laplace_no_amplification_certificate(&cohort, &scales, &CoalitionModel::new(8), 1.0)
                .unwrap();
        assert_eq!(cert.honest_lm_count, 40);
        assert_relative_eq!(cert.epsilon_original, 0.8, max_relative = 1e-12);
        assert_relative_eq!(cert.limit, 0.8, max_relative = 1e-12);
        assert!(cert.sup_log_ratio <= cert.limit + 1e-12);
        assert!((cert.limit - cert.sup_log_ratio).abs() < 1e-3);
    }

    #[test]
    fn certificate_requires_an_honest_local_user() {
        let cohort = Cohort::new(60, 0.2).unwrap();
        let scales = calibrate(&Mechanism::laplace(0.8).unwrap(), &cohort, 1.0).unwrap();
        assert!(laplace_no_amplification_certificate(
            &cohort,
            &scales,
            &CoalitionModel::new(48),
            1.0
        )
        .is_err());
        let gaussian = gaussian_scales(&cohort, 0.8, 1e-7, 1.0);
        assert!(laplace_no_amplification_certificate(
            &cohort,
            &gaussian,
            &CoalitionModel::new(0),
            1.0
        )
        .is_err());
    }

    #[test]
    fn sweep_produces_one_cell_per_combination() {
        let cohorts = vec![Cohort::new(1000, 0.1).unwrap(), Cohort::new(1000, 0.02).unwrap()];
        let fractions = vec![0.0, 0.5, 1.0];
        let dist = GroupDistribution::new(0.5, 1.0 / 36.0, 1.0).unwrap();
        let params = PrivacyParams::new(1.0, 1e-7).unwrap();
        let cells =
            amplification_sweep(&cohorts, &fractions, &params, &dist, WeightRule::Kvh).unwrap();
        assert_eq!(cells.len(), 6);
        for cell in &cells {
            assert!(cell.eps_headline <= 1.0 + 1e-12);
            assert!(cell.eps_theorem <= cell.eps_headline + 1e-12);
        }
        // Within a cohort, headline epsilon is nondecreasing in the
        // adversarial fraction.
        for pair in cells.chunks(3) {
            assert!(pair[0].eps_headline <= pair[1].eps_headline + 1e-15);
            assert!(pair[1].eps_headline <= pair[2].eps_headline + 1e-15);
        }
    }
}
