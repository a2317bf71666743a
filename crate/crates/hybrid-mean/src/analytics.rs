//! Exact closed-form error analysis for the estimator family.
//!
//! Every expected squared error here is measured against the non-private
//! empirical mean of the full cohort, with expectation over both the data
//! (group distributions) and the mechanism noise. The decompositions,
//! optimal weights, critical values, improvement ratios, and the
//! privacy-weighted dominance region are all evaluated with the cohort's
//! requested real-valued `c`; see [`crate::core::Cohort`] for how that
//! interacts with realized integer splits.

use crate::core::{mixture_of, Cohort, GroupDistribution, MixtureView};
use crate::estimators::HybridWeight;
use crate::mechanisms::{calibrate, Mechanism, MechanismKind, NoiseScales};
use crate::{Error, Result};

/// Full parameter tuple consumed by the closed forms: both groups' moments,
/// the cohort split, and the calibrated noise scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    t: GroupDistribution,
    l: GroupDistribution,
    cohort: Cohort,
    scales: NoiseScales,
}

impl Setting {
    /// Builds a setting whose scales are calibrated from the same cohort and
    /// from `m = max` of the two support bounds, so all stored pieces are
    /// mutually consistent.
    pub fn new(
        t: GroupDistribution,
        l: GroupDistribution,
        cohort: Cohort,
        mech: &Mechanism,
    ) -> Result<Self> {
        let m = t.support_max().max(l.support_max());
        let scales = calibrate(mech, &cohort, m)?;
        Ok(Setting {
            t,
            l,
            cohort,
            scales,
        })
    }

    /// Assembles a setting from explicit scales. The caller owns the
    /// consistency between the scales and the cohort; this is the entry
    /// point for counterfactual analyses (e.g. evaluating one group's
    /// calibration under another group's parameters).
    pub fn with_scales(
        t: GroupDistribution,
        l: GroupDistribution,
        cohort: Cohort,
        scales: NoiseScales,
    ) -> Self {
        Setting {
            t,
            l,
            cohort,
            scales,
        }
    }

    pub fn t(&self) -> &GroupDistribution {
        &self.t
    }

    pub fn l(&self) -> &GroupDistribution {
        &self.l
    }

    pub fn cohort(&self) -> &Cohort {
        &self.cohort
    }

    pub fn scales(&self) -> &NoiseScales {
        &self.scales
    }

    /// Shared support bound `max(m_T, m_L)`.
    pub fn m(&self) -> f64 {
        self.t.support_max().max(self.l.support_max())
    }

    pub fn mixture(&self) -> MixtureView {
        mixture_of(&self.t, &self.l, &self.cohort)
    }

    /// Whether the two groups have exactly equal means and variances. The
    /// comparison is exact: the homogeneous closed forms are specializations
    /// that hold identically only at equality.
    pub fn homogeneous(&self) -> bool {
        self.t.mean() == self.l.mean() && self.t.variance() == self.l.variance()
    }

    fn c(&self) -> f64 {
        self.cohort.c()
    }

    fn nf(&self) -> f64 {
        self.cohort.n() as f64
    }
}

/// Expected squared error split into its three sources.
///
/// `sampling` is excess error from weighting groups away from their head
/// counts, `privacy` is injected noise, `bias` is the squared systematic
/// offset when group means differ. `total` is always their sum; it is
/// computed in exactly one place so the decomposition cannot drift from the
/// headline number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseBreakdown {
    pub sampling: f64,
    pub privacy: f64,
    pub bias: f64,
    pub total: f64,
}

impl MseBreakdown {
    fn parts(sampling: f64, privacy: f64, bias: f64) -> Self {
        MseBreakdown {
            sampling,
            privacy,
            bias,
            total: sampling + privacy + bias,
        }
    }
}

/// Error of the curator-only estimator: the opt-in mean plus one curator
/// noise draw, scored against the full-cohort empirical mean.
pub fn mse_tcm_only(s: &Setting) -> MseBreakdown {
    let (c, n) = (s.c(), s.nf());
    let omc = 1.0 - c;
    let sampling = omc * omc * s.t.variance() / (c * n) + omc * s.l.variance() / n;
    let privacy = s.scales.s_t_sq();
    let bias_root = omc * (s.t.mean() - s.l.mean());
    MseBreakdown::parts(sampling, privacy, bias_root * bias_root)
}

/// Error of the everyone-local estimator: per-user noise averaged over all
/// `n` users. It is exactly on target for the empirical mean, so sampling
/// and bias are zero.
pub fn mse_full_lm(s: &Setting) -> MseBreakdown {
    MseBreakdown::parts(0.0, s.scales.s_l_sq() / s.nf(), 0.0)
}

/// Error of the local-group-only estimator: the local group's noised-report
/// average, with the opt-in group ignored.
pub fn mse_lm_only(s: &Setting) -> MseBreakdown {
    let (c, n) = (s.c(), s.nf());
    let omc = 1.0 - c;
    let sampling = c * c * s.l.variance() / (omc * n) + c * s.t.variance() / n;
    let privacy = s.scales.s_l_sq() / (omc * n);
    let bias_root = c * (s.l.mean() - s.t.mean());
    MseBreakdown::parts(sampling, privacy, bias_root * bias_root)
}

/// Error of the convex hybrid at weight `w`, the general heterogeneous form:
///
/// ```text
/// E_H(w) = (w-c)^2 [ sigma_T^2/(cn) + sigma_L^2/((1-c)n) ]   sampling
///        + w^2 s_T^2 + (1-w)^2 s_L^2 / ((1-c)n)              privacy
///        + ((w-c)(mu_T - mu_L))^2                            bias
/// ```
///
/// At `w = 1` this is the curator-only error and at `w = 0` the local-only
/// error, term by term.
pub fn mse_hybrid(s: &Setting, w: HybridWeight) -> MseBreakdown {
    let (c, n) = (s.c(), s.nf());
    let omc = 1.0 - c;
    let w = w.value();
    let wc = w - c;
    let sampling = wc * wc * (s.t.variance() / (c * n) + s.l.variance() / (omc * n));
    let privacy = w * w * s.scales.s_t_sq() + (1.0 - w) * (1.0 - w) * s.scales.s_l_sq() / (omc * n);
    let bias_root = wc * (s.t.mean() - s.l.mean());
    MseBreakdown::parts(sampling, privacy, bias_root * bias_root)
}

/// Error-minimizing hybrid weight when the groups share mean and variance.
///
/// ```text
/// w* = c (sigma^2 + s_L^2) / (sigma^2 + c (n s_T^2 (1-c) + s_L^2))
/// ```
///
/// Errors if the setting is heterogeneous (use
/// [`weight_kvh_heterogeneous`], which reduces to this form at equality).
/// In the fully degenerate zero-variance, zero-noise setting every weight
/// has zero error and `c` is returned.
pub fn weight_kvh_homogeneous(s: &Setting) -> Result<HybridWeight> {
    if !s.homogeneous() {
        return Err(Error::invalid(
            "groups differ in mean or variance; use weight_kvh_heterogeneous",
        ));
    }
    let (c, n) = (s.c(), s.nf());
    let sigma_sq = s.t.variance();
    let num = c * (sigma_sq + s.scales.s_l_sq());
    let den = sigma_sq + c * (n * s.scales.s_t_sq() * (1.0 - c) + s.scales.s_l_sq());
    if den == 0.0 {
        return HybridWeight::new(c);
    }
    HybridWeight::new(num / den)
}

/// Error-minimizing hybrid weight in the general heterogeneous setting,
/// using the groups' separate means and variances:
///
/// ```text
/// w* = c (s_L^2 + c sigma_L^2 + (1-c)(c n d^2 + sigma_T^2))
///      / (c s_L^2 + (1-c) c n (d^2 + s_T^2) + c sigma_L^2 + (1-c) sigma_T^2)
/// ```
///
/// with `d = mu_L - mu_T`. The numerator never exceeds the denominator, so
/// the weight is always a valid convex coefficient; the degenerate
/// all-zeros setting returns `c`.
pub fn weight_kvh_heterogeneous(s: &Setting) -> HybridWeight {
    let (c, n) = (s.c(), s.nf());
    let omc = 1.0 - c;
    let d = s.l.mean() - s.t.mean();
    let num = c * (s.scales.s_l_sq() + c * s.l.variance() + omc * (c * n * d * d + s.t.variance()));
    let den = c * s.scales.s_l_sq()
        + omc * c * n * (d * d + s.scales.s_t_sq())
        + c * s.l.variance()
        + omc * s.t.variance();
    if den == 0.0 {
        return HybridWeight::new(c).expect("c lies in (0, 1)");
    }
    HybridWeight::new(num / den).expect("ratio of nonnegative terms bounded by 1")
}

/// Privacy-weighted hybrid weight: minimizes the privacy error alone,
/// ignoring sampling error, so it needs no knowledge of the data variance.
///
/// ```text
/// w_PWH = s_L^2 / (s_L^2 + (1-c) n s_T^2)
/// ```
///
/// With both noise variances zero every weight has zero privacy error and 1
/// is returned (the noiseless-curator convention); with `s_T^2 = 0` the
/// formula itself yields 1.
pub fn weight_pwh(s: &Setting) -> HybridWeight {
    let den = s.scales.s_l_sq() + (1.0 - s.c()) * s.nf() * s.scales.s_t_sq();
    if den == 0.0 {
        return HybridWeight::new(1.0).expect("1 is a valid weight");
    }
    HybridWeight::new(s.scales.s_l_sq() / den).expect("ratio of nonnegative terms bounded by 1")
}

/// How the hybrid weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    /// Known-variance optimal weight; dispatches on [`Setting::homogeneous`].
    Kvh,
    /// Privacy-weighted heuristic, variance-free.
    Pwh,
    /// Naive head-count weight `w = c`.
    Nwh,
    /// A fixed weight in `[0, 1]`.
    Fixed(f64),
}

impl WeightRule {
    /// Resolves the rule to a concrete weight for the given setting.
    pub fn resolve(&self, s: &Setting) -> Result<HybridWeight> {
        match self {
            WeightRule::Kvh => {
                if s.homogeneous() {
                    weight_kvh_homogeneous(s)
                } else {
                    Ok(weight_kvh_heterogeneous(s))
                }
            }
            WeightRule::Pwh => Ok(weight_pwh(s)),
            WeightRule::Nwh => HybridWeight::new(s.c()),
            WeightRule::Fixed(w) => HybridWeight::new(*w),
        }
    }
}

impl std::str::FromStr for WeightRule {
    type Err = Error;

    fn from_str(raw: &str) -> Result<Self> {
        match raw {
            "kvh" => Ok(WeightRule::Kvh),
            "pwh" => Ok(WeightRule::Pwh),
            "nwh" => Ok(WeightRule::Nwh),
            other => {
                if let Some(val) = other.strip_prefix("fixed:") {
                    let w: f64 = val.parse().map_err(|_| {
                        Error::invalid(format!("weight must be fixed:<number>, got {other}"))
                    })?;
                    HybridWeight::new(w)?;
                    Ok(WeightRule::Fixed(w))
                } else {
                    Err(Error::invalid(format!(
                        "weight must be one of kvh, pwh, nwh, fixed:<w>, got {other}"
                    )))
                }
            }
        }
    }
}

impl std::fmt::Display for WeightRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightRule::Kvh => write!(f, "kvh"),
            WeightRule::Pwh => write!(f, "pwh"),
            WeightRule::Nwh => write!(f, "nwh"),
            WeightRule::Fixed(w) => write!(f, "fixed:{w}"),
        }
    }
}

/// Error of the known-variance hybrid (at its own optimal weight).
pub fn mse_kvh(s: &Setting) -> MseBreakdown {
    let w = WeightRule::Kvh
        .resolve(s)
        .expect("dispatch matches homogeneity");
    mse_hybrid(s, w)
}

/// Error of the privacy-weighted hybrid (at its heuristic weight).
pub fn mse_pwh(s: &Setting) -> MseBreakdown {
    mse_hybrid(s, weight_pwh(s))
}

/// Error of the naive head-count hybrid `w = c`. Its sampling error and bias
/// are exactly zero and its privacy error is `c^2 s_T^2 + (1-c) s_L^2 / n`.
pub fn mse_nwh(s: &Setting) -> MseBreakdown {
    let w = HybridWeight::new(s.c()).expect("c lies in (0, 1)");
    mse_hybrid(s, w)
}

/// Thresholds on `c` and `n` that bracket where the curator-only baseline
/// beats the everyone-local baseline.
///
/// Diagnostic only: [`improvement_R`]/[`improvement_r`] always pick the
/// better/worse baseline by direct comparison of the two errors, never by
/// these thresholds. The two printed threshold claims disagree about the
/// direction of the `n` comparison, and [`critical_value_diagnostic`]
/// records whether each of them matches the direct comparison for a given
/// setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub c_crit: f64,
    pub n_crit: f64,
}

/// Critical opt-in fraction and cohort size for the given setting.
///
/// `c_crit` is `sigma_L^2 / (sigma_L^2 + s_L^2)` at equal group variances
/// and the quadratic-root form otherwise; `n_crit` is the general-form
/// threshold. Either value may land outside its meaningful range (e.g. a
/// negative `n_crit`), in which case the corresponding comparison is vacuous
/// for all valid parameters.
pub fn critical_values(s: &Setting) -> CriticalValues {
    let c = s.c();
    let (vt, vl) = (s.t.variance(), s.l.variance());
    let sl2 = s.scales.s_l_sq();
    let c_crit = if vt == vl {
        vl / (vl + sl2)
    } else {
        let root = ((vl - sl2) * (vl - sl2) + 4.0 * sl2 * vt).sqrt();
        (2.0 * vt - vl + sl2 - root) / (2.0 * (vt - vl))
    };
    let omc = 1.0 - c;
    let mu_gap = omc * (s.t.mean() - s.l.mean());
    let n_crit =
        (c * sl2 + omc * (omc * vt - c * vl)) / (c * (mu_gap * mu_gap + s.scales.s_t_sq()));
    CriticalValues { c_crit, n_crit }
}

/// [`critical_values`] plus a consistency report against the direct
/// comparison of the two baseline errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValueDiagnostic {
    pub values: CriticalValues,
    /// The Laplace-specific homogeneous threshold (recovered from the
    /// calibrated scales), when the setting is Laplace and homogeneous with
    /// nonzero local noise.
    pub n_crit_laplace: Option<f64>,
    /// Direct comparison: curator-only error does not exceed everyone-local
    /// error.
    pub tcm_no_worse: bool,
    /// Whether `c > c_crit && n <= n_crit` agrees with the direct comparison.
    pub general_split_agrees: bool,
    /// Whether `c > c_crit && n >= n_crit_laplace` agrees with the direct
    /// comparison (the Laplace-form claim compares `n` in the opposite
    /// direction from the general form).
    pub laplace_split_agrees: Option<bool>,
}

pub fn critical_value_diagnostic(s: &Setting) -> CriticalValueDiagnostic {
    let values = critical_values(s);
    let (c, n) = (s.c(), s.nf());
    let tcm_no_worse = mse_tcm_only(s).total <= mse_full_lm(s).total;
    let general_split_agrees = ((c > values.c_crit) && (n <= values.n_crit)) == tcm_no_worse;

    let laplace_homog = s.scales.kind() == MechanismKind::Laplace
        && s.homogeneous()
        && s.scales.s_l_sq() > 0.0;
    let n_crit_laplace = laplace_homog.then(|| {
        let m = s.m();
        // Calibration gives s_L^2 = 2 m^2 / eps^2, so eps^2 sigma^2 is
        // recoverable without carrying eps around.
        let eps_sq_sigma_sq = 2.0 * m * m * s.t.variance() / s.scales.s_l_sq();
        2.0 * m * m / (c * (2.0 * c * m * m - (1.0 - c) * eps_sq_sigma_sq))
    });
    let laplace_split_agrees =
        n_crit_laplace.map(|ncl| ((c > values.c_crit) && (n >= ncl)) == tcm_no_worse);

    CriticalValueDiagnostic {
        values,
        n_crit_laplace,
        tcm_no_worse,
        general_split_agrees,
        laplace_split_agrees,
    }
}

/// Relative improvement of a target error over the better baseline:
/// `R = min(E_T, E_F) / target`. Values above 1 mean the target estimator
/// beats both baselines. Requirement: `target_mse > 0` finite.
#[allow(non_snake_case)]
pub fn improvement_R(s: &Setting, target_mse: f64) -> Result<f64> {
    if !target_mse.is_finite() || target_mse <= 0.0 {
        return Err(Error::invalid(format!(
            "target_mse must be positive and finite, got {target_mse}"
        )));
    }
    let e_t = mse_tcm_only(s).total;
    let e_f = mse_full_lm(s).total;
    Ok(e_t.min(e_f) / target_mse)
}

/// Relative improvement over the worse baseline:
/// `r = max(E_T, E_F) / target`. Requirement: `target_mse > 0` finite.
pub fn improvement_r(s: &Setting, target_mse: f64) -> Result<f64> {
    if !target_mse.is_finite() || target_mse <= 0.0 {
        return Err(Error::invalid(format!(
            "target_mse must be positive and finite, got {target_mse}"
        )));
    }
    let e_t = mse_tcm_only(s).total;
    let e_f = mse_full_lm(s).total;
    Ok(e_t.max(e_f) / target_mse)
}

/// Exact Laplace-homogeneous region where the privacy-weighted hybrid
/// strictly beats both baselines, i.e. where `R(E_PWH) > 1`.
///
/// With `y = eps^2 sigma^2` (recovered from the calibrated scales):
///
/// - `c n <= 1`: false (the curator's noise is at least one local report's,
///   and the curator-only baseline is already at least as good);
/// - else if `y (1 - c) <= 2 c m^2`: true for every `n`;
/// - else: true exactly when
///   `n < (1 - c)(2 m^2 + y) / (c (y (1 - c) - 2 c m^2))`.
///
/// Requirements: Laplace scales and a homogeneous setting. A noiseless
/// setting (`s_L^2 = 0`) returns false: with no noise anywhere the
/// everyone-local baseline is already exact.
pub fn pwh_dominance_region(s: &Setting) -> Result<bool> {
    if s.scales.kind() != MechanismKind::Laplace {
        return Err(Error::invalid(
            "the dominance region is a Laplace characterization; scales have the \
             wrong mechanism kind",
        ));
    }
    if !s.homogeneous() {
        return Err(Error::invalid(
            "the dominance region requires a homogeneous setting (equal group \
             means and variances)",
        ));
    }
    if s.scales.s_l_sq() == 0.0 {
        return Ok(false);
    }
    let (c, n) = (s.c(), s.nf());
    let cn = c * n;
    if cn <= 1.0 {
        return Ok(false);
    }
    let m = s.m();
    let two_m_sq = 2.0 * m * m;
    let y = two_m_sq * s.t.variance() / s.scales.s_l_sq(); // eps^2 sigma^2
    if y * (1.0 - c) <= c * two_m_sq {
        return Ok(true);
    }
    Ok(n < (1.0 - c) * (two_m_sq + y) / (c * (y * (1.0 - c) - c * two_m_sq)))
}

/// Axes for [`kvh_improvement_bound_sweep`]. `n` values are exact cohort
/// sizes; combinations that violate the cohort invariants (either group
/// empty) are skipped and counted rather than failing the sweep.
#[derive(Debug, Clone)]
pub struct ParameterGrid {
    pub n: Vec<u64>,
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub sigma_sq: Vec<f64>,
    pub m: f64,
    /// Also evaluate, for each `n`, the near-extremal point
    /// `c = kvh_witness_c(n)`, `sigma^2 = m^2/4`, `eps = 1`, which approaches
    /// the supremum of the improvement ratio as `n` grows.
    pub include_witness: bool,
}

/// Result of sweeping `R(E_KVH)` over a [`ParameterGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub min_improvement: f64,
    pub max_improvement: f64,
    /// `(n, c, epsilon, sigma_sq)` attaining `max_improvement`.
    pub argmax: (u64, f64, f64, f64),
    pub points_evaluated: u64,
    pub points_skipped: u64,
}

/// Opt-in fraction of the near-extremal family for the improvement bound:
/// `c(n) = (1 + sqrt((288 + n) / n)) / 18`. Along this family with
/// `sigma^2 = m^2/4` and `eps = 1`, `R(E_KVH)` approaches 17/8 from below as
/// `n` grows.
pub fn kvh_witness_c(n: f64) -> f64 {
    (1.0 + ((288.0 + n) / n).sqrt()) / 18.0
}

/// Sweeps the KVH improvement ratio `R(E_KVH)` over the grid under the
/// Laplace mechanism in the homogeneous setting, reporting the extremes.
/// The ratio provably stays within `[1, 16/7)` for `eps <= 1` and
/// `sigma^2 <= m^2/4`; the sweep enforces those prerequisites on its axes.
pub fn kvh_improvement_bound_sweep(grid: &ParameterGrid) -> Result<SweepSummary> {
    if grid.n.is_empty() || grid.c.is_empty() || grid.epsilon.is_empty() || grid.sigma_sq.is_empty()
    {
        return Err(Error::invalid("every grid axis must be nonempty"));
    }
    if !grid.m.is_finite() || grid.m <= 0.0 {
        return Err(Error::invalid(format!(
            "m must be positive and finite, got {}",
            grid.m
        )));
    }
    let var_cap = grid.m * grid.m / 4.0;
    for &eps in &grid.epsilon {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid(format!(
                "epsilon must lie in (0, 1] for the improvement bound, got {eps}"
            )));
        }
    }
    for &v in &grid.sigma_sq {
        if !(v > 0.0 && v <= var_cap) {
            return Err(Error::invalid(format!(
                "sigma_sq must lie in (0, m^2/4] = (0, {var_cap}], got {v}"
            )));
        }
    }

    let mut summary = SweepSummary {
        min_improvement: f64::INFINITY,
        max_improvement: f64::NEG_INFINITY,
        argmax: (0, 0.0, 0.0, 0.0),
        points_evaluated: 0,
        points_skipped: 0,
    };

    let mut visit = |n: u64, c: f64, eps: f64, sigma_sq: f64| -> Result<()> {
        let cohort = match Cohort::new(n, c) {
            Ok(cohort) => cohort,
            Err(_) => {
                summary.points_skipped += 1;
                return Ok(());
            }
        };
        let group = GroupDistribution::new(grid.m / 2.0, sigma_sq, grid.m)?;
        let setting = Setting::new(group, group, cohort, &Mechanism::laplace(eps)?)?;
        let ratio = improvement_R(&setting, mse_kvh(&setting).total)?;
        summary.points_evaluated += 1;
        if ratio < summary.min_improvement {
            summary.min_improvement = ratio;
        }
        if ratio > summary.max_improvement {
            summary.max_improvement = ratio;
            summary.argmax = (n, c, eps, sigma_sq);
        }
        Ok(())
    };

    for &n in &grid.n {
        for &c in &grid.c {
            for &eps in &grid.epsilon {
                for &sigma_sq in &grid.sigma_sq {
                    visit(n, c, eps, sigma_sq)?;
                }
            }
        }
        if grid.include_witness {
            visit(n, kvh_witness_c(n as f64), 1.0, var_cap)?;
        }
    }
    if summary.points_evaluated == 0 {
        return Err(Error::invalid(
            "every grid combination violated the cohort invariants; nothing to sweep",
        ));
    }
    Ok(summary)
}
