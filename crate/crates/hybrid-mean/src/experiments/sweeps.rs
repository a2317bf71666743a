//! Closed-form parameter sweeps: improvement ratios over `n x c x epsilon`
//! grids, and the two skew studies (group variances differ; group means
//! differ while the weight rule wrongly assumes they do not).

use std::fmt;
use std::str::FromStr;

use crate::analytics::{
    improvement_r, improvement_R, mse_full_lm, mse_tcm_only, weight_kvh_homogeneous, Setting,
};
use crate::core::{Cohort, GroupDistribution, PrivacyParams};
use crate::experiments::monte_carlo::{closed_form_mse, EstimatorKind, ExperimentSpec};
use crate::experiments::presets::preset;
use crate::mechanisms::Mechanism;
use crate::{Error, Result};

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
        return Err(Error::invalid(format!(
            "log grid needs 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if points == 0 {
        return Err(Error::invalid("log grid needs at least one point"));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let ratio = hi / lo;
    Ok((0..points)
        .map(|i| lo * ratio.powf(i as f64 / (points - 1) as f64))
        .collect())
}

/// Log-spaced population sizes, rounded to integers with duplicates removed.
pub fn log_grid_n(lo: u64, hi: u64, points: usize) -> Result<Vec<u64>> {
    let grid = log_grid(lo as f64, hi as f64, points)?;
    let mut out: Vec<u64> = grid.into_iter().map(|x| x.round() as u64).collect();
    out.dedup();
    Ok(out)
}

/// One cell of the improvement sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementRow {
    pub n: u64,
    pub c: f64,
    pub epsilon: f64,
    pub preset: String,
    pub estimator: String,
    pub e_tcm: f64,
    pub e_full: f64,
    pub e_est: f64,
    /// Ratio against the better baseline (>1 means beating both).
    pub r_better: f64,
    /// Ratio against the worse baseline.
    pub r_worse: f64,
    /// Which baseline wins at this cell: "tcm-better" or "full-lm-better".
    pub regime: &'static str,
}

/// Evaluates every estimator's closed-form error across the spec's grid,
/// with both groups drawn from the spec's preset. Grid cells whose cohort is
/// infeasible (fewer than one user on a side) are skipped.
pub fn sweep_improvement(spec: &ExperimentSpec) -> Result<Vec<ImprovementRow>> {
    spec.validate()?;
    let p = preset(&spec.preset)?;
    let mut rows = Vec::new();
    for &n in &spec.n_grid {
        for &c in &spec.c_grid {
            let Ok(cohort) = Cohort::new(n, c) else {
                continue;
            };
            for &epsilon in &spec.epsilon_grid {
                let mechanism = Mechanism::new(
                    spec.mechanism_kind,
                    PrivacyParams::new(epsilon, spec.delta)?,
                )?;
                let setting = Setting::new(p.analytic, p.analytic, cohort, &mechanism)?;
                let e_tcm = mse_tcm_only(&setting).total;
                let e_full = mse_full_lm(&setting).total;
                let regime = if e_tcm <= e_full {
                    "tcm-better"
                } else {
                    "full-lm-better"
                };
                for est in &spec.estimators {
                    let e_est = closed_form_mse(&setting, est)?.total;
                    rows.push(ImprovementRow {
                        n,
                        c,
                        epsilon,
                        preset: spec.preset.clone(),
                        estimator: est.to_string(),
                        e_tcm,
                        e_full,
                        e_est,
                        r_better: improvement_R(&setting, e_est)?,
                        r_worse: improvement_r(&setting, e_est)?,
                        regime,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Which skew study to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewKinds {
    Variance,
    Mean,
    Both,
}

impl FromStr for SkewKinds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(SkewKinds::Variance),
            "mean" => Ok(SkewKinds::Mean),
            "both" => Ok(SkewKinds::Both),
            other => Err(Error::invalid(format!(
                "unknown skew kind {other:?}; expected variance, mean, or both"
            ))),
        }
    }
}

impl fmt::Display for SkewKinds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkewKinds::Variance => write!(f, "variance"),
            SkewKinds::Mean => write!(f, "mean"),
            SkewKinds::Both => write!(f, "both"),
        }
    }
}

/// One cell of a skew sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewRow {
    pub kind: &'static str,
    pub n: u64,
    pub c: f64,
    pub epsilon: f64,
    pub preset_tcm: String,
    pub preset_lm: String,
    /// Mean separation: group means sit at `1 - t` and `1 + t` (mean study
    /// only; 0 for the variance study).
    pub shift_t: f64,
    pub estimator: String,
    pub e_tcm: f64,
    pub e_full: f64,
    pub e_est: f64,
    pub r_better: f64,
    pub r_worse: f64,
}

#[allow(clippy::too_many_arguments)] // private row builder, mirrors the column list
fn skew_row(
    kind: &'static str,
    n: u64,
    c: f64,
    epsilon: f64,
    preset_tcm: &str,
    preset_lm: &str,
    shift_t: f64,
    estimator: &str,
    setting: &Setting,
    e_est: f64,
) -> Result<SkewRow> {
    Ok(SkewRow {
        kind,
        n,
        c,
        epsilon,
        preset_tcm: preset_tcm.to_string(),
        preset_lm: preset_lm.to_string(),
        shift_t,
        estimator: estimator.to_string(),
        e_tcm: mse_tcm_only(setting).total,
        e_full: mse_full_lm(setting).total,
        e_est,
        r_better: improvement_R(setting, e_est)?,
        r_worse: improvement_r(setting, e_est)?,
    })
}

/// Runs the requested skew studies over the spec's grid.
///
/// Variance study: every ordered pairing of the `beta-low` and `beta-high`
/// presets across the two groups (the two same-preset pairings are the
/// homogeneous references), scored with the variance-aware weight rule.
///
/// Mean study: both groups carry the uniform distribution recentered onto
/// `[0.5, 1.5]` (support bound 2), then the group means are pulled apart to
/// `1 - t` and `1 + t` for each `t` in the spec's shift grid, while the
/// weight is chosen as if the groups were identical. This scores a curator
/// whose homogeneity assumption is wrong by `2t`.
pub fn sweep_skew(spec: &ExperimentSpec, kinds: SkewKinds) -> Result<Vec<SkewRow>> {
    spec.validate()?;
    let run_variance = matches!(kinds, SkewKinds::Variance | SkewKinds::Both);
    let run_mean = matches!(kinds, SkewKinds::Mean | SkewKinds::Both);
    let mut rows = Vec::new();

    if run_variance {
        let low = preset("beta-low")?;
        let high = preset("beta-high")?;
        for (pt, pl) in [
            (&low, &low),
            (&low, &high),
            (&high, &low),
            (&high, &high),
        ] {
            for &n in &spec.n_grid {
                for &c in &spec.c_grid {
                    let Ok(cohort) = Cohort::new(n, c) else {
                        continue;
                    };
                    for &epsilon in &spec.epsilon_grid {
                        let mechanism = Mechanism::new(
                            spec.mechanism_kind,
                            PrivacyParams::new(epsilon, spec.delta)?,
                        )?;
                        let setting = Setting::new(pt.analytic, pl.analytic, cohort, &mechanism)?;
                        let est = EstimatorKind::Hybrid(crate::analytics::WeightRule::Kvh);
                        let e_est = closed_form_mse(&setting, &est)?.total;
                        rows.push(skew_row(
                            "variance", n, c, epsilon, pt.name, pl.name, 0.0, "hybrid-kvh",
                            &setting, e_est,
                        )?);
                    }
                }
            }
        }
    }

    if run_mean {
        // Uniform on [0.5, 1.5]: variance 1/12, support bound 2 once the
        // means are shifted apart.
        let base_var = 1.0 / 12.0;
        let m = 2.0;
        for &t in &spec.shift_grid {
            if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
                return Err(Error::invalid(format!(
                    "mean shift must lie in [0, 1] to keep both groups on [0, 2], got {t}"
                )));
            }
            let t_dist = GroupDistribution::new(1.0 - t, base_var, m)?;
            let l_dist = GroupDistribution::new(1.0 + t, base_var, m)?;
            let believed = GroupDistribution::new(1.0, base_var, m)?;
            for &n in &spec.n_grid {
                for &c in &spec.c_grid {
                    let Ok(cohort) = Cohort::new(n, c) else {
                        continue;
                    };
                    for &epsilon in &spec.epsilon_grid {
                        let mechanism = Mechanism::new(
                            spec.mechanism_kind,
                            PrivacyParams::new(epsilon, spec.delta)?,
                        )?;
                        let truth = Setting::new(t_dist, l_dist, cohort, &mechanism)?;
                        // The weight comes from the homogeneous belief; the
                        // error is scored under the real mean separation.
                        let belief = Setting::new(believed, believed, cohort, &mechanism)?;
                        let w = weight_kvh_homogeneous(&belief)?;
                        let e_est = crate::analytics::mse_hybrid(&truth, w).total;
                        rows.push(skew_row(
                            "mean",
                            n,
                            c,
                            epsilon,
                            "beta-mid-recentered",
                            "beta-mid-recentered",
                            t,
                            "hybrid-kvh-homog-weight",
                            &truth,
                            e_est,
                        )?);
                    }
                }
            }
        }
    }

    Ok(rows)
}

#[cfg(test)]
// Frozen reference values are written with a full 17-digit mantissa on
// purpose: they pin exact f64 bits.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::analytics::{mse_kvh, WeightRule};
    use approx::assert_relative_eq;

    #[test]
    fn log_grids_hit_endpoints_and_stay_monotone() {
        let g = log_grid(0.1, 10.0, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_relative_eq!(g[0], 0.1);
        assert_relative_eq!(g[4], 10.0, max_relative = 1e-12);
        assert_relative_eq!(g[2], 1.0, max_relative = 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_grid(2.0, 2.0, 1).unwrap(), vec![2.0]);
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert!(log_grid(1.0, 2.0, 0).is_err());

        let n = log_grid_n(10, 1000, 41).unwrap();
        assert_eq!(n.first(), Some(&10));
        assert_eq!(n.last(), Some(&1000));
        assert!(n.windows(2).all(|w| w[0] < w[1])); // dedup keeps it strict
        assert!(n.len() <= 41);
    }

    #[test]
    fn improvement_sweep_matches_direct_analytics() {
        let spec = ExperimentSpec {
            n_grid: vec![1000],
            c_grid: vec![0.1],
            epsilon_grid: vec![1.0],
            estimators: vec![EstimatorKind::Hybrid(WeightRule::Kvh)],
            ..ExperimentSpec::default()
        };
        let rows = sweep_improvement(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];

        let p = preset("beta-mid").unwrap();
        let mech = Mechanism::laplace(1.0).unwrap();
        let setting = Setting::new(
            p.analytic,
            p.analytic,
            Cohort::new(1000, 0.1).unwrap(),
            &mech,
        )
        .unwrap();
        let e = mse_kvh(&setting).total;
        assert_eq!(row.e_est.to_bits(), e.to_bits());
        assert_eq!(row.r_better.to_bits(), improvement_R(&setting, e).unwrap().to_bits());
        assert_eq!(row.regime, "tcm-better");
        assert!(row.r_better >= 1.0);
    }

    #[test]
    fn improvement_sweep_skips_infeasible_cohorts() {
        let spec = ExperimentSpec {
            n_grid: vec![100, 1000],
            c_grid: vec![0.005], // c * 100 = 0.5 < 1: infeasible
            epsilon_grid: vec![1.0],
            estimators: vec![EstimatorKind::TcmOnly],
            ..ExperimentSpec::default()
        };
        let rows = sweep_improvement(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 1000);
    }

    #[test]
    fn variance_skew_covers_all_four_pairings() {
        let spec = ExperimentSpec {
            n_grid: vec![10_000],
            c_grid: vec![0.05],
            epsilon_grid: vec![1.0],
            ..ExperimentSpec::default()
        };
        let rows = sweep_skew(&spec, SkewKinds::Variance).unwrap();
        assert_eq!(rows.len(), 4);
        let pairs: Vec<(&str, &str)> = rows
            .iter()
            .map(|r| (r.preset_tcm.as_str(), r.preset_lm.as_str()))
            .collect();
        assert!(pairs.contains(&("beta-low", "beta-high")));
        assert!(pairs.contains(&("beta-high", "beta-low")));
        assert!(pairs.contains(&("beta-low", "beta-low")));
        assert!(pairs.contains(&("beta-high", "beta-high")));
        assert!(rows.iter().all(|r| r.kind == "variance" && r.shift_t == 0.0));

        // Homogeneous pairings agree with the direct homogeneous analytics.
        let low = preset("beta-low").unwrap();
        let mech = Mechanism::laplace(1.0).unwrap();
        let s = Setting::new(
            low.analytic,
            low.analytic,
            Cohort::new(10_000, 0.05).unwrap(),
            &mech,
        )
        .unwrap();
        let direct = mse_kvh(&s).total;
        let hom_row = rows
            .iter()
            .find(|r| r.preset_tcm == "beta-low" && r.preset_lm == "beta-low")
            .unwrap();
        assert_eq!(hom_row.e_est.to_bits(), direct.to_bits());
    }

    #[test]
    fn mean_skew_pins_the_misspecified_weight_study() {
        // Frozen spot values for c = 0.005, eps = 1, n = 1e4: the assumed-
        // homogeneous weight helps at t = 0 and is badly beaten as the real
        // means separate.
        let spec = ExperimentSpec {
            n_grid: vec![10_000],
            c_grid: vec![0.005],
            epsilon_grid: vec![1.0],
            shift_grid: vec![0.0, 0.25, 0.5],
            ..ExperimentSpec::default()
        };
        let rows = sweep_skew(&spec, SkewKinds::Mean).unwrap();
        assert_eq!(rows.len(), 3);
        assert_relative_eq!(rows[0].r_better, 1.16304757984288698, max_relative = 1e-10);
        assert_relative_eq!(
            rows[1].r_better,
            1.46725308161549717e-1,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            rows[2].r_better,
            4.05147035504310957e-2,
            max_relative = 1e-10
        );
        assert!(rows.iter().all(|r| r.kind == "mean"));

        let bad = ExperimentSpec {
            shift_grid: vec![1.5],
            ..spec
        };
        assert!(sweep_skew(&bad, SkewKinds::Mean).is_err());
    }

    #[test]
    fn both_concatenates_and_kind_parses() {
        let spec = ExperimentSpec {
            n_grid: vec![10_000],
            c_grid: vec![0.05],
            epsilon_grid: vec![1.0],
            shift_grid: vec![0.0],
            ..ExperimentSpec::default()
        };
        let rows = sweep_skew(&spec, SkewKinds::Both).unwrap();
        assert_eq!(rows.len(), 5); // 4 variance pairings + 1 mean shift
        assert_eq!("variance".parse::<SkewKinds>().unwrap(), SkewKinds::Variance);
        assert_eq!(SkewKinds::Both.to_string(), "both");
        assert!("neither".parse::<SkewKinds>().is_err());
    }
}
