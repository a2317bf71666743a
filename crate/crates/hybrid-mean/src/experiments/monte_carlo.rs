//! Monte Carlo validation harness: empirical mean-squared errors for every
//! estimator, with the matching closed-form reference and a z-score.
//!
//! Seeding layout: every trial draws from `derive_rng(seed, [trial])`, and the
//! shared dataset of noise-only mode from `derive_rng(seed, [u64::MAX])`, so
//! results are independent of thread count and schedule.
//!
//! Count convention: the sample path works with the cohort's integer counts,
//! so references are evaluated at the realized opt-in fraction
//! (`tcm_count / n`), where the closed forms are exact for integer group
//! sizes.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::analytics::{
    mse_full_lm, mse_hybrid, mse_lm_only, mse_tcm_only, MseBreakdown, Setting, WeightRule,
};
use crate::core::{Cohort, GroupDistribution, PrivacyParams};
use crate::estimators::{empirical_mean, full_lm, hybrid, lm_only, tcm_only, SampleSet};
use crate::experiments::presets::{
    preset, sample_beta, sample_clustered, BetaParams, ClusteredDataPreset, DistributionPreset,
};
use crate::hybrid_kmeans::{
    kmeans_hybrid, kmeans_lm_baseline, kmeans_tcm_baseline, lloyd, wcss, KMeansConfig,
};
use crate::mechanisms::{Mechanism, MechanismKind};
use crate::rng::{derive_rng, derive_seed, SeededRng};
use crate::{Error, Result};

/// A samplable scalar distribution with known moments.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerSpec {
    Uniform { lo: f64, hi: f64 },
    ScaledBeta { alpha: f64, beta: f64, scale: f64 },
    TwoPoint { lo: f64, hi: f64, p_hi: f64 },
    Constant(f64),
}

impl SamplerSpec {
    /// Exact moments of the sampler; also validates its parameters.
    pub fn moments(&self) -> Result<GroupDistribution> {
        match *self {
            SamplerSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                    return Err(Error::invalid(format!(
                        "uniform sampler needs 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
                let w = hi - lo;
                GroupDistribution::new((lo + hi) / 2.0, w * w / 12.0, hi)
            }
            SamplerSpec::ScaledBeta { alpha, beta, scale } => {
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return Err(Error::invalid(format!(
                        "beta sampler needs positive shapes, got ({alpha}, {beta})"
                    )));
                }
                let s = alpha + beta;
                let mean = alpha / s;
                let var = alpha * beta / (s * s * (s + 1.0));
                GroupDistribution::new(scale * mean, scale * scale * var, scale)
            }
            SamplerSpec::TwoPoint { lo, hi, p_hi } => {
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                    return Err(Error::invalid(format!(
                        "two-point sampler needs 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
                if !(0.0..=1.0).contains(&p_hi) {
                    return Err(Error::invalid(format!(
                        "two-point sampler needs p_hi in [0, 1], got {p_hi}"
                    )));
                }
                let mean = lo + p_hi * (hi - lo);
                let var = p_hi * (1.0 - p_hi) * (hi - lo) * (hi - lo);
                GroupDistribution::new(mean, var, hi)
            }
            SamplerSpec::Constant(v) => GroupDistribution::new(v, 0.0, v),
        }
    }

    /// One draw. `moments()` must have been validated first; this never
    /// checks parameters again.
    pub fn sample(&self, rng: &mut SeededRng) -> f64 {
        match *self {
            SamplerSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            SamplerSpec::ScaledBeta { alpha, beta, scale } => {
                scale * sample_beta(&BetaParams { alpha, beta }, rng)
            }
            SamplerSpec::TwoPoint { lo, hi, p_hi } => {
                if rng.random::<f64>() < p_hi {
                    hi
                } else {
                    lo
                }
            }
            SamplerSpec::Constant(v) => v,
        }
    }

    /// The sampler behind a named preset. Summary-only presets have none.
    pub fn from_preset(p: &DistributionPreset) -> Result<SamplerSpec> {
        match &p.sampler {
            Some(b) => Ok(SamplerSpec::ScaledBeta {
                alpha: b.alpha,
                beta: b.beta,
                scale: p.analytic.support_max(),
            }),
            None => Err(Error::invalid(format!(
                "preset {} is summary-only (no sampler)",
                p.name
            ))),
        }
    }
}

/// Which estimator a Monte Carlo run evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    TcmOnly,
    FullLm,
    LmOnly,
    Hybrid(WeightRule),
}

impl EstimatorKind {
    /// The default evaluation set: the three baselines plus each
    /// weight-selection rule.
    pub fn default_set() -> Vec<EstimatorKind> {
        vec![
            EstimatorKind::TcmOnly,
            EstimatorKind::FullLm,
            EstimatorKind::LmOnly,
            EstimatorKind::Hybrid(WeightRule::Kvh),
            EstimatorKind::Hybrid(WeightRule::Pwh),
            EstimatorKind::Hybrid(WeightRule::Nwh),
        ]
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::TcmOnly => write!(f, "tcm-only"),
            EstimatorKind::FullLm => write!(f, "full-lm"),
            EstimatorKind::LmOnly => write!(f, "lm-only"),
            EstimatorKind::Hybrid(rule) => write!(f, "hybrid-{rule}"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tcm-only" => Ok(EstimatorKind::TcmOnly),
            "full-lm" => Ok(EstimatorKind::FullLm),
            "lm-only" => Ok(EstimatorKind::LmOnly),
            _ => match s.strip_prefix("hybrid-") {
                Some(rule) => Ok(EstimatorKind::Hybrid(rule.parse()?)),
                None => Err(Error::invalid(format!(
                    "unknown estimator {s:?}; expected tcm-only, full-lm, lm-only, or \
                     hybrid-<kvh|pwh|nwh|fixed:W>"
                ))),
            },
        }
    }
}

/// The population a Monte Carlo run draws from: one sampler per trust group,
/// the cohort split, and the calibrated mechanism.
#[derive(Debug, Clone)]
pub struct McPopulation {
    pub t: SamplerSpec,
    pub l: SamplerSpec,
    pub cohort: Cohort,
    pub mechanism: Mechanism,
}

impl McPopulation {
    /// The analytic setting this population realizes, evaluated at the
    /// integer group sizes actually drawn.
    pub fn effective_setting(&self) -> Result<Setting> {
        Setting::new(
            self.t.moments()?,
            self.l.moments()?,
            self.cohort.effective(),
            &self.mechanism,
        )
    }
}

/// Closed-form error of one estimator kind in a setting.
pub fn closed_form_mse(setting: &Setting, estimator: &EstimatorKind) -> Result<MseBreakdown> {
    match estimator {
        EstimatorKind::TcmOnly => Ok(mse_tcm_only(setting)),
        EstimatorKind::FullLm => Ok(mse_full_lm(setting)),
        EstimatorKind::LmOnly => Ok(mse_lm_only(setting)),
        EstimatorKind::Hybrid(rule) => Ok(mse_hybrid(setting, rule.resolve(setting)?)),
    }
}

/// One estimator's Monte Carlo result next to its closed-form reference.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimator: String,
    pub mse: f64,
    pub standard_error: f64,
    /// What the run should converge to: the closed-form error, or in
    /// noise-only mode the noise variance plus the realized-sample bias.
    pub reference: f64,
    pub z_score: f64,
    pub trials: u64,
}

fn draw_samples(pop: &McPopulation, m: f64, rng: &mut SeededRng) -> Result<SampleSet> {
    let tcm: Vec<f64> = (0..pop.cohort.tcm_count()).map(|_| pop.t.sample(rng)).collect();
    let lm: Vec<f64> = (0..pop.cohort.lm_count()).map(|_| pop.l.sample(rng)).collect();
    SampleSet::new(tcm, lm, m)
}

/// Runs `trials` independent trials and reports the empirical MSE of each
/// estimator against the non-private empirical mean of the same draw.
///
/// With `noise_only` the dataset is drawn once and shared by every trial, so
/// only mechanism noise varies; the reference then drops the sampling term
/// and uses the bias of the realized sample instead of the population bias.
pub fn monte_carlo_mse_set(
    seed: u64,
    trials: u64,
    noise_only: bool,
    pop: &McPopulation,
    estimators: &[EstimatorKind],
) -> Result<Vec<McEstimate>> {
    if estimators.is_empty() {
        return Err(Error::invalid("estimator list must be nonempty"));
    }
    if trials < 2 {
        return Err(Error::invalid(format!(
            "at least 2 trials are needed for a standard error, got {trials}"
        )));
    }
    let setting = pop.effective_setting()?;
    let scales = *setting.scales();
    let m = setting.m();
    let weights: Vec<Option<_>> = estimators
        .iter()
        .map(|e| match e {
            EstimatorKind::Hybrid(rule) => rule.resolve(&setting).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;

    let fixed = if noise_only {
        let mut rng = derive_rng(seed, &[u64::MAX]);
        let samples = draw_samples(pop, m, &mut rng)?;
        let bench = empirical_mean(&samples);
        Some((samples, bench))
    } else {
        None
    };

    let squared_errors: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<f64>> {
            let mut rng = derive_rng(seed, &[trial]);
            let drawn;
            let (samples, bench) = match &fixed {
                Some((s, b)) => (s, *b),
                None => {
                    drawn = draw_samples(pop, m, &mut rng)?;
                    let b = empirical_mean(&drawn);
                    (&drawn, b)
                }
            };
            Ok(estimators
                .iter()
                .zip(&weights)
                .map(|(est, w)| {
                    let value = match est {
                        EstimatorKind::TcmOnly => tcm_only(samples, &scales, &mut rng),
                        EstimatorKind::FullLm => full_lm(samples, &scales, &mut rng),
                        EstimatorKind::LmOnly => lm_only(samples, &scales, &mut rng),
                        EstimatorKind::Hybrid(_) => {
                            hybrid(samples, w.expect("resolved above"), &scales, &mut rng)
                        }
                    };
                    let d = value - bench;
                    d * d
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let tf = trials as f64;
    let mut out = Vec::with_capacity(estimators.len());
    for (j, est) in estimators.iter().enumerate() {
        let mean = squared_errors.iter().map(|row| row[j]).sum::<f64>() / tf;
        let var = squared_errors
            .iter()
            .map(|row| (row[j] - mean) * (row[j] - mean))
            .sum::<f64>()
            / (tf - 1.0);
        let se = (var / tf).sqrt();
        let breakdown = closed_form_mse(&setting, est)?;
        let reference = match &fixed {
            None => breakdown.total,
            Some((s, bench)) => {
                // Data is frozen: noise variance plus the realized bias.
                let center = match (est, weights[j]) {
                    (EstimatorKind::TcmOnly, _) => s.tcm_mean(),
                    (EstimatorKind::FullLm, _) => *bench,
                    (EstimatorKind::LmOnly, _) => s.lm_mean(),
                    (EstimatorKind::Hybrid(_), Some(w)) => {
                        w.value() * s.tcm_mean() + (1.0 - w.value()) * s.lm_mean()
                    }
                    (EstimatorKind::Hybrid(_), None) => unreachable!("resolved above"),
                };
                let bias = center - bench;
                breakdown.privacy + bias * bias
            }
        };
        let z_score = if se == 0.0 {
            if (mean - reference).abs() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (mean - reference) / se
        };
        out.push(McEstimate {
            estimator: est.to_string(),
            mse: mean,
            standard_error: se,
            reference,
            z_score,
            trials,
        });
    }
    Ok(out)
}

/// Single-estimator convenience wrapper around [`monte_carlo_mse_set`].
pub fn monte_carlo_mse(
    seed: u64,
    trials: u64,
    noise_only: bool,
    pop: &McPopulation,
    estimator: EstimatorKind,
) -> Result<McEstimate> {
    let mut v = monte_carlo_mse_set(seed, trials, noise_only, pop, &[estimator])?;
    Ok(v.remove(0))
}

/// Grid definition shared by the simulation and sweep entry points.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub trials: u64,
    pub n_grid: Vec<u64>,
    pub c_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    /// Mean separations used by the mean-skew sweep.
    pub shift_grid: Vec<f64>,
    pub mechanism_kind: MechanismKind,
    pub delta: f64,
    pub preset: String,
    pub estimators: Vec<EstimatorKind>,
    pub noise_only: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            seed: 7,
            trials: 20_000,
            n_grid: vec![1000],
            c_grid: vec![0.1],
            epsilon_grid: vec![1.0],
            shift_grid: vec![0.0, 0.25, 0.5],
            mechanism_kind: MechanismKind::Laplace,
            delta: 0.0,
            preset: "beta-mid".to_string(),
            estimators: EstimatorKind::default_set(),
            noise_only: false,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.c_grid.is_empty() || self.epsilon_grid.is_empty() {
            return Err(Error::invalid("n, c, and epsilon grids must be nonempty"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimator list must be nonempty"));
        }
        Ok(())
    }
}

/// One cell of simulation output: a Monte Carlo estimate in context.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRow {
    pub n: u64,
    pub c: f64,
    pub epsilon: f64,
    pub preset: String,
    pub estimator: String,
    pub trials: u64,
    pub mc_mse: f64,
    pub standard_error: f64,
    pub reference: f64,
    pub z_score: f64,
}

/// Runs the Monte Carlo harness over the spec's full `n x c x epsilon` grid.
/// Returns the rows plus the largest |z-score| seen, the headline agreement
/// figure.
pub fn simulate_cells(spec: &ExperimentSpec) -> Result<(Vec<SimulateRow>, f64)> {
    spec.validate()?;
    let p = preset(&spec.preset)?;
    let sampler = SamplerSpec::from_preset(&p)?;
    let mut rows = Vec::new();
    let mut max_abs_z = 0.0_f64;
    let mut cell = 0u64;
    for &n in &spec.n_grid {
        for &c in &spec.c_grid {
            for &epsilon in &spec.epsilon_grid {
                let cohort = Cohort::new(n, c)?;
                let mechanism = Mechanism::new(
                    spec.mechanism_kind,
                    PrivacyParams::new(epsilon, spec.delta)?,
                )?;
                let pop = McPopulation {
                    t: sampler.clone(),
                    l: sampler.clone(),
                    cohort,
                    mechanism,
                };
                let cell_seed = derive_seed(spec.seed, &[cell]);
                let estimates = monte_carlo_mse_set(
                    cell_seed,
                    spec.trials,
                    spec.noise_only,
                    &pop,
                    &spec.estimators,
                )?;
                for e in estimates {
                    max_abs_z = max_abs_z.max(e.z_score.abs());
                    rows.push(SimulateRow {
                        n,
                        c,
                        epsilon,
                        preset: spec.preset.clone(),
                        estimator: e.estimator,
                        trials: e.trials,
                        mc_mse: e.mse,
                        standard_error: e.standard_error,
                        reference: e.reference,
                        z_score: e.z_score,
                    });
                }
                cell += 1;
            }
        }
    }
    Ok((rows, max_abs_z))
}

/// One clustering benchmark cell: an algorithm's mean within-cluster sum of
/// squares at one privacy split, re-scored on the full dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansCell {
    pub tau: u32,
    pub algorithm: &'static str,
    pub trials: u64,
    pub mean_wcss: f64,
    pub se_wcss: f64,
}

/// Benchmarks the hybrid clustering algorithm against both single-model
/// baselines and the non-private reference across an iteration-budget grid.
///
/// Every trial draws a fresh dataset; the first `round(c * len)` points are
/// the opted-in group. All four algorithms start from the same initial
/// centers (they share a cloned rng), and all centers are re-scored on the
/// full dataset so the columns are comparable.
pub fn kmeans_wcss_experiment(
    preset: &ClusteredDataPreset,
    scale: f64,
    epsilon: f64,
    taus: &[u32],
    c: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<KMeansCell>> {
    if taus.is_empty() {
        return Err(Error::invalid("tau grid must be nonempty"));
    }
    if trials < 2 {
        return Err(Error::invalid(format!(
            "at least 2 trials are needed for a standard error, got {trials}"
        )));
    }
    if !(c.is_finite() && 0.0 < c && c < 1.0) {
        return Err(Error::invalid(format!(
            "opt-in fraction must lie in (0, 1), got {c}"
        )));
    }
    const ALGORITHMS: [&str; 4] = ["hybrid", "tcm-baseline", "lm-baseline", "lloyd"];
    let mut rows = Vec::with_capacity(taus.len() * ALGORITHMS.len());
    for &tau in taus {
        let cfg = KMeansConfig::new(preset.centers.len(), tau, epsilon, preset.dim, preset.m)?;
        let per_trial: Vec<[f64; 4]> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<[f64; 4]> {
                let mut data_rng = derive_rng(seed, &[u64::from(tau), trial, 0]);
                let data = sample_clustered(preset, scale, &mut data_rng)?;
                let tcm_n = ((c * data.len() as f64).round() as usize).clamp(1, data.len() - 1);
                let (tcm, lm) = data.split_at(tcm_n);
                // Cloning the stream gives every algorithm the same initial
                // centers, removing initialization luck from the comparison.
                let algo_rng = derive_rng(seed, &[u64::from(tau), trial, 1]);
                let hy = kmeans_hybrid(tcm, lm, &cfg, &mut algo_rng.clone())?;
                let tb = kmeans_tcm_baseline(tcm, &cfg, &mut algo_rng.clone())?;
                let lb = kmeans_lm_baseline(&data, &cfg, &mut algo_rng.clone())?;
                let ll = lloyd(&data, &cfg, &mut algo_rng.clone())?;
                Ok([
                    wcss(&data, &hy.centers),
                    wcss(&data, &tb.centers),
                    wcss(&data, &lb.centers),
                    wcss(&data, &ll.centers),
                ])
            })
            .collect::<Result<_>>()?;
        let tf = trials as f64;
        for (idx, algorithm) in ALGORITHMS.iter().enumerate() {
            let mean = per_trial.iter().map(|row| row[idx]).sum::<f64>() / tf;
            let var = per_trial
                .iter()
                .map(|row| (row[idx] - mean) * (row[idx] - mean))
                .sum::<f64>()
                / (tf - 1.0);
            rows.push(KMeansCell {
                tau,
                algorithm,
                trials,
                mean_wcss: mean,
                se_wcss: (var / tf).sqrt(),
            });
        }
    }
    Ok(rows)
}
