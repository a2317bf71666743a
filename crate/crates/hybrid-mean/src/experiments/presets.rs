//! Named data-distribution presets used across sweeps, simulations, and the
//! clustering benchmark.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::core::GroupDistribution;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Shape parameters of a Beta distribution on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// A named scalar-data preset: analytic moments plus, when the preset
/// describes a samplable distribution, its Beta parameters.
///
/// `uc-salary-summary` is summary-only: it restates a published payroll
/// summary (count, maximum, standard deviation). The summary publishes no
/// mean, so the preset carries the inert placeholder `support_max / 2`;
/// every analysis shipped for this preset treats both groups as sharing the
/// distribution, and in that homogeneous regime the improvement and
/// amplification quantities do not depend on the mean at all.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPreset {
    pub name: &'static str,
    pub analytic: GroupDistribution,
    pub sampler: Option<BetaParams>,
    /// Real population size the summary describes, when it has one.
    pub population_n: Option<u64>,
}

pub const PRESET_NAMES: [&str; 4] = ["beta-low", "beta-mid", "beta-high", "uc-salary-summary"];

/// Looks up a preset by name.
///
/// - `beta-low`: Beta(10, 10), variance 1/84 (tight around 1/2)
/// - `beta-mid`: Beta(1, 1) (uniform), variance 1/12
/// - `beta-high`: Beta(0.1, 0.1), variance 5/24 (mass near the endpoints)
/// - `uc-salary-summary`: summary-only payroll statistics
///   (n = 252540, max = 2349033, sd = 53254)
pub fn preset(name: &str) -> Result<DistributionPreset> {
    match name {
        "beta-low" => Ok(DistributionPreset {
            name: "beta-low",
            analytic: GroupDistribution::new(0.5, 1.0 / 84.0, 1.0)?,
            sampler: Some(BetaParams {
                alpha: 10.0,
                beta: 10.0,
            }),
            population_n: None,
        }),
        "beta-mid" => Ok(DistributionPreset {
            name: "beta-mid",
            analytic: GroupDistribution::new(0.5, 1.0 / 12.0, 1.0)?,
            sampler: Some(BetaParams {
                alpha: 1.0,
                beta: 1.0,
            }),
            population_n: None,
        }),
        "beta-high" => Ok(DistributionPreset {
            name: "beta-high",
            analytic: GroupDistribution::new(0.5, 5.0 / 24.0, 1.0)?,
            sampler: Some(BetaParams {
                alpha: 0.1,
                beta: 0.1,
            }),
            population_n: None,
        }),
        "uc-salary-summary" => Ok(DistributionPreset {
            name: "uc-salary-summary",
            analytic: GroupDistribution::new(
                2_349_033.0 / 2.0, // placeholder: the summary publishes no mean
                53_254.0 * 53_254.0,
                2_349_033.0,
            )?,
            sampler: None,
            population_n: Some(252_540),
        }),
        other => Err(Error::invalid(format!(
            "unknown preset {other}; expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// One Beta(alpha, beta) draw built from two Gamma draws,
/// `G_a / (G_a + G_b)`, which is valid for shapes below 1 as well (where
/// inversion-based samplers lose accuracy).
pub fn sample_beta(params: &BetaParams, rng: &mut SeededRng) -> f64 {
    let ga = Gamma::new(params.alpha, 1.0).expect("positive shape");
    let gb = Gamma::new(params.beta, 1.0).expect("positive shape");
    loop {
        let a = ga.sample(rng);
        let b = gb.sample(rng);
        // Both Gamma draws can underflow to zero for tiny shapes; redraw
        // rather than return 0/0.
        if a + b > 0.0 {
            return a / (a + b);
        }
    }
}

/// Samples `count` values from a samplable preset. Summary-only presets are
/// rejected: there is nothing to draw from a moments-only record.
pub fn sample_from(preset: &DistributionPreset, count: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    let params = preset.sampler.as_ref().ok_or_else(|| {
        Error::invalid(format!(
            "preset {} is summary-only and has no sampler",
            preset.name
        ))
    })?;
    Ok((0..count).map(|_| sample_beta(params, rng)).collect())
}

/// A samplable clustered-data preset for the K-means benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredDataPreset {
    pub name: &'static str,
    pub centers: Vec<Vec<f64>>,
    /// Per-coordinate Gaussian spread around each center.
    pub sigma: f64,
    pub points_per_cluster: usize,
    pub dim: usize,
    pub m: f64,
}

/// Four spherical Gaussian clusters on the unit square: centers at the four
/// points `(1/4, 1/4) ... (3/4, 3/4)`, spread 0.028, 4000 points per cluster
/// at scale 1.
pub fn gauss4() -> ClusteredDataPreset {
    ClusteredDataPreset {
        name: "gauss4",
        centers: vec![
            vec![0.25, 0.25],
            vec![0.25, 0.75],
            vec![0.75, 0.25],
            vec![0.75, 0.75],
        ],
        sigma: 0.028,
        points_per_cluster: 4000,
        dim: 2,
        m: 1.0,
    }
}

/// Samples a clustered dataset with `round(points_per_cluster * scale)`
/// points per cluster (at least 1), clamped into the box. Points are laid
/// out round-robin across clusters so any head slice of the returned data is
/// cluster-balanced.
pub fn sample_clustered(
    preset: &ClusteredDataPreset,
    scale: f64,
    rng: &mut SeededRng,
) -> Result<Vec<Vec<f64>>> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::invalid(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    let per_cluster = ((preset.points_per_cluster as f64 * scale).round() as usize).max(1);
    let total = per_cluster * preset.centers.len();
    let mut data = Vec::with_capacity(total);
    for i in 0..total {
        let center = &preset.centers[i % preset.centers.len()];
        let point = center
            .iter()
            .map(|&c| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                (c + preset.sigma * z).clamp(0.0, preset.m)
            })
            .collect();
        data.push(point);
    }
    Ok(data)
}
