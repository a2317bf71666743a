//! K-means clustering under the hybrid trust model.
//!
//! The opt-in group is clustered through the curator with per-iteration
//! Laplace noise on cluster counts and coordinate sums; the local group
//! privatizes once up front (a noised copy of each point) plus a
//! randomized-response report of its nearest cluster each iteration. Each
//! cluster's center update merges the two groups' estimates with the
//! privacy-weighted hybrid rule, using the cluster's own noisy counts as its
//! opt-in fraction.
//!
//! Per-user budget over the whole run is `epsilon` for both groups: the
//! curator spends `epsilon / tau` per iteration (half on the count, in
//! sensitivity-scaled form, and the rest on the sums), while a local user
//! spends `epsilon / (tau + 1)` on the noised report and the same on each of
//! the `tau` response rounds. [`budget_ledger`] itemizes this.

use rand::Rng;

use crate::mechanisms::sample_laplace;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Parameters of one clustering run: `k` clusters, `tau` iterations, total
/// per-user budget `epsilon` (`+inf` is the no-privacy limit), data
/// dimension `dim`, and coordinate bound `m` (data live in `[0, m]^dim`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    k: usize,
    tau: u32,
    epsilon: f64,
    dim: usize,
    m: f64,
}

impl KMeansConfig {
    /// Requirements: `k >= 1`, `tau >= 1`, `dim >= 1`, `m > 0` finite, and
    /// `epsilon > 0` (possibly `+inf`).
    pub fn new(k: usize, tau: u32, epsilon: f64, dim: usize, m: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if tau == 0 {
            return Err(Error::invalid("tau must be at least 1"));
        }
        if dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::invalid(format!(
                "m must be positive and finite, got {m}"
            )));
        }
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(KMeansConfig {
            k,
            tau,
            epsilon,
            dim,
            m,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Laplace scale on the curator's per-iteration count and sum releases:
    /// `b_T = (m d + 1) tau / epsilon`. One iteration changes a substituted
    /// user's contribution by at most 1 in one count and `m` in each of `d`
    /// sum coordinates, so the joint L1 sensitivity is `m d + 1` and the
    /// per-iteration budget `epsilon / tau` prices every coordinate at the
    /// same scale.
    pub fn lap_scale_tcm(&self) -> f64 {
        (self.m * self.dim as f64 + 1.0) * self.tau as f64 / self.epsilon
    }

    /// Laplace scale on a local user's one-shot noised report:
    /// `b_L = m d (tau + 1) / epsilon` (L1 sensitivity `m d` at budget
    /// `epsilon / (tau + 1)`).
    pub fn lap_scale_lm(&self) -> f64 {
        self.m * self.dim as f64 * (self.tau as f64 + 1.0) / self.epsilon
    }

    /// Probability that a randomized-response round reports the true nearest
    /// cluster, at per-round budget `epsilon / (tau + 1)`:
    ///
    /// ```text
    /// p = (e^(eps/(tau+1)) - 1) / (k + e^(eps/(tau+1)) - 1)
    /// ```
    ///
    /// computed as `1 / (1 + k / expm1(eps/(tau+1)))` so the no-privacy
    /// limit is exactly 1. With the complementary mass spread uniformly over
    /// all `k` clusters (the true one included), any two clusters' report
    /// distributions differ by at most the factor `e^(eps/(tau+1))`.
    pub fn truthful_response_probability(&self) -> f64 {
        let per_round = self.epsilon / (self.tau as f64 + 1.0);
        1.0 / (1.0 + self.k as f64 / per_round.exp_m1())
    }
}

/// Itemized per-user privacy spend for one run. Both group totals equal the
/// configured `epsilon` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetLedger {
    /// Local user's one-shot noised report: `epsilon / (tau + 1)`.
    pub lm_report: f64,
    /// Local user's per-round response spend: `epsilon / (tau + 1)`.
    pub lm_response_per_round: f64,
    pub lm_rounds: u32,
    pub lm_total: f64,
    /// Curator spend per iteration on counts plus sums: `epsilon / tau`.
    pub tcm_per_iteration: f64,
    pub tcm_iterations: u32,
    pub tcm_total: f64,
}

pub fn budget_ledger(cfg: &KMeansConfig) -> BudgetLedger {
    let tau = cfg.tau as f64;
    // Report: L1 sensitivity m d at scale b_L. Responses: tau rounds of RR.
    let lm_report = cfg.m * cfg.dim as f64 / cfg.lap_scale_lm();
    let lm_response = cfg.epsilon / (tau + 1.0);
    // Count (sensitivity 1) and sums (sensitivity m d) share the scale b_T.
    let tcm_per_iteration = (cfg.m * cfg.dim as f64 + 1.0) / cfg.lap_scale_tcm();
    BudgetLedger {
        lm_report,
        lm_response_per_round: lm_response,
        lm_rounds: cfg.tau,
        lm_total: lm_report + tau * lm_response,
        tcm_per_iteration,
        tcm_iterations: cfg.tau,
        tcm_total: tau * tcm_per_iteration,
    }
}

/// Output of one clustering run. `wcss` is the within-cluster sum of squares
/// of the data passed to the algorithm, evaluated non-privately against the
/// returned centers; to compare algorithms that saw different inputs,
/// re-score their centers on a common dataset with [`wcss`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub centers: Vec<Vec<f64>>,
    pub wcss: f64,
    pub iterations_run: u32,
}

/// Within-cluster sum of squares: each point's squared distance to its
/// nearest center, summed. Requirement: at least one center.
pub fn wcss(data: &[Vec<f64>], centers: &[Vec<f64>]) -> f64 {
    assert!(!centers.is_empty(), "wcss requires at least one center");
    data.iter()
        .map(|x| {
            centers
                .iter()
                .map(|c| dist_sq(x, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = dist_sq(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Validates dimensions and clamps coordinates into `[0, m]^dim` (the noise
/// scales assume the bound, so out-of-range data cannot pass unclamped).
fn prepared(data: &[Vec<f64>], cfg: &KMeansConfig, label: &str) -> Result<Vec<Vec<f64>>> {
    if data.is_empty() {
        return Err(Error::invalid(format!("{label} data must be nonempty")));
    }
    let mut out = Vec::with_capacity(data.len());
    for (i, point) in data.iter().enumerate() {
        if point.len() != cfg.dim {
            return Err(Error::invalid(format!(
                "{label} point {i} has {} coordinates, expected dim = {}",
                point.len(),
                cfg.dim
            )));
        }
        if point.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid(format!("{label} point {i} contains NaN")));
        }
        out.push(point.iter().map(|v| v.clamp(0.0, cfg.m)).collect());
    }
    Ok(out)
}

/// Uniform initial centers in `[0, m]^dim`. All algorithms share this
/// convention, so runs started from clones of one RNG share their
/// initialization exactly.
fn initial_centers(cfg: &KMeansConfig, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    (0..cfg.k)
        .map(|_| (0..cfg.dim).map(|_| rng.random::<f64>() * cfg.m).collect())
        .collect()
}

fn lap_vector(dim: usize, b: f64, rng: &mut SeededRng) -> Vec<f64> {
    (0..dim).map(|_| sample_laplace(b, rng)).collect()
}

/// One randomized-response report of `true_idx` among `k` clusters: truthful
/// with probability `p_truth`, otherwise uniform over all `k` clusters (the
/// true one included). At `p_truth = 1` the uniform branch is unreachable.
fn rr_report(true_idx: usize, k: usize, p_truth: f64, rng: &mut SeededRng) -> usize {
    if rng.random::<f64>() < p_truth {
        true_idx
    } else {
        rng.random_range(0..k)
    }
}

/// Non-private Lloyd iterations with the crate's shared conventions:
/// uniform initial centers from `rng`, exact assignments, exact means, and
/// an empty cluster retaining its previous center. This is the reference
/// the private algorithms converge to as `epsilon` grows.
pub fn lloyd(data: &[Vec<f64>], cfg: &KMeansConfig, rng: &mut SeededRng) -> Result<ClusteringResult> {
    let data = prepared(data, cfg, "input")?;
    let mut centers = initial_centers(cfg, rng);
    for _ in 0..cfg.tau {
        let assign: Vec<usize> = data.iter().map(|x| nearest(x, &centers)).collect();
        let mut counts = vec![0u64; cfg.k];
        let mut sums = vec![vec![0.0; cfg.dim]; cfg.k];
        for (x, &a) in data.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(x) {
                *s += v;
            }
        }
        for k_idx in 0..cfg.k {
            if counts[k_idx] == 0 {
                continue; // retain previous center
            }
            centers[k_idx] = sums[k_idx]
                .iter()
                .map(|s| s / counts[k_idx] as f64)
                .collect();
        }
    }
    let score = wcss(&data, &centers);
    Ok(ClusteringResult {
        centers,
        wcss: score,
        iterations_run: cfg.tau,
    })
}

/// Curator-only baseline: Lloyd on the opt-in group with per-iteration
/// Laplace noise, splitting each iteration's budget `epsilon / tau` evenly
/// between the cluster counts (scale `2 tau / epsilon`, sensitivity 1) and
/// the coordinate sums (scale `2 tau m d / epsilon`, L1 sensitivity `m d`).
/// A cluster whose noisy count is not positive retains its previous center
/// for that iteration.
pub fn kmeans_tcm_baseline(
    tcm_data: &[Vec<f64>],
    cfg: &KMeansConfig,
    rng: &mut SeededRng,
) -> Result<ClusteringResult> {
    let data = prepared(tcm_data, cfg, "opt-in")?;
    let b_count = 2.0 * cfg.tau as f64 / cfg.epsilon;
    let b_sum = 2.0 * cfg.tau as f64 * cfg.m * cfg.dim as f64 / cfg.epsilon;
    let mut centers = initial_centers(cfg, rng);
    for _ in 0..cfg.tau {
        let assign: Vec<usize> = data.iter().map(|x| nearest(x, &centers)).collect();
        let mut counts = vec![0u64; cfg.k];
        let mut sums = vec![vec![0.0; cfg.dim]; cfg.k];
        for (x, &a) in data.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(x) {
                *s += v;
            }
        }
        for k_idx in 0..cfg.k {
            let noisy_count = counts[k_idx] as f64 + sample_laplace(b_count, rng);
            if noisy_count <= 0.0 {
                continue; // retain previous center; sum noise is not drawn
            }
            let noise = lap_vector(cfg.dim, b_sum, rng);
            centers[k_idx] = sums[k_idx]
                .iter()
                .zip(&noise)
                .map(|(s, e)| ((s + e) / noisy_count).clamp(0.0, cfg.m))
                .collect();
        }
    }
    let score = wcss(&data, &centers);
    Ok(ClusteringResult {
        centers,
        wcss: score,
        iterations_run: cfg.tau,
    })
}

/// Everyone-local baseline: each user releases one noised copy of their
/// point (scale `b_L`) up front, then answers `tau` randomized-response
/// rounds about their true nearest cluster. Centers are the means of the
/// noised reports grouped by response; response counts are exact (they are
/// the observed reports, not a protected quantity). An empty response group
/// retains its previous center.
pub fn kmeans_lm_baseline(
    all_data: &[Vec<f64>],
    cfg: &KMeansConfig,
    rng: &mut SeededRng,
) -> Result<ClusteringResult> {
    let data = prepared(all_data, cfg, "input")?;
    let b_l = cfg.lap_scale_lm();
    let p_truth = cfg.truthful_response_probability();
    let mut centers = initial_centers(cfg, rng);
    let reports: Vec<Vec<f64>> = data
        .iter()
        .map(|x| {
            x.iter()
                .map(|v| v + sample_laplace(b_l, rng))
                .collect()
        })
        .collect();
    for _ in 0..cfg.tau {
        let mut counts = vec![0u64; cfg.k];
        let mut sums = vec![vec![0.0; cfg.dim]; cfg.k];
        for (x, report) in data.iter().zip(&reports) {
            let response = rr_report(nearest(x, &centers), cfg.k, p_truth, rng);
            counts[response] += 1;
            for (s, v) in sums[response].iter_mut().zip(report) {
                *s += v;
            }
        }
        for k_idx in 0..cfg.k {
            if counts[k_idx] == 0 {
                continue; // retain previous center
            }
            centers[k_idx] = sums[k_idx]
                .iter()
                .map(|s| (s / counts[k_idx] as f64).clamp(0.0, cfg.m))
                .collect();
        }
    }
    let score = wcss(&data, &centers);
    Ok(ClusteringResult {
        centers,
        wcss: score,
        iterations_run: cfg.tau,
    })
}

/// Hybrid clustering: exact assignments and noisy count/sum releases for the
/// opt-in group, one-shot noised reports plus randomized-response
/// assignments for the local group, and per-cluster centers merged by the
/// privacy-weighted rule.
///
/// Within a cluster the merge treats the noisy opt-in count as the opt-in
/// head count and the response count as the local head count; the
/// privacy-weighted weight then collapses to `w = rho / (rho + N_L)` with
/// `rho = (b_L / b_T)^2`, which is free of `epsilon` and so remains finite
/// in the no-privacy limit.
///
/// Degenerate-cluster handling, in order:
/// - no mass at all (noisy opt-in count plus response count not positive):
///   retain the previous center;
/// - no positive opt-in count but some responses: use the local estimate;
/// - otherwise blend, with the noisy count floored at `1e-6` in the
///   divisor so a vanishing positive count cannot blow up the opt-in mean
///   (the result is clamped into `[0, m]^dim` regardless).
pub fn kmeans_hybrid(
    tcm_data: &[Vec<f64>],
    lm_data: &[Vec<f64>],
    cfg: &KMeansConfig,
    rng: &mut SeededRng,
) -> Result<ClusteringResult> {
    let tcm = prepared(tcm_data, cfg, "opt-in")?;
    let lm = prepared(lm_data, cfg, "local")?;
    let b_t = cfg.lap_scale_tcm();
    let b_l = cfg.lap_scale_lm();
    let p_truth = cfg.truthful_response_probability();
    let md = cfg.m * cfg.dim as f64;
    // rho = (b_L / b_T)^2 with epsilon cancelled symbolically.
    let rho_root = md * (cfg.tau as f64 + 1.0) / ((md + 1.0) * cfg.tau as f64);
    let rho = rho_root * rho_root;

    let mut centers = initial_centers(cfg, rng);
    let reports: Vec<Vec<f64>> = lm
        .iter()
        .map(|x| {
            x.iter()
                .map(|v| v + sample_laplace(b_l, rng))
                .collect()
        })
        .collect();

    for _ in 0..cfg.tau {
        // Opt-in side: exact assignments on true data.
        let mut t_counts = vec![0u64; cfg.k];
        let mut t_sums = vec![vec![0.0; cfg.dim]; cfg.k];
        for x in &tcm {
            let a = nearest(x, &centers);
            t_counts[a] += 1;
            for (s, v) in t_sums[a].iter_mut().zip(x) {
                *s += v;
            }
        }
        // Local side: randomized responses about true nearest clusters.
        let mut l_counts = vec![0u64; cfg.k];
        let mut l_sums = vec![vec![0.0; cfg.dim]; cfg.k];
        for (x, report) in lm.iter().zip(&reports) {
            let response = rr_report(nearest(x, &centers), cfg.k, p_truth, rng);
            l_counts[response] += 1;
            for (s, v) in l_sums[response].iter_mut().zip(report) {
                *s += v;
            }
        }

        for k_idx in 0..cfg.k {
            let noisy_t = t_counts[k_idx] as f64 + sample_laplace(b_t, rng);
            let t_noise = lap_vector(cfg.dim, b_t, rng);
            let n_l = l_counts[k_idx] as f64;
            if noisy_t + n_l <= 0.0 {
                continue; // retain previous center
            }
            let l_mean: Option<Vec<f64>> = (l_counts[k_idx] > 0).then(|| {
                l_sums[k_idx].iter().map(|s| s / n_l).collect()
            });
            let center: Vec<f64> = if noisy_t <= 0.0 {
                match l_mean {
                    Some(v) => v,
                    None => continue, // defensively unreachable: total mass was positive
                }
            } else {
                let divisor = noisy_t.max(1e-6);
                let t_mean: Vec<f64> = t_sums[k_idx]
                    .iter()
                    .zip(&t_noise)
                    .map(|(s, e)| (s + e) / divisor)
                    .collect();
                let w = rho / (rho + n_l);
                if !w.is_finite() {
                    continue; // defensive: malformed scale ratio
                }
                match &l_mean {
                    Some(lv) => t_mean
                        .iter()
                        .zip(lv)
                        .map(|(t, l)| w * t + (1.0 - w) * l)
                        .collect(),
                    None => t_mean,
                }
            };
            centers[k_idx] = center
                .into_iter()
                .map(|v| v.clamp(0.0, cfg.m))
                .collect();
        }
    }

    let mut all = tcm;
    all.extend(lm);
    let score = wcss(&all, &centers);
    Ok(ClusteringResult {
        centers,
        wcss: score,
        iterations_run: cfg.tau,
    })
}

#[cfg(test)]
// Frozen reference values are written with a full 17-digit mantissa on
// purpose: they pin exact f64 bits.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use approx::assert_relative_eq;

    fn two_blob_data(per_blob: usize, seed: u64) -> Vec<Vec<f64>> {
        // Two tight blobs near (0.2, 0.2) and (0.8, 0.8).
        let mut rng = derive_rng(seed, &[100]);
        let mut data = Vec::new();
        for i in 0..(2 * per_blob) {
            let base = if i % 2 == 0 { 0.2 } else { 0.8 };
            data.push(vec![
                (base + 0.02 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0),
                (base + 0.02 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0),
            ]);
        }
        data
    }

    #[test]
    fn config_validates() {
        assert!(KMeansConfig::new(0, 2, 1.0, 2, 1.0).is_err());
        assert!(KMeansConfig::new(2, 0, 1.0, 2, 1.0).is_err());
        assert!(KMeansConfig::new(2, 2, 0.0, 2, 1.0).is_err());
        assert!(KMeansConfig::new(2, 2, 1.0, 0, 1.0).is_err());
        assert!(KMeansConfig::new(2, 2, 1.0, 2, 0.0).is_err());
        assert!(KMeansConfig::new(2, 2, f64::INFINITY, 2, 1.0).is_ok());
    }

    #[test]
    fn scales_match_closed_forms() {
        // k = 4, tau = 6, eps = 7, d = 2, m = 1: b_T = 3*6/7, b_L = 2*7/7.
        let cfg = KMeansConfig::new(4, 6, 7.0, 2, 1.0).unwrap();
        assert_relative_eq!(cfg.lap_scale_tcm(), 18.0 / 7.0, max_relative = 1e-15);
        assert_relative_eq!(cfg.lap_scale_lm(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(
            cfg.truthful_response_probability(),
            3.00489181891562263e-1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn truthful_probability_limits() {
        let cfg = KMeansConfig::new(4, 6, f64::INFINITY, 2, 1.0).unwrap();
        assert_eq!(cfg.truthful_response_probability(), 1.0);
        // Tiny budget: barely better than uniform (1/k share of truth mass).
        let cfg = KMeansConfig::new(4, 6, 1e-9, 2, 1.0).unwrap();
        let p = cfg.truthful_response_probability();
        assert!(p > 0.0 && p < 1e-9);
    }

    #[test]
    fn budget_ledger_totals_equal_epsilon() {
        for (k, tau, eps, d, m) in [(4usize, 6u32, 7.0, 2usize, 1.0), (3, 2, 0.5, 5, 2.0)] {
            let cfg = KMeansConfig::new(k, tau, eps, d, m).unwrap();
            let ledger = budget_ledger(&cfg);
            assert_relative_eq!(ledger.lm_total, eps, max_relative = 1e-12);
            assert_relative_eq!(ledger.tcm_total, eps, max_relative = 1e-12);
            assert_relative_eq!(
                ledger.lm_report,
                eps / (tau as f64 + 1.0),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                ledger.tcm_per_iteration,
                eps / tau as f64,
                max_relative = 1e-12
            );
            assert_eq!(ledger.lm_rounds, tau);
            assert_eq!(ledger.tcm_iterations, tau);
        }
    }

    #[test]
    fn rho_is_one_for_the_reference_geometry() {
        // tau = 2, m = 1, d = 2: b_L / b_T = (2 * 3) / (3 * 2) = 1.
        let cfg = KMeansConfig::new(4, 2, 7.0, 2, 1.0).unwrap();
        assert_relative_eq!(
            cfg.lap_scale_lm() / cfg.lap_scale_tcm(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn lloyd_separates_two_blobs() {
        let data = two_blob_data(100, 1);
        let cfg = KMeansConfig::new(2, 8, f64::INFINITY, 2, 1.0).unwrap();
        let mut rng = derive_rng(7, &[0]);
        let result = lloyd(&data, &cfg, &mut rng).unwrap();
        // Tight blobs of width 0.02: WCSS per point is at most ~2*(0.01)^2.
        assert!(result.wcss / (data.len() as f64) < 1e-3, "wcss {}", result.wcss);
    }

    #[test]
    fn infinite_epsilon_baselines_reproduce_lloyd_exactly() {
        let data = two_blob_data(60, 2);
        let cfg = KMeansConfig::new(2, 5, f64::INFINITY, 2, 1.0).unwrap();

        let reference = lloyd(&data, &cfg, &mut derive_rng(9, &[1])).unwrap();
        let tcm = kmeans_tcm_baseline(&data, &cfg, &mut derive_rng(9, &[1])).unwrap();
        assert_eq!(tcm.centers, reference.centers);
        assert_eq!(tcm.wcss, reference.wcss);

        let lm = kmeans_lm_baseline(&data, &cfg, &mut derive_rng(9, &[1])).unwrap();
        assert_eq!(lm.centers, reference.centers);
        assert_eq!(lm.wcss, reference.wcss);
    }

    #[test]
    fn infinite_epsilon_hybrid_tracks_lloyd_closely() {
        // The hybrid's per-cluster merge weights the two exact group means
        // by rho rather than by head count, so it is not bit-identical to
        // Lloyd; on well-separated data it lands on the same clustering.
        let data = two_blob_data(60, 3);
        let (tcm, lm): (Vec<_>, Vec<_>) = (data[..12].to_vec(), data[12..].to_vec());
        let cfg = KMeansConfig::new(2, 5, f64::INFINITY, 2, 1.0).unwrap();
        let reference = lloyd(&data, &cfg, &mut derive_rng(4, &[2])).unwrap();
        let hybrid = kmeans_hybrid(&tcm, &lm, &cfg, &mut derive_rng(4, &[2])).unwrap();
        let hybrid_score = wcss(&data, &hybrid.centers);
        assert!(
            hybrid_score <= reference.wcss * 1.05 + 1e-12,
            "hybrid {hybrid_score} vs lloyd {}",
            reference.wcss
        );
    }

    #[test]
    fn private_runs_are_deterministic_given_the_stream() {
        let data = two_blob_data(40, 4);
        let (tcm, lm): (Vec<_>, Vec<_>) = (data[..8].to_vec(), data[8..].to_vec());
        let cfg = KMeansConfig::new(2, 3, 2.0, 2, 1.0).unwrap();
        let a = kmeans_hybrid(&tcm, &lm, &cfg, &mut derive_rng(5, &[3])).unwrap();
        let b = kmeans_hybrid(&tcm, &lm, &cfg, &mut derive_rng(5, &[3])).unwrap();
        assert_eq!(a.centers, b.centers);
        assert_eq!(a.wcss, b.wcss);
    }

    #[test]
    fn centers_stay_in_the_box_under_heavy_noise() {
        let data = two_blob_data(10, 5);
        let (tcm, lm): (Vec<_>, Vec<_>) = (data[..4].to_vec(), data[4..].to_vec());
        // Tiny budget: noise dwarfs the data; centers must still be valid.
        let cfg = KMeansConfig::new(3, 4, 0.05, 2, 1.0).unwrap();
        for seed in 0..10 {
            let result = kmeans_hybrid(&tcm, &lm, &cfg, &mut derive_rng(seed, &[4])).unwrap();
            for center in &result.centers {
                for &v in center {
                    assert!((0.0..=1.0).contains(&v), "coordinate {v} escaped [0, 1]");
                }
            }
            let result = kmeans_tcm_baseline(&tcm, &cfg, &mut derive_rng(seed, &[5])).unwrap();
            for center in &result.centers {
                assert!(center.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let cfg = KMeansConfig::new(2, 2, 1.0, 2, 1.0).unwrap();
        let bad = vec![vec![0.5, 0.5], vec![0.5]];
        let mut rng = derive_rng(0, &[6]);
        assert!(lloyd(&bad, &cfg, &mut rng).is_err());
        assert!(kmeans_tcm_baseline(&bad, &cfg, &mut rng).is_err());
        assert!(kmeans_lm_baseline(&bad, &cfg, &mut rng).is_err());
        assert!(kmeans_hybrid(&bad, &[vec![0.1, 0.1]], &cfg, &mut rng).is_err());
        assert!(kmeans_hybrid(&[vec![0.1, 0.1]], &[], &cfg, &mut rng).is_err());
    }

    #[test]
    fn wcss_matches_hand_computation() {
        let data = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 0.0]];
        let centers = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        // Point 3 is distance^2 = 1 from both centers.
        assert_relative_eq!(wcss(&data, &centers), 1.0, max_relative = 1e-15);
    }
}
