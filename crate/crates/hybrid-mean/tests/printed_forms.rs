//! Redundant closed forms, transcribed independently and checked against
//! the implemented breakdowns across randomized homogeneous settings. The
//! implementation factors everything through the general heterogeneous
//! breakdown, so agreement here is a genuine two-route check.

use hybrid_mean::analytics::{
    mse_nwh, mse_pwh, weight_kvh_heterogeneous, Setting, WeightRule,
};
use hybrid_mean::core::{Cohort, GroupDistribution};
use hybrid_mean::experiments::{log_grid_n, sweep_skew, ExperimentSpec, SkewKinds};
use hybrid_mean::mechanisms::Mechanism;
use hybrid_mean::rng::derive_rng;
use rand::Rng;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Deterministic stream of homogeneous settings spanning both mechanisms.
fn random_homogeneous_settings(count: usize) -> Vec<Setting> {
    (0..count)
        .map(|i| {
            let mut rng = derive_rng(0x9E1D, &[i as u64]);
            let n = rng.random_range(20u64..20_000);
            let c = rng.random_range(0.02f64..0.9);
            let cohort = match Cohort::new(n, c) {
                Ok(cohort) => cohort,
                Err(_) => Cohort::new(n, 0.5).unwrap(),
            };
            let m = rng.random_range(0.5f64..10.0);
            let mean = rng.random_range(0.0..=1.0) * m;
            let var = rng.random_range(1e-6f64..=1.0) * m * m / 4.0;
            let g = GroupDistribution::new(mean, var, m).unwrap();
            let eps = rng.random_range(0.05f64..4.0);
            let mech = if i % 2 == 0 {
                Mechanism::laplace(eps).unwrap()
            } else {
                Mechanism::gaussian(eps, rng.random_range(1e-9f64..1e-4)).unwrap()
            };
            Setting::new(g, g, cohort, &mech).unwrap()
        })
        .collect()
}

struct Homog {
    c: f64,
    n: f64,
    var: f64,
    s_t_sq: f64,
    s_l_sq: f64,
}

fn homog_parts(s: &Setting) -> Homog {
    Homog {
        c: s.cohort().c(),
        n: s.cohort().n() as f64,
        var: s.t().variance(),
        s_t_sq: s.scales().s_t_sq(),
        s_l_sq: s.scales().s_l_sq(),
    }
}

#[test]
fn kvh_error_matches_the_lemma_form() {
    for s in random_homogeneous_settings(200) {
        let h = homog_parts(&s);
        let w = WeightRule::Kvh.resolve(&s).unwrap().value();
        let lemma = (w - h.c) * (w - h.c) * h.var / (h.c * (1.0 - h.c) * h.n)
            + w * w * h.s_t_sq
            + (1.0 - w) * (1.0 - w) * h.s_l_sq / ((1.0 - h.c) * h.n);
        let implemented = hybrid_mean::analytics::mse_kvh(&s).total;
        assert!(
            rel_close(lemma, implemented, 1e-9),
            "lemma {lemma} vs implemented {implemented}"
        );
    }
}

#[test]
fn kvh_gamma_form_equals_the_kvh_error() {
    // The gamma expression resolves to the optimal hybrid's error itself
    // (its reciprocal-free form), so it must coincide with the breakdown.
    for s in random_homogeneous_settings(200) {
        let h = homog_parts(&s);
        let num = (1.0 - h.c) * h.var * h.s_l_sq
            + h.c * h.n * (h.c * h.var + h.s_l_sq) * h.s_t_sq;
        let den = h.n * (h.var + h.c * h.s_l_sq) + (1.0 - h.c) * h.c * h.n * h.n * h.s_t_sq;
        let gamma = num / den;
        let implemented = hybrid_mean::analytics::mse_kvh(&s).total;
        assert!(
            rel_close(gamma, implemented, 1e-7),
            "gamma {gamma} vs implemented {implemented}"
        );
    }
}

#[test]
fn pwh_error_matches_the_lemma_form() {
    for s in random_homogeneous_settings(200) {
        let h = homog_parts(&s);
        let num = (1.0 - h.c) * h.c * h.n * h.n * h.s_t_sq * h.s_t_sq
            * (h.c * h.var + h.s_l_sq)
            + h.c * h.n * h.s_l_sq * h.s_t_sq * (2.0 * (h.c - 1.0) * h.var + h.s_l_sq)
            + (1.0 - h.c) * h.var * h.s_l_sq * h.s_l_sq;
        let tail = h.s_l_sq + (1.0 - h.c) * h.n * h.s_t_sq;
        let den = h.c * h.n * tail * tail;
        let lemma = num / den;
        let implemented = mse_pwh(&s).total;
        assert!(
            rel_close(lemma, implemented, 1e-7),
            "lemma {lemma} vs implemented {implemented}"
        );
    }
}

#[test]
fn pwh_gamma_form_is_the_reciprocal_error() {
    for s in random_homogeneous_settings(200) {
        let h = homog_parts(&s);
        let num = (1.0 - h.c) * h.c * h.n * h.n * h.s_t_sq * h.s_t_sq
            * (h.c * h.var + h.s_l_sq)
            + h.c * h.n * h.s_l_sq * h.s_t_sq * (2.0 * (h.c - 1.0) * h.var + h.s_l_sq)
            + (1.0 - h.c) * h.var * h.s_l_sq * h.s_l_sq;
        let tail = h.s_l_sq + (1.0 - h.c) * h.n * h.s_t_sq;
        let gamma = h.c * h.n * tail * tail / num;
        assert!(
            rel_close(gamma, 1.0 / mse_pwh(&s).total, 1e-7),
            "inverted gamma disagrees with the error"
        );
    }
}

#[test]
fn nwh_gamma_form_is_the_reciprocal_error() {
    for s in random_homogeneous_settings(200) {
        let h = homog_parts(&s);
        let gamma = h.n / (h.c * h.c * h.n * h.s_t_sq + (1.0 - h.c) * h.s_l_sq);
        assert!(
            rel_close(gamma, 1.0 / mse_nwh(&s).total, 1e-9),
            "naive-weight gamma disagrees with the error"
        );
    }
}

#[test]
fn variance_skew_weight_matches_the_reduced_form() {
    // Equal means, unequal variances: the heterogeneous weight must reduce
    // to the variance-skew expression.
    for i in 0..200u64 {
        let mut rng = derive_rng(0x51E3, &[i]);
        let n = rng.random_range(20u64..20_000);
        let cohort = Cohort::new(n, rng.random_range(0.05f64..0.9))
            .unwrap_or_else(|_| Cohort::new(n, 0.5).unwrap());
        let m = rng.random_range(0.5f64..10.0);
        let mean = rng.random_range(0.1..=0.9) * m;
        let var_t = rng.random_range(1e-6f64..=1.0) * m * m / 4.0;
        let var_l = rng.random_range(1e-6f64..=1.0) * m * m / 4.0;
        let t = GroupDistribution::new(mean, var_t, m).unwrap();
        let l = GroupDistribution::new(mean, var_l, m).unwrap();
        let mech = Mechanism::laplace(rng.random_range(0.05f64..4.0)).unwrap();
        let s = Setting::new(t, l, cohort, &mech).unwrap();

        let (c, nf) = (cohort.c(), cohort.n() as f64);
        let (st2, sl2) = (s.scales().s_t_sq(), s.scales().s_l_sq());
        let num = c * (sl2 + c * var_l + (1.0 - c) * var_t);
        let den = c * sl2 + (1.0 - c) * c * nf * st2 + c * var_l + (1.0 - c) * var_t;
        let reduced = num / den;
        let implemented = weight_kvh_heterogeneous(&s).value();
        assert!(
            rel_close(reduced, implemented, 1e-9),
            "reduced {reduced} vs implemented {implemented}"
        );
    }
}

#[test]
fn mean_skew_pocket_values_are_pinned() {
    // At small cohorts with a weak budget the mis-weighted hybrid is noise
    // dominated and the improvement ratio is not yet monotone in the mean
    // separation; these frozen values document that pocket (and why the
    // headline mean-skew grid starts at larger n).
    let spec = ExperimentSpec {
        n_grid: vec![2000],
        c_grid: vec![0.05],
        epsilon_grid: vec![0.1],
        shift_grid: vec![0.0, 0.25, 0.5],
        ..ExperimentSpec::default()
    };
    let rows = sweep_skew(&spec, SkewKinds::Mean).unwrap();
    assert_eq!(rows.len(), 3);
    let expected = [
        1.1920771854365542,
        1.371689498333343,
        0.5795222565202777,
    ];
    for (row, want) in rows.iter().zip(expected) {
        assert!(
            rel_close(row.r_better, want, 1e-10),
            "pocket value {} vs frozen {want}",
            row.r_better
        );
    }
    assert!(rows[1].r_better > rows[0].r_better, "the pocket is non-monotone");

    // On the headline grid the ratio is monotone nonincreasing in the
    // separation for every cohort size.
    let headline = ExperimentSpec {
        n_grid: log_grid_n(4_000, 100_000, 11).unwrap(),
        c_grid: vec![0.005],
        epsilon_grid: vec![1.0],
        shift_grid: vec![0.0, 0.25, 0.5],
        ..ExperimentSpec::default()
    };
    let rows = sweep_skew(&headline, SkewKinds::Mean).unwrap();
    // Rows come out with the shift as the outer axis: one block of cohort
    // sizes per t value.
    let block = rows.len() / 3;
    assert_eq!(rows.len(), 3 * block);
    for i in 0..block {
        let (r0, r1, r2) = (&rows[i], &rows[block + i], &rows[2 * block + i]);
        assert!(r0.n == r1.n && r1.n == r2.n);
        assert!(r0.shift_t < r1.shift_t && r1.shift_t < r2.shift_t);
        assert!(r0.r_better >= r1.r_better && r1.r_better >= r2.r_better);
    }
}
