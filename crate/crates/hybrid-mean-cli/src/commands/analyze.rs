//! Closed-form error report for one setting: baseline and hybrid errors,
//! the requested weight rule's improvement ratios, critical-value
//! diagnostics, and the Laplace dominance-region check.

use std::process::ExitCode;

use clap::Args;
use hybrid_mean::analytics::{
    critical_value_diagnostic, improvement_r, improvement_R, mse_full_lm, mse_hybrid, mse_lm_only,
    mse_tcm_only, pwh_dominance_region, MseBreakdown, Setting, WeightRule,
};
use hybrid_mean::core::{Cohort, GroupDistribution, PrivacyParams};
use hybrid_mean::experiments::csv::fmt_float;
use hybrid_mean::mechanisms::{Mechanism, MechanismKind};
use hybrid_mean::{Error, Result};

use crate::config::{self, FileConfig};

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Mechanism family: laplace or gaussian
    #[arg(long, value_parser = config::mech_parser)]
    mech: Option<MechanismKind>,

    /// Population size n
    #[arg(long)]
    n: Option<u64>,

    /// Opt-in fraction c in (0, 1)
    #[arg(long)]
    c: Option<f64>,

    /// Per-user privacy budget epsilon (inf for no noise)
    #[arg(long)]
    eps: Option<f64>,

    /// Gaussian failure probability delta (default 0)
    #[arg(long)]
    delta: Option<f64>,

    /// Support bound m; data lies in [0, m]
    #[arg(long)]
    m: Option<f64>,

    /// Shared standard deviation for a homogeneous analysis
    #[arg(long)]
    sigma: Option<f64>,

    /// Shared mean for a homogeneous analysis (default m/2)
    #[arg(long)]
    mu: Option<f64>,

    /// Opt-in group mean (heterogeneous analysis; needs all four per-group values)
    #[arg(long = "mu-t")]
    mu_t: Option<f64>,

    /// Local group mean
    #[arg(long = "mu-l")]
    mu_l: Option<f64>,

    /// Opt-in group standard deviation
    #[arg(long = "sigma-t")]
    sigma_t: Option<f64>,

    /// Local group standard deviation
    #[arg(long = "sigma-l")]
    sigma_l: Option<f64>,

    /// Hybrid weight rule: kvh, pwh, nwh, or fixed:<w>
    #[arg(long, value_parser = config::weight_parser)]
    weight: Option<WeightRule>,
}

fn group_pair(args: &AnalyzeArgs, cfg: &FileConfig, m: f64) -> Result<(GroupDistribution, GroupDistribution)> {
    let sigma = config::resolve_opt(args.sigma, cfg, "sigma")?;
    let mu = config::resolve_opt(args.mu, cfg, "mu")?;
    let mu_t = config::resolve_opt(args.mu_t, cfg, "mu-t")?;
    let mu_l = config::resolve_opt(args.mu_l, cfg, "mu-l")?;
    let sigma_t = config::resolve_opt(args.sigma_t, cfg, "sigma-t")?;
    let sigma_l = config::resolve_opt(args.sigma_l, cfg, "sigma-l")?;

    let any_per_group = [mu_t, mu_l, sigma_t, sigma_l].iter().any(Option::is_some);
    if any_per_group {
        if sigma.is_some() || mu.is_some() {
            return Err(Error::invalid(
                "give either --sigma/--mu or the per-group set --mu-t --mu-l --sigma-t --sigma-l, not both",
            ));
        }
        let (Some(mu_t), Some(mu_l), Some(st), Some(sl)) = (mu_t, mu_l, sigma_t, sigma_l) else {
            return Err(Error::invalid(
                "a heterogeneous analysis needs all four of --mu-t, --mu-l, --sigma-t, --sigma-l",
            ));
        };
        return Ok((
            GroupDistribution::new(mu_t, st * st, m)?,
            GroupDistribution::new(mu_l, sl * sl, m)?,
        ));
    }
    let Some(sigma) = sigma else {
        return Err(Error::invalid(
            "missing --sigma (or the per-group --mu-t/--mu-l/--sigma-t/--sigma-l set)",
        ));
    };
    let mu = mu.unwrap_or(m / 2.0);
    let shared = GroupDistribution::new(mu, sigma * sigma, m)?;
    Ok((shared, shared))
}

fn estimator_line(label: &str, w: Option<f64>, b: &MseBreakdown) -> String {
    let w = w.map_or_else(|| "-".to_string(), fmt_float);
    format!(
        "  {label:<18} {w:<24} {:<24} {:<24} {:<24} {}",
        fmt_float(b.total),
        fmt_float(b.sampling),
        fmt_float(b.privacy),
        fmt_float(b.bias)
    )
}

pub fn run(args: AnalyzeArgs, cfg: &FileConfig) -> Result<ExitCode> {
    let mech_kind = config::resolve(args.mech, cfg, "mech", MechanismKind::Laplace)?;
    let n = config::resolve_required(args.n, cfg, "n")?;
    let c = config::resolve_required(args.c, cfg, "c")?;
    let eps = config::resolve_required(args.eps, cfg, "eps")?;
    let delta = config::resolve(args.delta, cfg, "delta", 0.0)?;
    let m = config::resolve_required(args.m, cfg, "m")?;
    let weight = config::resolve(args.weight, cfg, "weight", WeightRule::Kvh)?;

    let (t, l) = group_pair(&args, cfg, m)?;
    let cohort = Cohort::new(n, c)?;
    let mechanism = Mechanism::new(mech_kind, PrivacyParams::new(eps, delta)?)?;
    if let Some(warning) = mechanism.epsilon_warning() {
        eprintln!("{warning}");
    }
    let setting = Setting::new(t, l, cohort, &mechanism)?;

    println!("setting");
    println!(
        "  n={n}  c={}  tcm_count={}  lm_count={}",
        fmt_float(c),
        cohort.tcm_count(),
        cohort.lm_count()
    );
    println!(
        "  mechanism={mech_kind}  epsilon={}  delta={}",
        fmt_float(eps),
        fmt_float(delta)
    );
    println!(
        "  support=[0, {}]  groups: {}",
        fmt_float(m),
        if setting.homogeneous() { "homogeneous" } else { "heterogeneous" }
    );
    println!(
        "  tcm group: mean={}  variance={}",
        fmt_float(setting.t().mean()),
        fmt_float(setting.t().variance())
    );
    println!(
        "  lm group:  mean={}  variance={}",
        fmt_float(setting.l().mean()),
        fmt_float(setting.l().variance())
    );
    println!(
        "  noise scales: s_t_sq={}  s_l_sq={}",
        fmt_float(setting.scales().s_t_sq()),
        fmt_float(setting.scales().s_l_sq())
    );
    println!();

    let e_tcm = mse_tcm_only(&setting);
    let e_full = mse_full_lm(&setting);
    println!("closed-form error vs the non-private empirical mean");
    println!(
        "  {:<18} {:<24} {:<24} {:<24} {:<24} bias^2",
        "estimator", "w", "total", "sampling", "privacy"
    );
    println!("{}", estimator_line("tcm-only", None, &e_tcm));
    println!("{}", estimator_line("full-lm", None, &e_full));
    println!("{}", estimator_line("lm-only", None, &mse_lm_only(&setting)));
    let mut requested: Option<(String, MseBreakdown)> = None;
    let mut rules = vec![WeightRule::Kvh, WeightRule::Pwh, WeightRule::Nwh];
    if matches!(weight, WeightRule::Fixed(_)) {
        rules.push(weight);
    }
    for rule in rules {
        let w = rule.resolve(&setting)?;
        let b = mse_hybrid(&setting, w);
        let label = format!("hybrid-{rule}");
        println!("{}", estimator_line(&label, Some(w.value()), &b));
        if std::mem::discriminant(&rule) == std::mem::discriminant(&weight) {
            requested = Some((label, b));
        }
    }
    println!();

    let (label, chosen) = requested.expect("the requested rule is always in the table");
    let big_r = improvement_R(&setting, chosen.total)?;
    let small_r = improvement_r(&setting, chosen.total)?;
    let better = if e_tcm.total <= e_full.total { "tcm-only" } else { "full-lm" };
    println!("improvement of {label}");
    println!(
        "  R={}  (vs better baseline: {better})",
        fmt_float(big_r)
    );
    println!("  r={}  (vs worse baseline)", fmt_float(small_r));
    println!();

    let diag = critical_value_diagnostic(&setting);
    println!("critical values");
    println!(
        "  c_crit={}  n_crit={}  n_crit_laplace={}",
        fmt_float(diag.values.c_crit),
        fmt_float(diag.values.n_crit),
        diag.n_crit_laplace.map_or_else(|| "-".to_string(), fmt_float)
    );
    println!(
        "  tcm_no_worse={}  general_split_agrees={}  laplace_split_agrees={}",
        diag.tcm_no_worse,
        diag.general_split_agrees,
        diag.laplace_split_agrees
            .map_or_else(|| "-".to_string(), |b| b.to_string())
    );
    match pwh_dominance_region(&setting) {
        Ok(fires) => println!("pwh dominance region: fires={fires}"),
        Err(e) => println!("pwh dominance region: not applicable ({e})"),
    }

    Ok(ExitCode::SUCCESS)
}
