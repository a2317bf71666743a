//! Privacy against coalitions that see the released mean: amplified
//! Gaussian guarantees over a (c, adversarial-fraction) grid, or the
//! Laplace no-amplification certificate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use hybrid_mean::amplification::{
    amplification_sweep, laplace_no_amplification_certificate, CoalitionModel,
};
use hybrid_mean::analytics::WeightRule;
use hybrid_mean::core::{Cohort, PrivacyParams};
use hybrid_mean::experiments::csv::{amplification_table, fmt_float, write_table};
use hybrid_mean::experiments::{log_grid, preset};
use hybrid_mean::mechanisms::{calibrate, Mechanism, MechanismKind};
use hybrid_mean::{Error, Result};

use crate::config::{self, FileConfig};

#[derive(Args)]
pub struct AmplifyArgs {
    /// Data preset fixing the support bound and variance
    #[arg(long)]
    preset: Option<String>,

    /// Per-user privacy budget epsilon
    #[arg(long)]
    eps: Option<f64>,

    /// Gaussian failure probability delta
    #[arg(long)]
    delta: Option<f64>,

    /// Hybrid weight rule: kvh, pwh, nwh, or fixed:<w>
    #[arg(long, value_parser = config::weight_parser)]
    weight: Option<WeightRule>,

    /// Adversarial fractions of the local group (comma-separated)
    #[arg(long = "adv-frac", value_delimiter = ',')]
    adv_frac: Option<Vec<f64>>,

    /// Opt-in fractions (comma-separated)
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,

    /// Population size (default: the preset's population, when it has one)
    #[arg(long)]
    n: Option<u64>,

    /// Mechanism family: gaussian (amplified bounds) or laplace (certificate)
    #[arg(long, value_parser = config::mech_parser)]
    mech: Option<MechanismKind>,

    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: AmplifyArgs, cfg: &FileConfig) -> Result<ExitCode> {
    let preset_name = config::resolve(args.preset, cfg, "preset", "uc-salary-summary".to_string())?;
    let p = preset(&preset_name)?;
    let eps = config::resolve(args.eps, cfg, "eps", 1.0)?;
    let delta = config::resolve(args.delta, cfg, "delta", 1e-7)?;
    let weight = config::resolve(args.weight, cfg, "weight", WeightRule::Kvh)?;
    let fracs = config::resolve_list(args.adv_frac, cfg, "adv-frac", vec![0.0, 0.25, 0.5, 1.0])?;
    let c_list = config::resolve_list(args.c, cfg, "c", log_grid(0.001, 0.1, 16)?)?;
    let mech_kind = config::resolve(args.mech, cfg, "mech", MechanismKind::Gaussian)?;
    let n = config::resolve_opt(args.n, cfg, "n")?
        .or(p.population_n)
        .ok_or_else(|| {
            Error::invalid(format!(
                "preset {preset_name} has no population size; give --n"
            ))
        })?;

    let params = PrivacyParams::new(eps, delta)?;
    let cohorts = c_list
        .iter()
        .map(|&c| Cohort::new(n, c))
        .collect::<Result<Vec<Cohort>>>()?;

    match mech_kind {
        MechanismKind::Gaussian => {
            let mech = Mechanism::new(MechanismKind::Gaussian, params)?;
            if let Some(warning) = mech.epsilon_warning() {
                eprintln!("{warning}");
            }
            let cells = amplification_sweep(&cohorts, &fracs, &params, &p.analytic, weight)?;
            let (header, lines) = amplification_table(&cells);
            write_table(args.out.as_deref(), &header, &lines)?;
            eprintln!("amplify gaussian: {} cells", cells.len());
        }
        MechanismKind::Laplace => {
            // Summed Laplace noise admits no amplification; report the
            // certificate per cell instead of an improved epsilon.
            let mech = Mechanism::new(MechanismKind::Laplace, params)?;
            let m = p.analytic.support_max();
            let header = "n,c,adversarial_fraction,adversarial_count,honest_lm_count,\
                          eps_original,sup_log_ratio,eps_limit"
                .to_string();
            let mut lines = Vec::with_capacity(cohorts.len() * fracs.len());
            for cohort in &cohorts {
                let scales = calibrate(&mech, cohort, m)?;
                for &frac in &fracs {
                    if !(0.0..=1.0).contains(&frac) {
                        return Err(Error::invalid(format!(
                            "adversarial fractions must lie in [0, 1], got {frac}"
                        )));
                    }
                    // The certificate needs at least one honest local user.
                    let adv = ((frac * cohort.lm_count() as f64).round() as u64)
                        .min(cohort.lm_count() - 1);
                    let cert = laplace_no_amplification_certificate(
                        cohort,
                        &scales,
                        &CoalitionModel::new(adv),
                        m,
                    )?;
                    lines.push(format!(
                        "{},{},{},{adv},{},{},{},{}",
                        cohort.n(),
                        fmt_float(cohort.c()),
                        fmt_float(frac),
                        cert.honest_lm_count,
                        fmt_float(cert.epsilon_original),
                        fmt_float(cert.sup_log_ratio),
                        fmt_float(cert.limit)
                    ));
                }
            }
            write_table(args.out.as_deref(), &header, &lines)?;
            eprintln!("amplify laplace: {} certificates", lines.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}
