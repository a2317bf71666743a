//! Private K-means benchmark: mean within-cluster sum of squares for the
//! hybrid algorithm, both single-model baselines, and non-private Lloyd,
//! over a grid of iteration budgets.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use hybrid_mean::experiments::csv::{kmeans_table, write_table};
use hybrid_mean::experiments::{gauss4, kmeans_wcss_experiment};
use hybrid_mean::{Error, Result};

use crate::config::{self, FileConfig, TauSpec};

#[derive(Args)]
pub struct KmeansArgs {
    /// Clustered data preset (gauss4: four Gaussian clusters in the unit square)
    #[arg(long)]
    preset: Option<String>,

    /// Multiplier on the preset's points per cluster
    #[arg(long)]
    scale: Option<f64>,

    /// Total privacy budget epsilon (inf for no noise)
    #[arg(long)]
    eps: Option<f64>,

    /// Iteration budgets: single value, comma list, or inclusive lo..hi
    #[arg(long, value_parser = config::tau_parser)]
    tau: Option<TauSpec>,

    /// Trials per iteration budget
    #[arg(long)]
    trials: Option<u64>,

    /// Opt-in fraction c in (0, 1)
    #[arg(long)]
    c: Option<f64>,

    /// Root seed for data and algorithm randomness
    #[arg(long)]
    seed: Option<u64>,

    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: KmeansArgs, cfg: &FileConfig) -> Result<ExitCode> {
    let preset_name = config::resolve(args.preset, cfg, "preset", "gauss4".to_string())?;
    if preset_name != "gauss4" {
        return Err(Error::invalid(format!(
            "unknown clustered preset {preset_name:?}; expected gauss4"
        )));
    }
    let p = gauss4();
    let scale = config::resolve(args.scale, cfg, "scale", 1.0)?;
    let eps = config::resolve(args.eps, cfg, "eps", 7.0)?;
    let taus = config::resolve(args.tau, cfg, "tau", TauSpec((2..=8).collect()))?;
    let trials = config::resolve(args.trials, cfg, "trials", 50)?;
    let c = config::resolve(args.c, cfg, "c", 0.001)?;
    let seed = config::resolve(args.seed, cfg, "seed", 7)?;

    let cells = kmeans_wcss_experiment(&p, scale, eps, &taus.0, c, trials, seed)?;
    let (header, lines) = kmeans_table(&cells);
    write_table(args.out.as_deref(), &header, &lines)?;
    eprintln!(
        "kmeans: {} cells ({} iteration budgets x {} algorithms), {trials} trials each",
        cells.len(),
        taus.0.len(),
        cells.len() / taus.0.len().max(1)
    );
    Ok(ExitCode::SUCCESS)
}
