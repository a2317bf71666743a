//! CSV serialization for the experiment tables.
//!
//! Floats are written with 17 significant digits so every value round-trips
//! bit-exactly; reruns with the same seed therefore produce byte-identical
//! files regardless of thread count.

use std::path::Path;

use crate::amplification::AmplificationCell;
use crate::experiments::monte_carlo::{KMeansCell, SimulateRow};
use crate::experiments::sweeps::{ImprovementRow, SkewRow};
use crate::{Error, Result};

/// Fixed-width scientific notation with a 16-digit mantissa: enough to
/// reconstruct the exact f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header plus data lines to `path`, or to stdout when `path` is
/// `None`. The whole table is assembled first so a failed write cannot leave
/// a half-row behind.
pub fn write_table(path: Option<&Path>, header: &str, lines: &[String]) -> Result<()> {
    let mut out = String::with_capacity(header.len() + 1 + lines.iter().map(|l| l.len() + 1).sum::<usize>());
    out.push_str(header);
    out.push('\n');
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, out).map_err(|e| Error::io(format!("{}: {e}", p.display()))),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

pub fn improvement_table(rows: &[ImprovementRow]) -> (String, Vec<String>) {
    let header = "n,c,epsilon,preset,estimator,r_better,r_worse,e_tcm,e_full,e_est,regime";
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                fmt_float(r.c),
                fmt_float(r.epsilon),
                r.preset,
                r.estimator,
                fmt_float(r.r_better),
                fmt_float(r.r_worse),
                fmt_float(r.e_tcm),
                fmt_float(r.e_full),
                fmt_float(r.e_est),
                r.regime
            )
        })
        .collect();
    (header.to_string(), lines)
}

pub fn skew_table(rows: &[SkewRow]) -> (String, Vec<String>) {
    let header =
        "kind,n,c,epsilon,preset_tcm,preset_lm,shift_t,estimator,e_tcm,e_full,e_est,r_better,r_worse";
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.kind,
                r.n,
                fmt_float(r.c),
                fmt_float(r.epsilon),
                r.preset_tcm,
                r.preset_lm,
                fmt_float(r.shift_t),
                r.estimator,
                fmt_float(r.e_tcm),
                fmt_float(r.e_full),
                fmt_float(r.e_est),
                fmt_float(r.r_better),
                fmt_float(r.r_worse)
            )
        })
        .collect();
    (header.to_string(), lines)
}

pub fn simulate_table(rows: &[SimulateRow]) -> (String, Vec<String>) {
    let header = "n,c,epsilon,preset,estimator,trials,mc_mse,standard_error,reference,z_score";
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                fmt_float(r.c),
                fmt_float(r.epsilon),
                r.preset,
                r.estimator,
                r.trials,
                fmt_float(r.mc_mse),
                fmt_float(r.standard_error),
                fmt_float(r.reference),
                fmt_float(r.z_score)
            )
        })
        .collect();
    (header.to_string(), lines)
}

pub fn amplification_table(cells: &[AmplificationCell]) -> (String, Vec<String>) {
    let header = "n,c,adversarial_fraction,adversarial_count,w,eps_tcm_group,eps_lm_group,\
                  eps_theorem,eps_headline";
    let lines = cells
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                fmt_float(r.c),
                fmt_float(r.adversarial_fraction),
                r.adversarial_count,
                fmt_float(r.w),
                fmt_float(r.eps_tcm_group),
                fmt_float(r.eps_lm_group),
                fmt_float(r.eps_theorem),
                fmt_float(r.eps_headline)
            )
        })
        .collect();
    (header.to_string(), lines)
}

pub fn kmeans_table(cells: &[KMeansCell]) -> (String, Vec<String>) {
    let header = "tau,algorithm,trials,mean_wcss,se_wcss";
    let lines = cells
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.tau,
                r.algorithm,
                r.trials,
                fmt_float(r.mean_wcss),
                fmt_float(r.se_wcss)
            )
        })
        .collect();
    (header.to_string(), lines)
}
