//! Experiment harness: data presets, CSV ingestion, the Monte Carlo
//! validation loop, closed-form sweeps, and CSV output.

pub mod csv;
pub mod ingest;
pub mod monte_carlo;
pub mod presets;
pub mod sweeps;

pub use ingest::{ingest_csv, IngestSummary};
pub use monte_carlo::{
    closed_form_mse, kmeans_wcss_experiment, monte_carlo_mse, monte_carlo_mse_set, simulate_cells,
    EstimatorKind, ExperimentSpec, KMeansCell, McEstimate, McPopulation, SamplerSpec, SimulateRow,
};
pub use presets::{
    gauss4, preset, sample_clustered, sample_from, BetaParams, ClusteredDataPreset,
    DistributionPreset, PRESET_NAMES,
};
pub use sweeps::{
    log_grid, log_grid_n, sweep_improvement, sweep_skew, ImprovementRow, SkewKinds, SkewRow,
};
