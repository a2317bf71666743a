pub mod amplify;
pub mod analyze;
pub mod kmeans;
pub mod simulate;
pub mod sweep;
