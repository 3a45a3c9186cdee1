pub mod cli;
pub mod config;
pub mod io;
pub mod pipeline;

pub use config::{ExperimentConfig, PotentialConfig};
pub use pipeline::{run_pipeline, RunReport};
