//! Experiment harness for robust submodular minimization: synthetic
//! benchmarks, the cooperative keypoint-matching pipeline, and CSV output.

pub mod config;
pub mod error;
pub mod keypoints;
pub mod kmeans;
pub mod matching;
pub mod report;
pub mod synthetic;

pub use config::{ConfigFile, ConstraintSpec, MatchExperimentConfig, Method, ObjectiveKind, Seeds, SyntheticConfig};
pub use error::{HarnessError, Result};
pub use keypoints::{ingest_keypoints, write_keypoints, KeypointSet};
pub use kmeans::kmeans;
pub use matching::{build_cooperative_objectives, run_matching_experiment, MatchMethod, MatchingReport};
pub use synthetic::{generate_instance, run_synthetic, SyntheticReport};
