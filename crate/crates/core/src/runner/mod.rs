//! Suite orchestration, counts files, failure-map rendering and run
//! manifests.

pub mod config;
pub mod counts;
pub mod render;
pub mod suite;

pub use config::{default_tau_grid, log_grid, SuiteConfig};
pub use counts::{format_record, ingest_replay, parse_counts, write_counts};
pub use render::{emit_failure_map, MapFormat};
pub use suite::{
    analyze, build_for, flagged_collisions, ghz_study, load_device, partition_for, pattern_taus,
    run_suite, run_to_dir, AnalysisReport, GhzStudyConfig, OwnedPartition, RunManifest,
};
