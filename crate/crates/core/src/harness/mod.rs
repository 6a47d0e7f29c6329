//! Stream replay engine, per-round metrics and report emission.

pub mod baseline;
pub mod config;
pub mod replay;
pub mod report;

pub use baseline::{offline_greedy, opt_for_round, OptEstimate};
pub use config::{
    AlgorithmKind, Checkpoint, ConfigMap, HalfModeSpec, MatroidSpec, ObjectiveSpec, OptMode, OptValue, RunConfig,
    StreamSpec,
};
pub use replay::{build_matroid, build_objective, build_stream, run_stream, run_with, sidecar_text, Objective, RunOutput};
pub use report::{emit_report, parse_csv, parse_json, sidecar_path, to_csv, to_json, ReportFormat, RoundRecord, CSV_HEADER};
