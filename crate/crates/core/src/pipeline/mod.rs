//! Experiment plumbing behind the command line: configuration, synthetic
//! scenes, and the encode / estimate / benchmark / metrics commands.

mod config;
mod run;
mod scene;

pub use config::{ExperimentConfig, PointSpec, Sweep};
pub use run::{
    benchmark, decode_measurements, degrade_reference, depth_label_error, encode, estimate, label_lines, metrics,
    parse_label_lines, rd_csv, rd_hull, run_point, sparse_reference, synthesize, BenchmarkOutput, EncodeReport,
    EstimateOutput, Inputs, Metrics, PointOutput, RdRecord, Solution, Target, RD_COLUMNS,
};
pub use scene::{Scene, SceneKind, SceneObject, SceneSpec, Shape};
