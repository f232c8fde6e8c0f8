//! Experiment orchestration: dataset ingestion, split protocol, metrics,
//! replication loops, and report emission.

mod benchmark;
mod data;
mod metrics;
mod report;
mod simulate;
mod split;

pub use benchmark::{run_benchmark, BenchmarkConfig, BenchmarkResult};
pub use data::{ingest_csv, Dataset};
pub use metrics::{compute_metrics, efficiency, regret_ratio, replication_se};
pub use report::{EvalReport, ReportRow};
pub use simulate::{
    run_simulation_study, ClassSpec, ClassifierKind, ProblemOutcome, ProblemSpec,
    SimulationConfig, SimulationResult,
};
pub use split::{stratified_split, stratified_splits, SplitSpec, TrainSize};
