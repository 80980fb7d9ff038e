//! Deterministic experiment runner: the frame loop, error accounting,
//! parameter sweeps and their CSV / SVG output.

pub mod pipeline;
pub mod plot;
pub mod report;
pub mod stats;
pub mod sweep;

pub use pipeline::{run_pipeline, FrameRecord, FvRecord, HvStatus, PipelineOutput};
pub use plot::{sweep_chart, Chart, Series};
pub use stats::{accuracy_percent, ErrorSample, ErrorStats};
pub use sweep::{sweep, trial_scenario, trial_seed, BerRow, SweepRow, SweepTable};
