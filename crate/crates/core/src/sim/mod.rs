//! Simulation harness: synthetic echo scenarios with double-talk and an
//! echo-path change, per-frame ERLE/misalignment metrics, and CSV output.

mod metrics;
mod output;
mod run;
mod scenario;
mod wav;

pub use metrics::{erle_db, erle_series, misalignment_db, ERLE_CEILING_DB, ERLE_FLOOR_DB, MISALIGNMENT_FLOOR_DB};
pub use output::{format_sig6, write_metrics_csv, write_summary_csv, METRICS_HEADER, SUMMARY_HEADER};
pub use run::{
    nfr_sweep, run_scenario, run_with_config, MetricsRow, ScenarioRun, Summary, ERLE_WINDOW_FRAMES, SETTLE_S,
};
pub use scenario::{
    blend_responses, gen_impulse_response, synthesize, ScenarioConfig, Source, Streams, FAR_LEVEL, PATH_CHANGE_FRACTION,
};
pub use wav::read_wav_mono16;
