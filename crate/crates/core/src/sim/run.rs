use rayon::prelude::*;

use super::metrics::{erle_series, misalignment_db};
use super::scenario::{synthesize, ScenarioConfig, Streams};
use crate::canceller::{CancellerConfig, EchoCanceller, PolicyKind};
use crate::error::Result;

/// Adaptation time excluded from steady-state averages, both at the start
/// and after a path change.
pub const SETTLE_S: f64 = 2.0;

/// Sliding ERLE window, in frames.
pub const ERLE_WINDOW_FRAMES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub frame: usize,
    /// Start time of the frame.
    pub time_s: f64,
    pub erle_db: f64,
    pub misalignment_db: f64,
    pub eta: Option<f64>,
    pub mu_mean: f64,
    pub double_talk_active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub policy: PolicyKind,
    pub nfr_db: f64,
    /// Mean ERLE after the initial settling time.
    pub erle_ss_db: f64,
    /// As `erle_ss_db`, also skipping the settling time after the path change.
    pub erle_ss_excl_switch_db: f64,
    pub final_misalignment_db: f64,
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub rows: Vec<MetricsRow>,
    pub summary: Summary,
    pub streams: Streams,
    /// Canceller output `e`.
    pub output: Vec<f64>,
    /// Echo estimate subtracted from the microphone.
    pub estimate: Vec<f64>,
}

/// Runs the scenario through a canceller with default constants and the
/// given policy.
pub fn run_scenario(config: &ScenarioConfig, policy: PolicyKind) -> Result<ScenarioRun> {
    run_with_config(config, &CancellerConfig::with_policy(policy))
}

/// Runs the scenario with explicit canceller constants. Block size and
/// partition count are taken from the scenario.
pub fn run_with_config(config: &ScenarioConfig, canceller: &CancellerConfig) -> Result<ScenarioRun> {
    let streams = synthesize(config)?;
    let mut canceller = EchoCanceller::new(CancellerConfig {
        block_size: config.block_size,
        partitions: config.partitions,
        ..canceller.clone()
    })?;
    let n = config.block_size;
    let frames = config.frames();
    let mut output = Vec::with_capacity(frames * n);
    let mut estimate = Vec::with_capacity(frames * n);
    let mut rows = Vec::with_capacity(frames);

    for frame in 0..frames {
        let span = frame * n..(frame + 1) * n;
        let (out, diag) = canceller.process_frame(&streams.far[span.clone()], &streams.mic[span.clone()])?;
        output.extend_from_slice(&out);
        estimate.extend_from_slice(canceller.echo_estimate());
        let taps = canceller.filter().export_impulse_response();
        rows.push(MetricsRow {
            frame,
            time_s: (frame * n) as f64 / config.sample_rate,
            erle_db: 0.0,
            misalignment_db: misalignment_db(config.response_at(span.end - 1), &taps),
            eta: diag.eta,
            mu_mean: diag.mu_mean,
            double_talk_active: streams.talker_active[span].iter().any(|&a| a),
        });
    }
    let erle = erle_series(&streams.echo, &estimate, n, ERLE_WINDOW_FRAMES)?;
    for (row, db) in rows.iter_mut().zip(erle) {
        row.erle_db = db;
    }
    let summary = summarize(config, canceller.config().policy, &rows);
    Ok(ScenarioRun {
        rows,
        summary,
        streams,
        output,
        estimate,
    })
}

fn summarize(config: &ScenarioConfig, policy: PolicyKind, rows: &[MetricsRow]) -> Summary {
    let settled = |r: &&MetricsRow| r.time_s >= SETTLE_S;
    let outside_switch = |r: &&MetricsRow| match config.path_change_at_s {
        Some(t) => r.time_s < t || r.time_s >= t + SETTLE_S,
        None => true,
    };
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    };
    let etas = rows.iter().filter_map(|r| r.eta);
    Summary {
        policy,
        nfr_db: config.nfr_db,
        erle_ss_db: mean(&mut rows.iter().filter(settled).map(|r| r.erle_db)),
        erle_ss_excl_switch_db: mean(&mut rows.iter().filter(settled).filter(outside_switch).map(|r| r.erle_db)),
        final_misalignment_db: rows.last().map_or(f64::NAN, |r| r.misalignment_db),
        eta_min: etas.clone().reduce(f64::min),
        eta_max: etas.reduce(f64::max),
    }
}

/// Runs every `(nfr, policy)` cell with the base scenario's seed. Rows come
/// back NFR-major, in input order.
pub fn nfr_sweep(base: &ScenarioConfig, nfr_list: &[f64], policies: &[PolicyKind]) -> Result<Vec<Summary>> {
    let cells: Vec<(f64, PolicyKind)> = nfr_list
        .iter()
        .flat_map(|&nfr| policies.iter().map(move |&p| (nfr, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(nfr_db, policy)| {
            let cfg = ScenarioConfig { nfr_db, ..base.clone() };
            run_scenario(&cfg, policy).map(|r| r.summary)
        })
        .collect()
}
