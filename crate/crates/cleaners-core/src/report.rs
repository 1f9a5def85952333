//! CSV emission. Every file starts with a `# `-prefixed metadata header:
//! tool version, RNG algorithm, exponent convention, and a full parameter
//! echo. Cells are plain numeric tokens, probabilities with 13 significant
//! digits, so every file re-parses without locale concerns.

use std::fmt::Display;
use std::path::Path;

use crate::bounds::{BoundCurve, Frontier};
use crate::config::emit_run_config;
use crate::sim::{AggregateStats, Outcome, RunConfig, RunRecord};
use crate::{Result, EXPONENT_CONVENTION, RNG_ALGORITHM, VERSION};

#[derive(Clone, Debug, Default)]
pub struct Metadata {
    params: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Metadata::default()
    }

    pub fn param(mut self, key: impl Into<String>, value: impl Display) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    /// Echoes the full canonical config, one parameter per header line.
    pub fn from_run_config(config: &RunConfig) -> Self {
        let mut meta = Metadata::new();
        for line in emit_run_config(config).lines() {
            if let Some((key, value)) = line.split_once(" = ") {
                meta = meta.param(key, value);
            }
        }
        meta
    }

    pub fn header(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# cleaners {VERSION}\n"));
        out.push_str(&format!("# rng: {RNG_ALGORITHM}\n"));
        out.push_str(&format!("# convention: {EXPONENT_CONVENTION}\n"));
        for (key, value) in &self.params {
            out.push_str(&format!("# {key} = {value}\n"));
        }
        out
    }
}

/// Probability cell: 13 significant digits, exponent notation.
pub fn prob_cell(x: f64) -> String {
    format!("{x:.12e}")
}

/// General float cell: shortest round-trip decimal; absent values as nan.
pub fn float_cell(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => "nan".to_string(),
    }
}

pub fn table_csv(meta: &Metadata, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = meta.header();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One row per replication. `t_success` is -1 on cutoff failures;
/// `final_s` is 0 on successes.
pub fn runs_csv(meta: &Metadata, records: &[RunRecord]) -> String {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let (outcome, t_success, final_s) = match r.outcome {
                Outcome::Success { t_success } => ("success", t_success as i64, 0),
                Outcome::CutoffFailure { final_s } => ("cutoff_failure", -1, final_s),
            };
            vec![
                r.stream_id.to_string(),
                outcome.to_string(),
                t_success.to_string(),
                final_s.to_string(),
                r.holes_created.to_string(),
            ]
        })
        .collect();
    table_csv(
        meta,
        &["stream", "outcome", "t_success", "final_s", "holes"],
        &rows,
    )
}

pub fn aggregate_csv(meta: &Metadata, stats: &AggregateStats) -> String {
    let row = vec![
        stats.n_runs.to_string(),
        stats.n_success.to_string(),
        stats.n_aborted.to_string(),
        prob_cell(stats.success_pct),
        prob_cell(stats.success_ci.0),
        prob_cell(stats.success_ci.1),
        float_cell(stats.mean_t_success),
        float_cell(stats.std_t_success),
    ];
    table_csv(
        meta,
        &[
            "n_runs",
            "n_success",
            "n_aborted",
            "success_pct",
            "ci_low",
            "ci_high",
            "mean_t_success",
            "std_t_success",
        ],
        &[row],
    )
}

pub fn trajectory_csv(meta: &Metadata, stats: &AggregateStats) -> Result<String> {
    let mean = stats
        .mean_trajectory
        .as_ref()
        .ok_or(crate::Error::NoTrajectory)?;
    let rows: Vec<Vec<String>> = mean
        .iter()
        .map(|ts| {
            vec![
                ts.t.to_string(),
                float_cell(Some(ts.mean_s)),
                float_cell(Some(ts.p05)),
                float_cell(Some(ts.p95)),
            ]
        })
        .collect();
    Ok(table_csv(meta, &["t", "mean_s", "p05", "p95"], &rows))
}

pub fn curve_csv(meta: &Metadata, curve: &BoundCurve) -> String {
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|pt| {
            vec![
                pt.t.to_string(),
                pt.s_lower.to_string(),
                prob_cell(pt.q_step),
                prob_cell(pt.q_cum),
            ]
        })
        .collect();
    table_csv(meta, &["t", "s_lower", "q_step", "q_cum"], &rows)
}

/// Plain (t, s) series, used for deterministic and naive trajectories and
/// for the combined frontier guarantee.
pub fn series_csv(meta: &Metadata, series: &[(u64, u64)]) -> String {
    let rows: Vec<Vec<String>> = series
        .iter()
        .map(|&(t, s)| vec![t.to_string(), s.to_string()])
        .collect();
    table_csv(meta, &["t", "s"], &rows)
}

/// The frontier's contributing envelope: which (delta, s_hat) member the
/// pointwise maximum came from, one row per member.
pub fn frontier_members_csv(meta: &Metadata, frontier: &Frontier) -> String {
    let rows: Vec<Vec<String>> = frontier
        .members
        .iter()
        .map(|m| {
            vec![
                float_cell(Some(m.delta)),
                m.s_hat.to_string(),
                m.curve.last().t.to_string(),
            ]
        })
        .collect();
    table_csv(meta, &["delta", "s_hat", "t_end"], &rows)
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}
