//! Seeded Monte Carlo replications of cleaning runs and their aggregation.

use rayon::prelude::*;

use crate::protocol::{perfect_cleaner_step, protocol_step, AgentTeam};
use crate::shape::{generate_shape, ShapeKind};
use crate::spread::{spread_step, RngStream, SpreadPolicy};
use crate::stats::{mean_std, percentile, wilson_interval};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CleanerKind {
    /// The distributed agent team.
    Sweep,
    /// Idealized cleaner removing up to k safe boundary tiles per step.
    Perfect,
}

impl CleanerKind {
    pub const ALL: [CleanerKind; 2] = [CleanerKind::Sweep, CleanerKind::Perfect];

    pub fn name(self) -> &'static str {
        match self {
            CleanerKind::Sweep => "sweep",
            CleanerKind::Perfect => "perfect",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sweep" => Some(CleanerKind::Sweep),
            "perfect" => Some(CleanerKind::Perfect),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct RunConfig {
    pub shape: ShapeKind,
    pub s0: u64,
    pub k: u32,
    pub policy: SpreadPolicy,
    pub cleaner: CleanerKind,
    pub cutoff: u64,
    pub seed: u64,
    pub replications: u64,
    pub record_trajectory: bool,
    pub record_stride: u64,
    /// Abandon a run as a cutoff failure once success by the cutoff is
    /// arithmetically impossible. Turn off to keep full trajectories.
    pub early_exit: bool,
}

impl RunConfig {
    /// Config with the standard defaults: cutoff 3000, seed 0, 1000
    /// replications, trajectory recording off (stride 10 when enabled).
    pub fn new(
        shape: ShapeKind,
        s0: u64,
        k: u32,
        policy: SpreadPolicy,
        cleaner: CleanerKind,
    ) -> Self {
        RunConfig {
            shape,
            s0,
            k,
            policy,
            cleaner,
            cutoff: 3000,
            seed: 0,
            replications: 1000,
            record_trajectory: false,
            record_stride: 10,
            early_exit: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s0 < 1 {
            return Err(Error::EmptyShape);
        }
        if self.k < 1 {
            return Err(Error::InvalidParam {
                name: "k",
                value: format!("{}", self.k),
                reason: "at least one agent is required",
            });
        }
        if self.cutoff < 1 {
            return Err(Error::InvalidParam {
                name: "cutoff",
                value: format!("{}", self.cutoff),
                reason: "cutoff must be at least 1",
            });
        }
        if self.replications < 1 {
            return Err(Error::InvalidParam {
                name: "replications",
                value: format!("{}", self.replications),
                reason: "at least one replication is required",
            });
        }
        if self.record_stride < 1 {
            return Err(Error::InvalidParam {
                name: "stride",
                value: format!("{}", self.record_stride),
                reason: "recording stride must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    Success { t_success: u64 },
    CutoffFailure { final_s: u64 },
}

impl Outcome {
    pub fn is_success(self) -> bool {
        matches!(self, Outcome::Success { .. })
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct RunRecord {
    pub stream_id: u64,
    pub outcome: Outcome,
    /// (t, S_t) at every stride-th step, when recording is on.
    pub trajectory: Option<Vec<(u64, u64)>>,
    /// Total positive per-step increments of the hole count.
    pub holes_created: u64,
}

/// One seeded replication: build the shape, deploy the cleaner, loop
/// clean-then-spread until the region empties (success at the current step)
/// or the cutoff is reached. Fully deterministic given (config, stream_id).
///
/// A run is abandoned early as a cutoff failure as soon as
/// `S_t > k * (cutoff - t)`: at most k tiles leave per step and spreading
/// only adds, so success by the cutoff is impossible from that state. The
/// outcome classification is unchanged; only the diagnostic final size and
/// the trajectory tail are shortened.
pub fn run_one(config: &RunConfig, stream_id: u64) -> Result<RunRecord> {
    config.validate()?;
    let mut region = generate_shape(config.shape, config.s0)?;
    let mut team = match config.cleaner {
        CleanerKind::Sweep => Some(AgentTeam::deploy(&region, config.k)?),
        CleanerKind::Perfect => None,
    };
    let mut rng = RngStream::new(config.seed, stream_id);
    let mut trajectory: Option<Vec<(u64, u64)>> = config.record_trajectory.then(Vec::new);
    let mut holes_created = 0u64;
    let mut prev_holes = region.holes();
    loop {
        let t = region.step();
        if let Some(tr) = trajectory.as_mut() {
            if t % config.record_stride == 0 {
                tr.push((t, region.size()));
            }
        }
        if region.is_empty() {
            return Ok(RunRecord {
                stream_id,
                outcome: Outcome::Success { t_success: t },
                trajectory,
                holes_created,
            });
        }
        if t >= config.cutoff {
            return Ok(RunRecord {
                stream_id,
                outcome: Outcome::CutoffFailure {
                    final_s: region.size(),
                },
                trajectory,
                holes_created,
            });
        }
        if config.early_exit
            && region.size() as u128 > config.k as u128 * (config.cutoff - t) as u128
        {
            return Ok(RunRecord {
                stream_id,
                outcome: Outcome::CutoffFailure {
                    final_s: region.size(),
                },
                trajectory,
                holes_created,
            });
        }
        match config.cleaner {
            CleanerKind::Sweep => {
                protocol_step(&mut region, team.as_mut().expect("sweep keeps a team"))?;
            }
            CleanerKind::Perfect => {
                perfect_cleaner_step(&mut region, config.k as u64);
            }
        }
        if !region.is_empty() {
            spread_step(&mut region, &config.policy, &mut rng)?;
            let h = region.holes();
            if h > prev_holes {
                holes_created += (h - prev_holes) as u64;
            }
            prev_holes = h;
        } else {
            prev_holes = 0;
        }
        region.advance_step();
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct TrajectoryStat {
    pub t: u64,
    pub mean_s: f64,
    pub p05: f64,
    pub p95: f64,
}

#[derive(Clone, PartialEq, Debug)]
pub struct AggregateStats {
    pub n_runs: u64,
    pub n_success: u64,
    pub n_aborted: u64,
    pub success_pct: f64,
    /// 95% Wilson interval around the success fraction.
    pub success_ci: (f64, f64),
    /// Mean/std of t_success over successful runs only.
    pub mean_t_success: Option<f64>,
    pub std_t_success: Option<f64>,
    /// Per-stride mean of S_t over successful runs, counting 0 after a
    /// run's completion. Present when trajectories were recorded and at
    /// least one run succeeded.
    pub mean_trajectory: Option<Vec<TrajectoryStat>>,
}

/// Folds run records into aggregate statistics. The records are first
/// ordered by stream id, so any permutation of the same multiset gives a
/// bit-identical result.
pub fn aggregate(records: &[RunRecord], n_runs: u64, stride: u64) -> AggregateStats {
    let mut ordered: Vec<&RunRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.stream_id);
    let n_aborted = n_runs - ordered.len() as u64;
    let successes: Vec<&RunRecord> = ordered
        .iter()
        .copied()
        .filter(|r| r.outcome.is_success())
        .collect();
    let n_success = successes.len() as u64;
    let success_pct = if n_runs == 0 {
        0.0
    } else {
        n_success as f64 / n_runs as f64
    };
    let times: Vec<f64> = successes
        .iter()
        .map(|r| match r.outcome {
            Outcome::Success { t_success } => t_success as f64,
            Outcome::CutoffFailure { .. } => unreachable!(),
        })
        .collect();
    let time_stats = mean_std(&times);
    let mean_trajectory = trajectory_stats(&successes, stride);
    AggregateStats {
        n_runs,
        n_success,
        n_aborted,
        success_pct,
        success_ci: wilson_interval(n_success, n_runs),
        mean_t_success: time_stats.map(|(m, _)| m),
        std_t_success: time_stats.map(|(_, s)| s),
        mean_trajectory,
    }
}

fn trajectory_stats(successes: &[&RunRecord], stride: u64) -> Option<Vec<TrajectoryStat>> {
    let trajectories: Vec<&Vec<(u64, u64)>> = successes
        .iter()
        .filter_map(|r| r.trajectory.as_ref())
        .collect();
    if trajectories.is_empty() || trajectories.len() != successes.len() {
        return None;
    }
    let horizon = trajectories.iter().map(|tr| tr.len()).max()?;
    let mut out = Vec::with_capacity(horizon);
    for i in 0..horizon {
        let values: Vec<f64> = trajectories
            .iter()
            .map(|tr| tr.get(i).map_or(0.0, |&(_, s)| s as f64))
            .collect();
        let (mean_s, _) = mean_std(&values)?;
        out.push(TrajectoryStat {
            t: i as u64 * stride,
            mean_s,
            p05: percentile(&values, 0.05)?,
            p95: percentile(&values, 0.95)?,
        });
    }
    Some(out)
}

#[derive(Clone, Debug)]
pub struct BatchOutput {
    pub records: Vec<RunRecord>,
    /// (stream_id, error) for runs that aborted on an invariant breach.
    pub aborted: Vec<(u64, String)>,
    pub stats: AggregateStats,
}

/// Runs `config.replications` replications on stream ids 0.., in parallel,
/// and aggregates. Output is a pure function of the config.
pub fn run_batch(config: &RunConfig) -> Result<BatchOutput> {
    config.validate()?;
    let results: Vec<(u64, Result<RunRecord>)> = (0..config.replications)
        .into_par_iter()
        .map(|stream_id| (stream_id, run_one(config, stream_id)))
        .collect();
    let mut records = Vec::with_capacity(results.len());
    let mut aborted = Vec::new();
    for (stream_id, result) in results {
        match result {
            Ok(record) => records.push(record),
            Err(e) => aborted.push((stream_id, e.to_string())),
        }
    }
    let stats = aggregate(&records, config.replications, config.record_stride);
    Ok(BatchOutput {
        records,
        aborted,
        stats,
    })
}

#[derive(Clone, Debug)]
pub struct OverlayTable {
    /// Column labels for the analytic curves, in row order.
    pub labels: Vec<String>,
    /// One row per recorded step: (t, empirical mean, per-curve values).
    pub rows: Vec<(u64, f64, Vec<Option<u64>>)>,
}

/// Joins the batch's mean trajectory with analytic curves on the step
/// column. Curves are (label, series) pairs where each series holds
/// consecutive (t, s) points from t = 0.
pub fn overlay_bounds(
    stats: &AggregateStats,
    curves: &[(String, Vec<(u64, u64)>)],
) -> Result<OverlayTable> {
    let mean = stats.mean_trajectory.as_ref().ok_or(Error::NoTrajectory)?;
    let labels = curves.iter().map(|(l, _)| l.clone()).collect();
    let rows = mean
        .iter()
        .map(|ts| {
            let values = curves
                .iter()
                .map(|(_, series)| {
                    series
                        .get(ts.t as usize)
                        .filter(|&&(t, _)| t == ts.t)
                        .map(|&(_, s)| s)
                })
                .collect();
            (ts.t, ts.mean_s, values)
        })
        .collect();
    Ok(OverlayTable { labels, rows })
}
