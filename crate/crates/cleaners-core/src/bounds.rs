//! Analytic lower bounds on contaminated-area decay, the closed-form
//! cleaning-time bound, minimal-target search, the combined frontier, and
//! the impossibility threshold.

use crate::region::sphere_potential_size;
use crate::{Error, Result};

/// Parameter bundle for the bound computations.
///
/// `s_hat` is the target area the bound trajectory runs down to. It must
/// satisfy the admissibility condition `s_hat < admissible_max(..)`; the
/// lower end is unconstrained here (a trajectory can run to exhaustion),
/// while the time-bound operations additionally require `s_hat > k`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct BoundParams {
    pub s0: u64,
    pub k: u64,
    pub p: f64,
    pub delta: f64,
    pub s_hat: u64,
}

fn validate_common(s0: u64, k: u64, p: f64, delta: f64) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParam {
            name: "k",
            value: format!("{k}"),
            reason: "at least one agent is required",
        });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam {
            name: "p",
            value: format!("{p}"),
            reason: "spread probability must lie in (0, 1]",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam {
            name: "delta",
            value: format!("{delta}"),
            reason: "slack must lie strictly inside (0, 1)",
        });
    }
    if s0 <= k {
        return Err(Error::BoundDomain { s: s0, k });
    }
    Ok(())
}

/// Largest admissible target area plus one: `s0 - k + floor(2(1-delta)p
/// sqrt(2(s0-k)-1))`. Valid targets are strictly below this.
pub fn admissible_max(s0: u64, k: u64, p: f64, delta: f64) -> Result<u64> {
    validate_common(s0, k, p, delta)?;
    Ok(s0 - k + growth_term(s0, k, p, delta))
}

impl BoundParams {
    pub fn new(s0: u64, k: u64, p: f64, delta: f64, s_hat: u64) -> Result<Self> {
        let adm = admissible_max(s0, k, p, delta)?;
        if s_hat >= adm {
            return Err(Error::InvalidParam {
                name: "s_hat",
                value: format!("{s_hat}"),
                reason: "target area violates the admissibility condition",
            });
        }
        Ok(BoundParams {
            s0,
            k,
            p,
            delta,
            s_hat,
        })
    }
}

/// One point of a bound trajectory: the guaranteed lower bound on the area
/// at step t, the per-step probability backing the transition into t, and
/// the running product of those probabilities.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct BoundPoint {
    pub t: u64,
    pub s_lower: u64,
    pub q_step: f64,
    pub q_cum: f64,
}

#[derive(Clone, PartialEq, Debug)]
pub struct BoundCurve {
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    /// First step at which the trajectory is at or below `s_hat`.
    pub fn first_passage(&self, s_hat: u64) -> Option<u64> {
        self.points
            .iter()
            .find(|pt| pt.s_lower <= s_hat)
            .map(|pt| pt.t)
    }

    pub fn last(&self) -> &BoundPoint {
        self.points
            .last()
            .expect("curves always hold the t=0 point")
    }

    /// The trajectory as plain (t, s_lower) pairs.
    pub fn series(&self) -> Vec<(u64, u64)> {
        self.points.iter().map(|pt| (pt.t, pt.s_lower)).collect()
    }
}

/// Probability that one step removes no more than the guaranteed fraction of
/// the frontier: `1 - exp(-delta^2 p sqrt(2(s-k)-1))`, clamped to [0, 1].
/// The exponent is delta^2 mu / 2 with mu = 2 p sqrt(2(s-k)-1).
pub fn step_probability(s: u64, k: u64, p: f64, delta: f64) -> Result<f64> {
    if s <= k {
        return Err(Error::BoundDomain { s, k });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParam {
            name: "p",
            value: format!("{p}"),
            reason: "spread probability must lie in [0, 1]",
        });
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParam {
            name: "delta",
            value: format!("{delta}"),
            reason: "slack must lie in [0, 1]",
        });
    }
    let m = (2 * (s - k) - 1) as f64;
    let q = 1.0 - (-delta * delta * p * m.sqrt()).exp();
    Ok(q.clamp(0.0, 1.0))
}

/// Guaranteed growth addend per step: `floor(2(1-delta)p sqrt(2(s-k)-1))`.
fn growth_term(s: u64, k: u64, p: f64, delta: f64) -> u64 {
    debug_assert!(s > k);
    let m = (2 * (s - k) - 1) as f64;
    (2.0 * (1.0 - delta) * p * m.sqrt()).floor() as u64
}

/// Iterates the per-step area recursion `s <- s - k + floor(2(1-delta)p
/// sqrt(2(s-k)-1))` from s0, recording the per-step and cumulative
/// probabilities. Stops at `max_steps`, on reaching `params.s_hat` (the
/// crossing point is recorded), or when the remaining area is cleanable
/// within one step.
pub fn recursive_bound_trajectory(params: &BoundParams, max_steps: u64) -> BoundCurve {
    let mut points = vec![BoundPoint {
        t: 0,
        s_lower: params.s0,
        q_step: 1.0,
        q_cum: 1.0,
    }];
    let mut s = params.s0;
    let mut q_cum = 1.0f64;
    for t in 1..=max_steps {
        if s <= params.s_hat || s <= params.k {
            break;
        }
        let q = step_probability(s, params.k, params.p, params.delta)
            .expect("trajectory sizes stay above k");
        let next = s - params.k + growth_term(s, params.k, params.p, params.delta);
        q_cum *= q;
        points.push(BoundPoint {
            t,
            s_lower: next,
            q_step: q,
            q_cum,
        });
        s = next;
    }
    BoundCurve { points }
}

/// Comparison baseline: k tiles removed per step, and every d-th step the
/// area additionally grows by the minimal frontier size of a region of s
/// tiles after k removals. Produces the zig-zag curve (t, s).
pub fn deterministic_trajectory(
    s0: u64,
    k: u64,
    d: u64,
    max_steps: u64,
) -> Result<Vec<(u64, u64)>> {
    if d < 1 {
        return Err(Error::InvalidParam {
            name: "d",
            value: format!("{d}"),
            reason: "spread period must be at least 1",
        });
    }
    let mut out = vec![(0, s0)];
    let mut s = s0;
    for t in 0..max_steps {
        if s < k + 1 {
            break;
        }
        let mut next = s - k;
        if t % d == 0 {
            next += sphere_potential_size(s, k).expect("s > k checked above");
        }
        out.push((t + 1, next));
        s = next;
    }
    Ok(out)
}

/// Spread-free baseline: s_t = s0 - t*k, emitted until it reaches zero.
pub fn naive_trajectory(s0: u64, k: u64, max_steps: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for t in 0..=max_steps {
        let v = s0.saturating_sub(t.saturating_mul(k));
        out.push((t, v));
        if v == 0 {
            break;
        }
    }
    out
}

/// Floor on the probability that a trajectory stays at or above `s_hat` for
/// `t_steps` steps: the step probability at `s_hat`, raised to `t_steps`.
pub fn lemma_floor_probability(
    s_hat: u64,
    k: u64,
    p: f64,
    delta: f64,
    t_steps: u64,
) -> Result<f64> {
    if t_steps < 1 {
        return Err(Error::InvalidParam {
            name: "t_steps",
            value: format!("{t_steps}"),
            reason: "the floor is defined for at least one step",
        });
    }
    let q_hat = step_probability(s_hat, k, p, delta)?;
    Ok(q_hat.powf(t_steps as f64).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ClosedFormBound {
    pub tau_hat: f64,
    pub t_ceil: u64,
    pub q_bound: f64,
}

/// Closed-form bound on the number of steps until the area trajectory can
/// have dropped from s0 to `s_hat`, with the probability floor holding over
/// that horizon. Requires the shrinking regime: both endpoints must sit
/// strictly below the slack-adjusted stall area, otherwise the growth or
/// mixed regime error reports which side failed.
pub fn closed_form_time(params: &BoundParams) -> Result<ClosedFormBound> {
    let BoundParams {
        s0,
        k,
        p,
        delta,
        s_hat,
    } = *params;
    if s_hat <= k {
        return Err(Error::BoundDomain { s: s_hat, k });
    }
    if s_hat > s0 {
        return Err(Error::InvalidParam {
            name: "s_hat",
            value: format!("{s_hat}"),
            reason: "target area exceeds the initial area",
        });
    }
    if s_hat == s0 {
        return Ok(ClosedFormBound {
            tau_hat: 0.0,
            t_ceil: 0,
            q_bound: 1.0,
        });
    }
    let w = 2.0 * (1.0 - delta) * (1.0 - delta) * p * p;
    let a = (w * (s_hat as f64 - k as f64 - 0.5)).sqrt();
    let b = (w * (s0 as f64 - k as f64 - 0.5)).sqrt();
    let h = k as f64 / 2.0;
    if a >= h {
        return Err(Error::GrowthRegime { s0, s_hat });
    }
    if b >= h {
        return Err(Error::MixedRegime { s0, s_hat });
    }
    let tau_hat = (a - b + h * ((a - h) / (b - h)).ln()) / w;
    let t_ceil = tau_hat.ceil().max(1.0) as u64;
    let q_bound = lemma_floor_probability(s_hat, k, p, delta, t_ceil)?;
    Ok(ClosedFormBound {
        tau_hat,
        t_ceil,
        q_bound,
    })
}

/// Floor with a relative epsilon snap: values within 1e-9 (relative) of an
/// integer count as that integer before flooring, so thresholds that are
/// exact in real arithmetic survive float noise.
fn floor_with_snap(y: f64) -> u64 {
    let r = y.round();
    if (y - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as u64
    } else {
        y.floor() as u64
    }
}

/// Initial area above which k agents cannot beat the guaranteed growth:
/// `floor(k^2/(8 p^2) + k + 1/2)`.
pub fn impossibility_threshold(k: u64, p: f64) -> Result<u64> {
    delta_threshold(k, p, 0.0)
}

/// Slack-adjusted variant of the impossibility threshold:
/// `floor(k^2/(8 (1-delta)^2 p^2) + k + 1/2)`.
pub fn delta_threshold(k: u64, p: f64, delta: f64) -> Result<u64> {
    if k < 1 {
        return Err(Error::InvalidParam {
            name: "k",
            value: format!("{k}"),
            reason: "at least one agent is required",
        });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam {
            name: "p",
            value: format!("{p}"),
            reason: "spread probability must lie in (0, 1]",
        });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParam {
            name: "delta",
            value: format!("{delta}"),
            reason: "slack must lie in [0, 1)",
        });
    }
    let kf = k as f64;
    let y = kf * kf / (8.0 * (1.0 - delta) * (1.0 - delta) * p * p) + kf + 0.5;
    Ok(floor_with_snap(y))
}

/// Probability floor that a region starting above the slack-adjusted
/// threshold is still at least its initial size after t steps.
pub fn impossibility_probability(s0: u64, k: u64, p: f64, delta: f64, t: u64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam {
            name: "delta",
            value: format!("{delta}"),
            reason: "slack must lie strictly inside (0, 1)",
        });
    }
    let threshold = delta_threshold(k, p, delta)?;
    if s0 <= threshold {
        return Err(Error::BelowThreshold { s0, threshold });
    }
    if t == 0 {
        return Ok(1.0);
    }
    let q_hat = step_probability(s0, k, p, delta)?;
    Ok(q_hat.powf(t as f64).clamp(0.0, 1.0))
}

/// Smallest admissible target area whose closed-form probability floor
/// reaches `q_target`, or None when no admissible target does (including
/// when s0 itself already sits in the growth regime).
pub fn minimal_s_hat(s0: u64, k: u64, p: f64, q_target: f64, delta: f64) -> Result<Option<u64>> {
    validate_common(s0, k, p, delta)?;
    if !(q_target > 0.0 && q_target < 1.0) {
        return Err(Error::InvalidParam {
            name: "q_target",
            value: format!("{q_target}"),
            reason: "probability target must lie strictly inside (0, 1)",
        });
    }
    let w = 2.0 * (1.0 - delta) * (1.0 - delta) * p * p;
    let h = k as f64 / 2.0;
    let stall = |s: u64| (w * (s as f64 - k as f64 - 0.5)).sqrt();
    if stall(s0) >= h {
        return Ok(None);
    }
    // Largest integer target still strictly inside the shrinking regime;
    // the float boundary needs at most a couple of downward corrections.
    let y =
        (k as f64) * (k as f64) / (8.0 * (1.0 - delta) * (1.0 - delta) * p * p) + k as f64 + 0.5;
    let mut t_int = y.min(1e18).floor() as u64;
    for _ in 0..4 {
        if t_int == 0 || stall(t_int) < h {
            break;
        }
        t_int -= 1;
    }
    let adm = admissible_max(s0, k, p, delta)?;
    let lo = k + 2;
    let hi = t_int.min(adm.saturating_sub(1));
    if hi < lo {
        return Ok(None);
    }
    let pred = |s_hat: u64| -> bool {
        BoundParams::new(s0, k, p, delta, s_hat)
            .and_then(|params| closed_form_time(&params))
            .map(|b| b.q_bound >= q_target)
            .unwrap_or(false)
    };
    if !pred(hi) {
        return Ok(None);
    }
    let mut lo_search = lo;
    let mut hi_search = hi;
    while lo_search < hi_search {
        let mid = lo_search + (hi_search - lo_search) / 2;
        if pred(mid) {
            hi_search = mid;
        } else {
            lo_search = mid + 1;
        }
    }
    let best = hi_search;
    if pred(best) && (best == lo || !pred(best - 1)) {
        return Ok(Some(best));
    }
    // The predicate turned out non-monotone at this point; fall back to a
    // direct scan for the true minimum.
    for s_hat in lo..=hi {
        if pred(s_hat) {
            return Ok(Some(s_hat));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct FrontierMember {
    pub delta: f64,
    pub s_hat: u64,
    pub curve: BoundCurve,
}

#[derive(Clone, Debug)]
pub struct Frontier {
    /// Probability level every member curve individually guarantees.
    pub guarantee: f64,
    /// Pointwise maximum of the member trajectories at each step.
    pub points: Vec<(u64, u64)>,
    pub members: Vec<FrontierMember>,
}

/// Default slack grid: 200 uniform points spanning [0.01, 0.99].
pub fn default_delta_grid() -> Vec<f64> {
    (0..200).map(|i| 0.01 + i as f64 * 0.98 / 199.0).collect()
}

/// For each slack value, finds the minimal target area meeting `q_target`
/// and its truncated bound trajectory, then combines the curves into their
/// pointwise maximum. Slack values with no feasible target are skipped;
/// if none is feasible the whole construction fails.
pub fn combined_frontier(
    s0: u64,
    k: u64,
    p: f64,
    q_target: f64,
    delta_grid: &[f64],
    max_steps: u64,
) -> Result<Frontier> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidParam {
            name: "delta_grid",
            value: "[]".to_string(),
            reason: "at least one slack value is required",
        });
    }
    let mut members = Vec::new();
    for &delta in delta_grid {
        let Some(s_hat) = minimal_s_hat(s0, k, p, q_target, delta)? else {
            continue;
        };
        let params = BoundParams::new(s0, k, p, delta, s_hat)?;
        let curve = recursive_bound_trajectory(&params, max_steps);
        members.push(FrontierMember {
            delta,
            s_hat,
            curve,
        });
    }
    if members.is_empty() {
        return Err(Error::AllInfeasible);
    }
    let horizon = members
        .iter()
        .map(|m| m.curve.last().t)
        .max()
        .expect("members nonempty");
    let mut points = Vec::with_capacity(horizon as usize + 1);
    for t in 0..=horizon {
        let s = members
            .iter()
            .filter_map(|m| m.curve.points.get(t as usize))
            .map(|pt| pt.s_lower)
            .max()
            .expect("every step up to the horizon has a defined member");
        points.push((t, s));
    }
    Ok(Frontier {
        guarantee: q_target,
        points,
        members,
    })
}
