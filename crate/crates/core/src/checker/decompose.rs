//! The induction driver: tiles the busy window ending at the target into
//! maximal intervals, each discharged by either the suffix-carving argument
//! (only known jobs run) or a fast-forward argument (unknown jobs are in
//! play), with fast-forward endpoints classified by what ends them.

use super::sets::{
    freeze_event_times, known_transition_time, unknown_at, unknown_nonfrozen,
    unknown_nonfrozen_at_minus,
};
use super::{AnalysisContext, CheckReport, CheckerError, Witness};
use crate::rat::Rat;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalKind {
    /// Only known jobs run; every unknown job is frozen throughout.
    SuffixCarving,
    /// Ends with a freeze: the unknown non-frozen jobs stop for good.
    FastForward2a,
    /// Ends with every unknown non-frozen job becoming known.
    FastForward2b,
    /// Runs into the target with the leader still being processed.
    FastForwardTailAtT,
}

impl IntervalKind {
    pub fn is_fast_forward(self) -> bool {
        !matches!(self, IntervalKind::SuffixCarving)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalCase {
    pub t0: Rat,
    pub t1: Rat,
    pub kind: IntervalKind,
}

/// Start of the maximal busy interval of the schedule containing the target.
pub(crate) fn window_start(ctx: &AnalysisContext) -> Result<Rat, CheckerError> {
    ctx.alg
        .busy_windows()
        .into_iter()
        .find(|(a, b)| a <= &ctx.target && &ctx.target <= b)
        .map(|(a, _)| a)
        .ok_or_else(|| CheckerError::IdleWithinWindow(ctx.target.clone()))
}

/// Tiles the busy window ending at the target. Fails with `IdleWithinWindow`
/// when the target sits in an idle stretch (there is nothing to carry the
/// induction through).
pub fn decompose(ctx: &AnalysisContext) -> Result<Vec<IntervalCase>, CheckerError> {
    let w0 = window_start(ctx)?;
    if ctx.target == w0 {
        return Ok(Vec::new());
    }

    let freezes = freeze_event_times(ctx);
    // Candidate boundaries: every instant the unknown/frozen structure can
    // change inside the window — releases, reveals, freezes.
    let mut events: BTreeSet<Rat> = BTreeSet::new();
    for job in ctx.alg.instance().jobs() {
        if w0 < job.release && job.release < ctx.target {
            events.insert(job.release.clone());
        }
        if let Some(t) = known_transition_time(ctx, job.id) {
            if w0 < t && t < ctx.target {
                events.insert(t);
            }
        }
    }
    events.extend(freezes.iter().filter(|t| **t > w0).cloned());

    let mut intervals = Vec::new();
    let mut t0 = w0;
    loop {
        let next_events = || events.range(..).filter(|s| **s > t0);
        let (t1, kind) = if unknown_nonfrozen(ctx, &t0).is_empty() {
            // Only known jobs can run until an unknown non-frozen job shows
            // up (an arrival, for ε < 1).
            match next_events().find(|s| !unknown_nonfrozen(ctx, s).is_empty()) {
                Some(s) => (s.clone(), IntervalKind::SuffixCarving),
                None => (ctx.target.clone(), IntervalKind::SuffixCarving),
            }
        } else {
            let mut found = None;
            for s in next_events() {
                if freezes.contains(s) {
                    found = Some((s.clone(), IntervalKind::FastForward2a));
                    break;
                }
                // A full reveal: every unknown non-frozen job just before s
                // is revealed at s. A simultaneous arrival replenishes the
                // post-state unknowns, so this must look at the s⁻ group.
                let group = unknown_nonfrozen_at_minus(ctx, s);
                if !group.is_empty()
                    && group
                        .iter()
                        .all(|&id| ctx.elapsed_alg(id, s) == ctx.threshold(id))
                {
                    found = Some((s.clone(), IntervalKind::FastForward2b));
                    break;
                }
            }
            match found {
                Some(hit) => hit,
                None => (ctx.target.clone(), classify_at_target(ctx)),
            }
        };
        intervals.push(IntervalCase {
            t0: t0.clone(),
            t1: t1.clone(),
            kind,
        });
        if t1 == ctx.target {
            break;
        }
        t0 = t1;
    }
    Ok(intervals)
}

/// A fast-forward run reaching the target ends in one of three ways: some of
/// the group stops while still unknown (a freeze at the target — arrivals at
/// the target also preempt this way), the whole group is revealed exactly at
/// the target, or the leader is processed straight through it.
fn classify_at_target(ctx: &AnalysisContext) -> IntervalKind {
    let group = unknown_nonfrozen_at_minus(ctx, &ctx.target);
    let mut any_continuing = false;
    let mut any_stopped = false;
    for &id in &group {
        if unknown_at(ctx, id, &ctx.target) {
            if ctx
                .alg
                .rate_at(id, &ctx.target)
                .expect("job exists")
                .is_positive()
            {
                any_continuing = true;
            } else {
                any_stopped = true;
            }
        }
    }
    if any_stopped {
        IntervalKind::FastForward2a
    } else if !any_continuing {
        IntervalKind::FastForward2b
    } else {
        IntervalKind::FastForwardTailAtT
    }
}

/// Structural soundness of a decomposition: contiguous tiling of the busy
/// window and the driver's case transitions (a suffix-carving interval is
/// followed by a fast-forward one, a 2b reveal hands over to suffix carving,
/// a 2a freeze stays in fast-forward, and target-classified kinds are last).
pub(crate) fn check_tiling(ctx: &AnalysisContext, intervals: &[IntervalCase]) -> CheckReport {
    let name = "decomposition-tiling";
    let fail = |msg: String, at: &Rat| CheckReport::failed(name, Witness::at(at), msg);
    let w0 = match window_start(ctx) {
        Ok(w0) => w0,
        Err(e) => return fail(e.to_string(), &ctx.target),
    };
    if intervals.is_empty() {
        return if ctx.target == w0 {
            CheckReport::passed(name, "degenerate window")
        } else {
            fail("empty tiling of a nonempty window".into(), &ctx.target)
        };
    }
    if intervals[0].t0 != w0 {
        return fail(format!("tiling starts at {} not {w0}", intervals[0].t0), &w0);
    }
    if intervals.last().unwrap().t1 != ctx.target {
        return fail("tiling stops short of the target".into(), &ctx.target);
    }
    for pair in intervals.windows(2) {
        if pair[0].t1 != pair[1].t0 {
            return fail(format!("gap after {}", pair[0].t1), &pair[0].t1);
        }
        // The next interval's case is determined by the boundary state: the
        // suffix argument applies exactly while no unknown non-frozen job
        // exists. (An arrival at a reveal boundary re-enters fast-forward; a
        // freeze caused by an estimate overtake hands over to suffix
        // carving with no arrival at all.)
        let want_suffix = unknown_nonfrozen(ctx, &pair[1].t0).is_empty();
        let is_suffix = pair[1].kind == IntervalKind::SuffixCarving;
        if want_suffix != is_suffix {
            return fail(
                format!(
                    "illegal transition {:?} → {:?} at {}",
                    pair[0].kind, pair[1].kind, pair[1].t0
                ),
                &pair[0].t1,
            );
        }
        if pair[0].kind == IntervalKind::SuffixCarving && is_suffix {
            return fail("consecutive suffix-carving intervals".into(), &pair[0].t1);
        }
    }
    for case in &intervals[..intervals.len() - 1] {
        if case.kind == IntervalKind::FastForwardTailAtT {
            return fail("tail interval not last".into(), &case.t0);
        }
        if case.t0 >= case.t1 {
            return fail("empty interval".into(), &case.t0);
        }
    }
    CheckReport::passed(name, format!("{} intervals tile the window", intervals.len()))
}
