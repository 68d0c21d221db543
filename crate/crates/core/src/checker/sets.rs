//! Time-indexed job sets: known/unknown status, frozen jobs, leaders, and
//! volume-sorted queue prefixes.
//!
//! Two conventions run through everything here:
//!
//! * activity is right-open — a job is active on [release, completion);
//! * "touched during [t′, target]" means positive processing *measure*, i.e.
//!   elapsed(target) − elapsed(t′) > 0. Processing that merely starts at the
//!   target instant contributes nothing. One-sided limits at an instant are
//!   computed symbolically from the adjacent segment, never by perturbation.

use super::AnalysisContext;
use crate::model::{JobId, Trace};
use crate::rat::Rat;
use std::collections::BTreeSet;

/// Released with its size still hidden: elapsed below (1−ε)·size.
pub(crate) fn unknown_at(ctx: &AnalysisContext, id: JobId, t: &Rat) -> bool {
    ctx.release(id) <= t && ctx.elapsed_alg(id, t) < ctx.threshold(id)
}

/// Unknown in the left-limit state at `t`: released strictly before `t` and
/// either still below the reveal threshold at `t`, or exactly at it while
/// being processed into it (the reveal is a change applied at `t`).
pub(crate) fn unknown_at_minus(ctx: &AnalysisContext, id: JobId, t: &Rat) -> bool {
    if ctx.release(id) >= t {
        return false;
    }
    let elapsed = ctx.elapsed_alg(id, t);
    let threshold = ctx.threshold(id);
    elapsed < threshold
        || (elapsed == threshold
            && ctx.alg.rate_at_minus(id, t).expect("job exists").is_positive())
}

pub(crate) fn frozen_at(ctx: &AnalysisContext, id: JobId, tprime: &Rat) -> bool {
    unknown_at(ctx, id, tprime)
        && ctx.elapsed_alg(id, &ctx.target) == ctx.elapsed_alg(id, tprime)
}

pub(crate) fn frozen_set(ctx: &AnalysisContext, tprime: &Rat) -> BTreeSet<JobId> {
    ctx.alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| frozen_at(ctx, j.id, tprime))
        .map(|j| j.id)
        .collect()
}

/// Unknown non-frozen jobs at `s`: unknown and still to be processed before
/// the target.
pub(crate) fn unknown_nonfrozen(ctx: &AnalysisContext, s: &Rat) -> BTreeSet<JobId> {
    ctx.alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| {
            unknown_at(ctx, j.id, s)
                && ctx.elapsed_alg(j.id, &ctx.target) > ctx.elapsed_alg(j.id, s)
        })
        .map(|j| j.id)
        .collect()
}

/// Unknown non-frozen jobs in the left-limit state at `t`: unknown just
/// before `t` and touched either just before `t` or somewhere in [t, target].
/// At `t = target` this is exactly the group being processed into the target.
pub(crate) fn unknown_nonfrozen_at_minus(ctx: &AnalysisContext, t: &Rat) -> BTreeSet<JobId> {
    ctx.alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| {
            unknown_at_minus(ctx, j.id, t)
                && (ctx.elapsed_alg(j.id, &ctx.target) > ctx.elapsed_alg(j.id, t)
                    || ctx
                        .alg
                        .rate_at_minus(j.id, t)
                        .expect("job exists")
                        .is_positive())
        })
        .map(|j| j.id)
        .collect()
}

fn argmax_elapsed(ctx: &AnalysisContext, ids: &BTreeSet<JobId>, at: &Rat) -> Option<JobId> {
    let mut best: Option<(Rat, JobId)> = None;
    for &id in ids {
        let elapsed = ctx.elapsed_alg(id, at);
        match &best {
            Some((e, _)) if &elapsed <= e => {}
            _ => best = Some((elapsed, id)),
        }
    }
    best.map(|(_, id)| id)
}

/// Maximum-elapsed unknown non-frozen job at `s`, lowest id on ties.
pub(crate) fn leader(ctx: &AnalysisContext, s: &Rat) -> Option<JobId> {
    let uf = unknown_nonfrozen(ctx, s);
    argmax_elapsed(ctx, &uf, s)
}

pub(crate) fn leader_at_minus(ctx: &AnalysisContext, t: &Rat) -> Option<JobId> {
    let uf = unknown_nonfrozen_at_minus(ctx, t);
    argmax_elapsed(ctx, &uf, t)
}

/// The min(x, |active|) active jobs with the largest remaining volume in the
/// given schedule at `tprime`, ties broken toward lower ids.
pub fn b_set(trace: &Trace, tprime: &Rat, x: usize) -> BTreeSet<JobId> {
    let mut active: Vec<(Rat, JobId)> = trace
        .active_set(tprime)
        .into_iter()
        .map(|id| (trace.remaining(id, tprime).expect("active job"), id))
        .collect();
    // Largest volume first, then lowest id.
    active.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    active.into_iter().take(x).map(|(_, id)| id).collect()
}

/// The instant a job's processing stops for good before the target, if it is
/// still unknown there: the job is frozen on [instant, target].
pub(crate) fn freeze_time(ctx: &AnalysisContext, id: JobId) -> Option<Rat> {
    let final_elapsed = ctx.elapsed_alg(id, &ctx.target);
    let stop = ctx
        .alg
        .time_elapsed_reaches(id, &final_elapsed)
        .expect("job exists")?;
    let stop = if &stop < ctx.release(id) {
        ctx.release(id).clone()
    } else {
        stop
    };
    if stop < ctx.target && unknown_at(ctx, id, &stop) {
        Some(stop)
    } else {
        None
    }
}

/// Distinct freeze instants strictly before the target.
pub(crate) fn freeze_event_times(ctx: &AnalysisContext) -> BTreeSet<Rat> {
    ctx.alg
        .instance()
        .jobs()
        .iter()
        .filter_map(|j| freeze_time(ctx, j.id))
        .collect()
}

/// When the job's size becomes known: its release for ε = 1, otherwise the
/// first time elapsed reaches (1−ε)·size.
pub(crate) fn known_transition_time(ctx: &AnalysisContext, id: JobId) -> Option<Rat> {
    let threshold = ctx.threshold(id);
    if threshold.is_zero() {
        return Some(ctx.release(id).clone());
    }
    let t = ctx
        .alg
        .time_elapsed_reaches(id, &threshold)
        .expect("job exists")?;
    Some(if &t < ctx.release(id) {
        ctx.release(id).clone()
    } else {
        t
    })
}

/// Released before `t` (exclusive) and still unknown at `t` after the status
/// changes at `t` are applied — the fast-forward start-state unknowns.
pub(crate) fn pre_arrival_unknowns(ctx: &AnalysisContext, t: &Rat) -> BTreeSet<JobId> {
    ctx.alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| {
            &j.release < t
                && ctx.elapsed_alg(j.id, t) < ctx.threshold(j.id)
        })
        .map(|j| j.id)
        .collect()
}

/// Released strictly before `t` and incomplete strictly after it; the queue
/// the fast-forward end-state reasons about (values taken at `t`).
pub(crate) fn alive_across(trace: &Trace, t: &Rat) -> BTreeSet<JobId> {
    trace
        .instance()
        .jobs()
        .iter()
        .filter(|j| {
            &j.release < t
                && match trace.completion(j.id) {
                    Some(c) => c > t,
                    None => true,
                }
        })
        .map(|j| j.id)
        .collect()
}

/// Top-x prefix by remaining volume (ties toward lower ids) over an explicit
/// job set, with volumes evaluated at `at`.
pub(crate) fn top_by_remaining(
    ctx: &AnalysisContext,
    ids: &BTreeSet<JobId>,
    at: &Rat,
    x: usize,
) -> BTreeSet<JobId> {
    let mut jobs: Vec<(Rat, JobId)> = ids
        .iter()
        .map(|&id| (ctx.remaining_alg(id, at), id))
        .collect();
    jobs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    jobs.into_iter().take(x).map(|(_, id)| id).collect()
}

pub(crate) fn vol_alg(ctx: &AnalysisContext, ids: &BTreeSet<JobId>, at: &Rat) -> Rat {
    ids.iter().map(|&id| ctx.remaining_alg(id, at)).sum()
}

pub(crate) fn vol_opt(ctx: &AnalysisContext, ids: &BTreeSet<JobId>, at: &Rat) -> Rat {
    ids.iter().map(|&id| ctx.remaining_opt(id, at)).sum()
}
