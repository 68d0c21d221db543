//! The fast-forward interval check.
//!
//! An interval [t0, t1] in which unknown jobs are in play transfers the
//! prefix volume bound from t0 to t1 through a chain of switching facts about
//! γ, the elapsed time of the leader when it is last touched. The check
//! verifies the preconditions (start-state unknowns all frozen, frozen set
//! constant, a new unknown job present throughout, leader touched at the
//! end), the four switching statements, the monotonicity and existence
//! observations, and then rebuilds the explicit witness set S whose
//! cardinality and volume force the bound at t1.
//!
//! End-state sets are taken at t1⁻ (statuses just before the changes at t1,
//! values at t1, jobs released strictly before t1 and unfinished strictly
//! after); start-state sets at t0 after its status changes but before its
//! arrivals. Jobs completing exactly at t1 therefore count as departed,
//! which is what makes the untouched-volume equality exact.

use super::checkpoints::event_and_midpoint_times;
use super::sets::{
    alive_across, frozen_set, pre_arrival_unknowns, top_by_remaining, unknown_at_minus,
    unknown_nonfrozen, unknown_nonfrozen_at_minus, vol_alg,
};
use super::{AnalysisContext, CheckReport, CheckerError, IntervalCase, IntervalKind, Witness, WitnessSet};
use crate::model::JobId;
use crate::rat::Rat;
use serde::Serialize;
use std::collections::BTreeSet;

/// The explicit witness set construction at the end of a fast-forward
/// interval: departed prefix jobs D, new baseline survivors O⁺, the carried
/// set S1, the padding set S2, and their union S, together with the leader
/// elapsed γ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SWitness {
    pub d: BTreeSet<JobId>,
    pub o_plus: BTreeSet<JobId>,
    pub s1: BTreeSet<JobId>,
    pub s2: BTreeSet<JobId>,
    pub s: BTreeSet<JobId>,
    pub gamma: Rat,
}

/// Runs checks (1)–(9) for one fast-forward interval. Precondition failures
/// (the interval does not satisfy the fast-forward entry conditions at all)
/// come back as `PreconditionViolated`; substantive check failures come back
/// as a failing report.
pub fn check_fast_forward_interval(
    ctx: &AnalysisContext,
    case: &IntervalCase,
) -> Result<CheckReport, CheckerError> {
    let grid = event_and_midpoint_times(ctx);
    check_fast_forward_with(ctx, case, &grid)
}

pub(crate) fn check_fast_forward_with(
    ctx: &AnalysisContext,
    case: &IntervalCase,
    grid: &[Rat],
) -> Result<CheckReport, CheckerError> {
    let name = "fast-forward";
    let pre = |msg: String| CheckerError::PreconditionViolated(msg);
    if !case.kind.is_fast_forward() {
        return Err(pre(format!("[{}, {}] is not a fast-forward interval", case.t0, case.t1)));
    }
    if ctx.epsilon == Rat::one() {
        return Err(pre("no fast-forward intervals exist at ε = 1".into()));
    }
    let (t0, t1) = (&case.t0, &case.t1);
    let tail = case.kind == IntervalKind::FastForwardTailAtT;

    // (1a) Every pre-existing unknown job is frozen from t0 on.
    let u0 = pre_arrival_unknowns(ctx, t0);
    let f0 = frozen_set(ctx, t0);
    if u0 != f0 {
        return Err(pre(format!(
            "(1) start-state unknowns not all frozen at {t0}: unknown {u0:?} vs frozen {f0:?}"
        )));
    }

    // (1b) The frozen set stays fixed strictly inside the interval.
    for job in ctx.alg.instance().jobs() {
        if let Some(tf) = super::sets::freeze_time(ctx, job.id) {
            if t0 < &tf && &tf < t1 {
                return Err(pre(format!("(1) {} freezes at {tf} inside ({t0}, {t1})", job.id)));
            }
        }
    }

    let interior: Vec<&Rat> = grid.iter().filter(|s| t0 < *s && *s < t1).collect();

    // (1c) A new unknown job exists throughout (t0, t1].
    let new_unknowns_at = |s: &Rat| -> BTreeSet<JobId> {
        ctx.alg
            .instance()
            .jobs()
            .iter()
            .filter(|j| super::sets::unknown_at(ctx, j.id, s) && !u0.contains(&j.id))
            .map(|j| j.id)
            .collect()
    };
    for s in &interior {
        if new_unknowns_at(s).is_empty() {
            return Err(pre(format!("(1) no new unknown job at {s} inside ({t0}, {t1})")));
        }
    }
    let end_unknowns: BTreeSet<JobId> = ctx
        .alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| unknown_at_minus(ctx, j.id, t1) && !u0.contains(&j.id))
        .map(|j| j.id)
        .collect();
    if end_unknowns.is_empty() {
        return Err(pre(format!("(1) no new unknown job at the end of [{t0}, {t1}]")));
    }

    // (1d) The leader is touched at the end of the interval.
    let end_group = unknown_nonfrozen_at_minus(ctx, t1);
    let leader = end_group
        .iter()
        .max_by(|a, b| {
            ctx.elapsed_alg(**a, t1)
                .cmp(&ctx.elapsed_alg(**b, t1))
                .then(b.cmp(a))
        })
        .copied()
        .ok_or_else(|| pre(format!("(1) no leader exists at the end of [{t0}, {t1}]")))?;
    let gamma = ctx.elapsed_alg(leader, t1);
    if !ctx.alg.rate_at_minus(leader, t1).expect("job").is_positive() {
        return Err(pre(format!("(1) leader {leader} idle just before {t1}")));
    }
    if tail && !ctx.alg.rate_at(leader, t1).expect("job").is_positive() {
        return Err(pre(format!("(1) tail leader {leader} not processed at the target {t1}")));
    }

    let fail = |sub: &str, witness: Witness, msg: String| {
        Ok(CheckReport::failed(name, witness, format!("[{t0}, {t1}] {sub}: {msg}")))
    };

    // (2) An unknown non-frozen job exists at the start and at every
    // interior checkpoint.
    if unknown_nonfrozen(ctx, t0).is_empty() {
        return fail("(2)", Witness::at(t0), "no unknown non-frozen job at the start".into());
    }
    for s in &interior {
        if unknown_nonfrozen(ctx, s).is_empty() {
            return fail("(2)", Witness::at(s), "no unknown non-frozen job".into());
        }
    }

    // (3) The maximum elapsed time over unknown non-frozen jobs never
    // decreases across the interval.
    let max_elapsed = |ids: &BTreeSet<JobId>, at: &Rat| -> Option<Rat> {
        ids.iter().map(|&id| ctx.elapsed_alg(id, at)).max()
    };
    let mut last = max_elapsed(&unknown_nonfrozen(ctx, t0), t0);
    for s in &interior {
        let here = max_elapsed(&unknown_nonfrozen(ctx, s), s);
        if let (Some(prev), Some(now)) = (&last, &here) {
            if now < prev {
                return fail(
                    "(3)",
                    Witness::at(s),
                    format!("leader elapsed drops from {prev} to {now}"),
                );
            }
        }
        last = here;
    }
    if let (Some(prev), Some(now)) = (&last, &max_elapsed(&end_group, t1)) {
        if now < prev {
            return fail("(3)", Witness::at(t1), format!("leader elapsed drops to {now} at the end"));
        }
    }

    // End-state and start-state queues.
    let slf1 = alive_across(ctx.alg, t1);
    let known1: BTreeSet<JobId> = slf1
        .iter()
        .filter(|&&id| !unknown_at_minus(ctx, id, t1))
        .copied()
        .collect();
    let known0: BTreeSet<JobId> = ctx
        .alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| {
            &j.release < t0
                && match ctx.alg.completion(j.id) {
                    Some(c) => c > t0,
                    None => true,
                }
                && ctx.elapsed_alg(j.id, t0) >= ctx.threshold(j.id)
        })
        .map(|j| j.id)
        .collect();
    let eta_threshold = ctx.unknown_scale(&gamma);

    // (4) Switching (i): a known job at the start survives to the end iff
    // its remaining time beats ε/(1−ε)·γ. When an estimate-parity overtake
    // coincides exactly with the interval end, a survivor can sit right on
    // the threshold, so the two directions are checked one-sidedly.
    for &id in &known0 {
        let remaining = ctx.remaining_alg(id, t0);
        let survives = slf1.contains(&id);
        let violated = if survives {
            remaining < eta_threshold
        } else {
            remaining > eta_threshold
        };
        if violated {
            return fail(
                "(4) switching-i",
                Witness::at(t1).with(WitnessSet::new("job", [id])),
                format!(
                    "{id} has remaining {remaining} vs threshold {eta_threshold} but survives = {survives}"
                ),
            );
        }
    }

    // (5) Switching (ii): end-state known jobs were known at the start and
    // were never touched inside the interval.
    for &id in &known1 {
        if !known0.contains(&id) {
            return fail(
                "(5) switching-ii",
                Witness::at(t1).with(WitnessSet::new("job", [id])),
                format!("{id} is known at the end but was not known at the start"),
            );
        }
        if ctx.remaining_alg(id, t0) != ctx.remaining_alg(id, t1) {
            return fail(
                "(5) switching-ii",
                Witness::at(t1).with(WitnessSet::new("job", [id])),
                format!("{id} was touched inside the interval"),
            );
        }
    }

    // (6) Switching (iii): every unknown non-frozen job ends at elapsed γ.
    for &id in &end_group {
        if ctx.elapsed_alg(id, t1) != gamma {
            return fail(
                "(6) switching-iii",
                Witness::at(t1).with(WitnessSet::new("job", [id])),
                format!("{id} ends with elapsed {} ≠ γ = {gamma}", ctx.elapsed_alg(id, t1)),
            );
        }
    }

    // (7) Switching (iv): a job released inside the interval that already
    // departed ran to completion with size at most γ/(1−ε).
    let new_jobs: BTreeSet<JobId> = ctx
        .alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| t0 <= &j.release && &j.release < t1)
        .map(|j| j.id)
        .collect();
    let size_cap = &gamma / (Rat::one() - &ctx.epsilon);
    for &id in new_jobs.difference(&slf1) {
        let size = ctx.size(id).clone();
        if ctx.elapsed_alg(id, t1) != size {
            return fail(
                "(7) switching-iv",
                Witness::at(t1).with(WitnessSet::new("job", [id])),
                format!("departed newcomer {id} did not run to completion"),
            );
        }
        if size > size_cap {
            return fail(
                "(7) switching-iv",
                Witness::at(t1).with(WitnessSet::new("job", [id])),
                format!("departed newcomer {id} has size {size} > {size_cap}"),
            );
        }
    }

    // (8) The witness set S.
    let survivors = ctx.opt_survivors();
    let delta0 = survivors.iter().filter(|&&id| ctx.release(id) < t0).count();
    let o_plus: BTreeSet<JobId> = survivors
        .iter()
        .filter(|&&id| t0 <= ctx.release(id) && ctx.release(id) < t1)
        .copied()
        .collect();
    let delta1 = survivors.iter().filter(|&&id| ctx.release(id) < t1).count();
    debug_assert_eq!(delta1, delta0 + o_plus.len());

    let queue0 = alive_across(ctx.alg, t0);
    let b0 = top_by_remaining(ctx, &queue0, t0, ctx.k * delta0);
    let d: BTreeSet<JobId> = b0.difference(&slf1).copied().collect();

    // Jobs carried across the interval keep their volume exactly.
    for id in b0.difference(&d) {
        if ctx.remaining_alg(*id, t0) != ctx.remaining_alg(*id, t1) {
            return fail(
                "(8) carried-volume",
                Witness::at(t1).with(WitnessSet::new("job", [*id])),
                format!("prefix job {id} was touched inside the interval"),
            );
        }
    }

    let mut s1: BTreeSet<JobId> = b0.difference(&d).copied().collect();
    s1.extend(o_plus.intersection(&slf1).copied());
    let o_plus_alive = o_plus.intersection(&slf1).count();
    let o_plus_gone = o_plus.len() - o_plus_alive;
    let s2_size = ctx.k * o_plus_gone + d.len() + (ctx.k - 1) * o_plus_alive;
    let candidates: Vec<JobId> = slf1.difference(&s1).copied().collect();
    let few_elements = candidates.len() < s2_size;
    let s2: BTreeSet<JobId> = if few_elements {
        candidates.into_iter().collect()
    } else {
        candidates.into_iter().take(s2_size).collect()
    };
    let s: BTreeSet<JobId> = s1.union(&s2).copied().collect();
    let witness = SWitness {
        d: d.clone(),
        o_plus: o_plus.clone(),
        s1: s1.clone(),
        s2: s2.clone(),
        s: s.clone(),
        gamma: gamma.clone(),
    };

    let swit = |label: &str| {
        Witness::at(t1)
            .with(WitnessSet::new("S", witness.s.clone()))
            .with(WitnessSet::new("S1", witness.s1.clone()))
            .with(WitnessSet::new("S2", witness.s2.clone()))
            .with(WitnessSet::new("D", witness.d.clone()))
            .with(WitnessSet::new(label, []))
    };

    // (8a) |S| ≤ ⌈1/ε⌉·δ(t0) + ⌈1/ε⌉·|O⁺| = ⌈1/ε⌉·δ(t1).
    if s.len() > ctx.k * delta0 + ctx.k * o_plus.len() {
        return fail(
            "(8) cardinality",
            swit("cardinality"),
            format!("|S| = {} exceeds {}·({delta0} + {})", s.len(), ctx.k, o_plus.len()),
        );
    }

    // (8b) Every surviving job retains at least ε/(1−ε)·γ of volume.
    for &id in &slf1 {
        if ctx.remaining_alg(id, t1) < eta_threshold {
            return fail(
                "(8) per-job-volume",
                Witness::at(t1).with(WitnessSet::new("job", [id])),
                format!("{id} survives with {} < ε/(1−ε)·γ = {eta_threshold}", ctx.remaining_alg(id, t1)),
            );
        }
    }

    // Baseline survivor volume over jobs released before t1, at t1.
    let volstar: Rat = survivors
        .iter()
        .filter(|&&id| ctx.release(id) < t1)
        .map(|&id| ctx.remaining_opt(id, t1))
        .sum();

    // (8c) The endpoint of the S1 volume chain.
    let vol_s1 = vol_alg(ctx, &s1, t1);
    let lower = &volstar
        - &gamma * Rat::int(o_plus_alive as i64)
        - &size_cap * Rat::int(o_plus_gone as i64)
        - &eta_threshold * Rat::int(d.len() as i64);
    if vol_s1 < lower {
        return fail(
            "(8) s1-volume",
            swit("s1-volume"),
            format!("vol(S1) = {vol_s1} below the chain endpoint {lower}"),
        );
    }

    // (8d) Few-elements fallback and the S-route bound.
    let vol_s = vol_alg(ctx, &s, t1);
    if few_elements && vol_s < volstar {
        return fail(
            "(8) few-elements",
            swit("few-elements"),
            format!("S = whole queue but vol(S) = {vol_s} < {volstar}"),
        );
    }
    if vol_s < volstar {
        return fail(
            "(8) s-volume",
            swit("s-volume"),
            format!("vol(S) = {vol_s} < survivor volume {volstar}"),
        );
    }

    // (9) Conclusion: the bound holds at t1 for the largest-volume prefix.
    let b1 = top_by_remaining(ctx, &slf1, t1, ctx.k * delta1);
    let vol_b1 = vol_alg(ctx, &b1, t1);
    if vol_b1 < vol_s || vol_b1 < volstar {
        return fail(
            "(9) conclusion",
            swit("conclusion"),
            format!("prefix volume {vol_b1} below vol(S) = {vol_s} or vol* = {volstar}"),
        );
    }

    Ok(CheckReport::passed(
        name,
        format!(
            "[{t0}, {t1}] {:?}: γ = {gamma}, |S| = {} ≤ {}·{delta1}, vol(S) = {vol_s} ≥ {volstar}",
            case.kind,
            s.len(),
            ctx.k,
        ),
    ))
}
