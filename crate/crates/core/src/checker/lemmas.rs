//! Pointwise lemma checks: local competitiveness, the prefix volume bound,
//! freeze events, and the structural rules of the engine itself.

use super::checkpoints::{refine_checkpoints, CheckpointTable};
use super::sets::{
    self, b_set, frozen_set, leader_at_minus, unknown_at, unknown_at_minus,
    unknown_nonfrozen_at_minus,
};
use super::{AnalysisContext, CheckReport, Witness, WitnessSet};
use crate::model::{JobId, Trace};
use crate::rat::Rat;
use std::collections::BTreeSet;

/// |SLF(t′)| ≤ ⌈1/ε⌉ · |OPT(t′)| at every checkpoint up to the target.
pub fn check_local_competitiveness(ctx: &AnalysisContext) -> CheckReport {
    let name = "local-competitiveness";
    let mut worst: Option<(Rat, Rat)> = None; // (ratio, time)
    for t in &refine_checkpoints(ctx).times {
        let alg = ctx.alg.active_set(t).len();
        let opt = ctx.opt.active_set(t).len();
        if alg > ctx.k * opt {
            return CheckReport::failed(
                name,
                Witness::at(t)
                    .with(WitnessSet::new("schedule-active", ctx.alg.active_set(t)))
                    .with(WitnessSet::new("baseline-active", ctx.opt.active_set(t))),
                format!("{alg} active vs {} · {opt} allowed at {t}", ctx.k),
            );
        }
        if alg > 0 {
            let ratio = Rat::int(alg as i64) / Rat::int(opt as i64);
            if worst.as_ref().is_none_or(|(r, _)| &ratio > r) {
                worst = Some((ratio, t.clone()));
            }
        }
    }
    match worst {
        Some((ratio, at)) => CheckReport::passed(
            name,
            format!("worst active-count ratio {ratio} at {at} (bound {})", ctx.k),
        ),
        None => CheckReport::passed(name, "no active jobs before the target"),
    }
}

/// Maximum |SLF(t′)| / |OPT(t′)| over checkpoints where the baseline is
/// nonempty. (Equal total volumes force the two emptiness patterns to agree;
/// the competitiveness check flags any disagreement.)
pub fn local_worst_ratio(ctx: &AnalysisContext) -> Option<Rat> {
    let mut worst: Option<Rat> = None;
    for t in &refine_checkpoints(ctx).times {
        let alg = ctx.alg.active_set(t).len();
        let opt = ctx.opt.active_set(t).len();
        if alg == 0 || opt == 0 {
            continue;
        }
        let ratio = Rat::int(alg as i64) / Rat::int(opt as i64);
        if worst.as_ref().is_none_or(|r| &ratio > r) {
            worst = Some(ratio);
        }
    }
    worst
}

/// vol over the ⌈1/ε⌉·δ largest schedule jobs ≥ vol* over the baseline
/// survivors, at every checkpoint t′ ≤ target.
pub fn check_volume_bound(ctx: &AnalysisContext) -> CheckReport {
    let table = CheckpointTable::build(ctx);
    check_volume_bound_with(ctx, &table)
}

/// As [`check_volume_bound`], reusing a prebuilt table across targets.
pub fn check_volume_bound_with(ctx: &AnalysisContext, table: &CheckpointTable) -> CheckReport {
    let name = "volume-bound";
    let mut checked = 0usize;
    for row in table.rows_upto(&ctx.target) {
        let (delta, volstar) = row.survivors(&ctx.target);
        let bvol = row.top_volume(ctx.k * delta);
        if bvol < volstar {
            let b = b_set(ctx.alg, &row.time, ctx.k * delta);
            let survivors: BTreeSet<JobId> = ctx
                .opt_survivors()
                .into_iter()
                .filter(|&id| ctx.release(id) <= &row.time)
                .collect();
            return CheckReport::failed(
                name,
                Witness::at(&row.time)
                    .with(WitnessSet::new("largest-volume-prefix", b))
                    .with(WitnessSet::new("baseline-survivors", survivors)),
                format!(
                    "target {}: prefix volume {bvol} < survivor volume {volstar} at {}",
                    ctx.target, row.time
                ),
            );
        }
        checked += 1;
    }
    CheckReport::passed(
        name,
        format!("target {}: held at {checked} checkpoints", ctx.target),
    )
}

/// Non-idling schedules always hold identical total remaining volume.
pub fn check_volume_equality(ctx: &AnalysisContext) -> CheckReport {
    let name = "total-volume-equality";
    for t in &refine_checkpoints(ctx).times {
        let alg: Rat = sets::vol_alg(ctx, &ctx.alg.active_set(t), t);
        let opt: Rat = sets::vol_opt(ctx, &ctx.opt.active_set(t), t);
        if alg != opt {
            return CheckReport::failed(
                name,
                Witness::at(t),
                format!("schedule holds {alg} but baseline holds {opt} at {t}"),
            );
        }
    }
    CheckReport::passed(name, "remaining volumes agree at every checkpoint")
}

/// When jobs freeze at `tf`, the whole unknown non-frozen set (minus jobs
/// revealed at the same instant) freezes together, and the leader was being
/// processed just before.
pub fn check_freeze_event(ctx: &AnalysisContext, tf: &Rat) -> CheckReport {
    let name = "freeze-event";
    let frozen_now = frozen_set(ctx, tf);
    let frozen_before: BTreeSet<JobId> = ctx
        .alg
        .instance()
        .jobs()
        .iter()
        .filter(|j| {
            unknown_at_minus(ctx, j.id, tf)
                && ctx.elapsed_alg(j.id, &ctx.target) == ctx.elapsed_alg(j.id, tf)
                && !ctx
                    .alg
                    .rate_at_minus(j.id, tf)
                    .expect("job exists")
                    .is_positive()
        })
        .map(|j| j.id)
        .collect();
    let newly_frozen: BTreeSet<JobId> =
        frozen_now.difference(&frozen_before).copied().collect();
    if newly_frozen.is_empty() {
        return CheckReport::passed(name, format!("no freeze at {tf}"));
    }
    // Every unknown non-frozen job at tf⁻ that stays unknown must freeze.
    let expected: BTreeSet<JobId> = unknown_nonfrozen_at_minus(ctx, tf)
        .into_iter()
        .filter(|&id| unknown_at(ctx, id, tf))
        .collect();
    if newly_frozen != expected {
        return CheckReport::failed(
            name,
            Witness::at(tf)
                .with(WitnessSet::new("newly-frozen", newly_frozen))
                .with(WitnessSet::new("unknown-non-frozen-before", expected)),
            format!("freeze at {tf} does not cover every unknown non-frozen job"),
        );
    }
    match leader_at_minus(ctx, tf) {
        Some(lead)
            if ctx
                .alg
                .rate_at_minus(lead, tf)
                .expect("job exists")
                .is_positive() =>
        {
            CheckReport::passed(
                name,
                format!("{} jobs freeze at {tf}; leader {lead} touched just before", expected.len()),
            )
        }
        Some(lead) => CheckReport::failed(
            name,
            Witness::at(tf).with(WitnessSet::new("leader", [lead])),
            format!("leader {lead} idle just before the freeze at {tf}"),
        ),
        None => CheckReport::failed(
            name,
            Witness::at(tf),
            format!("no leader exists just before the freeze at {tf}"),
        ),
    }
}

/// Structural rules of the engine, checked on the trace alone.
///
/// At every interior grid point: every processed job attains the global
/// minimum estimate; a processed known job means the known minimum is at
/// most the unknown minimum; processed unknown jobs form the *complete*
/// minimum-estimate group, share the machine equally at identical elapsed
/// values, and sit strictly below the known minimum; total rate is 1.
/// Per job: the reveal happens exactly at elapsed (1−ε)·size and strictly
/// before completion, and (for ε < 1) no segment spans a release.
pub fn check_slf_rules(alg: &Trace) -> Vec<CheckReport> {
    let epsilon = alg.instance().epsilon().clone();
    let one = Rat::one();
    let mut reports = Vec::new();

    // Interior sample points: midpoints between consecutive event times.
    let mut events: BTreeSet<Rat> = BTreeSet::new();
    for seg in alg.segments() {
        events.insert(seg.start.clone());
        events.insert(seg.end.clone());
    }
    for job in alg.instance().jobs() {
        events.insert(job.release.clone());
        let threshold = (&one - &epsilon) * &job.size;
        if threshold.is_positive() {
            if let Ok(Some(t)) = alg.time_elapsed_reaches(job.id, &threshold) {
                events.insert(t);
            }
        }
    }
    let sorted: Vec<Rat> = events.into_iter().collect();
    let mut rules = CheckReport::passed("slf-processing-rules", "holds at every interior point");
    'points: for pair in sorted.windows(2) {
        let m = (&pair[0] + &pair[1]) / Rat::int(2);
        let Some(seg) = alg
            .segments()
            .iter()
            .find(|s| s.start < m && m < s.end)
        else {
            continue; // idle gap
        };
        let fail = |detail: String, m: &Rat| {
            CheckReport::failed("slf-processing-rules", Witness::at(m), detail)
        };
        let mut total_rate = Rat::zero();
        for rate in seg.rates.values() {
            total_rate += rate;
        }
        if total_rate != one {
            rules = fail(format!("machine not fully used at {m}"), &m);
            break;
        }
        // Statuses and estimates of active jobs at m.
        let mut min_known: Option<Rat> = None;
        let mut min_unknown: Option<Rat> = None;
        let mut unknown_min_members: BTreeSet<JobId> = BTreeSet::new();
        let mut status_known: BTreeSet<JobId> = BTreeSet::new();
        let mut eta: Vec<(JobId, Rat)> = Vec::new();
        for id in alg.active_set(&m) {
            let job = alg.instance().job(id).expect("active job");
            let elapsed = alg.elapsed(id, &m).expect("active job");
            let threshold = (&one - &epsilon) * &job.size;
            let value = if elapsed >= threshold {
                status_known.insert(id);
                let r = &job.size - &elapsed;
                min_known = Some(match min_known {
                    Some(v) => v.min(r.clone()),
                    None => r.clone(),
                });
                r
            } else {
                let e = &elapsed * &epsilon / (&one - &epsilon);
                match &min_unknown {
                    Some(v) if &e < v => {
                        min_unknown = Some(e.clone());
                        unknown_min_members = [id].into();
                    }
                    Some(v) if &e == v => {
                        unknown_min_members.insert(id);
                    }
                    None => {
                        min_unknown = Some(e.clone());
                        unknown_min_members = [id].into();
                    }
                    _ => {}
                }
                e
            };
            eta.push((id, value));
        }
        let global_min = eta.iter().map(|(_, v)| v).min().cloned();
        let processed: Vec<JobId> = seg.rates.keys().copied().collect();
        let processed_known = processed.iter().any(|id| status_known.contains(id));
        let processed_unknown = processed.iter().any(|id| !status_known.contains(id));
        if processed_known && processed_unknown {
            rules = fail(format!("known and unknown jobs share the machine at {m}"), &m);
            break;
        }
        for id in &processed {
            let value = eta
                .iter()
                .find(|(j, _)| j == id)
                .map(|(_, v)| v.clone());
            if value.as_ref() != global_min.as_ref() {
                rules = fail(format!("{id} runs without the minimum estimate at {m}"), &m);
                break 'points;
            }
        }
        if processed_known {
            if processed.len() != 1 || seg.rates.values().next() != Some(&one) {
                rules = fail(format!("known job not run alone at rate 1 at {m}"), &m);
                break;
            }
        } else {
            // The complete minimum group at equal pace, strictly below the
            // known minimum.
            let group: BTreeSet<JobId> = processed.iter().copied().collect();
            if group != unknown_min_members {
                rules = fail(format!("round-robin group incomplete at {m}"), &m);
                break;
            }
            let share = &one / Rat::int(group.len() as i64);
            if seg.rates.values().any(|r| r != &share) {
                rules = fail(format!("unequal sharing inside the group at {m}"), &m);
                break;
            }
            let elapsed0 = alg.elapsed(processed[0], &m).expect("active");
            for id in &processed {
                if alg.elapsed(*id, &m).expect("active") != elapsed0 {
                    rules = fail(format!("group members diverge in elapsed time at {m}"), &m);
                    break 'points;
                }
            }
            if let (Some(mk), Some(mu)) = (&min_known, &min_unknown) {
                if mu >= mk {
                    rules = fail(format!("unknown group runs at or past known parity at {m}"), &m);
                    break;
                }
            }
        }
    }
    reports.push(rules);

    let mut reveal = CheckReport::passed(
        "slf-reveal-exactness",
        "reveals hit (1−ε)·size exactly and precede completions",
    );
    if epsilon < one {
        for job in alg.instance().jobs() {
            let threshold = (&one - &epsilon) * &job.size;
            match alg.time_elapsed_reaches(job.id, &threshold).expect("job") {
                Some(at) => {
                    let elapsed = alg.elapsed(job.id, &at).expect("job");
                    if elapsed != threshold {
                        reveal = CheckReport::failed(
                            "slf-reveal-exactness",
                            Witness::at(&at).with(WitnessSet::new("job", [job.id])),
                            format!("{} reveals with elapsed {elapsed} ≠ {threshold}", job.id),
                        );
                        break;
                    }
                    if let Some(done) = alg.completion(job.id) {
                        if &at >= done {
                            reveal = CheckReport::failed(
                                "slf-reveal-exactness",
                                Witness::at(&at).with(WitnessSet::new("job", [job.id])),
                                format!("{} completes before its size is revealed", job.id),
                            );
                            break;
                        }
                    }
                }
                None => {
                    if alg.completion(job.id).is_some() {
                        reveal = CheckReport::failed(
                            "slf-reveal-exactness",
                            Witness::default().with(WitnessSet::new("job", [job.id])),
                            format!("{} completes while still unknown", job.id),
                        );
                        break;
                    }
                }
            }
        }
    }
    reports.push(reveal);

    let mut preemption = CheckReport::passed(
        "slf-arrival-preemption",
        "no segment spans a release",
    );
    if epsilon < one {
        'seg: for seg in alg.segments() {
            for job in alg.instance().jobs() {
                if seg.start < job.release && job.release < seg.end {
                    preemption = CheckReport::failed(
                        "slf-arrival-preemption",
                        Witness::at(&job.release).with(WitnessSet::new("job", [job.id])),
                        format!("segment [{}, {}] spans the release of {}", seg.start, seg.end, job.id),
                    );
                    break 'seg;
                }
            }
        }
    }
    reports.push(preemption);

    reports
}
