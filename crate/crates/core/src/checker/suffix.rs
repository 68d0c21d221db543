//! The suffix-carving interval check: while only known jobs run, the prefix
//! volume bound carries over directly, and touching the prefix collapses the
//! queue below the survivor budget.

use super::checkpoints::event_and_midpoint_times;
use super::sets::{alive_across, top_by_remaining, unknown_at, vol_alg};
use super::{AnalysisContext, CheckReport, IntervalCase, Witness, WitnessSet};
use crate::model::JobId;
use crate::rat::Rat;
use std::collections::BTreeSet;

/// Verifies a suffix-carving interval [t0, t1]:
///
/// (a) the schedule processes only known jobs inside the interval;
/// (b) for ε < 1, no job is released inside the open interval (arrivals at
///     the right endpoint belong to the next interval);
/// (c) the prefix volume bound holds at t1⁻ given it held at t0;
/// (d) for ε < 1, if any job of the starting prefix was touched, the whole
///     queue at t1 fits inside the survivor budget.
///
/// For ε = 1 the schedule is the baseline itself: (a) is vacuous and (b)/(d)
/// do not apply — arrivals do occur inside the single interval.
pub fn check_suffix_carving_interval(ctx: &AnalysisContext, case: &IntervalCase) -> CheckReport {
    let grid = event_and_midpoint_times(ctx);
    check_suffix_carving_with(ctx, case, &grid)
}

pub(crate) fn check_suffix_carving_with(
    ctx: &AnalysisContext,
    case: &IntervalCase,
    grid: &[Rat],
) -> CheckReport {
    let name = "suffix-carving";
    let (t0, t1) = (&case.t0, &case.t1);
    let fail = |witness: Witness, msg: String| {
        CheckReport::failed(name, witness, format!("[{t0}, {t1}] {msg}"))
    };
    let clairvoyant = ctx.epsilon == Rat::one();

    // (a) Only known jobs receive rate inside (t0, t1).
    for s in grid.iter().filter(|s| t0 < *s && *s < t1) {
        for job in ctx.alg.instance().jobs() {
            if ctx.alg.rate_at(job.id, s).expect("job").is_positive()
                && unknown_at(ctx, job.id, s)
            {
                return fail(
                    Witness::at(s).with(WitnessSet::new("job", [job.id])),
                    format!("unknown job {} is processed at {s}", job.id),
                );
            }
        }
    }

    // (b) No releases strictly inside the interval.
    if !clairvoyant {
        for job in ctx.alg.instance().jobs() {
            if t0 < &job.release && &job.release < t1 {
                return fail(
                    Witness::at(&job.release).with(WitnessSet::new("job", [job.id])),
                    format!("{} arrives inside the interval", job.id),
                );
            }
        }
    }

    // (c) The bound at t1⁻: value side at t1 over jobs released before t1.
    let survivors = ctx.opt_survivors();
    let delta1: usize = survivors.iter().filter(|&&id| ctx.release(id) < t1).count();
    let queue1 = alive_across(ctx.alg, t1);
    let b1 = top_by_remaining(ctx, &queue1, t1, ctx.k * delta1);
    let vol_b1 = vol_alg(ctx, &b1, t1);
    let volstar: Rat = survivors
        .iter()
        .filter(|&&id| ctx.release(id) < t1)
        .map(|&id| ctx.remaining_opt(id, t1))
        .sum();
    if vol_b1 < volstar {
        return fail(
            Witness::at(t1).with(WitnessSet::new("prefix", b1)),
            format!("prefix volume {vol_b1} < survivor volume {volstar} at the end"),
        );
    }

    // (d) Touching the starting prefix collapses the queue.
    if !clairvoyant {
        let delta0: usize = survivors.iter().filter(|&&id| ctx.release(id) <= t0).count();
        let b0 = top_by_remaining(ctx, &ctx.alg.active_set(t0), t0, ctx.k * delta0);
        let touched: BTreeSet<JobId> = b0
            .iter()
            .filter(|&&id| ctx.elapsed_alg(id, t1) > ctx.elapsed_alg(id, t0))
            .copied()
            .collect();
        if !touched.is_empty() && queue1.len() > ctx.k * delta1 {
            return fail(
                Witness::at(t1)
                    .with(WitnessSet::new("touched-prefix", touched))
                    .with(WitnessSet::new("queue", queue1)),
                format!(
                    "prefix touched but {} jobs remain against a budget of {}·{delta1}",
                    alive_across(ctx.alg, t1).len(),
                    ctx.k
                ),
            );
        }
    }

    CheckReport::passed(
        name,
        format!("[{t0}, {t1}]: known-only, bound carried ({vol_b1} ≥ {volstar})"),
    )
}
