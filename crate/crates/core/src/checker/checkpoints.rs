//! Checkpoint refinement: the finite grid that makes "for all t′ ≤ t"
//! statements exactly checkable.
//!
//! Between consecutive grid points both active sets, both volume orderings,
//! and the survivor count δ are constant, and every volume quantity is
//! linear; endpoint checks therefore decide each subsegment. The grid is the
//! union of segment boundaries of both traces, releases, completions, reveal
//! times, exact pairwise remaining-volume crossing times inside each constant
//! -rate piece, and one midpoint per resulting gap.

use super::sets::known_transition_time;
use super::{AnalysisContext, CheckReport, Witness, WitnessSet};
use crate::model::{JobId, Trace};
use crate::rat::Rat;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoints {
    pub times: Vec<Rat>,
}

/// Event times of both traces up to `upto`: boundaries, releases,
/// completions, and reveal instants. Always contains 0 and `upto`.
fn base_times(ctx: &AnalysisContext, upto: &Rat) -> BTreeSet<Rat> {
    let mut times: BTreeSet<Rat> = BTreeSet::new();
    times.insert(Rat::zero());
    times.insert(upto.clone());
    for trace in [ctx.alg, ctx.opt] {
        for seg in trace.segments() {
            times.insert(seg.start.clone());
            times.insert(seg.end.clone());
        }
        for done in trace.completions().values() {
            times.insert(done.clone());
        }
    }
    for job in ctx.alg.instance().jobs() {
        times.insert(job.release.clone());
        if let Some(t) = known_transition_time(ctx, job.id) {
            times.insert(t);
        }
    }
    times.retain(|t| t <= upto && !t.is_negative());
    times.insert(upto.clone());
    times
}

/// Exact roots of r_i(t) = r_j(t) inside each constant-rate piece of a trace.
/// Remaining volumes are linear there (rate 0 before release or when parked),
/// so each pair crosses at most once per piece.
fn crossing_times(trace: &Trace, upto: &Rat) -> BTreeSet<Rat> {
    let mut times = BTreeSet::new();
    let jobs = trace.instance().jobs();
    for seg in trace.segments() {
        if &seg.start >= upto {
            break;
        }
        let end = if &seg.end < upto { &seg.end } else { upto };
        let snapshot: Vec<(JobId, Rat, Rat)> = jobs
            .iter()
            .map(|j| {
                (
                    j.id,
                    trace.remaining(j.id, &seg.start).expect("job exists"),
                    seg.rate(j.id),
                )
            })
            .collect();
        for (a, (_, va, ra)) in snapshot.iter().enumerate() {
            for (_, vb, rb) in snapshot.iter().skip(a + 1) {
                if ra == rb {
                    continue; // parallel: constant order (or a persistent tie)
                }
                // va − ra·Δ = vb − rb·Δ  ⇒  Δ = (va − vb) / (ra − rb)
                let delta = (va - vb) / (ra - rb);
                if delta.is_positive() {
                    let at = &seg.start + delta;
                    if &at < end {
                        times.insert(at);
                    }
                }
            }
        }
    }
    times
}

fn with_midpoints(times: BTreeSet<Rat>) -> Vec<Rat> {
    let sorted: Vec<Rat> = times.into_iter().collect();
    let mut out = Vec::with_capacity(sorted.len() * 2);
    for pair in sorted.windows(2) {
        out.push(pair[0].clone());
        out.push((&pair[0] + &pair[1]) / Rat::int(2));
    }
    if let Some(last) = sorted.last() {
        out.push(last.clone());
    }
    out
}

/// The refined grid over [0, target].
pub fn refine_checkpoints(ctx: &AnalysisContext) -> Checkpoints {
    let mut times = base_times(ctx, &ctx.target);
    times.extend(crossing_times(ctx.alg, &ctx.target));
    times.extend(crossing_times(ctx.opt, &ctx.target));
    Checkpoints {
        times: with_midpoints(times),
    }
}

/// Event times of the schedule plus one interior point per gap; the target
/// sweep for the decomposition battery.
pub(crate) fn event_and_midpoint_times(ctx: &AnalysisContext) -> Vec<Rat> {
    with_midpoints(base_times(ctx, &ctx.target))
}

/// Precomputed per-checkpoint state shared across targets:
/// volume-sorted queue prefixes on the schedule side and completion-sorted
/// survivor prefixes on the baseline side.
#[derive(Debug, Clone)]
pub struct CheckpointTable {
    times: Vec<Rat>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub time: Rat,
    /// Active schedule jobs by (remaining desc, id asc).
    pub alg_sorted: Vec<(JobId, Rat)>,
    /// alg_prefix[i] = sum of the first i remaining volumes.
    pub alg_prefix: Vec<Rat>,
    /// Active baseline jobs by completion desc, with remaining volumes.
    pub opt_sorted: Vec<(Rat, JobId, Rat)>,
    pub opt_prefix: Vec<Rat>,
}

impl CheckpointTable {
    pub fn build(ctx: &AnalysisContext) -> Self {
        let times = refine_checkpoints(ctx).times;
        let far = match ctx.alg.last_completion() {
            Some(h) => &h + Rat::one(),
            None => Rat::one(),
        };
        let rows = times
            .iter()
            .map(|t| {
                let mut alg_sorted: Vec<(JobId, Rat)> = ctx
                    .alg
                    .active_set(t)
                    .into_iter()
                    .map(|id| (id, ctx.remaining_alg(id, t)))
                    .collect();
                alg_sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
                let mut alg_prefix = vec![Rat::zero()];
                for (_, rem) in &alg_sorted {
                    alg_prefix.push(alg_prefix.last().unwrap() + rem);
                }
                let mut opt_sorted: Vec<(Rat, JobId, Rat)> = ctx
                    .opt
                    .active_set(t)
                    .into_iter()
                    .map(|id| {
                        let done = ctx.opt.completion(id).cloned().unwrap_or_else(|| far.clone());
                        (done, id, ctx.remaining_opt(id, t))
                    })
                    .collect();
                opt_sorted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                let mut opt_prefix = vec![Rat::zero()];
                for (_, _, rem) in &opt_sorted {
                    opt_prefix.push(opt_prefix.last().unwrap() + rem);
                }
                Row {
                    time: t.clone(),
                    alg_sorted,
                    alg_prefix,
                    opt_sorted,
                    opt_prefix,
                }
            })
            .collect();
        CheckpointTable { times, rows }
    }

    pub fn times(&self) -> &[Rat] {
        &self.times
    }

    pub(crate) fn rows_upto<'a>(&'a self, target: &'a Rat) -> impl Iterator<Item = &'a Row> {
        self.rows.iter().take_while(move |r| &r.time <= target)
    }
}

impl Row {
    /// Survivor count δ and vol* over OPT(target) ∩ OPT(row.time): baseline
    /// jobs active now whose baseline completion exceeds the target.
    pub fn survivors(&self, target: &Rat) -> (usize, &Rat) {
        let delta = self.opt_sorted.partition_point(|(done, _, _)| done > target);
        (delta, &self.opt_prefix[delta])
    }

    /// Total remaining volume of the x largest schedule jobs.
    pub fn top_volume(&self, x: usize) -> &Rat {
        let x = x.min(self.alg_sorted.len());
        &self.alg_prefix[x]
    }
}

/// Asserts the refinement invariant behind every sweep: between consecutive
/// checkpoints both active sets and the volume ordering stay constant, and
/// volumes interpolate linearly (checked at two interior thirds).
pub(crate) fn check_refinement_soundness(
    ctx: &AnalysisContext,
    table: &CheckpointTable,
) -> CheckReport {
    let name = "checkpoint-soundness";
    for pair in table.times.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let third = (b - a) / Rat::int(3);
        let p = a + &third;
        let q = a + &third * Rat::int(2);
        for trace in [ctx.alg, ctx.opt] {
            if trace.active_set(&p) != trace.active_set(&q) {
                return CheckReport::failed(
                    name,
                    Witness::at(&p).with(WitnessSet::new(
                        "active-at-first-third",
                        trace.active_set(&p),
                    )),
                    format!("active set changes inside ({a}, {b})"),
                );
            }
        }
        let order = |t: &Rat| {
            let mut jobs: Vec<(Rat, JobId)> = ctx
                .alg
                .active_set(t)
                .into_iter()
                .map(|id| (ctx.remaining_alg(id, t), id))
                .collect();
            jobs.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
            jobs.into_iter().map(|(_, id)| id).collect::<Vec<_>>()
        };
        if order(&p) != order(&q) {
            return CheckReport::failed(
                name,
                Witness::at(&p),
                format!("volume ordering changes inside ({a}, {b})"),
            );
        }
        // Linearity: the midpoint volume is the average of the two thirds.
        let ids = ctx.alg.active_set(&p);
        let mid = (&p + &q) / Rat::int(2);
        let vol = |t: &Rat| -> Rat { ids.iter().map(|&id| ctx.remaining_alg(id, t)).sum() };
        if vol(&mid) * Rat::int(2) != vol(&p) + vol(&q) {
            return CheckReport::failed(
                name,
                Witness::at(&mid),
                format!("schedule volume is not linear inside ({a}, {b})"),
            );
        }
    }
    CheckReport::passed(
        name,
        format!("{} checkpoints; sets constant and volumes linear between them", table.times.len()),
    )
}
