//! Event-driven simulation of the estimate-driven scheduler.
//!
//! Each active job carries an estimate: known jobs (remaining ≤ ε·size) use
//! their exact remaining time, unknown jobs use elapsed · ε/(1−ε). The
//! machine runs a single known job of minimum estimate when the known minimum
//! is at most the unknown minimum, and otherwise runs *all* minimum-estimate
//! unknown jobs in parallel at equal pace — the fluid limit of round-robin
//! with infinitesimal quanta. All arithmetic is exact, so event times (status
//! flips, completions, estimate overtakes, group merges) are hit precisely.

use crate::model::{Instance, Job, JobId, Segment, Trace};
use crate::rat::Rat;
use std::collections::{BTreeMap, VecDeque};

/// Scheduler-side view of one job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobStatus {
    /// Size not yet revealed; `elapsed` grows while processed.
    Unknown { elapsed: Rat, size: Rat },
    /// Size revealed; `remaining` shrinks while processed.
    Known { remaining: Rat },
    Done { completion: Rat },
}

impl JobStatus {
    pub fn is_active(&self) -> bool {
        !matches!(self, JobStatus::Done { .. })
    }
}

/// Simulation state: the clock, per-job statuses of released jobs, and the
/// queue of future arrivals in (release, id) order.
#[derive(Debug, Clone)]
pub struct SlfConfig {
    pub now: Rat,
    pub statuses: BTreeMap<JobId, JobStatus>,
    pub pending: VecDeque<Job>,
}

impl SlfConfig {
    pub fn new(instance: &Instance) -> Self {
        SlfConfig {
            now: Rat::zero(),
            statuses: BTreeMap::new(),
            pending: instance.jobs().iter().cloned().collect(),
        }
    }

    fn next_arrival(&self) -> Option<&Rat> {
        self.pending.front().map(|j| &j.release)
    }

    fn active(&self) -> impl Iterator<Item = (&JobId, &JobStatus)> {
        self.statuses.iter().filter(|(_, s)| s.is_active())
    }

    fn has_active(&self) -> bool {
        self.active().next().is_some()
    }
}

/// Priority value of an active job: remaining time if known,
/// elapsed · ε/(1−ε) if unknown. `None` for finished jobs (ε = 1 never
/// produces unknown jobs, so the unknown branch never divides by zero).
pub fn estimate(status: &JobStatus, epsilon: &Rat) -> Option<Rat> {
    match status {
        JobStatus::Known { remaining } => Some(remaining.clone()),
        JobStatus::Unknown { elapsed, .. } => {
            Some(elapsed * epsilon / (Rat::one() - epsilon))
        }
        JobStatus::Done { .. } => None,
    }
}

/// What the machine runs until the next event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessingSet {
    /// One known job at rate 1.
    Known(JobId),
    /// All unknown jobs of minimum estimate (equivalently minimum elapsed),
    /// sharing the machine equally. They have identical elapsed values.
    Shared(Vec<JobId>),
}

impl ProcessingSet {
    pub fn rates(&self, mutation: Option<SlfMutation>) -> BTreeMap<JobId, Rat> {
        match self {
            ProcessingSet::Known(id) => [(*id, Rat::one())].into(),
            ProcessingSet::Shared(ids) => {
                if mutation == Some(SlfMutation::FullRateToFirstGroupMember) {
                    [(ids[0], Rat::one())].into()
                } else {
                    let share = Rat::one() / Rat::int(ids.len() as i64);
                    ids.iter().map(|id| (*id, share.clone())).collect()
                }
            }
        }
    }

    pub fn jobs(&self) -> Vec<JobId> {
        match self {
            ProcessingSet::Known(id) => vec![*id],
            ProcessingSet::Shared(ids) => ids.clone(),
        }
    }
}

/// Deliberately wrong engine variants for checker sensitivity tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlfMutation {
    /// Break known/unknown estimate ties toward the unknown group and let the
    /// group run through the point where its estimate overtakes the smallest
    /// known remaining time.
    PreferUnknownOnTie,
    /// Give the whole machine to the lowest-id member of a round-robin group
    /// instead of sharing it equally.
    FullRateToFirstGroupMember,
}

fn min_known(cfg: &SlfConfig) -> Option<(Rat, JobId)> {
    cfg.active()
        .filter_map(|(id, s)| match s {
            JobStatus::Known { remaining } => Some((remaining.clone(), *id)),
            _ => None,
        })
        .min()
}

/// Lowest elapsed among unknown jobs together with every job attaining it.
fn min_unknown_group(cfg: &SlfConfig) -> Option<(Rat, Vec<JobId>)> {
    let mut best: Option<(Rat, Vec<JobId>)> = None;
    for (id, status) in cfg.active() {
        if let JobStatus::Unknown { elapsed, .. } = status {
            match &mut best {
                Some((e, ids)) if elapsed == e => ids.push(*id),
                Some((e, _)) if elapsed < e => best = Some((elapsed.clone(), vec![*id])),
                None => best = Some((elapsed.clone(), vec![*id])),
                _ => {}
            }
        }
    }
    best
}

fn select_with(cfg: &SlfConfig, epsilon: &Rat, mutation: Option<SlfMutation>) -> Option<ProcessingSet> {
    let known = min_known(cfg);
    let unknown = min_unknown_group(cfg);
    match (known, unknown) {
        (None, None) => None,
        (Some((_, id)), None) => Some(ProcessingSet::Known(id)),
        (None, Some((_, ids))) => Some(ProcessingSet::Shared(ids)),
        (Some((r, id)), Some((elapsed, ids))) => {
            let eta_unknown = &elapsed * epsilon / (Rat::one() - epsilon);
            let known_wins = if mutation == Some(SlfMutation::PreferUnknownOnTie) {
                r < eta_unknown
            } else {
                r <= eta_unknown
            };
            if known_wins {
                Some(ProcessingSet::Known(id))
            } else {
                Some(ProcessingSet::Shared(ids))
            }
        }
    }
}

/// The processing decision at the current instant: the minimum-estimate known
/// job (lowest id on ties) when the known minimum is at most the unknown
/// minimum, otherwise the full minimum-estimate unknown group. `None` when no
/// job is active.
pub fn select_processing(cfg: &SlfConfig, epsilon: &Rat) -> Option<ProcessingSet> {
    select_with(cfg, epsilon, None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Arrival(JobId),
    /// The processed known job finishes.
    KnownCompletes(JobId),
    /// A processed unknown job reaches elapsed = (1−ε)·size and its size is
    /// revealed.
    BecomesKnown(JobId),
    /// The shared group's rising estimate reaches the smallest known
    /// remaining time, so the machine switches to that known job.
    KnownOvertakesGroup,
    /// The group's elapsed catches an unknown job outside it, which joins.
    GroupMerges(JobId),
}

fn events_with(
    cfg: &SlfConfig,
    epsilon: &Rat,
    mutation: Option<SlfMutation>,
) -> Option<(Rat, Vec<EventKind>)> {
    let selection = select_with(cfg, epsilon, mutation)?;
    let mut candidates: Vec<(Rat, EventKind)> = Vec::new();

    if let Some(at) = cfg.next_arrival() {
        for job in cfg.pending.iter().take_while(|j| &j.release == at) {
            candidates.push((at.clone(), EventKind::Arrival(job.id)));
        }
    }

    match &selection {
        ProcessingSet::Known(id) => {
            if let Some(JobStatus::Known { remaining }) = cfg.statuses.get(id) {
                candidates.push((&cfg.now + remaining, EventKind::KnownCompletes(*id)));
            }
        }
        ProcessingSet::Shared(ids) => {
            // Under the lopsided mutation only the first member advances.
            let movers: &[JobId] = if mutation == Some(SlfMutation::FullRateToFirstGroupMember) {
                &ids[..1]
            } else {
                &ids[..]
            };
            let pace = Rat::int(movers.len() as i64); // time per unit of elapsed
            let group_elapsed = match cfg.statuses.get(&ids[0]) {
                Some(JobStatus::Unknown { elapsed, .. }) => elapsed.clone(),
                _ => unreachable!("shared selection members are unknown"),
            };
            for id in movers {
                if let Some(JobStatus::Unknown { elapsed, size }) = cfg.statuses.get(id) {
                    let threshold = (Rat::one() - epsilon) * size;
                    candidates.push((
                        &cfg.now + &pace * (threshold - elapsed),
                        EventKind::BecomesKnown(*id),
                    ));
                }
            }
            if mutation != Some(SlfMutation::PreferUnknownOnTie) {
                if let Some((r, _)) = min_known(cfg) {
                    // Estimate parity: elapsed reaches remaining · (1−ε)/ε.
                    let at = r * (Rat::one() - epsilon) / epsilon;
                    candidates.push((
                        &cfg.now + &pace * (at - &group_elapsed),
                        EventKind::KnownOvertakesGroup,
                    ));
                }
            }
            for (id, status) in cfg.active() {
                if ids.contains(id) {
                    continue;
                }
                if let JobStatus::Unknown { elapsed, .. } = status {
                    candidates.push((
                        &cfg.now + &pace * (elapsed - &group_elapsed),
                        EventKind::GroupMerges(*id),
                    ));
                }
            }
        }
    }

    let horizon = candidates.iter().map(|(t, _)| t).min()?.clone();
    let kinds = candidates
        .into_iter()
        .filter(|(t, _)| t == &horizon)
        .map(|(_, k)| k)
        .collect();
    Some((horizon, kinds))
}

/// The earliest time strictly after `cfg.now` at which the current processing
/// decision stops being valid, with every event kind attaining it. `None`
/// when nothing is active (the caller idles to the next arrival or stops).
pub fn next_event(cfg: &SlfConfig, epsilon: &Rat) -> Option<(Rat, Vec<EventKind>)> {
    events_with(cfg, epsilon, None)
}

/// Releases pending arrivals due at `cfg.now`, reveals sizes of unknown jobs
/// that reached their threshold, and records completions.
fn settle(cfg: &mut SlfConfig, epsilon: &Rat, completions: &mut BTreeMap<JobId, Rat>) {
    while cfg.pending.front().is_some_and(|j| j.release == cfg.now) {
        let job = cfg.pending.pop_front().unwrap();
        let status = if epsilon == &Rat::one() {
            JobStatus::Known {
                remaining: job.size.clone(),
            }
        } else {
            JobStatus::Unknown {
                elapsed: Rat::zero(),
                size: job.size.clone(),
            }
        };
        cfg.statuses.insert(job.id, status);
    }
    for (id, status) in cfg.statuses.iter_mut() {
        match status {
            JobStatus::Unknown { elapsed, size } => {
                let threshold = (Rat::one() - epsilon) * &*size;
                if *elapsed >= threshold {
                    debug_assert!(*elapsed == threshold, "overshot the reveal point");
                    *status = JobStatus::Known {
                        remaining: epsilon * &*size,
                    };
                }
            }
            JobStatus::Known { remaining } => {
                debug_assert!(!remaining.is_negative(), "negative remaining for {id}");
                if remaining.is_zero() {
                    completions.insert(*id, cfg.now.clone());
                    *status = JobStatus::Done {
                        completion: cfg.now.clone(),
                    };
                }
            }
            JobStatus::Done { .. } => {}
        }
    }
}

fn push_segment(segments: &mut Vec<Segment>, seg: Segment) {
    if let Some(last) = segments.last_mut() {
        if last.end == seg.start && last.rates == seg.rates {
            last.end = seg.end;
            return;
        }
    }
    segments.push(seg);
}

fn simulate_with(instance: &Instance, mutation: Option<SlfMutation>) -> Trace {
    let epsilon = instance.epsilon().clone();
    let mut cfg = SlfConfig::new(instance);
    let mut segments: Vec<Segment> = Vec::new();
    let mut completions: BTreeMap<JobId, Rat> = BTreeMap::new();

    loop {
        settle(&mut cfg, &epsilon, &mut completions);
        if !cfg.has_active() {
            match cfg.next_arrival() {
                Some(at) => {
                    // Idle gap; jump to the next release.
                    cfg.now = at.clone();
                    continue;
                }
                None => break,
            }
        }
        let selection =
            select_with(&cfg, &epsilon, mutation).expect("active jobs imply a selection");
        let (horizon, _) = events_with(&cfg, &epsilon, mutation)
            .expect("an active selection always has a next event");
        assert!(horizon > cfg.now, "event horizon must advance the clock");

        let rates = selection.rates(mutation);
        let span = &horizon - &cfg.now;
        for (id, rate) in &rates {
            match cfg.statuses.get_mut(id) {
                Some(JobStatus::Unknown { elapsed, .. }) => *elapsed += rate * &span,
                Some(JobStatus::Known { remaining }) => *remaining -= rate * &span,
                _ => unreachable!("processing a finished job"),
            }
        }
        push_segment(
            &mut segments,
            Segment {
                start: cfg.now.clone(),
                end: horizon.clone(),
                rates,
            },
        );
        cfg.now = horizon;
    }

    Trace::new(instance.clone(), segments, completions)
        .expect("engine output violates trace invariants")
}

/// Exact schedule of the estimate-driven policy on `instance`. Deterministic:
/// every tie breaks toward the lowest job id. For ε = 1 every job is known on
/// arrival and the schedule coincides with shortest-remaining-first.
pub fn simulate_slf(instance: &Instance) -> Trace {
    simulate_with(instance, None)
}

/// A defective engine for negative-control tests; see [`SlfMutation`].
pub fn simulate_slf_mutated(instance: &Instance, mutation: SlfMutation) -> Trace {
    simulate_with(instance, Some(mutation))
}
