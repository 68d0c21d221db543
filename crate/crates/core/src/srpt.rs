//! Shortest Remaining Processing Time — the clairvoyant optimum for total
//! flow time on a single machine, used as the baseline schedule.

use crate::model::{Instance, JobId, Segment, Trace};
use crate::rat::Rat;
use std::collections::BTreeMap;

/// Exact SRPT schedule: at every instant the active job with minimum
/// remaining time runs at rate 1, lowest id on ties. Events are arrivals and
/// completions only; ε is ignored.
pub fn simulate_srpt(instance: &Instance) -> Trace {
    let mut now = Rat::zero();
    let mut remaining: BTreeMap<JobId, Rat> = BTreeMap::new();
    let mut pending: std::collections::VecDeque<_> = instance.jobs().iter().collect();
    let mut segments: Vec<Segment> = Vec::new();
    let mut completions: BTreeMap<JobId, Rat> = BTreeMap::new();

    loop {
        while pending.front().is_some_and(|j| j.release == now) {
            let job = pending.pop_front().unwrap();
            remaining.insert(job.id, job.size.clone());
        }
        let chosen = remaining
            .iter()
            .min_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)))
            .map(|(id, r)| (*id, r.clone()));
        let Some((id, rem)) = chosen else {
            match pending.front() {
                Some(next) => {
                    now = next.release.clone();
                    continue;
                }
                None => break,
            }
        };
        let finish = &now + &rem;
        let horizon = match pending.front() {
            Some(next) if next.release < finish => next.release.clone(),
            _ => finish,
        };
        let span = &horizon - &now;
        *remaining.get_mut(&id).unwrap() -= &span;
        if remaining[&id].is_zero() {
            remaining.remove(&id);
            completions.insert(id, horizon.clone());
        }
        match segments.last_mut() {
            Some(last) if last.end == now && last.rates.contains_key(&id) && last.rates.len() == 1 => {
                last.end = horizon.clone();
            }
            _ => segments.push(Segment {
                start: now.clone(),
                end: horizon.clone(),
                rates: [(id, Rat::one())].into(),
            }),
        }
        now = horizon;
    }

    Trace::new(instance.clone(), segments, completions)
        .expect("srpt output violates trace invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;
    use crate::slf::simulate_slf;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn instance(jobs: Vec<(u32, Rat, Rat)>) -> Instance {
        Instance::new(
            r(1, 2),
            jobs.into_iter()
                .map(|(id, rel, size)| Job::new(id, rel, size))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn twins_run_in_id_order() {
        let inst = instance(vec![
            (0, Rat::zero(), Rat::int(2)),
            (1, Rat::zero(), Rat::int(2)),
        ]);
        let trace = simulate_srpt(&inst);
        assert_eq!(trace.completion(JobId(0)), Some(&Rat::int(2)));
        assert_eq!(trace.completion(JobId(1)), Some(&Rat::int(4)));
        assert_eq!(trace.total_flow_time().unwrap(), Rat::int(6));
    }

    #[test]
    fn preempts_for_shorter_arrivals() {
        let inst = instance(vec![
            (0, Rat::zero(), Rat::int(10)),
            (1, Rat::int(1), Rat::one()),
            (2, Rat::int(2), r(1, 2)),
        ]);
        let trace = simulate_srpt(&inst);
        assert_eq!(trace.completion(JobId(1)), Some(&Rat::int(2)));
        assert_eq!(trace.completion(JobId(2)), Some(&r(5, 2)));
        assert_eq!(trace.completion(JobId(0)), Some(&r(23, 2)));
        assert_eq!(trace.total_flow_time().unwrap(), Rat::int(13));
    }

    #[test]
    fn lone_job_runs_at_release() {
        let inst = instance(vec![(0, Rat::int(3), Rat::int(5))]);
        let trace = simulate_srpt(&inst);
        assert_eq!(trace.segments().len(), 1);
        assert_eq!(trace.segments()[0].start, Rat::int(3));
        assert_eq!(trace.total_flow_time().unwrap(), Rat::int(5));
    }

    proptest! {
        /// Segment count stays below 2n − 1 and the schedule never idles
        /// while the exact-work engine is busy (both are non-idling, so the
        /// busy windows coincide).
        #[test]
        fn structural_bounds(jobs in proptest::collection::vec((0u32..40, 1u32..12), 1..8)) {
            let inst = Instance::new(
                r(1, 2),
                jobs.iter()
                    .enumerate()
                    .map(|(i, (rel, size))| {
                        Job::new(i as u32, Rat::int(i64::from(*rel)), Rat::int(i64::from(*size)))
                    })
                    .collect(),
            )
            .unwrap();
            let srpt = simulate_srpt(&inst);
            prop_assert!(srpt.segments().len() <= 2 * inst.len() - 1);
            let slf = simulate_slf(&inst);
            prop_assert_eq!(srpt.busy_windows(), slf.busy_windows());
        }
    }
}
