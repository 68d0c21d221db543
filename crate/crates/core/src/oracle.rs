//! Brute-force optimal flow time for tiny integer instances.
//!
//! With integer releases and sizes an optimal preemptive schedule can be
//! taken to switch jobs only at integer slot boundaries (any optimal schedule
//! can be exchanged into that form), so a memoized search over remaining-work
//! vectors is an independent oracle for the optimum. It deliberately shares
//! no code with the exact SRPT simulator it cross-checks.

use crate::model::Instance;
use crate::rat::Rat;
use std::collections::HashMap;

pub const MAX_JOBS: usize = 6;
pub const MAX_HORIZON: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance too large for the brute-force oracle: {0}")]
    TooLarge(String),
    #[error("brute-force oracle requires integer releases and sizes")]
    NonIntegerData,
}

/// Search node: the current slot and the remaining work per job.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct DpState {
    slot: u32,
    remaining: Vec<u8>,
}

struct Search {
    releases: Vec<u32>,
    horizon: u32,
    memo: HashMap<DpState, u32>,
}

impl Search {
    /// Minimum flow accrued from `state.slot` on, counting each slot's active
    /// jobs (released, unfinished) and choosing one of them to process.
    fn solve(&mut self, state: DpState) -> u32 {
        if state.remaining.iter().all(|&r| r == 0) {
            return 0;
        }
        debug_assert!(state.slot < self.horizon, "horizon too small");
        if let Some(&cached) = self.memo.get(&state) {
            return cached;
        }
        let active: Vec<usize> = (0..state.remaining.len())
            .filter(|&j| state.remaining[j] > 0 && self.releases[j] <= state.slot)
            .collect();
        let best = if active.is_empty() {
            let next = DpState {
                slot: state.slot + 1,
                remaining: state.remaining.clone(),
            };
            self.solve(next)
        } else {
            let accrued = active.len() as u32;
            let mut best = u32::MAX;
            for &j in &active {
                let mut remaining = state.remaining.clone();
                remaining[j] -= 1;
                let next = DpState {
                    slot: state.slot + 1,
                    remaining,
                };
                best = best.min(accrued + self.solve(next));
            }
            best
        };
        self.memo.insert(state, best);
        best
    }
}

/// Minimum total flow time over all preemptive schedules of an integer
/// instance that switch only at integer slot boundaries. Requires at most
/// [`MAX_JOBS`] jobs and a horizon of at most [`MAX_HORIZON`] covering
/// `Σ size + max release`.
pub fn brute_force_opt_flow(instance: &Instance, horizon: u32) -> Result<Rat, OracleError> {
    if instance.len() > MAX_JOBS {
        return Err(OracleError::TooLarge(format!(
            "{} jobs, limit {MAX_JOBS}",
            instance.len()
        )));
    }
    if horizon > MAX_HORIZON {
        return Err(OracleError::TooLarge(format!(
            "horizon {horizon}, limit {MAX_HORIZON}"
        )));
    }
    let mut releases = Vec::new();
    let mut sizes = Vec::new();
    for job in instance.jobs() {
        let rel = job.release.to_u64().ok_or(OracleError::NonIntegerData)?;
        let size = job.size.to_u64().ok_or(OracleError::NonIntegerData)?;
        releases.push(u32::try_from(rel).map_err(|_| {
            OracleError::TooLarge(format!("release {rel} out of range"))
        })?);
        sizes.push(u32::try_from(size).unwrap_or(u32::MAX));
    }
    let need = sizes.iter().sum::<u32>() + releases.iter().copied().max().unwrap_or(0);
    if need > horizon {
        return Err(OracleError::TooLarge(format!(
            "needs horizon {need}, given {horizon}"
        )));
    }
    if instance.is_empty() {
        return Ok(Rat::zero());
    }
    let mut search = Search {
        releases,
        horizon,
        memo: HashMap::new(),
    };
    let start = DpState {
        slot: 0,
        remaining: sizes.iter().map(|&s| s as u8).collect(),
    };
    let flow = search.solve(start);
    Ok(Rat::int(i64::from(flow)))
}
