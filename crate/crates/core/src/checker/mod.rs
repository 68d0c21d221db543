//! Invariant checkers over (schedule, baseline, target time) triples.
//!
//! Every quantity the checks compare — job counts, remaining volumes, prefix
//! sums over volume-sorted queues — is piecewise linear in time, so "for all
//! times t′ ≤ t" statements are discharged exactly: the checkpoint grid
//! contains every breakpoint (segment boundaries, releases, completions,
//! reveal times, pairwise volume crossings) plus one interior representative
//! per refined subsegment, and the checks are evaluated at every grid point.
//!
//! The battery in [`verify_traces`] runs, per instance:
//!
//! * structural rules of the estimate-driven engine (minimality of processed
//!   estimates, equal pace, reveal exactness, arrival preemption);
//! * local competitiveness and total-volume equality on the full horizon;
//! * the volume bound for a sweep of targets;
//! * the interval decomposition plus fast-forward, suffix-carving and freeze
//!   checks for each target.

mod checkpoints;
mod decompose;
mod fast_forward;
mod lemmas;
mod sets;
mod suffix;

pub use checkpoints::{refine_checkpoints, CheckpointTable, Checkpoints};
pub use decompose::{decompose, IntervalCase, IntervalKind};
pub use fast_forward::{check_fast_forward_interval, SWitness};
pub use lemmas::{
    check_freeze_event, check_local_competitiveness, check_slf_rules, check_volume_bound,
    check_volume_bound_with, check_volume_equality, local_worst_ratio,
};
pub use sets::b_set;
pub use suffix::check_suffix_carving_interval;

use crate::model::{Instance, JobId, ModelError, Trace};
use crate::rat::Rat;
use crate::slf::simulate_slf;
use crate::srpt::simulate_srpt;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckerError {
    #[error("the two traces were built from different instances")]
    MismatchedInstances,
    #[error("target {0} lies beyond the schedule horizon")]
    TargetBeyondTrace(Rat),
    #[error("the schedule idles inside the analysis window for target {0}")]
    IdleWithinWindow(Rat),
    #[error("fast-forward precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A named job set attached to a failing check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSet {
    pub label: String,
    pub ids: Vec<JobId>,
}

impl WitnessSet {
    pub fn new(label: &str, ids: impl IntoIterator<Item = JobId>) -> Self {
        WitnessSet {
            label: label.to_string(),
            ids: ids.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Witness {
    pub time: Option<Rat>,
    pub sets: Vec<WitnessSet>,
}

impl Witness {
    pub fn at(time: &Rat) -> Self {
        Witness {
            time: Some(time.clone()),
            sets: Vec::new(),
        }
    }

    pub fn with(mut self, set: WitnessSet) -> Self {
        self.sets.push(set);
        self
    }
}

/// Structured verdict of one check, serialized as
/// `{"check": ..., "pass": ..., "witness": ..., "details": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    pub witness: Option<Witness>,
    pub details: String,
}

impl CheckReport {
    pub fn passed(check: &str, details: impl Into<String>) -> Self {
        CheckReport {
            check: check.to_string(),
            pass: true,
            witness: None,
            details: details.into(),
        }
    }

    pub fn failed(check: &str, witness: Witness, details: impl Into<String>) -> Self {
        CheckReport {
            check: check.to_string(),
            pass: false,
            witness: Some(witness),
            details: details.into(),
        }
    }
}

/// A fixed analysis frame: the two schedules of one instance and the target
/// time that frozen sets and survivor counts are relative to.
#[derive(Debug, Clone)]
pub struct AnalysisContext<'a> {
    pub alg: &'a Trace,
    pub opt: &'a Trace,
    pub epsilon: Rat,
    pub target: Rat,
    /// ⌈1/ε⌉, the prefix-length multiplier.
    pub k: usize,
}

impl<'a> AnalysisContext<'a> {
    pub fn new(alg: &'a Trace, opt: &'a Trace, target: Rat) -> Result<Self, CheckerError> {
        if alg.instance() != opt.instance() {
            return Err(CheckerError::MismatchedInstances);
        }
        let horizon = alg.last_completion().unwrap_or_else(Rat::zero);
        if target.is_negative() || target > horizon {
            return Err(CheckerError::TargetBeyondTrace(target));
        }
        let epsilon = alg.instance().epsilon().clone();
        let k = epsilon.ceil_recip();
        Ok(AnalysisContext {
            alg,
            opt,
            epsilon,
            target,
            k,
        })
    }

    pub(crate) fn release(&self, id: JobId) -> &Rat {
        &self.alg.instance().job(id).expect("job exists").release
    }

    pub(crate) fn size(&self, id: JobId) -> &Rat {
        &self.alg.instance().job(id).expect("job exists").size
    }

    /// Reveal threshold (1−ε)·size; elapsed at or above it means known.
    pub(crate) fn threshold(&self, id: JobId) -> Rat {
        (Rat::one() - &self.epsilon) * self.size(id)
    }

    pub(crate) fn elapsed_alg(&self, id: JobId, t: &Rat) -> Rat {
        self.alg.elapsed(id, t).expect("job exists")
    }

    pub(crate) fn remaining_alg(&self, id: JobId, t: &Rat) -> Rat {
        self.alg.remaining(id, t).expect("job exists")
    }

    pub(crate) fn remaining_opt(&self, id: JobId, t: &Rat) -> Rat {
        self.opt.remaining(id, t).expect("job exists")
    }

    /// ε/(1−ε) · value — the unknown-side estimate scale (ε < 1 only).
    pub(crate) fn unknown_scale(&self, value: &Rat) -> Rat {
        value * &self.epsilon / (Rat::one() - &self.epsilon)
    }

    /// Active in the baseline at the target (right-open at completions).
    pub(crate) fn opt_survivors(&self) -> BTreeSet<JobId> {
        self.opt.active_set(&self.target)
    }
}

/// Frozen jobs at `tprime`: unknown there and not processed during
/// `[tprime, target]` (zero processing measure up to the target).
pub fn frozen_set(ctx: &AnalysisContext, tprime: &Rat) -> BTreeSet<JobId> {
    sets::frozen_set(ctx, tprime)
}

/// The unknown non-frozen job with maximum elapsed time at `s`, lowest id on
/// ties; `None` when every unknown job is frozen.
pub fn leader(ctx: &AnalysisContext, s: &Rat) -> Option<JobId> {
    sets::leader(ctx, s)
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Run everything against this one target instead of the sweep.
    pub explicit_target: Option<Rat>,
    /// Use the final completion as the only target regardless of size.
    pub final_only: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub reports: Vec<CheckReport>,
    pub pass: bool,
}

impl VerifyOutcome {
    fn from_reports(reports: Vec<CheckReport>) -> Self {
        let pass = reports.iter().all(|r| r.pass);
        VerifyOutcome { reports, pass }
    }

    pub fn first_failure(&self) -> Option<&CheckReport> {
        self.reports.iter().find(|r| !r.pass)
    }
}

/// Simulates both engines and runs the full battery.
pub fn verify_instance(instance: &Instance, options: &VerifyOptions) -> VerifyOutcome {
    let alg = simulate_slf(instance);
    let opt = simulate_srpt(instance);
    verify_traces(&alg, &opt, options)
}

/// Runs the full battery on a given schedule/baseline pair. The schedule may
/// come from a file override; the structural checks then decide whether it is
/// a valid engine output at all.
pub fn verify_traces(alg: &Trace, opt: &Trace, options: &VerifyOptions) -> VerifyOutcome {
    let mut reports = Vec::new();

    if alg.instance() != opt.instance() {
        reports.push(CheckReport::failed(
            "context",
            Witness::default(),
            CheckerError::MismatchedInstances.to_string(),
        ));
        return VerifyOutcome::from_reports(reports);
    }
    if alg.instance().is_empty() {
        reports.push(CheckReport::passed(
            "battery",
            "empty instance; nothing to check",
        ));
        return VerifyOutcome::from_reports(reports);
    }

    reports.extend(check_slf_rules(alg));

    let horizon = match alg.last_completion() {
        Some(h) => h,
        None => {
            reports.push(CheckReport::failed(
                "context",
                Witness::default(),
                "schedule has no completions",
            ));
            return VerifyOutcome::from_reports(reports);
        }
    };

    match (alg.total_flow_time(), opt.total_flow_time()) {
        (Ok(flow_alg), Ok(flow_opt)) => {
            let k = alg.instance().epsilon().ceil_recip();
            let bound = Rat::int(k as i64) * &flow_opt;
            if flow_alg <= bound {
                reports.push(CheckReport::passed(
                    "flow-ratio",
                    format!("flow {flow_alg} ≤ {k} · {flow_opt}"),
                ));
            } else {
                reports.push(CheckReport::failed(
                    "flow-ratio",
                    Witness::default(),
                    format!("flow {flow_alg} exceeds {k} · {flow_opt}"),
                ));
            }
        }
        _ => reports.push(CheckReport::failed(
            "flow-ratio",
            Witness::default(),
            "a schedule is incomplete",
        )),
    }

    let full = match AnalysisContext::new(alg, opt, horizon) {
        Ok(ctx) => ctx,
        Err(err) => {
            reports.push(CheckReport::failed(
                "context",
                Witness::default(),
                err.to_string(),
            ));
            return VerifyOutcome::from_reports(reports);
        }
    };
    let table = CheckpointTable::build(&full);
    reports.push(check_local_competitiveness(&full));
    reports.push(check_volume_equality(&full));
    reports.push(checkpoints::check_refinement_soundness(&full, &table));

    let (volume_targets, structure_targets) = select_targets(&full, &table, options);
    let mut first_failure: Option<CheckReport> = None;
    let mut volume_passes = 0usize;
    for target in &volume_targets {
        let ctx = AnalysisContext::new(alg, opt, target.clone()).expect("target from grid");
        let report = lemmas::check_volume_bound_with(&ctx, &table);
        if report.pass {
            volume_passes += 1;
        } else if first_failure.is_none() {
            first_failure = Some(report);
        }
    }
    match first_failure {
        Some(report) => reports.push(report),
        None => reports.push(CheckReport::passed(
            "volume-bound-sweep",
            format!("held at every checkpoint for {volume_passes} targets"),
        )),
    }

    for target in &structure_targets {
        let ctx = AnalysisContext::new(alg, opt, target.clone()).expect("target from grid");
        reports.extend(run_structure_battery(&ctx));
        if reports.iter().any(|r| !r.pass) {
            break; // keep the first witness readable
        }
    }

    VerifyOutcome::from_reports(reports)
}

/// Decomposition, interval checks, and freeze events for one target.
pub fn run_structure_battery(ctx: &AnalysisContext) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let grid = checkpoints::event_and_midpoint_times(ctx);
    for tf in sets::freeze_event_times(ctx) {
        reports.push(check_freeze_event(ctx, &tf));
    }
    match decompose(ctx) {
        Ok(intervals) => {
            for case in &intervals {
                match case.kind {
                    IntervalKind::SuffixCarving => {
                        reports.push(suffix::check_suffix_carving_with(ctx, case, &grid));
                    }
                    _ => match fast_forward::check_fast_forward_with(ctx, case, &grid) {
                        Ok(report) => reports.push(report),
                        Err(err) => reports.push(CheckReport::failed(
                            "fast-forward",
                            Witness::at(&case.t0),
                            err.to_string(),
                        )),
                    },
                }
            }
            reports.push(decompose::check_tiling(ctx, &intervals));
        }
        Err(CheckerError::IdleWithinWindow(_)) => {
            // Target inside an idle stretch: every set is empty there and
            // the induction has nothing to carry.
        }
        Err(err) => reports.push(CheckReport::failed(
            "decompose",
            Witness::at(&ctx.target),
            err.to_string(),
        )),
    }
    reports
}

/// Target sweep for the decomposition battery: event times of both traces
/// plus one interior point per gap, restricted to the schedule's busy
/// windows (decomposition is per maximal busy interval).
pub fn structure_targets(ctx: &AnalysisContext) -> Vec<Rat> {
    let windows = ctx.alg.busy_windows();
    let in_window = |t: &Rat| windows.iter().any(|(a, b)| a <= t && t <= b);
    checkpoints::event_and_midpoint_times(ctx)
        .into_iter()
        .filter(in_window)
        .collect()
}

fn select_targets(
    full: &AnalysisContext,
    table: &CheckpointTable,
    options: &VerifyOptions,
) -> (Vec<Rat>, Vec<Rat>) {
    if let Some(target) = &options.explicit_target {
        return (vec![target.clone()], vec![target.clone()]);
    }
    let final_only = options.final_only || full.alg.instance().len() > 20;
    if final_only {
        return (vec![full.target.clone()], vec![full.target.clone()]);
    }
    (table.times().to_vec(), structure_targets(full))
}
