//! End-to-end checker battery tests on the worked instances.
//!
//! The expected values here were derived by hand fluid simulation of both
//! schedulers (and cross-checked against the brute-force oracle where the
//! data is integral) before being frozen into assertions.

use slf_core::checker::{
    b_set, check_fast_forward_interval, check_freeze_event, check_local_competitiveness,
    check_suffix_carving_interval, check_volume_bound, check_volume_equality, decompose,
    frozen_set, leader, refine_checkpoints, run_structure_battery, verify_instance,
    verify_traces, AnalysisContext, CheckerError, IntervalCase, IntervalKind, VerifyOptions,
};
use slf_core::model::TraceDoc;
use slf_core::slf::{simulate_slf, simulate_slf_mutated, SlfMutation};
use slf_core::srpt::simulate_srpt;
use slf_core::{Instance, Job, JobId, Rat, Trace};
use std::collections::BTreeSet;

fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

fn instance(epsilon: Rat, jobs: Vec<(u32, Rat, Rat)>) -> Instance {
    Instance::new(
        epsilon,
        jobs.into_iter()
            .map(|(id, rel, size)| Job::new(id, rel, size))
            .collect(),
    )
    .unwrap()
}

/// Twin jobs: ε = 1/2, A(0,2), B(0,2). Shared on [0,2], then A, then B.
fn e1() -> Instance {
    instance(
        r(1, 2),
        vec![(0, Rat::zero(), Rat::int(2)), (1, Rat::zero(), Rat::int(2))],
    )
}

/// Lone job: ε = 1/2, A(0,4).
fn e2() -> Instance {
    instance(r(1, 2), vec![(0, Rat::zero(), Rat::int(4))])
}

/// The freeze showcase: ε = 1/2, A(0,10), B(1,1), C(2,1/2). A runs [0,1),
/// freezes at 1, resumes at 5/2.
fn e4() -> Instance {
    instance(
        r(1, 2),
        vec![
            (0, Rat::zero(), Rat::int(10)),
            (1, Rat::int(1), Rat::one()),
            (2, Rat::int(2), r(1, 2)),
        ],
    )
}

struct Fixture {
    alg: Trace,
    opt: Trace,
}

impl Fixture {
    fn new(inst: &Instance) -> Self {
        Fixture {
            alg: simulate_slf(inst),
            opt: simulate_srpt(inst),
        }
    }

    fn ctx(&self, target: Rat) -> AnalysisContext<'_> {
        AnalysisContext::new(&self.alg, &self.opt, target).unwrap()
    }
}

fn ids(raw: &[u32]) -> BTreeSet<JobId> {
    raw.iter().map(|&i| JobId(i)).collect()
}

#[test]
fn checkpoints_contain_every_event() {
    let fx = Fixture::new(&e1());
    let ctx = fx.ctx(Rat::int(4));
    let times = refine_checkpoints(&ctx).times;
    for expected in [Rat::zero(), Rat::int(2), Rat::int(3), Rat::int(4)] {
        assert!(times.contains(&expected), "missing {expected}");
    }
    // One interior representative per gap: 0 and 2 are consecutive events.
    assert!(times.contains(&Rat::one()));

    let fx = Fixture::new(&e2());
    let ctx = fx.ctx(Rat::int(4));
    let times = refine_checkpoints(&ctx).times;
    for expected in [Rat::zero(), Rat::int(2), Rat::int(4)] {
        assert!(times.contains(&expected), "missing {expected}");
    }

    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    let times = refine_checkpoints(&ctx).times;
    for expected in [
        Rat::zero(),
        Rat::int(1),
        r(3, 2),
        Rat::int(2),
        r(9, 4),
        r(5, 2),
    ] {
        assert!(times.contains(&expected), "missing {expected}");
    }
}

#[test]
fn frozen_set_tracks_untouched_unknowns() {
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    // A is unknown (elapsed 1 < 5) and untouched during [3/2, 5/2].
    assert_eq!(frozen_set(&ctx, &r(3, 2)), ids(&[0]));
    // At 1/2 A is still being processed.
    assert_eq!(frozen_set(&ctx, &r(1, 2)), ids(&[]));
    // Freezing is monotone along the window.
    let mut prev = BTreeSet::new();
    for i in 0..=10 {
        let t = r(i, 4);
        let now = frozen_set(&ctx, &t);
        assert!(prev.is_subset(&now), "freezing not monotone at {t}");
        prev = now;
    }

    let eps1 = instance(Rat::one(), vec![(0, Rat::zero(), Rat::int(3))]);
    let fx = Fixture::new(&eps1);
    let ctx = fx.ctx(Rat::int(3));
    assert_eq!(frozen_set(&ctx, &Rat::one()), ids(&[]));
}

#[test]
fn leader_is_max_elapsed_unknown_nonfrozen() {
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    // At 5/4: A is frozen, B is the only non-frozen unknown.
    assert_eq!(leader(&ctx, &r(5, 4)), Some(JobId(1)));
    // At 9/4: C was just revealed, no unknown non-frozen job remains.
    assert_eq!(leader(&ctx, &r(9, 4)), None);

    let eps1 = instance(Rat::one(), vec![(0, Rat::zero(), Rat::int(3))]);
    let fx = Fixture::new(&eps1);
    let ctx = fx.ctx(Rat::int(3));
    assert_eq!(leader(&ctx, &Rat::one()), None);
}

#[test]
fn b_set_takes_largest_volumes() {
    let fx = Fixture::new(&e1());
    // At 5/2 job A ran alone on [2, 5/2]: r_A = 1/2, r_B = 1.
    assert_eq!(b_set(&fx.alg, &r(5, 2), 1), ids(&[1]));
    assert_eq!(b_set(&fx.alg, &r(5, 2), 0), ids(&[]));
    assert_eq!(b_set(&fx.alg, &r(5, 2), 10), ids(&[0, 1]));
}

#[test]
fn local_competitiveness_holds_on_worked_examples() {
    let fx = Fixture::new(&e1());
    let report = check_local_competitiveness(&fx.ctx(Rat::int(4)));
    assert!(report.pass, "{report:?}");

    let fx = Fixture::new(&e4());
    let report = check_local_competitiveness(&fx.ctx(r(23, 2)));
    assert!(report.pass, "{report:?}");

    let eps1 = instance(
        Rat::one(),
        vec![(0, Rat::zero(), Rat::int(2)), (1, Rat::zero(), Rat::int(2))],
    );
    let fx = Fixture::new(&eps1);
    let report = check_local_competitiveness(&fx.ctx(Rat::int(4)));
    assert!(report.pass);
    assert!(report.details.contains("ratio 1 "), "{}", report.details);
}

#[test]
fn volume_bound_holds_on_worked_examples() {
    let fx = Fixture::new(&e4());
    assert!(check_volume_bound(&fx.ctx(r(5, 2))).pass);
    assert!(check_volume_bound(&fx.ctx(r(23, 2))).pass);

    let fx = Fixture::new(&e1());
    assert!(check_volume_bound(&fx.ctx(Rat::int(4))).pass);
    assert!(check_volume_bound(&fx.ctx(Rat::zero())).pass);
    assert!(check_volume_equality(&fx.ctx(Rat::int(4))).pass);
}

#[test]
fn e4_decomposes_into_the_five_intervals() {
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    let intervals = decompose(&ctx).unwrap();
    let expected = vec![
        (Rat::zero(), Rat::int(1), IntervalKind::FastForward2a),
        (Rat::int(1), r(3, 2), IntervalKind::FastForward2b),
        (r(3, 2), Rat::int(2), IntervalKind::SuffixCarving),
        (Rat::int(2), r(9, 4), IntervalKind::FastForward2b),
        (r(9, 4), r(5, 2), IntervalKind::SuffixCarving),
    ];
    let got: Vec<(Rat, Rat, IntervalKind)> = intervals
        .iter()
        .map(|c| (c.t0.clone(), c.t1.clone(), c.kind))
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn e2_decomposes_into_reveal_then_suffix() {
    let fx = Fixture::new(&e2());
    let ctx = fx.ctx(Rat::int(4));
    let intervals = decompose(&ctx).unwrap();
    let got: Vec<(Rat, Rat, IntervalKind)> = intervals
        .iter()
        .map(|c| (c.t0.clone(), c.t1.clone(), c.kind))
        .collect();
    assert_eq!(
        got,
        vec![
            (Rat::zero(), Rat::int(2), IntervalKind::FastForward2b),
            (Rat::int(2), Rat::int(4), IntervalKind::SuffixCarving),
        ]
    );
}

#[test]
fn clairvoyant_instances_are_one_suffix_interval() {
    let inst = instance(
        Rat::one(),
        vec![(0, Rat::zero(), Rat::int(3)), (1, Rat::one(), Rat::one())],
    );
    let fx = Fixture::new(&inst);
    let ctx = fx.ctx(Rat::int(4));
    let intervals = decompose(&ctx).unwrap();
    assert_eq!(intervals.len(), 1);
    assert_eq!(intervals[0].kind, IntervalKind::SuffixCarving);
    assert_eq!(intervals[0].t0, Rat::zero());
    assert_eq!(intervals[0].t1, Rat::int(4));
    assert!(check_suffix_carving_interval(&ctx, &intervals[0]).pass);
}

#[test]
fn idle_targets_are_rejected() {
    let inst = instance(
        r(1, 2),
        vec![(0, Rat::zero(), Rat::one()), (1, Rat::int(5), Rat::one())],
    );
    let fx = Fixture::new(&inst);
    let ctx = fx.ctx(Rat::int(3));
    assert!(matches!(
        decompose(&ctx),
        Err(CheckerError::IdleWithinWindow(_))
    ));
    // A target in the second busy window decomposes that window.
    let ctx = fx.ctx(Rat::int(6));
    let intervals = decompose(&ctx).unwrap();
    assert_eq!(intervals[0].t0, Rat::int(5));
}

#[test]
fn freeze_event_at_one_passes() {
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    let report = check_freeze_event(&ctx, &Rat::int(1));
    assert!(report.pass, "{report:?}");
    // No freeze anywhere else: vacuous pass.
    assert!(check_freeze_event(&ctx, &r(1, 2)).pass);
}

#[test]
fn fast_forward_checks_pass_on_e4() {
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    let case = IntervalCase {
        t0: Rat::int(1),
        t1: r(3, 2),
        kind: IntervalKind::FastForward2b,
    };
    let report = check_fast_forward_interval(&ctx, &case).unwrap();
    assert!(report.pass, "{report:?}");
    // γ is the leader's elapsed time at the reveal: 1/2.
    assert!(report.details.contains("γ = 1/2"), "{}", report.details);

    let case = IntervalCase {
        t0: Rat::zero(),
        t1: Rat::int(1),
        kind: IntervalKind::FastForward2a,
    };
    assert!(check_fast_forward_interval(&ctx, &case).unwrap().pass);
}

#[test]
fn fast_forward_checks_pass_on_e2() {
    let fx = Fixture::new(&e2());
    let ctx = fx.ctx(Rat::int(4));
    let case = IntervalCase {
        t0: Rat::zero(),
        t1: Rat::int(2),
        kind: IntervalKind::FastForward2b,
    };
    let report = check_fast_forward_interval(&ctx, &case).unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.details.contains("γ = 2"), "{}", report.details);
}

#[test]
fn fast_forward_rejects_suffix_intervals() {
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    let case = IntervalCase {
        t0: r(3, 2),
        t1: Rat::int(2),
        kind: IntervalKind::SuffixCarving,
    };
    assert!(matches!(
        check_fast_forward_interval(&ctx, &case),
        Err(CheckerError::PreconditionViolated(_))
    ));
}

#[test]
fn suffix_checks_pass_on_worked_examples() {
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(5, 2));
    // C arrives exactly at the right endpoint; that belongs to the next
    // interval and does not violate the no-arrival condition.
    let case = IntervalCase {
        t0: r(3, 2),
        t1: Rat::int(2),
        kind: IntervalKind::SuffixCarving,
    };
    assert!(check_suffix_carving_interval(&ctx, &case).pass);

    let fx = Fixture::new(&e2());
    let ctx = fx.ctx(Rat::int(4));
    let case = IntervalCase {
        t0: Rat::int(2),
        t1: Rat::int(4),
        kind: IntervalKind::SuffixCarving,
    };
    let report = check_suffix_carving_interval(&ctx, &case);
    assert!(report.pass, "{report:?}");
}

#[test]
fn tail_interval_appears_for_mid_run_targets() {
    // Target 17/8 sits inside C's unknown run: the freeze of A at 1 and the
    // reveal of B at 3/2 still happen, and the final interval is a
    // fast-forward tail with C processed through the target.
    let fx = Fixture::new(&e4());
    let ctx = fx.ctx(r(17, 8));
    let intervals = decompose(&ctx).unwrap();
    let got: Vec<(Rat, Rat, IntervalKind)> = intervals
        .iter()
        .map(|c| (c.t0.clone(), c.t1.clone(), c.kind))
        .collect();
    assert_eq!(
        got,
        vec![
            (Rat::zero(), Rat::int(1), IntervalKind::FastForward2a),
            (Rat::int(1), r(3, 2), IntervalKind::FastForward2b),
            (r(3, 2), Rat::int(2), IntervalKind::SuffixCarving),
            (Rat::int(2), r(17, 8), IntervalKind::FastForwardTailAtT),
        ]
    );
    let report = check_fast_forward_interval(&ctx, intervals.last().unwrap()).unwrap();
    assert!(report.pass, "{report:?}");

    // For a target inside A's resumed run nothing ever freezes (A is touched
    // all the way to the target), so the whole window is one tail interval.
    let ctx = fx.ctx(r(11, 4));
    let intervals = decompose(&ctx).unwrap();
    let got: Vec<(Rat, Rat, IntervalKind)> = intervals
        .iter()
        .map(|c| (c.t0.clone(), c.t1.clone(), c.kind))
        .collect();
    assert_eq!(
        got,
        vec![(Rat::zero(), r(11, 4), IntervalKind::FastForwardTailAtT)]
    );
    let report = check_fast_forward_interval(&ctx, &intervals[0]).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn full_battery_passes_on_worked_examples() {
    for inst in [e1(), e2(), e4()] {
        let outcome = verify_instance(&inst, &VerifyOptions::default());
        assert!(outcome.pass, "failure: {:?}", outcome.first_failure());
    }
}

#[test]
fn battery_passes_at_every_structure_target_of_e4() {
    let fx = Fixture::new(&e4());
    for i in 0..=46 {
        let target = r(i, 4);
        let ctx = match AnalysisContext::new(&fx.alg, &fx.opt, target) {
            Ok(ctx) => ctx,
            Err(_) => continue,
        };
        for report in run_structure_battery(&ctx) {
            assert!(report.pass, "target {}: {report:?}", ctx.target);
        }
    }
}

#[test]
fn corrupted_schedule_trips_the_battery() {
    // A structurally valid trace that runs the twins sequentially instead of
    // sharing: job B sits fresh (estimate 0) while A runs — the processing
    // rules check must call it out.
    let inst = e1();
    let doc: TraceDoc = serde_json::from_value(serde_json::json!({
        "segments": [
            {"start": {"num": 0, "den": 1}, "end": {"num": 2, "den": 1},
             "rates": {"0": {"num": 1, "den": 1}}},
            {"start": {"num": 2, "den": 1}, "end": {"num": 4, "den": 1},
             "rates": {"1": {"num": 1, "den": 1}}}
        ],
        "completions": {"0": {"num": 2, "den": 1}, "1": {"num": 4, "den": 1}}
    }))
    .unwrap();
    let bad = doc.into_trace(inst.clone()).unwrap();
    let opt = simulate_srpt(&inst);
    let outcome = verify_traces(&bad, &opt, &VerifyOptions::default());
    assert!(!outcome.pass);
    let failure = outcome.first_failure().unwrap();
    assert_eq!(failure.check, "slf-processing-rules");
    assert!(failure.witness.is_some());
}

#[test]
fn mutated_engines_trip_checkers_on_sensitive_instances() {
    // Equal twins force a shared group; concentrating the rate on one twin
    // violates equal pace and estimate minimality.
    let twins = e1();
    let bad = simulate_slf_mutated(&twins, SlfMutation::FullRateToFirstGroupMember);
    let outcome = verify_traces(&bad, &simulate_srpt(&twins), &VerifyOptions::default());
    assert!(!outcome.pass);

    // Twins plus a late large job: the healthy engine parks the newcomer
    // when its estimate reaches the twins' remaining time; the tie mutant
    // runs through that point.
    let catchy = instance(
        r(1, 2),
        vec![
            (0, Rat::zero(), Rat::int(2)),
            (1, Rat::zero(), Rat::int(2)),
            (2, Rat::int(2), Rat::int(4)),
        ],
    );
    let bad = simulate_slf_mutated(&catchy, SlfMutation::PreferUnknownOnTie);
    let outcome = verify_traces(&bad, &simulate_srpt(&catchy), &VerifyOptions::default());
    assert!(!outcome.pass);
}

#[test]
fn battery_handles_empty_and_degenerate_instances() {
    let empty = Instance::new(r(1, 2), vec![]).unwrap();
    assert!(verify_instance(&empty, &VerifyOptions::default()).pass);

    let lone = instance(r(1, 3), vec![(0, r(1, 3), r(7, 16))]);
    assert!(verify_instance(&lone, &VerifyOptions::default()).pass);
}
