#![forbid(unsafe_code)]

//! Exact event-driven simulation and invariant verification for preemptive
//! single-machine scheduling where a job's processing time is revealed only
//! once an ε-fraction of it remains.
//!
//! The crate has three layers:
//!
//! * [`model`] — exact rationals, instances, and piecewise-constant-rate
//!   schedule traces with derived queries (elapsed, remaining, flow time);
//! * [`slf`] / [`srpt`] / [`oracle`] — the estimate-driven SLF engine, the
//!   clairvoyant SRPT baseline, and a brute-force optimum for tiny integer
//!   instances;
//! * [`checker`] — checkpoint refinement and the full battery of schedule
//!   invariant checks (local competitiveness, volume bounds, interval
//!   decomposition, fast-forward and suffix-carving conditions).
//!
//! [`generator`] provides seeded instance families for property sweeps.

pub mod checker;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod rat;
pub mod slf;
pub mod srpt;

pub use model::{Instance, Job, JobId, ModelError, Segment, Trace};
pub use rat::Rat;
