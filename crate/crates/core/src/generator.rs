//! Seeded instance families for property sweeps and ratio exploration.
//!
//! Generation is deterministic per (spec, ε): the same inputs always produce
//! the byte-identical instance. Random rationals carry denominators of at
//! most 16 so event arithmetic stays small while reveal thresholds still
//! land off the integer grid.

use crate::checker::{local_worst_ratio, verify_instance, AnalysisContext, VerifyOptions};
use crate::model::{Instance, Job, ModelError};
use crate::rat::Rat;
use crate::slf::simulate_slf;
use crate::srpt::simulate_srpt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

pub const MAX_DENOMINATOR: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Independent releases and sizes.
    UniformRandom,
    /// Clustered releases: several jobs share each arrival instant, forcing
    /// round-robin groups, preemption chains, and freezes.
    BurstyArrivals,
    /// Halving sizes, each job released exactly when its predecessor's size
    /// would be revealed; drives long fast-forward chains with the leader
    /// replaced at every step.
    DescendingStaircase,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::UniformRandom => "uniform",
            Family::BurstyArrivals => "bursty",
            Family::DescendingStaircase => "staircase",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Family::UniformRandom),
            "bursty" => Ok(Family::BurstyArrivals),
            "staircase" => Ok(Family::DescendingStaircase),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub max_size: u32,
    pub max_release: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn random_rat(rng: &mut ChaCha8Rng, max_whole: u32, positive: bool) -> Rat {
    let den = rng.gen_range(1..=MAX_DENOMINATOR);
    let hi = i64::from(max_whole).max(1) * den;
    let lo = i64::from(positive);
    Rat::new(rng.gen_range(lo..=hi.max(lo)), den)
}

/// Deterministic instance for (spec, ε).
pub fn generate(spec: &GenSpec, epsilon: &Rat) -> Result<Instance, GenError> {
    if spec.n == 0 {
        return Err(GenError::InvalidSpec("n must be at least 1".into()));
    }
    if spec.max_size == 0 {
        return Err(GenError::InvalidSpec("max_size must be at least 1".into()));
    }
    if !epsilon.is_positive() || epsilon > &Rat::one() {
        return Err(GenError::InvalidSpec(format!("epsilon {epsilon} out of (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jobs: Vec<Job> = match spec.family {
        Family::UniformRandom => (0..spec.n)
            .map(|i| {
                Job::new(
                    i as u32,
                    random_rat(&mut rng, spec.max_release, false),
                    random_rat(&mut rng, spec.max_size, true),
                )
            })
            .collect(),
        Family::BurstyArrivals => {
            let bursts = (spec.n / 3).max(1);
            let mut burst_times: Vec<Rat> = (0..bursts)
                .map(|_| random_rat(&mut rng, spec.max_release, false))
                .collect();
            burst_times.sort();
            (0..spec.n)
                .map(|i| {
                    let burst = rng.gen_range(0..bursts);
                    Job::new(
                        i as u32,
                        burst_times[burst].clone(),
                        random_rat(&mut rng, spec.max_size, true),
                    )
                })
                .collect()
        }
        Family::DescendingStaircase => {
            let mut jobs = Vec::with_capacity(spec.n);
            let mut release = Rat::zero();
            let mut size = Rat::int(i64::from(spec.max_size));
            for i in 0..spec.n {
                jobs.push(Job::new(i as u32, release.clone(), size.clone()));
                release = &release + (Rat::one() - epsilon) * &size;
                size = &size / Rat::int(2);
            }
            jobs
        }
    };
    Ok(Instance::new(epsilon.clone(), jobs)?)
}

/// One sweep line: the flows, their ratio, the worst pointwise active-count
/// ratio, and the verdict of the full check battery.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub family: Family,
    pub seed: u64,
    pub n: usize,
    pub epsilon: Rat,
    pub flow_slf: Rat,
    pub flow_opt: Rat,
    pub ratio: Rat,
    pub max_local_ratio: Option<Rat>,
    pub checks_passed: bool,
}

/// Evaluates every (spec, ε) pair; rows come back in input order regardless
/// of the parallel schedule.
pub fn sweep(specs: &[GenSpec], epsilons: &[Rat]) -> Result<Vec<SweepRow>, GenError> {
    let pairs: Vec<(&GenSpec, &Rat)> = specs
        .iter()
        .flat_map(|s| epsilons.iter().map(move |e| (s, e)))
        .collect();
    pairs
        .par_iter()
        .map(|(spec, epsilon)| {
            let instance = generate(spec, epsilon)?;
            let alg = simulate_slf(&instance);
            let opt = simulate_srpt(&instance);
            let flow_slf = alg.total_flow_time()?;
            let flow_opt = opt.total_flow_time()?;
            let ratio = if flow_opt.is_zero() {
                Rat::one()
            } else {
                &flow_slf / &flow_opt
            };
            let horizon = alg.last_completion().unwrap_or_else(Rat::zero);
            let max_local_ratio = AnalysisContext::new(&alg, &opt, horizon)
                .ok()
                .and_then(|ctx| local_worst_ratio(&ctx));
            let checks_passed = verify_instance(&instance, &VerifyOptions::default()).pass;
            Ok(SweepRow {
                family: spec.family,
                seed: spec.seed,
                n: spec.n,
                epsilon: (*epsilon).clone(),
                flow_slf,
                flow_opt,
                ratio,
                max_local_ratio,
                checks_passed,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "family,seed,n,epsilon,flow_slf,flow_opt,ratio,max_local_ratio,checks_passed\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.family,
            row.seed,
            row.n,
            row.epsilon,
            row.flow_slf,
            row.flow_opt,
            row.ratio,
            row.max_local_ratio
                .as_ref()
                .map_or_else(|| "-".to_string(), Rat::to_string),
            row.checks_passed,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn staircase_matches_construction_rule() {
        let spec = GenSpec {
            family: Family::DescendingStaircase,
            n: 2,
            max_size: 4,
            max_release: 0,
            seed: 7,
        };
        let inst = generate(&spec, &r(1, 2)).unwrap();
        let jobs = inst.jobs();
        assert_eq!((jobs[0].release.clone(), jobs[0].size.clone()), (Rat::zero(), Rat::int(4)));
        // Released exactly when the first job's size would be revealed.
        assert_eq!((jobs[1].release.clone(), jobs[1].size.clone()), (Rat::int(2), Rat::int(2)));
    }

    #[test]
    fn single_job_spec_yields_single_job() {
        let spec = GenSpec {
            family: Family::UniformRandom,
            n: 1,
            max_size: 9,
            max_release: 9,
            seed: 3,
        };
        let inst = generate(&spec, &r(1, 3)).unwrap();
        assert_eq!(inst.len(), 1);
        assert!(inst.jobs()[0].size.is_positive());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GenSpec {
            family: Family::BurstyArrivals,
            n: 3,
            max_size: 6,
            max_release: 10,
            seed: 42,
        };
        let a = generate(&spec, &r(1, 2)).unwrap();
        let b = generate(&spec, &r(1, 2)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let spec = GenSpec {
            family: Family::UniformRandom,
            n: 0,
            max_size: 4,
            max_release: 4,
            seed: 0,
        };
        assert!(matches!(generate(&spec, &r(1, 2)), Err(GenError::InvalidSpec(_))));
        let spec = GenSpec { n: 2, ..spec };
        assert!(matches!(generate(&spec, &Rat::int(2)), Err(GenError::InvalidSpec(_))));
    }

    #[test]
    fn every_generated_instance_validates() {
        for family in [
            Family::UniformRandom,
            Family::BurstyArrivals,
            Family::DescendingStaircase,
        ] {
            for seed in 0..20 {
                let spec = GenSpec {
                    family,
                    n: 1 + (seed as usize % 7),
                    max_size: 8,
                    max_release: 12,
                    seed,
                };
                generate(&spec, &r(2, 3)).unwrap();
            }
        }
    }

    #[test]
    fn sweep_reports_expected_ratios() {
        let specs = vec![
            GenSpec {
                family: Family::DescendingStaircase,
                n: 3,
                max_size: 8,
                max_release: 0,
                seed: 1,
            },
            GenSpec {
                family: Family::UniformRandom,
                n: 4,
                max_size: 6,
                max_release: 8,
                seed: 2,
            },
        ];
        let epsilons = vec![r(1, 2), Rat::one()];
        let rows = sweep(&specs, &epsilons).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            let bound = Rat::int(row.epsilon.ceil_recip() as i64);
            assert!(row.ratio <= bound, "ratio {} over bound {bound}", row.ratio);
            assert!(row.checks_passed);
            if row.epsilon == Rat::one() {
                assert_eq!(row.ratio, Rat::one());
            }
        }
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("family,seed,n,epsilon,"));
        assert_eq!(csv.lines().count(), 5);
    }
}
