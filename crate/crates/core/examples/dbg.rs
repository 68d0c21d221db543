//! Timing probe at acceptance scale.
use rayon::prelude::*;
use slf_core::checker::{verify_instance, VerifyOptions};
use slf_core::generator::{generate, Family, GenSpec};
use slf_core::Rat;
use std::time::Instant;

fn main() {
    let epsilons = [Rat::new(1, 4), Rat::new(1, 2), Rat::new(3, 4)];
    // 200 instances at n <= 12 with the full battery.
    let t0 = Instant::now();
    let specs: Vec<GenSpec> = (0..67u64)
        .map(|seed| GenSpec {
            family: [Family::UniformRandom, Family::BurstyArrivals, Family::DescendingStaircase]
                [seed as usize % 3],
            n: 2 + (seed as usize % 11),
            max_size: 20,
            max_release: 30,
            seed,
        })
        .collect();
    let fails: usize = specs
        .par_iter()
        .map(|spec| {
            epsilons
                .iter()
                .filter(|eps| {
                    let inst = generate(spec, eps).unwrap();
                    !verify_instance(&inst, &VerifyOptions::default()).pass
                })
                .count()
        })
        .sum();
    println!("n<=12 battery: {} runs, {fails} failures, {:?}", specs.len() * 3, t0.elapsed());

    // n = 20 instances, battery at full policy.
    let t0 = Instant::now();
    let specs: Vec<GenSpec> = (0..20u64)
        .map(|seed| GenSpec {
            family: Family::BurstyArrivals,
            n: 20,
            max_size: 50,
            max_release: 50,
            seed: 1000 + seed,
        })
        .collect();
    let fails: usize = specs
        .par_iter()
        .map(|spec| {
            let inst = generate(spec, &Rat::new(1, 3)).unwrap();
            usize::from(!verify_instance(&inst, &VerifyOptions::default()).pass)
        })
        .sum();
    println!("n=20 battery: {} runs, {fails} failures, {:?}", specs.len(), t0.elapsed());
}
