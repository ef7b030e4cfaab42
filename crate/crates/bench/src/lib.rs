//! Shared inputs for the criterion benches.

use flowmap::{random_instance, GenParams, Instance};

/// Feasible generated instances of size `n` with a `p`-node pipeline, taken
/// in seed order starting at `first_seed`.
pub fn feasible_instances(n: usize, p: usize, first_seed: u64, count: usize) -> Vec<Instance> {
    (first_seed..)
        .map(|seed| {
            random_instance(&GenParams {
                n,
                p,
                seed,
                ..Default::default()
            })
            .expect("valid params")
        })
        .filter(|inst| flowmap::optimal_by_search(inst).is_ok_and(|r| r.best.is_some()))
        .take(count)
        .collect()
}
