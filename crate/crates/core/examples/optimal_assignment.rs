// Liquid-welfare-optimal assignments: Hungarian algorithm against
// exhaustive search.

use posauction::instances::{gen_random, RandomParams};
use posauction::welfare::{optimal_assignment, optimal_assignment_bruteforce};

/// Returns the largest value gap seen and whether every permutation matched.
pub fn run_example() -> posauction::Result<(f64, bool)> {
    let mut worst_gap: f64 = 0.0;
    let mut same_sigma = true;
    for seed in 0..50 {
        let n = 2 + (seed as usize % 6);
        let inst = gen_random(seed, n, &RandomParams::default())?;
        let (fast, v) = optimal_assignment(&inst);
        let (slow, w) = optimal_assignment_bruteforce(&inst)?;
        worst_gap = worst_gap.max((v - w).abs());
        same_sigma &= fast == slow;
        if seed < 3 {
            println!("seed {seed}, n = {n}: OPT = {v:.6} at sigma = {:?}", fast.sigma_one_based());
        }
    }
    println!("max |hungarian - bruteforce| = {worst_gap:e}, identical permutations: {same_sigma}");
    Ok((worst_gap, same_sigma))
}

fn main() -> posauction::Result<()> {
    run_example().map(|_| ())
}
