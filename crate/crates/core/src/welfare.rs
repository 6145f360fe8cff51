//! Liquid and social welfare, and the liquid-welfare optimal assignment.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::max_weight_assignment;
use crate::model::{Assignment, Instance};

/// Largest instance the exhaustive oracle accepts.
pub const BRUTEFORCE_MAX_N: usize = 8;

/// Two assignments whose liquid welfare differs by at most this fraction of
/// the optimum (floored at 1) count as tied.
pub const TIE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareReport {
    pub lw: f64,
    pub sw: f64,
    pub opt_lw: f64,
    pub opt_assignment: Assignment,
}

/// `Σ_i min{α_{σ_i} v_i, c_i}`.
pub fn liquid_welfare(inst: &Instance, assignment: &Assignment) -> f64 {
    (0..inst.n())
        .map(|i| inst.capped_value(i, assignment.position_of(i)))
        .sum()
}

/// `Σ_i α_{σ_i} v_i`.
pub fn social_welfare(inst: &Instance, assignment: &Assignment) -> f64 {
    (0..inst.n())
        .map(|i| inst.value(i, assignment.position_of(i)))
        .sum()
}

fn tie_tol(best: f64) -> f64 {
    TIE_REL_TOL * best.abs().max(1.0)
}

fn weights(inst: &Instance) -> Vec<Vec<f64>> {
    (0..inst.n())
        .map(|i| (0..inst.n()).map(|j| inst.capped_value(i, j)).collect())
        .collect()
}

fn sub_optimum(w: &[Vec<f64>], players: &[usize], positions: &[usize]) -> (f64, Vec<usize>) {
    let sub: Vec<Vec<f64>> = players
        .iter()
        .map(|&i| positions.iter().map(|&j| w[i][j]).collect())
        .collect();
    let cols = max_weight_assignment(&sub);
    let value = cols.iter().enumerate().map(|(k, &c)| sub[k][c]).sum();
    (value, cols.into_iter().map(|c| positions[c]).collect())
}

/// Liquid-welfare maximizing assignment.
///
/// The optimum value comes from one Hungarian solve on the weights
/// `min{α_j v_i, c_i}`. Among (near-)optimal assignments the
/// lexicographically smallest `σ` is then selected by fixing players in
/// index order, trying positions in increasing order and re-solving the
/// remaining subproblem only when the candidate differs from the current
/// completion.
pub fn optimal_assignment(inst: &Instance) -> (Assignment, f64) {
    let n = inst.n();
    let w = weights(inst);
    let best_cols = max_weight_assignment(&w);
    let best: f64 = best_cols.iter().enumerate().map(|(i, &j)| w[i][j]).sum();
    let threshold = best - tie_tol(best);

    let mut current = best_cols;
    let mut prefix_value = 0.0;
    let mut free: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        for &j in free.clone().iter() {
            if j == current[i] {
                break;
            }
            let positions: Vec<usize> = free.iter().copied().filter(|&p| p != j).collect();
            let (sub_value, sub_cols) = sub_optimum(&w, &rest, &positions);
            if prefix_value + w[i][j] + sub_value >= threshold {
                current[i] = j;
                current[i + 1..].copy_from_slice(&sub_cols);
                break;
            }
        }
        prefix_value += w[i][current[i]];
        free.retain(|&p| p != current[i]);
    }
    let assignment = Assignment::from_sigma(current).expect("assignment is a permutation");
    let lw = liquid_welfare(inst, &assignment);
    (assignment, lw)
}

/// Exhaustive search over all `n!` assignments with the same tie-break as
/// [`optimal_assignment`]. Test oracle; refuses `n > 8`.
pub fn optimal_assignment_bruteforce(inst: &Instance) -> Result<(Assignment, f64)> {
    let n = inst.n();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: BRUTEFORCE_MAX_N,
            what: "exhaustive optimal assignment",
        });
    }
    let w = weights(inst);
    let scored: Vec<(Vec<usize>, f64)> = (0..n)
        .permutations(n)
        .map(|sigma| {
            let value = sigma.iter().enumerate().map(|(i, &j)| w[i][j]).sum();
            (sigma, value)
        })
        .collect();
    let best = scored
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - tie_tol(best);
    let sigma = scored
        .into_iter()
        .filter(|(_, v)| *v >= threshold)
        .map(|(s, _)| s)
        .min()
        .expect("at least one permutation");
    let assignment = Assignment::from_sigma(sigma).expect("permutation");
    let lw = liquid_welfare(inst, &assignment);
    Ok((assignment, lw))
}

pub fn welfare_report(inst: &Instance, assignment: &Assignment) -> WelfareReport {
    let (opt_assignment, opt_lw) = optimal_assignment(inst);
    WelfareReport {
        lw: liquid_welfare(inst, assignment),
        sw: social_welfare(inst, assignment),
        opt_lw,
        opt_assignment,
    }
}
