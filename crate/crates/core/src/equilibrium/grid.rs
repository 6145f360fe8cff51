//! Exhaustive equilibrium search over a bid grid.
//!
//! Profiles are drawn from a finite grid, but each one is checked against
//! the exact deviation sets, so everything reported is a genuine
//! (θ-)equilibrium of the continuous game. The grid may miss equilibria:
//! the reported LPoA is a lower bound and the LPoS an upper bound on the
//! values of the game.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    is_equilibrium_egfp, is_equilibrium_scalar, verify_equilibrium, EquilibriumConfig,
    EquilibriumReport,
};
use crate::error::{Error, Result};
use crate::mechanisms::{MechanismId, Rules};
use crate::model::{Assignment, BidProfile, Instance, MatrixBidProfile, ScalarBidProfile};
use crate::welfare::optimal_assignment;

pub const SCALAR_MAX_N: usize = 4;
pub const EGFP_MAX_N: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub levels_per_player: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpoaReport {
    pub mechanism: MechanismId,
    pub opt_lw: f64,
    pub opt_assignment: Assignment,
    pub min_eq_lw: f64,
    pub max_eq_lw: f64,
    pub lpoa: f64,
    pub lpos: f64,
    pub equilibria_found: usize,
    pub grid: GridSpec,
    /// Strategies actually scanned per player, grid plus threshold levels.
    pub strategies_per_player: Vec<usize>,
}

fn evenly_spaced(top: f64, m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |k| {
        if m <= 1 {
            0.0
        } else if k + 1 == m {
            top
        } else {
            top * k as f64 / (m - 1) as f64
        }
    })
}

fn sorted_unique(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Bid levels scanned for `player` under GSP/VCG: `m` evenly spaced levels
/// on `[0, min{v_i, c_i/α_1}]`, plus every player's no-over cap
/// `min{v_k, c_k/α_j}` at every position that `player` could itself bid
/// somewhere without breaking the no-over assumption.
pub fn scalar_levels(inst: &Instance, rules: &Rules, player: usize, m: usize) -> Vec<f64> {
    let n = inst.n();
    let cap = |k: usize, j: usize| inst.valuation(k).min(inst.budget(k) / inst.ctr(j));
    let mut levels: Vec<f64> = evenly_spaced(cap(player, 0), m).collect();
    for k in 0..n {
        for j in 0..n {
            levels.push(cap(k, j));
        }
    }
    let lowest = inst.ctr(n - 1);
    levels.retain(|&x| {
        rules.no_over_ok(lowest, x, inst.valuation(player), inst.budget(player))
    });
    sorted_unique(levels)
}

/// Strategies scanned for `player` under EGFP: the all-zero vector, and
/// for each position `j` a single positive bid drawn from `m` evenly spaced
/// levels on `[0, min{α_j v_i, c_i}]` and from the thresholds at which some
/// player `k` stops caring about winning `j`: its capped value
/// `min{α_j v_k, c_k}` and its capped premium over any later position,
/// `min{(α_j − α_l) v_k, c_k}`. With `θ > 0` each threshold also appears
/// shifted down by `θ`, which lets a loser with the lower index sit just
/// under the winner's bid. Levels above the budget are dropped.
pub fn egfp_levels(
    inst: &Instance,
    rules: &Rules,
    player: usize,
    m: usize,
    theta: f64,
) -> Vec<Option<(usize, f64)>> {
    let n = inst.n();
    let mut out = vec![None];
    for j in 0..n {
        let mut levels: Vec<f64> = evenly_spaced(inst.capped_value(player, j), m).collect();
        let mut thresholds = Vec::new();
        for k in 0..n {
            thresholds.push(inst.capped_value(k, j));
            for l in j + 1..n {
                let premium = (inst.ctr(j) - inst.ctr(l)) * inst.valuation(k);
                thresholds.push(premium.min(inst.budget(k)));
            }
        }
        if theta > 0.0 {
            let shifted: Vec<f64> = thresholds.iter().map(|x| x - theta).collect();
            thresholds.extend(shifted);
        }
        levels.extend(thresholds);
        levels.retain(|&x| x > 0.0 && rules.within_budget(x, inst.budget(player)));
        out.extend(sorted_unique(levels).into_iter().map(|x| Some((j, x))));
    }
    out
}

enum Strategies {
    Scalar(Vec<Vec<f64>>),
    Egfp(Vec<Vec<Option<(usize, f64)>>>),
}

impl Strategies {
    fn build(mech: MechanismId, inst: &Instance, rules: &Rules, grid: &GridSpec) -> Self {
        let n = inst.n();
        let m = grid.levels_per_player;
        if mech.is_scalar() {
            Strategies::Scalar((0..n).map(|i| scalar_levels(inst, rules, i, m)).collect())
        } else {
            Strategies::Egfp((0..n)
                    .map(|i| egfp_levels(inst, rules, i, m, grid.theta))
                    .collect())
        }
    }

    fn sizes(&self) -> Vec<usize> {
        match self {
            Strategies::Scalar(s) => s.iter().map(Vec::len).collect(),
            Strategies::Egfp(s) => s.iter().map(Vec::len).collect(),
        }
    }
}

/// Mixed-radix decoding of a profile index into per-player choices.
fn decode(mut index: usize, sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .map(|&s| {
            let k = index % s;
            index /= s;
            k
        })
        .collect()
}

fn check_size(mech: MechanismId, n: usize) -> Result<()> {
    let max = if mech.is_scalar() { SCALAR_MAX_N } else { EGFP_MAX_N };
    if n > max {
        return Err(Error::TooLarge {
            n,
            max,
            what: "equilibrium enumeration",
        });
    }
    Ok(())
}

/// Scans every grid profile and returns the (θ-)equilibria among them.
///
/// Profiles are evaluated in parallel on the current rayon pool; the result
/// order is the scan order and does not depend on the number of workers.
pub fn enumerate_equilibria(
    mech: MechanismId,
    inst: &Instance,
    grid: &GridSpec,
) -> Result<Vec<EquilibriumReport>> {
    check_size(mech, inst.n())?;
    let cfg = EquilibriumConfig::new(grid.theta);
    let strategies = Strategies::build(mech, inst, &cfg.rules, grid);
    let sizes = strategies.sizes();
    let total: usize = sizes.iter().product();
    let n = inst.n();

    let profiles: Vec<BidProfile> = (0..total)
        .into_par_iter()
        .filter_map(|index| {
            let choice = decode(index, &sizes);
            match &strategies {
                Strategies::Scalar(levels) => {
                    let bids: Vec<f64> = (0..n).map(|i| levels[i][choice[i]]).collect();
                    let bids = ScalarBidProfile::new(bids).expect("grid bids are valid");
                    is_equilibrium_scalar(mech, inst, &bids, &cfg).then_some(BidProfile::Scalar(bids))
                }
                Strategies::Egfp(levels) => {
                    let picks: Vec<Option<(usize, f64)>> =
                        (0..n).map(|i| levels[i][choice[i]]).collect();
                    let bids = MatrixBidProfile::single_position(n, &picks)
                        .expect("grid bids are valid");
                    is_equilibrium_egfp(inst, &bids, &cfg).then_some(BidProfile::Matrix(bids))
                }
            }
        })
        .collect();

    profiles
        .iter()
        .map(|bids| verify_equilibrium(mech, inst, bids, &cfg))
        .collect()
}

/// Number of strategies scanned per player for `grid`.
pub fn grid_sizes(mech: MechanismId, inst: &Instance, grid: &GridSpec) -> Vec<usize> {
    Strategies::build(mech, inst, &Rules::default(), grid).sizes()
}

/// LPoA and LPoS over an already enumerated equilibrium set.
pub fn lpoa_from_equilibria(
    mech: MechanismId,
    inst: &Instance,
    grid: &GridSpec,
    equilibria: &[EquilibriumReport],
) -> Result<LpoaReport> {
    if equilibria.is_empty() {
        return Err(Error::NoEquilibriumFound);
    }
    let (opt_assignment, opt_lw) = optimal_assignment(inst);
    let min_eq_lw = equilibria.iter().map(|e| e.lw).fold(f64::INFINITY, f64::min);
    let max_eq_lw = equilibria.iter().map(|e| e.lw).fold(f64::NEG_INFINITY, f64::max);
    Ok(LpoaReport {
        mechanism: mech,
        opt_lw,
        opt_assignment,
        min_eq_lw,
        max_eq_lw,
        lpoa: opt_lw / min_eq_lw,
        lpos: opt_lw / max_eq_lw,
        equilibria_found: equilibria.len(),
        grid: *grid,
        strategies_per_player: grid_sizes(mech, inst, grid),
    })
}

/// Enumerates equilibria on the grid and summarizes them.
pub fn lpoa_report(mech: MechanismId, inst: &Instance, grid: &GridSpec) -> Result<LpoaReport> {
    let eqs = enumerate_equilibria(mech, inst, grid)?;
    lpoa_from_equilibria(mech, inst, grid, &eqs)
}
