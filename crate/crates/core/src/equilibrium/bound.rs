//! Certificate for the factor-2 liquid welfare guarantee at an equilibrium.
//!
//! Players are split by whether their equilibrium value fits in their budget
//! (`α_{σ_i} v_i ≤ c_i`). A budget-capped player already contributes
//! `c_i`, at least its capped value anywhere else. Every other player `i`
//! could instead have bid for its optimal position `o_i`, which bounds its
//! utility from below by
//! `min{α_{o_i} v_i, c_i} − min{α_{o_i} v_k, c_k} − γ`,
//! `k` being the player holding `o_i` at equilibrium.
//!
//! The per-player floor presumes rank `o_i` can be reached. When the holder
//! of `o_i` ties the player ranked just above it, the index tie-break can
//! make that rank unreachable and the floor may fail while the aggregate
//! bound still holds.

use serde::{Deserialize, Serialize};

use super::EquilibriumReport;
use crate::model::Instance;
use crate::welfare::optimal_assignment;

/// Absolute slack in `OPT ≤ 2·LW + slack`, before adding `n·θ`.
pub const BOUND_ABS_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub opt_lw: f64,
    pub eq_lw: f64,
    /// `1e-6 + n·θ`.
    pub slack: f64,
    /// `opt_lw ≤ 2·eq_lw + slack`.
    pub holds: bool,
    /// Zero-based players whose equilibrium value exceeds their budget.
    pub budget_capped: Vec<usize>,
    /// Capped players' liquid welfare at equilibrium and at the optimum.
    pub capped_eq_sum: f64,
    pub capped_opt_sum: f64,
    pub partition_holds: bool,
    /// Uncapped players whose utility falls short of the optimal-position
    /// lower bound by more than `θ + 1e-9`, with the shortfall.
    pub utility_shortfalls: Vec<(usize, f64)>,
}

pub fn check_liquid_welfare_bound(inst: &Instance, eq: &EquilibriumReport) -> BoundCheck {
    let n = inst.n();
    let (opt, opt_lw) = optimal_assignment(inst);
    let sigma = &eq.outcome.assignment;
    let slack = BOUND_ABS_SLACK + n as f64 * eq.theta;

    let budget_capped: Vec<usize> = (0..n)
        .filter(|&i| inst.value(i, sigma.position_of(i)) > inst.budget(i))
        .collect();
    let capped_eq_sum: f64 = budget_capped
        .iter()
        .map(|&i| inst.capped_value(i, sigma.position_of(i)))
        .sum();
    let capped_opt_sum: f64 = budget_capped
        .iter()
        .map(|&i| inst.capped_value(i, opt.position_of(i)))
        .sum();

    let gamma = eq.theta + 1e-9;
    let utility_shortfalls = (0..n)
        .filter(|i| !budget_capped.contains(i))
        .filter_map(|i| {
            let o = opt.position_of(i);
            let holder = sigma.player_at(o);
            let floor = inst.capped_value(i, o) - inst.capped_value(holder, o) - gamma;
            let u = eq.outcome.utilities[i];
            (u < floor).then_some((i, floor - u))
        })
        .collect();

    BoundCheck {
        opt_lw,
        eq_lw: eq.lw,
        slack,
        holds: opt_lw <= 2.0 * eq.lw + slack,
        budget_capped,
        capped_eq_sum,
        capped_opt_sum,
        partition_holds: capped_eq_sum >= capped_opt_sum,
        utility_shortfalls,
    }
}
