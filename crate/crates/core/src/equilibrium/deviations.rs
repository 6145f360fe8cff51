//! Exact best responses.
//!
//! Under GSP and VCG the price a player pays at a given rank depends only on
//! the opponents' bids, so a player's whole strategy space collapses to one
//! candidate per rank: the set of bids landing at rank `r` is an interval
//! bounded by the `r`-th and `(r−1)`-th highest opponent bids, and every
//! no-over feasible bid in it yields the same utility. Whether each end of
//! the interval is open or closed follows from the index tie-break.
//!
//! Under EGFP the bids a player places on positions it does not win never
//! change any step's winner, so a deviation is characterized by the
//! position `j` it wins and the price it pays there. Bidding on `j` alone
//! reaches every such outcome; the cheapest price is the highest bid among
//! the players still unassigned at step `j`, and the utility is a supremum
//! when the tie-break forces bidding strictly above it.

use serde::{Deserialize, Serialize};

use crate::mechanisms::{egfp_step_winner, vcg_externality, MechanismId, Rules};
use crate::model::{bid_order, Instance, MatrixBidProfile, ScalarBidProfile};

/// One unilateral deviation of `player` toward `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    #[serde(with = "crate::ext_real::one_based_index")]
    pub player: usize,
    /// Rank (GSP/VCG) or position (EGFP) the deviation lands on.
    #[serde(with = "crate::ext_real::one_based_index")]
    pub target: usize,
    /// Infimum bid reaching `target`; `inf` when the target is unreachable.
    #[serde(with = "crate::ext_real")]
    pub required_bid: f64,
    /// The bid must be strictly above `required_bid`.
    pub strict: bool,
    /// A concrete bid reaching `target`, when one exists.
    pub witness_bid: Option<f64>,
    /// Exact for GSP/VCG, a supremum for EGFP when `strict`.
    #[serde(with = "crate::ext_real")]
    pub deviation_utility: f64,
    #[serde(with = "crate::ext_real")]
    pub gain: f64,
    /// The target is reachable with a bid satisfying the no-over
    /// assumption (GSP/VCG) or the budget (EGFP).
    pub feasible: bool,
}

/// `after − before` over the extended reals, with `−∞ − (−∞) = 0`.
pub fn ext_gain(before: f64, after: f64) -> f64 {
    if before == after {
        0.0
    } else {
        after - before
    }
}

/// Sorted opponents of `player`, best rank first.
fn opponents(bids: &ScalarBidProfile, player: usize) -> Vec<usize> {
    let b = bids.bids();
    let mut opp: Vec<usize> = (0..b.len()).filter(|&k| k != player).collect();
    opp.sort_by(|&x, &y| bid_order(b, x, y));
    opp
}

/// Every rank-targeting deviation of `player` under GSP or VCG.
///
/// `current_utility` is the player's utility in the profile as it stands.
pub fn candidate_deviations_scalar(
    rules: &Rules,
    mech: MechanismId,
    inst: &Instance,
    bids: &ScalarBidProfile,
    player: usize,
    current_utility: f64,
) -> Vec<DeviationReport> {
    debug_assert!(mech.is_scalar());
    let n = inst.n();
    let opp = opponents(bids, player);
    let t: Vec<f64> = opp.iter().map(|&k| bids.bid(k)).collect();
    let (v, c) = (inst.valuation(player), inst.budget(player));

    (0..n)
        .map(|r| {
            let ctr = inst.ctr(r);
            // lowest bid landing at rank r
            let (lo, lo_closed) = if r + 1 < n {
                (t[r], player < opp[r])
            } else {
                (0.0, true)
            };
            // highest bid landing at rank r
            let (hi, hi_closed) = if r > 0 {
                (t[r - 1], opp[r - 1] < player)
            } else {
                (f64::INFINITY, false)
            };
            let reachable = lo < hi || (lo == hi && lo_closed && hi_closed);
            let affordable = if lo_closed {
                rules.no_over_ok(ctr, lo, v, c)
            } else {
                lo < v && ctr * lo < c * (1.0 + rules.budget_rel_tol)
            };
            let feasible = reachable && affordable;

            let payment = match mech {
                MechanismId::Gsp => ctr * if r + 1 < n { t[r] } else { 0.0 },
                _ => vcg_externality(inst.ctrs(), r, |j| t[j - 1]),
            };
            let deviation_utility = rules.utility(inst, player, r, payment);
            let witness_bid = feasible.then(|| {
                if lo_closed {
                    lo
                } else {
                    let top = hi.min(v).min(c / ctr);
                    let mid = lo + (top - lo) / 2.0;
                    if mid > lo {
                        mid
                    } else {
                        lo.next_up()
                    }
                }
            });
            DeviationReport {
                player,
                target: r,
                required_bid: lo,
                strict: !lo_closed,
                witness_bid,
                deviation_utility,
                gain: ext_gain(current_utility, deviation_utility),
                feasible,
            }
        })
        .collect()
}

/// Every single-position deviation of `player` under EGFP.
pub fn candidate_deviations_egfp(
    rules: &Rules,
    inst: &Instance,
    bids: &MatrixBidProfile,
    player: usize,
    current_utility: f64,
) -> Vec<DeviationReport> {
    let n = inst.n();
    let c = inst.budget(player);
    let zeroed = bids
        .with_row(player, vec![0.0; n])
        .expect("zero row is a valid bid vector");
    let mut taken = vec![false; n];
    let mut blocked = false;
    let mut out = Vec::with_capacity(n);

    for j in 0..n {
        let report = if blocked {
            // the player would already have won an earlier position
            DeviationReport {
                player,
                target: j,
                required_bid: f64::INFINITY,
                strict: false,
                witness_bid: None,
                deviation_utility: f64::NEG_INFINITY,
                gain: ext_gain(current_utility, f64::NEG_INFINITY),
                feasible: false,
            }
        } else {
            let mut others = taken.clone();
            others[player] = true;
            let (threshold, closed) = match egfp_step_winner(&zeroed, j, &others) {
                Some(h) => (zeroed.bid(h, j), player < h),
                None => (0.0, true),
            };
            let feasible = if closed {
                rules.within_budget(threshold, c)
            } else {
                threshold < c * (1.0 + rules.budget_rel_tol)
            };
            let deviation_utility = if feasible {
                inst.value(player, j) - threshold
            } else {
                f64::NEG_INFINITY
            };
            let witness_bid = feasible.then(|| if closed { threshold } else { threshold.next_up() });
            DeviationReport {
                player,
                target: j,
                required_bid: threshold,
                strict: !closed,
                witness_bid,
                deviation_utility,
                gain: ext_gain(current_utility, deviation_utility),
                feasible,
            }
        };
        out.push(report);

        if !blocked {
            let winner = egfp_step_winner(&zeroed, j, &taken).expect("a player remains");
            if winner == player {
                blocked = true;
            } else {
                taken[winner] = true;
            }
        }
    }
    out
}

/// Feasible deviation with the highest utility; ties go to the lowest
/// target. Ranking by utility rather than gain keeps the choice meaningful
/// when the current utility is `−∞` and every gain is `+∞`.
pub fn best_feasible(devs: &[DeviationReport]) -> Option<&DeviationReport> {
    devs.iter()
        .filter(|d| d.feasible)
        .fold(None, |best: Option<&DeviationReport>, d| match best {
            Some(b) if d.deviation_utility <= b.deviation_utility => Some(b),
            _ => Some(d),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{egfp_outcome, gsp_outcome, vcg_outcome};

    #[test]
    fn best_deviation_from_minus_infinity_ranks_by_utility() {
        let inst = Instance::new(
            vec![0.7456920682802789, 0.5147064864295332],
            vec![3.6136619089821505, 3.5749380078236164],
            vec![1.278302265789311, 5.983786547839598],
        )
        .unwrap();
        let m = MatrixBidProfile::new(vec![vec![0.0, 3.540753357143944], vec![1.0, 0.0]]).unwrap();
        assert_eq!(egfp_outcome(&inst, &m).utilities[0], f64::NEG_INFINITY);
        let devs = candidate_deviations_egfp(&Rules::default(), &inst, &m, 0, f64::NEG_INFINITY);
        assert!(devs.iter().all(|d| d.gain == f64::INFINITY));
        assert_eq!(best_feasible(&devs).unwrap().target, 1);
    }

    fn lb() -> Instance {
        Instance::new(vec![1.0, 0.01], vec![100.0, 1.0], vec![1.01, 1.0]).unwrap()
    }

    fn scalar(b: &[f64]) -> ScalarBidProfile {
        ScalarBidProfile::new(b.to_vec()).unwrap()
    }

    #[test]
    fn gsp_player_one_climbs_to_rank_one() {
        let inst = lb();
        let bids = scalar(&[0.7, 1.0]);
        let cur = gsp_outcome(&inst, &bids).utilities[0];
        assert_eq!(cur, 1.0);
        let devs =
            candidate_deviations_scalar(&Rules::default(), MechanismId::Gsp, &inst, &bids, 0, cur);
        let up = &devs[0];
        assert!(up.feasible);
        // player 1 wins ties against player 2
        assert!(!up.strict);
        assert_eq!(up.required_bid, 1.0);
        assert_eq!(up.deviation_utility, 99.0);
        assert_eq!(up.gain, 98.0);
        // staying put
        assert_eq!(devs[1].gain, 0.0);
    }

    #[test]
    fn strictness_follows_the_index_tie_break() {
        let inst = lb();
        let bids = scalar(&[1.0, 0.5]);
        let cur = gsp_outcome(&inst, &bids).utilities[1];
        let devs =
            candidate_deviations_scalar(&Rules::default(), MechanismId::Gsp, &inst, &bids, 1, cur);
        assert!(devs[0].strict);
        // player 2 may not bid above 1 at rank 1: infeasible
        assert!(!devs[0].feasible);
    }

    #[test]
    fn vcg_player_one_climbs_to_rank_one() {
        let inst = lb();
        let bids = scalar(&[0.3, 1.0]);
        let cur = vcg_outcome(&inst, &bids).utilities[0];
        let devs =
            candidate_deviations_scalar(&Rules::default(), MechanismId::Vcg, &inst, &bids, 0, cur);
        // pays b₂(1 − 1/λ) = 0.99
        assert!((devs[0].deviation_utility - 99.01).abs() < 1e-12);
        assert!(devs[0].feasible);
    }

    #[test]
    fn witness_reaches_the_target() {
        let inst = Instance::new(vec![1.0, 0.6, 0.2], vec![5.0, 4.0, 3.0], vec![10.0; 3]).unwrap();
        let bids = scalar(&[2.0, 3.0, 1.0]);
        for player in 0..3 {
            let cur = gsp_outcome(&inst, &bids).utilities[player];
            let devs = candidate_deviations_scalar(
                &Rules::default(),
                MechanismId::Gsp,
                &inst,
                &bids,
                player,
                cur,
            );
            for d in devs.iter().filter(|d| d.feasible) {
                let y = d.witness_bid.unwrap();
                let o = gsp_outcome(&inst, &bids.with_bid(player, y).unwrap());
                assert_eq!(o.position_of(player), d.target);
                assert_eq!(o.utilities[player], d.deviation_utility);
            }
        }
    }

    #[test]
    fn equal_opponent_bids_leave_no_room_between_them() {
        let inst = Instance::new(vec![1.0, 0.5, 0.2], vec![5.0; 3], vec![10.0; 3]).unwrap();
        // player 1 (index 0) cannot sit between two opponents bidding 2
        let bids = scalar(&[1.0, 2.0, 2.0]);
        let devs = candidate_deviations_scalar(
            &Rules::default(),
            MechanismId::Gsp,
            &inst,
            &bids,
            0,
            0.0,
        );
        assert!(devs[0].feasible);
        assert!(!devs[1].feasible);
        assert!(devs[2].feasible);
        // player 2 (index 1) can sit between players 1 and 3 at a bid of 2
        let bids = scalar(&[2.0, 1.0, 2.0]);
        let devs = candidate_deviations_scalar(
            &Rules::default(),
            MechanismId::Gsp,
            &inst,
            &bids,
            1,
            0.0,
        );
        assert!(devs[1].feasible && !devs[1].strict && devs[1].required_bid == 2.0);
    }

    #[test]
    fn egfp_lower_bound_deviation() {
        let inst = lb();
        let bids = MatrixBidProfile::new(vec![vec![0.5, 0.0], vec![0.8, 0.0]]).unwrap();
        let cur = egfp_outcome(&inst, &bids).utilities[0];
        assert_eq!(cur, 1.0);
        let devs = candidate_deviations_egfp(&Rules::default(), &inst, &bids, 0, cur);
        assert_eq!(devs[0].required_bid, 0.8);
        assert!(devs[0].feasible && !devs[0].strict);
        assert!((devs[0].deviation_utility - 99.2).abs() < 1e-12);
    }

    #[test]
    fn egfp_against_silent_opponents() {
        let inst = Instance::new(vec![1.0, 0.5], vec![3.0, 2.0], vec![1.0, 1.0]).unwrap();
        let bids = MatrixBidProfile::zeros(2);
        let devs = candidate_deviations_egfp(&Rules::default(), &inst, &bids, 0, 3.0);
        assert_eq!(devs[0].required_bid, 0.0);
        assert_eq!(devs[0].deviation_utility, 3.0);
        // with zero bids player 1 takes position 1 before position 2 opens
        assert!(!devs[1].feasible);
        assert_eq!(devs[1].required_bid, f64::INFINITY);
        // player 2 reaches position 2 for free, position 1 only strictly above 0
        let devs = candidate_deviations_egfp(&Rules::default(), &inst, &bids, 1, 1.0);
        assert!(devs[0].strict && devs[0].feasible);
        assert_eq!(devs[1].required_bid, 0.0);
        assert!(!devs[1].strict);
    }

    #[test]
    fn egfp_own_position_gains_overbid_margin() {
        let inst = Instance::new(vec![1.0, 0.5], vec![3.0, 2.0], vec![5.0, 5.0]).unwrap();
        let bids = MatrixBidProfile::new(vec![vec![1.5, 0.0], vec![1.0, 0.0]]).unwrap();
        let cur = egfp_outcome(&inst, &bids).utilities[0];
        let devs = candidate_deviations_egfp(&Rules::default(), &inst, &bids, 0, cur);
        assert!((devs[0].gain - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gains_over_extended_reals() {
        assert_eq!(ext_gain(f64::NEG_INFINITY, f64::NEG_INFINITY), 0.0);
        assert_eq!(ext_gain(f64::NEG_INFINITY, 1.0), f64::INFINITY);
        assert_eq!(ext_gain(1.0, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }
}
