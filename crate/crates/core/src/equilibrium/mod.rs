//! Pure Nash equilibria: exact best responses, verification, grid
//! enumeration and liquid price of anarchy / stability.
//!
//! GSP and VCG are analysed on the no-over strategy space: profiles must
//! satisfy it, and deviations violating it are infeasible. EGFP best
//! responses are generally suprema, so EGFP equilibria are θ-equilibria.

mod bound;
mod deviations;
mod grid;

pub use bound::{check_liquid_welfare_bound, BoundCheck};
pub use deviations::{
    best_feasible, candidate_deviations_egfp, candidate_deviations_scalar, ext_gain,
    DeviationReport,
};
pub use grid::{
    egfp_levels, enumerate_equilibria, lpoa_from_equilibria, lpoa_report, scalar_levels,
    GridSpec, LpoaReport, EGFP_MAX_N, SCALAR_MAX_N,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{MechanismId, Outcome, Rules};
use crate::model::{BidProfile, Instance, MatrixBidProfile, ScalarBidProfile};
use crate::welfare::liquid_welfare;

/// Default θ for EGFP.
pub const DEFAULT_EGFP_THETA: f64 = 1e-9;

/// Gains up to this fraction of the utilities involved (floored at 1) are
/// treated as rounding noise on top of θ.
pub const GAIN_REL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumConfig {
    /// A profile is an equilibrium when no feasible deviation gains more.
    pub theta: f64,
    pub rules: Rules,
}

impl EquilibriumConfig {
    pub fn new(theta: f64) -> Self {
        EquilibriumConfig {
            theta,
            rules: Rules::default(),
        }
    }

    /// θ = 0 for GSP/VCG, [`DEFAULT_EGFP_THETA`] for EGFP.
    pub fn for_mechanism(mech: MechanismId) -> Self {
        Self::new(if mech.is_scalar() { 0.0 } else { DEFAULT_EGFP_THETA })
    }

    pub(crate) fn tolerates(&self, current: f64, dev: &DeviationReport) -> bool {
        if dev.gain <= self.theta {
            return true;
        }
        let scale = current.abs().max(dev.deviation_utility.abs()).max(1.0);
        dev.gain <= self.theta + GAIN_REL_SLACK * scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub mechanism: MechanismId,
    pub profile: BidProfile,
    pub is_equilibrium: bool,
    pub theta: f64,
    pub outcome: Outcome,
    pub lw: f64,
    /// Each player's highest-gain feasible deviation.
    pub best_deviations: Vec<Option<DeviationReport>>,
}

impl EquilibriumReport {
    /// Players (zero-based) with a feasible deviation gaining more than θ.
    pub fn unstable_players(&self) -> Vec<usize> {
        let cfg = EquilibriumConfig::new(self.theta);
        self.best_deviations
            .iter()
            .enumerate()
            .filter_map(|(i, d)| match d {
                Some(d) if !cfg.tolerates(self.outcome.utilities[i], d) => Some(i),
                _ => None,
            })
            .collect()
    }

    /// The deviation with the largest gain over all players.
    pub fn most_profitable(&self) -> Option<&DeviationReport> {
        self.best_deviations
            .iter()
            .flatten()
            .fold(None, |best: Option<&DeviationReport>, d| match best {
                Some(b) if d.gain <= b.gain => Some(b),
                _ => Some(d),
            })
    }
}

/// All candidate deviations of `player` against `bids`.
pub fn candidate_deviations(
    mech: MechanismId,
    inst: &Instance,
    bids: &BidProfile,
    player: usize,
    cfg: &EquilibriumConfig,
) -> Result<Vec<DeviationReport>> {
    let outcome = cfg.rules.outcome(mech, inst, bids)?;
    let current = outcome.utilities[player];
    Ok(match bids {
        BidProfile::Scalar(b) => {
            candidate_deviations_scalar(&cfg.rules, mech, inst, b, player, current)
        }
        BidProfile::Matrix(b) => candidate_deviations_egfp(&cfg.rules, inst, b, player, current),
    })
}

/// Players (one-based) whose bids break the no-over assumption.
fn no_over_violators(rules: &Rules, inst: &Instance, bids: &ScalarBidProfile) -> Vec<usize> {
    rules
        .check_no_over(inst, bids)
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Checks the pure-equilibrium condition against every exact deviation.
pub fn verify_equilibrium(
    mech: MechanismId,
    inst: &Instance,
    bids: &BidProfile,
    cfg: &EquilibriumConfig,
) -> Result<EquilibriumReport> {
    let outcome = cfg.rules.outcome(mech, inst, bids)?;
    if let BidProfile::Scalar(b) = bids {
        let players = no_over_violators(&cfg.rules, inst, b);
        if !players.is_empty() {
            return Err(Error::ProfileNotNoOverCompliant { players });
        }
    }
    let best_deviations: Vec<Option<DeviationReport>> = (0..inst.n())
        .map(|i| {
            let current = outcome.utilities[i];
            let devs = match bids {
                BidProfile::Scalar(b) => {
                    candidate_deviations_scalar(&cfg.rules, mech, inst, b, i, current)
                }
                BidProfile::Matrix(b) => {
                    candidate_deviations_egfp(&cfg.rules, inst, b, i, current)
                }
            };
            best_feasible(&devs).cloned()
        })
        .collect();
    let is_equilibrium = best_deviations
        .iter()
        .enumerate()
        .all(|(i, d)| d.as_ref().is_none_or(|d| cfg.tolerates(outcome.utilities[i], d)));
    let lw = liquid_welfare(inst, &outcome.assignment);
    Ok(EquilibriumReport {
        mechanism: mech,
        profile: bids.clone(),
        is_equilibrium,
        theta: cfg.theta,
        outcome,
        lw,
        best_deviations,
    })
}

/// Equilibrium test with early exit and no report; profiles outside the
/// no-over space are rejected.
pub(crate) fn is_equilibrium_scalar(
    mech: MechanismId,
    inst: &Instance,
    bids: &ScalarBidProfile,
    cfg: &EquilibriumConfig,
) -> bool {
    if !cfg.rules.check_no_over(inst, bids).iter().all(|&ok| ok) {
        return false;
    }
    let outcome = match mech {
        MechanismId::Gsp => cfg.rules.gsp(inst, bids),
        _ => cfg.rules.vcg(inst, bids),
    };
    (0..inst.n()).all(|i| {
        let current = outcome.utilities[i];
        candidate_deviations_scalar(&cfg.rules, mech, inst, bids, i, current)
            .iter()
            .filter(|d| d.feasible)
            .all(|d| cfg.tolerates(current, d))
    })
}

pub(crate) fn is_equilibrium_egfp(
    inst: &Instance,
    bids: &MatrixBidProfile,
    cfg: &EquilibriumConfig,
) -> bool {
    let outcome = cfg.rules.egfp(inst, bids);
    (0..inst.n()).all(|i| {
        let current = outcome.utilities[i];
        candidate_deviations_egfp(&cfg.rules, inst, bids, i, current)
            .iter()
            .filter(|d| d.feasible)
            .all(|d| cfg.tolerates(current, d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_theorem1, Theorem1Params};

    fn lb() -> (Theorem1Params, Instance) {
        let p = Theorem1Params::new(100.0, 0.01).unwrap();
        (p, gen_theorem1(p).unwrap())
    }

    #[test]
    fn gsp_fixture_is_an_equilibrium() {
        let (p, inst) = lb();
        let bids = BidProfile::Scalar(p.scalar_fixture());
        let r = verify_equilibrium(MechanismId::Gsp, &inst, &bids, &EquilibriumConfig::new(0.0))
            .unwrap();
        assert!(r.is_equilibrium);
        assert!(r.unstable_players().is_empty());
    }

    #[test]
    fn gsp_reverse_assignment_is_not() {
        let (_, inst) = lb();
        for (b1, b2) in [(0.0, 0.0), (0.3, 0.9), (1.0, 1.0), (0.2, 0.2)] {
            let bids = ScalarBidProfile::new(vec![b1, b2]).unwrap();
            // (1,1) ties in favour of player 1, so skip profiles that do not induce (2,1)
            if crate::model::rank_by_bids(&bids).sigma() != [1, 0] {
                continue;
            }
            let r = verify_equilibrium(
                MechanismId::Gsp,
                &inst,
                &BidProfile::Scalar(bids),
                &EquilibriumConfig::new(0.0),
            )
            .unwrap();
            assert!(!r.is_equilibrium);
            let d = r.most_profitable().unwrap();
            assert_eq!((d.player, d.target), (0, 0));
            assert!(d.gain >= 98.0);
        }
    }

    #[test]
    fn egfp_fixture_is_a_theta_equilibrium() {
        let (p, inst) = lb();
        let bids = BidProfile::Matrix(p.egfp_fixture(0.001).unwrap());
        let r = verify_equilibrium(MechanismId::Egfp, &inst, &bids, &EquilibriumConfig::new(0.01))
            .unwrap();
        assert!(r.is_equilibrium);
        // not an exact equilibrium: player 1 could shave δ off its bid
        let r = verify_equilibrium(MechanismId::Egfp, &inst, &bids, &EquilibriumConfig::new(0.0))
            .unwrap();
        assert!(!r.is_equilibrium);
        assert_eq!(r.unstable_players(), vec![0]);
    }

    #[test]
    fn no_over_violations_are_rejected() {
        let (_, inst) = lb();
        let bids = BidProfile::Scalar(ScalarBidProfile::new(vec![2.0, 1.0]).unwrap());
        match verify_equilibrium(MechanismId::Vcg, &inst, &bids, &EquilibriumConfig::new(0.0)) {
            Err(Error::ProfileNotNoOverCompliant { players }) => assert_eq!(players, vec![1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fast_path_agrees_with_report() {
        let (p, inst) = lb();
        let cfg = EquilibriumConfig::new(0.0);
        for bids in [vec![1.01, 1.0], vec![0.5, 1.0], vec![1.0, 0.2], vec![0.0, 0.0]] {
            let b = ScalarBidProfile::new(bids).unwrap();
            for mech in [MechanismId::Gsp, MechanismId::Vcg] {
                let slow = verify_equilibrium(mech, &inst, &BidProfile::Scalar(b.clone()), &cfg)
                    .map(|r| r.is_equilibrium)
                    .unwrap_or(false);
                assert_eq!(slow, is_equilibrium_scalar(mech, &inst, &b, &cfg));
            }
        }
        let m = p.egfp_fixture(0.001).unwrap();
        let cfg = EquilibriumConfig::new(0.01);
        assert!(is_equilibrium_egfp(&inst, &m, &cfg));
    }

    #[test]
    fn report_json_round_trip() {
        let (p, inst) = lb();
        let bids = BidProfile::Scalar(p.scalar_fixture());
        let r = verify_equilibrium(MechanismId::Vcg, &inst, &bids, &EquilibriumConfig::new(0.0))
            .unwrap();
        let line = serde_json::to_string(&r).unwrap();
        assert!(!line.contains('\n'));
        let back: EquilibriumReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }
}
