//! Allocation, payment and utility rules for GSP, VCG and EGFP.
//!
//! Payments are totals (per-click price times CTR). A player whose payment
//! exceeds its budget gets utility `f64::NEG_INFINITY`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    rank_by_bids, Assignment, BidProfile, Instance, MatrixBidProfile, ScalarBidProfile,
};

/// Default relative tolerance for `payment <= budget`.
pub const DEFAULT_BUDGET_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MechanismId {
    Gsp,
    Vcg,
    Egfp,
}

impl MechanismId {
    pub const ALL: [MechanismId; 3] = [MechanismId::Gsp, MechanismId::Vcg, MechanismId::Egfp];

    pub fn name(self) -> &'static str {
        match self {
            MechanismId::Gsp => "GSP",
            MechanismId::Vcg => "VCG",
            MechanismId::Egfp => "EGFP",
        }
    }

    /// GSP and VCG take one scalar bid per player.
    pub fn is_scalar(self) -> bool {
        !matches!(self, MechanismId::Egfp)
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gsp" => Ok(MechanismId::Gsp),
            "vcg" => Ok(MechanismId::Vcg),
            "egfp" => Ok(MechanismId::Egfp),
            other => Err(Error::Parse(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// Result of running a mechanism on a bid profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OutcomeWire", into = "OutcomeWire")]
pub struct Outcome {
    pub assignment: Assignment,
    pub payments: Vec<f64>,
    pub utilities: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct OutcomeWire {
    #[serde(with = "crate::ext_real::one_based")]
    sigma: Vec<usize>,
    payments: Vec<f64>,
    #[serde(with = "crate::ext_real::vec")]
    utilities: Vec<f64>,
}

impl From<Outcome> for OutcomeWire {
    fn from(o: Outcome) -> Self {
        OutcomeWire {
            sigma: o.assignment.sigma().to_vec(),
            payments: o.payments,
            utilities: o.utilities,
        }
    }
}

impl TryFrom<OutcomeWire> for Outcome {
    type Error = Error;

    fn try_from(w: OutcomeWire) -> Result<Self> {
        Ok(Outcome {
            assignment: Assignment::from_sigma(w.sigma)?,
            payments: w.payments,
            utilities: w.utilities,
        })
    }
}

impl Outcome {
    pub fn position_of(&self, player: usize) -> usize {
        self.assignment.position_of(player)
    }

    pub fn utility(&self, player: usize) -> f64 {
        self.utilities[player]
    }
}

/// Mechanism rules with a configurable budget-feasibility tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rules {
    /// `payment <= budget * (1 + budget_rel_tol)` counts as within budget.
    pub budget_rel_tol: f64,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            budget_rel_tol: DEFAULT_BUDGET_REL_TOL,
        }
    }
}

impl Rules {
    pub fn within_budget(&self, payment: f64, budget: f64) -> bool {
        payment <= budget * (1.0 + self.budget_rel_tol)
    }

    /// Quasi-linear utility with the budget cutoff.
    pub fn utility(&self, inst: &Instance, player: usize, position: usize, payment: f64) -> f64 {
        if self.within_budget(payment, inst.budget(player)) {
            inst.value(player, position) - payment
        } else {
            f64::NEG_INFINITY
        }
    }

    /// No-overbidding and no-overbudgeting for a bid `bid` placed at a
    /// position with CTR `ctr`.
    pub fn no_over_ok(&self, ctr: f64, bid: f64, valuation: f64, budget: f64) -> bool {
        ctr * bid <= ctr * valuation && self.within_budget(ctr * bid, budget)
    }

    fn finish(&self, inst: &Instance, assignment: Assignment, payments: Vec<f64>) -> Outcome {
        let utilities = (0..inst.n())
            .map(|i| self.utility(inst, i, assignment.position_of(i), payments[i]))
            .collect();
        Outcome {
            assignment,
            payments,
            utilities,
        }
    }

    pub fn gsp(&self, inst: &Instance, bids: &ScalarBidProfile) -> Outcome {
        let assignment = rank_by_bids(bids);
        let n = inst.n();
        let mut payments = vec![0.0; n];
        for r in 0..n {
            let next = if r + 1 < n {
                bids.bid(assignment.player_at(r + 1))
            } else {
                0.0
            };
            payments[assignment.player_at(r)] = inst.ctr(r) * next;
        }
        self.finish(inst, assignment, payments)
    }

    pub fn vcg(&self, inst: &Instance, bids: &ScalarBidProfile) -> Outcome {
        let assignment = rank_by_bids(bids);
        let n = inst.n();
        let below: Vec<f64> = assignment.pi().iter().map(|&i| bids.bid(i)).collect();
        let mut payments = vec![0.0; n];
        for r in 0..n {
            payments[assignment.player_at(r)] = vcg_externality(inst.ctrs(), r, |j| below[j]);
        }
        self.finish(inst, assignment, payments)
    }

    pub fn egfp(&self, inst: &Instance, bids: &MatrixBidProfile) -> Outcome {
        let n = inst.n();
        let pi = egfp_allocate(bids, n, None);
        let assignment = Assignment::from_pi(pi).expect("sequential allocation is a permutation");
        let payments = (0..n)
            .map(|i| bids.bid(i, assignment.position_of(i)))
            .collect();
        self.finish(inst, assignment, payments)
    }

    pub fn outcome(
        &self,
        mech: MechanismId,
        inst: &Instance,
        bids: &BidProfile,
    ) -> Result<Outcome> {
        bids_len_ok(inst, bids)?;
        match (mech, bids) {
            (MechanismId::Gsp, BidProfile::Scalar(b)) => Ok(self.gsp(inst, b)),
            (MechanismId::Vcg, BidProfile::Scalar(b)) => Ok(self.vcg(inst, b)),
            (MechanismId::Egfp, BidProfile::Matrix(b)) => Ok(self.egfp(inst, b)),
            (m, _) => Err(Error::ProfileShapeMismatch {
                mechanism: m.name(),
                expected: if m.is_scalar() { "scalar" } else { "matrix" },
            }),
        }
    }

    pub fn check_no_over(&self, inst: &Instance, bids: &ScalarBidProfile) -> Vec<bool> {
        let assignment = rank_by_bids(bids);
        (0..inst.n())
            .map(|i| {
                let ctr = inst.ctr(assignment.position_of(i));
                self.no_over_ok(ctr, bids.bid(i), inst.valuation(i), inst.budget(i))
            })
            .collect()
    }
}

fn bids_len_ok(inst: &Instance, bids: &BidProfile) -> Result<()> {
    match bids {
        BidProfile::Scalar(b) => b.check_len(inst.n()),
        BidProfile::Matrix(b) => b.check_len(inst.n()),
    }
}

/// VCG payment for rank `r`: `Σ_{j>r} bid_at(j) · (α_{j-1} − α_j)`, where
/// `bid_at(j)` is the bid of whoever occupies rank `j`.
///
/// Terms are summed in increasing `j`; deviation analysis relies on this
/// order to reproduce payments bit for bit.
pub(crate) fn vcg_externality(ctrs: &[f64], r: usize, bid_at: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    for j in r + 1..ctrs.len() {
        sum += bid_at(j) * (ctrs[j - 1] - ctrs[j]);
    }
    sum
}

/// Sequential EGFP allocation. Returns `pi` (position → player).
///
/// With `exclude = Some(i)`, player `i` does not take part and the returned
/// vector has `n - 1` entries.
pub(crate) fn egfp_allocate(bids: &MatrixBidProfile, n: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut taken = vec![false; n];
    if let Some(i) = exclude {
        taken[i] = true;
    }
    let mut pi = Vec::with_capacity(n);
    for j in 0..n {
        let Some(winner) = egfp_step_winner(bids, j, &taken) else {
            break;
        };
        taken[winner] = true;
        pi.push(winner);
    }
    pi
}

/// Highest bidder for position `j` among players not yet `taken`; ties go to
/// the lower index.
pub(crate) fn egfp_step_winner(bids: &MatrixBidProfile, j: usize, taken: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &t) in taken.iter().enumerate() {
        if t {
            continue;
        }
        match best {
            Some(b) if bids.bid(k, j) <= bids.bid(b, j) => {}
            _ => best = Some(k),
        }
    }
    best
}

pub fn gsp_outcome(inst: &Instance, bids: &ScalarBidProfile) -> Outcome {
    Rules::default().gsp(inst, bids)
}

pub fn vcg_outcome(inst: &Instance, bids: &ScalarBidProfile) -> Outcome {
    Rules::default().vcg(inst, bids)
}

pub fn egfp_outcome(inst: &Instance, bids: &MatrixBidProfile) -> Outcome {
    Rules::default().egfp(inst, bids)
}

/// Dispatches on the mechanism; the profile shape must match.
pub fn outcome(mech: MechanismId, inst: &Instance, bids: &BidProfile) -> Result<Outcome> {
    Rules::default().outcome(mech, inst, bids)
}

/// Per-player no-over flags at the positions induced by `bids`.
pub fn check_no_over(inst: &Instance, bids: &ScalarBidProfile) -> Vec<bool> {
    Rules::default().check_no_over(inst, bids)
}
