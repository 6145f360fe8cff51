//! Position-game instances, bid profiles and assignments.
//!
//! Players and positions are zero-based everywhere in the API. Anything that
//! is rendered for people (tables, JSON, error messages) is one-based.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A position game with as many players as positions.
///
/// `ctrs[j]` is the click-through rate of position `j`, `valuations[i]` the
/// value per click of player `i`, `budgets[i]` the cap on player `i`'s total
/// payment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    ctrs: Vec<f64>,
    valuations: Vec<f64>,
    budgets: Vec<f64>,
}

/// Unvalidated instance data, as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub ctrs: Vec<f64>,
    pub valuations: Vec<f64>,
    pub budgets: Vec<f64>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        validate_instance(raw)
    }
}

/// Checks lengths, positivity and CTR ordering. Values are stored as given.
pub fn validate_instance(raw: RawInstance) -> Result<Instance> {
    let n = raw.ctrs.len();
    if raw.valuations.len() != n || raw.budgets.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} ctrs, {} valuations, {} budgets",
            n,
            raw.valuations.len(),
            raw.budgets.len()
        )));
    }
    if n == 0 {
        return Err(Error::Empty);
    }
    for (field, xs) in [
        ("ctrs", &raw.ctrs),
        ("valuations", &raw.valuations),
        ("budgets", &raw.budgets),
    ] {
        if let Some((index, &value)) = xs
            .iter()
            .enumerate()
            .find(|(_, &x)| !(x.is_finite() && x > 0.0))
        {
            return Err(Error::NonPositiveEntry {
                field,
                index: index + 1,
                value,
            });
        }
    }
    if let Some(j) = raw.ctrs.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::CtrsNotSorted { index: j + 1 });
    }
    Ok(Instance {
        ctrs: raw.ctrs,
        valuations: raw.valuations,
        budgets: raw.budgets,
    })
}

impl Instance {
    pub fn new(ctrs: Vec<f64>, valuations: Vec<f64>, budgets: Vec<f64>) -> Result<Self> {
        validate_instance(RawInstance {
            ctrs,
            valuations,
            budgets,
        })
    }

    pub fn n(&self) -> usize {
        self.ctrs.len()
    }

    pub fn ctrs(&self) -> &[f64] {
        &self.ctrs
    }

    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn ctr(&self, position: usize) -> f64 {
        self.ctrs[position]
    }

    pub fn valuation(&self, player: usize) -> f64 {
        self.valuations[player]
    }

    pub fn budget(&self, player: usize) -> f64 {
        self.budgets[player]
    }

    /// Player `i`'s value for position `j`, `α_j · v_i`.
    pub fn value(&self, player: usize, position: usize) -> f64 {
        self.ctrs[position] * self.valuations[player]
    }

    /// Player `i`'s value for position `j` capped at its budget.
    pub fn capped_value(&self, player: usize, position: usize) -> f64 {
        self.value(player, position).min(self.budgets[player])
    }

    /// Same instance with every budget replaced.
    pub fn with_budgets(&self, budgets: Vec<f64>) -> Result<Self> {
        Instance::new(self.ctrs.clone(), self.valuations.clone(), budgets)
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            ctrs: self.ctrs.clone(),
            valuations: self.valuations.clone(),
            budgets: self.budgets.clone(),
        }
    }
}

fn check_bid(value: f64, location: impl FnOnce() -> String) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBid {
            location: location(),
            value,
        })
    }
}

/// One scalar bid per player (GSP, VCG).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScalarBidProfile {
    bids: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ScalarBidProfile {
    type Error = Error;

    fn try_from(bids: Vec<f64>) -> Result<Self> {
        ScalarBidProfile::new(bids)
    }
}

impl From<ScalarBidProfile> for Vec<f64> {
    fn from(p: ScalarBidProfile) -> Self {
        p.bids
    }
}

impl ScalarBidProfile {
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        for (i, &b) in bids.iter().enumerate() {
            check_bid(b, || format!("player {}", i + 1))?;
        }
        Ok(ScalarBidProfile { bids })
    }

    /// Validates the profile against an instance size.
    pub fn for_instance(bids: Vec<f64>, inst: &Instance) -> Result<Self> {
        let p = Self::new(bids)?;
        p.check_len(inst.n())?;
        Ok(p)
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.bids.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch(format!(
                "{} bids for {} players",
                self.bids.len(),
                n
            )))
        }
    }

    pub fn zeros(n: usize) -> Self {
        ScalarBidProfile { bids: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn bid(&self, player: usize) -> f64 {
        self.bids[player]
    }

    /// Copy of the profile where `player` bids `bid` instead.
    pub fn with_bid(&self, player: usize, bid: f64) -> Result<Self> {
        check_bid(bid, || format!("player {}", player + 1))?;
        let mut bids = self.bids.clone();
        bids[player] = bid;
        Ok(ScalarBidProfile { bids })
    }
}

/// Per-player, per-position bids (EGFP). Entry `(i, j)` is player `i`'s bid
/// for position `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct MatrixBidProfile {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for MatrixBidProfile {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        MatrixBidProfile::new(rows)
    }
}

impl From<MatrixBidProfile> for Vec<Vec<f64>> {
    fn from(p: MatrixBidProfile) -> Self {
        p.rows
    }
}

impl MatrixBidProfile {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch(format!(
                    "bid matrix row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    n
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                check_bid(b, || format!("player {}, position {}", i + 1, j + 1))?;
            }
        }
        Ok(MatrixBidProfile { rows })
    }

    pub fn for_instance(rows: Vec<Vec<f64>>, inst: &Instance) -> Result<Self> {
        let p = Self::new(rows)?;
        p.check_len(inst.n())?;
        Ok(p)
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.rows.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch(format!(
                "{}x{} bid matrix for {} players",
                self.rows.len(),
                self.rows.len(),
                n
            )))
        }
    }

    pub fn zeros(n: usize) -> Self {
        MatrixBidProfile {
            rows: vec![vec![0.0; n]; n],
        }
    }

    /// Every player bids on a single position: `choices[i] = Some((j, b))`
    /// puts bid `b` on position `j` and zero elsewhere.
    pub fn single_position(n: usize, choices: &[Option<(usize, f64)>]) -> Result<Self> {
        let mut rows = vec![vec![0.0; n]; n];
        for (i, choice) in choices.iter().enumerate() {
            if let Some((j, b)) = *choice {
                rows[i][j] = b;
            }
        }
        Self::new(rows)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, player: usize) -> &[f64] {
        &self.rows[player]
    }

    pub fn bid(&self, player: usize, position: usize) -> f64 {
        self.rows[player][position]
    }

    pub fn with_row(&self, player: usize, row: Vec<f64>) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows[player] = row;
        Self::new(rows)
    }

    pub fn with_bid(&self, player: usize, position: usize, bid: f64) -> Result<Self> {
        check_bid(bid, || {
            format!("player {}, position {}", player + 1, position + 1)
        })?;
        let mut rows = self.rows.clone();
        rows[player][position] = bid;
        Ok(MatrixBidProfile { rows })
    }
}

/// Either shape of bid profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BidProfile {
    Scalar(ScalarBidProfile),
    Matrix(MatrixBidProfile),
}

impl BidProfile {
    pub fn len(&self) -> usize {
        match self {
            BidProfile::Scalar(p) => p.len(),
            BidProfile::Matrix(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The bid player `i` submitted for `position`: its scalar bid for
    /// scalar profiles, matrix entry otherwise.
    pub fn bid_for(&self, player: usize, position: usize) -> f64 {
        match self {
            BidProfile::Scalar(p) => p.bid(player),
            BidProfile::Matrix(p) => p.bid(player, position),
        }
    }
}

impl From<ScalarBidProfile> for BidProfile {
    fn from(p: ScalarBidProfile) -> Self {
        BidProfile::Scalar(p)
    }
}

impl From<MatrixBidProfile> for BidProfile {
    fn from(p: MatrixBidProfile) -> Self {
        BidProfile::Matrix(p)
    }
}

/// A bijection between players and positions.
///
/// `sigma[i]` is the position of player `i`; `pi[j]` the player in
/// position `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAssignment")]
pub struct Assignment {
    #[serde(with = "crate::ext_real::one_based")]
    sigma: Vec<usize>,
    #[serde(with = "crate::ext_real::one_based")]
    pi: Vec<usize>,
}

#[derive(Deserialize)]
struct RawAssignment {
    #[serde(with = "crate::ext_real::one_based")]
    sigma: Vec<usize>,
}

impl TryFrom<RawAssignment> for Assignment {
    type Error = Error;

    fn try_from(raw: RawAssignment) -> Result<Self> {
        Assignment::from_sigma(raw.sigma)
    }
}

impl Assignment {
    pub fn from_sigma(sigma: Vec<usize>) -> Result<Self> {
        let pi = invert(&sigma)?;
        Ok(Assignment { sigma, pi })
    }

    pub fn from_pi(pi: Vec<usize>) -> Result<Self> {
        let sigma = invert(&pi)?;
        Ok(Assignment { sigma, pi })
    }

    pub fn identity(n: usize) -> Self {
        Assignment {
            sigma: (0..n).collect(),
            pi: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn position_of(&self, player: usize) -> usize {
        self.sigma[player]
    }

    pub fn player_at(&self, position: usize) -> usize {
        self.pi[position]
    }

    /// Positions as printed for people, starting at 1.
    pub fn sigma_one_based(&self) -> Vec<usize> {
        self.sigma.iter().map(|j| j + 1).collect()
    }
}

fn invert(perm: &[usize]) -> Result<Vec<usize>> {
    let n = perm.len();
    let mut inv = vec![usize::MAX; n];
    for (i, &j) in perm.iter().enumerate() {
        if j >= n || inv[j] != usize::MAX {
            return Err(Error::Parse(format!(
                "{:?} is not a permutation of 1..={n}",
                perm.iter().map(|x| x + 1).collect::<Vec<_>>()
            )));
        }
        inv[j] = i;
    }
    Ok(inv)
}

/// Total order used to rank players by bid: higher bid first, then lower
/// player index.
pub fn bid_order(bids: &[f64], a: usize, b: usize) -> Ordering {
    bids[b].total_cmp(&bids[a]).then(a.cmp(&b))
}

/// Greedy ranking by scalar bid, ties broken toward the lower player index.
pub fn rank_by_bids(bids: &ScalarBidProfile) -> Assignment {
    let b = bids.bids();
    let mut pi: Vec<usize> = (0..b.len()).collect();
    pi.sort_by(|&x, &y| bid_order(b, x, y));
    let mut sigma = vec![0; b.len()];
    for (j, &i) in pi.iter().enumerate() {
        sigma[i] = j;
    }
    Assignment { sigma, pi }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(ctrs: &[f64], v: &[f64], c: &[f64]) -> RawInstance {
        RawInstance {
            ctrs: ctrs.to_vec(),
            valuations: v.to_vec(),
            budgets: c.to_vec(),
        }
    }

    #[test]
    fn accepts_lower_bound_instance() {
        let inst = validate_instance(raw(&[1.0, 0.01], &[100.0, 1.0], &[1.01, 1.0])).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.budgets(), &[1.01, 1.0]);
    }

    #[test]
    fn rejects_unsorted_ctrs() {
        let err = validate_instance(raw(&[0.5, 1.0], &[1.0, 1.0], &[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::CtrsNotSorted { index: 1 }));
    }

    #[test]
    fn rejects_length_mismatch() {
        let err = validate_instance(raw(&[1.0], &[1.0, 2.0], &[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch(_)));
    }

    #[test]
    fn rejects_non_positive_and_non_finite() {
        let err = validate_instance(raw(&[1.0, 0.0], &[1.0, 1.0], &[1.0, 1.0])).unwrap_err();
        assert!(matches!(
            err,
            Error::NonPositiveEntry {
                field: "ctrs",
                index: 2,
                ..
            }
        ));
        let err =
            validate_instance(raw(&[1.0], &[f64::INFINITY], &[1.0])).unwrap_err();
        assert!(matches!(err, Error::NonPositiveEntry { field: "valuations", .. }));
        let err = validate_instance(raw(&[1.0], &[1.0], &[f64::NAN])).unwrap_err();
        assert!(matches!(err, Error::NonPositiveEntry { field: "budgets", .. }));
        assert!(matches!(
            validate_instance(raw(&[], &[], &[])).unwrap_err(),
            Error::Empty
        ));
    }

    #[test]
    fn ctr_ties_are_allowed() {
        assert!(validate_instance(raw(&[1.0, 1.0], &[1.0, 2.0], &[1.0, 1.0])).is_ok());
    }

    #[test]
    fn ranking_examples() {
        let a = rank_by_bids(&ScalarBidProfile::new(vec![1.01, 1.0]).unwrap());
        assert_eq!(a.sigma(), &[0, 1]);
        let a = rank_by_bids(&ScalarBidProfile::new(vec![0.0, 0.0]).unwrap());
        assert_eq!(a.sigma(), &[0, 1]);
        let a = rank_by_bids(&ScalarBidProfile::new(vec![2.0, 5.0, 3.0]).unwrap());
        assert_eq!(a.sigma_one_based(), vec![3, 1, 2]);
        assert_eq!(a.pi(), &[1, 2, 0]);
    }

    #[test]
    fn bids_must_be_finite_non_negative() {
        assert!(ScalarBidProfile::new(vec![1.0, -0.1]).is_err());
        assert!(ScalarBidProfile::new(vec![f64::NAN]).is_err());
        assert!(MatrixBidProfile::new(vec![vec![1.0, 0.0], vec![0.0]]).is_err());
        assert!(MatrixBidProfile::new(vec![vec![1.0, f64::INFINITY], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn assignment_validation() {
        assert!(Assignment::from_sigma(vec![0, 0]).is_err());
        assert!(Assignment::from_sigma(vec![0, 2]).is_err());
        let a = Assignment::from_sigma(vec![2, 0, 1]).unwrap();
        assert_eq!(a.pi(), &[1, 2, 0]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"sigma":[3,1,2],"pi":[2,3,1]}"#);
        let back: Assignment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn instance_json_schema() {
        let inst: Instance =
            serde_json::from_str(r#"{"ctrs":[1,0.01],"valuations":[100,1],"budgets":[1.01,1]}"#)
                .unwrap();
        assert_eq!(inst.valuations(), &[100.0, 1.0]);
        let bad = serde_json::from_str::<Instance>(
            r#"{"ctrs":[0.5,1],"valuations":[1,1],"budgets":[1,1]}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn untagged_profile_shapes() {
        let p: BidProfile = serde_json::from_str("[1.01, 1]").unwrap();
        assert!(matches!(p, BidProfile::Scalar(_)));
        let p: BidProfile = serde_json::from_str("[[1.001, 0], [1, 0]]").unwrap();
        assert!(matches!(p, BidProfile::Matrix(_)));
    }
}
