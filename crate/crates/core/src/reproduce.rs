//! One-shot reproduction of the two-player lower-bound family: the
//! welfare-inferior assignment (1,2) is supported by an equilibrium while
//! no equilibrium induces the optimal assignment (2,1).

use serde::{Deserialize, Serialize};

use crate::equilibrium::{enumerate_equilibria, verify_equilibrium, EquilibriumConfig, EquilibriumReport, GridSpec};
use crate::error::Result;
use crate::instances::{gen_theorem1, Theorem1Params};
use crate::mechanisms::MechanismId;
use crate::model::{BidProfile, Instance};
use crate::welfare::optimal_assignment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub mechanism: MechanismId,
    pub params: Theorem1Params,
    /// EGFP overbid `δ` of the fixture; unused for GSP/VCG.
    pub delta: f64,
    pub theta: f64,
    pub instance: Instance,
    pub fixture: EquilibriumReport,
    pub grid: GridSpec,
    pub equilibria_found: usize,
    /// Grid equilibria inducing the optimal assignment (2,1).
    pub optimal_assignment_equilibria: usize,
    pub opt_lw: f64,
    /// `opt_lw / LW(fixture)`.
    pub ratio: f64,
    /// `2λ / ((1+ε)λ + 1)`.
    pub closed_form_ratio: f64,
    pub fixture_ok: bool,
    pub no_optimal_equilibrium: bool,
    pub ratio_ok: bool,
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.fixture_ok && self.no_optimal_equilibrium && self.ratio_ok
    }
}

/// Tolerance on `|ratio − 2λ/((1+ε)λ+1)|`.
pub const RATIO_TOL: f64 = 1e-9;

/// Builds the instance, verifies the fixture profile, searches the grid for
/// equilibria inducing (2,1) and compares the welfare ratio with its closed
/// form. `theta` defaults to 0 for GSP/VCG and to `delta` for EGFP.
pub fn reproduce_theorem1(
    mech: MechanismId,
    params: Theorem1Params,
    delta: f64,
    theta: Option<f64>,
    levels_per_player: usize,
) -> Result<Theorem1Report> {
    let inst = gen_theorem1(params)?;
    let theta = theta.unwrap_or(if mech.is_scalar() { 0.0 } else { delta });
    let cfg = EquilibriumConfig::new(theta);
    let profile = if mech.is_scalar() {
        BidProfile::Scalar(params.scalar_fixture())
    } else {
        BidProfile::Matrix(params.egfp_fixture(delta)?)
    };
    let fixture = verify_equilibrium(mech, &inst, &profile, &cfg)?;
    let grid = GridSpec {
        levels_per_player,
        theta,
    };
    let eqs = enumerate_equilibria(mech, &inst, &grid)?;
    let optimal_assignment_equilibria = eqs
        .iter()
        .filter(|e| e.outcome.assignment.sigma() == [1, 0])
        .count();
    let (_, opt_lw) = optimal_assignment(&inst);
    let ratio = opt_lw / fixture.lw;
    let closed_form_ratio = params.ratio();
    Ok(Theorem1Report {
        mechanism: mech,
        params,
        delta,
        theta,
        fixture_ok: fixture.is_equilibrium && fixture.outcome.assignment.sigma() == [0, 1],
        instance: inst,
        fixture,
        grid,
        equilibria_found: eqs.len(),
        no_optimal_equilibrium: optimal_assignment_equilibria == 0,
        optimal_assignment_equilibria,
        opt_lw,
        ratio,
        closed_form_ratio,
        ratio_ok: (ratio - closed_form_ratio).abs() <= RATIO_TOL,
    })
}
