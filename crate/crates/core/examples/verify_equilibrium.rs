// Exact equilibrium checks and the deviations that break a profile.

use posauction::equilibrium::{verify_equilibrium, EquilibriumConfig, EquilibriumReport};
use posauction::instances::{gen_theorem1, Theorem1Params};
use posauction::mechanisms::MechanismId;
use posauction::model::{BidProfile, ScalarBidProfile};

pub fn run_example() -> posauction::Result<Vec<EquilibriumReport>> {
    let params = Theorem1Params::new(100.0, 0.01)?;
    let inst = gen_theorem1(params)?;
    let cfg = EquilibriumConfig::new(0.0);
    let profiles = [
        params.scalar_fixture(),
        // the welfare-optimal order; player 1 wants its top position back
        ScalarBidProfile::new(vec![0.5, 1.0])?,
    ];
    let mut reports = Vec::new();
    for bids in profiles {
        let r = verify_equilibrium(MechanismId::Gsp, &inst, &BidProfile::Scalar(bids.clone()), &cfg)?;
        println!("GSP bids {:?}: equilibrium = {}", bids.bids(), r.is_equilibrium);
        if let Some(d) = r.most_profitable() {
            println!(
                "  best deviation: player {} to rank {} by bidding {}{}, gain {}",
                d.player + 1,
                d.target + 1,
                if d.strict { "above " } else { "" },
                d.required_bid,
                d.gain
            );
        }
        reports.push(r);
    }

    let egfp = BidProfile::Matrix(params.egfp_fixture(1e-6)?);
    for theta in [0.0, 1e-6] {
        let r = verify_equilibrium(MechanismId::Egfp, &inst, &egfp, &EquilibriumConfig::new(theta))?;
        println!("EGFP fixture with theta = {theta}: equilibrium = {}", r.is_equilibrium);
        reports.push(r);
    }
    Ok(reports)
}

fn main() -> posauction::Result<()> {
    run_example().map(|_| ())
}
