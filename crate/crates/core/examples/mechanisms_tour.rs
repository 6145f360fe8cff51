// The same instance under GSP, VCG and EGFP.

use posauction::mechanisms::{outcome, MechanismId};
use posauction::model::{BidProfile, Instance, MatrixBidProfile, ScalarBidProfile};
use posauction::welfare::{liquid_welfare, social_welfare};
use posauction::Outcome;

pub fn run_example() -> posauction::Result<Vec<(MechanismId, Outcome)>> {
    let inst = Instance::new(vec![1.0, 0.6, 0.3], vec![10.0, 8.0, 4.0], vec![6.0, 100.0, 100.0])?;
    // scalar bids under the no-over rule: player 1 cannot credibly bid above 6
    let scalar = BidProfile::Scalar(ScalarBidProfile::new(vec![6.0, 7.0, 4.0])?);
    // EGFP bids are per position totals
    let matrix = BidProfile::Matrix(MatrixBidProfile::new(vec![
        vec![6.0, 5.0, 2.0],
        vec![5.5, 4.0, 1.0],
        vec![2.0, 1.5, 1.2],
    ])?);
    let mut out = Vec::new();
    for mech in MechanismId::ALL {
        let bids = if mech.is_scalar() { &scalar } else { &matrix };
        out.push((mech, outcome(mech, &inst, bids)?));
    }
    for (mech, o) in &out {
        println!("{mech}: sigma = {:?}", o.assignment.sigma_one_based());
        println!("  payments  {:?}", o.payments);
        println!("  utilities {:?}", o.utilities);
        println!(
            "  LW = {:.4}, SW = {:.4}",
            liquid_welfare(&inst, &o.assignment),
            social_welfare(&inst, &o.assignment)
        );
    }
    Ok(out)
}

fn main() -> posauction::Result<()> {
    run_example().map(|_| ())
}
