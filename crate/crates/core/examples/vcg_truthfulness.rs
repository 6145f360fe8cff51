// When no budget binds, truthful bidding is an equilibrium of VCG, and no
// unilateral bid change ever helps.

use posauction::equilibrium::{verify_equilibrium, EquilibriumConfig};
use posauction::instances::{gen_random, RandomParams};
use posauction::mechanisms::{vcg_outcome, MechanismId};
use posauction::model::{BidProfile, ScalarBidProfile};

/// Returns (instances checked, truthful equilibria, largest scan gain).
pub fn run_example() -> posauction::Result<(usize, usize, f64)> {
    let (mut checked, mut equilibria, mut max_gain) = (0, 0, f64::NEG_INFINITY);
    for seed in 0..40 {
        let n = 2 + (seed as usize % 4);
        let base = gen_random(seed, n, &RandomParams::default())?;
        let vmax = base.valuations().iter().cloned().fold(0.0, f64::max);
        let inst = base.with_budgets(vec![2.0 * base.ctr(0) * vmax; n])?;
        let truth = ScalarBidProfile::new(inst.valuations().to_vec())?;
        let r = verify_equilibrium(
            MechanismId::Vcg,
            &inst,
            &BidProfile::Scalar(truth.clone()),
            &EquilibriumConfig::new(0.0),
        )?;
        checked += 1;
        equilibria += r.is_equilibrium as usize;
        let base_u = vcg_outcome(&inst, &truth).utilities;
        for i in 0..n {
            for k in 0..=200 {
                let y = 1.5 * vmax * k as f64 / 200.0;
                let u = vcg_outcome(&inst, &truth.with_bid(i, y)?).utilities[i];
                max_gain = max_gain.max(u - base_u[i]);
            }
        }
    }
    println!("truthful VCG: {equilibria}/{checked} equilibria, best scanned gain {max_gain:e}");
    Ok((checked, equilibria, max_gain))
}

fn main() -> posauction::Result<()> {
    run_example().map(|_| ())
}
