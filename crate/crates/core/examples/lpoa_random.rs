// Grid search for equilibria on random instances, with the factor-2
// liquid welfare certificate checked at every equilibrium found.

use posauction::equilibrium::{
    check_liquid_welfare_bound, enumerate_equilibria, lpoa_from_equilibria, GridSpec,
};
use posauction::instances::{gen_random, RandomParams};
use posauction::mechanisms::MechanismId;

#[derive(Debug, Default)]
pub struct Summary {
    pub instances: usize,
    pub equilibria: usize,
    pub worst_lpoa: f64,
    pub violations: usize,
}

pub fn run_example() -> posauction::Result<Summary> {
    let mut s = Summary::default();
    for mech in MechanismId::ALL {
        let (n, m) = if mech.is_scalar() { (3, 12) } else { (2, 10) };
        let theta = if mech.is_scalar() { 0.0 } else { 1e-9 };
        let grid = GridSpec { levels_per_player: m, theta };
        for seed in 0..10 {
            let inst = gen_random(seed, n, &RandomParams::default())?;
            let eqs = enumerate_equilibria(mech, &inst, &grid)?;
            s.instances += 1;
            s.equilibria += eqs.len();
            s.violations += eqs
                .iter()
                .map(|e| check_liquid_welfare_bound(&inst, e))
                .filter(|b| !b.holds || !b.partition_holds || !b.utility_shortfalls.is_empty())
                .count();
            if let Ok(r) = lpoa_from_equilibria(mech, &inst, &grid, &eqs) {
                s.worst_lpoa = s.worst_lpoa.max(r.lpoa);
            }
        }
    }
    println!(
        "{} instances, {} equilibria, worst LPoA {:.6}, bound violations {}",
        s.instances, s.equilibria, s.worst_lpoa, s.violations
    );
    Ok(s)
}

fn main() -> posauction::Result<()> {
    run_example().map(|_| ())
}
