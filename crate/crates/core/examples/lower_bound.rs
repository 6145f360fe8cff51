// Two players, two positions: every mechanism supports an equilibrium
// whose liquid welfare is half the optimum in the limit.
//
// Run with `cargo run --release --example lower_bound`.

use posauction::instances::Theorem1Params;
use posauction::mechanisms::MechanismId;
use posauction::reproduce::{reproduce_theorem1, Theorem1Report};

pub fn run_example() -> posauction::Result<Vec<Theorem1Report>> {
    let mut reports = Vec::new();
    for (lambda, eps) in [(10.0, 0.1), (100.0, 0.01), (1000.0, 0.001)] {
        let params = Theorem1Params::new(lambda, eps)?;
        for mech in MechanismId::ALL {
            reports.push(reproduce_theorem1(mech, params, 1e-6, None, 41)?);
        }
    }
    Ok(reports)
}

fn main() -> posauction::Result<()> {
    println!("{:>5} {:>7} {:>7} {:>5} {:>12} {:>6}", "mech", "lambda", "eps", "eqs", "OPT/LW", "check");
    for r in run_example()? {
        println!(
            "{:>5} {:>7} {:>7} {:>5} {:>12.9} {:>6}",
            r.mechanism.name(),
            r.params.lambda,
            r.params.eps,
            r.equilibria_found,
            r.ratio,
            if r.passed() { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}
