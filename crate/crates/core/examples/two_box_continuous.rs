// Two boxes with rewards anywhere in `[0, ubar]`: the randomized acceptance
// threshold and the grid check of the proposed saddle point.
//
// cargo run --example two_box_continuous

use robust_pandora::model::HomogeneousSpec;
use robust_pandora::two_box::{acceptance_probability, indifference_gap, solve_two_box, verify_two_box};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for c in [0.3, 0.25, 0.2, 0.1] {
        let spec = HomogeneousSpec::new(1.0, c, 2)?;
        let sol = solve_two_box(&spec)?;
        println!(
            "c = {c:.2}: {:?} regime, open first {:.6}, regret {:.6}",
            sol.policy.regime,
            sol.policy.alpha2_0,
            sol.regret.get()
        );
    }

    let spec = HomogeneousSpec::new(1.0, 0.2, 2)?;
    let sol = solve_two_box(&spec)?;
    let p = sol.policy;
    println!("continue for sure below {:.6}, stop for sure from {:.6}", p.v_low, p.v_acc);
    for u in [0.70, 0.74, 0.76, 0.78, 0.80] {
        println!("  after {u:.2}: open the second box with probability {:.4}", acceptance_probability(u, &p));
    }
    let n = sol.nature;
    println!("Nature: {{0,0}} {:.4}, {{0,{:.4}}} {:.4}, {{{:.4},1}} {:.4}", n.q, n.v_hat, n.r, n.v_hat, n.s);

    let claimed = sol.regret.get();
    let rep = verify_two_box(&p, &n, &spec, 200, claimed, 1e-9)?;
    println!("largest pair regret above the claim: {:.2e}", rep.nature_gap);
    println!(
        "searcher indifference over opt-out and the choice at v_hat: {:.2e}",
        indifference_gap(&n, &spec, claimed)
    );
    println!("best unrestricted searcher deviation gains {:.4}", rep.dm_gap);
    for note in &rep.notes {
        println!("  {note}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
