// Minimax-regret search with independent boxes: the closed-form policy,
// Nature's indifference belief and a numerical saddle check.
//
// cargo run --example independent_saddle

use robust_pandora::indep::solve_indep;
use robust_pandora::model::{regret_indep, HomogeneousSpec};
use robust_pandora::verify::{saddle_check_indep, Grids};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = HomogeneousSpec::new(1.0, 0.3, 4)?;
    let sol = solve_indep(&spec);
    println!("boxes left  search prob");
    for k in (1..=spec.n()).rev() {
        println!("{k:>10}  {:.6}", sol.policy.alpha(k));
    }
    println!("minimax regret {:.6} at p = {:.3}", sol.regret.get(), sol.worst_case_p);

    for p in [0.0, 0.1, 0.3, 0.6, 1.0] {
        println!("regret if p = {p:.1}: {:.6}", regret_indep(&sol.policy, p, &spec)?.get());
    }

    let grids = Grids { random_policies: 2000, ..Grids::default() };
    let rep = saddle_check_indep(&spec, 1e-6, &grids)?;
    println!("nature gap {:.2e}, searcher gap {:.2e}, pass {}", rep.nature_gap, rep.dm_gap, rep.pass);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
