// Arbitrarily correlated boxes. The committed searcher opts out once the
// menu reaches `(2 ubar - c) / c`; without commitment the recursion stops
// searching earlier.
//
// cargo run --example correlated_needle

use robust_pandora::corr::{naive_trajectory, optout_bound, solve_corr_commitment, solve_corr_intrapersonal};
use robust_pandora::model::{regret_needle, HomogeneousSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let base = HomogeneousSpec::new(1.0, 0.25, 8)?;
    println!("opt-out bound {:.2}", optout_bound(&base));
    println!(" n  committed alpha  regret   worst P");
    for n in 1..=8 {
        let sol = solve_corr_commitment(&base.with_n(n)?);
        println!("{n:>2}  {:>15.6}  {:.6}  {:.6}", sol.policy.alpha(n), sol.regret_n().get(), sol.worst_case_p_n());
    }

    let spec = base.with_n(4)?;
    let sol = solve_corr_commitment(&spec);
    let flat: Vec<String> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&p| regret_needle(&sol.policy, p, &spec).map(|r| format!("{:.6}", r.get())))
        .collect::<Result<_, _>>()?;
    println!("n = 4 regret across needle beliefs: {}", flat.join(" "));

    let intra = solve_corr_intrapersonal(&base);
    println!("without commitment the searcher stops opening beyond n = {}", intra.optout_threshold);
    let stages: Vec<String> = (1..=8).map(|k| format!("{:.3}", intra.policy.alpha(k))).collect();
    println!("stage search probabilities k = 1..8: {}", stages.join(" "));
    let naive: Vec<String> = naive_trajectory(&spec).iter().map(|a| format!("{a:.3}")).collect();
    println!("naive replanning path from 4 boxes: {}", naive.join(" -> "));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
