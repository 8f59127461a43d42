// Regret measured against the best plan for the true distribution rather
// than against the realized rewards.
//
// cargo run --example interim_regret

use robust_pandora::interim::{interim_two_box_intrapersonal, solve_interim, two_box_worst_regret};
use robust_pandora::model::HomogeneousSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!(" n  sure  next prob  regret    worst p");
    for n in [2, 4, 8, 12, 20] {
        let rep = solve_interim(&HomogeneousSpec::new(1.0, 0.1, n)?)?;
        println!(
            "{n:>2}  {:>4}  {:>9.6}  {:.6}  {:.4}",
            rep.policy.m,
            rep.policy.alpha,
            rep.regret.get(),
            rep.worst_p_high
        );
    }
    let spec = HomogeneousSpec::new(1.0, 0.3, 2)?;
    let (a1, a2) = interim_two_box_intrapersonal(&spec);
    println!("two boxes without commitment: first {a2:.6}, second {a1:.6}");
    println!("worst-case interim regret of that plan {:.6}", two_box_worst_regret(a1, a2, &spec)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
