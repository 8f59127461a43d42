// Boxes with different rewards and costs, plus the two-box cost-asymmetry sweep.
//
// cargo run --example heterogeneous_menu

use robust_pandora::het::{cost_asymmetry_sweep, default_delta_grid, solve_het, HeterogeneousSpec};
use robust_pandora::verify::{saddle_check_het, Grids};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = HeterogeneousSpec::from_pairs(&[(1.0, 0.2), (2.0, 0.5), (1.5, 0.1)])?;
    let sol = solve_het(&spec)?;
    println!("box  ubar   cost   delta  p_hat   open first  gamma");
    for (i, b) in spec.boxes().iter().enumerate() {
        println!(
            "{i:>3}  {:.2}  {:.3}  {:.3}  {:.3}  {:>10.4}  {:.4}",
            b.ubar,
            b.c,
            spec.delta(i),
            spec.p_hat(i),
            sol.weight(i),
            sol.gamma(i)
        );
    }
    println!("outside option {:.4}, minimax regret {:.6}", sol.outside(), sol.regret().get());

    let grids = Grids { random_policies: 500, random_profiles: 500, ..Grids::default() };
    let rep = saddle_check_het(&spec, 1e-6, &grids)?;
    println!("first-order residual {:.1e}; sampled Nature gain {:.4}", rep.foc_max_abs, rep.saddle.nature_gap);

    println!("delta    a_i     a_j     total");
    for row in cost_asymmetry_sweep(1.0, 0.6, &default_delta_grid(1.0, 0.6, 7))? {
        println!("{:.3}  {:.4}  {:.4}  {:.4}", row.delta, row.a_i, row.a_j, row.total);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
