// Reproducible simulation of the minimax policies against fixed truths.
//
// cargo run --release --example monte_carlo

use robust_pandora::corr::solve_corr_commitment;
use robust_pandora::het::{p_hat_vector, solve_het, HeterogeneousSpec};
use robust_pandora::indep::{expected_search_count, regret_star, solve_indep};
use robust_pandora::model::{regret_needle, HomogeneousSpec, NatureBelief};
use robust_pandora::sim::{simulate, simulate_het};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = HomogeneousSpec::new(1.0, 0.3, 5)?;
    let pol = solve_indep(&spec).policy;
    let res = simulate(&pol, &NatureBelief::IidBinary { p: 0.3 }, &spec, 200_000, 42)?;
    println!(
        "independent, p = 0.3: regret {:.5} +/- {:.5} (exact {:.5}), opened {:.4} +/- {:.4} (exact {:.4})",
        res.mean_regret,
        res.se_regret,
        regret_star(5, &spec),
        res.mean_opened,
        res.se_opened,
        expected_search_count(0.3, 5, &spec)?
    );

    let cspec = HomogeneousSpec::new(1.0, 0.25, 4)?;
    let cpol = solve_corr_commitment(&cspec).policy;
    let res = simulate(&cpol, &NatureBelief::NeedleP { big_p: 0.6 }, &cspec, 200_000, 42)?;
    println!(
        "needle, P = 0.6: regret {:.5} +/- {:.5} (exact {:.5})",
        res.mean_regret,
        res.se_regret,
        regret_needle(&cpol, 0.6, &cspec)?.get()
    );

    let hspec = HeterogeneousSpec::from_pairs(&[(1.0, 0.2), (1.5, 0.4)])?;
    let hsol = solve_het(&hspec)?;
    let res = simulate_het(&hsol.policy, &p_hat_vector(&hspec), &hspec, 200_000, 42)?;
    println!(
        "two heterogeneous boxes at p_hat: regret {:.5} +/- {:.5} (claimed {:.5})",
        res.mean_regret,
        res.se_regret,
        hsol.regret().get()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
