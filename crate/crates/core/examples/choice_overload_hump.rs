// Expected number of boxes opened as the menu grows. With a low true success
// rate the count first rises and then falls.
//
// cargo run --example choice_overload_hump

use robust_pandora::indep::{alpha_star, search_count_profile};
use robust_pandora::model::HomogeneousSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = HomogeneousSpec::new(1.0, 0.3, 30)?;
    println!(
        "probability of opening any box: n=1 {:.3}, n=10 {:.3}, n=30 {:.3}",
        alpha_star(1, &spec),
        alpha_star(10, &spec),
        alpha_star(30, &spec)
    );
    for q in [0.05, 0.2, 0.5] {
        let prof = search_count_profile(q, 30, &spec)?;
        let shown: Vec<String> =
            [1, 2, 3, 5, 10, 20, 30].iter().map(|&n| format!("{:.3}", prof.values[n - 1])).collect();
        println!(
            "q = {q:.2}: S at n = 1,2,3,5,10,20,30 -> {}  (peak at n = {}{})",
            shown.join(" "),
            prof.argmax_n,
            if prof.interior { ", interior" } else { "" }
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
