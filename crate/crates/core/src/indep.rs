//! Independent binary rewards: the stationary minimax-regret policy, its
//! comparative statics, the expected number of boxes opened and the
//! expected-utility benchmark.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{clamp_probability, HomogeneousSpec, RegretValue, StationaryPolicy};

/// Minimax-regret solution under independent rewards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndepSolution {
    /// `alpha*_1..alpha*_n`.
    pub policy: StationaryPolicy,
    /// `R*_n`.
    pub regret: RegretValue,
    /// Nature's worst-case success probability, equal to `c / ubar`.
    pub worst_case_p: f64,
}

/// Expected number of boxes opened for `n = 1..n_max` under the minimax policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchCountProfile {
    pub q_true: f64,
    /// `values[n - 1] = S(q, n)`.
    pub values: Vec<f64>,
    pub argmax_n: usize,
    /// True when the maximizer lies strictly inside `1..n_max`.
    pub interior: bool,
}

/// Success probability at which a Bayesian searcher is indifferent.
pub fn weitzman_threshold(spec: &HomogeneousSpec) -> f64 {
    spec.p_hat()
}

/// `alpha*_k = k r / ((k - 1) r + 1)` with `r = ((ubar - c) / ubar)^k`.
pub fn alpha_star(k: usize, spec: &HomogeneousSpec) -> f64 {
    let r = (1.0 - spec.p_hat()).powi(k as i32);
    let kf = k as f64;
    kf * r / ((kf - 1.0) * r + 1.0)
}

/// `R*_n = (1 - ((ubar - c) / ubar)^n) (ubar - c)`.
pub fn regret_star(n: usize, spec: &HomogeneousSpec) -> f64 {
    (1.0 - (1.0 - spec.p_hat()).powi(n as i32)) * spec.net()
}

/// Closed-form saddle point. The stationary policy is also the unique
/// intrapersonal equilibrium.
pub fn solve_indep(spec: &HomogeneousSpec) -> IndepSolution {
    let alphas = (1..=spec.n()).map(|k| alpha_star(k, spec)).collect();
    IndepSolution {
        policy: StationaryPolicy::new(alphas).expect("closed-form alphas lie in [0, 1]"),
        regret: RegretValue::new(regret_star(spec.n(), spec)),
        worst_case_p: spec.p_hat(),
    }
}

/// Expected number of boxes `policy` opens when rewards are i.i.d. with
/// success probability `q`: `S_k = alpha_k (1 + (1 - q) S_{k-1})`.
pub fn expected_opened(policy: &StationaryPolicy, q: f64) -> Result<f64> {
    let q = clamp_probability("q", q)?;
    Ok(policy.as_slice().iter().fold(0.0, |s, &a| a * (1.0 + (1.0 - q) * s)))
}

/// `S(q, n)` for the minimax policy with `n` boxes and the reward and cost of `spec`.
pub fn expected_search_count(q: f64, n: usize, spec: &HomogeneousSpec) -> Result<f64> {
    if n < 1 {
        return Err(domain("at least one box is required"));
    }
    let q = clamp_probability("q", q)?;
    Ok((1..=n).fold(0.0, |s, k| alpha_star(k, spec) * (1.0 + (1.0 - q) * s)))
}

/// `S(q, 1..n_max)` and its maximizer (first index on ties).
pub fn search_count_profile(q: f64, n_max: usize, spec: &HomogeneousSpec) -> Result<SearchCountProfile> {
    if n_max < 2 {
        return Err(domain("search count profile needs n_max >= 2"));
    }
    let q = clamp_probability("q", q)?;
    let mut values = Vec::with_capacity(n_max);
    let mut s = 0.0;
    for k in 1..=n_max {
        s = alpha_star(k, spec) * (1.0 + (1.0 - q) * s);
        values.push(s);
    }
    let mut argmax_n = 1;
    for (i, &v) in values.iter().enumerate() {
        if v > values[argmax_n - 1] {
            argmax_n = i + 1;
        }
    }
    Ok(SearchCountProfile { q_true: q, values, argmax_n, interior: argmax_n > 1 && argmax_n < n_max })
}

/// Expected-utility policy for a known success probability `p`: search
/// exhaustively iff `p > c / ubar`. At exact indifference `search_at_tie`
/// decides.
pub fn eu_benchmark_with_tie(p: f64, spec: &HomogeneousSpec, search_at_tie: bool) -> Result<StationaryPolicy> {
    let p = clamp_probability("p", p)?;
    let p_hat = spec.p_hat();
    let search = p > p_hat || (p == p_hat && search_at_tie);
    Ok(if search { StationaryPolicy::exhaustive(spec.n()) } else { StationaryPolicy::opt_out(spec.n()) })
}

/// [`eu_benchmark_with_tie`] with searching at the tie.
pub fn eu_benchmark(p: f64, spec: &HomogeneousSpec) -> Result<StationaryPolicy> {
    eu_benchmark_with_tie(p, spec, true)
}
