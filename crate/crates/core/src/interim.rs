//! Interim regret: the benchmark knows the success probability but not the
//! realized rewards, so only search intensity is penalized.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{clamp_probability, HomogeneousSpec, RegretValue, StationaryPolicy};
use crate::optim::{bisect_increasing, golden_max, grid_golden_max};

/// Grid nodes used to seed the inner maximization over `p`.
pub const INNER_GRID: usize = 2001;
/// Offset above `p_hat` where the inner grid starts.
pub const INNER_OFFSET: f64 = 1e-9;
/// Golden-section tolerance in `p`.
pub const INNER_TOL: f64 = 1e-12;
/// Gap below which a cutoff comparison is reported as a tie.
pub const TIE_TOL: f64 = 1e-12;

/// Interim policy in reach-probability form: `phi[k - 1] = phi_k =
/// prod_{j=k}^{n} alpha_j`, nondecreasing in `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterimPolicy {
    /// Boxes opened for sure.
    pub m: usize,
    /// Probability of opening box `m + 1`.
    pub alpha: f64,
    pub phi: Vec<f64>,
}

impl InterimPolicy {
    /// Open `m` boxes for sure and box `m + 1` with probability `alpha`.
    pub fn threshold(n: usize, m: usize, alpha: f64) -> Result<Self> {
        if n < 1 || m >= n {
            return Err(domain(format!("need 0 <= m < n, got m = {m}, n = {n}")));
        }
        let alpha = clamp_probability("alpha", alpha)?;
        let mut phi = vec![0.0; n];
        phi[n - m - 1] = alpha;
        for x in &mut phi[n - m..] {
            *x = 1.0;
        }
        Ok(InterimPolicy { m, alpha, phi })
    }

    /// Arbitrary nondecreasing reach probabilities. `m` and `alpha` describe
    /// the top of the vector: the number of trailing ones and the entry below.
    pub fn from_phi(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(domain("policy must cover at least one box"));
        }
        let phi = phi
            .into_iter()
            .enumerate()
            .map(|(k, x)| clamp_probability(&format!("phi_{}", k + 1), x))
            .collect::<Result<Vec<_>>>()?;
        if phi.windows(2).any(|w| w[0] > w[1]) {
            return Err(domain("phi must be nondecreasing"));
        }
        let n = phi.len();
        let m = phi.iter().rev().take_while(|&&x| x == 1.0).count().min(n - 1);
        let alpha = phi[n - m - 1];
        Ok(InterimPolicy { m, alpha, phi })
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Per-stage search probabilities `alpha_k = phi_k / phi_{k+1}`; stages
    /// that are never reached get `0`.
    pub fn to_stationary(&self) -> StationaryPolicy {
        let n = self.phi.len();
        let alphas = (0..n)
            .map(|i| {
                let next = if i + 1 < n { self.phi[i + 1] } else { 1.0 };
                if next > 0.0 {
                    (self.phi[i] / next).min(1.0)
                } else {
                    0.0
                }
            })
            .collect();
        StationaryPolicy::new(alphas).expect("ratios of nondecreasing reach probabilities lie in [0, 1]")
    }
}

/// Interim-regret solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterimReport {
    pub policy: InterimPolicy,
    pub regret: RegretValue,
    /// Nature's maximizer on `(p_hat, 1]`.
    pub worst_p_high: f64,
    /// `|m c + alpha c - max_p (...)|` at the returned `alpha`.
    pub residual: f64,
    /// Set when some cutoff comparison for `m` was within [`TIE_TOL`].
    pub degenerate_tie: bool,
}

/// Expected payoff of exhaustive search over `n` boxes with success probability `p`:
/// `sum_{i=1}^{n} p (1-p)^{i-1} (ubar - i c) - (1-p)^n n c`.
pub fn exhaustive_utility(p: f64, n: usize, spec: &HomogeneousSpec) -> Result<f64> {
    let p = clamp_probability("p", p)?;
    Ok(utility(p, n, spec))
}

fn utility(p: f64, n: usize, spec: &HomogeneousSpec) -> f64 {
    let (ubar, c) = (spec.ubar(), spec.c());
    let mut total = 0.0;
    let mut fail = 1.0;
    for i in 1..=n {
        total += p * fail * (ubar - i as f64 * c);
        fail *= 1.0 - p;
    }
    total - fail * n as f64 * c
}

fn check_len(policy: &InterimPolicy, spec: &HomogeneousSpec) -> Result<()> {
    if policy.len() != spec.n() {
        return Err(domain(format!("policy covers {} boxes but the problem has {}", policy.len(), spec.n())));
    }
    Ok(())
}

/// Interim regret `max(U(p, n), 0) - sum_{j=0}^{n-1} phi_{n-j} (1-p)^j (p ubar - c)`.
///
/// For `p > p_hat` this equals `sum_j (1 - phi_{n-j}) (1-p)^j (p ubar - c)`.
pub fn interim_regret(policy: &InterimPolicy, p: f64, spec: &HomogeneousSpec) -> Result<RegretValue> {
    check_len(policy, spec)?;
    let p = clamp_probability("p", p)?;
    Ok(RegretValue::new(regret_phi(&policy.phi, p, spec)))
}

pub(crate) fn regret_phi(phi: &[f64], p: f64, spec: &HomogeneousSpec) -> f64 {
    let n = phi.len();
    let gain = p * spec.ubar() - spec.c();
    let mut fail = 1.0;
    let mut total = 0.0;
    if gain > 0.0 {
        for j in 0..n {
            total += (1.0 - phi[n - 1 - j]) * fail;
            fail *= 1.0 - p;
        }
        total * gain
    } else {
        for j in 0..n {
            total += phi[n - 1 - j] * fail;
            fail *= 1.0 - p;
        }
        -total * gain
    }
}

/// Interim regret through exhaustive utilities of every search length:
/// `max(U(p,n), 0) - phi_1 U(p,n) - sum_{k=1}^{n-1} (phi_{n-k+1} - phi_{n-k}) U(p,k)`.
pub fn interim_regret_by_utilities(policy: &InterimPolicy, p: f64, spec: &HomogeneousSpec) -> Result<RegretValue> {
    check_len(policy, spec)?;
    let p = clamp_probability("p", p)?;
    let n = spec.n();
    let phi = &policy.phi;
    let un = utility(p, n, spec);
    let mut r = un.max(0.0) - phi[0] * un;
    for k in 1..n {
        r -= (phi[n - k] - phi[n - k - 1]) * utility(p, k, spec);
    }
    Ok(RegretValue::new(r))
}

/// `[(1 - alpha)(1-p)^m + sum_{i=m+1}^{n-1} (1-p)^i] (p ubar - c)`.
fn high_branch(m: usize, alpha: f64, n: usize, p: f64, spec: &HomogeneousSpec) -> f64 {
    let fail = 1.0 - p;
    let mut pow = fail.powi(m as i32);
    let mut weight = (1.0 - alpha) * pow;
    for _ in m + 1..n {
        pow *= fail;
        weight += pow;
    }
    weight * (p * spec.ubar() - spec.c())
}

/// `max_{p > p_hat}` of [`high_branch`], returned as `(argmax, max)`.
fn high_branch_max(m: usize, alpha: f64, spec: &HomogeneousSpec) -> (f64, f64) {
    let n = spec.n();
    let lo = spec.p_hat() + INNER_OFFSET;
    grid_golden_max(|p| high_branch(m, alpha, n, p, spec), lo, 1.0, INNER_GRID, INNER_TOL)
}

/// Minimax interim-regret commitment policy.
///
/// `m` is the largest count in `0..n` with `m c < max_{p > p_hat}
/// sum_{i=m}^{n-1} (1-p)^i (p ubar - c)`. Given `m`, `alpha` equalizes
/// `m c + alpha c` with the high-`p` branch by bisection.
pub fn solve_interim(spec: &HomogeneousSpec) -> Result<InterimReport> {
    let n = spec.n();
    let c = spec.c();
    let mut m = 0;
    let mut tie = false;
    for cand in 0..n {
        let diff = high_branch_max(cand, 0.0, spec).1 - cand as f64 * c;
        tie |= diff.abs() < TIE_TOL;
        if diff > 0.0 {
            m = cand;
        }
    }
    let mc = m as f64 * c;
    let gap = |alpha: f64| mc + alpha * c - high_branch_max(m, alpha, spec).1;
    let alpha = bisect_increasing(gap, 0.0, 1.0, 1e-15, 200)
        .ok_or_else(|| Error::Convergence(format!("no sign change for the randomization at m = {m}")))?;
    let (worst_p, high) = high_branch_max(m, alpha, spec);
    let residual = (mc + alpha * c - high).abs();
    if residual > 1e-10 {
        return Err(Error::Convergence(format!("equalization residual {residual} exceeds 1e-10")));
    }
    Ok(InterimReport {
        policy: InterimPolicy::threshold(n, m, alpha)?,
        regret: RegretValue::new(mc + alpha * c),
        worst_p_high: worst_p,
        residual,
        degenerate_tie: tie,
    })
}

/// Two-box interim equilibrium without commitment: `alpha_1 = (ubar - c) / ubar`
/// and `alpha_2 = (ubar - c) / (ubar + alpha_1 c)`.
pub fn interim_two_box_intrapersonal(spec: &HomogeneousSpec) -> (f64, f64) {
    let alpha1 = spec.net() / spec.ubar();
    let alpha2 = spec.net() / (spec.ubar() + alpha1 * spec.c());
    (alpha1, alpha2)
}

/// Largest interim regret of a two-stage plan `(alpha_1, alpha_2)` over
/// `p in [0, 1]`, by golden search on the high branch.
pub fn two_box_worst_regret(alpha1: f64, alpha2: f64, spec: &HomogeneousSpec) -> Result<f64> {
    let spec2 = spec.with_n(2)?;
    let pol = InterimPolicy::from_phi(vec![alpha1 * alpha2, alpha2])?;
    let low = regret_phi(&pol.phi, 0.0, &spec2);
    let (_, high) = golden_max(|p| regret_phi(&pol.phi, p, &spec2), spec2.p_hat(), 1.0, INNER_TOL);
    Ok(low.max(high))
}
