//! Numerical saddle-point checks.
//!
//! Each check compares a claimed minimax regret `R*` against Nature's best
//! response found on a grid (`nature_gap = max regret - R*`) and against the
//! searcher's best response to the claimed worst-case belief
//! (`dm_gap = R* - min regret`). Both gaps are at most zero at a saddle point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::corr::{
    flattened, solve_corr_commitment, solve_corr_intrapersonal, solve_corr_naive, success_profile, CorrMode,
};
use crate::error::{domain, Result};
use crate::het::{regret_het, solve_het, HeterogeneousSpec, SelectionPolicy};
use crate::indep::solve_indep;
use crate::interim::{regret_phi, InterimPolicy};
use crate::model::{
    regret_count_profile, regret_indep, regret_needle, regret_stop_after, CountProfile, HomogeneousSpec, NatureBelief,
    RegretValue, StationaryPolicy, StoppingMixture,
};
use crate::optim::grid_golden_max;

/// Outcome of a saddle check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleReport {
    pub nature_gap: f64,
    pub dm_gap: f64,
    pub worst_belief: NatureBelief,
    pub tolerance: f64,
    pub pass: bool,
    pub claimed_regret: f64,
    pub notes: Vec<String>,
}

impl SaddleReport {
    pub fn new(
        nature_gap: f64,
        dm_gap: f64,
        worst_belief: NatureBelief,
        tolerance: f64,
        claimed_regret: f64,
        notes: Vec<String>,
    ) -> Self {
        let pass = nature_gap <= tolerance && dm_gap <= tolerance;
        SaddleReport { nature_gap, dm_gap, worst_belief, tolerance, pass, claimed_regret, notes }
    }
}

/// Grid and sampling sizes for the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grids {
    /// Nodes of scalar belief grids.
    pub belief_points: usize,
    /// Random searcher strategies tried against the worst-case belief.
    pub random_policies: usize,
    /// Random count profiles tried by Nature.
    pub random_profiles: usize,
    pub seed: u64,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { belief_points: 2001, random_policies: 10_000, random_profiles: 1000, seed: 0x5EED }
    }
}

fn check_grid(points: usize) -> Result<()> {
    if points < 2 {
        return Err(domain("belief grid needs at least two points"));
    }
    Ok(())
}

/// Nature's best i.i.d. success probability against `policy`: grid scan with
/// golden-section refinement. Returns `(p*, regret)`.
pub fn nature_best_response_indep(
    policy: &StationaryPolicy,
    spec: &HomogeneousSpec,
    grid_points: usize,
) -> Result<(f64, RegretValue)> {
    check_grid(grid_points)?;
    if policy.len() != spec.n() {
        return Err(domain("policy length does not match the number of boxes"));
    }
    let f = |p: f64| regret_indep(policy, p, spec).map(|r| r.get()).unwrap_or(f64::NEG_INFINITY);
    let (p, r) = grid_golden_max(f, 0.0, 1.0, grid_points, 1e-12);
    Ok((p, RegretValue::new(r)))
}

/// Uniform random stationary policy.
fn random_policy(rng: &mut ChaCha8Rng, n: usize) -> StationaryPolicy {
    StationaryPolicy::new((0..n).map(|_| rng.random::<f64>()).collect()).expect("uniform draws lie in [0, 1)")
}

/// Coordinate descent over `alpha_k in {0, 1}` starting from `start`; the
/// regret is multilinear so each coordinate's minimum sits at an endpoint.
fn polish(start: &StationaryPolicy, f: &dyn Fn(&StationaryPolicy) -> f64) -> f64 {
    let mut cur = start.clone();
    let mut val = f(&cur);
    for _ in 0..4 * start.len() {
        let mut improved = false;
        for k in 1..=cur.len() {
            for end in [0.0, 1.0] {
                let cand = cur.with_alpha(k, end).expect("endpoints are probabilities");
                let v = f(&cand);
                if v < val {
                    val = v;
                    cur = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    val
}

/// Saddle check of the independent-rewards solution.
pub fn saddle_check_indep(spec: &HomogeneousSpec, tol: f64, grids: &Grids) -> Result<SaddleReport> {
    let sol = solve_indep(spec);
    saddle_check_indep_policy(&sol.policy, sol.regret.get(), spec, tol, grids)
}

/// Saddle check of an arbitrary claimed policy and value under independent
/// rewards, with Nature's claimed worst case at `p_hat`.
pub fn saddle_check_indep_policy(
    policy: &StationaryPolicy,
    claimed: f64,
    spec: &HomogeneousSpec,
    tol: f64,
    grids: &Grids,
) -> Result<SaddleReport> {
    let (p_star, worst) = nature_best_response_indep(policy, spec, grids.belief_points)?;
    let p_hat = spec.p_hat();
    let at_p_hat = |a: &StationaryPolicy| regret_indep(a, p_hat, spec).map(|r| r.get()).unwrap_or(f64::INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(grids.seed);
    let draws: Vec<StationaryPolicy> = (0..grids.random_policies).map(|_| random_policy(&mut rng, spec.n())).collect();
    let random_min = draws.par_iter().map(at_p_hat).reduce(|| f64::INFINITY, f64::min);
    let polish_min = [StationaryPolicy::exhaustive(spec.n()), StationaryPolicy::opt_out(spec.n()), policy.clone()]
        .iter()
        .map(|s| polish(s, &at_p_hat))
        .fold(f64::INFINITY, f64::min);
    let dm_min = random_min.min(polish_min);
    Ok(SaddleReport::new(
        worst.get() - claimed,
        claimed - dm_min,
        NatureBelief::IidBinary { p: p_star },
        tol,
        claimed,
        vec![format!("nature's best response p* = {p_star:.12}")],
    ))
}

/// Count profile drawn uniformly from the simplex.
fn random_profile(rng: &mut ChaCha8Rng, n: usize) -> CountProfile {
    let raw: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let mut q: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let drift = 1.0 - q.iter().sum::<f64>();
    q[0] = (q[0] + drift).max(0.0);
    CountProfile::new(q).expect("normalized draws form a profile")
}

/// Random point of the simplex over `0..=n`, used for stopping mixtures.
fn random_mixture(rng: &mut ChaCha8Rng, n: usize) -> StoppingMixture {
    let p = random_profile(rng, n);
    StoppingMixture::new(p.as_slice().to_vec()).expect("simplex draws form a mixture")
}

/// Largest regret Nature reaches against `policy` with count profiles:
/// every degenerate vertex, `draws` random profiles and a needle grid.
fn nature_max_corr(
    policy: &StationaryPolicy,
    spec: &HomogeneousSpec,
    grids: &Grids,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, NatureBelief)> {
    let n = spec.n();
    let mixture = StoppingMixture::from_policy(policy);
    let mut best = (f64::NEG_INFINITY, NatureBelief::NeedleP { big_p: 0.0 });
    let mut consider = |val: f64, belief: NatureBelief| {
        if val > best.0 {
            best = (val, belief);
        }
    };
    for j in 0..=n {
        let mut q = vec![0.0; n + 1];
        q[j] = 1.0;
        let profile = CountProfile::new(q)?;
        let r = regret_count_profile(&mixture, &profile, spec)?.get();
        consider(r, NatureBelief::CountProfile { profile });
    }
    let profiles: Vec<CountProfile> = (0..grids.random_profiles).map(|_| random_profile(rng, n)).collect();
    let (r, idx) = profiles
        .par_iter()
        .enumerate()
        .map(|(i, q)| (regret_count_profile(&mixture, q, spec).map(|r| r.get()).unwrap_or(f64::NEG_INFINITY), i))
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    if idx != usize::MAX {
        consider(r, NatureBelief::CountProfile { profile: profiles[idx].clone() });
    }
    let f = |p: f64| regret_needle(policy, p, spec).map(|r| r.get()).unwrap_or(f64::NEG_INFINITY);
    let (p, r) = grid_golden_max(f, 0.0, 1.0, grids.belief_points, 1e-12);
    consider(r, NatureBelief::NeedleP { big_p: p });
    Ok(best)
}

/// Smallest regret of a pure stopping plan against the needle `big_p`.
fn dm_min_needle(big_p: f64, spec: &HomogeneousSpec) -> Result<f64> {
    let q = success_profile(&CountProfile::needle(spec.n(), big_p)?);
    Ok((0..=spec.n()).map(|m| regret_stop_after(&q, m, spec)).fold(f64::INFINITY, f64::min))
}

/// Saddle check under correlated rewards.
///
/// Commitment and naive modes check the committed solution of every menu
/// size `k <= n`; intrapersonal mode checks every stage `k` given the
/// continuation plan, with the searcher deviating only in `alpha_k`.
pub fn saddle_check_corr(spec: &HomogeneousSpec, tol: f64, grids: &Grids, mode: CorrMode) -> Result<SaddleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(grids.seed);
    let sol = match mode {
        CorrMode::Commitment => solve_corr_commitment(spec),
        CorrMode::Intrapersonal => solve_corr_intrapersonal(spec),
        CorrMode::Naive => solve_corr_naive(spec),
    };
    let mut nature_gap = f64::NEG_INFINITY;
    let mut dm_gap = f64::NEG_INFINITY;
    let mut worst = NatureBelief::NeedleP { big_p: 0.0 };
    let mut notes = Vec::new();
    let stages: Vec<usize> = match mode {
        CorrMode::Intrapersonal => (1..=spec.n()).collect(),
        _ => vec![spec.n()],
    };
    for k in stages {
        let sk = spec.with_n(k)?;
        let claimed = sol.regret[k - 1].get();
        let big_p = sol.worst_case_p[k - 1];
        let policy = match mode {
            CorrMode::Intrapersonal => sol.policy.truncated(k),
            _ => sol.policy.clone(),
        };
        let (nat, belief) = nature_max_corr(&policy, &sk, grids, &mut rng)?;
        let dm = match mode {
            CorrMode::Intrapersonal => [0.0, 1.0]
                .iter()
                .map(|&a| {
                    let dev = policy.with_alpha(k, a)?;
                    Ok(regret_needle(&dev, big_p, &sk)?.get())
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min),
            _ => dm_min_needle(big_p, &sk)?,
        };
        if nat - claimed > nature_gap {
            nature_gap = nat - claimed;
            worst = belief;
        }
        dm_gap = dm_gap.max(claimed - dm);
    }
    let (excess, draws) = flattening_excess(spec.n(), grids.random_profiles, grids.seed ^ 0xF1A7)?;
    notes.push(format!("flattening: largest excess over the single-box profile across {draws} draws: {excess:.3e}"));
    notes.push(format!("opt-out threshold: {}", sol.optout_threshold));
    Ok(SaddleReport::new(nature_gap, dm_gap, worst, tol, sol.regret_n().get(), notes))
}

/// Draw random `(Q, w)` pairs and return the largest amount by which the
/// regret under `Q` exceeds the regret under its flattened profile.
pub fn flattening_excess(n: usize, draws: usize, seed: u64) -> Result<(f64, usize)> {
    let spec = HomogeneousSpec::new(1.0, 0.25, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..draws {
        let q = random_profile(&mut rng, n);
        let w = random_mixture(&mut rng, n);
        let r = regret_count_profile(&w, &q, &spec)?.get();
        let rf = regret_count_profile(&w, &flattened(&q), &spec)?.get();
        worst = worst.max(r - rf);
    }
    Ok((worst, draws))
}

/// Local and sampled saddle diagnostics for the heterogeneous solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HetReport {
    pub saddle: SaddleReport,
    /// Largest absolute central-difference derivative in any `p_i` at `p_hat`.
    pub foc_max_abs: f64,
    /// Largest central second difference in any `p_i` at `p_hat`.
    pub hessian_diag_max: f64,
}

/// Finite-difference step for the heterogeneous first-order checks.
pub const FD_STEP: f64 = 1e-5;

/// Check the heterogeneous solution: first- and second-order conditions at
/// `p_hat`, random Nature beliefs and random selection rules.
pub fn saddle_check_het(spec: &HeterogeneousSpec, tol: f64, grids: &Grids) -> Result<HetReport> {
    let sol = solve_het(spec)?;
    let claimed = sol.regret().get();
    let n = spec.len();
    let p_hat: Vec<f64> = (0..n).map(|i| spec.p_hat(i)).collect();
    let eval = |p: &[f64]| regret_het(&sol.policy, p, spec).map(|r| r.get());
    let center = eval(&p_hat)?;
    let mut foc = 0.0f64;
    let mut hess = f64::NEG_INFINITY;
    for i in 0..n {
        let mut up = p_hat.clone();
        let mut down = p_hat.clone();
        up[i] += FD_STEP;
        down[i] -= FD_STEP;
        let (fu, fd) = (eval(&up)?, eval(&down)?);
        foc = foc.max(((fu - fd) / (2.0 * FD_STEP)).abs());
        hess = hess.max((fu - 2.0 * center + fd) / (FD_STEP * FD_STEP));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(grids.seed);
    let beliefs: Vec<Vec<f64>> = (0..grids.random_profiles)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .chain((0..1usize << n).map(|m| (0..n).map(|i| (m >> i & 1) as f64).collect()))
        .collect();
    let (nat, idx) = beliefs
        .par_iter()
        .enumerate()
        .map(|(i, p)| (eval(p).unwrap_or(f64::NEG_INFINITY), i))
        .reduce(|| (center, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let worst_p = if idx == usize::MAX { p_hat.clone() } else { beliefs[idx].clone() };
    let policies = (0..grids.random_policies.min(2000))
        .map(|_| {
            SelectionPolicy::from_fn(n, |mask| {
                let raw: Vec<f64> = (0..=mask.count_ones()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let total: f64 = raw.iter().sum();
                let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
                w[0] += 1.0 - w.iter().sum::<f64>();
                w
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dm_min = policies
        .par_iter()
        .map(|a| regret_het(a, &p_hat, spec).map(|r| r.get()).unwrap_or(f64::INFINITY))
        .reduce(|| center, f64::min);
    let saddle = SaddleReport::new(
        nat - claimed,
        claimed - dm_min,
        NatureBelief::HeteroPVector { p: worst_p },
        tol,
        claimed,
        vec![format!("first-order residual {foc:.3e}, largest second difference {hess:.3e}")],
    );
    Ok(HetReport { saddle, foc_max_abs: foc, hessian_diag_max: hess })
}

/// Discretized interim min-max result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterimGridResult {
    pub m: usize,
    pub alpha: f64,
    pub regret: f64,
}

impl InterimGridResult {
    /// Position of the plan on the continuous scale `m + alpha`, on which
    /// `(m, 1)` and `(m + 1, 0)` coincide.
    pub fn level(&self) -> f64 {
        self.m as f64 + self.alpha
    }
}

/// Brute-force min over threshold plans `(m, alpha)` with `m` in `m_range`
/// and `alpha` on a uniform grid of step `alpha_step`, of the max over a
/// uniform `p_points` grid on `[0, 1]` of the interim regret.
pub fn interim_grid_oracle(
    spec: &HomogeneousSpec,
    m_range: std::ops::Range<usize>,
    alpha_step: f64,
    p_points: usize,
) -> Result<InterimGridResult> {
    check_grid(p_points)?;
    if !(alpha_step > 0.0 && alpha_step <= 1.0) {
        return Err(domain(format!("alpha step must lie in (0, 1], got {alpha_step}")));
    }
    let n = spec.n();
    let m_range = m_range.start..m_range.end.min(n);
    if m_range.is_empty() {
        return Err(domain("empty range of sure-search counts"));
    }
    let steps = (1.0 / alpha_step).round() as usize;
    let ps: Vec<f64> = (0..p_points).map(|i| i as f64 / (p_points - 1) as f64).collect();
    let cands: Vec<(usize, f64)> =
        m_range.flat_map(|m| (0..=steps).map(move |i| (m, (i as f64 * alpha_step).min(1.0)))).collect();
    let best = cands
        .par_iter()
        .enumerate()
        .map(|(idx, &(m, alpha))| {
            let pol = InterimPolicy::threshold(n, m, alpha).expect("m < n and alpha in [0, 1]");
            let worst = ps.iter().map(|&p| regret_phi(&pol.phi, p, spec)).fold(f64::NEG_INFINITY, f64::max);
            (worst, idx)
        })
        .reduce(|| (f64::INFINITY, usize::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let (m, alpha) = cands[best.1];
    Ok(InterimGridResult { m, alpha, regret: best.0 })
}
