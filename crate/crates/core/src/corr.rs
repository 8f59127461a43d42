//! Arbitrarily correlated binary rewards.
//!
//! Nature's worst case concentrates the high reward on at most one uniformly
//! placed box (the needle). The module solves the committed plan, the
//! backward-induction (intrapersonal) plan and the stage-by-stage plan of a
//! naive searcher who re-optimizes after every empty box.

use serde::Serialize;

use crate::model::{CountProfile, HomogeneousSpec, RegretValue, StationaryPolicy};

/// Which notion of optimality a [`CorrSolution`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrMode {
    Commitment,
    Intrapersonal,
    Naive,
}

/// Solution under correlated rewards.
///
/// `regret[k - 1]` and `worst_case_p[k - 1]` describe the `k`-box problem.
/// In commitment and naive mode that is the committed solution of a fresh
/// `k`-box problem; in intrapersonal mode it is the stage-`k` value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrSolution {
    pub mode: CorrMode,
    pub policy: StationaryPolicy,
    pub regret: Vec<RegretValue>,
    pub worst_case_p: Vec<f64>,
    /// Largest menu size at which the searcher still opens a box.
    pub optout_threshold: usize,
}

impl CorrSolution {
    /// Regret of the full `n`-box problem.
    pub fn regret_n(&self) -> RegretValue {
        *self.regret.last().expect("solutions cover at least one box")
    }

    /// Nature's worst-case needle probability in the `n`-box problem.
    pub fn worst_case_p_n(&self) -> f64 {
        *self.worst_case_p.last().expect("solutions cover at least one box")
    }

    /// True when the searcher refuses to open any box.
    pub fn opts_out(&self) -> bool {
        self.policy.alpha(self.policy.len()) == 0.0
    }
}

/// First-success probabilities `q_1..q_n` when boxes are opened in uniformly
/// random order: `q_k = sum_j C_k^j Q_j` with
/// `C_k^j = j / (n - k + 1) * prod_{i=0}^{k-2} (n - i - j) / (n - i)`.
pub fn success_profile(profile: &CountProfile) -> Vec<f64> {
    let q = profile.as_slice();
    let n = profile.boxes();
    let nf = n as f64;
    let mut out = vec![0.0; n];
    for (j, &qj) in q.iter().enumerate().skip(1) {
        if qj == 0.0 {
            continue;
        }
        let jf = j as f64;
        // probability that the first k - 1 opened boxes are empty
        let mut empty_run = 1.0;
        for k in 1..=(n - j + 1) {
            if k >= 2 {
                let i = (k - 2) as f64;
                empty_run *= (nf - i - jf) / (nf - i);
            }
            out[k - 1] += qj * empty_run * jf / (nf - k as f64 + 1.0);
        }
    }
    out
}

/// Profile with the same total treasure mass concentrated on a single box.
pub fn flattened(profile: &CountProfile) -> CountProfile {
    let q0 = profile.as_slice()[0];
    let mut q = vec![0.0; profile.boxes() + 1];
    q[0] = q0;
    q[1] = 1.0 - q0;
    CountProfile::new(q).expect("a flattened profile is a distribution")
}

/// Menu size `(2 ubar - c) / c` at and beyond which the committed searcher opts out.
pub fn optout_bound(spec: &HomogeneousSpec) -> f64 {
    (2.0 * spec.ubar() - spec.c()) / spec.c()
}

/// Largest `n` strictly below [`optout_bound`].
pub fn commitment_threshold(spec: &HomogeneousSpec) -> usize {
    let t = optout_bound(spec);
    let ceil = t.ceil();
    // largest integer strictly below t
    (ceil as usize).saturating_sub(1)
}

/// Committed solution of the `k`-box problem: `(alpha_k, R_k, P_k)`.
fn commitment_stage(k: usize, spec: &HomogeneousSpec) -> (f64, f64, f64) {
    let (ubar, c) = (spec.ubar(), spec.c());
    let kf = k as f64;
    if kf >= optout_bound(spec) {
        return (0.0, spec.net(), 1.0);
    }
    let den = spec.net() + (kf + 1.0) * c / 2.0;
    let alpha = spec.net() / den;
    let regret = spec.net() * c * kf / den;
    let big_p = kf * c / (ubar + (kf - 1.0) * c / 2.0);
    (alpha, regret, big_p)
}

/// Committed minimax-regret plan: open the first box with probability
/// `alpha*_n` and then search exhaustively, or opt out entirely once
/// `n >= (2 ubar - c) / c`.
pub fn solve_corr_commitment(spec: &HomogeneousSpec) -> CorrSolution {
    let n = spec.n();
    let stages: Vec<_> = (1..=n).map(|k| commitment_stage(k, spec)).collect();
    let mut alphas = vec![1.0; n];
    alphas[n - 1] = stages[n - 1].0;
    CorrSolution {
        mode: CorrMode::Commitment,
        policy: StationaryPolicy::new(alphas).expect("closed-form alphas lie in [0, 1]"),
        regret: stages.iter().map(|s| RegretValue::new(s.1)).collect(),
        worst_case_p: stages.iter().map(|s| s.2).collect(),
        optout_threshold: commitment_threshold(spec),
    }
}

/// Stage values `(alpha_k, R_k, P_k)` of the intrapersonal recursion for
/// `k = 1..` until admissibility first fails, followed by the opt-out stage.
fn intrapersonal_stages(spec: &HomogeneousSpec, n: usize) -> (Vec<(f64, f64, f64)>, usize) {
    let (net, c) = (spec.net(), spec.c());
    let cap = optout_bound(spec).ceil() as usize + 1;
    let mut stages = Vec::with_capacity(n);
    let mut prev = 0.0;
    let mut n_bar = 0;
    for k in 1..=cap.max(n) {
        let kf = k as f64;
        let admissible = k == 1 || (c + prev) * (kf - 1.0) <= kf * net;
        if !admissible {
            break;
        }
        let den = kf * net + c + prev;
        let stage = (kf * net / den, kf * net * (c + prev) / den, kf * (c + prev) / den);
        prev = stage.1;
        n_bar = k;
        if k <= n {
            stages.push(stage);
        }
    }
    while stages.len() < n {
        stages.push((0.0, net, 1.0));
    }
    (stages, n_bar)
}

/// Backward-induction plan: each stage's search probability is optimal given
/// the continuation plan. Stages beyond `n_bar` opt out.
pub fn solve_corr_intrapersonal(spec: &HomogeneousSpec) -> CorrSolution {
    let (stages, n_bar) = intrapersonal_stages(spec, spec.n());
    CorrSolution {
        mode: CorrMode::Intrapersonal,
        policy: StationaryPolicy::new(stages.iter().map(|s| s.0).collect()).expect("recursion alphas lie in [0, 1]"),
        regret: stages.iter().map(|s| RegretValue::new(s.1)).collect(),
        worst_case_p: stages.iter().map(|s| s.2).collect(),
        optout_threshold: n_bar,
    }
}

/// Search probabilities `(alpha_n, ..., alpha_1)` of a naive searcher who
/// solves the committed problem afresh at every remaining count. When the
/// menu is large enough to opt out the trajectory is the single entry `0`.
pub fn naive_trajectory(spec: &HomogeneousSpec) -> Vec<f64> {
    let n = spec.n();
    if n as f64 >= optout_bound(spec) {
        return vec![0.0];
    }
    (1..=n).rev().map(|k| commitment_stage(k, spec).0).collect()
}

/// [`naive_trajectory`] packaged as a solution. Its policy is keyed by boxes
/// remaining like every other policy.
pub fn solve_corr_naive(spec: &HomogeneousSpec) -> CorrSolution {
    let n = spec.n();
    let stages: Vec<_> = (1..=n).map(|k| commitment_stage(k, spec)).collect();
    CorrSolution {
        mode: CorrMode::Naive,
        policy: StationaryPolicy::new(stages.iter().map(|s| s.0).collect()).expect("closed-form alphas lie in [0, 1]"),
        regret: stages.iter().map(|s| RegretValue::new(s.1)).collect(),
        worst_case_p: stages.iter().map(|s| s.2).collect(),
        optout_threshold: commitment_threshold(spec),
    }
}
