//! Shared domain types and exact regret evaluators for binary rewards.
//!
//! Rewards take values in `{0, ubar}`. Policies are stationary: `alpha(k)` is
//! the probability of opening a uniformly chosen unopened box when `k` boxes
//! remain and nothing valuable has been found yet.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Slack tolerated on probabilities before they are rejected. Values inside
/// `[-PROB_SLACK, 1 + PROB_SLACK]` are clamped to `[0, 1]`.
pub const PROB_SLACK: f64 = 1e-15;

/// Tolerance on the total mass of count profiles and stopping mixtures.
pub const MASS_TOL: f64 = 1e-12;

/// Clamp `x` into `[0, 1]` if it lies within [`PROB_SLACK`] of the interval.
pub fn clamp_probability(name: &str, x: f64) -> Result<f64> {
    if !x.is_finite() || !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&x) {
        return Err(domain(format!("{name} = {x} is not a probability")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// `n` identical boxes with reward `ubar` and per-box search cost `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneousSpec {
    ubar: f64,
    c: f64,
    n: usize,
}

impl HomogeneousSpec {
    pub fn new(ubar: f64, c: f64, n: usize) -> Result<Self> {
        validate_spec(HomogeneousSpec { ubar, c, n })
    }

    pub fn ubar(&self) -> f64 {
        self.ubar
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Net reward `ubar - c` of a box that is opened and found full.
    pub fn net(&self) -> f64 {
        self.ubar - self.c
    }

    /// Indifference belief `c / ubar`.
    pub fn p_hat(&self) -> f64 {
        self.c / self.ubar
    }

    /// Same rewards and cost with a different number of boxes.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.ubar, self.c, n)
    }
}

/// Check `ubar > 0`, `0 < c < ubar` and `n >= 1`.
pub fn validate_spec(spec: HomogeneousSpec) -> Result<HomogeneousSpec> {
    let HomogeneousSpec { ubar, c, n } = spec;
    if !(ubar.is_finite() && ubar > 0.0) {
        return Err(domain(format!("ubar must be positive, got {ubar}")));
    }
    if !(c.is_finite() && c > 0.0 && c < ubar) {
        return Err(domain(format!("cost must satisfy 0 < c < ubar, got c = {c}, ubar = {ubar}")));
    }
    if n < 1 {
        return Err(domain("at least one box is required"));
    }
    Ok(spec)
}

/// Search probabilities `alpha_1..alpha_n`, keyed by the number of boxes
/// remaining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPolicy {
    alphas: Vec<f64>,
}

impl StationaryPolicy {
    /// `alphas[k - 1]` is the search probability with `k` boxes remaining.
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(domain("policy must cover at least one box"));
        }
        let alphas = alphas
            .into_iter()
            .enumerate()
            .map(|(i, a)| clamp_probability(&format!("alpha_{}", i + 1), a))
            .collect::<Result<Vec<_>>>()?;
        Ok(StationaryPolicy { alphas })
    }

    /// Open every box until the high reward shows up.
    pub fn exhaustive(n: usize) -> Self {
        StationaryPolicy { alphas: vec![1.0; n] }
    }

    /// Never open anything.
    pub fn opt_out(n: usize) -> Self {
        StationaryPolicy { alphas: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Search probability with `k` boxes remaining, `1 <= k <= n`.
    pub fn alpha(&self, k: usize) -> f64 {
        self.alphas[k - 1]
    }

    /// `alpha_1, ..., alpha_n` in order of boxes remaining.
    pub fn as_slice(&self) -> &[f64] {
        &self.alphas
    }

    /// Copy of the policy with `alpha_k` replaced.
    pub fn with_alpha(&self, k: usize, value: f64) -> Result<Self> {
        let mut alphas = self.alphas.clone();
        alphas[k - 1] = value;
        Self::new(alphas)
    }

    /// The policy restricted to the last `k` stages (`alpha_1..alpha_k`).
    pub fn truncated(&self, k: usize) -> Self {
        StationaryPolicy { alphas: self.alphas[..k].to_vec() }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.alphas.len() != n {
            return Err(domain(format!("policy covers {} boxes but the problem has {n}", self.alphas.len())));
        }
        Ok(())
    }
}

/// Expected ex-post regret, in payoff units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegretValue(f64);

impl RegretValue {
    /// Regret is nonnegative; round-off below `-1e-12` is a bug upstream.
    pub fn new(value: f64) -> Self {
        debug_assert!(value >= -1e-12, "negative regret {value}");
        RegretValue(value.max(0.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<RegretValue> for f64 {
    fn from(r: RegretValue) -> f64 {
        r.0
    }
}

impl std::fmt::Display for RegretValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Exchangeable distribution described by `Q_j`, the probability that exactly
/// `j` uniformly chosen boxes hold the high reward (`j = 0..n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountProfile {
    q: Vec<f64>,
}

impl CountProfile {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(domain("count profile needs entries Q_0..Q_n with n >= 1"));
        }
        let q = q
            .into_iter()
            .enumerate()
            .map(|(j, x)| clamp_probability(&format!("Q_{j}"), x))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(domain(format!("count profile sums to {total}, not 1")));
        }
        Ok(CountProfile { q })
    }

    /// Profile induced by i.i.d. rewards with success probability `p`.
    pub fn binomial(n: usize, p: f64) -> Result<Self> {
        let p = clamp_probability("p", p)?;
        let mut q = Vec::with_capacity(n + 1);
        let mut binom = 1.0_f64;
        for j in 0..=n {
            if j > 0 {
                binom *= (n - j + 1) as f64 / j as f64;
            }
            q.push(binom * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32));
        }
        Self::new(q)
    }

    /// At most one box holds the high reward, with total probability `big_p`.
    pub fn needle(n: usize, big_p: f64) -> Result<Self> {
        let big_p = clamp_probability("P", big_p)?;
        let mut q = vec![0.0; n + 1];
        q[0] = 1.0 - big_p;
        q[1] = big_p;
        Self::new(q)
    }

    /// Number of boxes `n`.
    pub fn boxes(&self) -> usize {
        self.q.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }
}

/// Distribution over how many failed openings precede stopping: `w[m]` is the
/// probability that the plan stops after exactly `m` empty boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingMixture {
    w: Vec<f64>,
}

impl StoppingMixture {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(domain("stopping mixture needs entries w_0..w_n with n >= 1"));
        }
        let w = w
            .into_iter()
            .enumerate()
            .map(|(m, x)| clamp_probability(&format!("w_{m}"), x))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(domain(format!("stopping mixture sums to {total}, not 1")));
        }
        Ok(StoppingMixture { w })
    }

    /// Stop after exactly `m` failures, `0 <= m <= n`.
    pub fn pure(n: usize, m: usize) -> Self {
        let mut w = vec![0.0; n + 1];
        w[m] = 1.0;
        StoppingMixture { w }
    }

    /// `w_m = (1 - alpha_{n-m}) * prod_{j > n-m} alpha_j` and
    /// `w_n = prod_j alpha_j`.
    pub fn from_policy(policy: &StationaryPolicy) -> Self {
        let n = policy.len();
        let mut w = Vec::with_capacity(n + 1);
        let mut reach = 1.0;
        for m in 0..n {
            let k = n - m;
            w.push((1.0 - policy.alpha(k)) * reach);
            reach *= policy.alpha(k);
        }
        w.push(reach);
        StoppingMixture { w }
    }

    pub fn boxes(&self) -> usize {
        self.w.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// Nature's strategy in each regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NatureBelief {
    /// Independent boxes, each full with probability `p`.
    IidBinary { p: f64 },
    /// One uniformly placed treasure with probability `big_p`.
    NeedleP { big_p: f64 },
    /// Exchangeable count profile `Q_0..Q_n`.
    CountProfile { profile: CountProfile },
    /// Independent heterogeneous boxes, `p[i]` for box `i` (input order).
    HeteroPVector { p: Vec<f64> },
    /// Mixture over unordered reward pairs `(u, v)` with `0 <= v <= u <= ubar`.
    TwoPointMixture { pairs: Vec<((f64, f64), f64)> },
}

impl NatureBelief {
    /// Check the belief's invariants; `ubar` bounds two-point supports.
    pub fn validate(&self, ubar: f64) -> Result<()> {
        match self {
            NatureBelief::IidBinary { p } => clamp_probability("p", *p).map(|_| ()),
            NatureBelief::NeedleP { big_p } => clamp_probability("P", *big_p).map(|_| ()),
            NatureBelief::CountProfile { profile } => CountProfile::new(profile.as_slice().to_vec()).map(|_| ()),
            NatureBelief::HeteroPVector { p } => {
                for (i, x) in p.iter().enumerate() {
                    clamp_probability(&format!("p_{i}"), *x)?;
                }
                Ok(())
            }
            NatureBelief::TwoPointMixture { pairs } => {
                let mut total = 0.0;
                for &((u, v), w) in pairs {
                    if !(0.0 <= v && v <= u && u <= ubar) {
                        return Err(domain(format!("pair ({u}, {v}) outside 0 <= v <= u <= {ubar}")));
                    }
                    total += clamp_probability("pair weight", w)?;
                }
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(domain(format!("pair weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }
}

/// Regret of `policy` when boxes are i.i.d. with success probability `p`.
///
/// Evaluates `R_k = (1 - a_k)(1 - (1-p)^k)(ubar - c) + a_k (1-p)(c + R_{k-1})`
/// from `R_0 = 0` up to `k = n`.
pub fn regret_indep(policy: &StationaryPolicy, p: f64, spec: &HomogeneousSpec) -> Result<RegretValue> {
    policy.check_len(spec.n)?;
    let p = clamp_probability("p", p)?;
    let fail = 1.0 - p;
    let mut r = 0.0;
    let mut all_fail = 1.0;
    for k in 1..=spec.n {
        all_fail *= fail;
        let a = policy.alpha(k);
        r = (1.0 - a) * (1.0 - all_fail) * spec.net() + a * fail * (spec.c + r);
    }
    Ok(RegretValue::new(r))
}

/// Regret of `policy` when at most one uniformly placed box holds `ubar`,
/// with probability `big_p`.
///
/// After each empty box the belief is updated by Bayes' rule,
/// `P' = P (k - 1) / (k - P)`.
pub fn regret_needle(policy: &StationaryPolicy, big_p: f64, spec: &HomogeneousSpec) -> Result<RegretValue> {
    policy.check_len(spec.n)?;
    let big_p = clamp_probability("P", big_p)?;
    let n = spec.n;
    // beliefs[k] = probability that the treasure sits among the k remaining boxes
    let mut beliefs = vec![0.0; n + 1];
    beliefs[n] = big_p;
    for k in (2..=n).rev() {
        let pk = beliefs[k];
        let kf = k as f64;
        beliefs[k - 1] = if kf - pk > 0.0 { pk * (kf - 1.0) / (kf - pk) } else { 0.0 };
    }
    let mut r = 0.0;
    for (k, &pk) in beliefs.iter().enumerate().skip(1) {
        let a = policy.alpha(k);
        r = (1.0 - a) * pk * spec.net() + a * (1.0 - pk / k as f64) * (spec.c + r);
    }
    Ok(RegretValue::new(r))
}

/// Regret of a stopping plan that quits after `m` failures, given first-success
/// probabilities `q_1..q_n`.
pub(crate) fn regret_stop_after(q: &[f64], m: usize, spec: &HomogeneousSpec) -> f64 {
    let c = spec.c;
    let mc = m as f64 * c;
    let mut total_q = 0.0;
    let mut r = 0.0;
    for (idx, &qk) in q.iter().enumerate() {
        let k = idx + 1;
        total_q += qk;
        r += if k <= m { qk * (k - 1) as f64 * c } else { qk * (spec.net() + mc) };
    }
    r + (1.0 - total_q) * mc
}

/// Regret of a stopping mixture against an exchangeable count profile.
pub fn regret_count_profile(
    mixture: &StoppingMixture,
    profile: &CountProfile,
    spec: &HomogeneousSpec,
) -> Result<RegretValue> {
    if mixture.boxes() != spec.n || profile.boxes() != spec.n {
        return Err(domain(format!(
            "mixture covers {} boxes and profile {} but the problem has {}",
            mixture.boxes(),
            profile.boxes(),
            spec.n
        )));
    }
    let q = crate::corr::success_profile(profile);
    let r = mixture
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(m, &w)| w * regret_stop_after(&q, m, spec))
        .sum();
    Ok(RegretValue::new(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(ubar: f64, c: f64, n: usize) -> HomogeneousSpec {
        HomogeneousSpec::new(ubar, c, n).unwrap()
    }

    #[test]
    fn validate_spec_examples() {
        assert!(HomogeneousSpec::new(1.0, 0.3, 3).is_ok());
        assert!(matches!(HomogeneousSpec::new(1.0, 1.0, 2), Err(crate::Error::Domain(_))));
        assert!(HomogeneousSpec::new(2.0, 0.5, 1).is_ok());
        assert!(HomogeneousSpec::new(1.0, 0.0, 2).is_err());
        assert!(HomogeneousSpec::new(0.0, 0.1, 2).is_err());
        assert!(HomogeneousSpec::new(1.0, 0.3, 0).is_err());
        assert!(HomogeneousSpec::new(f64::NAN, 0.3, 1).is_err());
    }

    #[test]
    fn probabilities_are_clamped_within_slack() {
        assert_eq!(clamp_probability("p", -1e-16).unwrap(), 0.0);
        assert_eq!(clamp_probability("p", 1.0 + 1e-16).unwrap(), 1.0);
        assert!(clamp_probability("p", -1e-9).is_err());
        assert!(clamp_probability("p", 1.1).is_err());
        assert!(StationaryPolicy::new(vec![0.5, 1.2]).is_err());
    }

    #[test]
    fn one_box_regret() {
        let s = spec(1.0, 0.3, 1);
        let pol = StationaryPolicy::new(vec![0.7]).unwrap();
        // p(1-a)(ubar-c) + (1-p) a c = 0.3*0.3*0.7 + 0.7*0.7*0.3
        let r = regret_indep(&pol, 0.3, &s).unwrap().get();
        assert!((r - 0.21).abs() < 1e-15);
    }

    #[test]
    fn never_search_regret() {
        let s = spec(1.0, 0.3, 4);
        let pol = StationaryPolicy::opt_out(4);
        for &p in &[0.0f64, 0.2, 0.55, 1.0] {
            let expected = (1.0 - (1.0 - p).powi(4)) * 0.7;
            let r = regret_indep(&pol, p, &s).unwrap().get();
            assert!((r - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn policy_length_must_match() {
        let s = spec(1.0, 0.3, 3);
        let pol = StationaryPolicy::exhaustive(2);
        assert!(regret_indep(&pol, 0.5, &s).is_err());
        assert!(regret_needle(&pol, 0.5, &s).is_err());
    }

    #[test]
    fn needle_exhaustive_continuation_closed_form() {
        for n in 1..=6 {
            let s = spec(1.0, 0.25, n);
            for &an in &[0.0, 0.3, 0.6, 1.0] {
                let pol = StationaryPolicy::exhaustive(n).with_alpha(n, an).unwrap();
                for &big_p in &[0.0, 0.25, 0.6, 1.0] {
                    let nf = n as f64;
                    let closed =
                        (1.0 - an) * big_p * 0.75 + an * (big_p * (nf - 1.0) / 2.0 + (1.0 - big_p) * nf) * 0.25;
                    let r = regret_needle(&pol, big_p, &s).unwrap().get();
                    assert!((r - closed).abs() < 1e-12, "n={n} a={an} P={big_p}: {r} vs {closed}");
                }
            }
        }
    }

    #[test]
    fn needle_coincides_with_indep_without_treasure_or_with_one_box() {
        let s = spec(1.0, 0.3, 4);
        let pol = StationaryPolicy::new(vec![0.2, 0.9, 0.4, 0.65]).unwrap();
        let a = regret_needle(&pol, 0.0, &s).unwrap().get();
        let b = regret_indep(&pol, 0.0, &s).unwrap().get();
        assert!((a - b).abs() < 1e-15);

        let s1 = spec(1.0, 0.3, 1);
        let pol1 = StationaryPolicy::new(vec![0.42]).unwrap();
        for &p in &[0.0, 0.3, 0.77, 1.0] {
            let a = regret_needle(&pol1, p, &s1).unwrap().get();
            let b = regret_indep(&pol1, p, &s1).unwrap().get();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn stopping_mixture_from_policy() {
        let pol = StationaryPolicy::new(vec![0.5, 0.8, 0.9]).unwrap();
        let w = StoppingMixture::from_policy(&pol);
        let expected = [0.1, 0.9 * 0.2, 0.9 * 0.8 * 0.5, 0.9 * 0.8 * 0.5];
        for (a, b) in w.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(StoppingMixture::new(w.as_slice().to_vec()).is_ok());
    }

    #[test]
    fn count_profile_without_treasure_is_pure_cost() {
        let s = spec(1.0, 0.3, 5);
        let mut q = vec![0.0; 6];
        q[0] = 1.0;
        let profile = CountProfile::new(q).unwrap();
        for m in 0..=5 {
            let r = regret_count_profile(&StoppingMixture::pure(5, m), &profile, &s).unwrap().get();
            assert!((r - m as f64 * 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn count_profile_single_treasure_exhaustive() {
        for n in 1..=7 {
            let s = spec(1.0, 0.1, n);
            let profile = CountProfile::needle(n, 1.0).unwrap();
            let r = regret_count_profile(&StoppingMixture::pure(n, n), &profile, &s).unwrap().get();
            let expected = (n as f64 - 1.0) * 0.1 / 2.0;
            assert!((r - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn count_profile_rejects_bad_mass() {
        assert!(CountProfile::new(vec![0.5, 0.4]).is_err());
        assert!(CountProfile::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(StoppingMixture::new(vec![0.2, 0.2]).is_err());
    }

    #[test]
    fn binomial_profile_sums_to_one() {
        for n in 1..=12 {
            for &p in &[0.0, 0.13, 0.5, 0.99, 1.0] {
                let q = CountProfile::binomial(n, p).unwrap();
                let total: f64 = q.as_slice().iter().sum();
                assert!((total - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn nature_belief_validation() {
        assert!(NatureBelief::IidBinary { p: 0.4 }.validate(1.0).is_ok());
        assert!(NatureBelief::NeedleP { big_p: 1.5 }.validate(1.0).is_err());
        let good = NatureBelief::TwoPointMixture { pairs: vec![((0.0, 0.0), 0.5), ((1.0, 0.3), 0.5)] };
        assert!(good.validate(1.0).is_ok());
        let bad = NatureBelief::TwoPointMixture { pairs: vec![((0.2, 0.5), 1.0)] };
        assert!(bad.validate(1.0).is_err());
        let heavy = NatureBelief::TwoPointMixture { pairs: vec![((0.4, 0.1), 0.7)] };
        assert!(heavy.validate(1.0).is_err());
    }
}
