//! Two boxes with rewards anywhere in `[0, ubar]`.
//!
//! When `ubar <= 4c` the binary solution carries over with a deterministic
//! stopping threshold at `ubar - c`. Beyond that Nature places mass on an
//! interior reward `v_hat` and the searcher answers with a randomized
//! acceptance threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{HomogeneousSpec, NatureBelief, RegretValue};
use crate::verify::SaddleReport;

/// Which side of `ubar = 4c` the problem falls on. The boundary is small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Small,
    Large,
}

/// Open the first box with probability `alpha2_0`; after observing `u`,
/// open the second with probability [`acceptance_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBoxContinuousPolicy {
    pub regime: Regime,
    pub alpha2_0: f64,
    /// Continuation is certain at or below this reward.
    pub v_low: f64,
    /// Stopping is certain at or above this reward, equal to `ubar - c`.
    pub v_acc: f64,
    pub ubar: f64,
    pub c: f64,
}

/// Nature's mixture over the pairs `{0, 0}`, `{0, v_hat}` and `{v_hat, ubar}`
/// with weights `q`, `r`, `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBoxNature {
    pub v_hat: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    /// The alternative closed form `(2(ubar - v_hat)(v_hat - 2c) + c^2) / D`
    /// for `q`; `None` in the small regime.
    pub q_alternative: Option<f64>,
}

impl TwoBoxNature {
    /// Support pairs `(u, v)` with `u >= v` and their weights.
    pub fn pairs(&self, ubar: f64) -> Vec<((f64, f64), f64)> {
        vec![((0.0, 0.0), self.q), ((self.v_hat, 0.0), self.r), ((ubar, self.v_hat), self.s)]
            .into_iter()
            .map(|((u, v), w)| ((u.max(v), u.min(v)), w))
            .collect()
    }

    pub fn belief(&self, ubar: f64) -> NatureBelief {
        NatureBelief::TwoPointMixture { pairs: self.pairs(ubar) }
    }

    /// `1 - (q_alternative + r + s)`, the mass the alternative form leaves out.
    pub fn q_discrepancy(&self) -> Option<f64> {
        self.q_alternative.map(|qa| 1.0 - (qa + self.r + self.s))
    }
}

/// Saddle point of the continuous two-box problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoBoxSolution {
    pub policy: TwoBoxContinuousPolicy,
    pub nature: TwoBoxNature,
    pub regret: RegretValue,
}

/// Closed-form saddle point for `n = 2` and rewards in `[0, ubar]`.
pub fn solve_two_box(spec: &HomogeneousSpec) -> Result<TwoBoxSolution> {
    if spec.n() != 2 {
        return Err(domain(format!("the continuous case is solved for two boxes, got n = {}", spec.n())));
    }
    let (ubar, c) = (spec.ubar(), spec.c());
    if ubar <= 4.0 * c {
        let alpha = spec.net() / (ubar + c / 2.0);
        let big_p = 4.0 * c / (2.0 * ubar + c);
        let policy = TwoBoxContinuousPolicy {
            regime: Regime::Small,
            alpha2_0: alpha,
            v_low: spec.net(),
            v_acc: spec.net(),
            ubar,
            c,
        };
        // treasure in one box: {0, ubar}
        let nature = TwoBoxNature { v_hat: ubar, q: 1.0 - big_p, r: big_p, s: 0.0, q_alternative: None };
        let regret = RegretValue::new(4.0 * spec.net() * c / (2.0 * ubar + c));
        return Ok(TwoBoxSolution { policy, nature, regret });
    }
    let root = ((2.0 * ubar + c) * c).sqrt();
    let den = ubar * ubar + ubar * c + c * c + c * root;
    let alpha = ubar * ubar / den;
    let v_hat = ubar * (1.0 - c / (c + root));
    let v_low = ubar * (1.0 - ubar / (2.0 * (ubar + c + root)));
    let d = 2.0 * (ubar - v_hat) * (v_hat + c) + c * c;
    let s = 4.0 * c * c / d;
    let r = s * (ubar - c - v_hat) / c;
    let q_alt = (2.0 * (ubar - v_hat) * (v_hat - 2.0 * c) + c * c) / d;
    let policy = TwoBoxContinuousPolicy { regime: Regime::Large, alpha2_0: alpha, v_low, v_acc: spec.net(), ubar, c };
    let nature = TwoBoxNature { v_hat, q: 1.0 - r - s, r, s, q_alternative: Some(q_alt) };
    Ok(TwoBoxSolution { policy, nature, regret: RegretValue::new(2.0 * c * ubar * ubar / den) })
}

/// Probability of opening the second box after the first revealed `u`.
pub fn acceptance_probability(u: f64, policy: &TwoBoxContinuousPolicy) -> f64 {
    let p = policy;
    if u >= p.v_acc {
        return 0.0;
    }
    if u <= p.v_low {
        return 1.0;
    }
    let gap = p.ubar - u;
    let a = p.alpha2_0;
    ((2.0 * gap - a * (gap + p.c)) / (a * gap)).clamp(0.0, 1.0)
}

/// Expected regret against the reward pair `{u, v}`.
pub fn pair_regret(u: f64, v: f64, policy: &TwoBoxContinuousPolicy) -> f64 {
    let (hi, lo) = if u >= v { (u, v) } else { (v, u) };
    let c = policy.c;
    let best = (hi - c).max(0.0);
    let after = |x: f64| {
        let go = acceptance_probability(x, policy);
        go * (best - (hi - 2.0 * c)) + (1.0 - go) * (best - (x - c))
    };
    (1.0 - policy.alpha2_0) * best + policy.alpha2_0 * 0.5 * (after(hi) + after(lo))
}

/// A pure strategy of the searcher used to probe the Nature mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Probe {
    OptOut,
    /// Open one box; stop iff the reward is at least `t`.
    Threshold(f64),
    /// Open one box; stop iff the reward is in the set encoded by the bits
    /// for `0`, `v_hat`, `ubar`.
    Support(u8),
}

fn probe_regret(probe: Probe, nature: &TwoBoxNature, ubar: f64, c: f64) -> f64 {
    let pairs = nature.pairs(ubar);
    let support = [0.0, nature.v_hat, ubar];
    let stops = |x: f64| match probe {
        Probe::OptOut => unreachable!(),
        Probe::Threshold(t) => x >= t,
        Probe::Support(bits) => support.iter().enumerate().any(|(i, &s)| bits >> i & 1 == 1 && s == x),
    };
    pairs
        .iter()
        .map(|&((hi, lo), w)| {
            let best = (hi - c).max(0.0);
            let r = match probe {
                Probe::OptOut => best,
                _ => {
                    let after = |x: f64| if stops(x) { best - (x - c) } else { best - (hi - 2.0 * c) };
                    0.5 * (after(hi) + after(lo))
                }
            };
            w * r
        })
        .sum()
}

/// Gap between `claimed` and the searcher's best reply to the mixture among
/// opting out and opening one box with continuation at 0 and stopping at
/// `ubar`, free at `v_hat`.
pub fn indifference_gap(nature: &TwoBoxNature, spec: &HomogeneousSpec, claimed: f64) -> f64 {
    [Probe::OptOut, Probe::Support(0b100), Probe::Support(0b110)]
        .iter()
        .map(|&p| claimed - probe_regret(p, nature, spec.ubar(), spec.c()))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn describe(probe: Probe, v_hat: f64, ubar: f64) -> String {
    match probe {
        Probe::OptOut => "opt out".into(),
        Probe::Threshold(t) if t.is_infinite() => "open both boxes".into(),
        Probe::Threshold(t) => format!("open one box and stop at rewards >= {t:.6}"),
        Probe::Support(bits) => {
            let at: Vec<String> = [0.0, v_hat, ubar]
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, x)| format!("{x:.6}"))
                .collect();
            format!("open one box and stop at rewards in {{{}}}", at.join(", "))
        }
    }
}

/// Saddle check on a uniform `grid_size x grid_size` grid of reward pairs
/// and a family of pure searcher deviations.
pub fn verify_two_box(
    policy: &TwoBoxContinuousPolicy,
    nature: &TwoBoxNature,
    spec: &HomogeneousSpec,
    grid_size: usize,
    claimed: f64,
    tolerance: f64,
) -> Result<SaddleReport> {
    if grid_size < 2 {
        return Err(domain("grid needs at least two points per axis"));
    }
    let ubar = spec.ubar();
    let c = spec.c();
    let step = ubar / (grid_size - 1) as f64;
    let node = |i: usize| if i + 1 == grid_size { ubar } else { step * i as f64 };
    let (best_val, best_pair) = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let u = node(i);
            (0..=i).fold((f64::NEG_INFINITY, (0.0, 0.0)), |acc, j| {
                let v = node(j);
                let r = pair_regret(u, v, policy);
                if r > acc.0 {
                    (r, (u, v))
                } else {
                    acc
                }
            })
        })
        .reduce(|| (f64::NEG_INFINITY, (0.0, 0.0)), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let mut probes = vec![Probe::OptOut];
    probes.extend((0..grid_size).map(|i| Probe::Threshold(node(i))));
    probes.push(Probe::Threshold(f64::INFINITY));
    probes.push(Probe::Threshold(nature.v_hat));
    probes.extend((0..8u8).map(Probe::Support));
    let scored: Vec<(Probe, f64)> = probes.iter().map(|&p| (p, probe_regret(p, nature, ubar, c))).collect();
    let (dm_probe, dm_best) =
        scored.iter().copied().fold((Probe::OptOut, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let local_best = claimed - indifference_gap(nature, spec, claimed);
    let mixture_regret: f64 = nature.pairs(ubar).iter().map(|&((u, v), w)| w * pair_regret(u, v, policy)).sum();
    let mut notes = vec![
        format!("regret of the policy against the Nature mixture: {mixture_regret:.12}"),
        format!("searcher gap over opt-out and the choice at v_hat alone: {:.3e}", claimed - local_best),
        format!(
            "best searcher deviation against the mixture: {} with regret {dm_best:.12}",
            describe(dm_probe, nature.v_hat, ubar)
        ),
    ];
    if let Some(gap) = nature.q_discrepancy() {
        notes.push(format!(
            "q is taken as 1 - r - s = {:.12}; the alternative closed form gives {:.12}, leaving {:.3e} of mass unassigned",
            nature.q,
            nature.q_alternative.unwrap_or(f64::NAN),
            gap
        ));
    }
    Ok(SaddleReport::new(
        best_val - claimed,
        claimed - dm_best,
        NatureBelief::TwoPointMixture { pairs: vec![(best_pair, 1.0)] },
        tolerance,
        claimed,
        notes,
    ))
}
