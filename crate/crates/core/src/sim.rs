//! Monte Carlo simulation of the search process under a true distribution.
//!
//! # Random stream contract
//!
//! Episode `e` of a run with seed `s` draws from ChaCha8 keyed by the 32-byte
//! key `s.to_le_bytes()` followed by 24 zero bytes, with stream `e` and word
//! position 0. A uniform is `(next_u64 >> 11) * 2^-53`. Draws are consumed in
//! this order:
//!
//! 1. the state: one uniform per box for i.i.d. and heterogeneous truths
//!    (box `i` is full iff `u < p_i`), or one uniform for a count profile
//!    (the count `j` is the first index whose cumulative mass exceeds `u`;
//!    the first `j` boxes are full);
//! 2. homogeneous only: a Fisher-Yates shuffle of the opening order, for
//!    `i = n-1` down to `1` swapping `i` with `floor(u (i + 1))`;
//! 3. one uniform per decision. Homogeneous plans open the next box iff
//!    `u < alpha_k`. Heterogeneous plans pick the first slot whose cumulative
//!    weight exceeds `u`, slots ordered as outside option and then boxes by
//!    ascending net reward.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::het::{HeterogeneousSpec, SelectionPolicy};
use crate::model::{CountProfile, HomogeneousSpec, NatureBelief, StationaryPolicy};

/// Largest supported number of episodes.
pub const MAX_EPISODES: u64 = 1 << 40;
/// Episodes per work item.
pub const CHUNK: u64 = 4096;

/// Monte Carlo estimates with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationResult {
    pub episodes: u64,
    pub mean_opened: f64,
    pub se_opened: f64,
    pub mean_regret: f64,
    pub se_regret: f64,
    pub seed: u64,
}

/// The random stream of one episode.
pub fn episode_rng(seed: u64, episode: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(episode);
    rng.set_word_pos(0);
    rng
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    opened: Neumaier,
    opened_sq: Neumaier,
    regret: Neumaier,
    regret_sq: Neumaier,
}

impl Moments {
    fn push(&mut self, opened: f64, regret: f64) {
        self.opened.add(opened);
        self.opened_sq.add(opened * opened);
        self.regret.add(regret);
        self.regret_sq.add(regret * regret);
    }

    fn merge(&mut self, o: Moments) {
        self.opened.merge(o.opened);
        self.opened_sq.merge(o.opened_sq);
        self.regret.merge(o.regret);
        self.regret_sq.merge(o.regret_sq);
    }
}

fn mean_se(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn run(episodes: u64, seed: u64, episode: impl Fn(&mut ChaCha8Rng) -> (f64, f64) + Sync) -> Result<SimulationResult> {
    if episodes == 0 {
        return Err(domain("at least one episode is required"));
    }
    if episodes > MAX_EPISODES {
        return Err(Error::Seed { episodes, limit: MAX_EPISODES });
    }
    let chunks = episodes.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut m = Moments::default();
            for e in ci * CHUNK..((ci + 1) * CHUNK).min(episodes) {
                let (opened, regret) = episode(&mut episode_rng(seed, e));
                m.push(opened, regret);
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total.merge(p);
    }
    let (mean_opened, se_opened) = mean_se(total.opened.value(), total.opened_sq.value(), episodes);
    let (mean_regret, se_regret) = mean_se(total.regret.value(), total.regret_sq.value(), episodes);
    Ok(SimulationResult { episodes, mean_opened, se_opened, mean_regret, se_regret, seed })
}

enum HomTruth {
    Iid(f64),
    Profile(Vec<f64>),
}

fn draw_count(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let u = uniform(rng);
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// Simulate a stationary policy on identical boxes. `truth` must be
/// `IidBinary`, `NeedleP` or `CountProfile`.
pub fn simulate(
    policy: &StationaryPolicy,
    truth: &NatureBelief,
    spec: &HomogeneousSpec,
    episodes: u64,
    seed: u64,
) -> Result<SimulationResult> {
    let n = spec.n();
    if policy.len() != n {
        return Err(domain(format!("policy covers {} boxes but the problem has {n}", policy.len())));
    }
    truth.validate(spec.ubar())?;
    let truth = match truth {
        NatureBelief::IidBinary { p } => HomTruth::Iid(p.clamp(0.0, 1.0)),
        NatureBelief::NeedleP { big_p } => HomTruth::Profile(cumulate(CountProfile::needle(n, *big_p)?.as_slice())),
        NatureBelief::CountProfile { profile } => {
            if profile.boxes() != n {
                return Err(domain(format!("profile covers {} boxes but the problem has {n}", profile.boxes())));
            }
            HomTruth::Profile(cumulate(profile.as_slice()))
        }
        _ => return Err(domain("identical boxes need an i.i.d., needle or count-profile truth")),
    };
    let (net, c) = (spec.net(), spec.c());
    let alphas = policy.as_slice();
    run(episodes, seed, |rng| {
        let mut full = [false; 64];
        let mut full_vec;
        let state: &mut [bool] = if n <= 64 {
            &mut full[..n]
        } else {
            full_vec = vec![false; n];
            &mut full_vec
        };
        match &truth {
            HomTruth::Iid(p) => state.iter_mut().for_each(|b| *b = uniform(rng) < *p),
            HomTruth::Profile(cum) => {
                let j = draw_count(rng, cum);
                state[..j].iter_mut().for_each(|b| *b = true);
            }
        }
        for i in (1..n).rev() {
            let j = ((uniform(rng) * (i + 1) as f64) as usize).min(i);
            state.swap(i, j);
        }
        let oracle = if state.iter().any(|&b| b) { net } else { 0.0 };
        let mut opened = 0usize;
        let mut payoff = 0.0;
        for k in (1..=n).rev() {
            if uniform(rng) >= alphas[k - 1] {
                break;
            }
            opened += 1;
            if state[n - k] {
                payoff = spec.ubar();
                break;
            }
        }
        let payoff = payoff - c * opened as f64;
        (opened as f64, oracle - payoff)
    })
}

fn cumulate(q: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    q.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// Simulate a selection policy on heterogeneous boxes with independent
/// success probabilities `p` (input order).
pub fn simulate_het(
    policy: &SelectionPolicy,
    p: &[f64],
    spec: &HeterogeneousSpec,
    episodes: u64,
    seed: u64,
) -> Result<SimulationResult> {
    let n = spec.len();
    if policy.boxes() != n || p.len() != n {
        return Err(domain(format!(
            "policy covers {} boxes and belief {} but the menu has {n}",
            policy.boxes(),
            p.len()
        )));
    }
    NatureBelief::HeteroPVector { p: p.to_vec() }.validate(f64::INFINITY)?;
    let order = spec.order().to_vec();
    let boxes = spec.boxes().to_vec();
    run(episodes, seed, |rng| {
        let full: Vec<bool> = p.iter().map(|&pi| uniform(rng) < pi).collect();
        let oracle = (0..n).filter(|&i| full[i]).map(|i| spec.delta(i)).fold(0.0, f64::max);
        let mut mask = spec.full_mask();
        let mut opened = 0usize;
        let mut cost = 0.0;
        let mut prize = 0.0;
        while mask != 0 {
            let u = uniform(rng);
            let w = policy.weights(mask);
            let mut acc = w[0];
            if u < acc {
                break;
            }
            let mut pick = None;
            for (slot, r) in (0..n).filter(|r| mask >> r & 1 == 1).enumerate() {
                acc += w[slot + 1];
                if u < acc {
                    pick = Some(r);
                    break;
                }
            }
            // rounding can leave u above the final cumulative weight
            let r = match pick {
                Some(r) => r,
                None => 31 - mask.leading_zeros() as usize,
            };
            let i = order[r];
            opened += 1;
            cost += boxes[i].c;
            if full[i] {
                prize = boxes[i].ubar;
                break;
            }
            mask &= !(1u32 << r);
        }
        (opened as f64, oracle - (prize - cost))
    })
}
