//! Heterogeneous boxes with independent rewards.
//!
//! Boxes are ranked by ascending net reward `delta_i = ubar_i - c_i`, ties
//! broken by input index. Subsets are bitmasks over ranks; bit `r` stands for
//! the box of rank `r`. Public accessors translate back to input indices.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{clamp_probability, RegretValue};

/// Largest menu the subset lattice is built for.
pub const MAX_BOXES: usize = 20;

/// One box: high reward and search cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxSpec {
    pub ubar: f64,
    pub c: f64,
}

/// Validated list of heterogeneous boxes and their rank order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneousSpec {
    boxes: Vec<BoxSpec>,
    #[serde(skip)]
    order: Vec<usize>,
    #[serde(skip)]
    rank: Vec<usize>,
}

impl HeterogeneousSpec {
    /// Requires `ubar_i > 0` and `0 < c_i < ubar_i` for every box.
    pub fn new(boxes: Vec<BoxSpec>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(domain("at least one box is required"));
        }
        for (i, b) in boxes.iter().enumerate() {
            if !(b.ubar.is_finite() && b.ubar > 0.0) {
                return Err(domain(format!("box {i}: ubar must be positive, got {}", b.ubar)));
            }
            if !(b.c.is_finite() && b.c > 0.0 && b.c < b.ubar) {
                return Err(domain(format!(
                    "box {i}: cost must satisfy 0 < c < ubar, got c = {}, ubar = {}",
                    b.c, b.ubar
                )));
            }
        }
        let mut order: Vec<usize> = (0..boxes.len()).collect();
        order.sort_by(|&a, &b| {
            let (da, db) = (boxes[a].ubar - boxes[a].c, boxes[b].ubar - boxes[b].c);
            da.total_cmp(&db)
        });
        let mut rank = vec![0; boxes.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Ok(HeterogeneousSpec { boxes, order, rank })
    }

    /// Convenience constructor from `(ubar, c)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(ubar, c)| BoxSpec { ubar, c }).collect())
    }

    /// `n` identical boxes.
    pub fn symmetric(ubar: f64, c: f64, n: usize) -> Result<Self> {
        Self::new(vec![BoxSpec { ubar, c }; n])
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Boxes in input order.
    pub fn boxes(&self) -> &[BoxSpec] {
        &self.boxes
    }

    /// `delta_i` for input index `i`.
    pub fn delta(&self, i: usize) -> f64 {
        self.boxes[i].ubar - self.boxes[i].c
    }

    /// `c_i / ubar_i` for input index `i`.
    pub fn p_hat(&self, i: usize) -> f64 {
        self.boxes[i].c / self.boxes[i].ubar
    }

    /// Input indices sorted by ascending `delta`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Rank of input index `i`.
    pub fn rank(&self, i: usize) -> usize {
        self.rank[i]
    }

    /// Bitmask of a subset given by input indices.
    pub fn mask_of(&self, subset: &[usize]) -> u32 {
        subset.iter().fold(0u32, |m, &i| m | 1 << self.rank[i])
    }

    /// Bitmask of the full menu.
    pub fn full_mask(&self) -> u32 {
        full_mask(self.len())
    }

    fn check_size(&self) -> Result<()> {
        if self.len() > MAX_BOXES {
            return Err(Error::Size { boxes: self.len(), limit: MAX_BOXES });
        }
        Ok(())
    }

    /// Per-rank `(delta, p_hat, c)`.
    fn ranked(&self) -> Ranked {
        let pick = |f: &dyn Fn(usize) -> f64| self.order.iter().map(|&i| f(i)).collect::<Vec<_>>();
        Ranked { delta: pick(&|i| self.delta(i)), p_hat: pick(&|i| self.p_hat(i)), cost: pick(&|i| self.boxes[i].c) }
    }
}

struct Ranked {
    delta: Vec<f64>,
    p_hat: Vec<f64>,
    cost: Vec<f64>,
}

fn full_mask(m: usize) -> u32 {
    if m == 32 {
        u32::MAX
    } else {
        (1u32 << m) - 1
    }
}

fn members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |r| mask >> r & 1 == 1)
}

/// Selection weights for every subset of the menu.
///
/// For subset `mask` the slice `[a(0), a(m_0), a(m_1), ...]` lists the outside
/// option first and then the members in ascending rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPolicy {
    boxes: usize,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl SelectionPolicy {
    /// Build from a function returning the weight slice of each nonempty subset.
    pub fn from_fn(boxes: usize, mut f: impl FnMut(u32) -> Vec<f64>) -> Result<Self> {
        if boxes > MAX_BOXES {
            return Err(Error::Size { boxes, limit: MAX_BOXES });
        }
        let count = 1usize << boxes;
        let mut offsets = Vec::with_capacity(count + 1);
        let mut data = Vec::new();
        for mask in 0..count as u32 {
            offsets.push(data.len());
            let want = mask.count_ones() as usize + 1;
            let w = if mask == 0 { vec![1.0] } else { f(mask) };
            if w.len() != want {
                return Err(domain(format!("subset {mask:#b} needs {want} weights, got {}", w.len())));
            }
            let mut total = 0.0;
            for x in &w {
                total += clamp_probability("selection weight", *x)?;
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(domain(format!("weights of subset {mask:#b} sum to {total}, not 1")));
            }
            data.extend(w.iter().map(|x| x.clamp(0.0, 1.0)));
        }
        offsets.push(data.len());
        Ok(SelectionPolicy { boxes, offsets, data })
    }

    /// Always take the outside option.
    pub fn opt_out(boxes: usize) -> Result<Self> {
        Self::from_fn(boxes, |mask| {
            let mut w = vec![0.0; mask.count_ones() as usize + 1];
            w[0] = 1.0;
            w
        })
    }

    pub fn boxes(&self) -> usize {
        self.boxes
    }

    /// Weight slice of subset `mask`: outside option, then members by rank.
    pub fn weights(&self, mask: u32) -> &[f64] {
        let m = mask as usize;
        &self.data[self.offsets[m]..self.offsets[m + 1]]
    }

    /// Probability of taking the outside option in subset `mask`.
    pub fn outside(&self, mask: u32) -> f64 {
        self.weights(mask)[0]
    }

    /// Probability of opening the box of rank `r` in subset `mask`.
    pub fn weight(&self, mask: u32, r: usize) -> f64 {
        debug_assert!(mask >> r & 1 == 1);
        let below = (mask & ((1u32 << r) - 1)).count_ones() as usize;
        self.weights(mask)[1 + below]
    }

    /// Pseudo-index `gamma = a(i) / a(0)` of rank `r` in subset `mask`.
    pub fn gamma(&self, mask: u32, r: usize) -> f64 {
        self.weight(mask, r) / self.outside(mask)
    }
}

/// Minimax-regret solution on the whole subset lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct HetSolution {
    pub policy: SelectionPolicy,
    /// `R*_N` indexed by subset mask.
    pub regret_per_subset: Vec<f64>,
    spec: HeterogeneousSpec,
}

/// The solution restricted to the full menu, keyed by input index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MenuSummary {
    pub outside: f64,
    pub weights: Vec<f64>,
    pub gammas: Vec<f64>,
    pub regret: RegretValue,
}

impl HetSolution {
    pub fn spec(&self) -> &HeterogeneousSpec {
        &self.spec
    }

    /// `R*` of the full menu.
    pub fn regret(&self) -> RegretValue {
        RegretValue::new(self.regret_per_subset[self.spec.full_mask() as usize])
    }

    /// Weight of input box `i` in the full menu.
    pub fn weight(&self, i: usize) -> f64 {
        self.policy.weight(self.spec.full_mask(), self.spec.rank(i))
    }

    /// Outside-option weight in the full menu.
    pub fn outside(&self) -> f64 {
        self.policy.outside(self.spec.full_mask())
    }

    /// Pseudo-index of input box `i` in the full menu.
    pub fn gamma(&self, i: usize) -> f64 {
        self.policy.gamma(self.spec.full_mask(), self.spec.rank(i))
    }

    pub fn summary(&self) -> MenuSummary {
        let n = self.spec.len();
        MenuSummary {
            outside: self.outside(),
            weights: (0..n).map(|i| self.weight(i)).collect(),
            gammas: (0..n).map(|i| self.gamma(i)).collect(),
            regret: self.regret(),
        }
    }
}

/// `psi(k, N) = prod_{j in N ranked above k} (1 - p_hat_j)`, with `k` an
/// input index and `subset` a list of input indices containing it.
pub fn psi(k: usize, subset: &[usize], spec: &HeterogeneousSpec) -> Result<f64> {
    if !subset.contains(&k) {
        return Err(domain(format!("box {k} is not in the subset")));
    }
    let rk = spec.rank(k);
    Ok(subset.iter().filter(|&&j| spec.rank(j) > rk).map(|&j| 1.0 - spec.p_hat(j)).product())
}

/// `R*_N = sum_{k in N} p_hat_k delta_k psi(k, N)`.
fn regret_star_mask(mask: u32, r: &Ranked) -> f64 {
    let mut tail = 1.0;
    let mut total = 0.0;
    for k in (0..32).rev().filter(|k| mask >> k & 1 == 1) {
        total += r.p_hat[k] * r.delta[k] * tail;
        tail *= 1.0 - r.p_hat[k];
    }
    total
}

/// Weights `[a(0), a(m_0), ...]` for one subset via the pseudo-index recursion.
fn subset_weights(mask: u32, r: &Ranked, regret_star: &[f64]) -> Vec<f64> {
    let ms: Vec<usize> = members(mask).collect();
    let s = ms.len();
    let p: Vec<f64> = ms.iter().map(|&k| r.p_hat[k]).collect();
    let d: Vec<f64> = ms.iter().map(|&k| r.delta[k]).collect();
    // psi[t] = psi(m_t, N)
    let mut psi = vec![1.0; s];
    for t in (0..s.saturating_sub(1)).rev() {
        psi[t] = psi[t + 1] * (1.0 - p[t + 1]);
    }
    // prefix sums over u < x of p psi delta and p psi
    let mut pre_pd = vec![0.0; s + 1];
    let mut pre_p = vec![0.0; s + 1];
    for t in 0..s {
        pre_pd[t + 1] = pre_pd[t] + p[t] * psi[t] * d[t];
        pre_p[t + 1] = pre_p[t] + p[t] * psi[t];
    }
    let (tot_pd, tot_p) = (pre_pd[s], pre_p[s]);
    let mut gamma = vec![0.0; s];
    for t in 0..s {
        let above = (tot_pd - pre_pd[t + 1]) - d[t] * (tot_p - pre_p[t + 1]);
        let without = regret_star[(mask & !(1u32 << ms[t])) as usize];
        let c_t = r.cost[ms[t]] + without - above;
        // psi(k, N \ i) = psi(k, N) / (1 - p_hat_i) for k ranked below i
        let drop = 1.0 / (1.0 - p[t]);
        let b = |lo: usize, p_l: f64, d_l: f64| {
            let mid_pd = pre_pd[t] - pre_pd[lo];
            let mid_p = pre_p[t] - pre_p[lo];
            p_l * (psi[t] * (d[t] - d_l) - drop * (mid_pd - d_l * mid_p))
        };
        let mut num = b(0, 1.0, 0.0);
        for l in 0..t {
            num += gamma[l] * b(l + 1, p[l], d[l]);
        }
        gamma[t] = num / c_t;
    }
    let total = 1.0 + gamma.iter().sum::<f64>();
    let mut w = Vec::with_capacity(s + 1);
    w.push(1.0 / total);
    w.extend(gamma.iter().map(|g| g / total));
    w
}

/// Minimax-regret selection rule for every subset of the menu.
pub fn solve_het(spec: &HeterogeneousSpec) -> Result<HetSolution> {
    spec.check_size()?;
    let r = spec.ranked();
    let count = 1usize << spec.len();
    let regret_star: Vec<f64> = (0..count as u32).into_par_iter().map(|m| regret_star_mask(m, &r)).collect();
    let per_mask: Vec<Vec<f64>> = (0..count as u32)
        .into_par_iter()
        .map(|m| if m == 0 { vec![1.0] } else { subset_weights(m, &r, &regret_star) })
        .collect();
    let mut offsets = Vec::with_capacity(count + 1);
    let mut data = Vec::with_capacity(count * (spec.len() + 2) / 2);
    for w in &per_mask {
        offsets.push(data.len());
        data.extend_from_slice(w);
    }
    offsets.push(data.len());
    Ok(HetSolution {
        policy: SelectionPolicy { boxes: spec.len(), offsets, data },
        regret_per_subset: regret_star,
        spec: spec.clone(),
    })
}

/// Expected regret of `policy` when box `i` (input order) is full with
/// probability `p[i]`, independently across boxes.
pub fn regret_het(policy: &SelectionPolicy, p: &[f64], spec: &HeterogeneousSpec) -> Result<RegretValue> {
    spec.check_size()?;
    if policy.boxes() != spec.len() || p.len() != spec.len() {
        return Err(domain(format!(
            "policy covers {} boxes and belief {} but the menu has {}",
            policy.boxes(),
            p.len(),
            spec.len()
        )));
    }
    let r = spec.ranked();
    let mut pr = vec![0.0; spec.len()];
    for (i, &x) in p.iter().enumerate() {
        pr[spec.rank(i)] = clamp_probability(&format!("p_{i}"), x)?;
    }
    let count = 1usize << spec.len();
    let mut memo = vec![0.0; count];
    let mut ms = Vec::with_capacity(spec.len());
    let mut suf_pd = Vec::with_capacity(spec.len() + 1);
    let mut suf_p = Vec::with_capacity(spec.len() + 1);
    for mask in 1..count as u32 {
        ms.clear();
        ms.extend(members(mask));
        let s = ms.len();
        // suffix sums over u >= x of p_u delta_u prod_{v > u}(1 - p_v) and p_u prod(...)
        suf_pd.clear();
        suf_pd.resize(s + 1, 0.0);
        suf_p.clear();
        suf_p.resize(s + 1, 0.0);
        let mut tail = 1.0;
        for t in (0..s).rev() {
            let k = ms[t];
            suf_pd[t] = suf_pd[t + 1] + pr[k] * tail * r.delta[k];
            suf_p[t] = suf_p[t + 1] + pr[k] * tail;
            tail *= 1.0 - pr[k];
        }
        let w = policy.weights(mask);
        let mut total = w[0] * suf_pd[0];
        for t in 0..s {
            let k = ms[t];
            let foregone = suf_pd[t + 1] - r.delta[k] * suf_p[t + 1];
            let cont = r.cost[k] + memo[(mask & !(1u32 << k)) as usize];
            total += w[t + 1] * (pr[k] * foregone + (1.0 - pr[k]) * cont);
        }
        memo[mask as usize] = total;
    }
    Ok(RegretValue::new(memo[count - 1]))
}

/// Indifference beliefs `p_hat_i` in input order.
pub fn p_hat_vector(spec: &HeterogeneousSpec) -> Vec<f64> {
    (0..spec.len()).map(|i| spec.p_hat(i)).collect()
}

/// One row of the two-box cost-asymmetry sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    /// Opening probability of the box whose cost grows with `delta`.
    pub a_i: f64,
    /// Opening probability of the box whose cost shrinks with `delta`.
    pub a_j: f64,
    /// `1 - a(0)`.
    pub total: f64,
}

/// Evenly spaced `delta` grid on `[0, 0.95 min(c_total, 2 ubar - c_total)]`.
pub fn default_delta_grid(ubar: f64, c_total: f64, steps: usize) -> Vec<f64> {
    let hi = 0.95 * c_total.min(2.0 * ubar - c_total);
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps).map(|k| hi * k as f64 / (steps - 1) as f64).collect(),
    }
}

/// Two boxes with common reward `ubar`, costs `c_i = (c_total + delta) / 2`
/// and `c_j = (c_total - delta) / 2`.
pub fn cost_asymmetry_sweep(ubar: f64, c_total: f64, delta_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if !(ubar > 0.0 && c_total > 0.0 && c_total < 2.0 * ubar) {
        return Err(domain(format!("need 0 < c_total < 2 ubar, got c_total = {c_total}, ubar = {ubar}")));
    }
    delta_grid
        .iter()
        .map(|&delta| {
            let spec =
                HeterogeneousSpec::from_pairs(&[(ubar, (c_total + delta) / 2.0), (ubar, (c_total - delta) / 2.0)])
                    .map_err(|e| domain(format!("delta = {delta}: {e}")))?;
            let sol = solve_het(&spec)?;
            Ok(SweepRow { delta, a_i: sol.weight(0), a_j: sol.weight(1), total: 1.0 - sol.outside() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indep::{alpha_star, regret_star};
    use crate::model::HomogeneousSpec;

    #[test]
    fn psi_examples() {
        let spec = HeterogeneousSpec::from_pairs(&[(1.0, 0.2), (2.0, 0.5), (1.5, 0.1)]).unwrap();
        // deltas 0.8, 1.5, 1.4: ranks 0, 2, 1
        assert_eq!(psi(1, &[0, 1, 2], &spec).unwrap(), 1.0);
        assert!((psi(0, &[0, 1], &spec).unwrap() - 0.75).abs() < 1e-15);
        let sym = HeterogeneousSpec::symmetric(1.0, 0.3, 4).unwrap();
        for k in 0..4 {
            let expect = 0.7f64.powi(3 - k as i32);
            assert!((psi(k, &[0, 1, 2, 3], &sym).unwrap() - expect).abs() < 1e-15);
        }
        assert!(psi(2, &[0, 1], &spec).is_err());
    }

    #[test]
    fn single_box() {
        let spec = HeterogeneousSpec::from_pairs(&[(2.0, 0.5)]).unwrap();
        let sol = solve_het(&spec).unwrap();
        assert!((sol.gamma(0) - 1.5 / 0.5).abs() < 1e-14);
        assert!((sol.weight(0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn two_symmetric_boxes() {
        let spec = HeterogeneousSpec::symmetric(1.0, 0.3, 2).unwrap();
        let sol = solve_het(&spec).unwrap();
        let hs = HomogeneousSpec::new(1.0, 0.3, 2).unwrap();
        let a2 = alpha_star(2, &hs);
        assert!((sol.weight(0) - a2 / 2.0).abs() < 1e-12);
        assert!((sol.weight(1) - a2 / 2.0).abs() < 1e-12);
        assert!((sol.weight(0) - 0.328_859).abs() < 1e-6);
        assert!((sol.outside() - 0.342_282).abs() < 1e-6);
        assert!((sol.regret().get() - 0.357).abs() < 1e-12);
    }

    #[test]
    fn symmetric_reduction_up_to_six() {
        for n in 2..=6 {
            let spec = HeterogeneousSpec::symmetric(1.0, 0.25, n).unwrap();
            let sol = solve_het(&spec).unwrap();
            let hs = HomogeneousSpec::new(1.0, 0.25, n).unwrap();
            for i in 0..n {
                assert!((sol.weight(i) - alpha_star(n, &hs) / n as f64).abs() < 1e-10);
            }
            assert!((sol.regret().get() - regret_star(n, &hs)).abs() < 1e-10);
        }
    }

    #[test]
    fn weights_are_interior_and_normalized() {
        let spec = HeterogeneousSpec::from_pairs(&[(1.0, 0.2), (2.0, 0.5), (1.5, 0.1), (0.8, 0.3)]).unwrap();
        let sol = solve_het(&spec).unwrap();
        for mask in 1..16u32 {
            let w = sol.policy.weights(mask);
            assert!(w.iter().all(|&x| x > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn opt_out_regret() {
        let spec = HeterogeneousSpec::from_pairs(&[(1.0, 0.2), (2.0, 0.5), (1.5, 0.1)]).unwrap();
        let pol = SelectionPolicy::opt_out(3).unwrap();
        let p = [0.3, 0.6, 0.1];
        // ranks by delta: box 0 (0.8), box 2 (1.4), box 1 (1.5)
        let expect = 0.6 * 1.5 + 0.1 * 0.4 * 1.4 + 0.3 * 0.4 * 0.9 * 0.8;
        let r = regret_het(&pol, &p, &spec).unwrap().get();
        assert!((r - expect).abs() < 1e-14);
    }

    #[test]
    fn empty_boxes_cost_only() {
        let spec = HeterogeneousSpec::from_pairs(&[(1.0, 0.2), (2.0, 0.5)]).unwrap();
        let sol = solve_het(&spec).unwrap();
        let r = regret_het(&sol.policy, &[0.0, 0.0], &spec).unwrap().get();
        // a(1) c_1 + a(2) c_2 + a(1) a_{2}(2) c_2 + a(2) a_{1}(1) c_1
        let full = spec.full_mask();
        let pol = &sol.policy;
        let (r0, r1) = (spec.rank(0), spec.rank(1));
        let only0 = 1u32 << r0;
        let only1 = 1u32 << r1;
        let expect = pol.weight(full, r0) * (0.2 + pol.weight(only1, r1) * 0.5)
            + pol.weight(full, r1) * (0.5 + pol.weight(only0, r0) * 0.2);
        assert!((r - expect).abs() < 1e-14);
    }

    #[test]
    fn size_limit() {
        let spec = HeterogeneousSpec::symmetric(1.0, 0.3, 21).unwrap();
        assert_eq!(solve_het(&spec).unwrap_err(), Error::Size { boxes: 21, limit: 20 });
    }

    #[test]
    fn sweep_examples() {
        let grid = default_delta_grid(1.0, 0.6, 30);
        assert_eq!(grid.len(), 30);
        let rows = cost_asymmetry_sweep(1.0, 0.6, &grid).unwrap();
        let hs = HomogeneousSpec::new(1.0, 0.3, 2).unwrap();
        assert!((rows[0].a_i - rows[0].a_j).abs() < 1e-15);
        assert!((rows[0].total - alpha_star(2, &hs)).abs() < 1e-12);
        for w in rows.windows(2) {
            assert!(w[1].a_j > w[0].a_j);
            assert!(w[1].a_i < w[0].a_i);
            assert!(w[1].total >= w[0].total);
        }
        assert!(cost_asymmetry_sweep(1.0, 0.6, &[0.7]).is_err());
    }
}
