//! State-enumeration oracles for the regret evaluators and proptest invariants.

use proptest::prelude::*;
use robust_pandora::cli::output::fmt_sig;
use robust_pandora::corr::{solve_corr_commitment, success_profile};
use robust_pandora::het::{regret_het, solve_het, HeterogeneousSpec, SelectionPolicy};
use robust_pandora::indep::{expected_opened, regret_star, solve_indep};
use robust_pandora::interim::{interim_regret, interim_regret_by_utilities, InterimPolicy};
use robust_pandora::model::{
    regret_count_profile, regret_indep, regret_needle, CountProfile, HomogeneousSpec, NatureBelief, StationaryPolicy,
    StoppingMixture,
};
use robust_pandora::sim::simulate;
use robust_pandora::two_box::{acceptance_probability, pair_regret, solve_two_box};

/// Expected regret of a stationary policy that opens boxes left to right
/// when `full[i]` says which boxes hold the reward.
fn play_stationary(policy: &StationaryPolicy, full: &[bool], ubar: f64, c: f64) -> f64 {
    let n = full.len();
    let best = if full.iter().any(|&f| f) { ubar - c } else { 0.0 };
    // reach = probability of opening the box at position i
    let mut reach = 1.0;
    let mut payoff = 0.0;
    for (i, &f) in full.iter().enumerate() {
        let open = reach * policy.alpha(n - i);
        payoff += (reach - open) * -(i as f64 * c);
        if f {
            payoff += open * (ubar - (i + 1) as f64 * c);
            reach = 0.0;
            break;
        }
        reach = open;
    }
    payoff += reach * -(n as f64 * c);
    best - payoff
}

fn states(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u32 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn oracle_indep(policy: &StationaryPolicy, p: f64, ubar: f64, c: f64) -> f64 {
    states(policy.len())
        .map(|s| {
            let k = s.iter().filter(|&&f| f).count() as i32;
            p.powi(k) * (1.0 - p).powi(s.len() as i32 - k) * play_stationary(policy, &s, ubar, c)
        })
        .sum()
}

fn oracle_needle(policy: &StationaryPolicy, big_p: f64, ubar: f64, c: f64) -> f64 {
    let n = policy.len();
    let empty = vec![false; n];
    let mut r = (1.0 - big_p) * play_stationary(policy, &empty, ubar, c);
    for j in 0..n {
        let mut s = empty.clone();
        s[j] = true;
        r += big_p / n as f64 * play_stationary(policy, &s, ubar, c);
    }
    r
}

fn oracle_count_profile(w: &[f64], q: &[f64], ubar: f64, c: f64) -> f64 {
    let n = q.len() - 1;
    states(n)
        .map(|s| {
            let k = s.iter().filter(|&&f| f).count();
            let prob = q[k] / binomial(n, k);
            let best = if k > 0 { ubar - c } else { 0.0 };
            let plan: f64 = w
                .iter()
                .enumerate()
                .map(|(m, &wm)| {
                    // stop after m failures
                    let opened = s.iter().take(m).position(|&f| f);
                    let payoff = match opened {
                        Some(i) => ubar - (i + 1) as f64 * c,
                        None => -(m.min(s.len()) as f64) * c,
                    };
                    wm * (best - payoff)
                })
                .sum();
            prob * plan
        })
        .sum()
}

/// Expected payoff of `policy` from subset `mask` onward when `full` is the state.
fn het_play(policy: &SelectionPolicy, spec: &HeterogeneousSpec, full: &[bool], mask: u32) -> f64 {
    if mask == 0 {
        return 0.0;
    }
    let w = policy.weights(mask);
    let members: Vec<usize> = (0..spec.len()).filter(|&r| mask >> r & 1 == 1).collect();
    members
        .iter()
        .enumerate()
        .map(|(t, &r)| {
            let i = spec.order()[r];
            let b = spec.boxes()[i];
            let value = if full[i] { b.ubar - b.c } else { -b.c + het_play(policy, spec, full, mask & !(1 << r)) };
            w[t + 1] * value
        })
        .sum()
}

fn oracle_het(policy: &SelectionPolicy, p: &[f64], spec: &HeterogeneousSpec) -> f64 {
    states(spec.len())
        .map(|s| {
            let prob: f64 = s.iter().zip(p).map(|(&f, &pi)| if f { pi } else { 1.0 - pi }).product();
            let best = (0..s.len()).filter(|&i| s[i]).map(|i| spec.delta(i)).fold(0.0, f64::max);
            prob * (best - het_play(policy, spec, &s, spec.full_mask()))
        })
        .sum()
}

fn spec_strategy(max_n: usize) -> impl Strategy<Value = HomogeneousSpec> {
    (0.2f64..3.0, 0.02f64..0.95, 1..=max_n)
        .prop_map(|(ubar, frac, n)| HomogeneousSpec::new(ubar, ubar * frac, n).unwrap())
}

fn policy_for(n: usize) -> impl Strategy<Value = StationaryPolicy> {
    prop::collection::vec(0.0f64..=1.0, n).prop_map(|a| StationaryPolicy::new(a).unwrap())
}

fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, len).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let drift = 1.0 - w.iter().sum::<f64>();
        w[0] += drift;
        w
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn indep_matches_state_enumeration(
        (s, pol) in spec_strategy(6).prop_flat_map(|s| (Just(s), policy_for(s.n()))),
        p in 0.0f64..=1.0,
    ) {
        let fast = regret_indep(&pol, p, &s).unwrap().get();
        let slow = oracle_indep(&pol, p, s.ubar(), s.c());
        prop_assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn needle_matches_state_enumeration(
        (s, pol) in spec_strategy(7).prop_flat_map(|s| (Just(s), policy_for(s.n()))),
        big_p in 0.0f64..=1.0,
    ) {
        let fast = regret_needle(&pol, big_p, &s).unwrap().get();
        let slow = oracle_needle(&pol, big_p, s.ubar(), s.c());
        prop_assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn count_profile_matches_state_enumeration(
        (s, q, w) in spec_strategy(6).prop_flat_map(|s| (Just(s), simplex(s.n() + 1), simplex(s.n() + 1))),
    ) {
        let fast = regret_count_profile(
            &StoppingMixture::new(w.clone()).unwrap(),
            &CountProfile::new(q.clone()).unwrap(),
            &s,
        ).unwrap().get();
        let slow = oracle_count_profile(&w, &q, s.ubar(), s.c());
        prop_assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn stationary_policy_and_its_stopping_mixture_agree(
        (s, pol) in spec_strategy(6).prop_flat_map(|s| (Just(s), policy_for(s.n()))),
        p in 0.0f64..=1.0,
    ) {
        let via_profile = regret_count_profile(
            &StoppingMixture::from_policy(&pol),
            &CountProfile::binomial(s.n(), p).unwrap(),
            &s,
        ).unwrap().get();
        let direct = regret_indep(&pol, p, &s).unwrap().get();
        prop_assert!((via_profile - direct).abs() < 1e-12);
    }

    #[test]
    fn minimax_policy_caps_regret_over_p(s in spec_strategy(12), p in 0.0f64..=1.0) {
        let sol = solve_indep(&s);
        let r = regret_indep(&sol.policy, p, &s).unwrap().get();
        prop_assert!(r <= sol.regret.get() + 1e-12);
        prop_assert!((sol.regret.get() - regret_star(s.n(), &s)).abs() < 1e-15);
    }

    #[test]
    fn p_hat_makes_every_policy_indifferent(
        (s, pol) in spec_strategy(8).prop_flat_map(|s| (Just(s), policy_for(s.n()))),
    ) {
        let r = regret_indep(&pol, s.p_hat(), &s).unwrap().get();
        prop_assert!((r - regret_star(s.n(), &s)).abs() < 1e-10);
    }

    #[test]
    fn committed_plan_caps_needle_regret(s in spec_strategy(12), big_p in 0.0f64..=1.0) {
        let sol = solve_corr_commitment(&s);
        let r = regret_needle(&sol.policy, big_p, &s).unwrap().get();
        prop_assert!(r <= sol.regret_n().get() + 1e-12, "{r} > {}", sol.regret_n().get());
    }

    #[test]
    fn success_profile_is_monotone_with_total_mass(q in (1usize..9).prop_flat_map(|n| simplex(n + 1))) {
        let prof = CountProfile::new(q.clone()).unwrap();
        let succ = success_profile(&prof);
        prop_assert!(succ.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        let total: f64 = succ.iter().sum();
        prop_assert!((total - (1.0 - q[0])).abs() < 1e-12);
    }

    #[test]
    fn expected_opened_is_bounded(
        (s, pol) in spec_strategy(10).prop_flat_map(|s| (Just(s), policy_for(s.n()))),
        q in 0.0f64..=1.0,
    ) {
        let opened = expected_opened(&pol, q).unwrap();
        prop_assert!((0.0..=s.n() as f64 + 1e-12).contains(&opened));
    }

    #[test]
    fn interim_routes_agree(
        (s, phi) in spec_strategy(7).prop_flat_map(|s| {
            let n = s.n();
            (Just(s), prop::collection::vec(0.0f64..=1.0, n))
        }),
        p in 0.0f64..=1.0,
    ) {
        let mut phi = phi;
        phi.sort_by(f64::total_cmp);
        let pol = InterimPolicy::from_phi(phi).unwrap();
        let a = interim_regret(&pol, p, &s).unwrap().get();
        let b = interim_regret_by_utilities(&pol, p, &s).unwrap().get();
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn acceptance_probability_is_monotone(frac in 0.01f64..0.45, u in 0.0f64..1.0, du in 0.0f64..0.5) {
        let sol = solve_two_box(&HomogeneousSpec::new(1.0, frac, 2).unwrap()).unwrap();
        let lo = acceptance_probability(u, &sol.policy);
        let hi = acceptance_probability((u + du).min(1.0), &sol.policy);
        prop_assert!((0.0..=1.0).contains(&lo) && hi <= lo);
        prop_assert!(pair_regret(u, (u + du).min(1.0), &sol.policy) >= 0.0);
    }

    #[test]
    fn sig_digits_round_trip(x in -1e6f64..1e6) {
        let back: f64 = fmt_sig(x, 12).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn het_matches_state_enumeration(
        pairs in prop::collection::vec((0.5f64..2.0, 0.05f64..0.9), 1..=4),
        seed_weights in prop::collection::vec(0.001f64..1.0, 64),
        p in prop::collection::vec(0.0f64..=1.0, 4),
    ) {
        let pairs: Vec<(f64, f64)> = pairs.iter().map(|&(u, f)| (u, u * f)).collect();
        let spec = HeterogeneousSpec::from_pairs(&pairs).unwrap();
        let n = spec.len();
        let mut cursor = 0;
        let policy = SelectionPolicy::from_fn(n, |mask| {
            let len = mask.count_ones() as usize + 1;
            let raw: Vec<f64> = (0..len).map(|i| seed_weights[(cursor + i) % 64]).collect();
            cursor += len;
            let total: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let drift = 1.0 - w.iter().sum::<f64>();
            w[0] += drift;
            w
        }).unwrap();
        let p = &p[..n];
        let fast = regret_het(&policy, p, &spec).unwrap().get();
        let slow = oracle_het(&policy, p, &spec);
        prop_assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn symmetric_het_solution_matches_indep(frac in 0.05f64..0.9, n in 1usize..=6, p in 0.0f64..=1.0) {
        let hs = HeterogeneousSpec::symmetric(1.0, frac, n).unwrap();
        let s = HomogeneousSpec::new(1.0, frac, n).unwrap();
        let sol = solve_het(&hs).unwrap();
        let het = regret_het(&sol.policy, &vec![p; n], &hs).unwrap().get();
        let indep = regret_indep(&solve_indep(&s).policy, p, &s).unwrap().get();
        prop_assert!((het - indep).abs() < 1e-12, "{het} vs {indep}");
    }

    #[test]
    fn simulation_is_seed_deterministic(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let s = HomogeneousSpec::new(1.0, 0.3, 4).unwrap();
        let pol = solve_indep(&s).policy;
        let truth = NatureBelief::IidBinary { p };
        let a = simulate(&pol, &truth, &s, 5000, seed).unwrap();
        let b = simulate(&pol, &truth, &s, 5000, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.mean_regret >= 0.0 && a.mean_opened <= 4.0);
    }
}
