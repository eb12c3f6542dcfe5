//! Gale–Shapley against the brute-force set of all stable matchings.

use matchkit_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Partners of `agent` on `side` under `mu`, repeats included.
fn partners(mu: &Matching, side: Side, agent: usize) -> Vec<usize> {
    let (me, other) = (side.index(), side.other().index());
    mu.tuples().iter().filter(|t| t[me] == agent).map(|t| t[other]).collect()
}

/// The best `quota` agents of `pool` for an owner with rank table `ranks`.
fn choose(ranks: &RankTable, owner: usize, pool: &[usize], quota: u32) -> Vec<usize> {
    // a union of partner sets: pair caps are one in these markets
    let mut v = pool.to_vec();
    v.sort_unstable();
    v.dedup();
    v.sort_by_key(|&x| (ranks.rank(owner, x).unwrap_or(u32::MAX), x));
    v.truncate(quota as usize);
    v.sort_unstable();
    v
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn market(seed: u64, n: usize, m: usize, quota: u32) -> TwoSidedMarket {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_two_sided(&mut rng, n, m, &RandomOptions::default().with_max_quota(quota))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    /// The proposers' result is the best any stable matching gives them (the
    /// top of the union of both partner sets), and the worst for receivers.
    #[test]
    fn gs_is_proposer_optimal_and_receiver_pessimal(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=5, quota in 1u32..=2) {
        let mk = market(seed, n, m, quota);
        let all = enumerate_all_stable(&mk).unwrap();
        let ranks = [RankTable::new(&mk.left_prefs, mk.n_right()), RankTable::new(&mk.right_prefs, mk.n_left())];
        for proposer in [Side::Left, Side::Right] {
            let gs = gs_match(&mk, proposer).unwrap();
            prop_assert!(all.contains(&gs));
            let recv = proposer.other();
            for mu in &all {
                for i in 0..mk.size(proposer) {
                    let mut pool = partners(&gs, proposer, i);
                    pool.extend(partners(mu, proposer, i));
                    let best = choose(&ranks[proposer.index()], i, &pool, mk.quotas(proposer)[i]);
                    prop_assert_eq!(best, sorted(partners(&gs, proposer, i)));
                }
                for j in 0..mk.size(recv) {
                    let mut pool = partners(&gs, recv, j);
                    pool.extend(partners(mu, recv, j));
                    let best = choose(&ranks[recv.index()], j, &pool, mk.quotas(recv)[j]);
                    prop_assert_eq!(best, sorted(partners(mu, recv, j)));
                }
            }
        }
    }

    /// Every stable matching matches every agent the same number of times.
    #[test]
    fn match_counts_are_invariant(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=5, quota in 1u32..=2) {
        let mk = market(seed, n, m, quota);
        let all = enumerate_all_stable(&mk).unwrap();
        let first = match_count_profile(&mk, &all[0]);
        for mu in &all {
            prop_assert_eq!(&match_count_profile(&mk, mu), &first);
            if quota == 1 {
                prop_assert_eq!(matched_set(mu), matched_set(&all[0]));
            }
        }
    }

    /// A matching stable after tie-breaking is stable for the original lists.
    #[test]
    fn strictification_preserves_stability(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6, rule_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mk = random_two_sided(&mut rng, n, m, &RandomOptions::default().with_ties(0.5).with_max_quota(2));
        for rule in [StrictificationRule::ByAgentIndex, StrictificationRule::SeededRandom(rule_seed)] {
            let strict = mk.strictified(rule);
            prop_assert!(strict.is_strict());
            for side in [Side::Left, Side::Right] {
                let mu = gs_match(&strict, side).unwrap();
                prop_assert!(find_blocking_pairs(&strict, &mu, PrefView::Original).is_empty());
                prop_assert!(find_blocking_pairs(&mk, &mu, PrefView::Original).is_empty());
                prop_assert!(find_blocking_pairs(&mk, &mu, PrefView::Strictified(rule)).is_empty());
            }
        }
    }

    #[test]
    fn free_proposer_order_does_not_matter(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8, quota in 1u32..=3) {
        let mk = market(seed, n, m, quota);
        for side in [Side::Left, Side::Right] {
            let (fifo, _) = gs_match_with(&mk, side, QueueDiscipline::Fifo).unwrap();
            let (lifo, _) = gs_match_with(&mk, side, QueueDiscipline::Lifo).unwrap();
            prop_assert_eq!(fifo, lifo);
        }
    }
}

#[test]
fn pair_caps_allow_repeated_matches() {
    let s = |v: &[usize]| PreferenceList::strict(v.iter().copied());
    let mk = TwoSidedMarket::new(vec![s(&[0, 1])], vec![s(&[0]), s(&[0])])
        .with_quotas(vec![3], vec![2, 1])
        .with_pair_policy(PairPolicy::UpTo(2));
    let mu = gs_match(&mk, Side::Left).unwrap();
    assert_eq!(mu, Matching::from_pairs([(0, 0), (0, 0), (0, 1)]));
    assert!(find_blocking_pairs(&mk, &mu, PrefView::Original).is_empty());
    assert!(enumerate_all_stable(&mk).unwrap().contains(&mu));
}
