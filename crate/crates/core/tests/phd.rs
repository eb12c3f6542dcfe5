//! Properties of the PhD algorithm family on random markets.

use std::collections::BTreeSet;
use std::sync::Arc;

use matchkit_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn three_sided(seed: u64, sizes: &[usize], ties: f64, quota: u32) -> MultiSidedMarket {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_multi_sided(&mut rng, sizes, &RandomOptions::default().with_ties(ties).with_max_quota(quota))
}

fn all_configs() -> Vec<EngineConfig> {
    ProposalOrder::ALL
        .into_iter()
        .flat_map(|o| [EngineConfig::three_sided(o), EngineConfig::three_sided_mfp(o)])
        .collect()
}

fn removed_sets(trace: &IterationTrace) -> Vec<Vec<usize>> {
    trace.records.iter().map(|r| r.students_removed().to_vec()).collect()
}

/// Gale–Shapley behind the custom-matcher interface.
struct Wrapped(Side);

impl StableMatcher for Wrapped {
    fn name(&self) -> &str {
        "wrapped"
    }

    fn solve(&self, market: &TwoSidedMarket) -> Result<Matching, Error> {
        gs_match(market, self.0)
    }
}

/// How often each agent appears, per side.
fn match_counts(mu: &Matching) -> Vec<Vec<(usize, usize)>> {
    (0..3)
        .map(|k| {
            let mut v: Vec<usize> = mu.tuples().iter().map(|t| t[k]).collect();
            v.sort_unstable();
            let mut counts: Vec<(usize, usize)> = Vec::new();
            for x in v {
                match counts.last_mut() {
                    Some((y, n)) if *y == x => *n += 1,
                    _ => counts.push((x, 1)),
                }
            }
            counts
        })
        .collect()
}

fn sizes(n: usize, max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn matched_agents_are_invariant(seed in any::<u64>(), sz in sizes(3, 8), ties in prop::sample::select(vec![0.0, 0.3])) {
        let m = three_sided(seed, &sz, ties, 1);
        let (reference, ref_trace) = phd_match(&m, &EngineConfig::default()).unwrap();
        for cfg in all_configs() {
            let (mu, trace) = phd_match(&m, &cfg).unwrap();
            prop_assert!(validate_matching(&m, &mu).is_empty());
            prop_assert_eq!(matched_set(&mu), matched_set(&reference));
            prop_assert_eq!(removed_sets(&trace), removed_sets(&ref_trace));
            prop_assert_eq!(trace.complete_matches(), ref_trace.complete_matches());
        }
    }

    /// Both engines agree on who is matched; the concrete matching is stable
    /// whenever the last market solved has its far side proposing or runs
    /// incrementally.
    #[test]
    fn stable_variants(seed in any::<u64>(), sz in sizes(3, 8), ties in prop::sample::select(vec![0.0, 0.3])) {
        let m = three_sided(seed, &sz, ties, 1);
        for order in ProposalOrder::ALL {
            let mfp = EngineConfig::three_sided_mfp(order);
            let far_side = if order.coadvisor_market() == Side::Right { vec![EngineConfig::three_sided(order)] } else { vec![] };
            for cfg in far_side.into_iter().chain([mfp.clone()]) {
                let (mu, trace) = phd_match(&m, &cfg).unwrap();
                prop_assert!(find_blocking_triples(&m, &mu).unwrap().is_empty());
                prop_assert_eq!(trace.last().unwrap().blocking, Some(0));
            }
            let mut swapped = vec![mfp.with_swap_order(true)];
            if order.advisor_market() == Side::Left {
                swapped.push(EngineConfig::three_sided(order).with_swap_order(true));
            }
            for cfg in swapped {
                let (mu, _) = phd_match(&m, &cfg).unwrap();
                prop_assert!(find_blocking_triples(&m, &mu).unwrap().is_empty());
            }
        }
    }

    /// Complete matches never decrease, removed students never return, and
    /// every co-advisor's student only gets better.
    #[test]
    fn iterations_are_monotone(seed in any::<u64>(), sz in sizes(3, 8)) {
        let m = three_sided(seed, &sz, 0.0, 1);
        let (_, trace) = phd_match(&m, &EngineConfig::default()).unwrap();
        let ranks = RankTable::new(&m.links[1].backward, m.sizes[1]);
        for w in trace.records.windows(2) {
            prop_assert!(w[0].complete_matches <= w[1].complete_matches);
            let before: BTreeSet<usize> = w[0].students_remaining().iter().copied().collect();
            let after: BTreeSet<usize> = w[1].students_remaining().iter().copied().collect();
            let removed: BTreeSet<usize> = w[0].students_removed().iter().copied().collect();
            prop_assert_eq!(&before - &removed, after);
            for &(s, c) in &w[0].pair_matchings[1] {
                let later = w[1].pair_matchings[1].iter().find(|p| p.1 == c).map(|p| p.0);
                prop_assert!(later.is_some_and(|t| ranks.rank(c, t) <= ranks.rank(c, s)));
            }
        }
        prop_assert!(trace.last().unwrap().students_removed().is_empty());
    }

    #[test]
    fn baseline_never_beats_phd(seed in any::<u64>(), sz in sizes(3, 8)) {
        let m = three_sided(seed, &sz, 0.2, 1);
        let cfg = EngineConfig::default();
        let (mu, trace) = phd_match(&m, &cfg).unwrap();
        let base = danilov_baseline(&m, &cfg).unwrap();
        prop_assert!(base.len() <= mu.len());
        prop_assert_eq!(base.len(), trace.records[0].complete_matches);
    }

    #[test]
    fn engine_changes_keep_matched_agents(seed in any::<u64>(), sz in sizes(3, 7)) {
        let m = three_sided(seed, &sz, 0.0, 1);
        let (reference, _) = phd_match(&m, &EngineConfig::default()).unwrap();
        let custom = EngineConfig::new(vec![
            Matcher::Custom(Arc::new(Wrapped(Side::Right))),
            Matcher::Custom(Arc::new(Wrapped(Side::Right))),
        ]);
        prop_assert_eq!(&phd_match(&m, &custom).unwrap().0, &reference);
        let mixed = EngineConfig::three_sided_mfp(ProposalOrder::Asc)
            .with_override(2, vec![Matcher::Gs(Side::Right), Matcher::Mfp(Side::Right)])
            .with_last(vec![Matcher::Gs(Side::Left), Matcher::Gs(Side::Right)]);
        let (mu, _) = phd_match(&m, &mixed).unwrap();
        prop_assert_eq!(matched_set(&mu), matched_set(&reference));
        prop_assert!(find_blocking_triples(&m, &mu).unwrap().is_empty());
    }

    #[test]
    fn quota_outputs_are_stable(seed in any::<u64>(), sz in sizes(3, 6), ties in prop::sample::select(vec![0.0, 0.3]), order in prop::sample::select(ProposalOrder::ALL.to_vec())) {
        let m = three_sided(seed, &sz, ties, 3);
        let (mu, trace) = phd_match_quotas(&m, &EngineConfig::three_sided(order)).unwrap();
        let (reference, _) = phd_match_quotas(&m, &EngineConfig::default()).unwrap();
        prop_assert!(find_blocking_triples(&m, &reference).unwrap().is_empty());
        if order.coadvisor_market() == Side::Right {
            prop_assert!(find_blocking_triples(&m, &mu).unwrap().is_empty());
        }
        prop_assert!(validate_matching(&m, &mu).is_empty());
        prop_assert_eq!(match_counts(&mu), match_counts(&reference));
        if !m.unit_quotas() {
            for w in trace.records.windows(2) {
                prop_assert!(w[0].capacities.iter().zip(&w[1].capacities).all(|(a, b)| b <= a));
            }
            // at the end every advisor match found a co-advisor
            let last = trace.last().unwrap();
            prop_assert_eq!(last.pair_matchings[0].len(), last.pair_matchings[1].len());
            prop_assert_eq!(mu.len(), last.pair_matchings[1].len());
        }
    }

    #[test]
    fn unit_quotas_reduce_to_phd(seed in any::<u64>(), sz in sizes(3, 8)) {
        let m = three_sided(seed, &sz, 0.0, 1);
        prop_assert_eq!(phd_match_quotas(&m, &EngineConfig::default()).unwrap(), phd_match(&m, &EngineConfig::default()).unwrap());
    }

    #[test]
    fn chains_are_stable(seed in any::<u64>(), sz in sizes(4, 5), ties in prop::sample::select(vec![0.0, 0.3])) {
        let m = three_sided(seed, &sz, ties, 1);
        let (mu, trace) = n_sided_phd(&m, &EngineConfig::chain(4, Side::Right)).unwrap();
        prop_assert!(find_blocking_tuples(&m, &mu).unwrap().is_empty());
        prop_assert_eq!(count_blocking_tuples(&m, &mu).unwrap(), 0);
        prop_assert!(trace.complete_matches().windows(2).all(|w| w[0] <= w[1]));
        // participants kept at one iteration stay matched at the next
        for w in trace.records.windows(2) {
            for k in 1..3 {
                let kept: BTreeSet<usize> = w[0].matched[k].iter().filter(|x| !w[0].removed[k].contains(x)).copied().collect();
                prop_assert!(kept.iter().all(|x| w[1].matched[k].contains(x)));
            }
        }
        let mfp = EngineConfig::new(vec![Matcher::Mfp(Side::Left); 3]);
        for cfg in [EngineConfig::chain(4, Side::Left), mfp.clone()] {
            let (other, other_trace) = n_sided_phd(&m, &cfg).unwrap();
            prop_assert_eq!(matched_set(&other), matched_set(&mu));
            prop_assert_eq!(other_trace.complete_matches(), trace.complete_matches());
        }
        prop_assert!(find_blocking_tuples(&m, &n_sided_phd(&m, &mfp).unwrap().0).unwrap().is_empty());
    }

    #[test]
    fn chains_reduce_to_two_and_three_sides(seed in any::<u64>(), sz in sizes(3, 7)) {
        let m = three_sided(seed, &sz, 0.0, 1);
        for order in ProposalOrder::ALL {
            let cfg = EngineConfig::three_sided(order);
            prop_assert_eq!(n_sided_phd(&m, &cfg).unwrap(), phd_match(&m, &cfg).unwrap());
        }
        let two = MultiSidedMarket::new(vec![m.links[0].clone()]);
        for side in [Side::Left, Side::Right] {
            let (mu, _) = n_sided_phd(&two, &EngineConfig::chain(2, side)).unwrap();
            prop_assert_eq!(mu, gs_match(&two.submarket(0), side).unwrap());
        }
    }

    #[test]
    fn zhong_bai_without_incompatibility_is_advisor_proposing_phd(seed in any::<u64>(), sz in sizes(3, 8), ties in prop::sample::select(vec![0.0, 0.3])) {
        let m = three_sided(seed, &sz, ties, 1);
        let (expected, _) = phd_match(&m, &EngineConfig::three_sided_mfp(ProposalOrder::Asc)).unwrap();
        prop_assert_eq!(zhong_bai(&m).unwrap(), expected);
    }

    #[test]
    fn incompatibility_handling_respects_compat(seed in any::<u64>(), sz in sizes(3, 7), density in 0.3..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = random_multi_sided(&mut rng, &sz, &RandomOptions::default());
        m = m.with_compat(random_compat(&mut rng, sz[0], sz[2], density));
        let zb = zhong_bai(&m).unwrap();
        prop_assert!(validate_matching(&m, &zb).is_empty());
        for variant in [HeuristicVariant::RestrictCoadvisors, HeuristicVariant::DropAdvisor] {
            let (mu, _, report) = phd_incompat_heuristic(&m, &EngineConfig::default(), variant).unwrap();
            prop_assert!(validate_matching(&m, &mu).is_empty());
            prop_assert_eq!(report, find_blocking_triples(&m, &mu).unwrap());
        }
    }

    #[test]
    fn full_compatibility_heuristics_are_phd(seed in any::<u64>(), sz in sizes(3, 8)) {
        let m = three_sided(seed, &sz, 0.0, 1);
        let all: BTreeSet<(usize, usize)> = (0..sz[0]).flat_map(|a| (0..sz[2]).map(move |c| (a, c))).collect();
        let k = m.clone().with_compat(all);
        let (expected, expected_trace) = phd_match(&m, &EngineConfig::default()).unwrap();
        for variant in [HeuristicVariant::RestrictCoadvisors, HeuristicVariant::DropAdvisor] {
            let (mu, trace, report) = phd_incompat_heuristic(&k, &EngineConfig::default(), variant).unwrap();
            prop_assert_eq!(&mu, &expected);
            prop_assert_eq!(removed_sets(&trace), removed_sets(&expected_trace));
            prop_assert!(report.is_empty());
        }
    }
}

/// Ties broken per iteration instead of once can leave a blocking triple;
/// breaking them once never does.
#[test]
fn strictify_once_on_tied_markets() {
    let mut failures = 0;
    for seed in 0..200 {
        let m = three_sided(seed, &[3, 4, 3], 0.6, 1);
        for rule in [StrictificationRule::ByAgentIndex, StrictificationRule::SeededRandom(seed)] {
            let (mu, _) = phd_match(&m, &EngineConfig::default().with_strictification(rule)).unwrap();
            failures += !find_blocking_triples(&m, &mu).unwrap().is_empty() as usize;
        }
    }
    assert_eq!(failures, 0);
}

#[test]
fn mfp_saves_work_on_multi_iteration_runs() {
    let p = SynthParams::table3().scaled(0.25);
    let m = generate_market(&p).unwrap();
    let (_, gs) = phd_match(&m, &EngineConfig::default()).unwrap();
    let (_, mfp) = phd_match(&m, &EngineConfig::three_sided_mfp(ProposalOrder::Ssc)).unwrap();
    assert!(gs.iterations() > 1);
    assert!(mfp.counters.steps() < gs.counters.steps());
}

/// Dropping the student nobody took (s1) lets s0 trade up to c1, and c3
/// falls back to s3, whom it likes less than s1.
fn trade_up_market() -> MultiSidedMarket {
    let s = |v: &[usize]| PreferenceList::strict(v.iter().copied());
    let advisors = vec![s(&[3, 1, 2]), s(&[1, 3, 0]), s(&[2, 1, 0, 3]), s(&[2]), s(&[3, 0, 1]), s(&[0, 3, 1, 2])];
    let students_a = vec![s(&[3, 4, 0, 2, 1]), s(&[2, 5, 4, 3]), s(&[1, 5, 2, 4, 0]), s(&[2, 0, 1, 4, 3])];
    let students_c = vec![s(&[1, 3, 2]), s(&[3, 1, 2, 0]), s(&[0, 1, 2, 3]), s(&[2, 3, 0, 1])];
    let coadvisors = vec![s(&[2, 3, 0]), s(&[3, 0, 2, 1]), s(&[0, 2]), s(&[0, 2, 1, 3])];
    MultiSidedMarket::new(vec![
        Link { forward: advisors, backward: students_a },
        Link { forward: students_c, backward: coadvisors },
    ])
}

#[test]
fn students_proposing_to_coadvisors_from_scratch_can_block() {
    let m = trade_up_market();
    let (mu, trace) = phd_match(&m, &EngineConfig::three_sided(ProposalOrder::Ssc)).unwrap();
    assert_eq!(mu, Matching::new(vec![vec![2, 3, 3], vec![4, 0, 1], vec![5, 2, 0]]));
    assert_eq!(removed_sets(&trace), vec![vec![1], vec![]]);
    let blocking: Vec<_> = find_blocking_triples(&m, &mu).unwrap().iter().map(|b| (b.advisor, b.student, b.coadvisor)).collect();
    assert_eq!(blocking, vec![(2, 1, 3), (5, 1, 3)]);
    for cfg in [
        EngineConfig::default(),
        EngineConfig::three_sided(ProposalOrder::Acs),
        EngineConfig::three_sided_mfp(ProposalOrder::Ssc),
    ] {
        let (stable, other) = phd_match(&m, &cfg).unwrap();
        assert!(find_blocking_triples(&m, &stable).unwrap().is_empty());
        assert_eq!(matched_set(&stable), matched_set(&mu));
        assert_eq!(removed_sets(&other), removed_sets(&trace));
    }
}
