//! Heuristics for markets where some advisor/co-advisor pairs cannot work
//! together. Neither guarantees a stable outcome; the blocking triples of
//! the result are returned with it.

use alloc::vec;
use alloc::vec::Vec;

use super::blocking::{count_blocking_triples, find_blocking_triples, BlockingTriple};
use super::engine::MarketEngine;
use super::{check_market, EngineConfig, IterationRecord, IterationTrace, Matcher};
use crate::error::Error;
use crate::market::MultiSidedMarket;
use crate::matching::Matching;

/// What happens to a student whose advisor has no compatible co-advisor
/// for it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum HeuristicVariant {
    /// The student only applies to co-advisors compatible with its advisor
    /// and leaves the market if none accepts it.
    #[default]
    RestrictCoadvisors,
    /// As above, but when incompatibility narrowed its choice the student
    /// strikes the advisor from its list and stays in the market. A student
    /// that fails with its full list leaves as usual.
    DropAdvisor,
}

/// Removal loop on a market with compatible pairs.
///
/// Incremental matchers are replaced by Gale–Shapley from the same side,
/// since student lists change between iterations. Returns the matching, the
/// trace and the blocking triples of the matching in the original market.
pub fn phd_incompat_heuristic(
    market: &MultiSidedMarket,
    config: &EngineConfig,
    variant: HeuristicVariant,
) -> Result<(Matching, IterationTrace, Vec<BlockingTriple>), Error> {
    check_market(market, Some(3))?;
    if !market.unit_quotas() {
        return Err(Error::QuotasNotSupported);
    }
    config.check(2)?;
    let strict = market.strictified(config.strictification);
    let [n_a, n_s, n_c] = [strict.sizes[0], strict.sizes[1], strict.sizes[2]];
    let mut advisor_lists = strict.links[0].backward.clone();
    let mut remaining = vec![true; n_s];
    let mut trace = IterationTrace::default();
    let ones = |n: usize| vec![1u32; n];

    for iteration in 1.. {
        let matchers: Vec<Matcher> = config
            .matchers_at(iteration)
            .iter()
            .map(|m| match m {
                Matcher::Mfp(side) => Matcher::Gs(*side),
                other => other.clone(),
            })
            .collect();

        let mut as_market = strict.submarket(0);
        as_market.right_prefs = advisor_lists.clone();
        let students: Vec<u32> = remaining.iter().map(|&r| r as u32).collect();
        let as_pairs = MarketEngine::new(as_market).solve(&matchers[0], [&ones(n_a), &students], &mut trace.counters)?;
        let mut advisor = vec![None; n_s];
        for &(a, s) in &as_pairs {
            advisor[s] = Some(a);
        }

        let mut sc_market = strict.submarket(1);
        for (s, list) in sc_market.left_prefs.iter_mut().enumerate() {
            if let Some(a) = advisor[s] {
                list.retain(|c| strict.compatible(a, c));
            }
        }
        let held: Vec<u32> = advisor.iter().map(|a| a.is_some() as u32).collect();
        let sc_pairs = MarketEngine::new(sc_market).solve(&matchers[1], [&held, &ones(n_c)], &mut trace.counters)?;
        let mut coadvisor = vec![None; n_s];
        for &(s, c) in &sc_pairs {
            coadvisor[s] = Some(c);
        }

        let failing: Vec<usize> = (0..n_s).filter(|&s| advisor[s].is_some() && coadvisor[s].is_none()).collect();
        let mu = Matching::new(
            (0..n_s).filter_map(|s| Some(vec![advisor[s]?, s, coadvisor[s]?])).collect(),
        );
        let indices = |v: &[bool]| v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect::<Vec<_>>();
        let mut record = IterationRecord {
            iteration,
            remaining: vec![(0..n_a).collect(), indices(&remaining), (0..n_c).collect()],
            matched: vec![(0..n_a).collect(), (0..n_s).filter(|&s| advisor[s].is_some()).collect(), {
                let mut c: Vec<usize> = sc_pairs.iter().map(|&(_, c)| c).collect();
                c.sort_unstable();
                c
            }],
            removed: vec![Vec::new(), failing.clone(), Vec::new()],
            pair_matchings: vec![as_pairs, sc_pairs],
            complete_matches: mu.len(),
            ..IterationRecord::default()
        };
        if config.trace_blocking {
            record.blocking = Some(count_blocking_triples(market, &mu)? as u128);
        }
        trace.records.push(record);
        if failing.is_empty() {
            let report = find_blocking_triples(market, &mu)?;
            return Ok((mu, trace, report));
        }

        for s in failing {
            let a = advisor[s].expect("failing students hold an advisor");
            let narrowed = strict.links[1].forward[s].iter().any(|c| !strict.compatible(a, c));
            match variant {
                HeuristicVariant::DropAdvisor if narrowed => advisor_lists[s].retain(|x| x != a),
                _ => remaining[s] = false,
            }
        }
    }
    unreachable!("the loop only exits by returning")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phd::{phd_match, TripleKind};
    use crate::prefs::PreferenceList;

    fn strict(v: &[usize]) -> PreferenceList {
        PreferenceList::strict(v.iter().copied())
    }

    /// Two advisors, one student preferring the first, one co-advisor that
    /// only the second advisor can work with.
    fn two_advisors() -> MultiSidedMarket {
        MultiSidedMarket::three_sided(
            vec![strict(&[0]), strict(&[0])],
            vec![strict(&[0, 1])],
            vec![strict(&[0])],
            vec![strict(&[0])],
        )
        .with_compat([(1, 0)].into_iter().collect())
    }

    #[test]
    fn restricting_leaves_a_blocking_triple() {
        let (mu, _, report) =
            phd_incompat_heuristic(&two_advisors(), &EngineConfig::default(), HeuristicVariant::RestrictCoadvisors).unwrap();
        assert!(mu.is_empty());
        assert_eq!(
            report,
            vec![BlockingTriple { advisor: 1, student: 0, coadvisor: 0, kind: TripleKind::UnmatchedSpot }]
        );
    }

    #[test]
    fn dropping_the_advisor_recovers() {
        let (mu, trace, report) =
            phd_incompat_heuristic(&two_advisors(), &EngineConfig::default(), HeuristicVariant::DropAdvisor).unwrap();
        assert_eq!(mu, Matching::from_triples([(1, 0, 0)]));
        assert_eq!(trace.iterations(), 2);
        assert!(report.is_empty());
    }

    #[test]
    fn full_compatibility_matches_phd() {
        let mut m = two_advisors();
        m.compat = Some([(0, 0), (1, 0)].into_iter().collect());
        let (expected, _) = phd_match(&m, &EngineConfig::default()).unwrap();
        for v in [HeuristicVariant::RestrictCoadvisors, HeuristicVariant::DropAdvisor] {
            let (mu, _, report) = phd_incompat_heuristic(&m, &EngineConfig::default(), v).unwrap();
            assert_eq!(mu, expected);
            assert!(report.is_empty());
        }
    }
}
