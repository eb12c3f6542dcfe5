//! The removal loop under quotas: students lose capacity instead of leaving.

use alloc::vec;
use alloc::vec::Vec;

use super::blocking::count_blocking_triples;
use super::engine::{pair_counts, MarketEngine};
use super::{check_market, phd_match, reverse_trace, reverse_tuples, EngineConfig, IterationRecord, IterationTrace};
use crate::error::Error;
use crate::market::MultiSidedMarket;
use crate::matching::Matching;
use crate::prefs::RankTable;

/// Stable matching of a three-sided market where every agent may hold
/// several matches.
///
/// A student with capacity `q` takes up to `q` advisors; the number it gets
/// becomes its capacity on the co-advisor market, and every co-advisor it
/// fails to find costs it one unit of capacity for the next iteration. The
/// loop stops when no capacity changes; each student's advisors and
/// co-advisors are then paired in its order of preference. With unit quotas
/// this is [`phd_match`].
pub fn phd_match_quotas(market: &MultiSidedMarket, config: &EngineConfig) -> Result<(Matching, IterationTrace), Error> {
    check_market(market, Some(3))?;
    if let Some(k) = &market.compat {
        if k.len() != market.sizes[0] * market.sizes[2] {
            return Err(Error::CompatibilityNotSupported);
        }
    }
    if market.unit_quotas() {
        return phd_match(market, config);
    }
    config.check(2)?;
    let strict = market.strictified(config.strictification);
    let verify = |mu: &Matching| count_blocking_triples(market, mu).map(|c| c as u128);
    if config.swap_order {
        let verify_reversed = |mu: &Matching| verify(&reverse_tuples(mu.clone()));
        let traced = config.trace_blocking.then_some(&verify_reversed as &dyn Fn(&Matching) -> Result<u128, Error>);
        let (mu, trace) = run(&strict.reversed(), &config.mirrored(), traced)?;
        return Ok((reverse_tuples(mu), reverse_trace(trace)));
    }
    let traced = config.trace_blocking.then_some(&verify as &dyn Fn(&Matching) -> Result<u128, Error>);
    run(&strict, config, traced)
}

fn run(
    strict: &MultiSidedMarket,
    config: &EngineConfig,
    verify: Option<&dyn Fn(&Matching) -> Result<u128, Error>>,
) -> Result<(Matching, IterationTrace), Error> {
    let [n_a, n_s, n_c] = [strict.sizes[0], strict.sizes[1], strict.sizes[2]];
    let mut engines = [MarketEngine::new(strict.submarket(0)), MarketEngine::new(strict.submarket(1))];
    let mut capacity = strict.quotas[1].clone();
    let mut trace = IterationTrace::default();

    for iteration in 1.. {
        let matchers = config.matchers_at(iteration);
        let pass = |engines: &mut [MarketEngine; 2], matchers: &[super::Matcher], trace: &mut IterationTrace| {
            let as_pairs = engines[0].solve(&matchers[0], [&strict.quotas[0], &capacity], &mut trace.counters)?;
            let held = pair_counts(&as_pairs, [n_a, n_s]).into_iter().nth(1).expect("two sides");
            let sc_pairs = engines[1].solve(&matchers[1], [&held, &strict.quotas[2]], &mut trace.counters)?;
            Ok::<_, Error>((as_pairs, held, sc_pairs))
        };
        let (mut as_pairs, held, mut sc_pairs) = pass(&mut engines, matchers, &mut trace)?;
        let got = pair_counts(&sc_pairs, [n_s, n_c]).into_iter().next().expect("two sides");
        let removed: Vec<usize> = (0..n_s).filter(|&s| got[s] < held[s]).collect();
        let done = removed.is_empty();
        if done {
            if let Some(last) = &config.last {
                (as_pairs, _, sc_pairs) = pass(&mut engines, last, &mut trace)?;
            }
        }
        let mu = assemble_triples(strict, &as_pairs, &sc_pairs);
        let all = |n: usize| (0..n).collect::<Vec<_>>();
        let mut record = IterationRecord {
            iteration,
            remaining: vec![all(n_a), (0..n_s).filter(|&s| capacity[s] > 0).collect(), all(n_c)],
            matched: vec![all(n_a), (0..n_s).filter(|&s| held[s] > 0).collect(), dedup_right(&sc_pairs)],
            removed: vec![Vec::new(), removed, Vec::new()],
            capacities: capacity.clone(),
            coadvisor_capacities: held.clone(),
            pair_matchings: vec![as_pairs, sc_pairs],
            complete_matches: mu.len(),
            blocking: None,
        };
        if let Some(verify) = verify {
            record.blocking = Some(verify(&mu)?);
        }
        trace.records.push(record);
        if done {
            return Ok((mu, trace));
        }
        for s in 0..n_s {
            capacity[s] -= held[s] - got[s];
        }
    }
    unreachable!("the loop only exits by returning")
}

fn dedup_right(pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut v: Vec<usize> = pairs.iter().map(|&(_, r)| r).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Pairs each student's advisors with its co-advisors, both taken in the
/// student's order of preference (ties by index); surplus matches on either
/// market are dropped.
pub fn assemble_triples(market: &MultiSidedMarket, advisor_pairs: &[(usize, usize)], coadvisor_pairs: &[(usize, usize)]) -> Matching {
    let n_s = market.sizes[1];
    let over_a = RankTable::new(&market.links[0].backward, market.sizes[0]);
    let over_c = RankTable::new(&market.links[1].forward, market.sizes[2]);
    let mut advisors = vec![Vec::new(); n_s];
    for &(a, s) in advisor_pairs {
        advisors[s].push(a);
    }
    let mut coadvisors = vec![Vec::new(); n_s];
    for &(s, c) in coadvisor_pairs {
        coadvisors[s].push(c);
    }
    let mut out = Vec::new();
    for s in 0..n_s {
        advisors[s].sort_by_key(|&a| (over_a.key(s, a), a));
        coadvisors[s].sort_by_key(|&c| (over_c.key(s, c), c));
        out.extend(advisors[s].iter().zip(&coadvisors[s]).map(|(&a, &c)| vec![a, s, c]));
    }
    Matching::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phd::find_blocking_triples;
    use crate::prefs::PreferenceList;

    fn strict(v: &[usize]) -> PreferenceList {
        PreferenceList::strict(v.iter().copied())
    }

    /// One student with quota 2, two advisors, one co-advisor with quota 1.
    fn market() -> MultiSidedMarket {
        MultiSidedMarket::three_sided(
            vec![strict(&[0]), strict(&[0])],
            vec![strict(&[1, 0])],
            vec![strict(&[0])],
            vec![strict(&[0])],
        )
        .with_quotas(vec![vec![1, 1], vec![2], vec![1]])
    }

    #[test]
    fn capacity_drops_to_what_coadvisors_offer() {
        let (mu, trace) = phd_match_quotas(&market(), &EngineConfig::default()).unwrap();
        assert_eq!(mu, Matching::from_triples([(1, 0, 0)]));
        assert_eq!(trace.iterations(), 2);
        assert_eq!(trace.records[0].capacities, vec![2]);
        assert_eq!(trace.records[0].coadvisor_capacities, vec![2]);
        assert_eq!(trace.records[0].students_removed(), &[0]);
        assert_eq!(trace.records[1].capacities, vec![1]);
        assert!(find_blocking_triples(&market(), &mu).unwrap().is_empty());
    }

    #[test]
    fn pairs_in_preference_order() {
        let m = market().with_quotas(vec![vec![1, 1], vec![2], vec![2]]).with_pair_policy(crate::PairPolicy::UpTo(2));
        // co-advisor 0 twice: both of the student's advisors pair with it
        let mu = assemble_triples(&m, &[(0, 0), (1, 0)], &[(0, 0), (0, 0)]);
        assert_eq!(mu, Matching::from_triples([(0, 0, 0), (1, 0, 0)]));
    }

    #[test]
    fn incremental_matcher_needs_unit_quotas() {
        let cfg = EngineConfig::three_sided_mfp(crate::phd::ProposalOrder::Ssc);
        assert_eq!(phd_match_quotas(&market(), &cfg), Err(Error::QuotasNotSupported));
    }
}
