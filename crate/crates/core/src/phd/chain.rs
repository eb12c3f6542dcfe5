//! The removal loop over a chain of adjacent two-sided markets.

use alloc::vec;
use alloc::vec::Vec;

use super::blocking::{count_blocking_triples, count_blocking_tuples};
use super::engine::MarketEngine;
use super::{check_market, reverse_trace, reverse_tuples, EngineConfig, IterationRecord, IterationTrace, Matcher};
use crate::error::Error;
use crate::gale_shapley::Counters;
use crate::market::MultiSidedMarket;
use crate::matching::Matching;
use crate::stability::{find_blocking_pairs, PrefView};

/// Stable matching of a three-sided advisor/student/co-advisor market with
/// unit quotas.
///
/// Preferences are strictified once under `config.strictification`; every
/// tentative matching in the trace is verified against the original lists.
pub fn phd_match(market: &MultiSidedMarket, config: &EngineConfig) -> Result<(Matching, IterationTrace), Error> {
    check_market(market, Some(3))?;
    check_unit(market)?;
    solve_chain(market, config, None)
}

/// Stable matching of an n-sided chain market with unit quotas.
///
/// Side 0 proposes into side 1, the matched agents of side 1 into side 2 and
/// so on; middle agents left without a right-hand partner leave the market.
pub fn n_sided_phd(market: &MultiSidedMarket, config: &EngineConfig) -> Result<(Matching, IterationTrace), Error> {
    check_market(market, None)?;
    check_unit(market)?;
    solve_chain(market, config, None)
}

/// The first iteration of [`phd_match`] only: complete triples of one pass
/// over both markets, without removing anyone.
pub fn danilov_baseline(market: &MultiSidedMarket, config: &EngineConfig) -> Result<Matching, Error> {
    danilov_baseline_traced(market, config).map(|(m, _)| m)
}

/// [`danilov_baseline`] with its one-record trace.
pub fn danilov_baseline_traced(market: &MultiSidedMarket, config: &EngineConfig) -> Result<(Matching, IterationTrace), Error> {
    check_market(market, Some(3))?;
    check_unit(market)?;
    solve_chain(market, config, Some(1))
}

fn check_unit(market: &MultiSidedMarket) -> Result<(), Error> {
    if !market.unit_quotas() {
        return Err(Error::QuotasNotSupported);
    }
    if let Some(k) = &market.compat {
        if market.n_sides() != 3 || k.len() != market.sizes[0] * market.sizes[2] {
            return Err(Error::CompatibilityNotSupported);
        }
    }
    Ok(())
}

fn solve_chain(
    market: &MultiSidedMarket,
    config: &EngineConfig,
    max_iterations: Option<usize>,
) -> Result<(Matching, IterationTrace), Error> {
    config.check(market.n_sides() - 1)?;
    let strict = market.strictified(config.strictification);
    let verify = |mu: &Matching| -> Result<u128, Error> {
        Ok(match market.n_sides() {
            2 => find_blocking_pairs(&market.submarket(0), mu, PrefView::Original).len() as u128,
            3 => count_blocking_triples(market, mu)? as u128,
            _ => count_blocking_tuples(market, mu)?,
        })
    };
    if config.swap_order && market.n_sides() > 2 {
        let verify_reversed = |mu: &Matching| verify(&reverse_tuples(mu.clone()));
        let traced = config.trace_blocking.then_some(&verify_reversed as &dyn Fn(&Matching) -> Result<u128, Error>);
        let (mu, trace) = run_chain(&strict.reversed(), &config.mirrored(), traced, max_iterations)?;
        return Ok((reverse_tuples(mu), reverse_trace(trace)));
    }
    let traced = config.trace_blocking.then_some(&verify as &dyn Fn(&Matching) -> Result<u128, Error>);
    run_chain(&strict, config, traced, max_iterations)
}

/// Runs the loop on an already strict market.
pub(crate) fn run_chain(
    strict: &MultiSidedMarket,
    config: &EngineConfig,
    verify: Option<&dyn Fn(&Matching) -> Result<u128, Error>>,
    max_iterations: Option<usize>,
) -> Result<(Matching, IterationTrace), Error> {
    let n = strict.n_sides();
    let mut engines: Vec<MarketEngine> = (0..n - 1).map(|k| MarketEngine::new(strict.submarket(k))).collect();
    let mut remaining: Vec<Vec<bool>> = strict.sizes.iter().map(|&s| vec![true; s]).collect();
    let mut trace = IterationTrace::default();

    for iteration in 1.. {
        let pairs = pass(&mut engines, config.matchers_at(iteration), &remaining, &mut trace.counters)?;
        let mut record = summarize(iteration, &remaining, &pairs);
        let done = record.removed.iter().all(Vec::is_empty) || max_iterations.is_some_and(|m| iteration >= m);
        let mut mu = chains(&pairs, &strict.sizes);
        if done {
            if let Some(last) = &config.last {
                let pairs = pass(&mut engines, last, &remaining, &mut trace.counters)?;
                mu = chains(&pairs, &strict.sizes);
                record.pair_matchings = pairs;
            }
        }
        record.complete_matches = mu.len();
        if let Some(verify) = verify {
            record.blocking = Some(verify(&mu)?);
        }
        trace.records.push(record);
        if done {
            return Ok((mu, trace));
        }
        let removed = &trace.records.last().expect("just pushed").removed;
        for (side, gone) in removed.iter().enumerate() {
            for &i in gone {
                remaining[side][i] = false;
            }
        }
    }
    unreachable!("the loop only exits by returning")
}

/// One pass over all adjacent markets; returns the matched pairs per market.
fn pass(
    engines: &mut [MarketEngine],
    matchers: &[Matcher],
    remaining: &[Vec<bool>],
    counters: &mut Counters,
) -> Result<Vec<Vec<(usize, usize)>>, Error> {
    let mut left: Vec<u32> = remaining[0].iter().map(|&r| r as u32).collect();
    let mut out = Vec::with_capacity(engines.len());
    for (k, engine) in engines.iter_mut().enumerate() {
        let right: Vec<u32> = remaining[k + 1].iter().map(|&r| r as u32).collect();
        let pairs = engine.solve(&matchers[k], [&left, &right], counters)?;
        left = vec![0; right.len()];
        for &(_, r) in &pairs {
            left[r] = 1;
        }
        out.push(pairs);
    }
    Ok(out)
}

fn summarize(iteration: usize, remaining: &[Vec<bool>], pairs: &[Vec<(usize, usize)>]) -> IterationRecord {
    let n = remaining.len();
    let indices = |v: &[bool]| v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect::<Vec<_>>();
    let mut matched = vec![indices(&remaining[0])];
    let mut removed = vec![Vec::new()];
    for k in 1..n {
        let mut m: Vec<usize> = pairs[k - 1].iter().map(|&(_, r)| r).collect();
        m.sort_unstable();
        m.dedup();
        if k + 1 < n {
            let mut onward = vec![false; remaining[k].len()];
            for &(l, _) in &pairs[k] {
                onward[l] = true;
            }
            removed.push(m.iter().copied().filter(|&i| !onward[i]).collect());
        } else {
            removed.push(Vec::new());
        }
        matched.push(m);
    }
    IterationRecord {
        iteration,
        remaining: remaining.iter().map(|r| indices(r)).collect(),
        matched,
        removed,
        pair_matchings: pairs.to_vec(),
        ..IterationRecord::default()
    }
}

/// Complete chains of a unit-quota pass.
fn chains(pairs: &[Vec<(usize, usize)>], sizes: &[usize]) -> Matching {
    let next: Vec<Vec<Option<usize>>> = pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut v = vec![None; sizes[k]];
            for &(l, r) in p {
                v[l] = Some(r);
            }
            v
        })
        .collect();
    let mut out = Vec::new();
    'start: for a in 0..sizes[0] {
        let mut t = vec![a];
        for step in &next {
            match step[*t.last().expect("non-empty")] {
                Some(r) => t.push(r),
                None => continue 'start,
            }
        }
        out.push(t);
    }
    Matching::new(out)
}
