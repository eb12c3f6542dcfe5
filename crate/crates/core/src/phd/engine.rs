//! One adjacent market of a chain, solved repeatedly on shrinking agent sets.

use alloc::vec;
use alloc::vec::Vec;

use super::{custom_error, Matcher};
use crate::error::Error;
use crate::gale_shapley::{deferred_acceptance, Counters, Prepared, QueueDiscipline};
use crate::incremental::{Slot, WaitingListState};
use crate::market::{Side, TwoSidedMarket};

/// A strict two-sided market plus whatever a matcher keeps between calls.
pub(crate) struct MarketEngine {
    market: TwoSidedMarket,
    prepared: Prepared,
    incremental: Option<WaitingListState>,
}

impl MarketEngine {
    /// `market` must already be strict.
    pub fn new(market: TwoSidedMarket) -> Self {
        let prepared = Prepared::new(&market);
        MarketEngine { market, prepared, incremental: None }
    }

    /// Stable matching of the agents with a positive quota, as sorted
    /// `(left, right)` pairs.
    pub fn solve(
        &mut self,
        matcher: &Matcher,
        quotas: [&[u32]; 2],
        counters: &mut Counters,
    ) -> Result<Vec<(usize, usize)>, Error> {
        match matcher {
            Matcher::Gs(side) => Ok(self.gale_shapley(*side, quotas, counters)),
            Matcher::Mfp(side) => self.incremental(*side, quotas, counters),
            Matcher::Custom(m) => {
                let subsets: Vec<Vec<usize>> = quotas
                    .iter()
                    .map(|q| q.iter().enumerate().filter(|(_, &q)| q > 0).map(|(i, _)| i).collect())
                    .collect();
                let (mut view, _) = self.market.restrict(&subsets, None)?;
                view.market.left_quotas = quotas[0].iter().map(|&q| q.max(1)).collect();
                view.market.right_quotas = quotas[1].iter().map(|&q| q.max(1)).collect();
                let mu = m.solve(&view.market)?;
                let mut pairs = Vec::with_capacity(mu.len());
                for t in mu.tuples() {
                    let (l, r) = (t[0], t[1]);
                    if !view.active[0].get(l).copied().unwrap_or(false) || !view.active[1].get(r).copied().unwrap_or(false)
                    {
                        return Err(custom_error(m.name()));
                    }
                    pairs.push((l, r));
                }
                pairs.sort_unstable();
                Ok(pairs)
            }
        }
    }

    pub fn gale_shapley(&self, proposer: Side, quotas: [&[u32]; 2], counters: &mut Counters) -> Vec<(usize, usize)> {
        deferred_acceptance(
            &self.prepared,
            proposer,
            quotas[proposer.index()],
            quotas[proposer.other().index()],
            self.market.pair_policy.cap(),
            QueueDiscipline::Fifo,
            counters,
        )
    }

    /// Brings the incremental state to the requested agent set: departures
    /// first, then arrivals.
    fn incremental(
        &mut self,
        listing: Side,
        quotas: [&[u32]; 2],
        counters: &mut Counters,
    ) -> Result<Vec<(usize, usize)>, Error> {
        if quotas.iter().any(|q| q.iter().any(|&q| q > 1)) {
            return Err(Error::QuotasNotSupported);
        }
        let target = [quotas[0].iter().map(|&q| q > 0).collect::<Vec<_>>(), quotas[1].iter().map(|&q| q > 0).collect()];
        match &mut self.incremental {
            None => {
                let mut state = WaitingListState::new(&self.market, listing, target)?;
                state.run_unchecked(listing);
                counters.absorb(state.counters());
                self.incremental = Some(state);
            }
            Some(state) => {
                let before = state.counters();
                for side in [Side::Left, Side::Right] {
                    for (i, &on) in target[side.index()].iter().enumerate() {
                        if !on && state.active(side)[i] {
                            state.remove(side, i)?;
                        }
                    }
                }
                for side in [Side::Left, Side::Right] {
                    for (i, &on) in target[side.index()].iter().enumerate() {
                        if on && !state.active(side)[i] {
                            state.add(side, i)?;
                        }
                    }
                }
                let after = state.counters();
                counters.absorb(Counters {
                    proposals: after.proposals - before.proposals,
                    self_matches: after.self_matches - before.self_matches,
                    insertions: after.insertions - before.insertions,
                });
            }
        }
        let state = self.incremental.as_ref().expect("initialised above");
        let mut pairs = Vec::new();
        for l in 0..self.market.n_left() {
            if let Slot::Matched(r) = state.slot(Side::Left, l) {
                pairs.push((l, r));
            }
        }
        Ok(pairs)
    }
}

/// Number of matches per agent on each side of a pair list.
pub(crate) fn pair_counts(pairs: &[(usize, usize)], sizes: [usize; 2]) -> [Vec<u32>; 2] {
    let mut c = [vec![0; sizes[0]], vec![0; sizes[1]]];
    for &(l, r) in pairs {
        c[0][l] += 1;
        c[1][r] += 1;
    }
    c
}
