//! Exhaustive enumeration of stable matchings for small markets.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::market::TwoSidedMarket;
use crate::matching::Matching;
use crate::stability::{find_blocking_pairs, PrefView};

/// Default bound on `|M| * |W|` for [`enumerate_all_stable`].
pub const DEFAULT_ENUMERATION_BOUND: usize = 36;

/// Every stable matching of a small market, sorted.
///
/// Preferences are compared as given (ties count as indifference).
pub fn enumerate_all_stable(market: &TwoSidedMarket) -> Result<Vec<Matching>, Error> {
    enumerate_all_stable_with_bound(market, DEFAULT_ENUMERATION_BOUND)
}

/// [`enumerate_all_stable`] with an explicit bound on `|M| * |W|`.
pub fn enumerate_all_stable_with_bound(market: &TwoSidedMarket, bound: usize) -> Result<Vec<Matching>, Error> {
    let cells = market.n_left() * market.n_right();
    if cells > bound {
        return Err(Error::MarketTooLarge { cells, bound });
    }
    if let Some(v) = crate::market::validate_market(market).into_iter().next() {
        return Err(Error::InvalidMarket(v));
    }
    // only individually rational matchings can be stable
    let mut pairs = Vec::new();
    for m in 0..market.n_left() {
        for w in 0..market.n_right() {
            if market.mutually_acceptable(m, w) {
                pairs.push((m, w));
            }
        }
    }
    let mut search = Search {
        market,
        pairs: &pairs,
        left_free: market.left_quotas.clone(),
        right_free: market.right_quotas.clone(),
        chosen: Vec::new(),
        out: Vec::new(),
    };
    search.visit(0);
    let mut out = search.out;
    out.sort_unstable();
    Ok(out)
}

struct Search<'a> {
    market: &'a TwoSidedMarket,
    pairs: &'a [(usize, usize)],
    left_free: Vec<u32>,
    right_free: Vec<u32>,
    chosen: Vec<(usize, usize)>,
    out: Vec<Matching>,
}

impl Search<'_> {
    fn visit(&mut self, at: usize) {
        let Some(&(m, w)) = self.pairs.get(at) else {
            let mu = Matching::from_pairs(self.chosen.iter().copied());
            if find_blocking_pairs(self.market, &mu, PrefView::Original).is_empty() {
                self.out.push(mu);
            }
            return;
        };
        self.visit(at + 1);
        let cap = self.market.pair_policy.cap();
        let mut k = 0;
        while k < cap && self.left_free[m] > 0 && self.right_free[w] > 0 {
            self.left_free[m] -= 1;
            self.right_free[w] -= 1;
            self.chosen.push((m, w));
            k += 1;
            self.visit(at + 1);
        }
        for _ in 0..k {
            self.chosen.pop();
        }
        self.left_free[m] += k;
        self.right_free[w] += k;
    }
}

/// Number of matches of every agent, per side, for comparing the profiles
/// of different stable matchings.
pub fn match_count_profile(market: &TwoSidedMarket, mu: &Matching) -> [Vec<usize>; 2] {
    let mut p = [vec![0; market.n_left()], vec![0; market.n_right()]];
    for t in mu.tuples() {
        p[0][t[0]] += 1;
        p[1][t[1]] += 1;
    }
    p
}
