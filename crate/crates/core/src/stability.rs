//! Two-sided stability verification.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::market::{AgentId, TwoSidedMarket};
use crate::matching::Matching;
use crate::prefs::RankTable;
use crate::strictify::StrictificationRule;

/// Which preferences a verifier compares with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrefView {
    /// The market's lists as given, ties included; only strict comparisons count.
    #[default]
    Original,
    /// The market's lists after strictification under the given rule.
    Strictified(StrictificationRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockingKind {
    /// Both prefer each other to their weakest current partner (or a free spot).
    Blocking,
    /// The tuple matches this agent with someone it finds unacceptable.
    IndividuallyIrrational(AgentId),
}

/// A pair that blocks a two-sided matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockingPair {
    pub man: usize,
    pub woman: usize,
    pub kind: BlockingKind,
}

/// Per-agent partner lists of a two-sided matching.
pub(crate) struct Partners {
    pub left: Vec<Vec<usize>>,
    pub right: Vec<Vec<usize>>,
    pub pair_counts: BTreeMap<(usize, usize), u32>,
}

impl Partners {
    pub fn new(n_left: usize, n_right: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut p = Partners { left: vec![Vec::new(); n_left], right: vec![Vec::new(); n_right], pair_counts: BTreeMap::new() };
        for (m, w) in pairs {
            p.left[m].push(w);
            p.right[w].push(m);
            *p.pair_counts.entry((m, w)).or_default() += 1;
        }
        p
    }
}

/// Whether `owner` with `partners` and `quota` would take `candidate`: a free
/// spot, or some current partner ranked strictly below the candidate.
pub(crate) fn wants(ranks: &RankTable, owner: usize, partners: &[usize], quota: u32, candidate: usize) -> bool {
    if !ranks.accepts(owner, candidate) {
        return false;
    }
    if partners.len() < quota as usize {
        return true;
    }
    let r = ranks.key(owner, candidate);
    partners.iter().any(|&p| ranks.key(owner, p) > r)
}

/// All blocking pairs and individually irrational matches of `matching`.
///
/// Under quotas a pair blocks when it is not already matched up to the pair
/// cap and each side prefers the other to its weakest partner or has a free
/// spot. The list is empty iff the matching is stable under `view`.
pub fn find_blocking_pairs(market: &TwoSidedMarket, matching: &Matching, view: PrefView) -> Vec<BlockingPair> {
    let strict;
    let market = match view {
        PrefView::Original => market,
        PrefView::Strictified(rule) => {
            strict = market.strictified(rule);
            &strict
        }
    };
    let left_rank = RankTable::new(&market.left_prefs, market.n_right());
    let right_rank = RankTable::new(&market.right_prefs, market.n_left());
    let partners = Partners::new(market.n_left(), market.n_right(), matching.tuples().iter().map(|t| (t[0], t[1])));
    let cap = market.pair_policy.cap();

    let mut out = Vec::new();
    for (&(m, w), _) in &partners.pair_counts {
        if !left_rank.accepts(m, w) {
            out.push(BlockingPair { man: m, woman: w, kind: BlockingKind::IndividuallyIrrational(AgentId::new(0, m)) });
        }
        if !right_rank.accepts(w, m) {
            out.push(BlockingPair { man: m, woman: w, kind: BlockingKind::IndividuallyIrrational(AgentId::new(1, w)) });
        }
    }
    for m in 0..market.n_left() {
        for w in market.left_prefs[m].iter() {
            if partners.pair_counts.get(&(m, w)).copied().unwrap_or(0) >= cap {
                continue;
            }
            if wants(&left_rank, m, &partners.left[m], market.left_quotas[m], w)
                && wants(&right_rank, w, &partners.right[w], market.right_quotas[w], m)
            {
                out.push(BlockingPair { man: m, woman: w, kind: BlockingKind::Blocking });
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Agents with at least one non-self match.
pub fn matched_set(matching: &Matching) -> BTreeSet<AgentId> {
    matching
        .tuples()
        .iter()
        .flat_map(|t| t.iter().enumerate().map(|(k, &i)| AgentId::new(k, i)))
        .collect()
}
