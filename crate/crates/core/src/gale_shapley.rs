//! Extended Gale–Shapley (deferred acceptance) with quotas and pair caps.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::market::{AgentId, MarketShape, Side, TwoSidedMarket};
use crate::matching::Matching;
use crate::prefs::RankTable;

/// Operation counts of a matcher run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Offers made to an agent on the other side.
    pub proposals: u64,
    /// Offers to oneself (list exhausted or waiting list empty).
    pub self_matches: u64,
    /// Waiting-list insertions (incremental matcher only).
    pub insertions: u64,
}

impl Counters {
    /// Loop steps of the matcher: one per proposal or self-match.
    pub fn steps(&self) -> u64 {
        self.proposals + self.self_matches
    }

    pub fn absorb(&mut self, other: Counters) {
        self.proposals += other.proposals;
        self.self_matches += other.self_matches;
        self.insertions += other.insertions;
    }
}

/// Order in which free proposers are picked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QueueDiscipline {
    #[default]
    Fifo,
    Lifo,
}

/// Strict lists and rank tables of a two-sided market, built once per run.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    pub lists: [Vec<Vec<usize>>; 2],
    pub ranks: [RankTable; 2],
}

impl Prepared {
    pub fn new(market: &TwoSidedMarket) -> Self {
        let flat = |side: Side| market.prefs(side).iter().map(|l| l.iter().collect()).collect();
        Prepared {
            lists: [flat(Side::Left), flat(Side::Right)],
            ranks: [
                RankTable::new(&market.left_prefs, market.n_right()),
                RankTable::new(&market.right_prefs, market.n_left()),
            ],
        }
    }

    pub fn size(&self, side: Side) -> usize {
        self.lists[side.index()].len()
    }
}

pub(crate) fn check_strict(market: &TwoSidedMarket) -> Result<(), Error> {
    if let Some(v) = market.violations().into_iter().next() {
        return Err(Error::InvalidMarket(v));
    }
    for side in [Side::Left, Side::Right] {
        if let Some(i) = market.prefs(side).iter().position(|l| !l.is_strict()) {
            return Err(Error::TiedPreferences(AgentId::new(side.index(), i)));
        }
    }
    Ok(())
}

/// Deferred acceptance on a prepared strict market.
///
/// A quota of zero takes the agent out of the market. Returns the matched
/// pairs as `(left, right)`, repeated pairs included.
pub(crate) fn deferred_acceptance(
    p: &Prepared,
    proposer: Side,
    prop_quota: &[u32],
    recv_quota: &[u32],
    pair_cap: u32,
    discipline: QueueDiscipline,
    counters: &mut Counters,
) -> Vec<(usize, usize)> {
    let recv = proposer.other();
    let lists = &p.lists[proposer.index()];
    let recv_rank = &p.ranks[recv.index()];
    let n_prop = lists.len();
    let n_recv = p.size(recv);

    let mut next = vec![0usize; n_prop];
    let mut sent = vec![0u32; n_prop];
    let mut free: Vec<u32> = prop_quota.to_vec();
    let mut held: Vec<BinaryHeap<(u32, usize)>> = vec![BinaryHeap::new(); n_recv];
    let mut queued = vec![false; n_prop];
    let mut queue: VecDeque<usize> = VecDeque::with_capacity(n_prop);
    for i in 0..n_prop {
        if free[i] > 0 {
            queue.push_back(i);
            queued[i] = true;
        }
    }

    loop {
        let pick = match discipline {
            QueueDiscipline::Fifo => queue.pop_front(),
            QueueDiscipline::Lifo => queue.pop_back(),
        };
        let Some(m) = pick else { break };
        queued[m] = false;
        if free[m] == 0 {
            continue;
        }
        let Some(&w) = lists[m].get(next[m]) else {
            // list exhausted: the remaining spots go to himself
            counters.self_matches += 1;
            free[m] = 0;
            continue;
        };
        sent[m] += 1;
        if sent[m] >= pair_cap {
            next[m] += 1;
            sent[m] = 0;
        }
        counters.proposals += 1;
        if let Some(rank) = recv_rank.rank(w, m) {
            let q = recv_quota[w] as usize;
            let h = &mut held[w];
            if q > 0 && h.len() < q {
                h.push((rank, m));
                free[m] -= 1;
            } else if q > 0 && h.peek().is_some_and(|&(worst, _)| rank < worst) {
                let (_, out) = h.pop().expect("non-empty");
                h.push((rank, m));
                free[m] -= 1;
                free[out] += 1;
                if !queued[out] {
                    queue.push_back(out);
                    queued[out] = true;
                }
            }
        }
        if free[m] > 0 && !queued[m] {
            queue.push_back(m);
            queued[m] = true;
        }
    }

    let mut pairs = Vec::new();
    for (w, h) in held.into_iter().enumerate() {
        for (_, m) in h {
            pairs.push(match proposer {
                Side::Left => (m, w),
                Side::Right => (w, m),
            });
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Gale–Shapley with quotas; `proposer` makes the offers.
///
/// The result is proposer-optimal and independent of the pick order of free
/// proposers. Tied preferences are rejected: strictify first.
pub fn gs_match(market: &TwoSidedMarket, proposer: Side) -> Result<Matching, Error> {
    gs_match_with(market, proposer, QueueDiscipline::Fifo).map(|(m, _)| m)
}

/// [`gs_match`] with an explicit free-proposer discipline, also returning the
/// operation counts.
pub fn gs_match_with(
    market: &TwoSidedMarket,
    proposer: Side,
    discipline: QueueDiscipline,
) -> Result<(Matching, Counters), Error> {
    check_strict(market)?;
    let p = Prepared::new(market);
    let mut counters = Counters::default();
    let pairs = deferred_acceptance(
        &p,
        proposer,
        market.quotas(proposer),
        market.quotas(proposer.other()),
        market.pair_policy.cap(),
        discipline,
        &mut counters,
    );
    Ok((Matching::from_pairs(pairs), counters))
}
