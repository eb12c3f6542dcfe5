//! Incremental re-matching with waiting lists.
//!
//! The MFP ("match free persons") routine continues deferred acceptance from
//! an existing matching. Every agent of the full market owns a waiting list
//! of candidates it may still propose to: initially the proposers' complete
//! preference lists, later the proposers a receiver rejected or lost.
//! Adding or removing a single agent then costs only the proposals that the
//! change actually triggers.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::error::Error;
use crate::gale_shapley::{check_strict, Counters};
use crate::market::{AgentId, Side, TwoSidedMarket};
use crate::matching::Matching;
use crate::prefs::RankTable;

/// Match status of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    /// Not yet settled; only active proposers may be free.
    Free,
    /// Settled on staying single.
    Single,
    Matched(usize),
}

/// Broken waiting-list contract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WaitingListViolation {
    /// An inactive agent holds a match.
    InactiveMatched(AgentId),
    /// `agent` points at a partner that does not point back.
    AsymmetricMatch(AgentId),
    /// Free agents on both sides at once.
    FreeOnBothSides,
    /// A free agent on the side that is about to receive proposals.
    FreeReceiver(AgentId),
    /// The pair is matched although one of them finds the other unacceptable.
    IndividuallyIrrational { man: usize, woman: usize },
    /// The pair blocks the matching restricted to settled agents.
    RestrictedBlockingPair { man: usize, woman: usize },
    /// `member` prefers `owner` to its current match but is not on `owner`'s list.
    ListIncomplete { owner: AgentId, member: AgentId },
    /// A mutually acceptable pair is neither matched nor on either list.
    PairUncovered { man: usize, woman: usize },
    /// A waiting list names someone outside the full market.
    UnknownEntry { owner: AgentId, entry: usize },
}

impl fmt::Display for WaitingListViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use WaitingListViolation::*;
        match self {
            InactiveMatched(a) => write!(f, "inactive {a} is matched"),
            AsymmetricMatch(a) => write!(f, "partner of {a} does not point back"),
            FreeOnBothSides => write!(f, "free agents on both sides"),
            FreeReceiver(a) => write!(f, "receiving {a} is free"),
            IndividuallyIrrational { man, woman } => write!(f, "pair ({man}, {woman}) is not mutually acceptable"),
            RestrictedBlockingPair { man, woman } => write!(f, "pair ({man}, {woman}) blocks the settled matching"),
            ListIncomplete { owner, member } => write!(f, "{member} missing from waiting list of {owner}"),
            PairUncovered { man, woman } => write!(f, "pair ({man}, {woman}) is neither matched nor waiting"),
            UnknownEntry { owner, entry } => write!(f, "waiting list of {owner} names unknown agent {entry}"),
        }
    }
}

/// Waiting lists, matching and active sets over a fixed full market.
///
/// One-to-one markets with strict preferences only. All operations keep the
/// waiting lists compatible with the matching (see
/// [`validate_waiting_lists`]), so the settled matching is always stable on
/// the active market.
#[derive(Clone, Debug)]
pub struct WaitingListState {
    market: TwoSidedMarket,
    ranks: [RankTable; 2],
    active: [Vec<bool>; 2],
    slots: [Vec<Slot>; 2],
    lists: [Vec<BinaryHeap<(Reverse<u32>, usize)>>; 2],
    listed: [Vec<bool>; 2],
    counters: Counters,
}

impl WaitingListState {
    /// State before any proposal: `listing` agents hold their full
    /// preference lists, the other side holds empty lists and every active
    /// agent of the other side is single. Active `listing` agents are free.
    pub fn new(market: &TwoSidedMarket, listing: Side, active: [Vec<bool>; 2]) -> Result<Self, Error> {
        check_strict(market)?;
        if market.left_quotas.iter().chain(&market.right_quotas).any(|&q| q != 1) {
            return Err(Error::QuotasNotSupported);
        }
        for side in [Side::Left, Side::Right] {
            let (n, found) = (market.size(side), active[side.index()].len());
            if n != found {
                return Err(Error::SideCount { expected: n, found });
            }
        }
        let ranks = [
            RankTable::new(&market.left_prefs, market.n_right()),
            RankTable::new(&market.right_prefs, market.n_left()),
        ];
        let cells = market.n_left() * market.n_right();
        let mut state = WaitingListState {
            market: market.clone(),
            ranks,
            slots: [vec![Slot::Free; market.n_left()], vec![Slot::Free; market.n_right()]],
            active,
            lists: [vec![BinaryHeap::new(); market.n_left()], vec![BinaryHeap::new(); market.n_right()]],
            listed: [vec![false; cells], vec![false; cells]],
            counters: Counters::default(),
        };
        for i in 0..market.size(listing) {
            for j in market.prefs(listing)[i].iter() {
                state.push(listing, i, j);
            }
        }
        state.counters = Counters::default();
        let other = listing.other();
        for (j, &on) in state.active[other.index()].iter().enumerate() {
            if on {
                state.slots[other.index()][j] = Slot::Single;
            }
        }
        Ok(state)
    }

    /// Everyone active, nobody matched yet; running `listing` as proposer
    /// yields the Gale–Shapley matching.
    pub fn fresh(market: &TwoSidedMarket, listing: Side) -> Result<Self, Error> {
        let active = [vec![true; market.n_left()], vec![true; market.n_right()]];
        WaitingListState::new(market, listing, active)
    }

    /// Nobody active; agents join through [`WaitingListState::add`].
    pub fn empty(market: &TwoSidedMarket, listing: Side) -> Result<Self, Error> {
        let active = [vec![false; market.n_left()], vec![false; market.n_right()]];
        WaitingListState::new(market, listing, active)
    }

    /// Rebuilds a state from its parts, e.g. a debug dump. No compatibility
    /// checks are made; see [`validate_waiting_lists`].
    pub fn from_parts(
        market: &TwoSidedMarket,
        active: [Vec<bool>; 2],
        matching: &Matching,
        lists: [Vec<Vec<usize>>; 2],
    ) -> Result<Self, Error> {
        let mut state = WaitingListState::new(market, Side::Left, active)?;
        for side in 0..2 {
            for h in &mut state.lists[side] {
                h.clear();
            }
            state.listed[side].iter_mut().for_each(|b| *b = false);
            for (i, slot) in state.slots[side].iter_mut().enumerate() {
                *slot = if state.active[side][i] { Slot::Single } else { Slot::Free };
            }
        }
        for t in matching.tuples() {
            let (m, w) = (t[0], t[1]);
            if m >= market.n_left() {
                return Err(Error::UnknownAgent(AgentId::new(0, m)));
            }
            if w >= market.n_right() {
                return Err(Error::UnknownAgent(AgentId::new(1, w)));
            }
            state.slots[0][m] = Slot::Matched(w);
            state.slots[1][w] = Slot::Matched(m);
        }
        for side in [Side::Left, Side::Right] {
            let others = market.size(side.other());
            for (i, list) in lists[side.index()].iter().enumerate() {
                if i >= market.size(side) {
                    return Err(Error::UnknownAgent(AgentId::new(side.index(), i)));
                }
                for &j in list {
                    if j >= others || !state.ranks[side.index()].accepts(i, j) {
                        return Err(Error::UnknownAgent(AgentId::new(side.other().index(), j)));
                    }
                    state.push(side, i, j);
                }
            }
        }
        state.counters = Counters::default();
        Ok(state)
    }

    pub fn market(&self) -> &TwoSidedMarket {
        &self.market
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn is_active(&self, agent: AgentId) -> bool {
        self.active.get(agent.side).and_then(|a| a.get(agent.index)).copied().unwrap_or(false)
    }

    pub fn active(&self, side: Side) -> &[bool] {
        &self.active[side.index()]
    }

    pub fn slot(&self, side: Side, index: usize) -> Slot {
        self.slots[side.index()][index]
    }

    /// Waiting list of `agent`, most preferred first.
    pub fn waiting_list(&self, side: Side, index: usize) -> Vec<usize> {
        let mut v: Vec<(Reverse<u32>, usize)> = self.lists[side.index()][index].iter().copied().collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.into_iter().map(|(_, j)| j).collect()
    }

    /// The settled pairs among active agents.
    pub fn matching(&self) -> Matching {
        Matching::from_pairs(self.slots[0].iter().enumerate().filter_map(|(m, s)| match s {
            Slot::Matched(w) => Some((m, *w)),
            _ => None,
        }))
    }

    #[inline]
    fn cell(&self, side: Side, owner: usize, entrant: usize) -> usize {
        match side {
            Side::Left => owner * self.market.n_right() + entrant,
            Side::Right => owner * self.market.n_left() + entrant,
        }
    }

    fn push(&mut self, side: Side, owner: usize, entrant: usize) {
        let cell = self.cell(side, owner, entrant);
        if self.listed[side.index()][cell] {
            return;
        }
        let Some(rank) = self.ranks[side.index()].rank(owner, entrant) else { return };
        self.listed[side.index()][cell] = true;
        self.lists[side.index()][owner].push((Reverse(rank), entrant));
        self.counters.insertions += 1;
    }

    fn pop(&mut self, side: Side, owner: usize) -> Option<usize> {
        let (_, entrant) = self.lists[side.index()][owner].pop()?;
        let cell = self.cell(side, owner, entrant);
        self.listed[side.index()][cell] = false;
        Some(entrant)
    }

    fn listed(&self, side: Side, owner: usize, entrant: usize) -> bool {
        self.listed[side.index()][self.cell(side, owner, entrant)]
    }

    /// Whether `owner` strictly prefers `candidate` to its current slot.
    fn improves(&self, side: Side, owner: usize, candidate: usize) -> bool {
        let ranks = &self.ranks[side.index()];
        match self.slots[side.index()][owner] {
            Slot::Free | Slot::Single => ranks.accepts(owner, candidate),
            Slot::Matched(cur) => ranks.prefers(owner, Some(candidate), Some(cur)),
        }
    }

    /// Lets every free active agent of `proposer` propose down its waiting
    /// list until all of them are settled.
    pub fn run(&mut self, proposer: Side) -> Result<(), Error> {
        if let Some(v) = self.violations().into_iter().next() {
            return Err(Error::IncompatibleState(v));
        }
        if let Some(j) = self.free_agents(proposer.other()).next() {
            return Err(Error::IncompatibleState(WaitingListViolation::FreeReceiver(AgentId::new(
                proposer.other().index(),
                j,
            ))));
        }
        self.run_unchecked(proposer);
        Ok(())
    }

    fn free_agents(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        let s = side.index();
        (0..self.slots[s].len()).filter(move |&i| self.active[s][i] && self.slots[s][i] == Slot::Free)
    }

    pub(crate) fn run_unchecked(&mut self, proposer: Side) {
        let p = proposer.index();
        let recv = proposer.other();
        let r = recv.index();
        let mut queue: VecDeque<usize> = self.free_agents(proposer).collect();
        while let Some(m) = queue.pop_front() {
            if !self.active[p][m] || self.slots[p][m] != Slot::Free {
                continue;
            }
            let Some(w) = self.pop(proposer, m) else {
                self.slots[p][m] = Slot::Single;
                self.counters.self_matches += 1;
                continue;
            };
            self.counters.proposals += 1;
            if self.active[r][w] && self.improves(recv, w, m) {
                if let Slot::Matched(old) = self.slots[r][w] {
                    self.slots[p][old] = Slot::Free;
                    self.push(recv, w, old);
                    queue.push_back(old);
                }
                self.slots[r][w] = Slot::Matched(m);
                self.slots[p][m] = Slot::Matched(w);
            } else {
                self.push(recv, w, m);
                queue.push_back(m);
            }
        }
    }

    /// Activates `agent`, who then proposes from its waiting list.
    pub fn add(&mut self, side: Side, index: usize) -> Result<(), Error> {
        let agent = AgentId::new(side.index(), index);
        match self.active[side.index()].get(index) {
            None => return Err(Error::UnknownAgent(agent)),
            Some(true) => return Err(Error::AlreadyActive(agent)),
            Some(false) => {}
        }
        self.active[side.index()][index] = true;
        self.slots[side.index()][index] = Slot::Free;
        self.run_unchecked(side);
        Ok(())
    }

    /// Deactivates `agent`. Its partner goes onto its waiting list and
    /// re-proposes from its own list.
    pub fn remove(&mut self, side: Side, index: usize) -> Result<(), Error> {
        let agent = AgentId::new(side.index(), index);
        match self.active[side.index()].get(index) {
            None => return Err(Error::UnknownAgent(agent)),
            Some(false) => return Err(Error::NotActive(agent)),
            Some(true) => {}
        }
        let s = side.index();
        let other = side.other();
        let slot = self.slots[s][index];
        self.active[s][index] = false;
        self.slots[s][index] = Slot::Free;
        if let Slot::Matched(j) = slot {
            self.push(side, index, j);
            self.slots[other.index()][j] = Slot::Free;
            self.run_unchecked(other);
        }
        Ok(())
    }

    /// Contract violations; empty iff the state is compatible.
    pub fn violations(&self) -> Vec<WaitingListViolation> {
        use WaitingListViolation::*;
        let mut out = Vec::new();
        let (nl, nr) = (self.market.n_left(), self.market.n_right());
        for side in [Side::Left, Side::Right] {
            let s = side.index();
            for (i, &slot) in self.slots[s].iter().enumerate() {
                let agent = AgentId::new(s, i);
                if !self.active[s][i] && slot != Slot::Free {
                    out.push(InactiveMatched(agent));
                }
                if let Slot::Matched(j) = slot {
                    let back = self.slots[side.other().index()].get(j).copied();
                    if back != Some(Slot::Matched(i)) || !self.active[side.other().index()][j] {
                        out.push(AsymmetricMatch(agent));
                    }
                }
            }
        }
        let free_left = self.free_agents(Side::Left).next().is_some();
        let free_right = self.free_agents(Side::Right).next().is_some();
        if free_left && free_right {
            out.push(FreeOnBothSides);
        }
        let settled = |side: Side, i: usize| self.active[side.index()][i] && self.slots[side.index()][i] != Slot::Free;

        for m in 0..nl {
            for w in 0..nr {
                let ml = self.ranks[0].accepts(m, w);
                let wl = self.ranks[1].accepts(w, m);
                let matched = self.slots[0][m] == Slot::Matched(w);
                if matched && !(ml && wl) {
                    out.push(IndividuallyIrrational { man: m, woman: w });
                }
                if !(ml && wl) {
                    continue;
                }
                if !matched
                    && settled(Side::Left, m)
                    && settled(Side::Right, w)
                    && self.improves(Side::Left, m, w)
                    && self.improves(Side::Right, w, m)
                {
                    out.push(RestrictedBlockingPair { man: m, woman: w });
                }
                // w prefers m to her settled match: she must be on m's list
                if settled(Side::Right, w) && !matched && self.improves(Side::Right, w, m) && !self.listed(Side::Left, m, w) {
                    out.push(ListIncomplete { owner: AgentId::new(0, m), member: AgentId::new(1, w) });
                }
                if settled(Side::Left, m) && !matched && self.improves(Side::Left, m, w) && !self.listed(Side::Right, w, m) {
                    out.push(ListIncomplete { owner: AgentId::new(1, w), member: AgentId::new(0, m) });
                }
                if !matched && !self.listed(Side::Left, m, w) && !self.listed(Side::Right, w, m) {
                    out.push(PairUncovered { man: m, woman: w });
                }
            }
        }
        out
    }
}

/// Contract violations of a state; empty iff it is compatible.
pub fn validate_waiting_lists(state: &WaitingListState) -> Vec<WaitingListViolation> {
    state.violations()
}

/// Runs MFP on a state; errors if the state breaks the contract.
pub fn mfp_run(mut state: WaitingListState, proposer: Side) -> Result<WaitingListState, Error> {
    state.run(proposer)?;
    Ok(state)
}

/// Activates an agent; see [`WaitingListState::add`].
pub fn add_agent(mut state: WaitingListState, side: Side, index: usize) -> Result<WaitingListState, Error> {
    state.add(side, index)?;
    Ok(state)
}

/// Deactivates an agent; see [`WaitingListState::remove`].
pub fn remove_agent(mut state: WaitingListState, side: Side, index: usize) -> Result<WaitingListState, Error> {
    state.remove(side, index)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gale_shapley::gs_match;
    use crate::prefs::PreferenceList;

    fn strict(v: &[usize]) -> PreferenceList {
        PreferenceList::strict(v.iter().copied())
    }

    fn mixing_example() -> TwoSidedMarket {
        TwoSidedMarket::new(
            vec![strict(&[1, 2]), strict(&[0, 1]), strict(&[1, 0])],
            vec![strict(&[2, 1]), strict(&[1, 0, 2]), strict(&[0])],
        )
    }

    #[test]
    fn fresh_state_is_compatible_and_matches_gs() {
        let m = mixing_example();
        let st = WaitingListState::fresh(&m, Side::Left).unwrap();
        assert!(validate_waiting_lists(&st).is_empty());
        let st = mfp_run(st, Side::Left).unwrap();
        assert!(validate_waiting_lists(&st).is_empty());
        assert_eq!(st.matching(), gs_match(&m, Side::Left).unwrap());
    }

    #[test]
    fn settled_state_is_unchanged_by_run() {
        let m = mixing_example();
        let st = mfp_run(WaitingListState::fresh(&m, Side::Left).unwrap(), Side::Left).unwrap();
        let before = st.matching();
        let st = mfp_run(st, Side::Right).unwrap();
        assert_eq!(st.matching(), before);
    }

    #[test]
    fn mixing_example_removal_differs_from_gs() {
        let m = mixing_example();
        let st = mfp_run(WaitingListState::fresh(&m, Side::Left).unwrap(), Side::Left).unwrap();
        let st = remove_agent(st, Side::Left, 0).unwrap();
        assert!(validate_waiting_lists(&st).is_empty());
        assert_eq!(st.matching(), Matching::from_pairs([(1, 1), (2, 0)]));
        let (view, _) = m.restrict(&[vec![1, 2], vec![0, 1, 2]], None).unwrap();
        assert_eq!(gs_match(&view.market, Side::Left).unwrap(), Matching::from_pairs([(1, 0), (2, 1)]));
    }

    #[test]
    fn add_and_remove_check_activity() {
        let m = mixing_example();
        let mut st = WaitingListState::fresh(&m, Side::Left).unwrap();
        st.run(Side::Left).unwrap();
        assert_eq!(st.add(Side::Left, 0), Err(Error::AlreadyActive(AgentId::new(0, 0))));
        st.remove(Side::Right, 2).unwrap();
        assert_eq!(st.remove(Side::Right, 2), Err(Error::NotActive(AgentId::new(1, 2))));
        st.add(Side::Right, 2).unwrap();
        assert!(st.violations().is_empty());
    }

    #[test]
    fn deleted_pair_is_reported_uncovered() {
        let m = TwoSidedMarket::new(vec![strict(&[0])], vec![strict(&[0])]);
        let st = mfp_run(WaitingListState::fresh(&m, Side::Left).unwrap(), Side::Left).unwrap();
        assert_eq!(st.matching(), Matching::from_pairs([(0, 0)]));
        assert!(st.waiting_list(Side::Left, 0).is_empty());
        let lists = [vec![vec![]], vec![vec![]]];
        let broken = WaitingListState::from_parts(&m, [vec![true], vec![true]], &Matching::empty(), lists).unwrap();
        let v = validate_waiting_lists(&broken);
        assert!(v.contains(&WaitingListViolation::PairUncovered { man: 0, woman: 0 }));
        assert!(matches!(mfp_run(broken, Side::Left), Err(Error::IncompatibleState(_))));
    }

    #[test]
    fn empty_list_agent_is_single() {
        let m = TwoSidedMarket::new(vec![strict(&[0]), strict(&[])], vec![strict(&[0])]);
        let mut st = WaitingListState::fresh(&m, Side::Left).unwrap();
        st.remove(Side::Left, 1).unwrap();
        st.run(Side::Left).unwrap();
        let before = st.matching();
        st.add(Side::Left, 1).unwrap();
        assert_eq!(st.slot(Side::Left, 1), Slot::Single);
        assert_eq!(st.matching(), before);
    }
}
