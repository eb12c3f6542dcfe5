//! Preference lists with tie-groups and dense rank lookups.

use alloc::vec;
use alloc::vec::Vec;

/// Ranked acceptable partners of one agent, best group first.
///
/// Entries are indices into the adjacent side. Agents in the same group are
/// tied. Anyone not listed is unacceptable, i.e. ranked below staying single.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreferenceList {
    pub groups: Vec<Vec<usize>>,
}

impl PreferenceList {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        PreferenceList { groups }
    }

    /// A strict list in the given order.
    pub fn strict<I: IntoIterator<Item = usize>>(order: I) -> Self {
        PreferenceList { groups: order.into_iter().map(|x| vec![x]).collect() }
    }

    pub fn empty() -> Self {
        PreferenceList::default()
    }

    pub fn is_strict(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }

    pub fn is_empty(&self) -> bool {
        self.groups.iter().all(|g| g.is_empty())
    }

    /// Number of listed agents.
    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Listed agents from best to worst, tie-groups in stored order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().flatten().copied()
    }

    /// Group index of `other`, if listed.
    pub fn rank_of(&self, other: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&other))
    }

    pub fn contains(&self, other: usize) -> bool {
        self.rank_of(other).is_some()
    }

    /// Drops every entry for which `keep` is false, along with emptied groups.
    pub fn retain(&mut self, mut keep: impl FnMut(usize) -> bool) {
        for g in &mut self.groups {
            g.retain(|&x| keep(x));
        }
        self.groups.retain(|g| !g.is_empty());
    }
}

const UNRANKED: u32 = u32::MAX;

/// Dense `owners x others` table of tie-group ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTable {
    others: usize,
    ranks: Vec<u32>,
}

impl RankTable {
    /// Builds the table; entries outside `0..others` are ignored.
    pub fn new(lists: &[PreferenceList], others: usize) -> Self {
        let mut ranks = vec![UNRANKED; lists.len() * others];
        for (owner, list) in lists.iter().enumerate() {
            let row = &mut ranks[owner * others..(owner + 1) * others];
            for (r, group) in list.groups.iter().enumerate() {
                for &x in group {
                    if x < others && row[x] == UNRANKED {
                        row[x] = r as u32;
                    }
                }
            }
        }
        RankTable { others, ranks }
    }

    #[inline]
    pub fn rank(&self, owner: usize, other: usize) -> Option<u32> {
        match self.ranks[owner * self.others + other] {
            UNRANKED => None,
            r => Some(r),
        }
    }

    #[inline]
    pub fn accepts(&self, owner: usize, other: usize) -> bool {
        self.ranks[owner * self.others + other] != UNRANKED
    }

    /// Rank used for comparisons: unacceptable partners sort after everyone.
    #[inline]
    pub(crate) fn key(&self, owner: usize, other: usize) -> u32 {
        self.ranks[owner * self.others + other]
    }

    /// Whether `owner` strictly prefers `x` to `y`; `None` stands for staying single.
    #[inline]
    pub fn prefers(&self, owner: usize, x: Option<usize>, y: Option<usize>) -> bool {
        match (x, y) {
            (None, None) => false,
            (Some(x), None) => self.accepts(owner, x),
            (None, Some(y)) => !self.accepts(owner, y),
            (Some(x), Some(y)) => {
                let (rx, ry) = (self.key(owner, x), self.key(owner, y));
                rx != UNRANKED && rx < ry
            }
        }
    }
}
