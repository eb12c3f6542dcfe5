//! Market data types, validation and restriction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::matching::Matching;
use crate::prefs::PreferenceList;

/// An agent: its side (0-based) and its index within that side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentId {
    pub side: usize,
    pub index: usize,
}

impl AgentId {
    pub const fn new(side: usize, index: usize) -> Self {
        AgentId { side, index }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "side {} agent {}", self.side, self.index)
    }
}

/// The two sides of a two-sided market.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

/// How often the same pair may be matched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PairPolicy {
    #[default]
    AtMostOnce,
    /// Every pair may be matched up to this many times.
    UpTo(u32),
}

impl PairPolicy {
    pub fn cap(self) -> u32 {
        match self {
            PairPolicy::AtMostOnce => 1,
            PairPolicy::UpTo(c) => c,
        }
    }
}

/// A two-sided market `(M, W, P)` with quotas. Men are the left side.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TwoSidedMarket {
    pub left_prefs: Vec<PreferenceList>,
    pub right_prefs: Vec<PreferenceList>,
    pub left_quotas: Vec<u32>,
    pub right_quotas: Vec<u32>,
    pub pair_policy: PairPolicy,
}

impl TwoSidedMarket {
    /// A one-to-one market.
    pub fn new(left_prefs: Vec<PreferenceList>, right_prefs: Vec<PreferenceList>) -> Self {
        let left_quotas = vec![1; left_prefs.len()];
        let right_quotas = vec![1; right_prefs.len()];
        TwoSidedMarket { left_prefs, right_prefs, left_quotas, right_quotas, pair_policy: PairPolicy::AtMostOnce }
    }

    pub fn with_quotas(mut self, left: Vec<u32>, right: Vec<u32>) -> Self {
        self.left_quotas = left;
        self.right_quotas = right;
        self
    }

    pub fn with_pair_policy(mut self, policy: PairPolicy) -> Self {
        self.pair_policy = policy;
        self
    }

    pub fn n_left(&self) -> usize {
        self.left_prefs.len()
    }

    pub fn n_right(&self) -> usize {
        self.right_prefs.len()
    }

    pub fn prefs(&self, side: Side) -> &[PreferenceList] {
        match side {
            Side::Left => &self.left_prefs,
            Side::Right => &self.right_prefs,
        }
    }

    pub fn quotas(&self, side: Side) -> &[u32] {
        match side {
            Side::Left => &self.left_quotas,
            Side::Right => &self.right_quotas,
        }
    }

    pub fn size(&self, side: Side) -> usize {
        self.prefs(side).len()
    }

    /// Both directions list each other.
    pub fn mutually_acceptable(&self, left: usize, right: usize) -> bool {
        self.left_prefs[left].contains(right) && self.right_prefs[right].contains(left)
    }

    pub fn is_strict(&self) -> bool {
        self.left_prefs.iter().chain(&self.right_prefs).all(PreferenceList::is_strict)
    }

    /// Restricts to the given left and right subsets. Removed agents keep
    /// their index but become isolated: their lists are emptied and nobody
    /// lists them.
    pub fn restrict(
        &self,
        subsets: &[Vec<usize>],
        matching: Option<&Matching>,
    ) -> Result<(RestrictedView<TwoSidedMarket>, Option<Matching>), Error> {
        let active = membership(&self.side_sizes(), subsets)?;
        let mut market = self.clone();
        prune(&mut market.left_prefs, &active[0], &active[1]);
        prune(&mut market.right_prefs, &active[1], &active[0]);
        let restricted = matching.map(|m| restrict_matching(m, &active));
        Ok((RestrictedView { market, active }, restricted))
    }
}

/// Preferences between side `k` and side `k + 1` of a multi-sided market.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Link {
    /// Lists of side-`k` agents over side `k + 1`.
    pub forward: Vec<PreferenceList>,
    /// Lists of side-`k + 1` agents over side `k`.
    pub backward: Vec<PreferenceList>,
}

/// An n-sided market `((S_1, ..., S_n), (P_1, ..., P_{n-1}))`.
///
/// For `n = 3` the sides are advisors, students and co-advisors. A middle
/// agent has a single quota shared by both adjacent markets.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultiSidedMarket {
    pub sizes: Vec<usize>,
    pub links: Vec<Link>,
    pub quotas: Vec<Vec<u32>>,
    /// Compatible (advisor, co-advisor) pairs. `None` means all pairs are
    /// compatible. Only meaningful for three sides.
    pub compat: Option<BTreeSet<(usize, usize)>>,
    pub pair_policy: PairPolicy,
}

impl MultiSidedMarket {
    /// Builds a unit-quota market from its links.
    pub fn new(links: Vec<Link>) -> Self {
        let mut sizes = Vec::with_capacity(links.len() + 1);
        if let Some(first) = links.first() {
            sizes.push(first.forward.len());
        }
        for l in &links {
            sizes.push(l.backward.len());
        }
        let quotas = sizes.iter().map(|&n| vec![1; n]).collect();
        MultiSidedMarket { sizes, links, quotas, compat: None, pair_policy: PairPolicy::AtMostOnce }
    }

    /// Three-sided constructor from the four directional preference families.
    pub fn three_sided(
        advisors_over_students: Vec<PreferenceList>,
        students_over_advisors: Vec<PreferenceList>,
        students_over_coadvisors: Vec<PreferenceList>,
        coadvisors_over_students: Vec<PreferenceList>,
    ) -> Self {
        MultiSidedMarket::new(vec![
            Link { forward: advisors_over_students, backward: students_over_advisors },
            Link { forward: students_over_coadvisors, backward: coadvisors_over_students },
        ])
    }

    pub fn with_quotas(mut self, quotas: Vec<Vec<u32>>) -> Self {
        self.quotas = quotas;
        self
    }

    pub fn with_compat(mut self, compat: BTreeSet<(usize, usize)>) -> Self {
        self.compat = Some(compat);
        self
    }

    pub fn with_pair_policy(mut self, policy: PairPolicy) -> Self {
        self.pair_policy = policy;
        self
    }

    pub fn n_sides(&self) -> usize {
        self.sizes.len()
    }

    pub fn unit_quotas(&self) -> bool {
        self.quotas.iter().flatten().all(|&q| q == 1)
    }

    pub fn compatible(&self, advisor: usize, coadvisor: usize) -> bool {
        self.compat.as_ref().is_none_or(|k| k.contains(&(advisor, coadvisor)))
    }

    /// The two-sided market between sides `k` and `k + 1`.
    pub fn submarket(&self, k: usize) -> TwoSidedMarket {
        let link = &self.links[k];
        TwoSidedMarket {
            left_prefs: link.forward.clone(),
            right_prefs: link.backward.clone(),
            left_quotas: self.quotas[k].clone(),
            right_quotas: self.quotas[k + 1].clone(),
            pair_policy: self.pair_policy,
        }
    }

    pub fn from_two_sided(market: &TwoSidedMarket) -> Self {
        MultiSidedMarket {
            sizes: vec![market.n_left(), market.n_right()],
            links: vec![Link { forward: market.left_prefs.clone(), backward: market.right_prefs.clone() }],
            quotas: vec![market.left_quotas.clone(), market.right_quotas.clone()],
            compat: None,
            pair_policy: market.pair_policy,
        }
    }

    /// Restriction to per-side subsets; see [`TwoSidedMarket::restrict`].
    pub fn restrict(
        &self,
        subsets: &[Vec<usize>],
        matching: Option<&Matching>,
    ) -> Result<(RestrictedView<MultiSidedMarket>, Option<Matching>), Error> {
        let active = membership(&self.sizes, subsets)?;
        let mut market = self.clone();
        for (k, link) in market.links.iter_mut().enumerate() {
            prune(&mut link.forward, &active[k], &active[k + 1]);
            prune(&mut link.backward, &active[k + 1], &active[k]);
        }
        if let (Some(k), 3) = (market.compat.as_mut(), active.len()) {
            k.retain(|&(a, c)| active[0].get(a) == Some(&true) && active[2].get(c) == Some(&true));
        }
        let restricted = matching.map(|m| restrict_matching(m, &active));
        Ok((RestrictedView { market, active }, restricted))
    }
}

/// A market restricted to subsets of its sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedView<M> {
    pub market: M,
    /// `active[k][i]` is true iff agent `i` of side `k` was kept.
    pub active: Vec<Vec<bool>>,
}

fn membership(sizes: &[usize], subsets: &[Vec<usize>]) -> Result<Vec<Vec<bool>>, Error> {
    if subsets.len() != sizes.len() {
        return Err(Error::SideCount { expected: sizes.len(), found: subsets.len() });
    }
    let mut active: Vec<Vec<bool>> = sizes.iter().map(|&n| vec![false; n]).collect();
    for (side, subset) in subsets.iter().enumerate() {
        for &i in subset {
            *active[side].get_mut(i).ok_or(Error::UnknownAgent(AgentId::new(side, i)))? = true;
        }
    }
    Ok(active)
}

fn prune(lists: &mut [PreferenceList], owners: &[bool], others: &[bool]) {
    for (owner, list) in lists.iter_mut().enumerate() {
        if owners[owner] {
            list.retain(|x| others.get(x) == Some(&true));
        } else {
            *list = PreferenceList::empty();
        }
    }
}

fn restrict_matching(m: &Matching, active: &[Vec<bool>]) -> Matching {
    m.tuples()
        .iter()
        .filter(|t| t.iter().enumerate().all(|(k, &i)| active[k].get(i) == Some(&true)))
        .cloned()
        .collect()
}

/// Rule broken by a market or matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// A list references an agent that does not exist on the adjacent side.
    UnknownListedAgent(usize),
    /// The same agent appears twice in one list.
    DuplicateListedAgent(usize),
    EmptyTieGroup,
    ZeroQuota,
    /// Number of preference lists or quotas does not match the side size.
    SideSizeMismatch { side: usize },
    ZeroPairCap,
    TooFewSides,
    CompatOutsideThreeSides,
    UnknownCompatPair(usize, usize),
    /// Tuple has the wrong number of entries or references unknown agents.
    MalformedTuple(Vec<usize>),
    QuotaExceeded { count: usize, quota: u32 },
    RepeatedPair { other: AgentId, count: usize },
    IncompatibleTuple(Vec<usize>),
}

/// A single rule violation, naming the offending agent when there is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub agent: Option<AgentId>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.agent {
            Some(a) => write!(f, "{a}: {:?}", self.rule),
            None => write!(f, "{:?}", self.rule),
        }
    }
}

/// Common view of two-sided and multi-sided markets.
pub trait MarketShape {
    fn side_sizes(&self) -> Vec<usize>;
    fn quota(&self, agent: AgentId) -> Option<u32>;
    fn pair_policy(&self) -> PairPolicy;
    /// All type invariant violations of the market.
    fn violations(&self) -> Vec<Violation>;

    fn contains(&self, agent: AgentId) -> bool {
        self.side_sizes().get(agent.side).is_some_and(|&n| agent.index < n)
    }

    /// Whether a stored tuple may appear in a matching of this market.
    fn tuple_allowed(&self, _tuple: &[usize]) -> bool {
        true
    }
}

fn check_lists(out: &mut Vec<Violation>, side: usize, lists: &[PreferenceList], others: usize) {
    for (i, list) in lists.iter().enumerate() {
        let agent = Some(AgentId::new(side, i));
        let mut seen = BTreeSet::new();
        for g in &list.groups {
            if g.is_empty() {
                out.push(Violation { agent, rule: Rule::EmptyTieGroup });
            }
            for &x in g {
                if x >= others {
                    out.push(Violation { agent, rule: Rule::UnknownListedAgent(x) });
                } else if !seen.insert(x) {
                    out.push(Violation { agent, rule: Rule::DuplicateListedAgent(x) });
                }
            }
        }
    }
}

fn check_quotas(out: &mut Vec<Violation>, side: usize, quotas: &[u32], size: usize) {
    if quotas.len() != size {
        out.push(Violation { agent: None, rule: Rule::SideSizeMismatch { side } });
    }
    for (i, &q) in quotas.iter().enumerate() {
        if q == 0 {
            out.push(Violation { agent: Some(AgentId::new(side, i)), rule: Rule::ZeroQuota });
        }
    }
}

impl MarketShape for TwoSidedMarket {
    fn side_sizes(&self) -> Vec<usize> {
        vec![self.n_left(), self.n_right()]
    }

    fn quota(&self, agent: AgentId) -> Option<u32> {
        match agent.side {
            0 => self.left_quotas.get(agent.index).copied(),
            1 => self.right_quotas.get(agent.index).copied(),
            _ => None,
        }
    }

    fn pair_policy(&self) -> PairPolicy {
        self.pair_policy
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_lists(&mut out, 0, &self.left_prefs, self.n_right());
        check_lists(&mut out, 1, &self.right_prefs, self.n_left());
        check_quotas(&mut out, 0, &self.left_quotas, self.n_left());
        check_quotas(&mut out, 1, &self.right_quotas, self.n_right());
        if self.pair_policy.cap() == 0 {
            out.push(Violation { agent: None, rule: Rule::ZeroPairCap });
        }
        out
    }
}

impl MarketShape for MultiSidedMarket {
    fn side_sizes(&self) -> Vec<usize> {
        self.sizes.clone()
    }

    fn quota(&self, agent: AgentId) -> Option<u32> {
        self.quotas.get(agent.side)?.get(agent.index).copied()
    }

    fn pair_policy(&self) -> PairPolicy {
        self.pair_policy
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.sizes.len();
        if n < 2 {
            if n == 1 || !self.links.is_empty() {
                out.push(Violation { agent: None, rule: Rule::TooFewSides });
            }
            return out;
        }
        if self.links.len() != n - 1 {
            out.push(Violation { agent: None, rule: Rule::TooFewSides });
            return out;
        }
        for (k, link) in self.links.iter().enumerate() {
            if link.forward.len() != self.sizes[k] {
                out.push(Violation { agent: None, rule: Rule::SideSizeMismatch { side: k } });
            }
            if link.backward.len() != self.sizes[k + 1] {
                out.push(Violation { agent: None, rule: Rule::SideSizeMismatch { side: k + 1 } });
            }
            check_lists(&mut out, k, &link.forward, self.sizes[k + 1]);
            check_lists(&mut out, k + 1, &link.backward, self.sizes[k]);
        }
        if self.quotas.len() != n {
            out.push(Violation { agent: None, rule: Rule::SideSizeMismatch { side: self.quotas.len().min(n) } });
        }
        for (k, q) in self.quotas.iter().enumerate().take(n) {
            check_quotas(&mut out, k, q, self.sizes[k]);
        }
        if let Some(compat) = &self.compat {
            if n != 3 {
                out.push(Violation { agent: None, rule: Rule::CompatOutsideThreeSides });
            } else {
                for &(a, c) in compat {
                    if a >= self.sizes[0] || c >= self.sizes[2] {
                        out.push(Violation { agent: None, rule: Rule::UnknownCompatPair(a, c) });
                    }
                }
            }
        }
        if self.pair_policy.cap() == 0 {
            out.push(Violation { agent: None, rule: Rule::ZeroPairCap });
        }
        out
    }

    fn tuple_allowed(&self, tuple: &[usize]) -> bool {
        tuple.len() != 3 || self.compatible(tuple[0], tuple[2])
    }
}

/// Type-invariant violations of a market; empty iff the market is valid.
pub fn validate_market<M: MarketShape>(market: &M) -> Vec<Violation> {
    market.violations()
}

/// Checks a matching against a market: tuple shape, quotas, pair policy and
/// compatibility.
pub fn validate_matching<M: MarketShape>(market: &M, matching: &Matching) -> Vec<Violation> {
    let sizes = market.side_sizes();
    let cap = market.pair_policy().cap() as usize;
    let mut out = Vec::new();
    let mut counts: BTreeMap<AgentId, usize> = BTreeMap::new();
    let mut pairs: BTreeMap<(AgentId, AgentId), usize> = BTreeMap::new();
    for t in matching.tuples() {
        let well_formed = t.len() == sizes.len() && t.iter().zip(&sizes).all(|(&i, &n)| i < n);
        if !well_formed {
            out.push(Violation { agent: None, rule: Rule::MalformedTuple(t.clone()) });
            continue;
        }
        if !market.tuple_allowed(t) {
            out.push(Violation { agent: None, rule: Rule::IncompatibleTuple(t.clone()) });
        }
        for (k, &i) in t.iter().enumerate() {
            *counts.entry(AgentId::new(k, i)).or_default() += 1;
        }
        for k in 0..t.len() - 1 {
            *pairs.entry((AgentId::new(k, t[k]), AgentId::new(k + 1, t[k + 1]))).or_default() += 1;
        }
    }
    for (agent, count) in counts {
        let quota = market.quota(agent).unwrap_or(0);
        if count > quota as usize {
            out.push(Violation { agent: Some(agent), rule: Rule::QuotaExceeded { count, quota } });
        }
    }
    for ((a, b), count) in pairs {
        if count > cap {
            out.push(Violation { agent: Some(a), rule: Rule::RepeatedPair { other: b, count } });
        }
    }
    out
}

/// Number of tuples containing `agent`, self-matches excluded.
pub fn count_matches<M: MarketShape>(market: &M, matching: &Matching, agent: AgentId) -> Result<usize, Error> {
    if !market.contains(agent) {
        return Err(Error::UnknownAgent(agent));
    }
    Ok(matching.count_of(agent))
}
