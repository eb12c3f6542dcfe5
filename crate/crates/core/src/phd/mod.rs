//! The PhD algorithm family for multi-sided markets.
//!
//! A three-sided market of advisors, students and co-advisors is solved by
//! alternately matching the advisor–student and student–co-advisor markets
//! and removing students who found an advisor but no co-advisor, until no
//! student is removed. The same loop runs over a chain of `n` sides
//! ([`n_sided_phd`]) and, with capacity reduction instead of removal, under
//! quotas ([`phd_match_quotas`]).
//!
//! Any stable two-sided matcher may be plugged into each adjacent market
//! ([`EngineConfig`]); the set of matched agents does not depend on that
//! choice.

mod blocking;
mod chain;
mod engine;
mod incompat;
mod quotas;
mod zhong_bai;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use blocking::{
    count_blocking_triples, count_blocking_tuples, find_blocking_triples, find_blocking_tuples, BlockingTriple,
    BlockingTuple, TripleKind, TupleKind,
};
pub use chain::{danilov_baseline, danilov_baseline_traced, n_sided_phd, phd_match};
pub use incompat::{phd_incompat_heuristic, HeuristicVariant};
pub use quotas::{assemble_triples, phd_match_quotas};
pub use zhong_bai::{zhong_bai, zhong_bai_traced};

use crate::error::Error;
use crate::gale_shapley::Counters;
use crate::market::{MarketShape, MultiSidedMarket, Side, TwoSidedMarket};
use crate::matching::Matching;
use crate::strictify::StrictificationRule;

/// A stable two-sided matcher supplied by the caller.
///
/// Implementations must return an individually rational stable matching of
/// the given market; agents outside the current submarket have empty lists.
pub trait StableMatcher {
    fn name(&self) -> &str;
    fn solve(&self, market: &TwoSidedMarket) -> Result<Matching, Error>;
}

/// Matcher used on one adjacent market.
///
/// Sides refer to the two-sided market between side `k` (left) and side
/// `k + 1` (right); `Side::Right` on the advisor–student market means
/// students propose.
#[derive(Clone)]
pub enum Matcher {
    /// Gale–Shapley from scratch with the given side proposing.
    Gs(Side),
    /// Incremental matcher carried across iterations; the side proposes in
    /// the first iteration. Unit quotas only.
    Mfp(Side),
    Custom(Arc<dyn StableMatcher + Send + Sync>),
}

impl fmt::Debug for Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Matcher::Gs(s) => write!(f, "Gs({s:?})"),
            Matcher::Mfp(s) => write!(f, "Mfp({s:?})"),
            Matcher::Custom(m) => write!(f, "Custom({})", m.name()),
        }
    }
}

impl PartialEq for Matcher {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Matcher::Gs(a), Matcher::Gs(b)) | (Matcher::Mfp(a), Matcher::Mfp(b)) => a == b,
            (Matcher::Custom(a), Matcher::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Matcher {
    pub fn proposer(&self) -> Option<Side> {
        match self {
            Matcher::Gs(s) | Matcher::Mfp(s) => Some(*s),
            Matcher::Custom(_) => None,
        }
    }

    fn mirrored(&self) -> Matcher {
        match self {
            Matcher::Gs(s) => Matcher::Gs(s.other()),
            Matcher::Mfp(s) => Matcher::Mfp(s.other()),
            Matcher::Custom(m) => Matcher::Custom(m.clone()),
        }
    }
}

/// Proposing sides on the advisor–student and student–co-advisor markets.
///
/// Codes name the proposer on the advisor market, then the proposer on the
/// co-advisor market, the final letter closing the chain:
/// `ssc` is A⇐S⇒C, `asc` is A⇒S⇒C, `acs` is A⇒S⇐C and `sac` is A⇐S⇐C.
///
/// All four orders match the same agents at every iteration, but only the
/// orders where co-advisors propose are stable on every market with
/// Gale–Shapley recomputed from scratch. When students propose to
/// co-advisors, dropping a student who found no co-advisor can let the
/// other students trade up, leaving some co-advisor with a worse student
/// than the dropped one. The dropped student, the co-advisor and the
/// dropped student's advisor then block. The incremental engine keeps the
/// previous matching when an unmatched student leaves, so it is stable
/// with any order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ProposalOrder {
    /// Students propose on both markets.
    Ssc,
    /// Advisors propose to students, students propose to co-advisors.
    Asc,
    /// Advisors and co-advisors propose to students.
    Acs,
    /// Students propose to advisors, co-advisors propose to students.
    #[default]
    Sac,
}

impl ProposalOrder {
    pub const ALL: [ProposalOrder; 4] = [ProposalOrder::Ssc, ProposalOrder::Asc, ProposalOrder::Acs, ProposalOrder::Sac];

    /// Proposing side on the advisor (left) – student (right) market.
    pub fn advisor_market(self) -> Side {
        match self {
            ProposalOrder::Ssc | ProposalOrder::Sac => Side::Right,
            ProposalOrder::Asc | ProposalOrder::Acs => Side::Left,
        }
    }

    /// Proposing side on the student (left) – co-advisor (right) market.
    pub fn coadvisor_market(self) -> Side {
        match self {
            ProposalOrder::Ssc | ProposalOrder::Asc => Side::Left,
            ProposalOrder::Acs | ProposalOrder::Sac => Side::Right,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            ProposalOrder::Ssc => "ssc",
            ProposalOrder::Asc => "asc",
            ProposalOrder::Acs => "acs",
            ProposalOrder::Sac => "sac",
        }
    }
}

impl FromStr for ProposalOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ProposalOrder::ALL
            .into_iter()
            .find(|o| o.code() == s)
            .ok_or_else(|| Error::InvalidParams(alloc::format!("unknown proposal order `{s}`")))
    }
}

/// Which two-sided matcher runs on which market, and when.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    /// One matcher per adjacent market, used at every iteration unless
    /// overridden.
    pub markets: Vec<Matcher>,
    /// Matchers for specific iterations (1-based).
    pub overrides: Vec<(usize, Vec<Matcher>)>,
    /// Matchers that recompute the final iteration. The matched agents are
    /// the same; the concrete matching may differ.
    pub last: Option<Vec<Matcher>>,
    /// Tie-breaking applied once before the first iteration.
    pub strictification: StrictificationRule,
    /// Three sides only: match students with co-advisors first. Advisors
    /// then play the co-advisors' part, so stability needs them proposing
    /// (or the incremental engine).
    pub swap_order: bool,
    /// Count blocking triples (tuples) of every tentative matching.
    pub trace_blocking: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig::three_sided(ProposalOrder::Sac)
    }
}

impl EngineConfig {
    pub fn new(markets: Vec<Matcher>) -> Self {
        EngineConfig {
            markets,
            overrides: Vec::new(),
            last: None,
            strictification: StrictificationRule::ByAgentIndex,
            swap_order: false,
            trace_blocking: true,
        }
    }

    /// Gale–Shapley on both markets of a three-sided market.
    pub fn three_sided(order: ProposalOrder) -> Self {
        EngineConfig::new(vec![Matcher::Gs(order.advisor_market()), Matcher::Gs(order.coadvisor_market())])
    }

    /// Incremental matchers on both markets of a three-sided market.
    pub fn three_sided_mfp(order: ProposalOrder) -> Self {
        EngineConfig::new(vec![Matcher::Mfp(order.advisor_market()), Matcher::Mfp(order.coadvisor_market())])
    }

    /// Gale–Shapley on all `n - 1` markets, the given side proposing
    /// everywhere. Right-hand sides proposing is always stable; left-hand
    /// sides proposing can fail for the reason given on [`ProposalOrder`].
    pub fn chain(n_sides: usize, proposer: Side) -> Self {
        EngineConfig::new(vec![Matcher::Gs(proposer); n_sides.saturating_sub(1)])
    }

    pub fn with_override(mut self, iteration: usize, markets: Vec<Matcher>) -> Self {
        self.overrides.push((iteration, markets));
        self
    }

    pub fn with_last(mut self, markets: Vec<Matcher>) -> Self {
        self.last = Some(markets);
        self
    }

    pub fn with_strictification(mut self, rule: StrictificationRule) -> Self {
        self.strictification = rule;
        self
    }

    pub fn with_swap_order(mut self, swap: bool) -> Self {
        self.swap_order = swap;
        self
    }

    pub fn with_trace_blocking(mut self, on: bool) -> Self {
        self.trace_blocking = on;
        self
    }

    pub(crate) fn matchers_at(&self, iteration: usize) -> &[Matcher] {
        self.overrides
            .iter()
            .rev()
            .find(|(i, _)| *i == iteration)
            .map(|(_, m)| m.as_slice())
            .unwrap_or(&self.markets)
    }

    fn check(&self, markets: usize) -> Result<(), Error> {
        let lens = core::iter::once(self.markets.len())
            .chain(self.overrides.iter().map(|(_, m)| m.len()))
            .chain(self.last.iter().map(Vec::len));
        for configured in lens {
            if configured != markets {
                return Err(Error::ConfigMismatch { configured, required: markets });
            }
        }
        Ok(())
    }

    /// The configuration for the market with its sides in reverse order.
    pub(crate) fn mirrored(&self) -> EngineConfig {
        let flip = |v: &Vec<Matcher>| v.iter().rev().map(Matcher::mirrored).collect::<Vec<_>>();
        EngineConfig {
            markets: flip(&self.markets),
            overrides: self.overrides.iter().map(|(i, m)| (*i, flip(m))).collect(),
            last: self.last.as_ref().map(flip),
            swap_order: false,
            ..self.clone()
        }
    }
}

/// State of one iteration.
///
/// Per-side vectors are indexed by side; entries for the two end sides of
/// `removed` are always empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Agents still in the market at the start of the iteration.
    pub remaining: Vec<Vec<usize>>,
    /// Agents that took part in their right-hand market, i.e. were matched
    /// on their left-hand market (all of side 0).
    pub matched: Vec<Vec<usize>>,
    /// Participants of a right-hand market left unmatched there; they are
    /// removed (or lose capacity) for the next iteration.
    pub removed: Vec<Vec<usize>>,
    /// Quota runs: student capacity on the advisor market at this iteration.
    pub capacities: Vec<u32>,
    /// Quota runs: student capacity on the co-advisor market at this iteration.
    pub coadvisor_capacities: Vec<u32>,
    /// Matched pairs of every adjacent market, `(left, right)`.
    pub pair_matchings: Vec<Vec<(usize, usize)>>,
    /// Complete tuples of the tentative matching.
    pub complete_matches: usize,
    /// Blocking triples (or tuples) of the tentative matching under the
    /// original preferences, when traced.
    pub blocking: Option<u128>,
}

impl IterationRecord {
    pub fn students_remaining(&self) -> &[usize] {
        &self.remaining[1]
    }

    pub fn students_matched(&self) -> &[usize] {
        &self.matched[1]
    }

    pub fn students_removed(&self) -> &[usize] {
        &self.removed[1]
    }
}

/// Iteration log of one run plus its operation counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub counters: Counters,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Complete-match counts, one per iteration.
    pub fn complete_matches(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.complete_matches).collect()
    }
}

pub(crate) fn check_market(market: &MultiSidedMarket, sides: Option<usize>) -> Result<(), Error> {
    if let Some(v) = market.violations().into_iter().next() {
        return Err(Error::InvalidMarket(v));
    }
    let n = market.n_sides();
    if n < 2 {
        return Err(Error::TooFewSides(n));
    }
    match sides {
        Some(expected) if expected != n => Err(Error::SideCount { expected, found: n }),
        _ => Ok(()),
    }
}

impl MultiSidedMarket {
    /// The same market with the side order reversed.
    pub fn reversed(&self) -> MultiSidedMarket {
        MultiSidedMarket {
            sizes: self.sizes.iter().rev().copied().collect(),
            links: self
                .links
                .iter()
                .rev()
                .map(|l| crate::market::Link { forward: l.backward.clone(), backward: l.forward.clone() })
                .collect(),
            quotas: self.quotas.iter().rev().cloned().collect(),
            compat: self.compat.as_ref().map(|k| k.iter().map(|&(a, c)| (c, a)).collect()),
            pair_policy: self.pair_policy,
        }
    }
}

/// Reverses every tuple of a matching built on a reversed market.
pub(crate) fn reverse_tuples(m: Matching) -> Matching {
    m.into_tuples()
        .into_iter()
        .map(|mut t| {
            t.reverse();
            t
        })
        .collect()
}

pub(crate) fn reverse_trace(mut trace: IterationTrace) -> IterationTrace {
    for r in &mut trace.records {
        r.remaining.reverse();
        r.matched.reverse();
        r.removed.reverse();
        r.pair_matchings.reverse();
        for pairs in &mut r.pair_matchings {
            for p in pairs.iter_mut() {
                *p = (p.1, p.0);
            }
            pairs.sort_unstable();
        }
    }
    trace
}

/// Renders an error for a custom matcher failure.
pub(crate) fn custom_error(name: &str) -> Error {
    Error::InvalidParams(String::from(name) + " matched an agent outside the submarket")
}
