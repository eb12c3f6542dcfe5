//! Algorithm selection, verification reports and trace tables.

use std::fmt::Write as _;
use std::str::FromStr;

use matchkit_core::{
    count_blocking_triples, count_blocking_tuples, danilov_baseline_traced, find_blocking_pairs, find_blocking_triples,
    find_blocking_tuples, n_sided_phd, phd_incompat_heuristic, phd_match, phd_match_quotas, validate_matching, zhong_bai,
    BlockingKind, EngineConfig, Error, HeuristicVariant, IterationRecord, IterationTrace, Matcher, Matching,
    MultiSidedMarket, PrefView, ProposalOrder, Side, TripleKind, TupleKind,
};
use serde::Serialize;

use crate::format::NamedMarket;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// The removal loop; picks the quota or n-sided form from the market.
    #[default]
    Phd,
    /// One pass of the removal loop.
    Baseline,
    ZhongBai,
    /// Removal loop with co-advisor lists restricted to compatible pairs.
    PhdRestrict,
    /// Removal loop that drops an incompatible advisor instead of the student.
    PhdDrop,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Phd, Algorithm::Baseline, Algorithm::ZhongBai, Algorithm::PhdRestrict, Algorithm::PhdDrop];

    pub fn code(self) -> &'static str {
        match self {
            Algorithm::Phd => "phd",
            Algorithm::Baseline => "baseline",
            Algorithm::ZhongBai => "zhong-bai",
            Algorithm::PhdRestrict => "phd-restrict",
            Algorithm::PhdDrop => "phd-drop",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = if s == "zhong_bai" { "zhong-bai" } else { s };
        Algorithm::ALL.into_iter().find(|a| a.code() == s).ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    /// Gale–Shapley from scratch at every iteration.
    #[default]
    Gs,
    /// The incremental waiting-list matcher.
    Mfp,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gs" => Ok(Engine::Gs),
            "mfp" => Ok(Engine::Mfp),
            _ => Err(format!("unknown engine `{s}`")),
        }
    }
}

/// Engine choices shared by the CLI and the experiment runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Three sides only; chains always let the right-hand side propose.
    pub order: ProposalOrder,
    pub engine: Engine,
    pub swap_order: bool,
    pub trace_blocking: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions::new(ProposalOrder::default(), Engine::default())
    }
}

impl SolveOptions {
    pub fn new(order: ProposalOrder, engine: Engine) -> Self {
        SolveOptions { order, engine, swap_order: false, trace_blocking: true }
    }

    pub fn config(&self, n_sides: usize) -> EngineConfig {
        let config = match (n_sides, self.engine) {
            (3, Engine::Gs) => EngineConfig::three_sided(self.order),
            (3, Engine::Mfp) => EngineConfig::three_sided_mfp(self.order),
            (n, Engine::Gs) => EngineConfig::chain(n, Side::Right),
            (n, Engine::Mfp) => EngineConfig::new(vec![Matcher::Mfp(Side::Right); n.saturating_sub(1)]),
        };
        config.with_swap_order(self.swap_order).with_trace_blocking(self.trace_blocking)
    }
}

/// A matching and, for the iterative algorithms, its trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub matching: Matching,
    pub trace: IterationTrace,
}

pub fn solve(market: &MultiSidedMarket, algorithm: Algorithm, opts: &SolveOptions) -> Result<Solution, Error> {
    let config = opts.config(market.n_sides());
    let (matching, trace) = match algorithm {
        Algorithm::Phd if market.n_sides() == 3 && !market.unit_quotas() => phd_match_quotas(market, &config)?,
        Algorithm::Phd if market.n_sides() == 3 => phd_match(market, &config)?,
        Algorithm::Phd => n_sided_phd(market, &config)?,
        Algorithm::Baseline => danilov_baseline_traced(market, &config)?,
        Algorithm::ZhongBai => {
            let mu = zhong_bai(market)?;
            let trace = single_record(market, &mu, opts.trace_blocking)?;
            (mu, trace)
        }
        Algorithm::PhdRestrict | Algorithm::PhdDrop => {
            let variant =
                if algorithm == Algorithm::PhdDrop { HeuristicVariant::DropAdvisor } else { HeuristicVariant::RestrictCoadvisors };
            let (mu, trace, _) = phd_incompat_heuristic(market, &config, variant)?;
            (mu, trace)
        }
    };
    Ok(Solution { matching, trace })
}

/// A one-row trace for algorithms without iterations.
fn single_record(market: &MultiSidedMarket, mu: &Matching, with_blocking: bool) -> Result<IterationTrace, Error> {
    let students: Vec<usize> = (0..market.sizes[1]).collect();
    let matched: Vec<usize> = mu.tuples().iter().map(|t| t[1]).collect();
    let record = IterationRecord {
        iteration: 1,
        remaining: vec![vec![], students, vec![]],
        matched: vec![vec![], matched, vec![]],
        removed: vec![vec![]; 3],
        complete_matches: mu.len(),
        blocking: if with_blocking { Some(count_blocking_triples(market, mu)? as u128) } else { None },
        ..IterationRecord::default()
    };
    Ok(IterationTrace { records: vec![record], ..IterationTrace::default() })
}

pub const TRACE_HEADER: &str = "iteration,remaining_students,matched_students,removed_students,complete_matches,blocking_triples";

/// The trace as CSV. Student columns count the middle sides of a chain (the
/// right side of a two-sided market); the blocking column is empty when
/// blocking was not traced.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let middle = |v: &[Vec<usize>]| -> usize {
            match v.len() {
                0 => 0,
                1 | 2 => v[v.len() - 1].len(),
                n => v[1..n - 1].iter().map(Vec::len).sum(),
            }
        };
        let blocking = r.blocking.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration,
            middle(&r.remaining),
            middle(&r.matched),
            middle(&r.removed),
            r.complete_matches,
            blocking
        )
        .expect("writing to a string");
    }
    out
}

/// One blocking pair, triple or tuple, by agent names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub agents: Vec<String>,
    /// `blocking`, `unmatched-spot`, `advisor-side`, `coadvisor-side` or
    /// `individually-irrational`.
    pub kind: String,
    /// The agent matched against its own list, for individual-rationality
    /// violations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub sides: usize,
    pub stable: bool,
    /// Problems that make the file an invalid matching (unknown tuples,
    /// exceeded quotas, incompatible pairs).
    pub invalid: Vec<String>,
    pub blocking_count: u128,
    pub witnesses: Vec<Witness>,
}

/// Witnesses listed in a report; the count covers all of them.
pub const MAX_WITNESSES: usize = 10;

/// Checks `matching` against the market's original preferences.
pub fn verify(named: &NamedMarket, matching: &Matching) -> Result<VerifyReport, Error> {
    let market = &named.market;
    let name = |side: usize, i: usize| named.names.sides()[side][i].clone();
    let invalid: Vec<String> = validate_matching(market, matching).iter().map(ToString::to_string).collect();
    let (count, witnesses): (u128, Vec<Witness>) = match market.n_sides() {
        2 => {
            let pairs = find_blocking_pairs(&market.submarket(0), matching, PrefView::Original);
            let w = pairs
                .iter()
                .take(MAX_WITNESSES)
                .map(|p| {
                    let (kind, agent) = match p.kind {
                        BlockingKind::Blocking => ("blocking", None),
                        BlockingKind::IndividuallyIrrational(a) => ("individually-irrational", Some(name(a.side, a.index))),
                    };
                    Witness { agents: vec![name(0, p.man), name(1, p.woman)], kind: kind.into(), agent }
                })
                .collect();
            (pairs.len() as u128, w)
        }
        3 => {
            let triples = find_blocking_triples(market, matching)?;
            let w = triples
                .iter()
                .take(MAX_WITNESSES)
                .map(|t| {
                    let (kind, agent) = match t.kind {
                        TripleKind::UnmatchedSpot => ("unmatched-spot", None),
                        TripleKind::AdvisorSide => ("advisor-side", None),
                        TripleKind::CoadvisorSide => ("coadvisor-side", None),
                        TripleKind::IndividuallyIrrational(a) => ("individually-irrational", Some(name(a.side, a.index))),
                    };
                    Witness { agents: vec![name(0, t.advisor), name(1, t.student), name(2, t.coadvisor)], kind: kind.into(), agent }
                })
                .collect();
            (triples.len() as u128, w)
        }
        _ => {
            let count = count_blocking_tuples(market, matching)?;
            // listing is exponential in the worst case; only list small sets
            let w = if count <= 1000 {
                find_blocking_tuples(market, matching)?
                    .iter()
                    .take(MAX_WITNESSES)
                    .map(|t| {
                        let (kind, agent) = match t.kind {
                            TupleKind::Blocking => ("blocking", None),
                            TupleKind::IndividuallyIrrational(a) => ("individually-irrational", Some(name(a.side, a.index))),
                        };
                        Witness { agents: t.agents.iter().enumerate().map(|(k, &i)| name(k, i)).collect(), kind: kind.into(), agent }
                    })
                    .collect()
            } else {
                Vec::new()
            };
            (count, w)
        }
    };
    Ok(VerifyReport { sides: market.n_sides(), stable: invalid.is_empty() && count == 0, invalid, blocking_count: count, witnesses })
}

impl VerifyReport {
    /// Human-readable summary.
    pub fn text(&self) -> String {
        let what = match self.sides {
            2 => "pairs",
            3 => "triples",
            _ => "tuples",
        };
        let mut out = String::new();
        for v in &self.invalid {
            writeln!(out, "invalid: {v}").expect("writing to a string");
        }
        writeln!(out, "blocking {what}: {}", self.blocking_count).expect("writing to a string");
        for w in &self.witnesses {
            let agent = w.agent.as_deref().map(|a| format!(" ({a})")).unwrap_or_default();
            writeln!(out, "  ({}) {}{agent}", w.agents.join(", "), w.kind).expect("writing to a string");
        }
        writeln!(out, "{}", if self.stable { "stable" } else { "not stable" }).expect("writing to a string");
        out
    }
}
