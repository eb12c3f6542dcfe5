//! Stable matching engines for multi-sided markets.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - two-sided markets with quotas and pair caps: strictification, the
//!   extended Gale–Shapley algorithm, blocking-pair verification and a
//!   brute-force enumerator of all stable matchings for small instances;
//! - the waiting-list based incremental matcher ([`incremental`]) which
//!   re-matches a market after agents join or leave;
//! - the PhD algorithm for advisor/student/co-advisor markets, its quota and
//!   n-sided generalisations, the one-iteration baseline, two heuristics for
//!   incompatible advisor pairs and the interleaved algorithm of Zhong and Bai
//!   ([`phd`]);
//! - a seeded generator of synthetic PhD markets ([`synth`]).
//!
//! Agents are dense indices per side. File formats, the command line and the
//! experiment harness live in the `matchkit` crate.

#![no_std]

extern crate alloc;

pub mod enumerate;
pub mod error;
pub mod gale_shapley;
pub mod incremental;
pub mod market;
pub mod matching;
pub mod phd;
pub mod prefs;
pub mod random;
pub mod stability;
pub mod strictify;
pub mod synth;

pub use enumerate::{enumerate_all_stable, enumerate_all_stable_with_bound, match_count_profile, DEFAULT_ENUMERATION_BOUND};
pub use error::Error;
pub use gale_shapley::{gs_match, gs_match_with, Counters, QueueDiscipline};
pub use incremental::{add_agent, mfp_run, remove_agent, validate_waiting_lists, Slot, WaitingListState, WaitingListViolation};
pub use market::{
    count_matches, validate_market, validate_matching, AgentId, Link, MarketShape, MultiSidedMarket, PairPolicy,
    RestrictedView, Rule, Side, TwoSidedMarket, Violation,
};
pub use matching::Matching;
pub use phd::{
    assemble_triples, count_blocking_triples, count_blocking_tuples, danilov_baseline, danilov_baseline_traced, find_blocking_triples,
    find_blocking_tuples, n_sided_phd, phd_incompat_heuristic, phd_match, phd_match_quotas, zhong_bai, zhong_bai_traced,
    BlockingTriple, BlockingTuple, EngineConfig, HeuristicVariant, IterationRecord, IterationTrace, Matcher,
    ProposalOrder, StableMatcher, TripleKind, TupleKind,
};
pub use prefs::{PreferenceList, RankTable};
pub use stability::{find_blocking_pairs, matched_set, BlockingKind, BlockingPair, PrefView};
pub use random::{random_compat, random_list, random_multi_sided, random_two_sided, RandomOptions};
pub use strictify::{strictify, StrictificationRule};
pub use synth::{field_profiles, generate_market, generate_with_profiles, FieldProfile, SynthParams};
