use alloc::string::String;

use crate::incremental::WaitingListViolation;
use crate::market::{AgentId, Violation};

/// Errors returned by the matching engines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("agent {0} is not part of the market")]
    UnknownAgent(AgentId),
    #[error("preferences of {0} contain ties; strictify the market first")]
    TiedPreferences(AgentId),
    #[error("market has {cells} cells, enumeration bound is {bound}")]
    MarketTooLarge { cells: usize, bound: usize },
    #[error("agent {0} is already active")]
    AlreadyActive(AgentId),
    #[error("agent {0} is not active")]
    NotActive(AgentId),
    #[error("waiting lists are not compatible with the matching: {0}")]
    IncompatibleState(WaitingListViolation),
    #[error("market has a compatibility set; use the incompatible-pair heuristics or zhong_bai")]
    CompatibilityNotSupported,
    #[error("market has quotas above one; use phd_match_quotas")]
    QuotasNotSupported,
    #[error("expected a market with {expected} sides, found {found}")]
    SideCount { expected: usize, found: usize },
    #[error("need at least two sides, found {0}")]
    TooFewSides(usize),
    #[error("engine configuration covers {configured} markets, the market has {required}")]
    ConfigMismatch { configured: usize, required: usize },
    #[error("{0}")]
    UnsupportedEngine(&'static str),
    #[error("invalid market: {0}")]
    InvalidMarket(Violation),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}
