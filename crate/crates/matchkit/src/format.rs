//! JSON interchange formats for markets and matchings.
//!
//! A market file names every agent and refers to agents by name:
//!
//! ```json
//! {
//!   "sides": [["a1", "a2"], ["s1"], ["c1"]],
//!   "prefs": {
//!     "a1": { "right": [["s1"]] },
//!     "s1": { "left": [["a2", "a1"]], "right": [["c1"]] },
//!     "c1": { "left": [["s1"]] }
//!   },
//!   "quotas": { "s1": 1 },
//!   "compat": [["a2", "c1"]],
//!   "pair_policy": "at-most-once"
//! }
//! ```
//!
//! `left` lists rank the previous side and `right` lists the next one; each
//! list is a sequence of tie groups, best first. Missing lists are empty,
//! missing quotas are one, and a missing `compat` makes every advisor and
//! co-advisor compatible. A matching file is an array of tuples of names, one
//! name per side. Unknown fields are rejected.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use matchkit_core::{AgentId, Link, Matching, MultiSidedMarket, PairPolicy, PreferenceList};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("agent name `{0}` is used twice")]
    DuplicateName(String),
    #[error("agent `{name}` has no {direction} neighbour side")]
    NoSuchDirection { name: String, direction: &'static str },
    #[error("agent `{name}` is not on side {expected}")]
    WrongSide { name: String, expected: usize },
    #[error("tuple has {found} agents, the market has {expected} sides")]
    TupleLength { found: usize, expected: usize },
    #[error("compatibility pairs need a three-sided market")]
    CompatNeedsThreeSides,
    #[error("quota of `{0}` must be positive")]
    ZeroQuota(String),
    #[error("a market needs at least two sides")]
    TooFewSides,
}

/// How often the same two agents may be matched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairPolicyFile {
    #[default]
    AtMostOnce,
    UpTo(u32),
}

impl From<PairPolicy> for PairPolicyFile {
    fn from(p: PairPolicy) -> Self {
        match p {
            PairPolicy::AtMostOnce => PairPolicyFile::AtMostOnce,
            PairPolicy::UpTo(c) => PairPolicyFile::UpTo(c),
        }
    }
}

impl From<PairPolicyFile> for PairPolicy {
    fn from(p: PairPolicyFile) -> Self {
        match p {
            PairPolicyFile::AtMostOnce => PairPolicy::AtMostOnce,
            PairPolicyFile::UpTo(c) => PairPolicy::UpTo(c),
        }
    }
}

type Groups = Vec<Vec<String>>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentPrefs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Groups>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Groups>,
}

/// The on-disk market document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub sides: Vec<Vec<String>>,
    #[serde(default)]
    pub prefs: BTreeMap<String, AgentPrefs>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub quotas: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compat: Option<Vec<(String, String)>>,
    #[serde(default)]
    pub pair_policy: PairPolicyFile,
}

/// The on-disk matching document.
pub type MatchingFile = Vec<Vec<String>>;

/// Agent names of every side, and the reverse lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Names {
    sides: Vec<Vec<String>>,
    index: HashMap<String, AgentId>,
}

impl Names {
    pub fn new(sides: Vec<Vec<String>>) -> Result<Self, FormatError> {
        let mut index = HashMap::new();
        for (k, side) in sides.iter().enumerate() {
            for (i, name) in side.iter().enumerate() {
                if index.insert(name.clone(), AgentId::new(k, i)).is_some() {
                    return Err(FormatError::DuplicateName(name.clone()));
                }
            }
        }
        Ok(Names { sides, index })
    }

    /// `a1.., s1.., c1..` for three sides, `m1.., w1..` for two, and
    /// `p{side}_{i}` otherwise; numbering starts at one.
    pub fn generated(sizes: &[usize]) -> Self {
        let prefix = |k: usize| match (sizes.len(), k) {
            (2, 0) => "m".to_string(),
            (2, _) => "w".to_string(),
            (3, 0) => "a".to_string(),
            (3, 1) => "s".to_string(),
            (3, _) => "c".to_string(),
            (_, k) => format!("p{}_", k + 1),
        };
        let sides = sizes.iter().enumerate().map(|(k, &n)| (1..=n).map(|i| format!("{}{i}", prefix(k))).collect()).collect();
        Names::new(sides).expect("generated names are distinct")
    }

    pub fn sides(&self) -> &[Vec<String>] {
        &self.sides
    }

    pub fn name(&self, id: AgentId) -> &str {
        &self.sides[id.side][id.index]
    }

    pub fn lookup(&self, name: &str) -> Result<AgentId, FormatError> {
        self.index.get(name).copied().ok_or_else(|| FormatError::UnknownAgent(name.to_string()))
    }

    fn on_side(&self, name: &str, side: usize) -> Result<usize, FormatError> {
        let id = self.lookup(name)?;
        if id.side != side {
            return Err(FormatError::WrongSide { name: name.to_string(), expected: side });
        }
        Ok(id.index)
    }
}

/// A market together with its agents' names.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedMarket {
    pub market: MultiSidedMarket,
    pub names: Names,
}

impl NamedMarket {
    pub fn with_generated_names(market: MultiSidedMarket) -> Self {
        let names = Names::generated(&market.sizes);
        NamedMarket { market, names }
    }

    pub fn from_file(file: MarketFile) -> Result<Self, FormatError> {
        if file.sides.len() < 2 {
            return Err(FormatError::TooFewSides);
        }
        let names = Names::new(file.sides)?;
        let sizes: Vec<usize> = names.sides.iter().map(Vec::len).collect();
        let n = sizes.len();
        let mut links: Vec<Link> = sizes
            .windows(2)
            .map(|w| Link { forward: vec![PreferenceList::empty(); w[0]], backward: vec![PreferenceList::empty(); w[1]] })
            .collect();
        for (name, prefs) in &file.prefs {
            let id = names.lookup(name)?;
            if let Some(groups) = &prefs.left {
                if id.side == 0 {
                    return Err(FormatError::NoSuchDirection { name: name.clone(), direction: "left" });
                }
                links[id.side - 1].backward[id.index] = list(&names, groups, id.side - 1)?;
            }
            if let Some(groups) = &prefs.right {
                if id.side + 1 == n {
                    return Err(FormatError::NoSuchDirection { name: name.clone(), direction: "right" });
                }
                links[id.side].forward[id.index] = list(&names, groups, id.side + 1)?;
            }
        }
        let mut quotas: Vec<Vec<u32>> = sizes.iter().map(|&s| vec![1; s]).collect();
        for (name, &q) in &file.quotas {
            if q == 0 {
                return Err(FormatError::ZeroQuota(name.clone()));
            }
            let id = names.lookup(name)?;
            quotas[id.side][id.index] = q;
        }
        let mut market = MultiSidedMarket::new(links).with_quotas(quotas).with_pair_policy(file.pair_policy.into());
        if let Some(pairs) = &file.compat {
            if n != 3 {
                return Err(FormatError::CompatNeedsThreeSides);
            }
            let k: BTreeSet<(usize, usize)> =
                pairs.iter().map(|(a, c)| Ok((names.on_side(a, 0)?, names.on_side(c, 2)?))).collect::<Result<_, FormatError>>()?;
            market = market.with_compat(k);
        }
        Ok(NamedMarket { market, names })
    }

    pub fn to_file(&self) -> MarketFile {
        let m = &self.market;
        let n = m.n_sides();
        let groups = |list: &PreferenceList, side: usize| -> Groups {
            list.groups.iter().map(|g| g.iter().map(|&j| self.names.sides[side][j].clone()).collect()).collect()
        };
        let mut prefs = BTreeMap::new();
        for k in 0..n {
            for i in 0..m.sizes[k] {
                let left = (k > 0).then(|| groups(&m.links[k - 1].backward[i], k - 1));
                let right = (k + 1 < n).then(|| groups(&m.links[k].forward[i], k + 1));
                prefs.insert(self.names.sides[k][i].clone(), AgentPrefs { left, right });
            }
        }
        let mut quotas = BTreeMap::new();
        for (k, qs) in m.quotas.iter().enumerate() {
            for (i, &q) in qs.iter().enumerate() {
                if q != 1 {
                    quotas.insert(self.names.sides[k][i].clone(), q);
                }
            }
        }
        let compat = m.compat.as_ref().map(|k| {
            k.iter().map(|&(a, c)| (self.names.sides[0][a].clone(), self.names.sides[2][c].clone())).collect()
        });
        MarketFile { sides: self.names.sides.clone(), prefs, quotas, compat, pair_policy: m.pair_policy.into() }
    }

    pub fn matching_to_file(&self, matching: &Matching) -> MatchingFile {
        matching.tuples().iter().map(|t| t.iter().enumerate().map(|(k, &i)| self.names.sides[k][i].clone()).collect()).collect()
    }

    pub fn matching_from_file(&self, file: &MatchingFile) -> Result<Matching, FormatError> {
        let n = self.market.n_sides();
        file.iter()
            .map(|t| {
                if t.len() != n {
                    return Err(FormatError::TupleLength { found: t.len(), expected: n });
                }
                t.iter().enumerate().map(|(k, name)| self.names.on_side(name, k)).collect()
            })
            .collect::<Result<Vec<Vec<usize>>, _>>()
            .map(Matching::new)
    }
}

fn list(names: &Names, groups: &Groups, side: usize) -> Result<PreferenceList, FormatError> {
    let groups = groups.iter().map(|g| g.iter().map(|name| names.on_side(name, side)).collect()).collect::<Result<_, _>>()?;
    Ok(PreferenceList::new(groups))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline, to `path` or standard output.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io { path: path.map_or("<stdout>".into(), |p| p.display().to_string()), source };
    match path {
        Some(p) => fs::write(p, text).map_err(io_err),
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(io_err),
    }
}

pub fn read_market(path: &Path) -> Result<NamedMarket, FormatError> {
    NamedMarket::from_file(read_json(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "sides": [["a1", "a2"], ["s1"], ["c1"]],
        "prefs": {
            "a2": { "right": [["s1"]] },
            "s1": { "left": [["a1", "a2"]], "right": [["c1"]] },
            "c1": { "left": [["s1"]] }
        },
        "quotas": { "s1": 2 },
        "compat": [["a2", "c1"]],
        "pair_policy": { "up-to": 2 }
    }"#;

    #[test]
    fn sample_parses() {
        let named = NamedMarket::from_file(serde_json::from_str(SAMPLE).unwrap()).unwrap();
        let m = &named.market;
        assert_eq!(m.sizes, vec![2, 1, 1]);
        assert_eq!(m.links[0].backward[0], PreferenceList::new(vec![vec![0, 1]]));
        assert!(m.links[0].forward[0].is_empty());
        assert_eq!(m.quotas[1], vec![2]);
        assert_eq!(m.compat, Some([(1, 0)].into_iter().collect()));
        assert_eq!(m.pair_policy, PairPolicy::UpTo(2));
    }

    #[test]
    fn round_trip() {
        let named = NamedMarket::from_file(serde_json::from_str(SAMPLE).unwrap()).unwrap();
        let again = NamedMarket::from_file(named.to_file()).unwrap();
        assert_eq!(again, named);
        let mu = Matching::from_triples([(1, 0, 0)]);
        let file = named.matching_to_file(&mu);
        assert_eq!(file, vec![vec!["a2".to_string(), "s1".into(), "c1".into()]]);
        assert_eq!(named.matching_from_file(&file).unwrap(), mu);
    }

    #[test]
    fn rejects_bad_documents() {
        let parse = |s: &str| serde_json::from_str::<MarketFile>(s).map_err(FormatError::from).and_then(NamedMarket::from_file);
        assert!(matches!(parse(r#"{"sides": [["a"], ["b"]], "extra": 1}"#), Err(FormatError::Json(_))));
        assert!(matches!(parse(r#"{"sides": [["a"], ["a"]]}"#), Err(FormatError::DuplicateName(_))));
        assert!(matches!(parse(r#"{"sides": [["a"], ["b"]], "prefs": {"a": {"left": []}}}"#), Err(FormatError::NoSuchDirection { .. })));
        assert!(matches!(parse(r#"{"sides": [["a"], ["b"]], "prefs": {"a": {"right": [["a"]]}}}"#), Err(FormatError::WrongSide { .. })));
        assert!(matches!(parse(r#"{"sides": [["a"], ["b"]], "prefs": {"z": {}}}"#), Err(FormatError::UnknownAgent(_))));
        assert!(matches!(parse(r#"{"sides": [["a"], ["b"]], "compat": []}"#), Err(FormatError::CompatNeedsThreeSides)));
        assert!(matches!(parse(r#"{"sides": [["a"]]}"#), Err(FormatError::TooFewSides)));
        let named = parse(r#"{"sides": [["a"], ["b"]]}"#).unwrap();
        assert!(matches!(named.matching_from_file(&vec![vec!["b".into(), "a".into()]]), Err(FormatError::WrongSide { .. })));
        assert!(matches!(named.matching_from_file(&vec![vec!["a".into()]]), Err(FormatError::TupleLength { .. })));
    }

    #[test]
    fn generated_names() {
        let names = Names::generated(&[2, 1, 1]);
        assert_eq!(names.sides(), &[vec!["a1".to_string(), "a2".into()], vec!["s1".into()], vec!["c1".into()]]);
        assert_eq!(Names::generated(&[1, 1, 1, 1]).name(AgentId::new(3, 0)), "p4_1");
    }
}
