//! Blocking triples of three-sided matchings and blocking tuples of chains.
//!
//! Both verifiers compare with the market's original lists: ties count as
//! indifference and only strict improvements block.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::check_market;
use crate::error::Error;
use crate::market::{AgentId, MultiSidedMarket};
use crate::matching::Matching;
use crate::prefs::RankTable;
use crate::stability::{wants, Partners};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TripleKind {
    /// The student has a free spot and advisor and co-advisor both want it.
    UnmatchedSpot,
    /// The student trades an advisor for a better one who wants the student.
    AdvisorSide,
    /// The student trades a co-advisor for a better one who wants the student.
    CoadvisorSide,
    /// A matched tuple includes this agent against its own list.
    IndividuallyIrrational(AgentId),
}

/// An (advisor, student, co-advisor) triple that blocks a matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockingTriple {
    pub advisor: usize,
    pub student: usize,
    pub coadvisor: usize,
    pub kind: TripleKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TupleKind {
    /// Every adjacent pair is matched or blocks, and at least one blocks.
    Blocking,
    IndividuallyIrrational(AgentId),
}

/// A tuple of an n-sided chain that blocks a matching.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockingTuple {
    pub agents: Vec<usize>,
    pub kind: TupleKind,
}

/// Rank tables and partner lists of every adjacent market.
struct Layers {
    forward: Vec<RankTable>,
    backward: Vec<RankTable>,
    partners: Vec<Partners>,
}

impl Layers {
    fn new(market: &MultiSidedMarket, matching: &Matching) -> Result<Self, Error> {
        let n = market.n_sides();
        for t in matching.tuples() {
            if t.len() != n || t.iter().zip(&market.sizes).any(|(&i, &s)| i >= s) {
                return Err(Error::InvalidMarket(crate::market::Violation {
                    agent: None,
                    rule: crate::market::Rule::MalformedTuple(t.clone()),
                }));
            }
        }
        let mut layers = Layers { forward: Vec::new(), backward: Vec::new(), partners: Vec::new() };
        for (k, link) in market.links.iter().enumerate() {
            layers.forward.push(RankTable::new(&link.forward, market.sizes[k + 1]));
            layers.backward.push(RankTable::new(&link.backward, market.sizes[k]));
            layers.partners.push(Partners::new(market.sizes[k], market.sizes[k + 1], matching.project(k)));
        }
        Ok(layers)
    }

    fn pair_count(&self, k: usize, l: usize, r: usize) -> u32 {
        self.partners[k].pair_counts.get(&(l, r)).copied().unwrap_or(0)
    }

    /// Whether the pair `(l, r)` of market `k` blocks it.
    fn blocks(&self, market: &MultiSidedMarket, k: usize, l: usize, r: usize) -> bool {
        self.pair_count(k, l, r) < market.pair_policy.cap()
            && wants(&self.forward[k], l, &self.partners[k].left[l], market.quotas[k][l], r)
            && wants(&self.backward[k], r, &self.partners[k].right[r], market.quotas[k + 1][r], l)
    }

    /// Individual-rationality failures, one entry per tuple and agent.
    fn irrational(&self, matching: &Matching) -> Vec<(Vec<usize>, AgentId)> {
        let mut out = Vec::new();
        for t in matching.tuples() {
            let mut bad = BTreeSet::new();
            for k in 0..self.forward.len() {
                if !self.forward[k].accepts(t[k], t[k + 1]) {
                    bad.insert(AgentId::new(k, t[k]));
                }
                if !self.backward[k].accepts(t[k + 1], t[k]) {
                    bad.insert(AgentId::new(k + 1, t[k + 1]));
                }
            }
            out.extend(bad.into_iter().map(|a| (t.clone(), a)));
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// All blocking triples of a three-sided matching, quotas and compatible
/// pairs included; empty iff the matching is stable.
///
/// A student's spots are its matched tuples plus one unmatched spot per free
/// unit of quota. Only triples with a compatible advisor/co-advisor pair that
/// are mutually acceptable on both markets are considered.
pub fn find_blocking_triples(market: &MultiSidedMarket, matching: &Matching) -> Result<Vec<BlockingTriple>, Error> {
    check_market(market, Some(3))?;
    let layers = Layers::new(market, matching)?;
    let (adv, stu_adv, stu_co, co) = (&layers.forward[0], &layers.backward[0], &layers.forward[1], &layers.backward[1]);
    let mut out: Vec<BlockingTriple> = layers
        .irrational(matching)
        .into_iter()
        .map(|(t, agent)| BlockingTriple {
            advisor: t[0],
            student: t[1],
            coadvisor: t[2],
            kind: TripleKind::IndividuallyIrrational(agent),
        })
        .collect();

    for s in 0..market.sizes[1] {
        let mut spots: Vec<(usize, usize)> = matching.match_of(AgentId::new(1, s)).map(|t| (t[0], t[2])).collect();
        spots.sort_by_key(|&(a, c)| (stu_adv.key(s, a), stu_co.key(s, c), a, c));
        let free = (market.quotas[1][s] as usize).saturating_sub(spots.len()) > 0;

        let advisors: Vec<(usize, bool)> = market.links[0].backward[s]
            .iter()
            .filter(|&a| adv.accepts(a, s))
            .map(|a| (a, layers.blocks(market, 0, a, s)))
            .collect();
        let coadvisors: Vec<(usize, bool)> = market.links[1].forward[s]
            .iter()
            .filter(|&c| co.accepts(c, s))
            .map(|c| (c, layers.blocks(market, 1, s, c)))
            .collect();

        for &(a, a_wants) in &advisors {
            for &(c, c_wants) in &coadvisors {
                if !market.compatible(a, c) {
                    continue;
                }
                let kind = if free && a_wants && c_wants {
                    Some(TripleKind::UnmatchedSpot)
                } else {
                    spots.iter().find_map(|&(ma, mc)| {
                        if a_wants && stu_adv.prefers(s, Some(a), Some(ma)) {
                            Some(TripleKind::AdvisorSide)
                        } else if c_wants && stu_co.prefers(s, Some(c), Some(mc)) {
                            Some(TripleKind::CoadvisorSide)
                        } else {
                            None
                        }
                    })
                };
                if let Some(kind) = kind {
                    out.push(BlockingTriple { advisor: a, student: s, coadvisor: c, kind });
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Number of entries [`find_blocking_triples`] returns.
pub fn count_blocking_triples(market: &MultiSidedMarket, matching: &Matching) -> Result<usize, Error> {
    find_blocking_triples(market, matching).map(|v| v.len())
}

/// Adjacency of the matched-or-blocking graph of market `k`: for each left
/// agent, its right neighbours and whether the edge blocks.
fn edges(market: &MultiSidedMarket, layers: &Layers, k: usize) -> Vec<Vec<(usize, bool)>> {
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); market.sizes[k]];
    for (l, list) in market.links[k].forward.iter().enumerate() {
        for r in list.iter() {
            let blocks = layers.backward[k].accepts(r, l) && layers.blocks(market, k, l, r);
            if blocks || layers.pair_count(k, l, r) > 0 {
                adj[l].push((r, blocks));
            }
        }
    }
    // matched pairs outside the owner's list (irrational) still link the chain
    for &(l, r) in layers.partners[k].pair_counts.keys() {
        if !adj[l].iter().any(|&(x, _)| x == r) {
            adj[l].push((r, false));
        }
    }
    adj
}

/// All blocking tuples of an n-sided matching: chains whose adjacent pairs
/// are matched or blocking, with at least one blocking pair, that are not
/// already matched. Individually irrational matches are reported too.
pub fn find_blocking_tuples(market: &MultiSidedMarket, matching: &Matching) -> Result<Vec<BlockingTuple>, Error> {
    check_market(market, None)?;
    let layers = Layers::new(market, matching)?;
    let graph: Vec<_> = (0..market.n_sides() - 1).map(|k| edges(market, &layers, k)).collect();
    let mut out: Vec<BlockingTuple> = layers
        .irrational(matching)
        .into_iter()
        .map(|(agents, a)| BlockingTuple { agents, kind: TupleKind::IndividuallyIrrational(a) })
        .collect();
    let mut path = Vec::with_capacity(market.n_sides());
    for start in 0..market.sizes[0] {
        path.push(start);
        walk(&graph, &mut path, false, matching, &mut out);
        path.pop();
    }
    out.sort_unstable();
    Ok(out)
}

fn walk(
    graph: &[Vec<Vec<(usize, bool)>>],
    path: &mut Vec<usize>,
    blocked: bool,
    matching: &Matching,
    out: &mut Vec<BlockingTuple>,
) {
    let k = path.len() - 1;
    if k == graph.len() {
        if blocked && !matching.contains(path) {
            out.push(BlockingTuple { agents: path.clone(), kind: TupleKind::Blocking });
        }
        return;
    }
    let here = *path.last().expect("non-empty");
    for &(next, b) in &graph[k][here] {
        path.push(next);
        walk(graph, path, blocked || b, matching, out);
        path.pop();
    }
}

/// Number of entries [`find_blocking_tuples`] returns, counted by dynamic
/// programming over the chain without listing them.
pub fn count_blocking_tuples(market: &MultiSidedMarket, matching: &Matching) -> Result<u128, Error> {
    check_market(market, None)?;
    let layers = Layers::new(market, matching)?;
    let n = market.n_sides();
    let graph: Vec<_> = (0..n - 1).map(|k| edges(market, &layers, k)).collect();
    // (paths to the end, paths to the end using a blocking edge)
    let mut below: Vec<(u128, u128)> = vec![(1, 0); market.sizes[n - 1]];
    for k in (0..n - 1).rev() {
        below = graph[k]
            .iter()
            .map(|adj| {
                adj.iter().fold((0u128, 0u128), |(all, blk), &(r, b)| {
                    let (a, w) = below[r];
                    (all + a, blk + if b { a } else { w })
                })
            })
            .collect();
    }
    let mut count: u128 = below.iter().map(|&(_, b)| b).sum();
    // matched tuples are never blocking, but the paths above include any that
    // run over an edge that is both matched and blocking (pair caps above one)
    let mut seen = BTreeSet::new();
    for t in matching.tuples() {
        if seen.insert(t.clone()) && (0..n - 1).any(|k| graph[k][t[k]].iter().any(|&(r, b)| r == t[k + 1] && b)) {
            count -= 1;
        }
    }
    Ok(count + layers.irrational(matching).len() as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefs::PreferenceList;

    fn strict(v: &[usize]) -> PreferenceList {
        PreferenceList::strict(v.iter().copied())
    }

    fn one_each() -> MultiSidedMarket {
        MultiSidedMarket::three_sided(vec![strict(&[0])], vec![strict(&[0])], vec![strict(&[0])], vec![strict(&[0])])
    }

    #[test]
    fn empty_matching_blocked_by_the_only_triple() {
        let b = find_blocking_triples(&one_each(), &Matching::empty()).unwrap();
        assert_eq!(b, vec![BlockingTriple { advisor: 0, student: 0, coadvisor: 0, kind: TripleKind::UnmatchedSpot }]);
        assert_eq!(count_blocking_tuples(&one_each(), &Matching::empty()).unwrap(), 1);
        assert!(find_blocking_triples(&one_each(), &Matching::from_triples([(0, 0, 0)])).unwrap().is_empty());
    }

    #[test]
    fn incompatible_triple_does_not_block() {
        let m = one_each().with_compat(BTreeSet::new());
        assert!(find_blocking_triples(&m, &Matching::empty()).unwrap().is_empty());
    }

    #[test]
    fn advisor_side_swap() {
        // student 0 holds advisor 1 but prefers advisor 0, who is free
        let m = MultiSidedMarket::three_sided(
            vec![strict(&[0]), strict(&[0])],
            vec![strict(&[0, 1])],
            vec![strict(&[0])],
            vec![strict(&[0])],
        );
        let b = find_blocking_triples(&m, &Matching::from_triples([(1, 0, 0)])).unwrap();
        assert_eq!(b, vec![BlockingTriple { advisor: 0, student: 0, coadvisor: 0, kind: TripleKind::AdvisorSide }]);
        assert_eq!(count_blocking_tuples(&m, &Matching::from_triples([(1, 0, 0)])).unwrap(), 1);
    }

    #[test]
    fn irrational_tuple_reported() {
        let m = MultiSidedMarket::three_sided(vec![strict(&[])], vec![strict(&[0])], vec![strict(&[0])], vec![strict(&[0])]);
        let b = find_blocking_triples(&m, &Matching::from_triples([(0, 0, 0)])).unwrap();
        assert_eq!(b[0].kind, TripleKind::IndividuallyIrrational(AgentId::new(0, 0)));
        let t = find_blocking_tuples(&m, &Matching::from_triples([(0, 0, 0)])).unwrap();
        assert_eq!(t, vec![BlockingTuple { agents: vec![0, 0, 0], kind: TupleKind::IndividuallyIrrational(AgentId::new(0, 0)) }]);
    }

    #[test]
    fn tuple_count_matches_listing() {
        let m = MultiSidedMarket::three_sided(
            vec![strict(&[0, 1]), strict(&[1, 0])],
            vec![strict(&[1, 0]), strict(&[0, 1])],
            vec![strict(&[0, 1]), strict(&[1, 0])],
            vec![strict(&[0, 1]), strict(&[0, 1])],
        );
        for mu in [Matching::empty(), Matching::from_triples([(0, 0, 0)]), Matching::from_triples([(0, 1, 1), (1, 0, 0)])] {
            let listed = find_blocking_tuples(&m, &mu).unwrap().len() as u128;
            assert_eq!(count_blocking_tuples(&m, &mu).unwrap(), listed);
        }
    }
}
