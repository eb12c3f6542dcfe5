use alloc::vec::Vec;

use crate::market::AgentId;

/// A matching as a sorted multiset of complete tuples.
///
/// `tuples[i][k]` is the index of the agent on side `k`. Agents not appearing
/// in any tuple are single; there are no sentinel self-match tuples.
/// Repeated tuples only occur under [`crate::PairPolicy::UpTo`].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matching {
    tuples: Vec<Vec<usize>>,
}

impl Matching {
    pub fn new(mut tuples: Vec<Vec<usize>>) -> Self {
        tuples.sort_unstable();
        Matching { tuples }
    }

    pub fn empty() -> Self {
        Matching::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        Matching::new(pairs.into_iter().map(|(l, r)| alloc::vec![l, r]).collect())
    }

    pub fn from_triples<I: IntoIterator<Item = (usize, usize, usize)>>(triples: I) -> Self {
        Matching::new(triples.into_iter().map(|(a, s, c)| alloc::vec![a, s, c]).collect())
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn into_tuples(self) -> Vec<Vec<usize>> {
        self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }

    /// Tuples containing `agent`; empty means the agent is single.
    pub fn match_of(&self, agent: AgentId) -> impl Iterator<Item = &[usize]> + '_ {
        self.tuples
            .iter()
            .filter(move |t| t.get(agent.side) == Some(&agent.index))
            .map(Vec::as_slice)
    }

    /// Number of tuples containing `agent`, self-matches excluded.
    pub fn count_of(&self, agent: AgentId) -> usize {
        self.match_of(agent).count()
    }

    /// Projection onto the two-sided market between sides `k` and `k + 1`.
    pub fn project(&self, k: usize) -> Vec<(usize, usize)> {
        self.tuples.iter().map(|t| (t[k], t[k + 1])).collect()
    }
}

impl FromIterator<Vec<usize>> for Matching {
    fn from_iter<T: IntoIterator<Item = Vec<usize>>>(iter: T) -> Self {
        Matching::new(iter.into_iter().collect())
    }
}
