//! Tie-breaking refinements of preference pre-orders.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::market::{MultiSidedMarket, TwoSidedMarket};
use crate::prefs::PreferenceList;

/// How ties are broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StrictificationRule {
    /// Lower agent index first within a tie-group.
    #[default]
    ByAgentIndex,
    /// Uniform shuffle of every tie-group, one ChaCha8 stream for all lists
    /// visited in order.
    SeededRandom(u64),
}

struct Breaker {
    rng: Option<ChaCha8Rng>,
}

impl Breaker {
    fn new(rule: StrictificationRule) -> Self {
        match rule {
            StrictificationRule::ByAgentIndex => Breaker { rng: None },
            StrictificationRule::SeededRandom(seed) => Breaker { rng: Some(ChaCha8Rng::seed_from_u64(seed)) },
        }
    }

    fn apply(&mut self, list: &PreferenceList) -> PreferenceList {
        let mut order = Vec::with_capacity(list.len());
        for group in &list.groups {
            let start = order.len();
            order.extend_from_slice(group);
            let tied = &mut order[start..];
            if tied.len() > 1 {
                match &mut self.rng {
                    None => tied.sort_unstable(),
                    Some(rng) => tied.shuffle(rng),
                }
            }
        }
        PreferenceList::strict(order)
    }

    fn all(&mut self, lists: &[PreferenceList]) -> Vec<PreferenceList> {
        lists.iter().map(|l| self.apply(l)).collect()
    }
}

/// Breaks all ties. Strict comparisons of the input survive unchanged.
pub fn strictify(prefs: &[PreferenceList], rule: StrictificationRule) -> Vec<PreferenceList> {
    Breaker::new(rule).all(prefs)
}

impl TwoSidedMarket {
    /// Left lists are processed before right lists.
    pub fn strictified(&self, rule: StrictificationRule) -> TwoSidedMarket {
        let mut b = Breaker::new(rule);
        TwoSidedMarket {
            left_prefs: b.all(&self.left_prefs),
            right_prefs: b.all(&self.right_prefs),
            ..self.clone()
        }
    }
}

impl MultiSidedMarket {
    /// Links are processed in order, forward lists before backward lists.
    pub fn strictified(&self, rule: StrictificationRule) -> MultiSidedMarket {
        let mut b = Breaker::new(rule);
        let mut out = self.clone();
        for link in &mut out.links {
            link.forward = b.all(&link.forward);
            link.backward = b.all(&link.backward);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn strict_list_unchanged() {
        let l = PreferenceList::strict([2, 0, 1]);
        assert_eq!(strictify(&[l.clone()], StrictificationRule::ByAgentIndex), vec![l.clone()]);
        assert_eq!(strictify(&[l.clone()], StrictificationRule::SeededRandom(9)), vec![l]);
    }

    #[test]
    fn by_index_orders_ties() {
        let l = PreferenceList::new(vec![vec![1, 0], vec![2]]);
        assert_eq!(strictify(&[l], StrictificationRule::ByAgentIndex), vec![PreferenceList::strict([0, 1, 2])]);
    }

    #[test]
    fn seeded_is_deterministic() {
        let l = PreferenceList::new(vec![(0..20).collect(), vec![20]]);
        let a = strictify(&[l.clone()], StrictificationRule::SeededRandom(3));
        let b = strictify(&[l], StrictificationRule::SeededRandom(3));
        assert_eq!(a, b);
        assert_eq!(a[0].groups.last(), Some(&vec![20]));
    }
}
