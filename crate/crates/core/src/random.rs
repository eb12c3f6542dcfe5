//! Uniformly random markets for property tests and benchmarks.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::market::{Link, MultiSidedMarket, TwoSidedMarket};
use crate::prefs::PreferenceList;

/// Shape of random preference lists and quotas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomOptions {
    /// Probability that an agent lists a given agent of the other side.
    pub acceptance: f64,
    /// Probability that a listed agent ties with the one ranked above it.
    pub ties: f64,
    /// Quotas are drawn uniformly from `1..=max_quota`.
    pub max_quota: u32,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions { acceptance: 0.7, ties: 0.0, max_quota: 1 }
    }
}

impl RandomOptions {
    pub fn with_ties(mut self, ties: f64) -> Self {
        self.ties = ties;
        self
    }

    pub fn with_max_quota(mut self, max_quota: u32) -> Self {
        self.max_quota = max_quota;
        self
    }

    pub fn with_acceptance(mut self, acceptance: f64) -> Self {
        self.acceptance = acceptance;
        self
    }
}

/// A random list over `0..others`: a random subset in random order, with
/// consecutive entries merged into tie groups.
pub fn random_list<R: Rng + ?Sized>(rng: &mut R, others: usize, opts: &RandomOptions) -> PreferenceList {
    let mut order: Vec<usize> = (0..others).filter(|_| rng.random_bool(opts.acceptance)).collect();
    order.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for x in order {
        match groups.last_mut() {
            Some(g) if rng.random_bool(opts.ties) => g.push(x),
            _ => groups.push(alloc::vec![x]),
        }
    }
    PreferenceList::new(groups)
}

fn random_lists<R: Rng + ?Sized>(rng: &mut R, owners: usize, others: usize, opts: &RandomOptions) -> Vec<PreferenceList> {
    (0..owners).map(|_| random_list(rng, others, opts)).collect()
}

fn random_quotas<R: Rng + ?Sized>(rng: &mut R, n: usize, opts: &RandomOptions) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(1..=opts.max_quota.max(1))).collect()
}

pub fn random_two_sided<R: Rng + ?Sized>(rng: &mut R, n_left: usize, n_right: usize, opts: &RandomOptions) -> TwoSidedMarket {
    let left = random_lists(rng, n_left, n_right, opts);
    let right = random_lists(rng, n_right, n_left, opts);
    let (lq, rq) = (random_quotas(rng, n_left, opts), random_quotas(rng, n_right, opts));
    TwoSidedMarket::new(left, right).with_quotas(lq, rq)
}

pub fn random_multi_sided<R: Rng + ?Sized>(rng: &mut R, sizes: &[usize], opts: &RandomOptions) -> MultiSidedMarket {
    let links = sizes
        .windows(2)
        .map(|w| Link { forward: random_lists(rng, w[0], w[1], opts), backward: random_lists(rng, w[1], w[0], opts) })
        .collect();
    let quotas = sizes.iter().map(|&n| random_quotas(rng, n, opts)).collect();
    MultiSidedMarket::new(links).with_quotas(quotas)
}

/// Each (advisor, co-advisor) pair kept with probability `density`.
pub fn random_compat<R: Rng + ?Sized>(rng: &mut R, n_advisors: usize, n_coadvisors: usize, density: f64) -> BTreeSet<(usize, usize)> {
    let mut k = BTreeSet::new();
    for a in 0..n_advisors {
        for c in 0..n_coadvisors {
            if rng.random_bool(density) {
                k.insert((a, c));
            }
        }
    }
    k
}
