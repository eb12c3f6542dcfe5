//! Synthetic advisor/student/co-advisor markets from overlapping research
//! fields.
//!
//! Every person picks a uniform number of fields and samples them without
//! replacement. Person `p` scores person `q` as `|fields(p) ∩ fields(q)| +
//! σ·U` with `U ~ Uniform[0, 1)` drawn independently for each ordered pair,
//! draws a list length uniformly from its range and ranks the top-scoring
//! persons of the other side, ties broken by index.
//!
//! # Random streams
//!
//! All draws come from ChaCha8 seeded with [`SynthParams::seed`]; each
//! purpose uses its own stream so that changing one parameter does not shift
//! unrelated draws. Stream `(purpose << 40) | (slot << 32) | index` serves
//! person `index` where `purpose` is 0 for fields, 1 for list lengths and 2
//! for jitter, and `slot` is the role (fields) or the ranking direction.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::market::MultiSidedMarket;
use crate::prefs::PreferenceList;

/// Generator parameters; [`SynthParams::table3`] gives the reference values.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SynthParams {
    pub nb_advisors: usize,
    pub nb_students: usize,
    pub nb_coadvisors: usize,
    pub total_nb_fields: usize,
    pub min_choosable_fields: usize,
    pub max_choosable_fields: usize,
    pub random_jitter: f64,
    pub advisor_min_nb_prefs: usize,
    pub advisor_max_nb_prefs: usize,
    pub student_min_nb_prefs_adv: usize,
    pub student_max_nb_prefs_adv: usize,
    pub student_min_nb_prefs_coadv: usize,
    pub student_max_nb_prefs_coadv: usize,
    pub coadvisor_min_nb_prefs: usize,
    pub coadvisor_max_nb_prefs: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams::table3()
    }
}

impl SynthParams {
    /// 350 advisors, 620 students and 500 co-advisors over 30 fields.
    pub fn table3() -> Self {
        SynthParams {
            nb_advisors: 350,
            nb_students: 620,
            nb_coadvisors: 500,
            total_nb_fields: 30,
            min_choosable_fields: 5,
            max_choosable_fields: 10,
            random_jitter: 3.4,
            advisor_min_nb_prefs: 10,
            advisor_max_nb_prefs: 30,
            student_min_nb_prefs_adv: 5,
            student_max_nb_prefs_adv: 10,
            student_min_nb_prefs_coadv: 5,
            student_max_nb_prefs_coadv: 10,
            coadvisor_min_nb_prefs: 5,
            coadvisor_max_nb_prefs: 30,
            seed: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Multiplies the three population sizes by `factor` (at least one
    /// agent each); field and list-length parameters are kept, list lengths
    /// capped by the scaled sizes.
    pub fn scaled(mut self, factor: f64) -> Self {
        let scale = |n: usize| ((n as f64 * factor + 0.5) as usize).max(1);
        self.nb_advisors = scale(self.nb_advisors);
        self.nb_students = scale(self.nb_students);
        self.nb_coadvisors = scale(self.nb_coadvisors);
        let cap = |v: &mut usize, n: usize| *v = (*v).min(n);
        cap(&mut self.advisor_max_nb_prefs, self.nb_students);
        cap(&mut self.advisor_min_nb_prefs, self.nb_students);
        cap(&mut self.student_max_nb_prefs_adv, self.nb_advisors);
        cap(&mut self.student_min_nb_prefs_adv, self.nb_advisors);
        cap(&mut self.student_max_nb_prefs_coadv, self.nb_coadvisors);
        cap(&mut self.student_min_nb_prefs_coadv, self.nb_coadvisors);
        cap(&mut self.coadvisor_max_nb_prefs, self.nb_students);
        cap(&mut self.coadvisor_min_nb_prefs, self.nb_students);
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: &str| Err(Error::InvalidParams(msg.into()));
        for (name, n) in [
            ("nb_advisors", self.nb_advisors),
            ("nb_students", self.nb_students),
            ("nb_coadvisors", self.nb_coadvisors),
            ("total_nb_fields", self.total_nb_fields),
            ("min_choosable_fields", self.min_choosable_fields),
        ] {
            if n == 0 {
                return Err(Error::InvalidParams(alloc::format!("{name} must be positive")));
            }
        }
        if !(self.random_jitter >= 0.0 && self.random_jitter.is_finite()) {
            return fail("random_jitter must be a non-negative number");
        }
        if self.min_choosable_fields > self.max_choosable_fields {
            return fail("min_choosable_fields exceeds max_choosable_fields");
        }
        if self.max_choosable_fields > self.total_nb_fields {
            return fail("max_choosable_fields exceeds total_nb_fields");
        }
        for dir in Direction::ALL {
            let (lo, hi) = self.lengths(dir);
            if lo > hi {
                return Err(Error::InvalidParams(alloc::format!("{} minimum exceeds maximum", dir.name())));
            }
            if hi > self.size(dir.ranked()) {
                return Err(Error::InvalidParams(alloc::format!("{} maximum exceeds the ranked side", dir.name())));
            }
        }
        Ok(())
    }

    fn size(&self, role: usize) -> usize {
        [self.nb_advisors, self.nb_students, self.nb_coadvisors][role]
    }

    fn lengths(&self, dir: Direction) -> (usize, usize) {
        match dir {
            Direction::AdvisorsOverStudents => (self.advisor_min_nb_prefs, self.advisor_max_nb_prefs),
            Direction::StudentsOverAdvisors => (self.student_min_nb_prefs_adv, self.student_max_nb_prefs_adv),
            Direction::StudentsOverCoadvisors => (self.student_min_nb_prefs_coadv, self.student_max_nb_prefs_coadv),
            Direction::CoadvisorsOverStudents => (self.coadvisor_min_nb_prefs, self.coadvisor_max_nb_prefs),
        }
    }
}

/// The four ranking directions, in stream-slot order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AdvisorsOverStudents,
    StudentsOverAdvisors,
    StudentsOverCoadvisors,
    CoadvisorsOverStudents,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::AdvisorsOverStudents,
        Direction::StudentsOverAdvisors,
        Direction::StudentsOverCoadvisors,
        Direction::CoadvisorsOverStudents,
    ];

    /// Roles: 0 advisors, 1 students, 2 co-advisors.
    pub fn ranker(self) -> usize {
        [0, 1, 1, 2][self as usize]
    }

    pub fn ranked(self) -> usize {
        [1, 0, 2, 1][self as usize]
    }

    fn name(self) -> &'static str {
        ["advisor list length", "student list length (advisors)", "student list length (co-advisors)", "co-advisor list length"]
            [self as usize]
    }
}

/// Research fields of one person, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FieldProfile {
    pub fields: Vec<usize>,
}

impl FieldProfile {
    /// Multi-hot encoding over `total` fields.
    pub fn multi_hot(&self, total: usize) -> Vec<u8> {
        let mut v = alloc::vec![0; total];
        for &f in &self.fields {
            v[f] = 1;
        }
        v
    }

    /// Number of shared fields; the dot product of the encodings.
    pub fn overlap(&self, other: &FieldProfile) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.fields.len() && j < other.fields.len() {
            match self.fields[i].cmp(&other.fields[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

const FIELDS: u64 = 0;
const LENGTHS: u64 = 1;
const JITTER: u64 = 2;

fn stream(seed: u64, purpose: u64, slot: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 40) | (slot << 32) | index as u64);
    rng
}

/// Field profiles of advisors, students and co-advisors.
pub fn field_profiles(params: &SynthParams) -> Result<[Vec<FieldProfile>; 3], Error> {
    params.validate()?;
    let role = |r: usize| {
        (0..params.size(r))
            .map(|i| {
                let mut rng = stream(params.seed, FIELDS, r as u64, i);
                let k = rng.random_range(params.min_choosable_fields..=params.max_choosable_fields);
                let mut fields = sample(&mut rng, params.total_nb_fields, k).into_vec();
                fields.sort_unstable();
                FieldProfile { fields }
            })
            .collect()
    };
    Ok([role(0), role(1), role(2)])
}

/// Scores person `ranker` gives every person of the ranked side.
pub fn scores(params: &SynthParams, profiles: &[Vec<FieldProfile>; 3], dir: Direction, ranker: usize) -> Vec<f64> {
    let me = &profiles[dir.ranker()][ranker];
    let mut rng = stream(params.seed, JITTER, dir as u64, ranker);
    profiles[dir.ranked()]
        .iter()
        .map(|other| me.overlap(other) as f64 + params.random_jitter * rng.random::<f64>())
        .collect()
}

/// The strict, truncated preference lists of one ranking direction.
fn rankings(params: &SynthParams, profiles: &[Vec<FieldProfile>; 3], dir: Direction) -> Vec<PreferenceList> {
    let (lo, hi) = params.lengths(dir);
    (0..params.size(dir.ranker()))
        .map(|i| {
            let len = stream(params.seed, LENGTHS, dir as u64, i).random_range(lo..=hi);
            let r = scores(params, profiles, dir, i);
            let mut order: Vec<usize> = (0..r.len()).collect();
            order.sort_by(|&x, &y| r[y].total_cmp(&r[x]).then(x.cmp(&y)));
            order.truncate(len);
            PreferenceList::strict(order)
        })
        .collect()
}

/// A unit-quota three-sided market with every pair compatible.
pub fn generate_market(params: &SynthParams) -> Result<MultiSidedMarket, Error> {
    generate_with_profiles(params).map(|(m, _)| m)
}

/// [`generate_market`] plus the field profiles it was built from.
pub fn generate_with_profiles(params: &SynthParams) -> Result<(MultiSidedMarket, [Vec<FieldProfile>; 3]), Error> {
    let profiles = field_profiles(params)?;
    let [a_s, s_a, s_c, c_s] = Direction::ALL.map(|d| rankings(params, &profiles, d));
    Ok((MultiSidedMarket::three_sided(a_s, s_a, s_c, c_s), profiles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::validate_market;

    fn small() -> SynthParams {
        SynthParams {
            nb_advisors: 12,
            nb_students: 20,
            nb_coadvisors: 15,
            advisor_max_nb_prefs: 12,
            coadvisor_max_nb_prefs: 12,
            ..SynthParams::table3()
        }
    }

    #[test]
    fn deterministic_and_valid() {
        let a = generate_market(&small()).unwrap();
        assert_eq!(a, generate_market(&small()).unwrap());
        assert!(validate_market(&a).is_empty());
        assert_ne!(a, generate_market(&small().with_seed(2)).unwrap());
    }

    #[test]
    fn list_lengths_within_bounds() {
        let p = small();
        let m = generate_market(&p).unwrap();
        let lists = [&m.links[0].forward, &m.links[0].backward, &m.links[1].forward, &m.links[1].backward];
        for (dir, lists) in Direction::ALL.into_iter().zip(lists) {
            let (lo, hi) = p.lengths(dir);
            assert!(lists.iter().all(|l| l.is_strict() && (lo..=hi).contains(&l.len())));
        }
    }

    #[test]
    fn profiles_sample_without_replacement() {
        let p = small();
        let [a, s, c] = field_profiles(&p).unwrap();
        for f in a.iter().chain(&s).chain(&c) {
            assert!((p.min_choosable_fields..=p.max_choosable_fields).contains(&f.fields.len()));
            assert!(f.fields.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(f.multi_hot(p.total_nb_fields).iter().map(|&x| x as usize).sum::<usize>(), f.fields.len());
        }
    }

    #[test]
    fn zero_jitter_ranks_by_overlap_then_index() {
        let p = SynthParams { random_jitter: 0.0, ..small() };
        let (m, prof) = generate_with_profiles(&p).unwrap();
        for (i, list) in m.links[0].forward.iter().enumerate() {
            let order: Vec<usize> = list.iter().collect();
            let key = |s: usize| (core::cmp::Reverse(prof[0][i].overlap(&prof[1][s])), s);
            assert!(order.windows(2).all(|w| key(w[0]) < key(w[1])));
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(SynthParams { nb_students: 0, ..small() }.validate().is_err());
        assert!(SynthParams { min_choosable_fields: 11, ..small() }.validate().is_err());
        assert!(SynthParams { max_choosable_fields: 31, ..small() }.validate().is_err());
        assert!(SynthParams { advisor_max_nb_prefs: 21, ..small() }.validate().is_err());
        assert!(SynthParams { random_jitter: -1.0, ..small() }.validate().is_err());
        assert!(SynthParams::table3().validate().is_ok());
    }
}
