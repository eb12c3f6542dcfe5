//! The interleaved advisor-proposing algorithm of Zhong and Bai for markets
//! with compatible advisor/co-advisor pairs.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::check_market;
use crate::error::Error;
use crate::market::MultiSidedMarket;
use crate::matching::Matching;
use crate::prefs::RankTable;
use crate::strictify::StrictificationRule;

/// Advisors propose to students; an unmatched student picks its favourite
/// co-advisor among those compatible with the advisor that would take it.
///
/// Unit quotas only. Ties are broken by agent index. With every pair
/// compatible the result equals [`phd_match`](super::phd_match) with
/// advisors proposing to students and students to co-advisors on the
/// incremental engine: like that engine, a student's co-advisor match
/// survives the departure of students nobody took.
pub fn zhong_bai(market: &MultiSidedMarket) -> Result<Matching, Error> {
    zhong_bai_traced(market).map(|(m, _)| m)
}

/// [`zhong_bai`] plus the matching after every round. A round lets each
/// advisor that was unmatched at its start make one proposal.
pub fn zhong_bai_traced(market: &MultiSidedMarket) -> Result<(Matching, Vec<Matching>), Error> {
    check_market(market, Some(3))?;
    if !market.unit_quotas() {
        return Err(Error::QuotasNotSupported);
    }
    let m = market.strictified(StrictificationRule::ByAgentIndex);
    let [n_a, n_s, n_c] = [m.sizes[0], m.sizes[1], m.sizes[2]];
    let advisor_lists: Vec<Vec<usize>> = m.links[0].forward.iter().map(|l| l.iter().collect()).collect();
    let over_advisors = RankTable::new(&m.links[0].backward, n_a);
    let coadvisor_rank = RankTable::new(&m.links[1].backward, n_s);

    let mut student: Vec<Option<(usize, usize)>> = vec![None; n_s];
    let mut advisor: Vec<Option<usize>> = vec![None; n_a];
    let mut coadvisor: Vec<Option<usize>> = vec![None; n_c];
    let mut next = vec![0usize; n_a];
    let mut queue: VecDeque<usize> = (0..n_a).collect();
    let mut rounds = Vec::new();

    let snapshot = |student: &[Option<(usize, usize)>]| -> Matching {
        student.iter().enumerate().filter_map(|(s, t)| t.map(|(a, c)| vec![a, s, c])).collect()
    };

    while !queue.is_empty() {
        let mut later = VecDeque::new();
        while let Some(a) = queue.pop_front() {
            if advisor[a].is_some() {
                continue;
            }
            // an advisor at the end of its list stays unmatched
            let Some(&s) = advisor_lists[a].get(next[a]) else { continue };
            let mut reject = true;
            match student[s] {
                Some((old, c)) => {
                    if over_advisors.prefers(s, Some(a), Some(old)) && m.compatible(a, c) {
                        student[s] = Some((a, c));
                        advisor[a] = Some(s);
                        advisor[old] = None;
                        next[old] += 1;
                        later.push_back(old);
                        reject = false;
                    }
                }
                None if over_advisors.accepts(s, a) => {
                    // the student's list is in its order of preference
                    let best = m.links[1].forward[s].iter().find(|&c| {
                        m.compatible(a, c) && coadvisor_rank.prefers(c, Some(s), coadvisor[c])
                    });
                    if let Some(c) = best {
                        if let Some(other) = coadvisor[c] {
                            let (freed, _) = student[other].take().expect("co-advisor's student holds it");
                            advisor[freed] = None;
                            later.push_back(freed);
                        }
                        student[s] = Some((a, c));
                        advisor[a] = Some(s);
                        coadvisor[c] = Some(s);
                        reject = false;
                    }
                }
                None => {}
            }
            if reject {
                next[a] += 1;
                later.push_back(a);
            }
        }
        rounds.push(snapshot(&student));
        queue = later;
    }
    Ok((snapshot(&student), rounds))
}
