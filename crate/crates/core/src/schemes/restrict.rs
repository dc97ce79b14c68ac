//! Greedy selection of the principal's best options up to a probability
//! mass budget, comparing the collected set with the first overflowing group.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{OptionRef, PrincipalPrior};
use crate::rational::{serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictResult {
    /// Selected options, round-major.
    pub q: Vec<OptionRef>,
    pub single_round: bool,
    #[serde(with = "serde_str")]
    pub mass: Rational,
    /// `Σ p·b` over `q`.
    #[serde(with = "serde_str")]
    pub value: Rational,
    /// Whether the overflow group replaced the collected set.
    pub overflow_chosen: bool,
}

impl RestrictResult {
    pub fn contains(&self, r: OptionRef) -> bool {
        self.q.binary_search(&r).is_ok()
    }

    /// Rounds touched by `q`, ascending.
    pub fn rounds(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.q.iter().map(|r| r.round).collect();
        set.into_iter().collect()
    }
}

fn mass_of<P: PrincipalPrior + ?Sized>(prior: &P, set: &[OptionRef]) -> Rational {
    set.iter().map(|&r| prior.prob(r)).sum()
}

fn value_of<P: PrincipalPrior + ?Sized>(prior: &P, set: &[OptionRef]) -> Rational {
    set.iter().map(|&r| prior.prob(r) * prior.principal_utility(r)).sum()
}

/// Requires `0 < m <= 1`. Only `p` and `b` are read.
pub fn restrict_options<P: PrincipalPrior + ?Sized>(prior: &P, m: &Rational) -> Result<RestrictResult> {
    if !m.is_positive() || *m > Rational::one() {
        return Err(Error::bad_param("m", "must lie in (0, 1]"));
    }
    let n = prior.num_rounds();
    // Remaining options per round.
    let mut remaining: Vec<Vec<usize>> = (0..n).map(|i| (0..prior.support(i)).collect()).collect();
    let mut q: Vec<OptionRef> = Vec::new();
    let mut overflow: Vec<OptionRef> = Vec::new();
    let mut p = Rational::zero();
    while p < *m {
        let Some(gmax) = remaining
            .iter()
            .enumerate()
            .flat_map(|(i, js)| js.iter().map(move |&j| OptionRef::new(i, j)))
            .map(|r| prior.principal_utility(r))
            .max()
            .cloned()
        else {
            break;
        };
        let mut u_star: Vec<OptionRef> = Vec::new();
        let mut p_star = Rational::zero();
        for (k, js) in remaining.iter().enumerate() {
            let u_k: Vec<OptionRef> = js
                .iter()
                .map(|&j| OptionRef::new(k, j))
                .filter(|&r| *prior.principal_utility(r) == gmax)
                .collect();
            let p_k = mass_of(prior, &u_k);
            if &p_star + &p_k < *m {
                u_star.extend(u_k);
                p_star += p_k;
            } else {
                if p_k > p_star {
                    u_star = u_k;
                }
                break;
            }
        }
        let p_star = mass_of(prior, &u_star);
        if &p + &p_star > *m {
            overflow = u_star.clone();
        } else {
            q.extend(u_star.iter().copied());
        }
        for r in &u_star {
            remaining[r.round].retain(|&j| j != r.option);
        }
        p += p_star;
    }
    let value_q = value_of(prior, &q);
    let value_b = value_of(prior, &overflow);
    let overflow_chosen = value_q < value_b;
    let (mut q, value) = if overflow_chosen {
        (overflow, value_b)
    } else {
        (q, value_q)
    };
    q.sort();
    let single_round = !q.is_empty() && q.iter().all(|r| r.round == q[0].round);
    Ok(RestrictResult {
        mass: mass_of(prior, &q),
        q,
        single_round,
        value,
        overflow_chosen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_table1, Instance};
    use crate::rational::{frac, int};

    fn refs(pairs: &[(usize, usize)]) -> Vec<OptionRef> {
        pairs.iter().map(|&(i, j)| OptionRef::new(i, j)).collect()
    }

    #[test]
    fn table1_half() {
        let r = restrict_options(&gen_table1(), &frac(1, 2)).unwrap();
        assert_eq!(r.q, refs(&[(1, 0), (1, 1)]));
        assert!(r.single_round && r.overflow_chosen);
        assert_eq!(r.value, int(4));
        assert_eq!(r.mass, int(1));
    }

    #[test]
    fn table1_sixteenth() {
        let r = restrict_options(&gen_table1(), &frac(1, 16)).unwrap();
        assert_eq!(r.q, refs(&[(0, 1)]));
        assert!(r.overflow_chosen);
        assert_eq!(r.value, int(2));
    }

    #[test]
    fn single_option_full_mass() {
        let inst = Instance::from_triples(vec![vec![(int(1), int(1), int(3))]]).unwrap();
        let r = restrict_options(&inst, &int(1)).unwrap();
        assert_eq!(r.q, refs(&[(0, 0)]));
        assert_eq!(r.value, int(3));
    }

    #[test]
    fn exact_landing_keeps_collected_set() {
        // Two rounds, each with a b = 5 option of mass 1/4: the budget 1/2
        // is hit exactly, so both groups join Q and Q has mass exactly m.
        let inst = Instance::from_triples(vec![
            vec![(frac(1, 4), int(1), int(5)), (frac(3, 4), int(1), int(0))],
            vec![(frac(1, 4), int(1), int(5)), (frac(3, 4), int(1), int(0))],
        ])
        .unwrap();
        let r = restrict_options(&inst, &frac(1, 2)).unwrap();
        assert_eq!(r.q, refs(&[(0, 0), (1, 0)]));
        assert_eq!(r.mass, frac(1, 2));
        assert!(!r.single_round);
    }

    #[test]
    fn bad_budget() {
        let t = gen_table1();
        assert!(restrict_options(&t, &int(0)).is_err());
        assert!(restrict_options(&t, &frac(3, 2)).is_err());
    }
}
