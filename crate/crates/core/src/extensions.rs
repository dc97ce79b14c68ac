//! Variants of the base game: an agent who sees the next `k` rounds before
//! deciding, and an agent who may propose in up to `k` rounds facing an
//! interval scheme that stops the search at the first silent round.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::benchmarks::{offline_opt, online_thresholds};
use crate::dynamics::{check_shape, prefers_propose, ActionScheme, EvalResult, IntervalWindow};
use crate::error::{Error, Result};
use crate::instance::{Instance, OptionRef};
use crate::rational::Rational;

/// Cap on the number of window states in any round of the lookahead DP.
pub const LOOKAHEAD_MAX_STATES: u128 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookaheadConfig {
    /// Extra rounds the agent sees beyond the current one.
    pub k: usize,
}

/// Realized option indices of rounds `start..=end`, encoded in mixed radix
/// with the first round most significant.
struct Window {
    start: usize,
    sizes: Vec<usize>,
}

impl Window {
    fn new(inst: &Instance, start: usize, k: usize) -> Self {
        let end = (start + k).min(inst.n() - 1);
        Self {
            start,
            sizes: (start..=end).map(|i| inst.rounds[i].options.len()).collect(),
        }
    }

    fn count(&self) -> usize {
        self.sizes.iter().product()
    }

    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &s) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = idx % s;
            idx /= s;
        }
        out
    }

    fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.sizes).fold(0, |acc, (&j, &s)| acc * s + j)
    }

    fn prob(&self, inst: &Instance, tuple: &[usize]) -> Rational {
        tuple
            .iter()
            .enumerate()
            .map(|(t, &j)| inst.rounds[self.start + t].options[j].p.clone())
            .product()
    }
}

/// Agent best response when round `i`'s decision is made after seeing the
/// options of rounds `i..=min(n, i + k)`. Ties follow the base rule.
///
/// `agent_cont[i]` and `principal_cont[i]` average the round-`i` state values
/// over all windows, ignoring how the state was reached.
pub fn lookahead_best_response(inst: &Instance, scheme: &ActionScheme, cfg: LookaheadConfig) -> Result<EvalResult> {
    check_shape(inst, scheme)?;
    let n = inst.n();
    if cfg.k >= n {
        return Err(Error::bad_param(
            "lookahead",
            format!("must be at most n - 1 = {}", n - 1),
        ));
    }
    let windows: Vec<Window> = (0..n).map(|i| Window::new(inst, i, cfg.k)).collect();
    for w in &windows {
        let count: u128 = w.sizes.iter().map(|&s| s as u128).product();
        if count > LOOKAHEAD_MAX_STATES {
            return Err(Error::TooLarge {
                count: count.to_string(),
                cap: LOOKAHEAD_MAX_STATES.to_string(),
            });
        }
    }
    // values[i][state] = (agent, principal); propose[i][state]
    let mut values: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); n];
    let mut propose: Vec<Vec<bool>> = vec![Vec::new(); n];
    for i in (0..n).rev() {
        let w = &windows[i];
        let mut vals = Vec::with_capacity(w.count());
        let mut props = Vec::with_capacity(w.count());
        for idx in 0..w.count() {
            let tuple = w.decode(idx);
            let (cont_a, cont_b) = if i + 1 == n {
                (Rational::zero(), Rational::zero())
            } else {
                let next = &windows[i + 1];
                let tail = &tuple[1..];
                if next.sizes.len() == tail.len() {
                    values[i + 1][next.encode(tail)].clone()
                } else {
                    let new_round = next.start + next.sizes.len() - 1;
                    let mut acc = (Rational::zero(), Rational::zero());
                    let mut succ = tail.to_vec();
                    succ.push(0);
                    for (j, o) in inst.rounds[new_round].options.iter().enumerate() {
                        *succ.last_mut().expect("nonempty") = j;
                        let (va, vb) = &values[i + 1][next.encode(&succ)];
                        acc.0 += &o.p * va;
                        acc.1 += &o.p * vb;
                    }
                    acc
                }
            };
            let j = tuple[0];
            let o = &inst.rounds[i].options[j];
            let phi = &scheme.phi[i][j];
            let (pa, pb) = (phi * &o.a, phi * &o.b);
            if prefers_propose(&pa, &pb, &cont_a, &cont_b) {
                vals.push((pa, pb));
                props.push(true);
            } else {
                vals.push((cont_a, cont_b));
                props.push(false);
            }
        }
        values[i] = vals;
        propose[i] = props;
    }
    let average = |i: usize| -> (Rational, Rational) {
        let w = &windows[i];
        let mut acc = (Rational::zero(), Rational::zero());
        for (idx, (va, vb)) in values[i].iter().enumerate() {
            let p = w.prob(inst, &w.decode(idx));
            acc.0 += &p * va;
            acc.1 += &p * vb;
        }
        acc
    };
    let mut agent_cont = Vec::with_capacity(n + 1);
    let mut principal_cont = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (a, b) = average(i);
        agent_cont.push(a);
        principal_cont.push(b);
    }
    agent_cont.push(Rational::zero());
    principal_cont.push(Rational::zero());
    // Forward pass: reach probability of each (round, window) state.
    let mut stop_mass = vec![Rational::zero(); n];
    let mut reach: Vec<Rational> = (0..windows[0].count())
        .map(|idx| windows[0].prob(inst, &windows[0].decode(idx)))
        .collect();
    for i in 0..n {
        let w = &windows[i];
        let mut next_reach = if i + 1 < n {
            vec![Rational::zero(); windows[i + 1].count()]
        } else {
            Vec::new()
        };
        for (idx, mass) in reach.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            if propose[i][idx] {
                stop_mass[i] += mass;
                continue;
            }
            if i + 1 == n {
                continue;
            }
            let tuple = w.decode(idx);
            let next = &windows[i + 1];
            let tail = &tuple[1..];
            if next.sizes.len() == tail.len() {
                next_reach[next.encode(tail)] += mass;
            } else {
                let new_round = next.start + next.sizes.len() - 1;
                let mut succ = tail.to_vec();
                succ.push(0);
                for (j, o) in inst.rounds[new_round].options.iter().enumerate() {
                    *succ.last_mut().expect("nonempty") = j;
                    next_reach[next.encode(&succ)] += mass * &o.p;
                }
            }
        }
        reach = next_reach;
    }
    Ok(EvalResult {
        agent_value: agent_cont[0].clone(),
        principal_value: principal_cont[0].clone(),
        agent_cont,
        principal_cont,
        stop_mass,
    })
}

/// Interval scheme for an agent with `k` proposals: only rounds
/// `start..start + k` accept anything, and there the principal accepts what
/// her own optimal search over the window would stop on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalKScheme {
    /// 0-based first round of the window.
    pub start: usize,
    pub k: usize,
    /// Window thresholds `T_1..T_{k+1}` of the principal's own search.
    #[serde(serialize_with = "serialize_values")]
    pub thresholds: Vec<Rational>,
    /// Accepted option indices per round of the whole instance.
    pub accept: Vec<BTreeSet<usize>>,
    /// Offline value of each candidate window, by start round.
    #[serde(serialize_with = "serialize_values")]
    pub window_values: Vec<Rational>,
    pub abort_on_silence: bool,
}

fn serialize_values<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(crate::rational::format_rational))
}

impl IntervalKScheme {
    pub fn window(&self) -> IntervalWindow {
        IntervalWindow {
            start: self.start,
            len: self.k,
        }
    }

    pub fn in_window(&self, round: usize) -> bool {
        round >= self.start && round < self.start + self.k
    }

    /// Acceptance sets as a plain scheme; the abort rule is not encoded.
    pub fn to_action_scheme(&self, inst: &Instance) -> ActionScheme {
        let members: Vec<OptionRef> = self
            .accept
            .iter()
            .enumerate()
            .flat_map(|(i, set)| set.iter().map(move |&j| OptionRef::new(i, j)))
            .collect();
        ActionScheme::accepting(&inst.shape(), &members)
    }
}

/// Picks the window of `k` consecutive rounds with the best offline value
/// (earliest on ties).
pub fn k_proposal_interval_scheme(inst: &Instance, k: usize) -> Result<IntervalKScheme> {
    let n = inst.n();
    if k == 0 || k > n {
        return Err(Error::bad_param("k", format!("must lie in [1, {n}]")));
    }
    let window_values: Vec<Rational> = (0..=n - k).map(|l| offline_opt(&inst.window(l, k))).collect();
    let mut start = 0;
    for (l, v) in window_values.iter().enumerate() {
        if *v > window_values[start] {
            start = l;
        }
    }
    let thresholds = online_thresholds(&inst.window(start, k));
    let mut accept = vec![BTreeSet::new(); n];
    for t in 0..k {
        for (j, o) in inst.rounds[start + t].options.iter().enumerate() {
            if o.b >= thresholds[t + 1] {
                accept[start + t].insert(j);
            }
        }
    }
    Ok(IntervalKScheme {
        start,
        k,
        thresholds,
        accept,
        window_values,
        abort_on_silence: true,
    })
}

/// Rebuilds the interval scheme of a stored window.
pub fn interval_scheme_for_window(inst: &Instance, window: IntervalWindow) -> Result<IntervalKScheme> {
    let mut s = k_proposal_interval_scheme(inst, window.len)?;
    if s.start != window.start {
        let thresholds = online_thresholds(&inst.window(window.start, window.len));
        let mut accept = vec![BTreeSet::new(); inst.n()];
        for t in 0..window.len {
            for (j, o) in inst.rounds[window.start + t].options.iter().enumerate() {
                if o.b >= thresholds[t + 1] {
                    accept[window.start + t].insert(j);
                }
            }
        }
        s.start = window.start;
        s.thresholds = thresholds;
        s.accept = accept;
    }
    Ok(s)
}

/// Agent best response with `k` proposals against an interval scheme. The
/// state is (round, proposals used). Inside the window silence ends the game
/// with nothing; a rejected proposal costs one proposal.
pub fn evaluate_k_proposal(inst: &Instance, scheme: &IntervalKScheme) -> Result<EvalResult> {
    let n = inst.n();
    let k = scheme.k;
    if scheme.accept.len() != n || scheme.start + k > n || k == 0 {
        return Err(Error::ShapeMismatch("interval scheme does not fit the instance".into()));
    }
    let zero = || (Rational::zero(), Rational::zero());
    // v[i][r]: values on reaching round i with r proposals used.
    let mut v: Vec<Vec<(Rational, Rational)>> = vec![vec![zero(); k + 1]; n + 1];
    // decisions[i][r][j]: propose option j.
    let mut decisions: Vec<Vec<Vec<bool>>> = vec![vec![Vec::new(); k + 1]; n];
    for i in (0..n).rev() {
        for r in 0..=k {
            let mut acc = zero();
            let mut row = Vec::with_capacity(inst.rounds[i].options.len());
            for (j, o) in inst.rounds[i].options.iter().enumerate() {
                let silent = if scheme.in_window(i) {
                    zero()
                } else {
                    v[i + 1][r].clone()
                };
                let proposed = if r == k {
                    None
                } else if scheme.accept[i].contains(&j) {
                    Some((o.a.clone(), o.b.clone()))
                } else {
                    Some(v[i + 1][r + 1].clone())
                };
                let (go, value) = match proposed {
                    Some(p) if prefers_propose(&p.0, &p.1, &silent.0, &silent.1) => (true, p),
                    Some(p) => {
                        if scheme.in_window(i) && silent.0 > p.0 {
                            return Err(Error::ConsistencyViolation(format!(
                                "silence beats proposing in window round {}",
                                i + 1
                            )));
                        }
                        (false, silent)
                    }
                    None => (false, silent),
                };
                row.push(go);
                acc.0 += &o.p * value.0;
                acc.1 += &o.p * value.1;
            }
            v[i][r] = acc;
            decisions[i][r] = row;
        }
    }
    // Forward pass over (round, proposals used).
    let mut stop_mass = vec![Rational::zero(); n];
    let mut reach = vec![Rational::zero(); k + 1];
    reach[0] = Rational::one();
    for i in 0..n {
        let mut next = vec![Rational::zero(); k + 1];
        for r in 0..=k {
            if reach[r].is_zero() {
                continue;
            }
            for (j, o) in inst.rounds[i].options.iter().enumerate() {
                let mass = &reach[r] * &o.p;
                if decisions[i][r][j] {
                    if scheme.accept[i].contains(&j) {
                        stop_mass[i] += mass;
                    } else {
                        next[r + 1] += mass;
                    }
                } else if scheme.in_window(i) {
                    stop_mass[i] += mass;
                } else {
                    next[r] += mass;
                }
            }
        }
        reach = next;
    }
    // Continuations along the path that proposes in every window round.
    let used = |i: usize| i.saturating_sub(scheme.start).min(k);
    let agent_cont = (0..=n).map(|i| v[i][used(i)].0.clone()).collect();
    let principal_cont = (0..=n).map(|i| v[i][used(i)].1.clone()).collect();
    Ok(EvalResult {
        agent_value: v[0][0].0.clone(),
        principal_value: v[0][0].1.clone(),
        agent_cont,
        principal_cont,
        stop_mass,
    })
}

/// Per-window guarantee of the interval scheme against the offline optimum:
/// `1 / (2 * ceil(n / k))`.
pub fn interval_guarantee_denominator(n: usize, k: usize) -> usize {
    2 * n.div_ceil(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::online_opt;
    use crate::dynamics::agent_best_response;
    use crate::instance::{gen_table1, gen_thm2};
    use crate::rational::{frac, int};

    #[test]
    fn zero_lookahead_is_base_model() {
        let t = gen_table1();
        let s = ActionScheme::ones(&t.shape());
        let base = agent_best_response(&t, &s).unwrap().1;
        assert_eq!(lookahead_best_response(&t, &s, LookaheadConfig { k: 0 }).unwrap(), base);
    }

    #[test]
    fn table1_full_lookahead() {
        let t = gen_table1();
        let s = ActionScheme::ones(&t.shape());
        let ev = lookahead_best_response(&t, &s, LookaheadConfig { k: 1 }).unwrap();
        // E[max(3, a_2)] with a_2 in {2, 16}
        assert_eq!(ev.agent_value, frac(25, 4));
        // a_2 = 2: round-1 proposal (b mean 11/4); a_2 = 16: b = 4
        assert_eq!(ev.principal_value, frac(49, 16));
        assert_eq!(ev.stop_mass, vec![frac(3, 4), frac(1, 4)]);
    }

    #[test]
    fn single_round_any_lookahead() {
        let inst =
            Instance::from_triples(vec![vec![(frac(1, 2), int(1), int(2)), (frac(1, 2), int(3), int(0))]]).unwrap();
        let s = ActionScheme::ones(&inst.shape());
        let base = agent_best_response(&inst, &s).unwrap().1;
        assert_eq!(
            lookahead_best_response(&inst, &s, LookaheadConfig { k: 0 }).unwrap(),
            base
        );
        assert!(lookahead_best_response(&inst, &s, LookaheadConfig { k: 1 }).is_err());
    }

    #[test]
    fn table1_interval_one() {
        let t = gen_table1();
        let s = k_proposal_interval_scheme(&t, 1).unwrap();
        assert_eq!(s.window_values, vec![frac(11, 4), int(4)]);
        assert_eq!(s.start, 1);
        assert_eq!(s.accept[1], [0, 1].into());
        assert_eq!(evaluate_k_proposal(&t, &s).unwrap().principal_value, int(4));
    }

    #[test]
    fn full_window_is_online_search() {
        let t = gen_table1();
        let s = k_proposal_interval_scheme(&t, 2).unwrap();
        assert_eq!(s.start, 0);
        let ev = evaluate_k_proposal(&t, &s).unwrap();
        assert_eq!(ev.principal_value, online_opt(&t));
    }

    #[test]
    fn thm2_single_round_window() {
        let inst = gen_thm2(2).unwrap();
        let s = k_proposal_interval_scheme(&inst, 1).unwrap();
        assert_eq!(s.start, 0);
        assert_eq!(evaluate_k_proposal(&inst, &s).unwrap().principal_value, frac(1, 2));
        let s3 = k_proposal_interval_scheme(&gen_thm2(3).unwrap(), 1).unwrap();
        assert_eq!(s3.start, 0);
    }

    #[test]
    fn bad_k() {
        let t = gen_table1();
        assert!(k_proposal_interval_scheme(&t, 0).is_err());
        assert!(k_proposal_interval_scheme(&t, 3).is_err());
    }

    #[test]
    fn stored_window_round_trip() {
        let t = gen_table1();
        let s = k_proposal_interval_scheme(&t, 1).unwrap();
        assert_eq!(interval_scheme_for_window(&t, s.window()).unwrap(), s);
        let other = interval_scheme_for_window(&t, IntervalWindow { start: 0, len: 1 }).unwrap();
        assert_eq!(other.start, 0);
        assert_eq!(evaluate_k_proposal(&t, &other).unwrap().principal_value, frac(11, 4));
    }
}
