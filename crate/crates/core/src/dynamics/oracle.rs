//! Exhaustive search over deterministic agent policies. Used to cross-check
//! backward induction; shares no decision logic with it.

use std::cmp::Ordering;

use num_traits::Zero;

use super::{check_shape, evaluate_fixed, ActionScheme, AgentPolicy, EvalResult};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rational;

/// Largest total support the oracle accepts (policy space `2^18`).
pub const ORACLE_MAX_SUPPORT: usize = 18;

struct Suffix {
    agent: Rational,
    principal: Rational,
    /// Proposal bits of rounds `i..n`; the earliest option is the most
    /// significant bit, so a larger mask proposes earlier.
    mask: u32,
}

/// Returns an agent-optimal policy found by enumerating all `2^{Σ s_i}`
/// policies. Ties: larger principal value, then earliest proposal.
pub fn exhaustive_agent_oracle(inst: &Instance, scheme: &ActionScheme) -> Result<(AgentPolicy, EvalResult)> {
    check_shape(inst, scheme)?;
    let total = inst.total_support();
    if total > ORACLE_MAX_SUPPORT {
        return Err(Error::TooLarge {
            count: format!("2^{total}"),
            cap: format!("2^{ORACLE_MAX_SUPPORT}"),
        });
    }
    // Values of every suffix policy, built from the last round backwards.
    // A policy restricted to round i contributes V_i = A_c + M_c * V_{i+1}
    // where A_c is the proposed mass-weighted payoff and M_c the silent mass.
    let mut suffixes = vec![Suffix {
        agent: Rational::zero(),
        principal: Rational::zero(),
        mask: 0,
    }];
    let mut suffix_bits = 0u32;
    for (i, round) in inst.rounds.iter().enumerate().rev() {
        let s = round.options.len() as u32;
        let mut next = Vec::with_capacity(suffixes.len() << s);
        for choice in 0u32..(1u32 << s) {
            let (mut pa, mut pb, mut silent) = (Rational::zero(), Rational::zero(), Rational::zero());
            for (j, o) in round.options.iter().enumerate() {
                if choice >> (s - 1 - j as u32) & 1 == 1 {
                    let phi = &scheme.phi[i][j];
                    pa += &o.p * phi * &o.a;
                    pb += &o.p * phi * &o.b;
                } else {
                    silent += &o.p;
                }
            }
            for suf in &suffixes {
                next.push(Suffix {
                    agent: &pa + &silent * &suf.agent,
                    principal: &pb + &silent * &suf.principal,
                    mask: choice << suffix_bits | suf.mask,
                });
            }
        }
        suffixes = next;
        suffix_bits += s;
    }
    let best = suffixes
        .iter()
        .max_by(|x, y| {
            x.agent
                .cmp(&y.agent)
                .then_with(|| x.principal.cmp(&y.principal))
                .then_with(|| x.mask.cmp(&y.mask))
        })
        .expect("at least one policy");
    let mut propose = Vec::with_capacity(inst.n());
    let mut bit = total as u32;
    for round in &inst.rounds {
        let row: Vec<bool> = (0..round.options.len())
            .map(|_| {
                bit -= 1;
                best.mask >> bit & 1 == 1
            })
            .collect();
        propose.push(row);
    }
    let policy = AgentPolicy { propose };
    let eval = evaluate_fixed(inst, scheme, &policy)?;
    debug_assert_eq!(eval.agent_value.cmp(&best.agent), Ordering::Equal);
    debug_assert_eq!(eval.principal_value, best.principal);
    Ok((policy, eval))
}
