//! What the principal could get without delegating: the prophet value
//! `E[max b]` and her own optimal stopping value. Also the exhaustive search
//! over deterministic schemes and ratio reports.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{agent_best_response, ActionScheme, DeterministicScheme, EvalResult};
use crate::error::{Error, Result};
use crate::instance::{Instance, OptionRef};
use crate::rational::{format_rational, serde_str, to_decimal, Rational};

/// `E[max_i b_i]` by the CDF difference `P[max <= v] - P[max < v]` at every
/// distinct principal utility `v`.
pub fn offline_opt(inst: &Instance) -> Rational {
    let values: BTreeSet<&Rational> = inst.options().map(|o| &o.b).collect();
    let mut total = Rational::zero();
    for v in values {
        let mut le = Rational::one();
        let mut lt = Rational::one();
        for round in &inst.rounds {
            let (mut p_le, mut p_lt) = (Rational::zero(), Rational::zero());
            for o in &round.options {
                if o.b <= *v {
                    p_le += &o.p;
                    if o.b < *v {
                        p_lt += &o.p;
                    }
                }
            }
            le *= p_le;
            lt *= p_lt;
        }
        total += v * (le - lt);
    }
    total
}

/// Optimal stopping thresholds `T_1..T_{n+1}` of the principal searching
/// on her own; `T_{n+1} = 0`.
pub fn online_thresholds(inst: &Instance) -> Vec<Rational> {
    let n = inst.n();
    let mut t = vec![Rational::zero(); n + 1];
    for i in (0..n).rev() {
        t[i] = inst.rounds[i]
            .options
            .iter()
            .map(|o| &o.p * (&o.b).max(&t[i + 1]))
            .sum();
    }
    t
}

pub fn online_opt(inst: &Instance) -> Rational {
    online_thresholds(inst).swap_remove(0)
}

/// `value / benchmark`, or 1 when the benchmark is 0.
pub fn ratio(value: &Rational, benchmark: &Rational) -> Rational {
    if benchmark.is_zero() {
        Rational::one()
    } else {
        value / benchmark
    }
}

/// Largest search space the brute-force oracle accepts, as a power of two.
pub const BRUTE_FORCE_MAX_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForce {
    pub scheme: DeterministicScheme,
    pub value: Rational,
    /// Options that were free to be accepted, round-major.
    pub candidates: Vec<OptionRef>,
    pub searched: u64,
}

/// Search-space size without enumerating: `2^candidates`.
pub fn brute_force_candidates(inst: &Instance, prune_zero_b: bool) -> Vec<OptionRef> {
    inst.refs()
        .filter(|&r| !prune_zero_b || !inst.option(r).b.is_zero())
        .collect()
}

/// Best deterministic scheme by exhaustive search, candidate `k` at mask bit
/// `k`. Ties go to the smallest mask.
pub fn brute_force_optimal(inst: &Instance, prune_zero_b: bool) -> Result<BruteForce> {
    brute_force_optimal_capped(inst, prune_zero_b, BRUTE_FORCE_MAX_BITS)
}

pub fn brute_force_optimal_capped(inst: &Instance, prune_zero_b: bool, max_bits: u32) -> Result<BruteForce> {
    let candidates = brute_force_candidates(inst, prune_zero_b);
    let bits = candidates.len() as u32;
    if bits > max_bits.min(BRUTE_FORCE_MAX_BITS) {
        return Err(Error::TooLarge {
            count: format!("2^{bits}"),
            cap: format!("2^{}", max_bits.min(BRUTE_FORCE_MAX_BITS)),
        });
    }
    let shape = inst.shape();
    let evaluate = |mask: u64| -> Result<Rational> {
        let members: Vec<OptionRef> = candidates
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &r)| r)
            .collect();
        let scheme = ActionScheme::accepting(&shape, &members);
        Ok(agent_best_response(inst, &scheme)?.1.principal_value)
    };
    let total = 1u64 << bits;
    let (value, mask) = (0..total)
        .into_par_iter()
        .map(|mask| evaluate(mask).map(|v| (v, mask)))
        .try_reduce_with(|x, y| {
            Ok(match x.0.cmp(&y.0) {
                std::cmp::Ordering::Greater => x,
                std::cmp::Ordering::Less => y,
                std::cmp::Ordering::Equal => {
                    if x.1 <= y.1 {
                        x
                    } else {
                        y
                    }
                }
            })
        })
        .expect("mask space is nonempty")?;
    let mut accept = vec![BTreeSet::new(); inst.n()];
    for (k, r) in candidates.iter().enumerate() {
        if mask >> k & 1 == 1 {
            accept[r.round].insert(r.option);
        }
    }
    Ok(BruteForce {
        scheme: DeterministicScheme::new(accept),
        value,
        candidates,
        searched: total,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeReport {
    pub name: String,
    #[serde(with = "serde_str")]
    pub principal_value: Rational,
    #[serde(with = "serde_str")]
    pub agent_value: Rational,
    #[serde(with = "serde_str")]
    pub ratio_offline: Rational,
    #[serde(with = "serde_str")]
    pub ratio_online: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchmarkReport {
    #[serde(with = "serde_str")]
    pub offline_opt: Rational,
    #[serde(with = "serde_str")]
    pub online_opt: Rational,
    pub per_scheme: Vec<SchemeReport>,
}

impl BenchmarkReport {
    pub fn new(inst: &Instance) -> Self {
        Self {
            offline_opt: offline_opt(inst),
            online_opt: online_opt(inst),
            per_scheme: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, eval: &EvalResult) {
        self.per_scheme.push(SchemeReport {
            name: name.to_string(),
            principal_value: eval.principal_value.clone(),
            agent_value: eval.agent_value.clone(),
            ratio_offline: ratio(&eval.principal_value, &self.offline_opt),
            ratio_online: ratio(&eval.principal_value, &self.online_opt),
        });
    }

    pub fn get(&self, name: &str) -> Option<&SchemeReport> {
        self.per_scheme.iter().find(|s| s.name == name)
    }

    /// One row per scheme; rationals are exact strings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "name",
            "principal_value",
            "agent_value",
            "ratio_offline",
            "ratio_online",
        ])
        .expect("in-memory write");
        for s in &self.per_scheme {
            w.write_record([
                s.name.as_str(),
                &format_rational(&s.principal_value),
                &format_rational(&s.agent_value),
                &format_rational(&s.ratio_offline),
                &format_rational(&s.ratio_online),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "offline_opt {} ({})\nonline_opt {} ({})\n",
            format_rational(&self.offline_opt),
            to_decimal(&self.offline_opt, 12),
            format_rational(&self.online_opt),
            to_decimal(&self.online_opt, 12)
        );
        for s in &self.per_scheme {
            out.push_str(&format!(
                "{} principal {} agent {} ratio_offline {} ratio_online {}\n",
                s.name,
                format_rational(&s.principal_value),
                format_rational(&s.agent_value),
                format_rational(&s.ratio_offline),
                format_rational(&s.ratio_online)
            ));
        }
        out
    }
}

/// Evaluates each named scheme by the agent's best response.
pub fn ratio_report(inst: &Instance, schemes: &[(String, ActionScheme)]) -> Result<BenchmarkReport> {
    let mut report = BenchmarkReport::new(inst);
    for (name, s) in schemes {
        let (_, eval) = agent_best_response(inst, s)?;
        report.push(name, &eval);
    }
    Ok(report)
}
