//! Name-based dispatch over every scheme builder, with each builder's
//! guarantee against the offline optimum.

use std::str::FromStr;

use super::guarantee::Guarantee;
use super::{
    accept_all, algo_high, algo_low, best_single_round, beta_cluster_scheme, binning_scheme, binning_scheme_z,
    oblivious_scheme, semi_oblivious_scheme,
};
use crate::dynamics::{agent_best_response, ActionScheme, EvalResult, IntervalWindow};
use crate::error::{Error, Result};
use crate::extensions::{
    evaluate_k_proposal, interval_guarantee_denominator, k_proposal_interval_scheme, IntervalKScheme,
};
use crate::instance::{beta_bound, redact, InfoModel, Instance, Redacted};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Binning,
    BinningZ,
    BestRound,
    AcceptAll,
    Oblivious,
    Semi,
    AlgoLow,
    AlgoHigh,
    Beta,
    IntervalK,
}

impl Algo {
    pub const ALL: [Algo; 10] = [
        Algo::Binning,
        Algo::BinningZ,
        Algo::BestRound,
        Algo::AcceptAll,
        Algo::Oblivious,
        Algo::Semi,
        Algo::AlgoLow,
        Algo::AlgoHigh,
        Algo::Beta,
        Algo::IntervalK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Binning => "binning",
            Algo::BinningZ => "binning-z",
            Algo::BestRound => "best-round",
            Algo::AcceptAll => "accept-all",
            Algo::Oblivious => "oblivious",
            Algo::Semi => "semi",
            Algo::AlgoLow => "algo-low",
            Algo::AlgoHigh => "algo-high",
            Algo::Beta => "beta",
            Algo::IntervalK => "interval-k",
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::bad_param("algo", format!("unknown algorithm {s:?}")))
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A built scheme with its plan (as JSON) and guarantee.
#[derive(Debug, Clone)]
pub struct Solved {
    pub algo: Algo,
    pub scheme: ActionScheme,
    pub plan: serde_json::Value,
    /// `None` when the instance has no bound to state (e.g. zero utilities
    /// for accept-all).
    pub guarantee: Option<Guarantee>,
    pub interval: Option<IntervalKScheme>,
}

impl Solved {
    pub fn window(&self) -> Option<IntervalWindow> {
        self.interval.as_ref().map(IntervalKScheme::window)
    }

    /// Principal and agent values under the matching agent model.
    pub fn evaluate(&self, inst: &Instance) -> Result<EvalResult> {
        match &self.interval {
            Some(iv) => evaluate_k_proposal(inst, iv),
            None => Ok(agent_best_response(inst, &self.scheme)?.1),
        }
    }
}

fn plan_json<T: serde::Serialize>(plan: &T) -> serde_json::Value {
    serde_json::to_value(plan).expect("plans serialize")
}

fn inverse(x: Rational) -> Rational {
    x.recip()
}

/// Builds the scheme named by `algo`; `k` is used only by `interval-k`.
pub fn solve(inst: &Instance, algo: Algo, k: Option<usize>) -> Result<Solved> {
    let plain = |scheme, plan, guarantee| Solved {
        algo,
        scheme,
        plan,
        guarantee,
        interval: None,
    };
    Ok(match algo {
        Algo::Binning | Algo::BinningZ => {
            let (scheme, plan) = if algo == Algo::Binning {
                binning_scheme(inst)?
            } else {
                binning_scheme_z(inst)?
            };
            let g = Guarantee::ratio(inverse(int(8 * plan.num_bins() as i64)));
            plain(scheme, plan_json(&plan), Some(g))
        }
        Algo::BestRound => {
            let (scheme, round) = best_single_round(inst);
            let g = Guarantee::ratio(inverse(int(inst.n() as i64)));
            plain(scheme, serde_json::json!({ "round": round + 1 }), Some(g))
        }
        Algo::AcceptAll => {
            let g = beta_bound(inst).ok().map(|b| Guarantee::ratio(inverse(int(2) * b)));
            plain(accept_all(inst), serde_json::json!({}), g)
        }
        Algo::Oblivious => {
            let Redacted::Oblivious(red) = redact(inst, InfoModel::Oblivious)? else {
                unreachable!("oblivious redaction")
            };
            let alpha = red.alpha_bound.clone();
            let (scheme, restrict) = oblivious_scheme(&red)?;
            let g = Guarantee::ratio(inverse(int(8) * &alpha));
            plain(scheme, plan_json(&restrict), Some(g))
        }
        Algo::Semi => {
            let (scheme, plan) = semi_oblivious_scheme(inst)?;
            let classes = plan.high.top_class as i64 + 1;
            let g = Guarantee::over_sqrt(inverse(int(32 * classes)), plan.alpha.clone());
            plain(scheme, plan_json(&plan), Some(g))
        }
        Algo::AlgoLow => {
            let (scheme, plan) = algo_low(inst)?;
            let g = Guarantee::over_sqrt(inverse(int(16)), plan.alpha.clone());
            plain(scheme, plan_json(&plan), Some(g))
        }
        Algo::AlgoHigh => {
            let (scheme, plan) = algo_high(inst)?;
            let classes = plan.top_class as i64 + 1;
            let g = Guarantee::over_sqrt(inverse(int(16 * classes)), plan.alpha.clone());
            plain(scheme, plan_json(&plan), Some(g))
        }
        Algo::Beta => {
            let (scheme, plan) = beta_cluster_scheme(inst)?;
            let g = Guarantee::ratio(inverse(int(2 * plan.num_clusters() as i64)));
            plain(scheme, plan_json(&plan), Some(g))
        }
        Algo::IntervalK => {
            let k = k.ok_or_else(|| Error::bad_param("k", "required for interval-k"))?;
            let iv = k_proposal_interval_scheme(inst, k)?;
            let g = Guarantee::ratio(inverse(int(interval_guarantee_denominator(inst.n(), k) as i64)));
            Solved {
                algo,
                scheme: iv.to_action_scheme(inst),
                plan: plan_json(&iv),
                guarantee: Some(g),
                interval: Some(iv),
            }
        }
    })
}
