//! The agent's side of the game: given a committed action scheme, the agent
//! solves an optimal stopping problem by backward induction. Ties are
//! resolved in favor of the principal, and a full tie proposes.

mod file;
mod oracle;

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{InfoModel, Instance, OptionRef};
use crate::rational::{format_rational, Rational};

pub use file::{scheme_from_json, scheme_to_json, IntervalWindow, SchemeFile};
pub use oracle::{exhaustive_agent_oracle, ORACLE_MAX_SUPPORT};

/// Which information a scheme builder consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Conscious,
    Semi,
    Oblivious,
}

/// Acceptance probability per (round, option).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionScheme {
    pub phi: Vec<Vec<Rational>>,
    pub provenance: Provenance,
}

impl ActionScheme {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            phi: shape.iter().map(|&s| vec![Rational::zero(); s]).collect(),
            provenance: Provenance::Conscious,
        }
    }

    pub fn ones(shape: &[usize]) -> Self {
        Self {
            phi: shape.iter().map(|&s| vec![Rational::one(); s]).collect(),
            provenance: Provenance::Conscious,
        }
    }

    /// Deterministic scheme accepting exactly `members`.
    pub fn accepting<'a>(shape: &[usize], members: impl IntoIterator<Item = &'a OptionRef>) -> Self {
        let mut s = Self::zeros(shape);
        for r in members {
            s.phi[r.round][r.option] = Rational::one();
        }
        s
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn shape(&self) -> Vec<usize> {
        self.phi.iter().map(Vec::len).collect()
    }

    pub fn get(&self, r: OptionRef) -> &Rational {
        &self.phi[r.round][r.option]
    }

    pub fn is_deterministic(&self) -> bool {
        self.phi.iter().flatten().all(|x| x.is_zero() || x.is_one())
    }

    /// Options accepted with probability one, round-major.
    pub fn accepted(&self) -> Vec<OptionRef> {
        let mut out = Vec::new();
        for (i, row) in self.phi.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if x.is_one() {
                    out.push(OptionRef::new(i, j));
                }
            }
        }
        out
    }

    pub fn to_deterministic(&self) -> Option<DeterministicScheme> {
        if !self.is_deterministic() {
            return None;
        }
        Some(DeterministicScheme {
            accept: self
                .phi
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, x)| x.is_one())
                        .map(|(j, _)| j)
                        .collect()
                })
                .collect(),
        })
    }
}

/// Acceptable-option sets `E_i` (0-based option indices).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeterministicScheme {
    pub accept: Vec<BTreeSet<usize>>,
}

impl DeterministicScheme {
    pub fn new(accept: Vec<BTreeSet<usize>>) -> Self {
        Self { accept }
    }

    pub fn to_scheme(&self, shape: &[usize]) -> Result<ActionScheme> {
        if self.accept.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} accept sets for {} rounds",
                self.accept.len(),
                shape.len()
            )));
        }
        let mut s = ActionScheme::zeros(shape);
        for (i, set) in self.accept.iter().enumerate() {
            for &j in set {
                if j >= shape[i] {
                    return Err(Error::ShapeMismatch(format!("round {} has no option {}", i + 1, j + 1)));
                }
                s.phi[i][j] = Rational::one();
            }
        }
        Ok(s)
    }

    /// Human-readable 1-based form, e.g. `{2} {1}`.
    pub fn describe(&self) -> String {
        self.accept
            .iter()
            .map(|set| {
                let items: Vec<String> = set.iter().map(|j| (j + 1).to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Propose/discard decision per (round, option).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentPolicy {
    pub propose: Vec<Vec<bool>>,
}

impl AgentPolicy {
    pub fn uniform(shape: &[usize], propose: bool) -> Self {
        Self {
            propose: shape.iter().map(|&s| vec![propose; s]).collect(),
        }
    }

    pub fn get(&self, r: OptionRef) -> bool {
        self.propose[r.round][r.option]
    }
}

/// Exact outcome of play under a scheme and a policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalResult {
    pub agent_value: Rational,
    pub principal_value: Rational,
    /// `V_1..V_{n+1}`, agent value of reaching round `i` (last entry 0).
    pub agent_cont: Vec<Rational>,
    /// `W_1..W_{n+1}`, principal value of reaching round `i`.
    pub principal_cont: Vec<Rational>,
    /// Probability that the game ends with a proposal in round `i`.
    pub stop_mass: Vec<Rational>,
}

pub(crate) fn check_shape(inst: &Instance, scheme: &ActionScheme) -> Result<()> {
    if scheme.phi.len() != inst.n() {
        return Err(Error::ShapeMismatch(format!(
            "scheme has {} rounds, instance has {}",
            scheme.phi.len(),
            inst.n()
        )));
    }
    for (i, (row, round)) in scheme.phi.iter().zip(&inst.rounds).enumerate() {
        if row.len() != round.options.len() {
            return Err(Error::ShapeMismatch(format!(
                "round {}: scheme has {} entries, instance has {} options",
                i + 1,
                row.len(),
                round.options.len()
            )));
        }
        if let Some(j) = row.iter().position(|x| x.is_negative() || *x > Rational::one()) {
            return Err(Error::ShapeMismatch(format!(
                "round {}, option {}: acceptance probability outside [0, 1]",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

fn check_policy_shape(inst: &Instance, policy: &AgentPolicy) -> Result<()> {
    let ok = policy.propose.len() == inst.n()
        && policy
            .propose
            .iter()
            .zip(&inst.rounds)
            .all(|(row, r)| row.len() == r.options.len());
    if ok {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("policy shape differs from instance".into()))
    }
}

/// The tie rule shared by every agent model in the crate: propose iff the
/// agent strictly prefers it, or is indifferent and the principal weakly
/// prefers it.
pub fn prefers_propose(
    agent_propose: &Rational,
    principal_propose: &Rational,
    agent_wait: &Rational,
    principal_wait: &Rational,
) -> bool {
    match agent_propose.cmp(agent_wait) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => principal_propose >= principal_wait,
    }
}

/// One backward pass; `decide` returns whether option `(i, j)` is proposed
/// given its proposal payoffs and the continuation values.
fn backward_pass(
    inst: &Instance,
    scheme: &ActionScheme,
    mut decide: impl FnMut(OptionRef, &Rational, &Rational, &Rational, &Rational) -> bool,
) -> (AgentPolicy, EvalResult) {
    let n = inst.n();
    let mut v = vec![Rational::zero(); n + 1];
    let mut w = vec![Rational::zero(); n + 1];
    let mut propose: Vec<Vec<bool>> = inst.shape().iter().map(|&s| vec![false; s]).collect();
    for i in (0..n).rev() {
        let (mut vi, mut wi) = (Rational::zero(), Rational::zero());
        for (j, o) in inst.rounds[i].options.iter().enumerate() {
            let phi = &scheme.phi[i][j];
            let ap = phi * &o.a;
            let bp = phi * &o.b;
            let go = decide(OptionRef::new(i, j), &ap, &bp, &v[i + 1], &w[i + 1]);
            propose[i][j] = go;
            if go {
                vi += &o.p * ap;
                wi += &o.p * bp;
            } else {
                vi += &o.p * &v[i + 1];
                wi += &o.p * &w[i + 1];
            }
        }
        v[i] = vi;
        w[i] = wi;
    }
    let policy = AgentPolicy { propose };
    let stop_mass = stop_masses(inst, &policy);
    let eval = EvalResult {
        agent_value: v[0].clone(),
        principal_value: w[0].clone(),
        agent_cont: v,
        principal_cont: w,
        stop_mass,
    };
    (policy, eval)
}

fn stop_masses(inst: &Instance, policy: &AgentPolicy) -> Vec<Rational> {
    let mut reach = Rational::one();
    let mut out = Vec::with_capacity(inst.n());
    for (i, round) in inst.rounds.iter().enumerate() {
        let q: Rational = round
            .options
            .iter()
            .zip(&policy.propose[i])
            .filter(|(_, &go)| go)
            .map(|(o, _)| &o.p)
            .sum();
        out.push(&reach * &q);
        reach *= Rational::one() - q;
    }
    out
}

/// Agent best response by backward induction.
pub fn agent_best_response(inst: &Instance, scheme: &ActionScheme) -> Result<(AgentPolicy, EvalResult)> {
    check_shape(inst, scheme)?;
    Ok(backward_pass(inst, scheme, |_, ap, bp, v, w| {
        prefers_propose(ap, bp, v, w)
    }))
}

/// Values of a given (not necessarily optimal) agent policy.
pub fn evaluate_fixed(inst: &Instance, scheme: &ActionScheme, policy: &AgentPolicy) -> Result<EvalResult> {
    check_shape(inst, scheme)?;
    check_policy_shape(inst, policy)?;
    Ok(backward_pass(inst, scheme, |r, _, _, _, _| policy.get(r)).1)
}

/// Checks whether `scheme` can be implemented by a principal under `model`.
pub fn scheme_info_validity(inst: &Instance, scheme: &ActionScheme, model: InfoModel) -> Result<()> {
    check_shape(inst, scheme)?;
    if model == InfoModel::Conscious {
        return Ok(());
    }
    for (i, round) in inst.rounds.iter().enumerate() {
        for j in 0..round.options.len() {
            for k in j + 1..round.options.len() {
                if round.options[j].b == round.options[k].b && scheme.phi[i][j] != scheme.phi[i][k] {
                    return Err(Error::IndistinguishableMismatch {
                        round: i + 1,
                        first: j + 1,
                        second: k + 1,
                    });
                }
            }
        }
    }
    if model == InfoModel::Oblivious && scheme.provenance != Provenance::Oblivious {
        return Err(Error::ProvenanceViolation);
    }
    Ok(())
}

impl EvalResult {
    pub fn summary(&self) -> String {
        format!(
            "principal={} agent={}",
            format_rational(&self.principal_value),
            format_rational(&self.agent_value)
        )
    }
}
