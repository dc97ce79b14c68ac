//! Delegation instances: independent rounds, each a finite distribution
//! over options carrying a probability, an agent utility `a` and a
//! principal utility `b`.

mod generators;
mod io;

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

pub use generators::{
    gen_oblivious_lb, gen_random, gen_random_with, gen_semioblivious_lb, gen_table1, gen_thm2, gen_zero_agent_lb,
    RandomParams, UtilityLaw,
};
pub use io::{instance_from_json, instance_to_json, load, save};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionOutcome {
    pub p: Rational,
    pub a: Rational,
    pub b: Rational,
}

impl OptionOutcome {
    pub fn new(p: Rational, a: Rational, b: Rational) -> Self {
        Self { p, a, b }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundDistribution {
    pub options: Vec<OptionOutcome>,
}

impl RoundDistribution {
    pub fn new(options: Vec<OptionOutcome>) -> Self {
        Self { options }
    }

    pub fn mass(&self) -> Rational {
        self.options.iter().map(|o| &o.p).sum()
    }

    pub fn expected_a(&self) -> Rational {
        self.options.iter().map(|o| &o.p * &o.a).sum()
    }

    pub fn expected_b(&self) -> Rational {
        self.options.iter().map(|o| &o.p * &o.b).sum()
    }
}

/// Provenance and parameters recorded by generators.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Rational stand-in for `sqrt(alpha)` used in the probabilities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sqrt_alpha_approx: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub rounds: Vec<RoundDistribution>,
    pub meta: Meta,
}

/// Address of option `option` in round `round` (both 0-based internally,
/// 1-based when serialized).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OptionRef {
    pub round: usize,
    pub option: usize,
}

impl OptionRef {
    pub fn new(round: usize, option: usize) -> Self {
        Self { round, option }
    }
}

impl Serialize for OptionRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.round + 1, self.option + 1].serialize(s)
    }
}

impl std::fmt::Display for OptionRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "w{},{}", self.round + 1, self.option + 1)
    }
}

impl Instance {
    pub fn new(rounds: Vec<RoundDistribution>) -> Self {
        Self {
            rounds,
            meta: Meta::default(),
        }
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    /// Builds a validated instance from `(p, a, b)` triples per round.
    pub fn from_triples(rounds: Vec<Vec<(Rational, Rational, Rational)>>) -> Result<Self> {
        let inst = Self::new(
            rounds
                .into_iter()
                .map(|r| RoundDistribution::new(r.into_iter().map(|(p, a, b)| OptionOutcome::new(p, a, b)).collect()))
                .collect(),
        );
        validate(&inst)?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.rounds.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.options.len()).collect()
    }

    pub fn total_support(&self) -> usize {
        self.rounds.iter().map(|r| r.options.len()).sum()
    }

    pub fn option(&self, r: OptionRef) -> &OptionOutcome {
        &self.rounds[r.round].options[r.option]
    }

    /// All option references, round-major.
    pub fn refs(&self) -> impl Iterator<Item = OptionRef> + '_ {
        self.rounds
            .iter()
            .enumerate()
            .flat_map(|(i, r)| (0..r.options.len()).map(move |j| OptionRef::new(i, j)))
    }

    pub fn options(&self) -> impl Iterator<Item = &OptionOutcome> {
        self.rounds.iter().flat_map(|r| r.options.iter())
    }

    /// Copy with every agent utility transformed by `f`.
    pub fn map_agent(&self, f: impl Fn(&Rational) -> Rational) -> Instance {
        let mut out = self.clone();
        for o in out.rounds.iter_mut().flat_map(|r| r.options.iter_mut()) {
            o.a = f(&o.a);
        }
        out
    }

    /// Instance restricted to the rounds `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> Instance {
        Instance::new(self.rounds[start..start + len].to_vec())
    }
}

/// Checks all type invariants.
pub fn validate(inst: &Instance) -> Result<()> {
    if inst.rounds.is_empty() {
        return Err(Error::NoRounds);
    }
    for (i, round) in inst.rounds.iter().enumerate() {
        if round.options.is_empty() {
            return Err(Error::EmptyRound(i + 1));
        }
        for (j, o) in round.options.iter().enumerate() {
            if o.p.is_negative() || o.p > Rational::one() {
                return Err(Error::BadProbability {
                    round: i + 1,
                    option: j + 1,
                });
            }
            for (field, v) in [("a", &o.a), ("b", &o.b)] {
                if v.is_negative() {
                    return Err(Error::NegativeUtility {
                        round: i + 1,
                        option: j + 1,
                        field,
                    });
                }
            }
        }
        let mass = round.mass();
        if !mass.is_one() {
            return Err(Error::NonUnitMass {
                round: i + 1,
                mass: format_rational(&mass),
            });
        }
    }
    Ok(())
}

/// Ratio of largest to smallest agent utility. With `positive_only`,
/// zero utilities are ignored.
pub fn alpha_bound(inst: &Instance, positive_only: bool) -> Result<Rational> {
    let mut lo: Option<&Rational> = None;
    let mut hi: Option<&Rational> = None;
    for o in inst.options() {
        if o.a.is_zero() {
            if positive_only {
                continue;
            }
            return Err(Error::ZeroAgentUtility);
        }
        if lo.is_none_or(|l| o.a < *l) {
            lo = Some(&o.a);
        }
        if hi.is_none_or(|h| o.a > *h) {
            hi = Some(&o.a);
        }
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok(hi / lo),
        _ => Err(Error::NoPositiveUtility),
    }
}

/// Smallest `beta` with every pairwise ratio-of-ratios inside `[1/beta, beta]`.
pub fn beta_bound(inst: &Instance) -> Result<Rational> {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for o in inst.options() {
        if o.a.is_zero() || o.b.is_zero() {
            return Err(Error::ZeroUtility);
        }
        let r = &o.b / &o.a;
        if lo.as_ref().is_none_or(|l| r < *l) {
            lo = Some(r.clone());
        }
        if hi.as_ref().is_none_or(|h| r > *h) {
            hi = Some(r);
        }
    }
    let (lo, hi) = (lo.ok_or(Error::NoRounds)?, hi.ok_or(Error::NoRounds)?);
    Ok(hi / lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfoModel {
    Conscious,
    SemiOblivious,
    Oblivious,
}

impl std::str::FromStr for InfoModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conscious" => Ok(InfoModel::Conscious),
            "semi" | "semi-oblivious" => Ok(InfoModel::SemiOblivious),
            "oblivious" => Ok(InfoModel::Oblivious),
            other => Err(Error::bad_param("info", format!("unknown model {other:?}"))),
        }
    }
}

/// What an oblivious principal may see: `(p, b)` per option and the bound alpha.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedactedInstance {
    pub rounds: Vec<Vec<(Rational, Rational)>>,
    pub alpha_bound: Rational,
}

impl RedactedInstance {
    pub fn n(&self) -> usize {
        self.rounds.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.rounds.iter().map(Vec::len).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Redacted {
    Full(Instance),
    Oblivious(RedactedInstance),
}

/// Strips what the principal cannot see under `model`.
pub fn redact(inst: &Instance, model: InfoModel) -> Result<Redacted> {
    match model {
        InfoModel::Conscious | InfoModel::SemiOblivious => Ok(Redacted::Full(inst.clone())),
        InfoModel::Oblivious => {
            let alpha = alpha_bound(inst, false)?;
            Ok(Redacted::Oblivious(RedactedInstance {
                rounds: inst
                    .rounds
                    .iter()
                    .map(|r| r.options.iter().map(|o| (o.p.clone(), o.b.clone())).collect())
                    .collect(),
                alpha_bound: alpha,
            }))
        }
    }
}

/// Read access to the part of a prior the principal always knows.
pub trait PrincipalPrior {
    fn num_rounds(&self) -> usize;
    fn support(&self, round: usize) -> usize;
    fn prob(&self, r: OptionRef) -> &Rational;
    fn principal_utility(&self, r: OptionRef) -> &Rational;
}

impl PrincipalPrior for Instance {
    fn num_rounds(&self) -> usize {
        self.rounds.len()
    }
    fn support(&self, round: usize) -> usize {
        self.rounds[round].options.len()
    }
    fn prob(&self, r: OptionRef) -> &Rational {
        &self.option(r).p
    }
    fn principal_utility(&self, r: OptionRef) -> &Rational {
        &self.option(r).b
    }
}

impl PrincipalPrior for RedactedInstance {
    fn num_rounds(&self) -> usize {
        self.rounds.len()
    }
    fn support(&self, round: usize) -> usize {
        self.rounds[round].len()
    }
    fn prob(&self, r: OptionRef) -> &Rational {
        &self.rounds[r.round][r.option].0
    }
    fn principal_utility(&self, r: OptionRef) -> &Rational {
        &self.rounds[r.round][r.option].1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn table1_is_valid() {
        validate(&gen_table1()).unwrap();
    }

    #[test]
    fn degenerate_single_option() {
        let inst = Instance::from_triples(vec![vec![(int(1), int(2), int(3))]]).unwrap();
        assert_eq!(inst.n(), 1);
    }

    #[test]
    fn non_unit_mass_is_reported() {
        let inst = Instance::new(vec![RoundDistribution::new(vec![
            OptionOutcome::new(frac(1, 2), int(1), int(1)),
            OptionOutcome::new(frac(1, 3), int(1), int(1)),
        ])]);
        assert_eq!(
            validate(&inst),
            Err(Error::NonUnitMass {
                round: 1,
                mass: "5/6".into()
            })
        );
    }

    #[test]
    fn empty_round_and_negative_utility() {
        let inst = Instance::new(vec![RoundDistribution::new(vec![])]);
        assert_eq!(validate(&inst), Err(Error::EmptyRound(1)));
        let inst = Instance::new(vec![RoundDistribution::new(vec![OptionOutcome::new(
            int(1),
            int(-1),
            int(0),
        )])]);
        assert!(matches!(
            validate(&inst),
            Err(Error::NegativeUtility {
                round: 1,
                option: 1,
                field: "a"
            })
        ));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_bound(&gen_table1(), false).unwrap(), int(8));
        let flat =
            Instance::from_triples(vec![vec![(frac(1, 2), int(3), int(1)), (frac(1, 2), int(3), int(2))]]).unwrap();
        assert_eq!(alpha_bound(&flat, false).unwrap(), int(1));
        let with_zero = Instance::from_triples(vec![vec![
            (frac(1, 3), int(0), int(1)),
            (frac(1, 3), int(1), int(1)),
            (frac(1, 3), int(4), int(1)),
        ]])
        .unwrap();
        assert_eq!(alpha_bound(&with_zero, true).unwrap(), int(4));
        assert_eq!(alpha_bound(&with_zero, false), Err(Error::ZeroAgentUtility));
        let all_zero = Instance::from_triples(vec![vec![(int(1), int(0), int(1))]]).unwrap();
        assert_eq!(alpha_bound(&all_zero, true), Err(Error::NoPositiveUtility));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_bound(&gen_table1()).unwrap(), frac(32, 3));
        let ray = Instance::from_triples(vec![
            vec![(frac(1, 2), int(2), int(6)), (frac(1, 2), int(5), int(15))],
            vec![(int(1), int(1), int(3))],
        ])
        .unwrap();
        assert_eq!(beta_bound(&ray).unwrap(), int(1));
        let pair =
            Instance::from_triples(vec![vec![(frac(1, 2), int(1), int(1)), (frac(1, 2), int(1), int(4))]]).unwrap();
        assert_eq!(beta_bound(&pair).unwrap(), int(4));
        let zero = Instance::from_triples(vec![vec![(int(1), int(1), int(0))]]).unwrap();
        assert_eq!(beta_bound(&zero), Err(Error::ZeroUtility));
    }

    #[test]
    fn redaction() {
        let t = gen_table1();
        match redact(&t, InfoModel::Oblivious).unwrap() {
            Redacted::Oblivious(r) => {
                assert_eq!(r.alpha_bound, int(8));
                assert_eq!(r.rounds[0][1], (frac(1, 4), int(8)));
                assert_eq!(r.shape(), t.shape());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(redact(&t, InfoModel::Conscious).unwrap(), Redacted::Full(t.clone()));
        assert_eq!(redact(&t, InfoModel::SemiOblivious).unwrap(), Redacted::Full(t));
    }
}
