//! Schemes for a principal who knows the prior but only sees her own utility
//! when an option is proposed. Options sharing a round and a principal
//! utility are indistinguishable, so every decision is made per group.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::restrict::{restrict_options, RestrictResult};
use crate::dynamics::{agent_best_response, ActionScheme, Provenance};
use crate::error::{Error, Result};
use crate::instance::{alpha_bound, Instance, OptionOutcome, OptionRef, RoundDistribution};
use crate::rational::{format_rational, frac, int, pow, serde_str, sqrt_ceil_decimal, Rational};

/// Options of one round sharing a principal utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub round: usize,
    pub b: Rational,
    pub members: Vec<OptionRef>,
    pub mass: Rational,
    /// `Σ p·a` over the members.
    pub agent_mass: Rational,
}

impl Group {
    /// Conditional agent expectation below `sqrt(alpha)`; false for
    /// zero-mass groups.
    pub fn is_low(&self, alpha: &Rational) -> bool {
        &self.agent_mass * &self.agent_mass < alpha * &self.mass * &self.mass
    }
}

/// Groups over `members`, ordered by round and then by first member.
pub fn groups(inst: &Instance, members: &[OptionRef]) -> Vec<Group> {
    let mut out: Vec<Group> = Vec::new();
    let mut sorted = members.to_vec();
    sorted.sort();
    for r in sorted {
        let o = inst.option(r);
        let pa = &o.p * &o.a;
        match out.iter_mut().find(|g| g.round == r.round && g.b == o.b) {
            Some(g) => {
                g.members.push(r);
                g.mass += &o.p;
                g.agent_mass += pa;
            }
            None => out.push(Group {
                round: r.round,
                b: o.b.clone(),
                members: vec![r],
                mass: o.p.clone(),
                agent_mass: pa,
            }),
        }
    }
    out
}

fn all_groups(inst: &Instance) -> Vec<Group> {
    groups(inst, &inst.refs().collect::<Vec<_>>())
}

fn value_of(inst: &Instance, set: &[OptionRef]) -> Rational {
    set.iter().map(|&r| &inst.option(r).p * &inst.option(r).b).sum()
}

fn first_max(values: &[Rational]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn all_b_zero(inst: &Instance) -> bool {
    inst.options().all(|o| o.b.is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowPlan {
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    pub restrict: Option<RestrictResult>,
    pub classes: Vec<Vec<OptionRef>>,
    #[serde(serialize_with = "serialize_values")]
    pub class_values: Vec<Rational>,
    pub chosen: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HighPlan {
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    /// Largest `K` with `4^K <= alpha`; there are `K + 1` classes.
    pub top_class: u32,
    pub restrict: Option<RestrictResult>,
    pub classes: Vec<Vec<OptionRef>>,
    #[serde(serialize_with = "serialize_values")]
    pub class_values: Vec<Rational>,
    pub chosen: usize,
    pub degenerate: bool,
}

fn serialize_values<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

/// Largest `K` with `4^K <= alpha`, i.e. `floor(log2(sqrt(alpha)))`.
pub fn high_top_class(alpha: &Rational) -> u32 {
    let mut k = 0;
    while pow(&int(4), k + 1) <= *alpha {
        k += 1;
    }
    k
}

impl LowPlan {
    fn degenerate(alpha: Rational) -> Self {
        LowPlan {
            alpha,
            restrict: None,
            classes: Vec::new(),
            class_values: Vec::new(),
            chosen: 0,
            degenerate: true,
        }
    }
}

impl HighPlan {
    fn degenerate(alpha: Rational) -> Self {
        HighPlan {
            top_class: high_top_class(&alpha),
            alpha,
            restrict: None,
            classes: Vec::new(),
            class_values: Vec::new(),
            chosen: 0,
            degenerate: true,
        }
    }
}

/// Packs round slices of the restricted set into classes of mass at most
/// `1/sqrt(alpha)`.
fn algo_low_with(inst: &Instance, alpha: &Rational) -> Result<(ActionScheme, LowPlan)> {
    if all_b_zero(inst) {
        return Ok((ActionScheme::zeros(&inst.shape()), LowPlan::degenerate(alpha.clone())));
    }
    for g in all_groups(inst) {
        if g.mass.is_positive() && !g.is_low(alpha) {
            return Err(Error::HighExpectationGroup {
                round: g.round + 1,
                b: format_rational(&g.b),
            });
        }
    }
    let restrict = restrict_options(inst, &frac(1, 2))?;
    let mut classes: Vec<Vec<OptionRef>> = vec![Vec::new()];
    let mut open_mass = Rational::zero();
    for k in 0..inst.n() {
        let slice: Vec<OptionRef> = restrict.q.iter().copied().filter(|r| r.round == k).collect();
        let p_star: Rational = slice.iter().map(|&r| &inst.option(r).p).sum();
        let total = &open_mass + &p_star;
        if &total * &total * alpha > Rational::one() {
            classes.push(slice);
            open_mass = p_star;
        } else {
            classes.last_mut().expect("one class is open").extend(slice);
            open_mass = total;
        }
    }
    let class_values: Vec<Rational> = classes.iter().map(|c| value_of(inst, c)).collect();
    let chosen = first_max(&class_values);
    let scheme = ActionScheme::accepting(&inst.shape(), &classes[chosen]);
    Ok((
        scheme,
        LowPlan {
            alpha: alpha.clone(),
            restrict: Some(restrict),
            classes,
            class_values,
            chosen,
            degenerate: false,
        },
    ))
}

/// Classes the restricted set by conditional agent expectation of each
/// group, in dyadic multiples of `sqrt(alpha)`.
fn algo_high_with(inst: &Instance, alpha: &Rational) -> Result<(ActionScheme, HighPlan)> {
    if all_b_zero(inst) {
        return Ok((ActionScheme::zeros(&inst.shape()), HighPlan::degenerate(alpha.clone())));
    }
    for g in all_groups(inst) {
        if g.mass.is_positive() && g.is_low(alpha) {
            return Err(Error::LowExpectationGroup {
                round: g.round + 1,
                b: format_rational(&g.b),
            });
        }
    }
    let restrict = restrict_options(inst, &frac(1, 4))?;
    let top = high_top_class(alpha);
    let mut classes: Vec<Vec<OptionRef>> = vec![Vec::new(); top as usize + 1];
    for g in groups(inst, &restrict.q) {
        // E^2 >= alpha * 4^k  <=>  E >= sqrt(alpha) * 2^k
        let e2 = &g.agent_mass * &g.agent_mass;
        let m2 = &g.mass * &g.mass;
        let k = (0..=top)
            .rev()
            .find(|&k| e2 >= alpha * pow(&int(4), k) * &m2)
            .unwrap_or(0);
        classes[k as usize].extend(g.members);
    }
    for c in &mut classes {
        c.sort();
    }
    let class_values: Vec<Rational> = classes.iter().map(|c| value_of(inst, c)).collect();
    let chosen = first_max(&class_values);
    let scheme = ActionScheme::accepting(&inst.shape(), &classes[chosen]);
    Ok((
        scheme,
        HighPlan {
            alpha: alpha.clone(),
            top_class: top,
            restrict: Some(restrict),
            classes,
            class_values,
            chosen,
            degenerate: false,
        },
    ))
}

/// Requires every (round, b) group of positive mass to have agent
/// expectation below `sqrt(alpha)`.
pub fn algo_low(inst: &Instance) -> Result<(ActionScheme, LowPlan)> {
    let alpha = alpha_bound(inst, false)?;
    algo_low_with(inst, &alpha).map(|(s, p)| (s.with_provenance(Provenance::Semi), p))
}

/// Requires every (round, b) group of positive mass to have agent
/// expectation at least `sqrt(alpha)`.
pub fn algo_high(inst: &Instance) -> Result<(ActionScheme, HighPlan)> {
    let alpha = alpha_bound(inst, false)?;
    algo_high_with(inst, &alpha).map(|(s, p)| (s.with_provenance(Provenance::Semi), p))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemiPlan {
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    /// Rational stand-in for `sqrt(alpha)` given to low-group options in the
    /// high instance; never below `sqrt(alpha)`.
    #[serde(with = "serde_str")]
    pub sqrt_alpha_upper: Rational,
    pub low_groups: Vec<OptionRef>,
    pub high_groups: Vec<OptionRef>,
    pub low: LowPlan,
    pub high: HighPlan,
    #[serde(with = "serde_str")]
    pub value_low: Rational,
    #[serde(with = "serde_str")]
    pub value_high: Rational,
    /// `"low"` or `"high"`.
    pub chosen: &'static str,
}

/// Splits options into low- and high-expectation groups, solves each side
/// on its own modified instance, and keeps whichever scheme does better on
/// the original instance (the low side on ties).
pub fn semi_oblivious_scheme(inst: &Instance) -> Result<(ActionScheme, SemiPlan)> {
    // Agent utilities are compared with sqrt(alpha) as given, not divided by
    // their minimum.
    let alpha = alpha_bound(inst, false)?;
    let mut low_groups = Vec::new();
    let mut high_groups = Vec::new();
    for g in all_groups(inst) {
        if g.is_low(&alpha) {
            low_groups.extend(g.members);
        } else {
            high_groups.extend(g.members);
        }
    }
    low_groups.sort();
    high_groups.sort();
    let sqrt_alpha_upper = sqrt_ceil_decimal(&alpha, 6).min(alpha.clone());
    let modified = |replace: &[OptionRef], a: &Rational| -> Instance {
        let rounds = inst
            .rounds
            .iter()
            .enumerate()
            .map(|(i, r)| {
                RoundDistribution::new(
                    r.options
                        .iter()
                        .enumerate()
                        .map(|(j, o)| {
                            if replace.binary_search(&OptionRef::new(i, j)).is_ok() {
                                OptionOutcome::new(o.p.clone(), a.clone(), Rational::zero())
                            } else {
                                o.clone()
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        Instance::new(rounds)
    };
    let d_low = modified(&high_groups, &Rational::one());
    let d_high = modified(&low_groups, &sqrt_alpha_upper);
    let (phi_low, low) = algo_low_with(&d_low, &alpha)?;
    let (phi_high, high) = algo_high_with(&d_high, &alpha)?;
    let value_low = agent_best_response(inst, &phi_low)?.1.principal_value;
    let value_high = agent_best_response(inst, &phi_high)?.1.principal_value;
    let (scheme, chosen) = match value_low.cmp(&value_high) {
        Ordering::Less => (phi_high, "high"),
        _ => (phi_low, "low"),
    };
    Ok((
        scheme.with_provenance(Provenance::Semi),
        SemiPlan {
            alpha,
            sqrt_alpha_upper,
            low_groups,
            high_groups,
            low,
            high,
            value_low,
            value_high,
            chosen,
        },
    ))
}
