//! Dyadic agent-utility classes packed into bins so that the agent proposes
//! the first realized option of the chosen bin.

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::restrict::{restrict_options, RestrictResult};
use crate::dynamics::ActionScheme;
use crate::error::{Error, Result};
use crate::instance::{alpha_bound, Instance, OptionRef};
use crate::rational::{ceil_log2, floor_log2, frac, pow2, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bin {
    /// Class index `s` that opened the bin; `None` for bins not built by the
    /// class sweep (single-round and zero-utility bins).
    pub start_class: Option<i64>,
    /// Class indices added to the bin, descending.
    pub classes: Vec<i64>,
    pub members: Vec<OptionRef>,
    #[serde(with = "serde_str")]
    pub mass: Rational,
    #[serde(with = "serde_str")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinPlan {
    /// Agent-utility spread after dividing by the minimum.
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    pub c: i64,
    /// `classes[k - 1]` holds class `C_k`.
    pub classes: Vec<Vec<OptionRef>>,
    pub bins: Vec<Bin>,
    pub chosen: usize,
    /// Index of the zero-utility bin, if one was built.
    pub zero_bin: Option<usize>,
    pub single_round: bool,
    pub degenerate: bool,
    pub restrict: Option<RestrictResult>,
}

impl BinPlan {
    /// Number of bins opened, at least one.
    pub fn num_bins(&self) -> usize {
        self.bins.len().max(1)
    }

    pub fn chosen_bin(&self) -> Option<&Bin> {
        self.bins.get(self.chosen)
    }

    fn degenerate(alpha: Rational, restrict: Option<RestrictResult>) -> Self {
        BinPlan {
            alpha,
            c: 0,
            classes: Vec::new(),
            bins: Vec::new(),
            chosen: 0,
            zero_bin: None,
            single_round: false,
            degenerate: true,
            restrict,
        }
    }
}

fn make_bin(inst: &Instance, start_class: Option<i64>, classes: Vec<i64>, mut members: Vec<OptionRef>) -> Bin {
    members.sort();
    let mass = members.iter().map(|&r| &inst.option(r).p).sum();
    let value = members.iter().map(|&r| &inst.option(r).p * &inst.option(r).b).sum();
    Bin {
        start_class,
        classes,
        members,
        mass,
        value,
    }
}

/// Class index of a rescaled agent utility `a >= 1`: `C_k` holds
/// `[2^{k-1}, 2^k)`, with the top class `c` closed.
fn class_of(a: &Rational, c: i64) -> i64 {
    (floor_log2(a) + 1).min(c)
}

/// Classes and bins over `members`, whose rescaled utilities lie in `[1, alpha]`.
fn pack(
    inst: &Instance,
    members: &[OptionRef],
    min_a: &Rational,
    alpha: &Rational,
) -> (i64, Vec<Vec<OptionRef>>, Vec<Bin>) {
    let c = ceil_log2(alpha).max(1);
    let mut classes: Vec<Vec<OptionRef>> = vec![Vec::new(); c as usize];
    for &r in members {
        let k = class_of(&(&inst.option(r).a / min_a), c);
        classes[(k - 1) as usize].push(r);
    }
    let class_mass: Vec<Rational> = classes
        .iter()
        .map(|cl| cl.iter().map(|&r| &inst.option(r).p).sum())
        .collect();
    let mut bins: Vec<(i64, Vec<i64>, Rational)> = vec![(c, Vec::new(), Rational::zero())];
    let mut s = c;
    for k in (1..=c).rev() {
        let current = bins.last().expect("one bin is open");
        let mass = &current.2 + &class_mass[(k - 1) as usize];
        if pow2(k - 1) < pow2(s) * &mass {
            s = k;
            bins.push((k, Vec::new(), Rational::zero()));
        }
        let open = bins.last_mut().expect("one bin is open");
        open.1.push(k);
        open.2 += &class_mass[(k - 1) as usize];
    }
    let bins = bins
        .into_iter()
        .map(|(start, ks, _)| {
            let members = ks
                .iter()
                .flat_map(|&k| classes[(k - 1) as usize].iter().copied())
                .collect();
            make_bin(inst, Some(start), ks, members)
        })
        .collect();
    (c, classes, bins)
}

fn first_max(bins: &[Bin]) -> usize {
    let mut best = 0;
    for (i, b) in bins.iter().enumerate() {
        if b.value > bins[best].value {
            best = i;
        }
    }
    best
}

fn scheme_for(inst: &Instance, plan: &BinPlan) -> ActionScheme {
    match plan.chosen_bin() {
        Some(bin) if !plan.degenerate => ActionScheme::accepting(&inst.shape(), &bin.members),
        _ => ActionScheme::zeros(&inst.shape()),
    }
}

fn all_b_zero(inst: &Instance) -> bool {
    inst.options().all(|o| o.b.is_zero())
}

/// Requires every agent utility to be positive.
pub fn binning_scheme(inst: &Instance) -> Result<(ActionScheme, BinPlan)> {
    if inst.options().any(|o| !o.a.is_positive()) {
        return Err(Error::ZeroAgentUtility);
    }
    let alpha = alpha_bound(inst, false)?;
    let min_a = inst.options().map(|o| &o.a).min().expect("validated").clone();
    if all_b_zero(inst) {
        return Ok((ActionScheme::zeros(&inst.shape()), BinPlan::degenerate(alpha, None)));
    }
    let restrict = restrict_options(inst, &frac(1, 2))?;
    if restrict.q.is_empty() {
        return Ok((
            ActionScheme::zeros(&inst.shape()),
            BinPlan::degenerate(alpha, Some(restrict)),
        ));
    }
    let plan = if restrict.single_round {
        let c = ceil_log2(&alpha).max(1);
        BinPlan {
            alpha,
            c,
            classes: Vec::new(),
            bins: vec![make_bin(inst, None, Vec::new(), restrict.q.clone())],
            chosen: 0,
            zero_bin: None,
            single_round: true,
            degenerate: false,
            restrict: Some(restrict),
        }
    } else {
        let (c, classes, bins) = pack(inst, &restrict.q, &min_a, &alpha);
        BinPlan {
            alpha,
            c,
            classes,
            chosen: first_max(&bins),
            bins,
            zero_bin: None,
            single_round: false,
            degenerate: false,
            restrict: Some(restrict),
        }
    };
    Ok((scheme_for(inst, &plan), plan))
}

/// Variant tolerating zero agent utilities: members of `Q` with `a = 0` form
/// an extra bin competing with the others.
pub fn binning_scheme_z(inst: &Instance) -> Result<(ActionScheme, BinPlan)> {
    let alpha = alpha_bound(inst, true)?;
    let min_a = inst
        .options()
        .map(|o| &o.a)
        .filter(|a| a.is_positive())
        .min()
        .ok_or(Error::NoPositiveUtility)?
        .clone();
    if all_b_zero(inst) {
        return Ok((ActionScheme::zeros(&inst.shape()), BinPlan::degenerate(alpha, None)));
    }
    let restrict = restrict_options(inst, &frac(1, 2))?;
    if restrict.q.is_empty() {
        return Ok((
            ActionScheme::zeros(&inst.shape()),
            BinPlan::degenerate(alpha, Some(restrict)),
        ));
    }
    let plan = if restrict.single_round {
        // The zero-utility bin is a subset of the single bin, so it never
        // wins a strict comparison; it is kept for the bin count.
        let c = ceil_log2(&alpha).max(1);
        let zero: Vec<OptionRef> = restrict
            .q
            .iter()
            .copied()
            .filter(|&r| inst.option(r).a.is_zero())
            .collect();
        let mut bins = vec![make_bin(inst, None, Vec::new(), restrict.q.clone())];
        let zero_bin = if zero.is_empty() {
            None
        } else {
            bins.push(make_bin(inst, None, Vec::new(), zero));
            Some(1)
        };
        BinPlan {
            alpha,
            c,
            classes: Vec::new(),
            chosen: first_max(&bins),
            bins,
            zero_bin,
            single_round: true,
            degenerate: false,
            restrict: Some(restrict),
        }
    } else {
        let (positive, zero): (Vec<OptionRef>, Vec<OptionRef>) =
            restrict.q.iter().partition(|&&r| inst.option(r).a.is_positive());
        let (c, classes, mut bins) = if positive.is_empty() {
            (ceil_log2(&alpha).max(1), Vec::new(), Vec::new())
        } else {
            pack(inst, &positive, &min_a, &alpha)
        };
        let zero_bin = if zero.is_empty() {
            None
        } else {
            bins.push(make_bin(inst, None, Vec::new(), zero));
            Some(bins.len() - 1)
        };
        BinPlan {
            alpha,
            c,
            classes,
            chosen: first_max(&bins),
            bins,
            zero_bin,
            single_round: false,
            degenerate: false,
            restrict: Some(restrict),
        }
    };
    Ok((scheme_for(inst, &plan), plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::agent_best_response;
    use crate::instance::{gen_table1, gen_zero_agent_lb};
    use crate::rational::int;

    #[test]
    fn table1_single_round() {
        let t = gen_table1();
        let (s, plan) = binning_scheme(&t).unwrap();
        assert!(plan.single_round);
        assert_eq!(plan.bins.len(), 1);
        assert_eq!(plan.bins[0].members, vec![OptionRef::new(1, 0), OptionRef::new(1, 1)]);
        let (_, ev) = agent_best_response(&t, &s).unwrap();
        assert_eq!(ev.principal_value, int(4));
    }

    #[test]
    fn one_dyadic_class_gives_one_bin() {
        let inst = Instance::from_triples(vec![
            vec![(frac(1, 8), int(4), int(9)), (frac(7, 8), int(5), int(0))],
            vec![(frac(1, 8), int(6), int(9)), (frac(7, 8), int(7), int(0))],
        ])
        .unwrap();
        let (s, plan) = binning_scheme(&inst).unwrap();
        assert!(!plan.single_round);
        assert_eq!(plan.num_bins(), 1);
        assert_eq!(s.accepted(), vec![OptionRef::new(0, 0), OptionRef::new(1, 0)]);
    }

    #[test]
    fn rejects_zero_agent_utility() {
        let inst = gen_zero_agent_lb(3).unwrap();
        assert_eq!(binning_scheme(&inst).unwrap_err(), Error::ZeroAgentUtility);
    }

    #[test]
    fn zero_bin_collects_zero_agent_options() {
        let inst = gen_zero_agent_lb(3).unwrap();
        let (_, plan) = binning_scheme_z(&inst).unwrap();
        let q = &plan.restrict.as_ref().unwrap().q;
        let zero_in_q: Vec<OptionRef> = q.iter().copied().filter(|&r| inst.option(r).a.is_zero()).collect();
        assert!(!zero_in_q.is_empty());
        let zb = plan.zero_bin.expect("zero bin");
        assert_eq!(plan.bins[zb].members, zero_in_q);
        assert!(zero_in_q.iter().all(|&r| inst.option(r).b == int(1)));
    }

    #[test]
    fn z_variant_matches_without_zero_utilities() {
        let t = gen_table1();
        assert_eq!(binning_scheme(&t).unwrap(), binning_scheme_z(&t).unwrap());
    }

    #[test]
    fn empty_bins_can_open() {
        // Only classes 5 and 1 carry mass. The guard already fails at the
        // empty class 2, which opens a bin that class 1 immediately closes.
        let inst = Instance::from_triples(vec![
            vec![(frac(1, 10), int(17), int(5)), (frac(9, 10), int(1), int(0))],
            vec![(frac(3, 10), int(1), int(5)), (frac(7, 10), int(1), int(0))],
        ])
        .unwrap();
        let (_, plan) = binning_scheme(&inst).unwrap();
        assert_eq!(plan.c, 5);
        assert!(plan.bins.iter().any(|b| b.members.is_empty()));
        assert!(plan.bins.iter().all(|b| b.start_class.is_some()));
    }
}
