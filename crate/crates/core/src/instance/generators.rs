use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{validate, Instance, Meta, OptionOutcome, RoundDistribution};
use crate::error::{Error, Result};
use crate::rational::{format_rational, frac, int, one, pow, sqrt_floor_decimal, zero, Rational};

fn meta(generator: &str, params: &[(&str, String)]) -> Meta {
    Meta {
        generator: Some(generator.to_string()),
        params: params
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect::<BTreeMap<_, _>>(),
        ..Meta::default()
    }
}

fn iid(n: usize, round: Vec<OptionOutcome>) -> Vec<RoundDistribution> {
    (0..n).map(|_| RoundDistribution::new(round.clone())).collect()
}

/// The two-round example instance.
pub fn gen_table1() -> Instance {
    let o = |p, a, b| OptionOutcome::new(p, int(a), int(b));
    Instance::new(vec![
        RoundDistribution::new(vec![o(frac(3, 4), 3, 1), o(frac(1, 4), 3, 8)]),
        RoundDistribution::new(vec![o(frac(3, 4), 2, 4), o(frac(1, 4), 16, 4)]),
    ])
    .with_meta(meta("table1", &[]))
}

/// IID family where agent utilities grow as `n^(4j)`: `n` options worth 1
/// to the principal with probability `1/n^2` each, plus `n` worthless ones.
pub fn gen_thm2(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::bad_param("n", "must be at least 2"));
    }
    let nr = int(n as i64);
    let n2 = &nr * &nr;
    let base = pow(&nr, 4);
    let mut round = Vec::with_capacity(2 * n);
    for j in 1..=n as u32 {
        round.push(OptionOutcome::new(n2.recip(), pow(&base, j), one()));
    }
    let p_low = nr.recip() - n2.recip();
    for j in 1..=n as u32 {
        round.push(OptionOutcome::new(p_low.clone(), pow(&base, j), zero()));
    }
    let inst = Instance::new(iid(n, round)).with_meta(meta("thm2", &[("n", n.to_string())]));
    validate(&inst)?;
    Ok(inst)
}

/// Two options per round; the valuable one switches its agent utility from 1
/// to `alpha` at round `istar` (1-based).
pub fn gen_oblivious_lb(n: usize, alpha: &Rational, istar: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::bad_param("n", "must be at least 2"));
    }
    if *alpha < one() || *alpha > int(n as i64) {
        return Err(Error::bad_param("alpha", "must lie in [1, n]"));
    }
    if istar < 1 || istar > n {
        return Err(Error::bad_param("istar", "must lie in [1, n]"));
    }
    let inv = frac(1, n as i64);
    let rounds = (1..=n)
        .map(|i| {
            let x = if i < istar { one() } else { alpha.clone() };
            RoundDistribution::new(vec![
                OptionOutcome::new(one() - &inv, one(), zero()),
                OptionOutcome::new(inv.clone(), x, one()),
            ])
        })
        .collect();
    let inst = Instance::new(rounds).with_meta(meta(
        "oblivious-lb",
        &[
            ("n", n.to_string()),
            ("alpha", format_rational(alpha)),
            ("istar", istar.to_string()),
        ],
    ));
    validate(&inst)?;
    Ok(inst)
}

/// IID three-option family whose two valuable options share `b = 1`.
/// `sqrt(alpha)` is replaced by `floor(sqrt(alpha) * 10^6) / 10^6`, recorded
/// in the metadata.
pub fn gen_semioblivious_lb(n: usize, alpha: &Rational) -> Result<Instance> {
    if n < 2 {
        return Err(Error::bad_param("n", "must be at least 2"));
    }
    let nr = int(n as i64);
    if *alpha < int(2) || *alpha > &nr * &nr {
        return Err(Error::bad_param("alpha", "must lie in [2, n^2]"));
    }
    let r = sqrt_floor_decimal(alpha, 6);
    let p3 = (&nr * &r).recip();
    let p2 = nr.recip() - &p3;
    let round = vec![
        OptionOutcome::new(one() - nr.recip(), one(), zero()),
        OptionOutcome::new(p2, int(2), one()),
        OptionOutcome::new(p3, alpha.clone(), one()),
    ];
    let mut m = meta("semi-lb", &[("n", n.to_string()), ("alpha", format_rational(alpha))]);
    m.sqrt_alpha_approx = Some(format_rational(&r));
    let inst = Instance::new(iid(n, round)).with_meta(m);
    validate(&inst)?;
    Ok(inst)
}

/// IID family with agent utilities in {0, 1}.
pub fn gen_zero_agent_lb(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::bad_param("n", "must be at least 2"));
    }
    let nr = int(n as i64);
    let n2 = &nr * &nr;
    let round = vec![
        OptionOutcome::new(one() - nr.recip(), zero(), zero()),
        OptionOutcome::new(nr.recip() - n2.recip(), zero(), one()),
        OptionOutcome::new(n2.recip(), one(), one()),
    ];
    let inst = Instance::new(iid(n, round)).with_meta(meta("zero-lb", &[("n", n.to_string())]));
    validate(&inst)?;
    Ok(inst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityLaw {
    /// `k / d` with `d` in 1..=4, uniform over `[0, scale]`.
    Uniform,
    /// `2^e * m / 16`, spreading values over `[1, scale]` multiplicatively.
    LogUniform,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomParams {
    pub n: usize,
    pub max_support: usize,
    pub utility_scale: u64,
    pub seed: u64,
    pub positive_a: bool,
    pub positive_b: bool,
    pub law: UtilityLaw,
}

impl RandomParams {
    pub fn new(n: usize, max_support: usize, utility_scale: u64, seed: u64) -> Self {
        Self {
            n,
            max_support,
            utility_scale,
            seed,
            positive_a: false,
            positive_b: false,
            law: UtilityLaw::Uniform,
        }
    }

    pub fn positive(mut self) -> Self {
        self.positive_a = true;
        self.positive_b = true;
        self
    }

    pub fn positive_agent(mut self) -> Self {
        self.positive_a = true;
        self
    }

    pub fn law(mut self, law: UtilityLaw) -> Self {
        self.law = law;
        self
    }
}

const MAX_DENOMINATOR: usize = 64;

/// Seeded random instance with default utility law (zeros allowed).
pub fn gen_random(n: usize, max_support: usize, utility_scale: u64, seed: u64) -> Result<Instance> {
    gen_random_with(&RandomParams::new(n, max_support, utility_scale, seed))
}

pub fn gen_random_with(params: &RandomParams) -> Result<Instance> {
    let RandomParams {
        n,
        max_support,
        utility_scale,
        seed,
        positive_a,
        positive_b,
        law,
    } = *params;
    if n < 1 {
        return Err(Error::bad_param("n", "must be at least 1"));
    }
    if !(1..=MAX_DENOMINATOR).contains(&max_support) {
        return Err(Error::bad_param("support", "must lie in [1, 64]"));
    }
    if utility_scale < 1 {
        return Err(Error::bad_param("scale", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = Vec::with_capacity(n);
    for _ in 0..n {
        let s = rng.gen_range(1..=max_support);
        let probs = random_masses(&mut rng, s);
        let options = probs
            .into_iter()
            .map(|p| {
                let a = random_utility(&mut rng, utility_scale, positive_a, law);
                let b = random_utility(&mut rng, utility_scale, positive_b, law);
                OptionOutcome::new(p, a, b)
            })
            .collect();
        rounds.push(RoundDistribution::new(options));
    }
    let mut m = meta(
        "random",
        &[
            ("n", n.to_string()),
            ("support", max_support.to_string()),
            ("scale", utility_scale.to_string()),
        ],
    );
    if positive_a {
        m.params.insert("positive_a".into(), "true".into());
    }
    if positive_b {
        m.params.insert("positive_b".into(), "true".into());
    }
    if law == UtilityLaw::LogUniform {
        m.params.insert("law".into(), "log".into());
    }
    m.seed = Some(seed);
    let inst = Instance::new(rounds).with_meta(m);
    validate(&inst)?;
    Ok(inst)
}

/// `s` strictly positive masses over a common denominator `d <= 64`; the last
/// one absorbs the remainder so the round sums to exactly 1.
fn random_masses(rng: &mut ChaCha8Rng, s: usize) -> Vec<Rational> {
    let d = rng.gen_range(s..=MAX_DENOMINATOR);
    let mut cuts: Vec<usize> = (1..d).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(s - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(s);
    let mut prev = 0;
    let mut assigned = Rational::zero();
    for c in cuts {
        let p = frac((c - prev) as i64, d as i64);
        assigned += &p;
        out.push(p);
        prev = c;
    }
    out.push(Rational::one() - assigned);
    out
}

fn random_utility(rng: &mut ChaCha8Rng, scale: u64, positive: bool, law: UtilityLaw) -> Rational {
    match law {
        UtilityLaw::Uniform => {
            let d = rng.gen_range(1..=4u64);
            let lo = u64::from(positive);
            let k = rng.gen_range(lo..=scale * d);
            frac(k as i64, d as i64)
        }
        UtilityLaw::LogUniform => {
            if !positive && rng.gen_bool(0.1) {
                return zero();
            }
            let top = 63 - scale.leading_zeros() as i64;
            let e = rng.gen_range(0..=top);
            let m = rng.gen_range(16..32i64);
            let v = crate::rational::pow2(e) * frac(m, 16);
            let cap = int(scale as i64);
            if v > cap {
                cap
            } else {
                v
            }
        }
    }
}
