//! Instance builders shared by the integration suites.
#![allow(dead_code)]

use delegation::dynamics::ActionScheme;
use delegation::instance::{gen_random_with, Instance, RandomParams, UtilityLaw};
use delegation::rational::{frac, int};
use delegation::Rational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random instance; `mode` picks the utility regime:
/// 0 unrestricted, 1 all positive, 2 positive agent, 3 log-law positive agent.
pub fn random(n: usize, support: usize, seed: u64, mode: u8) -> Instance {
    let mut p = RandomParams::new(n, support, 12, seed);
    p = match mode % 4 {
        0 => p,
        1 => p.positive(),
        2 => p.positive_agent(),
        _ => {
            p.utility_scale = 1_000_000;
            p.law(UtilityLaw::LogUniform).positive_agent()
        }
    };
    gen_random_with(&p).expect("valid random parameters")
}

/// `φ` drawn from `{0, 1/3, 1/2, 1}` by cycling through `choices`.
pub fn scheme_from_choices(inst: &Instance, choices: &[u8]) -> ActionScheme {
    let levels = [Rational::zero(), frac(1, 3), frac(1, 2), Rational::one()];
    let mut s = ActionScheme::zeros(&inst.shape());
    let mut k = 0;
    for row in &mut s.phi {
        for v in row.iter_mut() {
            *v = levels[choices[k % choices.len()] as usize % 4].clone();
            k += 1;
        }
    }
    s
}

/// Same instance with `b` replaced by `a`.
pub fn agent_as_principal(inst: &Instance) -> Instance {
    Instance::from_triples(
        inst.rounds
            .iter()
            .map(|r| {
                r.options
                    .iter()
                    .map(|o| (o.p.clone(), o.a.clone(), o.a.clone()))
                    .collect()
            })
            .collect(),
    )
    .expect("same masses")
}

/// Squared conditional agent expectation compared with alpha, per
/// (round, b) group of positive mass: `(Σ p a)^2` vs `alpha (Σ p)^2`.
pub fn group_moments(inst: &Instance) -> Vec<(Rational, Rational)> {
    let mut out = Vec::new();
    for r in &inst.rounds {
        let mut bs: Vec<&Rational> = r.options.iter().map(|o| &o.b).collect();
        bs.sort();
        bs.dedup();
        for b in bs {
            let (mut m, mut e) = (Rational::zero(), Rational::zero());
            for o in r.options.iter().filter(|o| &o.b == b) {
                m += &o.p;
                e += &o.p * &o.a;
            }
            if !m.is_zero() {
                out.push((m, e));
            }
        }
    }
    out
}

fn normalize(weights: &[u64]) -> Vec<Rational> {
    let total: u64 = weights.iter().sum();
    weights.iter().map(|&w| frac(w as i64, total as i64)).collect()
}

/// Instance with `min a = 1`, `max a = alpha` and every group's conditional
/// agent expectation strictly below `sqrt(alpha)`. Each round has distinct
/// `b` per group; round 0 hosts the group carrying `a = alpha`, padded with
/// enough `a = 1` mass.
pub fn low_expectation(seed: u64) -> (Instance, Rational) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let alpha = int(rng.gen_range(4..=10_000));
        let n = rng.gen_range(1..=4usize);
        let mut rounds = Vec::new();
        for i in 0..n {
            let groups = rng.gen_range(1..=3usize);
            let mut opts: Vec<(u64, Rational, Rational)> = Vec::new();
            for g in 0..groups {
                let b = int(rng.gen_range(0..=20) * 3 + g as i64);
                if i == 0 && g == 0 {
                    // mean 2 alpha / (alpha + 1) < 2 <= sqrt(alpha)
                    opts.push((1, alpha.clone(), b.clone()));
                    opts.push((alpha.numer().try_into().unwrap_or(u64::MAX), int(1), b));
                } else {
                    let a = int(rng.gen_range(1..=9));
                    opts.push((rng.gen_range(1..=10), a, b));
                }
            }
            let ps = normalize(&opts.iter().map(|o| o.0).collect::<Vec<_>>());
            rounds.push(
                opts.into_iter()
                    .zip(ps)
                    .map(|((_, a, b), p)| (p, a, b))
                    .collect::<Vec<_>>(),
            );
        }
        let inst = Instance::from_triples(rounds).expect("normalized");
        let ok = group_moments(&inst).iter().all(|(m, e)| e * e < &alpha * m * m);
        if ok {
            return (inst, alpha);
        }
    }
}

/// Instance with `min a = 1`, `max a = alpha` and every group's conditional
/// agent expectation at least `sqrt(alpha)`.
pub fn high_expectation(seed: u64) -> (Instance, Rational) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let root = rng.gen_range(2..=100i64);
        let alpha = int(root * root + rng.gen_range(0..root));
        let n = rng.gen_range(1..=4usize);
        let mut rounds = Vec::new();
        for i in 0..n {
            let groups = rng.gen_range(1..=3usize);
            let mut opts: Vec<(u64, Rational, Rational)> = Vec::new();
            for g in 0..groups {
                let b = int(rng.gen_range(0..=20) * 3 + g as i64);
                if i == 0 && g == 0 {
                    opts.push((1, int(1), b.clone()));
                    opts.push((rng.gen_range(2..=5), alpha.clone(), b));
                } else {
                    let hi = alpha.numer().try_into().unwrap_or(i64::MAX);
                    let a = int(rng.gen_range(root + 1..=hi.max(root + 1)));
                    opts.push((rng.gen_range(1..=10), a, b));
                }
            }
            let ps = normalize(&opts.iter().map(|o| o.0).collect::<Vec<_>>());
            rounds.push(
                opts.into_iter()
                    .zip(ps)
                    .map(|((_, a, b), p)| (p, a, b))
                    .collect::<Vec<_>>(),
            );
        }
        let inst = Instance::from_triples(rounds).expect("normalized");
        let ok = group_moments(&inst).iter().all(|(m, e)| e * e >= &alpha * m * m);
        if ok {
            return (inst, alpha);
        }
    }
}
