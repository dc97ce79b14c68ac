use crate::dynamics::ActionScheme;
use crate::instance::Instance;

/// Accepts every option of the round with the highest expected principal
/// utility, the earliest such round on ties. Returns the scheme and the round.
pub fn best_single_round(inst: &Instance) -> (ActionScheme, usize) {
    let mut best = 0;
    let mut best_value = inst.rounds[0].expected_b();
    for (i, r) in inst.rounds.iter().enumerate().skip(1) {
        let v = r.expected_b();
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    let mut s = ActionScheme::zeros(&inst.shape());
    for x in &mut s.phi[best] {
        *x = crate::rational::one();
    }
    (s, best)
}

pub fn accept_all(inst: &Instance) -> ActionScheme {
    ActionScheme::ones(&inst.shape())
}
