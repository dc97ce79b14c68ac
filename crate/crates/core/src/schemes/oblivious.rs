use num_traits::One;

use super::restrict::{restrict_options, RestrictResult};
use crate::dynamics::{ActionScheme, Provenance};
use crate::error::{Error, Result};
use crate::instance::RedactedInstance;
use crate::rational::{int, Rational};

/// Accepts the restricted set for budget `1/(2 alpha)`. Reads only what an
/// oblivious principal sees.
pub fn oblivious_scheme(red: &RedactedInstance) -> Result<(ActionScheme, RestrictResult)> {
    if red.alpha_bound < Rational::one() {
        return Err(Error::bad_param("alpha", "bound must be at least 1"));
    }
    let m = (int(2) * &red.alpha_bound).recip();
    let q = restrict_options(red, &m)?;
    let scheme = ActionScheme::accepting(&red.shape(), &q.q).with_provenance(Provenance::Oblivious);
    Ok((scheme, q))
}
