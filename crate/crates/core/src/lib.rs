//! Exact computation of delegated online search: a principal commits to an
//! acceptance scheme, an agent observes options round by round and decides
//! when to propose. All arithmetic is over arbitrary-precision rationals.

pub mod benchmarks;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod extensions;
pub mod instance;
pub mod rational;
pub mod schemes;

pub use error::{Error, Result};
pub use rational::Rational;
