//! Exact arithmetic: rationals, partitions, tagged polynomials and weighted
//! truncated power series.

pub mod partition;
pub mod poly;
pub mod rational;
pub mod series;

use thiserror::Error;

pub use partition::{z_lambda, Partition};
pub use poly::{GenusPolynomial, Var};
pub use rational::{factorial, factorial_rat, int, parse_rational, rat, Rational};
pub use series::{Coeff, Monomial, PolySeries, RatSeries, Symbol, TruncatedSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactMathError {
    #[error("series has a nonzero constant term")]
    NonZeroConstant,
    #[error("series constant term is not 1")]
    ConstantNotOne,
    #[error("substituting {symbol} by a series of minimum weight {min_weight} breaks truncation")]
    UnsoundSubstitution { symbol: String, min_weight: u32 },
    #[error("polynomial variables differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Var, right: Var },
    #[error("parse error: {0}")]
    Parse(String),
}
