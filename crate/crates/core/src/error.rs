use thiserror::Error;

use crate::amalgamation::AmalgamHypotheses;
use crate::set::Ordinal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("`*` needs nonempty operands")]
    EmptyStarOperand,
    #[error("`*` needs max x < max y, got max x = {left}, max y = {right}")]
    StarOrder { left: Ordinal, right: Ordinal },
    #[error("duplicate element {0}")]
    DuplicateElement(Ordinal),
    #[error("elements out of order: {0} before {1}")]
    Unsorted(Ordinal, Ordinal),
    #[error("ordinal {value} is outside the universe of size {universe}")]
    OutOfUniverse { value: Ordinal, universe: u32 },
    #[error("pair ({0}, {1}) is not a pair of distinct ordinals")]
    DegeneratePair(Ordinal, Ordinal),
    #[error("value of pair ({lo}, {hi}) contains {element}, which is not below {lo}")]
    ValueNotBelowMin { lo: Ordinal, hi: Ordinal, element: Ordinal },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("amalgamation hypotheses fail: {0}")]
    Hypotheses(Box<AmalgamHypotheses>),
    #[error("internal invariant fault: {0}")]
    InvariantFault(String),
    #[error("universe {universe} exceeds the oracle bound {bound}")]
    BoundExceeded { universe: u32, bound: u32 },
    #[error("element {position} of the chain does not extend its predecessor")]
    NotAChain { position: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
