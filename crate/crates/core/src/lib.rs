//! Finite-scale forcing combinatorics for thin-very tall scattered spaces.
//!
//! The crate models, over an explicit finite universe `{0, ..., n-1}`:
//!
//! * conditions `(D, h, i)` of the poset that adds a locally compact scattered
//!   space, its order, isomorphism of conditions and the `δ₂` projection
//!   ([`conditions`]);
//! * the asymmetric amalgamation of a lower condition with an isomorphic
//!   copy, together with a brute-force common-extension oracle
//!   ([`amalgamation`], [`oracle`]);
//! * property Δ and strong property Δ of pair functions, Δ-system
//!   recognition and a search for pair tables ([`delta`]);
//! * the side-condition forcing over a ranked family of sets that adds a pair
//!   function with the strong property Δ ([`side`]);
//! * generic approximations built from descending chains, their
//!   neighborhoods, levels and left-separation ([`space`]).
//!
//! [`gen`] holds seeded random generators for all of the above.

pub mod amalgamation;
pub mod conditions;
pub mod delta;
pub mod error;
pub mod gen;
pub mod oracle;
pub mod pair_table;
pub mod report;
pub mod set;
pub mod side;
pub mod space;

pub use conditions::{
    check_projection, delta2, extends, find_isomorphism, validate_condition, Condition,
    ConditionViolation, Delta2Map, OrderIso,
};
pub use error::{Error, Result};
pub use pair_table::PairTable;
pub use report::ValidationReport;
pub use set::{star, FinSet, Ordinal};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conditions.md")]
    mod conditions {}
    #[doc = include_str!("../../../book/src/amalgamation.md")]
    mod amalgamation {}
    #[doc = include_str!("../../../book/src/strong-delta.md")]
    mod strong_delta {}
    #[doc = include_str!("../../../book/src/side-conditions.md")]
    mod side_conditions {}
    #[doc = include_str!("../../../book/src/generic-space.md")]
    mod generic_space {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
