//! Prefix-rewriting partial isometries on sequence space, the *-algebra they
//! generate, an online generator registry with avoidance conditions, and
//! checkable witnesses for ideal membership and vanishing of states.
//!
//! Points of the space are sequences of labels; a tuple `a` names the
//! cylinder of sequences beginning with `a` and the projection `P_a` onto
//! it. `V(a;b)` rewrites the prefix `a` into `b`.

pub mod certificate;
pub mod expr;
pub mod fragment;
pub mod monomials;
pub mod oracle;
pub mod polynomials;
pub mod scalar;
pub mod selftest;
pub mod session;
pub mod theorems;
pub mod tuples;

pub use expr::{parse, parse_polynomial, Expr, ParseError};
pub use fragment::FragmentMatrix;
pub use monomials::{normal_form, Monomial};
pub use oracle::{GeneratorRecord, ProtectionRecord, Record, Registry};
pub use polynomials::{DiagonalState, Polynomial};
pub use scalar::Scalar;
pub use session::Session;
pub use tuples::{Compatibility, Label, SequenceDesc, Tuple};
