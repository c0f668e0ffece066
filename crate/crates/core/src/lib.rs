//! Exact symbolic engine for the W-algebra attached to the centralizer of a
//! nilpotent matrix in gl_N.
//!
//! The input is a pyramid (the Jordan type of the nilpotent, rows ascending).
//! From it the crate builds, over exact rationals with a formal level k:
//!
//! - the centralizer Lie algebra with its invariant form ([`pyramid`],
//!   [`scalar`]);
//! - the vacuum module of the affine algebra tensored with a free-fermion
//!   Fock space, as a PBW rewriting engine ([`statespace`]);
//! - the cohomology differential, the dressed generator fields, and the
//!   operator-identity verifier ([`brst`]);
//! - the W-algebra generators via a noncommutative column determinant, their
//!   closedness certificates, leading terms, and the graded dimension count
//!   ([`walgebra`]);
//! - the projection onto the diagonal Heisenberg subalgebra, vertex-algebra
//!   n-th products, the injectivity rank check, and the critical-level
//!   commutativity check ([`miura`]).
//!
//! Everything is symbolic in k unless a routine explicitly evaluates at a
//! numeric level; no floating point is used anywhere.

pub mod brst;
pub mod miura;
pub mod pyramid;
pub mod scalar;
pub mod statespace;
pub mod walgebra;

use thiserror::Error;

/// Errors from parsing the JSON wire forms of scalars, monomials and states.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("malformed input: {0}")]
    Shape(&'static str),
}
