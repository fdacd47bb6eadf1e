//! Exact simultaneous Diophantine approximation.
//!
//! Given an `n x m` matrix `A` of rationals and an accuracy target `eps`,
//! this crate builds the block lattice `[[I_n, A], [0, c I_m]]`, reduces it
//! with an LLL implementation over arbitrary-precision rationals, and reads
//! integer tuples `(q, p)` with small `|p_i + (A q)_i|` off the reduced
//! basis. Iterating the reduction with a shrinking scale trades the size of
//! `q` against the error in a controlled way, and every claimed inequality
//! is re-checked exactly and recorded as a [`certify::Certificate`].
//!
//! There is no floating point anywhere: fractional powers such as
//! `beta^(3/4)` are kept symbolic ([`exactnum::FracPower`]) and compared by
//! cross-powering, and the one genuinely irrational quantity (the lattice
//! scale `c = gamma^(1/4m)`) enters only through a certified dyadic lower
//! bound whose slack is itself accounted for in the certificates.

// The reduction and orthogonalization loops update several arrays at
// shifted indices simultaneously; indexed form mirrors the recurrences.
#![allow(clippy::needless_range_loop)]

pub mod certify;
pub mod error;
pub mod exactnum;
pub mod illl;
pub mod lattice;
pub mod oracle;
pub mod sda;

pub use error::{Error, Result};
pub use exactnum::{FracPower, Rat};
