//! Verification toolkit for palindromic repdigit concatenations among the
//! k-generalized Pell numbers.

pub mod algebraic;
pub mod bounds;
pub mod cli;
pub mod digits;
pub mod error;
pub mod lattice;
pub mod pipeline;
pub mod sequences;

/// Arbitrary-size integer used for sequence terms, palindromes and lattice entries.
pub type BigCount = rug::Integer;

pub use error::{Error, Result};
