//! Exact computational toolkit for the finite-group, cocycle and matrix layer
//! of fixed-point classification on moduli of principal bundles.
//!
//! Everything here is exact: scalars live in cyclotomic fields, groups are
//! finite abelian groups in invariant-factor form, and every verification is
//! an equality of canonical representations. There are no tolerances anywhere.

pub mod abelian;
pub mod clifford;
pub mod cyclotomic;
pub mod extensions;
pub mod gl_fixed;
pub mod report;
pub mod sp_fixed;

pub use abelian::{Character, FinAbGroup, GroupElem, Pairing, Subgroup};
pub use cyclotomic::{CycMatrix, CycNum};

/// Toolkit-wide version tag used in serialized reports.
pub const SCHEMA: &str = "prym-kit/1";
