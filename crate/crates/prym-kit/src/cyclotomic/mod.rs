//! Exact arithmetic in cyclotomic fields, matrices over them, and the
//! weight-space structure analysis used by the classification layers.

pub(crate) mod poly;

mod matrix;
mod num;
pub mod weights;

pub use matrix::CycMatrix;
pub use num::{CycError, CycNum};
pub use poly::euler_phi;
pub use weights::{analyze_permutation_matrix, PermMatrixStruct, WeightBlock, WeightDecomposition};
