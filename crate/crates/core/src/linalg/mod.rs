//! Sparse symmetric storage, bandwidth orderings and banded LDLᵀ.

mod banded;
mod ordering;
mod sparse;

pub use banded::{BandedLdl, ZeroPivot, PIVOT_RELATIVE_TOL};
pub use ordering::{best_ordering, coordinate_order, reverse_cuthill_mckee, Permutation};
pub use sparse::SymSparse;

use crate::model::Position;

/// Factors a symmetric positive definite matrix under the best available
/// bandwidth ordering.
pub fn factor_spd(a: &SymSparse, positions: Option<&[Position]>) -> Result<BandedLdl, ZeroPivot> {
    BandedLdl::factor(a, best_ordering(&a.pattern(), positions))
}
