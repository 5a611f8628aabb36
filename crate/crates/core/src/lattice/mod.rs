//! Real lattice machinery.
//!
//! Every basis in this module follows the row-vector convention: the rows of
//! the generator are the basis vectors and a lattice point is `x = v * G` for
//! an integer row vector `v`.

mod basis;
mod enumerate;
mod measures;
mod reduce;

pub use basis::{complex_to_real, LatticeBasis};
pub use enumerate::{
    enumerate_short_vectors, enumerate_short_vectors_with_budget, successive_minima,
    successive_minima_with_budget, ShortVectorReport, DEFAULT_NODE_BUDGET,
};
pub use measures::{coding_gain, dual_basis, min_product_distance, product_distance_search, ProductDistance};
pub use reduce::{gauss_reduce, lll_reduce, lll_reduce_default, Reduced, DEFAULT_LLL_DELTA};

pub(crate) use basis::int_det;
