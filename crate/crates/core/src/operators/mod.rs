//! Matrix-free operator algebra: linear maps with adjoints, affine maps, affine
//! subspaces with their orthogonal projections, the orthonormal 2-D DCT, and
//! power iteration for `‖A*A‖`.
//!
//! All operators are immutable after construction; clones share their data.

mod affine;
mod dct;
mod linear;
mod power;
mod subspace;

pub(crate) use subspace::null_space_of_rows;

pub use affine::AffineMap;
pub use dct::{dct2d_map, dct_matrix, Dct2d};
pub use linear::{row_sampling_map, LinearMap, MapKind};
pub use power::{operator_norm_sq, power_iteration, PowerEstimate};
pub use subspace::{project_affine, AffineSubspace, BasisForm, Representation};

/// Componentwise `max(x, 0)`: the projection onto the nonnegative orthant.
pub fn project_orthant(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}
