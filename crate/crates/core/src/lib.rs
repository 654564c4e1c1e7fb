//! Width-independent first-order solvers for alpha-fair packing and
//! beta-fair covering problems over sparse nonnegative matrices.
//!
//! ```text
//! packing:   maximize  f_alpha(x)  subject to  A x <= 1,   x >= 0
//! covering:  minimize  g_beta(y)   subject to  A^T y >= 1, y >= 0
//! ```
//!
//! The packing solver keeps every iterate feasible, so it can be stopped at
//! any point and still return a valid allocation. The covering solver runs
//! the `alpha = 0` packing machinery on the Lagrangian dual and averages the
//! implied dual vectors.

// Comparisons are written as `!(v <= bound)` on purpose so that NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod error;
pub mod matrix;
pub mod mtx;
pub mod oracle;
pub mod packing;
pub mod problem;
pub mod regularization;
pub mod rounds;
pub mod trace;

pub use covering::{covering_residual, solve_covering, CoveringSolution};
pub use error::{Error, Result};
pub use matrix::SparseNonnegMatrix;
pub use mtx::{read_matrix_market, write_matrix_market};
pub use packing::{feasibility_report, solve_packing, PackingSolution};
pub use problem::{
    constraint_loads, f_alpha_value, g_beta_value, optimum_bounds, standardize,
    standardize_triplets, transform, transform_inverse, CoveringInstance, Instance, Mode,
    PackingInstance, ScalingRecord, SolverConfig,
};
pub use rounds::{run_distributed, DistributedSolution, LocalityAudit};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/regularization.md")]
    mod regularization {}
    #[doc = include_str!("../../../book/src/packing.md")]
    mod packing {}
    #[doc = include_str!("../../../book/src/covering.md")]
    mod covering {}
    #[doc = include_str!("../../../book/src/rounds.md")]
    mod rounds {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
