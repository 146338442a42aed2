//! Sparse symmetric factorization and the shift-invert Lanczos solver.

mod cholesky;
mod lanczos;

pub use cholesky::{factorize, reverse_cuthill_mckee, Factorization};
pub use lanczos::{
    factorize_shifted, lowest_eigenpairs, lowest_eigenpairs_with, solve_generalized, EigenOptions, EigenResult,
};
