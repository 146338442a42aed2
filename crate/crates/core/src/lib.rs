//! Robin eigenvalues of the Laplacian in the exterior of a convex polygon.
//!
//! The crate bundles the closed-form model spectra that govern the strong
//! coupling asymptotics, discrete checks of the underlying inequalities, and a
//! finite element pipeline (mesh, assembly, shift-invert Lanczos) used to
//! compute the eigenvalues themselves and compare them with the predictions.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod mesh;
pub mod sparse;
pub mod variational;

pub use error::{Error, Result};
pub use geometry::{decompose, ConvexPolygon, Decomposition, Region, Sector, SideFrame, Vec2};
pub use model::{
    bracket, interval_spectrum, merged_spectrum, robin_halfline_groundstate, Bracket, HalfLineRobin,
    ModeId, ModelSpectrum, SpectrumEntry, SpectrumKind,
};
pub use eigen::{lowest_eigenpairs, EigenOptions, EigenResult};
pub use fem::{assemble, rayleigh, DiscreteForm};
pub use harness::{
    check_brackets, fit_rate, comparison_bound, run_sweep, BcMode, ComparisonInput, RateFit, SweepConfig, SweepReport,
};
pub use mesh::{build_mesh, default_spec, ArtificialBc, EdgeTag, TriangleMesh, TruncationSpec};
pub use sparse::SymmetricSparseMatrix;
