//! Matrix-free all-at-once solvers for evolutionary PDEs.
//!
//! The block lower-triangular Toeplitz system `T u = b` collecting every time
//! step of a linear multistep discretization is symmetrized by the block flip
//! `Y` and solved with preconditioned MINRES. Spatial operators are assumed to
//! be diagonalized by the discrete sine transform, so every operator here is
//! applied in `O(nm log nm)` without assembling a matrix.

pub mod analysis;
pub mod block;
pub mod discretize;
pub mod error;
pub mod krylov;
pub mod precond;
pub mod toeplitz;
pub mod transforms;

pub use block::BlockVector;
pub use discretize::{
    build_laplacian_1d, build_laplacian_2d, build_rhs, make_stencil, Equation, Forcing, InitialData, ProblemSpec,
    Scheme, SpectralSpatialOperator, TimeStencil,
};
pub use error::{Error, Result};
pub use krylov::{cgne, minres_all_at_once, ResidualNorm, SolveOptions, SolveReport};
pub use precond::{build_circulant, build_tau, PreconditionerKind, SpectralPreconditioner};
pub use toeplitz::{AllAtOnceOperator, ApplyPath, DEFAULT_DENSE_GUARD};
pub use transforms::{SpaceShape, TransformPlan};
