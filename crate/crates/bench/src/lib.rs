//! Problem fixtures shared by the benchmarks.

use pintau_core::{build_rhs, make_stencil, AllAtOnceOperator, BlockVector, ProblemSpec, Result, Scheme};

/// Operator and right-hand side of a default reference problem.
pub fn fixture(scheme: Scheme, dim: usize, n: usize, m1: usize) -> Result<(AllAtOnceOperator, BlockVector)> {
    let spec = ProblemSpec::new(scheme, dim, n, m1);
    let op = AllAtOnceOperator::new(n, spec.build_spatial()?, make_stencil(&spec)?)?;
    let rhs = build_rhs(&spec, op.spatial(), op.stencil())?;
    Ok((op, rhs))
}
