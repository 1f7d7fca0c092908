//! Dense-scale spectral checks: preconditioned spectra and their ±1 clusters,
//! numerical ranks of correction terms, and comparison of `eig(YT)` with
//! samples of the symbol modulus.

use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::discretize::{SpectralSpatialOperator, TimeStencil};
use crate::error::{check_dim, Error, Result};
use crate::precond::{apply_inverse_normal_into, build_circulant, build_tau, symbol_modulus, SpectralPreconditioner};
use crate::toeplitz::{flip_rows, AllAtOnceOperator};

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub epsilon: f64,
    /// Eigenvalues farther than `epsilon` from both `+1` and `-1`.
    pub outliers: usize,
    /// Eigenvalues with `|λ| < epsilon`.
    pub near_zero: usize,
}

impl SpectrumReport {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, epsilon: f64) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let outliers = eigenvalues
            .iter()
            .filter(|&&l| (l - 1.0).abs().min((l + 1.0).abs()) > epsilon)
            .count();
        let near_zero = eigenvalues.iter().filter(|&&l| l.abs() < epsilon).count();
        Self {
            eigenvalues,
            epsilon,
            outliers,
            near_zero,
        }
    }

    pub fn clustered(&self) -> usize {
        self.eigenvalues.len() - self.outliers
    }

    pub fn negative(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < 0.0).count()
    }

    /// One eigenvalue per line, full precision.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        for l in &self.eigenvalues {
            writeln!(w, "{l:.17e}")?;
        }
        Ok(())
    }
}

fn sorted_symmetric_eigenvalues(a: DMatrix<f64>) -> Vec<f64> {
    let sym = (&a + a.transpose()) * 0.5;
    let mut e: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Dense `Y T`.
pub fn dense_symmetrized(op: &AllAtOnceOperator, guard: usize) -> Result<DMatrix<f64>> {
    Ok(flip_rows(&op.materialize_dense(guard)?, op.m()))
}

/// Dense `P^power`, built column by column from the fast application.
pub fn dense_preconditioner_power(p: &SpectralPreconditioner, power: f64, guard: usize) -> Result<DMatrix<f64>> {
    let dim = p.n() * p.m();
    if dim > guard {
        return Err(Error::Size { dim, guard });
    }
    let mut out = DMatrix::<f64>::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for c in 0..dim {
        e.fill(0.0);
        e[c] = 1.0;
        p.apply_power_into(&e, &mut col, power)?;
        out.column_mut(c).copy_from_slice(&col);
    }
    Ok(out)
}

/// Eigenvalues of `Y T` itself.
pub fn unpreconditioned_spectrum(op: &AllAtOnceOperator, guard: usize, epsilon: f64) -> Result<SpectrumReport> {
    Ok(SpectrumReport::from_eigenvalues(
        sorted_symmetric_eigenvalues(dense_symmetrized(op, guard)?),
        epsilon,
    ))
}

/// Spectrum of `P⁻¹ Y T`, computed from the similar symmetric matrix
/// `P^{-1/2} Y T P^{-1/2}`.
pub fn preconditioned_spectrum(
    op: &AllAtOnceOperator,
    p: &SpectralPreconditioner,
    guard: usize,
    epsilon: f64,
) -> Result<SpectrumReport> {
    check_dim(op.n(), p.n())?;
    check_dim(op.m(), p.m())?;
    let a = dense_symmetrized(op, guard)?;
    let half = dense_preconditioner_power(p, -0.5, guard)?;
    let b = &half * a * &half;
    Ok(SpectrumReport::from_eigenvalues(sorted_symmetric_eigenvalues(b), epsilon))
}

/// `|A| = V |Λ| Vᵀ` for symmetric `A`.
pub fn matrix_abs(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new((a + a.transpose()) * 0.5);
    let d = eig.eigenvalues.map(f64::abs);
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Spectrum of `P⁻¹ A` for dense symmetric `A` and dense SPD `P`.
pub fn dense_preconditioned_spectrum(a: &DMatrix<f64>, p: &DMatrix<f64>, epsilon: f64) -> Result<SpectrumReport> {
    check_dim(a.nrows(), p.nrows())?;
    let eig = SymmetricEigen::new((p + p.transpose()) * 0.5);
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Parameter("dense preconditioner is not positive definite".into()));
    }
    let d = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let half = &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose();
    Ok(SpectrumReport::from_eigenvalues(
        sorted_symmetric_eigenvalues(&half * a * &half),
        epsilon,
    ))
}

/// Number of singular values above `RANK_RTOL · σ₁` (zero for a zero matrix).
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    numerical_rank_scaled(a, 0.0)
}

/// Like [`numerical_rank`], but the cutoff is `RANK_RTOL · max(σ₁, scale)`.
/// Use it for differences of nearly equal matrices, where `σ₁` alone may be
/// rounding noise and `scale` is the size of the operands.
pub fn numerical_rank_scaled(a: &DMatrix<f64>, scale: f64) -> usize {
    let sv = a.clone().singular_values();
    let max = sv.iter().copied().fold(scale.abs(), f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RTOL * max).count()
}

/// Rank of `N - I` and `max |N - I|` for the preconditioned normal-equation
/// operator `N = (P⁻¹T)ᵀ(P⁻¹T)`.
pub fn normal_equation_rank_check(
    op: &AllAtOnceOperator,
    p: &SpectralPreconditioner,
    guard: usize,
) -> Result<(usize, f64)> {
    let dim = op.dim();
    if dim > guard {
        return Err(Error::Size { dim, guard });
    }
    check_dim(op.n(), p.n())?;
    check_dim(op.m(), p.m())?;
    let mut dense = DMatrix::<f64>::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for c in 0..dim {
        e.fill(0.0);
        e[c] = 1.0;
        apply_inverse_normal_into(p, op, &e, &mut col)?;
        col[c] -= 1.0;
        dense.column_mut(c).copy_from_slice(&col);
    }
    let max = dense.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok((numerical_rank_scaled(&dense, 1.0), max))
}

/// Uniform samples of the symbol modulus `|ĝ_j(x)|` over `[-π, π]`.
#[derive(Debug, Clone)]
pub struct SymbolSampler {
    stencil: TimeStencil,
    spatial: SpectralSpatialOperator,
    grid: Vec<f64>,
}

impl SymbolSampler {
    /// Cell midpoints `x_k = -π + (2k+1)π/count`, `k = 0..count`.
    pub fn uniform(stencil: TimeStencil, spatial: SpectralSpatialOperator, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Parameter("symbol sampler needs at least one point".into()));
        }
        let pi = std::f64::consts::PI;
        let grid = (0..count)
            .map(|k| -pi + (2 * k + 1) as f64 * pi / count as f64)
            .collect();
        Ok(Self { stencil, spatial, grid })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `±|ĝ_j(x)|` for every mode and grid point, the sign taken from the
    /// sign of `x`. The modulus is even in `x`, so half the samples of each
    /// mode land on either side: the two copies of the symbol domain on which
    /// the limit distribution of `Y T` lives.
    pub fn signed_samples(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.len() * self.spatial.m());
        for (&mass, &stiff) in self.spatial.mass_eigs().iter().zip(self.spatial.stiff_eigs()) {
            for &x in &self.grid {
                let v = symbol_modulus(&self.stencil, mass, stiff, x);
                out.push(if x < 0.0 { -v } else { v });
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Largest gap between the sorted eigenvalues of `Y T` and the sorted signed
/// symbol samples (a sup-distance between empirical quantile functions).
pub fn symbol_distribution_compare(op: &AllAtOnceOperator, sampler: &SymbolSampler, guard: usize) -> Result<f64> {
    let eigs = unpreconditioned_spectrum(op, guard, 0.0)?.eigenvalues;
    let samples = sampler.signed_samples();
    check_dim(eigs.len(), samples.len())?;
    Ok(eigs
        .iter()
        .zip(&samples)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs())))
}

/// Numerical rank of `C^{2K} - P^{2K}` for the circulant and tau
/// preconditioners built from the same stencil, expected to be at most
/// `2Klm` for an `l`-step stencil. Requires `n > 2Klm`.
pub fn rank_bound_lemma_check(
    stencil: &TimeStencil,
    spatial: &SpectralSpatialOperator,
    n: usize,
    k: usize,
    guard: usize,
) -> Result<usize> {
    let (m, l) = (spatial.m(), stencil.l());
    if k == 0 || n <= 2 * k * l * m {
        return Err(Error::Parameter(format!(
            "rank bound needs K >= 1 and n > 2Klm, got n={n}, K={k}, l={l}, m={m}"
        )));
    }
    let power = 2.0 * k as f64;
    let circ = build_circulant(stencil, spatial, n)?;
    let tau = build_tau(stencil, spatial, n)?;
    let scale = circ
        .diag()
        .iter()
        .chain(tau.diag())
        .fold(0.0f64, |acc, &d| acc.max(d.powf(power)));
    let c = dense_preconditioner_power(&circ, power, guard)?;
    let p = dense_preconditioner_power(&tau, power, guard)?;
    Ok(numerical_rank_scaled(&(c - p), scale))
}
