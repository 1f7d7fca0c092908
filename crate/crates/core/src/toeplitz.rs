//! Matrix-free block Toeplitz all-at-once operator `T`, its transpose, and the
//! block flip `Y` that turns `T` into the symmetric `YT`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::block::BlockVector;
use crate::discretize::{SpectralSpatialOperator, TimeStencil};
use crate::error::{check_dim, Error, Result};
use crate::transforms::TransformPlan;

/// Largest `n*m` that dense materialization accepts unless told otherwise.
pub const DEFAULT_DENSE_GUARD: usize = 4096;

/// How `A_(k) z` is evaluated inside a matvec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApplyPath {
    /// Diagonal scaling between two spatial sine transforms.
    #[default]
    Spectral,
    /// Direct sparse finite-difference stencil.
    Stencil,
}

#[derive(Debug, Clone)]
pub struct AllAtOnceOperator {
    n: usize,
    spatial: SpectralSpatialOperator,
    stencil: TimeStencil,
    plan: TransformPlan,
    /// `block_eigs[k*m + r]`: eigenvalue of `A_(k)` on spatial mode `r`.
    block_eigs: Vec<f64>,
    path: ApplyPath,
}

impl AllAtOnceOperator {
    pub fn new(n: usize, spatial: SpectralSpatialOperator, stencil: TimeStencil) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("all-at-once operator needs n >= 1".into()));
        }
        stencil.check_leading_block(&spatial)?;
        let plan = TransformPlan::new(n, spatial.shape())?;
        let m = spatial.m();
        let mut block_eigs = Vec::with_capacity((stencil.l() + 1) * m);
        for k in 0..=stencil.l() {
            for (&mass, &stiff) in spatial.mass_eigs().iter().zip(spatial.stiff_eigs()) {
                block_eigs.push(stencil.block_eig(k, mass, stiff));
            }
        }
        Ok(Self {
            n,
            spatial,
            stencil,
            plan,
            block_eigs,
            path: ApplyPath::Spectral,
        })
    }

    pub fn with_path(mut self, path: ApplyPath) -> Self {
        self.path = path;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.spatial.m()
    }

    pub fn dim(&self) -> usize {
        self.n * self.m()
    }

    pub fn spatial(&self) -> &SpectralSpatialOperator {
        &self.spatial
    }

    pub fn stencil(&self) -> &TimeStencil {
        &self.stencil
    }

    pub fn plan(&self) -> &TransformPlan {
        &self.plan
    }

    fn eigs(&self, k: usize) -> &[f64] {
        let m = self.m();
        &self.block_eigs[k * m..(k + 1) * m]
    }

    /// `y_k = Σ_j A_(j) x_{k∓j}`; `forward` selects `T` (minus) or `Tᵀ` (plus).
    fn banded(&self, x: &[f64], y: &mut [f64], forward: bool) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        let (n, m, l) = (self.n, self.m(), self.stencil.l());
        let source = |k: usize, j: usize| -> Option<usize> {
            if forward {
                k.checked_sub(j)
            } else {
                Some(k + j).filter(|&s| s < n)
            }
        };
        match self.path {
            ApplyPath::Spectral => {
                let mut xs = x.to_vec();
                self.plan.space_inplace(&mut xs)?;
                y.par_chunks_mut(m).enumerate().for_each(|(k, yk)| {
                    yk.fill(0.0);
                    for j in 0..=l {
                        if let Some(s) = source(k, j) {
                            let d = self.eigs(j);
                            let xk = &xs[s * m..(s + 1) * m];
                            for r in 0..m {
                                yk[r] += d[r] * xk[r];
                            }
                        }
                    }
                });
                self.plan.space_inplace(y)?;
            }
            ApplyPath::Stencil => {
                y.par_chunks_mut(m).enumerate().for_each_init(
                    || vec![0.0; m],
                    |tmp, (k, yk)| {
                        yk.fill(0.0);
                        for j in 0..=l {
                            if let Some(s) = source(k, j) {
                                let (mu, kappa) = self.stencil.coeffs()[j];
                                self.spatial
                                    .apply_stencil(mu, kappa, &x[s * m..(s + 1) * m], tmp)
                                    .expect("block sizes checked above");
                                yk.iter_mut().zip(tmp.iter()).for_each(|(a, b)| *a += b);
                            }
                        }
                    },
                );
            }
        }
        Ok(())
    }

    /// `y = T x` on raw slices.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.banded(x, y, true)
    }

    /// `y = Tᵀ x` on raw slices. Every `A_(k)` is symmetric.
    pub fn transpose_matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.banded(x, y, false)
    }

    /// `y = Y T x` on raw slices.
    pub fn sym_matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.banded(x, y, true)?;
        flip_inplace(y, self.m());
        Ok(())
    }

    pub fn matvec(&self, x: &BlockVector) -> Result<BlockVector> {
        x.same_shape(self.n, self.m())?;
        let mut y = BlockVector::zeros(self.n, self.m())?;
        self.matvec_into(x.as_slice(), y.as_mut_slice())?;
        Ok(y)
    }

    pub fn transpose_matvec(&self, x: &BlockVector) -> Result<BlockVector> {
        x.same_shape(self.n, self.m())?;
        let mut y = BlockVector::zeros(self.n, self.m())?;
        self.transpose_matvec_into(x.as_slice(), y.as_mut_slice())?;
        Ok(y)
    }

    pub fn sym_matvec(&self, x: &BlockVector) -> Result<BlockVector> {
        Ok(flip(&self.matvec(x)?))
    }

    /// Dense `T`, assembled block by block from `A_(k) = U_m diag(·) U_m`.
    pub fn materialize_dense(&self, guard: usize) -> Result<DMatrix<f64>> {
        let (n, m) = (self.n, self.m());
        let dim = n * m;
        if dim > guard {
            return Err(Error::Size { dim, guard });
        }
        let u = dense_space_transform(&self.plan, m)?;
        let mut out = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..=self.stencil.l().min(n - 1) {
            let d = nalgebra::DVector::from_column_slice(self.eigs(j));
            let block = &u * DMatrix::from_diagonal(&d) * &u;
            for k in j..n {
                out.view_mut((k * m, (k - j) * m), (m, m)).copy_from(&block);
            }
        }
        Ok(out)
    }
}

/// Dense `U_m`, the spatial transform of `plan` (symmetric and involutory).
pub(crate) fn dense_space_transform(plan: &TransformPlan, m: usize) -> Result<DMatrix<f64>> {
    let single = TransformPlan::new(1, plan.shape())?;
    let mut u = DMatrix::<f64>::zeros(m, m);
    let mut e = vec![0.0; m];
    for c in 0..m {
        e.fill(0.0);
        e[c] = 1.0;
        single.space_inplace(&mut e)?;
        u.column_mut(c).copy_from_slice(&e);
    }
    Ok(u)
}

/// Reverses the order of the `m`-blocks of `data`.
pub fn flip_inplace(data: &mut [f64], m: usize) {
    let n = data.len() / m;
    for k in 0..n / 2 {
        let (head, tail) = data.split_at_mut((n - 1 - k) * m);
        head[k * m..(k + 1) * m].swap_with_slice(&mut tail[..m]);
    }
}

/// `Y x` with `Y = Y_n ⊗ I_m` the block anti-identity.
pub fn flip(x: &BlockVector) -> BlockVector {
    let mut out = x.clone();
    flip_inplace(out.as_mut_slice(), x.m());
    out
}

/// `Y A` for a dense matrix whose rows are grouped into `m`-blocks.
pub fn flip_rows(a: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let n = a.nrows() / m;
    let mut out = a.clone();
    for k in 0..n {
        for r in 0..m {
            out.row_mut(k * m + r).copy_from(&a.row((n - 1 - k) * m + r));
        }
    }
    out
}
