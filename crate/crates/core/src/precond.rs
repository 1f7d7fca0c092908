//! Symmetric positive definite preconditioners for `YT`, stored as their
//! eigenvalues in a fast diagonalizing basis.
//!
//! Both kinds are built from the scalar symbol of each spatial mode,
//! `ĝ_j(x) = Σ_k (μ_k m_j + κ_k λ_j) e^{ikx}`:
//!
//! * [`PreconditionerKind::Tau`] is `√(Σ_k P_n^k ⊗ q̄_k)`, diagonalized by
//!   `S_n ⊗ U_m`. Its eigenvalues are `|ĝ_j(iπ/(n+1))|`, because expanding
//!   `|ĝ|²` in powers of `cos x` and evaluating at the eigenvalues `cos x_i`
//!   of `P_n` is the same as evaluating `|ĝ|²` at `x_i`. The matrix polynomials
//!   `q̄_k` are never formed.
//! * [`PreconditionerKind::Circulant`] is `|S|`, `S` the block Strang circulant
//!   of `T`, diagonalized by `F_n ⊗ U_m` with eigenvalues `|ĝ_j(2πi/n)|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::block::BlockVector;
use crate::discretize::{SpectralSpatialOperator, TimeStencil};
use crate::error::{check_dim, Error, Result};
use crate::toeplitz::AllAtOnceOperator;
use crate::transforms::{FftDirection, TransformPlan};

/// Entries at or below this fraction of the largest eigenvalue count as zero.
pub const SINGULAR_SYMBOL_RTOL: f64 = 1e-14;

/// Largest imaginary residue a circulant apply may discard, relative to
/// `‖P^power‖ ‖v‖`.
pub const IMAG_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    Tau,
    Circulant,
}

impl std::fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PreconditionerKind::Tau => "tau",
            PreconditionerKind::Circulant => "circulant",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SpectralPreconditioner {
    kind: PreconditionerKind,
    n: usize,
    m: usize,
    /// `diag[i*m + j]`: eigenvalue on time mode `i`, spatial mode `j`.
    diag: Vec<f64>,
    plan: TransformPlan,
}

/// `|Σ_k a_k e^{ikx}|` for one spatial mode.
pub fn symbol_modulus(stencil: &TimeStencil, mass: f64, stiff: f64, x: f64) -> f64 {
    let mut acc = Complex64::default();
    for k in 0..=stencil.l() {
        acc += stencil.block_eig(k, mass, stiff) * Complex64::from_polar(1.0, k as f64 * x);
    }
    acc.norm()
}

fn build(
    kind: PreconditionerKind,
    stencil: &TimeStencil,
    spatial: &SpectralSpatialOperator,
    n: usize,
) -> Result<SpectralPreconditioner> {
    if n == 0 {
        return Err(Error::Parameter("preconditioner needs n >= 1".into()));
    }
    let m = spatial.m();
    let angle = |i: usize| match kind {
        PreconditionerKind::Tau => (i + 1) as f64 * PI / (n as f64 + 1.0),
        PreconditionerKind::Circulant => 2.0 * PI * i as f64 / n as f64,
    };
    let mut diag = vec![0.0; n * m];
    diag.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let x = angle(i);
        for (j, d) in row.iter_mut().enumerate() {
            *d = symbol_modulus(stencil, spatial.mass_eigs()[j], spatial.stiff_eigs()[j], x);
        }
    });
    let max = diag.iter().copied().fold(0.0, f64::max);
    let threshold = SINGULAR_SYMBOL_RTOL * max;
    if let Some((p, &value)) = diag.iter().enumerate().find(|(_, &d)| !(d > threshold)) {
        return Err(Error::SingularSymbol {
            time: p / m,
            space: p % m,
            value,
            threshold,
        });
    }
    Ok(SpectralPreconditioner {
        kind,
        n,
        m,
        diag,
        plan: TransformPlan::new(n, spatial.shape())?,
    })
}

/// Sine-transform preconditioner for `Y T` with `n` time blocks.
pub fn build_tau(
    stencil: &TimeStencil,
    spatial: &SpectralSpatialOperator,
    n: usize,
) -> Result<SpectralPreconditioner> {
    build(PreconditionerKind::Tau, stencil, spatial, n)
}

/// Absolute-value block Strang circulant preconditioner.
pub fn build_circulant(
    stencil: &TimeStencil,
    spatial: &SpectralSpatialOperator,
    n: usize,
) -> Result<SpectralPreconditioner> {
    build(PreconditionerKind::Circulant, stencil, spatial, n)
}

impl SpectralPreconditioner {
    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Eigenvalue on time mode `i` and spatial mode `j` (both 0-based).
    pub fn eig(&self, i: usize, j: usize) -> f64 {
        self.diag[i * self.m + j]
    }

    /// `out = P^power v`. Any real power is allowed since `P` is SPD.
    pub fn apply_power_into(&self, v: &[f64], out: &mut [f64], power: f64) -> Result<()> {
        check_dim(self.n * self.m, v.len())?;
        check_dim(self.n * self.m, out.len())?;
        let scale = |d: f64| -> f64 {
            if power == -1.0 {
                1.0 / d
            } else if power == 1.0 {
                d
            } else {
                d.powf(power)
            }
        };
        match self.kind {
            PreconditionerKind::Tau => {
                out.copy_from_slice(v);
                self.plan.apply_kron_inplace(out)?;
                out.par_iter_mut()
                    .zip(self.diag.par_iter())
                    .for_each(|(o, &d)| *o *= scale(d));
                self.plan.apply_kron_inplace(out)?;
            }
            PreconditionerKind::Circulant => {
                out.copy_from_slice(v);
                self.plan.space_inplace(out)?;
                let mut c: Vec<Complex64> = out.iter().map(|&r| Complex64::new(r, 0.0)).collect();
                self.plan.fft_time_inplace(&mut c, FftDirection::Forward)?;
                c.par_iter_mut()
                    .zip(self.diag.par_iter())
                    .for_each(|(z, &d)| *z *= scale(d));
                self.plan.fft_time_inplace(&mut c, FftDirection::Inverse)?;
                let im = c.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
                let (lo, hi) = self
                    .diag
                    .iter()
                    .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
                let bound = scale(lo).max(scale(hi)) * crate::block::norm2(v);
                if im > IMAG_RTOL * bound {
                    return Err(Error::State(format!(
                        "circulant apply left an imaginary part of size {:e}, bound {:e}",
                        im,
                        IMAG_RTOL * bound
                    )));
                }
                out.iter_mut().zip(&c).for_each(|(o, z)| *o = z.re);
                self.plan.space_inplace(out)?;
            }
        }
        Ok(())
    }

    pub fn apply_power(&self, v: &BlockVector, power: f64) -> Result<BlockVector> {
        v.same_shape(self.n, self.m)?;
        let mut out = BlockVector::zeros(self.n, self.m)?;
        self.apply_power_into(v.as_slice(), out.as_mut_slice(), power)?;
        Ok(out)
    }

    /// `P⁻¹ v`.
    pub fn apply_inverse(&self, v: &BlockVector) -> Result<BlockVector> {
        self.apply_power(v, -1.0)
    }

    /// `P v`.
    pub fn apply(&self, v: &BlockVector) -> Result<BlockVector> {
        self.apply_power(v, 1.0)
    }

    pub(crate) fn check_matches(&self, op: &AllAtOnceOperator) -> Result<()> {
        if op.n() != self.n || op.m() != self.m {
            return Err(Error::State(format!(
                "preconditioner built for (n, m) = ({}, {}), operator has ({}, {})",
                self.n,
                self.m,
                op.n(),
                op.m()
            )));
        }
        Ok(())
    }
}

/// `(P⁻¹T)ᵀ(P⁻¹T) v = Tᵀ P⁻² T v`, the operator CGNE iterates on.
pub fn apply_inverse_normal(
    p: &SpectralPreconditioner,
    op: &AllAtOnceOperator,
    v: &BlockVector,
) -> Result<BlockVector> {
    p.check_matches(op)?;
    v.same_shape(op.n(), op.m())?;
    let mut out = BlockVector::zeros(op.n(), op.m())?;
    apply_inverse_normal_into(p, op, v.as_slice(), out.as_mut_slice())?;
    Ok(out)
}

pub(crate) fn apply_inverse_normal_into(
    p: &SpectralPreconditioner,
    op: &AllAtOnceOperator,
    v: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let mut t = vec![0.0; v.len()];
    let mut s = vec![0.0; v.len()];
    op.matvec_into(v, &mut t)?;
    p.apply_power_into(&t, &mut s, -2.0)?;
    op.transpose_matvec_into(&s, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_laplacian_1d, make_stencil, ProblemSpec, Scheme};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn scalar(coeffs: Vec<(f64, f64)>) -> (TimeStencil, SpectralSpatialOperator) {
        (
            TimeStencil::from_coeffs(coeffs, 1.0).unwrap(),
            build_laplacian_1d(1, 1.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn tau_single_block_scalar_symbol() {
        let (st, sp) = scalar(vec![(2.0, 0.0), (-1.0, 0.0)]);
        let p = build_tau(&st, &sp, 1).unwrap();
        assert_abs_diff_eq!(p.diag()[0], 5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn tau_backward_euler_closed_form() {
        let spec = ProblemSpec::new(Scheme::Theta(1.0), 1, 6, 5);
        let sp = spec.build_spatial().unwrap();
        let st = make_stencil(&spec).unwrap();
        let p = build_tau(&st, &sp, 6).unwrap();
        for i in 0..6 {
            let x = (i + 1) as f64 * PI / 7.0;
            for j in 0..5 {
                let a0 = 1.0 + st.tau() * sp.stiff_eigs()[j];
                let expect = (a0 * a0 + 1.0 - 2.0 * a0 * x.cos()).sqrt();
                assert_abs_diff_eq!(p.eig(i, j), expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn circulant_two_point_moduli() {
        let (st, sp) = scalar(vec![(2.0, 0.0), (-1.0, 0.0)]);
        let c = build_circulant(&st, &sp, 2).unwrap();
        assert_abs_diff_eq!(c.diag()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.diag()[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn circulant_zero_frequency_is_tau_lambda_for_backward_euler() {
        let spec = ProblemSpec::new(Scheme::Theta(1.0), 1, 8, 4);
        let sp = spec.build_spatial().unwrap();
        let st = make_stencil(&spec).unwrap();
        let c = build_circulant(&st, &sp, 8).unwrap();
        for j in 0..4 {
            assert_relative_eq!(c.eig(0, j), st.tau() * sp.stiff_eigs()[j], max_relative = 1e-9);
        }
    }

    #[test]
    fn singular_symbol_is_reported() {
        // ĝ(0) = 1 - 1 = 0
        let (st, sp) = scalar(vec![(1.0, 0.0), (-1.0, 0.0)]);
        let err = build_circulant(&st, &sp, 4).unwrap_err();
        assert!(matches!(err, Error::SingularSymbol { time: 0, space: 0, .. }));
    }

    #[test]
    fn identity_symbol_gives_identity() {
        let (st, sp) = scalar(vec![(1.0, 0.0), (0.0, 0.0)]);
        for p in [build_tau(&st, &sp, 5).unwrap(), build_circulant(&st, &sp, 5).unwrap()] {
            let v = BlockVector::from_fn(5, 1, |k, _| k as f64 - 1.5).unwrap();
            let z = p.apply_inverse(&v).unwrap();
            for (a, b) in z.as_slice().iter().zip(v.as_slice()) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let spec = ProblemSpec::new(Scheme::Bdf2, 1, 9, 6);
        let sp = spec.build_spatial().unwrap();
        let st = make_stencil(&spec).unwrap();
        for p in [build_tau(&st, &sp, 9).unwrap(), build_circulant(&st, &sp, 9).unwrap()] {
            let v = BlockVector::from_fn(9, 6, |k, j| ((k * 7 + j * 3) % 5) as f64 - 2.0).unwrap();
            let back = p.apply_inverse(&p.apply(&v).unwrap()).unwrap();
            for (a, b) in back.as_slice().iter().zip(v.as_slice()) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn mismatched_operator_is_a_state_error() {
        let spec = ProblemSpec::new(Scheme::Theta(1.0), 1, 4, 3);
        let sp = spec.build_spatial().unwrap();
        let st = make_stencil(&spec).unwrap();
        let p = build_tau(&st, &sp, 5).unwrap();
        let op = AllAtOnceOperator::new(4, sp, st).unwrap();
        let v = BlockVector::zeros(4, 3).unwrap();
        assert!(matches!(apply_inverse_normal(&p, &op, &v), Err(Error::State(_))));
    }
}
