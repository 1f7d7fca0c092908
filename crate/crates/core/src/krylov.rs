//! Preconditioned MINRES and CG on the preconditioned normal equations.
//!
//! Operators are passed as closures `f(x, y)` that write `y = Op x`, so the
//! solvers work with matrix-free operators and small dense test matrices alike.

use std::time::Instant;

use crate::block::{dot, norm2, BlockVector};
use crate::error::{Error, Result};
use crate::precond::SpectralPreconditioner;
use crate::toeplitz::AllAtOnceOperator;

/// Which residual norm MINRES compares against `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualNorm {
    /// `‖r_k‖_{M⁻¹}`, the quantity the recurrence provides for free.
    #[default]
    Preconditioned,
    /// Euclidean `‖b - A x_k‖`, tracked through a short recurrence for
    /// `A x_k` at the cost of three extra vectors and no extra products.
    Unpreconditioned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative reduction of the monitored residual norm.
    pub tol: f64,
    pub maxit: usize,
    /// Ignored by CGNE, which always monitors the normal-equation residual.
    pub monitor: ResidualNorm,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            maxit: 500,
            monitor: ResidualNorm::Preconditioned,
        }
    }
}

impl SolveOptions {
    pub fn new(tol: f64, maxit: usize) -> Self {
        Self {
            tol,
            maxit,
            ..Self::default()
        }
    }

    pub fn with_monitor(mut self, monitor: ResidualNorm) -> Self {
        self.monitor = monitor;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Residual norms from the recurrence, starting with the initial one:
    /// `‖r_k‖_{M⁻¹}` for MINRES (non-increasing), the normal-equation
    /// residual for CGNE.
    pub residual_history: Vec<f64>,
    /// Euclidean `‖b - A x_k‖`, recorded only when MINRES monitors it.
    pub true_residual_history: Vec<f64>,
    /// `‖b - A x‖ / ‖b‖` from an explicit product at exit.
    pub final_true_relres: f64,
    pub converged: bool,
    pub wall_time: f64,
}

impl SolveReport {
    fn trivial(start: Instant) -> Self {
        Self {
            iterations: 0,
            residual_history: vec![0.0],
            true_residual_history: Vec::new(),
            final_true_relres: 0.0,
            converged: true,
            wall_time: start.elapsed().as_secs_f64(),
        }
    }

    /// Last monitored residual relative to the first: the Euclidean one when
    /// it was tracked, the recurrence one otherwise.
    pub fn relative_residual(&self) -> f64 {
        let h = if self.true_residual_history.is_empty() {
            &self.residual_history
        } else {
            &self.true_residual_history
        };
        match (h.first(), h.last()) {
            (Some(&r0), Some(&r)) if r0 > 0.0 => r / r0,
            _ => 0.0,
        }
    }
}

fn true_relres<A>(apply_a: &mut A, b: &[f64], x: &[f64]) -> Result<f64>
where
    A: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut ax = vec![0.0; b.len()];
    apply_a(x, &mut ax)?;
    let res: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai) * (bi - ai)).sum::<f64>().sqrt();
    Ok(res / norm2(b))
}

fn energy(r: &[f64], z: &[f64], iteration: usize) -> Result<f64> {
    let e = dot(r, z);
    if e.is_nan() {
        return Err(Error::Divergence { iteration });
    }
    if e < 0.0 {
        return Err(Error::Parameter(format!(
            "preconditioner is not positive definite (rᵀM⁻¹r = {e:e})"
        )));
    }
    Ok(e.sqrt())
}

/// Preconditioned MINRES for symmetric (possibly indefinite) `A` with SPD
/// preconditioner inverse `M⁻¹`, starting from `x₀ = 0`.
///
/// Stops once the monitored residual norm (see [`ResidualNorm`]) has dropped
/// by the factor `opts.tol`.
pub fn minres<A, M>(mut apply_a: A, mut apply_minv: M, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)>
where
    A: FnMut(&[f64], &mut [f64]) -> Result<()>,
    M: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let start = Instant::now();
    let n = b.len();
    let mut x = vec![0.0; n];
    if norm2(b) == 0.0 {
        return Ok((x, SolveReport::trivial(start)));
    }

    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = vec![0.0; n];
    apply_minv(&r1, &mut y)?;
    let beta1 = energy(&r1, &y, 0)?;
    if beta1 == 0.0 {
        return Ok((x, SolveReport::trivial(start)));
    }

    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let track = opts.monitor == ResidualNorm::Unpreconditioned;
    // A w, A w1, A w2 and A x, only when the Euclidean residual is monitored.
    let tracked = if track { n } else { 0 };
    let (mut aw, mut aw1, mut aw2, mut ax) = (vec![0.0; tracked], vec![0.0; tracked], vec![0.0; tracked], vec![0.0; tracked]);
    let mut av = vec![0.0; tracked];
    let bnorm = norm2(b);

    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln) = (0.0f64, 0.0f64);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut history = vec![beta1];
    let mut true_history = if track { vec![bnorm] } else { Vec::new() };
    let mut converged = false;
    let mut iterations = 0;

    for itn in 1..=opts.maxit {
        iterations = itn;
        let s = 1.0 / beta;
        v.iter_mut().zip(&y).for_each(|(vi, yi)| *vi = s * yi);
        apply_a(&v, &mut y)?;
        if track {
            av.copy_from_slice(&y);
        }
        if itn >= 2 {
            let c = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(yi, ri)| *yi -= c * ri);
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(yi, ri)| *yi -= c * ri);
        // r1 <- r2, r2 <- y; y is then overwritten by M⁻¹ r2.
        std::mem::swap(&mut r1, &mut r2);
        std::mem::swap(&mut r2, &mut y);
        apply_minv(&r2, &mut y)?;
        oldb = beta;
        beta = energy(&r2, &y, itn)?;

        // Givens QR update of the Lanczos tridiagonal.
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        let inv = 1.0 / gamma;
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * inv;
            x[i] += phi * w[i];
        }

        if !phibar.is_finite() || !phi.is_finite() {
            return Err(Error::Divergence { iteration: itn });
        }
        let (monitored, reference) = if track {
            std::mem::swap(&mut aw1, &mut aw2);
            std::mem::swap(&mut aw2, &mut aw);
            let mut res = 0.0;
            for i in 0..n {
                aw[i] = (av[i] - oldeps * aw1[i] - delta * aw2[i]) * inv;
                ax[i] += phi * aw[i];
                res += (b[i] - ax[i]) * (b[i] - ax[i]);
            }
            true_history.push(res.sqrt());
            (res.sqrt(), bnorm)
        } else {
            (phibar, beta1)
        };
        history.push(phibar);
        if monitored <= opts.tol * reference {
            converged = true;
            break;
        }
        if beta <= f64::EPSILON * beta1 {
            // Invariant Krylov subspace: the iterate cannot improve further.
            break;
        }
    }

    let relres = true_relres(&mut apply_a, b, &x)?;
    if !relres.is_finite() {
        return Err(Error::Divergence { iteration: iterations });
    }
    if !converged && relres <= opts.tol {
        converged = true;
    }
    Ok((
        x,
        SolveReport {
            iterations,
            residual_history: history,
            true_residual_history: true_history,
            final_true_relres: relres,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// CG on `Tᵀ P⁻² T x = Tᵀ P⁻² b` from `x₀ = 0`, with the residual of the
/// normal equations monitored. `apply_pinv2` must apply `P⁻²`.
pub fn cg_normal_equations<T, Tt, P>(
    mut apply_t: T,
    mut apply_tt: Tt,
    mut apply_pinv2: P,
    b: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport)>
where
    T: FnMut(&[f64], &mut [f64]) -> Result<()>,
    Tt: FnMut(&[f64], &mut [f64]) -> Result<()>,
    P: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let start = Instant::now();
    let n = b.len();
    let mut x = vec![0.0; n];
    if norm2(b) == 0.0 {
        return Ok((x, SolveReport::trivial(start)));
    }
    let mut tmp = vec![0.0; n];
    let mut tmp2 = vec![0.0; n];
    let mut r = vec![0.0; n];
    apply_pinv2(b, &mut tmp)?;
    apply_tt(&tmp, &mut r)?;
    let mut normal = |v: &[f64], out: &mut [f64], tmp: &mut [f64], tmp2: &mut [f64]| -> Result<()> {
        apply_t(v, tmp)?;
        apply_pinv2(tmp, tmp2)?;
        apply_tt(tmp2, out)
    };
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let r0 = rr.sqrt();
    let mut history = vec![r0];
    let mut converged = r0 == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.maxit {
        iterations += 1;
        normal(&p, &mut q, &mut tmp, &mut tmp2)?;
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            if pq.is_nan() {
                return Err(Error::Divergence { iteration: iterations });
            }
            break;
        }
        let alpha = rr / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            return Err(Error::Divergence { iteration: iterations });
        }
        history.push(rr_new.sqrt());
        if rr_new.sqrt() <= opts.tol * r0 {
            converged = true;
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
    }

    let relres = true_relres(&mut apply_t, b, &x)?;
    Ok((
        x,
        SolveReport {
            iterations,
            residual_history: history,
            true_residual_history: Vec::new(),
            final_true_relres: relres,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// MINRES on `Y T u = Y b` with a spectral preconditioner (or none).
pub fn minres_all_at_once(
    op: &AllAtOnceOperator,
    precond: Option<&SpectralPreconditioner>,
    b: &BlockVector,
    opts: &SolveOptions,
) -> Result<(BlockVector, SolveReport)> {
    b.same_shape(op.n(), op.m())?;
    let yb = crate::toeplitz::flip(b);
    let apply_a = |x: &[f64], y: &mut [f64]| op.sym_matvec_into(x, y);
    let (x, report) = match precond {
        Some(p) => {
            p.check_matches(op)?;
            minres(apply_a, |r: &[f64], z: &mut [f64]| p.apply_power_into(r, z, -1.0), yb.as_slice(), opts)?
        }
        None => minres(
            apply_a,
            |r: &[f64], z: &mut [f64]| {
                z.copy_from_slice(r);
                Ok(())
            },
            yb.as_slice(),
            opts,
        )?,
    };
    Ok((BlockVector::from_vec(x, op.n(), op.m())?, report))
}

/// CGNE for the nonsymmetric `T u = b` preconditioned by `P`.
pub fn cgne(
    op: &AllAtOnceOperator,
    precond: &SpectralPreconditioner,
    b: &BlockVector,
    opts: &SolveOptions,
) -> Result<(BlockVector, SolveReport)> {
    b.same_shape(op.n(), op.m())?;
    precond.check_matches(op)?;
    let (x, report) = cg_normal_equations(
        |x: &[f64], y: &mut [f64]| op.matvec_into(x, y),
        |x: &[f64], y: &mut [f64]| op.transpose_matvec_into(x, y),
        |x: &[f64], y: &mut [f64]| precond.apply_power_into(x, y, -2.0),
        b.as_slice(),
        opts,
    )?;
    Ok((BlockVector::from_vec(x, op.n(), op.m())?, report))
}

/// CGNE without preconditioning (`P = I`).
pub fn cgne_unpreconditioned(
    op: &AllAtOnceOperator,
    b: &BlockVector,
    opts: &SolveOptions,
) -> Result<(BlockVector, SolveReport)> {
    b.same_shape(op.n(), op.m())?;
    let (x, report) = cg_normal_equations(
        |x: &[f64], y: &mut [f64]| op.matvec_into(x, y),
        |x: &[f64], y: &mut [f64]| op.transpose_matvec_into(x, y),
        |x: &[f64], y: &mut [f64]| {
            y.copy_from_slice(x);
            Ok(())
        },
        b.as_slice(),
        opts,
    )?;
    Ok((BlockVector::from_vec(x, op.n(), op.m())?, report))
}
