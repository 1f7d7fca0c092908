mod common;

use common::*;
use nalgebra::DVector;
use pintau_core::discretize::Forcing;
use pintau_core::krylov::{cgne_unpreconditioned, ResidualNorm};
use pintau_core::{
    build_circulant, build_rhs, build_tau, cgne, make_stencil, minres_all_at_once, AllAtOnceOperator, BlockVector,
    ProblemSpec, Scheme, SolveOptions, TimeStencil, DEFAULT_DENSE_GUARD,
};

fn system(spec: &ProblemSpec) -> (AllAtOnceOperator, BlockVector) {
    let sp = spec.build_spatial().unwrap();
    let st = make_stencil(spec).unwrap();
    let b = build_rhs(spec, &sp, &st).unwrap();
    (AllAtOnceOperator::new(spec.n, sp, st).unwrap(), b)
}

fn dense_solve(op: &AllAtOnceOperator, b: &BlockVector) -> Vec<f64> {
    let t = op.materialize_dense(DEFAULT_DENSE_GUARD).unwrap();
    t.lu().solve(&DVector::from_column_slice(b.as_slice())).unwrap().as_slice().to_vec()
}

fn tight() -> SolveOptions {
    SolveOptions::new(1e-10, 500)
}

#[test]
fn minres_matches_direct_solve_for_every_scheme() {
    for scheme in ALL_SCHEMES {
        for monitor in [ResidualNorm::Preconditioned, ResidualNorm::Unpreconditioned] {
            let mut spec = ProblemSpec::new(scheme, 1, 12, 7);
            // Keeps forward Euler stable, so the system stays well conditioned.
            spec.a = 0.03;
            let (op, b) = system(&spec);
            let exact = dense_solve(&op, &b);
            let p = build_tau(op.stencil(), op.spatial(), op.n()).unwrap();
            let (x, rep) = minres_all_at_once(&op, Some(&p), &b, &tight().with_monitor(monitor)).unwrap();
            assert!(rep.converged, "{scheme}");
            assert!(rel_err_vec(x.as_slice(), &exact) < 1e-7, "{scheme} {monitor:?}");
        }
    }
}

#[test]
fn all_solvers_agree() {
    let mut spec = ProblemSpec::new(Scheme::Bdf2, 2, 8, 5);
    spec.a = 0.05;
    let (op, b) = system(&spec);
    let p = build_tau(op.stencil(), op.spatial(), op.n()).unwrap();
    let c = build_circulant(op.stencil(), op.spatial(), op.n()).unwrap();
    let opts = tight();
    let (x_tau, _) = minres_all_at_once(&op, Some(&p), &b, &opts).unwrap();
    let (x_circ, _) = minres_all_at_once(&op, Some(&c), &b, &opts).unwrap();
    let (x_none, _) = minres_all_at_once(&op, None, &b, &opts).unwrap();
    let (x_cgne, rep) = cgne(&op, &p, &b, &opts).unwrap();
    assert!(rep.converged);
    let (x_cgnu, _) = cgne_unpreconditioned(&op, &b, &SolveOptions::new(1e-12, 2000)).unwrap();
    for other in [&x_circ, &x_none, &x_cgne, &x_cgnu] {
        assert!(rel_err_vec(other.as_slice(), x_tau.as_slice()) < 1e-6);
    }
}

#[test]
fn backward_euler_cgne_converges_in_about_m_steps() {
    for a in [1e-5, 1.0] {
        let mut spec = ProblemSpec::new(Scheme::Theta(1.0), 1, 16, 7);
        spec.a = a;
        let (op, b) = system(&spec);
        let p = build_tau(op.stencil(), op.spatial(), op.n()).unwrap();
        let (_, rep) = cgne(&op, &p, &b, &SolveOptions::new(1e-10, 100)).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 7 + 3, "a={a}: {} iterations", rep.iterations);
    }
}

#[test]
fn exact_preconditioner_and_zero_rhs_are_trivial() {
    // With A_(1) = 0 the symbol is constant, T is block diagonal and P = T.
    let spec = ProblemSpec::new(Scheme::Theta(1.0), 1, 6, 5);
    let sp = spec.build_spatial().unwrap();
    let st = TimeStencil::from_coeffs(vec![(1.0, 0.1), (0.0, 0.0)], 0.1).unwrap();
    let op = AllAtOnceOperator::new(6, sp, st).unwrap();
    let p = build_tau(op.stencil(), op.spatial(), 6).unwrap();
    let b = BlockVector::from_fn(6, 5, |k, j| (k + 2 * j) as f64).unwrap();
    let (_, rep) = cgne(&op, &p, &b, &SolveOptions::default()).unwrap();
    assert_eq!(rep.iterations, 1);
    let (_, rep) = minres_all_at_once(&op, Some(&p), &b, &SolveOptions::default()).unwrap();
    assert!(rep.iterations <= 2);
    let zero = BlockVector::zeros(6, 5).unwrap();
    let (x, rep) = cgne(&op, &p, &zero, &SolveOptions::default()).unwrap();
    assert_eq!(rep.iterations, 0);
    assert!(x.as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn true_residual_at_exit_is_within_ten_tol() {
    for scheme in ALL_SCHEMES {
        for monitor in [ResidualNorm::Preconditioned, ResidualNorm::Unpreconditioned] {
            let spec = ProblemSpec::new(scheme, 1, 32, 15);
            let (op, b) = system(&spec);
            let p = build_tau(op.stencil(), op.spatial(), op.n()).unwrap();
            let opts = SolveOptions::new(1e-6, 500).with_monitor(monitor);
            let (x, rep) = minres_all_at_once(&op, Some(&p), &b, &opts).unwrap();
            assert!(rep.converged);
            let r = op.matvec(&x).unwrap();
            let res: f64 = r.as_slice().iter().zip(b.as_slice()).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
            assert!(res / b.norm() <= 10.0 * opts.tol, "{scheme} {monitor:?}: {}", res / b.norm());
            assert!((rep.final_true_relres - res / b.norm()).abs() < 1e-12);
            for w in rep.residual_history.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-10), "{scheme} {monitor:?}: not monotone");
            }
            assert!(rep.relative_residual() <= opts.tol);
            assert_eq!(rep.true_residual_history.is_empty(), monitor == ResidualNorm::Preconditioned);
        }
    }
}

#[test]
fn manufactured_wave_solution_is_approached_under_refinement() {
    let error = |k: usize| {
        let mut spec = ProblemSpec::new(Scheme::WaveTwoStep, 2, k, k - 1);
        assert_eq!(spec.forcing, Forcing::ManufacturedWave);
        spec.a = 1.0;
        let (op, b) = system(&spec);
        let p = build_tau(op.stencil(), op.spatial(), op.n()).unwrap();
        let (x, rep) = minres_all_at_once(&op, Some(&p), &b, &tight()).unwrap();
        assert!(rep.converged);
        let pts = op.spatial().grid_points();
        let last = x.block(k - 1);
        pts.iter()
            .zip(last)
            .map(|(pt, u)| (u - Forcing::manufactured_wave_solution(*pt, 2, 1.0)).abs())
            .fold(0.0, f64::max)
    };
    // q is quadratic, so the spatial stencil is exact and the error is the
    // first-order temporal one; it enters its asymptotic regime from k ≈ 32.
    let (e32, e64) = (error(32), error(64));
    assert!(e32 < 2e-4, "{e32:e}");
    assert!(e64 < 0.7 * e32, "{e32:e} -> {e64:e}");
}

#[test]
fn heat_solution_decays_like_the_continuous_one() {
    // u0 = sin²(πx) is not an eigenfunction, but with a = 1 the solution at
    // t = 1 is tiny; backward Euler must reproduce that decay.
    let mut spec = ProblemSpec::new(Scheme::Theta(1.0), 1, 64, 31);
    spec.a = 1.0;
    let (op, b) = system(&spec);
    let p = build_tau(op.stencil(), op.spatial(), op.n()).unwrap();
    let (x, _) = minres_all_at_once(&op, Some(&p), &b, &tight()).unwrap();
    let first = x.block(0).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let last = x.block(63).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // The slowest mode decays like exp(-π² t); mean value 1/2 lives mostly in it.
    assert!(first > 0.3);
    assert!(last < 1e-3 && last > 1e-6, "{last:e}");
}
