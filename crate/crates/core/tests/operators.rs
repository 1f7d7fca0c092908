mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use pintau_core::toeplitz::flip;
use pintau_core::{make_stencil, AllAtOnceOperator, ApplyPath, BlockVector, ProblemSpec, Scheme, DEFAULT_DENSE_GUARD};
use proptest::prelude::*;

fn setup(scheme: Scheme, dim: usize, n: usize, m1: usize, a: f64) -> (AllAtOnceOperator, DMatrix<f64>) {
    let mut spec = ProblemSpec::new(scheme, dim, n, m1);
    spec.a = a;
    let op = AllAtOnceOperator::new(n, spec.build_spatial().unwrap(), make_stencil(&spec).unwrap()).unwrap();
    let blocks = scheme_blocks(scheme, spec.tau(), &laplacian(dim, m1, a));
    (op, block_toeplitz(&blocks, n))
}

fn probe(n: usize, m: usize) -> BlockVector {
    BlockVector::from_fn(n, m, |k, j| ((k * 31 + j * 17) % 13) as f64 / 6.0 - 1.0 + 0.1 * (k as f64).sin()).unwrap()
}

fn dense_apply(a: &DMatrix<f64>, x: &BlockVector) -> Vec<f64> {
    (a * DVector::from_column_slice(x.as_slice())).as_slice().to_vec()
}

#[test]
fn matvec_matches_assembled_matrix() {
    for scheme in ALL_SCHEMES {
        for (dim, n, m1) in [(1, 1, 1), (1, 5, 4), (1, 6, 7), (2, 4, 3), (2, 3, 4)] {
            if n < scheme.steps() {
                continue;
            }
            let (op, t) = setup(scheme, dim, n, m1, 0.7);
            let x = probe(n, op.m());
            for path in [ApplyPath::Spectral, ApplyPath::Stencil] {
                let op = op.clone().with_path(path);
                let e = rel_err_vec(op.matvec(&x).unwrap().as_slice(), &dense_apply(&t, &x));
                assert!(e < 1e-12, "{scheme} dim={dim} n={n} m1={m1} {path:?}: {e:e}");
                let e = rel_err_vec(op.transpose_matvec(&x).unwrap().as_slice(), &dense_apply(&t.transpose(), &x));
                assert!(e < 1e-12, "{scheme} transpose: {e:e}");
                let yt = flip_dense(&t, op.m());
                let e = rel_err_vec(op.sym_matvec(&x).unwrap().as_slice(), &dense_apply(&yt, &x));
                assert!(e < 1e-12, "{scheme} sym: {e:e}");
            }
        }
    }
}

#[test]
fn materialized_matrix_is_the_assembled_one() {
    for scheme in ALL_SCHEMES {
        let (op, t) = setup(scheme, 1, 6, 4, 1.3);
        assert!(rel_err(&op.materialize_dense(DEFAULT_DENSE_GUARD).unwrap(), &t) < 1e-13, "{scheme}");
        let (op, t) = setup(scheme, 2, 3, 3, 1.3);
        assert!(rel_err(&op.materialize_dense(DEFAULT_DENSE_GUARD).unwrap(), &t) < 1e-13, "{scheme}");
    }
}

#[test]
fn symmetrized_operator_is_symmetric() {
    for scheme in ALL_SCHEMES {
        let (op, t) = setup(scheme, 1, 7, 5, 1.0);
        let yt = flip_dense(&t, op.m());
        assert!(rel_err(&yt, &yt.transpose()) < 1e-14, "{scheme}");
        let x = probe(7, 5);
        let y = BlockVector::from_fn(7, 5, |k, j| (k as f64 - j as f64).cos()).unwrap();
        let lhs = op.sym_matvec(&x).unwrap().dot(&y);
        let rhs = x.dot(&op.sym_matvec(&y).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{scheme}: {lhs} vs {rhs}");
    }
}

#[test]
fn dense_guard_is_enforced() {
    let (op, _) = setup(Scheme::Bdf2, 1, 8, 8, 1.0);
    assert!(op.materialize_dense(16).is_err());
}

fn op_strategy() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0usize..6, 1usize..3, 2usize..9, 1usize..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_identity_holds((si, dim, n, m1) in op_strategy(), seed in 0u64..1000) {
        let scheme = ALL_SCHEMES[si];
        let (op, _) = setup(scheme, dim, n, m1, 0.9);
        let m = op.m();
        let x = BlockVector::from_fn(n, m, |k, j| (seed as f64 + 1.7 * k as f64 + 0.3 * j as f64).sin()).unwrap();
        let y = BlockVector::from_fn(n, m, |k, j| (seed as f64 * 0.1 + 0.4 * k as f64 - 1.1 * j as f64).cos()).unwrap();
        let lhs = op.matvec(&x).unwrap().dot(&y);
        let rhs = x.dot(&op.transpose_matvec(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn matvec_is_linear((si, dim, n, m1) in op_strategy(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let (op, _) = setup(ALL_SCHEMES[si], dim, n, m1, 1.1);
        let m = op.m();
        let x = probe(n, m);
        let y = BlockVector::from_fn(n, m, |k, j| (k * j) as f64 * 0.01 - 0.2).unwrap();
        let combo = BlockVector::from_fn(n, m, |k, j| alpha * x.block(k)[j] + beta * y.block(k)[j]).unwrap();
        let lhs = op.matvec(&combo).unwrap();
        let tx = op.matvec(&x).unwrap();
        let ty = op.matvec(&y).unwrap();
        for (i, v) in lhs.as_slice().iter().enumerate() {
            let expect = alpha * tx.as_slice()[i] + beta * ty.as_slice()[i];
            prop_assert!((v - expect).abs() <= 1e-11 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn flip_is_an_involution(n in 1usize..12, m in 1usize..6) {
        let x = probe(n, m);
        prop_assert_eq!(flip(&flip(&x)), x);
    }
}
