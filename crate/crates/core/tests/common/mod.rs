//! Dense reference constructions written directly from the matrix formulas,
//! without going through the spectral code paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use pintau_core::Scheme;

pub fn laplacian_1d(m: usize, a: f64) -> DMatrix<f64> {
    let h = 1.0 / (m as f64 + 1.0);
    let s = a / (h * h);
    DMatrix::from_fn(m, m, |i, j| match i.abs_diff(j) {
        0 => 2.0 * s,
        1 => -s,
        _ => 0.0,
    })
}

/// `I ⊗ K + K ⊗ I` with `x` the fastest index.
pub fn laplacian(dim: usize, m1: usize, a: f64) -> DMatrix<f64> {
    let k = laplacian_1d(m1, a);
    if dim == 1 {
        return k;
    }
    let id = DMatrix::<f64>::identity(m1, m1);
    id.kronecker(&k) + k.kronecker(&id)
}

/// Toeplitz blocks `A_(0), A_(1), ...` of each scheme, with `M = I`.
pub fn scheme_blocks(scheme: Scheme, tau: f64, k: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let id = DMatrix::<f64>::identity(k.nrows(), k.ncols());
    match scheme {
        Scheme::Theta(theta) => vec![&id + k * (theta * tau), -&id + k * ((1.0 - theta) * tau)],
        Scheme::Bdf2 => vec![&id * 1.5 + k * tau, &id * -2.0, &id * 0.5],
        Scheme::WaveTwoStep => vec![&id + k * (tau * tau), &id * -2.0, id.clone()],
        Scheme::WaveCentral => vec![id.clone(), &id * -2.0 + k * (tau * tau), id],
    }
}

/// Block lower-triangular Toeplitz matrix with the given first block column.
pub fn block_toeplitz(blocks: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let m = blocks[0].nrows();
    let mut t = DMatrix::<f64>::zeros(n * m, n * m);
    for i in 0..n {
        for (k, b) in blocks.iter().enumerate() {
            if i >= k {
                t.view_mut((i * m, (i - k) * m), (m, m)).copy_from(b);
            }
        }
    }
    t
}

/// Symmetric block Toeplitz matrix from blocks `C_0, C_1, ...` (`C_{-k} = C_k`).
pub fn symmetric_block_toeplitz(blocks: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let m = blocks[0].nrows();
    let mut t = DMatrix::<f64>::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            if let Some(b) = blocks.get(i.abs_diff(j)) {
                t.view_mut((i * m, j * m), (m, m)).copy_from(b);
            }
        }
    }
    t
}

/// Block Strang circulant with first block column `A_0, ..., A_l, 0, ...`.
pub fn block_circulant(blocks: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let m = blocks[0].nrows();
    let mut c = DMatrix::<f64>::zeros(n * m, n * m);
    for i in 0..n {
        for (k, b) in blocks.iter().enumerate() {
            let j = (i + n - k % n) % n;
            let mut view = c.view_mut((i * m, j * m), (m, m));
            view += b;
        }
    }
    c
}

/// Block anti-identity applied from the left.
pub fn flip_dense(a: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let n = a.nrows() / m;
    let mut out = DMatrix::<f64>::zeros(a.nrows(), a.ncols());
    for i in 0..n {
        out.rows_mut((n - 1 - i) * m, m).copy_from(&a.rows(i * m, m));
    }
    out
}

/// `P_n = tridiag(1/2, 0, 1/2)`, whose eigenvalues are `cos(iπ/(n+1))`.
pub fn p_n(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 0.5 } else { 0.0 })
}

/// Coefficients `q̄_k` of `|g(x)|² = Σ_k q̄_k cos^k x` for commuting symmetric
/// blocks, expanded by hand for `l ≤ 2`.
pub fn qbar(blocks: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let a0 = &blocks[0];
    let a1 = &blocks[1];
    match blocks.len() {
        2 => vec![a0 * a0 + a1 * a1, (a0 * a1) * 2.0],
        3 => {
            let a2 = &blocks[2];
            vec![
                a0 * a0 + a1 * a1 + a2 * a2 - (a0 * a2) * 2.0,
                (a0 * a1 + a1 * a2) * 2.0,
                (a0 * a2) * 4.0,
            ]
        }
        l => panic!("no expansion for {l} blocks"),
    }
}

/// `Σ_k P_n^k ⊗ q̄_k`.
pub fn tau_square(blocks: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let p = p_n(n);
    let mut pk = DMatrix::<f64>::identity(n, n);
    let q = qbar(blocks);
    let m = blocks[0].nrows();
    let mut out = DMatrix::<f64>::zeros(n * m, n * m);
    for qk in &q {
        out += pk.kronecker(qk);
        pk = &pk * &p;
    }
    out
}

pub fn sym_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new((a + a.transpose()) * 0.5);
    let d = eig.eigenvalues.map(f);
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

pub fn sqrtm(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_fn(a, f64::sqrt)
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max().max(f64::MIN_POSITIVE)
}

pub fn rel_err_vec(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    diff / scale.max(f64::MIN_POSITIVE)
}

pub const SCHEMES: [Scheme; 4] = [Scheme::Theta(0.5), Scheme::Bdf2, Scheme::WaveTwoStep, Scheme::WaveCentral];

pub const ALL_SCHEMES: [Scheme; 6] = [
    Scheme::Theta(1.0),
    Scheme::Theta(0.5),
    Scheme::Theta(0.0),
    Scheme::Bdf2,
    Scheme::WaveTwoStep,
    Scheme::WaveCentral,
];
