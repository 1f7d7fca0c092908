//! Time-major block vectors: `n` blocks of `m` spatial unknowns each.

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    data: Vec<f64>,
    n: usize,
    m: usize,
}

impl BlockVector {
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::from_vec(vec![0.0; n * m], n, m)
    }

    /// Wraps `data` as `n` consecutive blocks of length `m`.
    pub fn from_vec(data: Vec<f64>, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Parameter(format!(
                "block vector needs n >= 1 and m >= 1, got n={n}, m={m}"
            )));
        }
        check_dim(n * m, data.len())?;
        Ok(Self { data, n, m })
    }

    /// Builds a vector by evaluating `f(k, j)` for time block `k` and spatial index `j`.
    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * m);
        for k in 0..n {
            for j in 0..m {
                data.push(f(k, j));
            }
        }
        Self::from_vec(data, n, m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn block(&self, k: usize) -> &[f64] {
        &self.data[k * self.m..(k + 1) * self.m]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [f64] {
        let m = self.m;
        &mut self.data[k * m..(k + 1) * m]
    }

    pub fn dot(&self, other: &BlockVector) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub(crate) fn same_shape(&self, n: usize, m: usize) -> Result<()> {
        check_dim(n, self.n)?;
        check_dim(m, self.m)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Out-of-place transpose of a row-major `rows x cols` matrix.
pub(crate) fn transpose<T: Copy + Send + Sync>(src: &[T], rows: usize, cols: usize, dst: &mut [T]) {
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    const TILE: usize = 32;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(BlockVector::from_vec(vec![1.0; 5], 2, 3).is_err());
        assert!(BlockVector::zeros(0, 3).is_err());
        assert!(BlockVector::zeros(2, 0).is_err());
    }

    #[test]
    fn blocks_are_time_major() {
        let x = BlockVector::from_fn(3, 2, |k, j| (10 * k + j) as f64).unwrap();
        assert_eq!(x.block(1), &[10.0, 11.0]);
        assert_eq!(x.as_slice()[5], 21.0);
    }

    #[test]
    fn transpose_roundtrip() {
        let src: Vec<f64> = (0..35).map(|v| v as f64).collect();
        let mut t = vec![0.0; 35];
        let mut back = vec![0.0; 35];
        transpose(&src, 5, 7, &mut t);
        assert_eq!(t[1], src[7]);
        transpose(&t, 7, 5, &mut back);
        assert_eq!(src, back);
    }
}
