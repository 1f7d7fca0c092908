//! Orthonormal DST-I and unitary time-direction FFTs on block vectors.
//!
//! The DST-I matrix `S_n = sqrt(2/(n+1)) [sin(ij pi/(n+1))]` is symmetric and
//! involutory. It diagonalizes the tridiagonal `P_n = tridiag(1/2, 0, 1/2)` and
//! the finite-difference Dirichlet Laplacian, so one plan serves both the time
//! direction (preconditioner) and the spatial directions (mass/stiffness).

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::block::{transpose, BlockVector};
use crate::error::{check_dim, Error, Result};

/// Below this many scalars, row batches run on the calling thread.
const PAR_THRESHOLD: usize = 1 << 14;

/// Orthonormal DST-I of a fixed length, computed through an odd extension of
/// length `2(n+1)`. Two real sequences share one complex FFT.
#[derive(Clone)]
pub struct Dst1 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Dst1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dst1").field("n", &self.n).finish()
    }
}

struct DstScratch {
    buf: Vec<Complex64>,
    fft: Vec<Complex64>,
}

impl Dst1 {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("DST-I length must be >= 1".into()));
        }
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Ok(Self {
            n,
            fft,
            scale: (2.0 / (n as f64 + 1.0)).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn scratch(&self) -> DstScratch {
        DstScratch {
            buf: vec![Complex64::default(); 2 * (self.n + 1)],
            fft: vec![Complex64::default(); self.fft.get_inplace_scratch_len()],
        }
    }

    /// Transforms `a` and (optionally) `b` in place with a single FFT.
    ///
    /// With `z = odd_ext(a) + i odd_ext(b)` the spectrum is
    /// `Z_k = -2i A_k + 2 B_k`, where `A_k`, `B_k` are the unnormalized sine sums.
    fn process_pair(&self, a: &mut [f64], b: Option<&mut [f64]>, s: &mut DstScratch) {
        let n = self.n;
        let len = 2 * (n + 1);
        s.buf[0] = Complex64::default();
        s.buf[n + 1] = Complex64::default();
        match &b {
            Some(b) => {
                for j in 0..n {
                    let c = Complex64::new(a[j], b[j]);
                    s.buf[j + 1] = c;
                    s.buf[len - 1 - j] = -c;
                }
            }
            None => {
                for j in 0..n {
                    s.buf[j + 1] = Complex64::new(a[j], 0.0);
                    s.buf[len - 1 - j] = Complex64::new(-a[j], 0.0);
                }
            }
        }
        self.fft.process_with_scratch(&mut s.buf, &mut s.fft);
        let half = 0.5 * self.scale;
        for k in 0..n {
            a[k] = -s.buf[k + 1].im * half;
        }
        if let Some(b) = b {
            for k in 0..n {
                b[k] = s.buf[k + 1].re * half;
            }
        }
    }

    /// In-place transform of a single sequence.
    pub fn process(&self, v: &mut [f64]) -> Result<()> {
        check_dim(self.n, v.len())?;
        let mut s = self.scratch();
        self.process_pair(v, None, &mut s);
        Ok(())
    }

    fn rows_with(&self, data: &mut [f64], s: &mut DstScratch) {
        let n = self.n;
        for pair in data.chunks_mut(2 * n) {
            if pair.len() == 2 * n {
                let (a, b) = pair.split_at_mut(n);
                self.process_pair(a, Some(b), s);
            } else {
                self.process_pair(pair, None, s);
            }
        }
    }

    /// In-place transform of every contiguous row of length `n` in `data`.
    pub fn process_rows(&self, data: &mut [f64]) -> Result<()> {
        if data.len() % self.n != 0 {
            return Err(Error::Dimension {
                expected: self.n * (data.len() / self.n + 1),
                got: data.len(),
            });
        }
        if data.len() < PAR_THRESHOLD {
            let mut s = self.scratch();
            self.rows_with(data, &mut s);
        } else {
            // Chunks hold an even number of rows so that pairing is preserved.
            let rows_per_task = (PAR_THRESHOLD / self.n).max(2) & !1;
            data.par_chunks_mut(rows_per_task * self.n)
                .for_each_init(|| self.scratch(), |s, chunk| self.rows_with(chunk, s));
        }
        Ok(())
    }
}

/// Orthonormal DST-I of `v` (out of place).
pub fn dst1(v: &[f64]) -> Result<Vec<f64>> {
    let plan = Dst1::new(v.len())?;
    let mut out = v.to_vec();
    plan.process(&mut out)?;
    Ok(out)
}

/// Spatial grid layout. Two-dimensional grids are stored row-major with the
/// x index running fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceShape {
    OneD(usize),
    TwoD(usize, usize),
}

impl SpaceShape {
    pub fn len(&self) -> usize {
        match *self {
            SpaceShape::OneD(m) => m,
            SpaceShape::TwoD(mx, my) => mx * my,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceShape::OneD(_) => 1,
            SpaceShape::TwoD(..) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftDirection {
    Forward,
    Inverse,
}

/// Precomputed transforms for block vectors with `n` time blocks over a fixed
/// spatial grid. Immutable once built; all methods take `&self`.
#[derive(Clone)]
pub struct TransformPlan {
    n: usize,
    shape: SpaceShape,
    time_dst: Dst1,
    space_x: Dst1,
    space_y: Option<Dst1>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan")
            .field("n", &self.n)
            .field("shape", &self.shape)
            .finish()
    }
}

impl TransformPlan {
    pub fn new(n: usize, shape: SpaceShape) -> Result<Self> {
        if n == 0 || shape.is_empty() {
            return Err(Error::Parameter(format!(
                "transform plan needs n >= 1 and a nonempty grid, got n={n}, {shape:?}"
            )));
        }
        let (space_x, space_y) = match shape {
            SpaceShape::OneD(m) => (Dst1::new(m)?, None),
            SpaceShape::TwoD(mx, my) => (Dst1::new(mx)?, Some(Dst1::new(my)?)),
        };
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            shape,
            time_dst: Dst1::new(n)?,
            space_x,
            space_y,
            fft_forward: planner.plan_fft_forward(n),
            fft_inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    fn check(&self, len: usize) -> Result<()> {
        check_dim(self.n * self.m(), len)
    }

    /// Applies `I_n ⊗ U_m` in place, `U_m` being the (tensor) spatial DST.
    pub fn space_inplace(&self, data: &mut [f64]) -> Result<()> {
        self.check(data.len())?;
        self.space_x.process_rows(data)?;
        if let (SpaceShape::TwoD(mx, my), Some(dst_y)) = (self.shape, &self.space_y) {
            let m = mx * my;
            let per_block = |block: &mut [f64], tmp: &mut Vec<f64>| {
                transpose(block, my, mx, tmp);
                dst_y.process_rows(tmp).expect("row length matches plan");
                transpose(tmp, mx, my, block);
            };
            if data.len() < PAR_THRESHOLD {
                let mut tmp = vec![0.0; m];
                data.chunks_mut(m).for_each(|b| per_block(b, &mut tmp));
            } else {
                data.par_chunks_mut(m)
                    .for_each_init(|| vec![0.0; m], |tmp, b| per_block(b, tmp));
            }
        }
        Ok(())
    }

    /// Applies `S_n ⊗ I_m` in place.
    pub fn time_dst_inplace(&self, data: &mut [f64]) -> Result<()> {
        self.check(data.len())?;
        let (n, m) = (self.n, self.m());
        if m == 1 {
            return self.time_dst.process_rows(data);
        }
        let mut tmp = vec![0.0; n * m];
        transpose(data, n, m, &mut tmp);
        self.time_dst.process_rows(&mut tmp)?;
        transpose(&tmp, m, n, data);
        Ok(())
    }

    /// Returns `(S_n ⊗ U_m) x`. Every factor is involutory, so this map is its own inverse.
    pub fn apply_kron(&self, x: &BlockVector) -> Result<BlockVector> {
        x.same_shape(self.n, self.m())?;
        let mut out = x.clone();
        self.apply_kron_inplace(out.as_mut_slice())?;
        Ok(out)
    }

    pub fn apply_kron_inplace(&self, data: &mut [f64]) -> Result<()> {
        self.space_inplace(data)?;
        self.time_dst_inplace(data)
    }

    /// Unitary DFT of length `n` along the time index of every spatial component.
    pub fn fft_time_inplace(&self, data: &mut [Complex64], dir: FftDirection) -> Result<()> {
        self.check(data.len())?;
        let (n, m) = (self.n, self.m());
        let fft = match dir {
            FftDirection::Forward => &self.fft_forward,
            FftDirection::Inverse => &self.fft_inverse,
        };
        let scale = 1.0 / (n as f64).sqrt();
        let mut tmp = vec![Complex64::default(); n * m];
        transpose(data, n, m, &mut tmp);
        let run = |rows: &mut [Complex64], scratch: &mut Vec<Complex64>| {
            for row in rows.chunks_mut(n) {
                fft.process_with_scratch(row, scratch);
            }
        };
        let scratch_len = fft.get_inplace_scratch_len();
        if tmp.len() < PAR_THRESHOLD {
            let mut scratch = vec![Complex64::default(); scratch_len];
            run(&mut tmp, &mut scratch);
        } else {
            let rows_per_task = (PAR_THRESHOLD / n).max(1);
            tmp.par_chunks_mut(rows_per_task * n).for_each_init(
                || vec![Complex64::default(); scratch_len],
                |scratch, rows| run(rows, scratch),
            );
        }
        transpose(&tmp, m, n, data);
        data.iter_mut().for_each(|c| *c *= scale);
        Ok(())
    }

    /// Out-of-place time FFT of a real block vector.
    pub fn fft_time(&self, x: &BlockVector, dir: FftDirection) -> Result<Vec<Complex64>> {
        x.same_shape(self.n, self.m())?;
        let mut data: Vec<Complex64> = x.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_time_inplace(&mut data, dir)?;
        Ok(data)
    }
}
