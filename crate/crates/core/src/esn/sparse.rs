//! Compressed sparse row matrices and their spectral radius.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from a row-major dense buffer, keeping the nonzero entries.
    pub fn from_dense(rows: usize, cols: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), rows * cols);
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..rows {
            for c in 0..cols {
                let v = dense[r * cols + c];
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(values.len());
        }
        SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Each entry is nonzero with probability `density`, with its value
    /// drawn uniformly from `[-amplitude, amplitude]`.
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, density: f64, amplitude: f64, rng: &mut R) -> Self {
        let mut dense = vec![0.0; rows * cols];
        for v in dense.iter_mut() {
            if rng.random_bool(density) {
                *v = rng.random_range(-amplitude..=amplitude);
            }
        }
        Self::from_dense(rows, cols, &dense)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.rows * self.cols) as f64
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.col_idx[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                dense[r * self.cols + c] = v;
            }
        }
        dense
    }

    /// Largest eigenvalue magnitude, by block power (subspace) iteration.
    ///
    /// A block of up to eight vectors is iterated so that complex-conjugate
    /// pairs and dominant cycles (several eigenvalues of equal modulus, common
    /// in very sparse matrices) are captured; the estimate is the largest
    /// Ritz value of the projected block. Stops when successive estimates
    /// agree to `1e-11` relative three times in a row. Directions the matrix
    /// annihilates are dropped from the block, so a nilpotent matrix reports
    /// `0` once its iterates vanish.
    pub fn spectral_radius(&self) -> Result<f64> {
        const MAX_ITER: usize = 10_000;
        const TOL: f64 = 1e-11;

        assert_eq!(self.rows, self.cols, "spectral radius needs a square matrix");
        let n = self.rows;
        let fro = self.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0 || fro == 0.0 {
            return Ok(0.0);
        }
        let p = n.min(8);
        // Fixed start block; the result does not depend on it.
        let mut rng = crate::rng::substream(0x5eed, 0);
        let mut block: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let mut rank = orthonormalize(&mut block);

        let mut prev = f64::NAN;
        let mut stable = 0;
        let mut image = vec![vec![0.0; n]; p];
        for _ in 0..MAX_ITER {
            for (q, z) in block.iter().zip(image.iter_mut()) {
                self.matvec_into(q, z);
            }
            let image_norm = image.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            if rank == 0 || image_norm <= 1e-13 * fro * (rank as f64).sqrt() {
                return Ok(0.0);
            }
            let projected = DMatrix::from_fn(p, p, |i, j| dot(&block[i], &image[j]));
            let ritz = projected
                .complex_eigenvalues()
                .iter()
                .fold(0.0f64, |m, z| m.max(z.norm()));

            if prev.is_finite() && (ritz - prev).abs() <= TOL * ritz {
                stable += 1;
                if stable >= 3 {
                    return Ok(ritz);
                }
            } else {
                stable = 0;
            }
            prev = ritz;

            std::mem::swap(&mut block, &mut image);
            rank = orthonormalize(&mut block);
        }
        Err(Error::PowerIterationDiverged { iterations: MAX_ITER })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt. Vectors that are numerically inside the span of
/// the earlier ones are zeroed; returns how many survive.
fn orthonormalize(block: &mut [Vec<f64>]) -> usize {
    let mut rank = 0;
    for i in 0..block.len() {
        let (head, tail) = block.split_at_mut(i);
        let v = &mut tail[0];
        let before = dot(v, v).sqrt();
        for q in head.iter() {
            let proj = dot(q, v);
            v.iter_mut().zip(q).for_each(|(x, qv)| *x -= proj * qv);
        }
        let after = dot(v, v).sqrt();
        if before > 0.0 && after > 1e-10 * before {
            v.iter_mut().for_each(|x| *x /= after);
            rank += 1;
        } else {
            v.fill(0.0);
        }
    }
    rank
}
