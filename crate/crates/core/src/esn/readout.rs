use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use super::reservoir::fold_states;
use super::{EsnConfig, EsnWeights, WindowedDataset};
use crate::error::{Error, Result};

/// Relative pivot below which a normal matrix counts as singular.
const PIVOT_TOL: f64 = 1e-12;

/// Running normal-equation sums `Σ z zᵀ` and `Σ z yᵀ` with `z = [x; 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeAccumulator {
    n_res: usize,
    n_out: usize,
    gram: Vec<f64>,
    cross: Vec<f64>,
    count: usize,
}

impl RidgeAccumulator {
    pub fn new(n_res: usize, n_out: usize) -> Self {
        let d = n_res + 1;
        RidgeAccumulator {
            n_res,
            n_out,
            gram: vec![0.0; d * d],
            cross: vec![0.0; d * n_out],
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Adds the sums of another accumulator of the same shape.
    pub fn merge(&mut self, other: &RidgeAccumulator) {
        assert_eq!((self.n_res, self.n_out), (other.n_res, other.n_out));
        self.gram.iter_mut().zip(&other.gram).for_each(|(a, b)| *a += b);
        self.cross.iter_mut().zip(&other.cross).for_each(|(a, b)| *a += b);
        self.count += other.count;
    }

    pub fn push(&mut self, x: &[f64], y: &[f64]) {
        debug_assert_eq!(x.len(), self.n_res);
        debug_assert_eq!(y.len(), self.n_out);
        let d = self.n_res + 1;
        let z = |i: usize| if i < self.n_res { x[i] } else { 1.0 };
        // Upper triangle only; mirrored in `solve`.
        for i in 0..d {
            let zi = z(i);
            let row = &mut self.gram[i * d..(i + 1) * d];
            for (j, g) in row.iter_mut().enumerate().skip(i) {
                *g += zi * z(j);
            }
            for (c, &yv) in self.cross[i * self.n_out..(i + 1) * self.n_out].iter_mut().zip(y) {
                *c += zi * yv;
            }
        }
        self.count += 1;
    }

    /// Masked ridge solution, `n_out × (n_res + 1)` row-major.
    pub fn solve(&self, mask: &[bool], lambda: f64) -> Result<Vec<f64>> {
        let d = self.n_res + 1;
        let gram = DMatrix::from_fn(d, d, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            self.gram[a * d + b]
        });
        let cross = DMatrix::from_row_slice(d, self.n_out, &self.cross);
        solve_masked_ridge(&gram, &cross, mask, lambda)
    }
}

/// Solves one ridge problem per output row over the predictors its mask row
/// keeps, plus an unpenalized bias. `gram` is `Σ z zᵀ` and `cross` is
/// `Σ z yᵀ` with the bias as the last coordinate of `z`.
pub fn solve_masked_ridge(gram: &DMatrix<f64>, cross: &DMatrix<f64>, mask: &[bool], lambda: f64) -> Result<Vec<f64>> {
    let d = gram.nrows();
    let n_res = d - 1;
    let n_out = cross.ncols();
    if gram.ncols() != d || cross.nrows() != d || mask.len() != n_out * n_res {
        return Err(Error::DimensionMismatch(format!(
            "gram {}x{}, cross {}x{}, mask {}",
            gram.nrows(),
            gram.ncols(),
            cross.nrows(),
            cross.ncols(),
            mask.len()
        )));
    }
    let mut w_out = vec![0.0; n_out * d];
    for r in 0..n_out {
        let mut idx: Vec<usize> = (0..n_res).filter(|&j| mask[r * n_res + j]).collect();
        if idx.is_empty() {
            return Err(Error::EmptyMaskRow { row: r });
        }
        idx.push(n_res);
        let k = idx.len();
        let a = DMatrix::from_fn(k, k, |i, j| {
            let reg = if i == j && idx[i] != n_res { lambda } else { 0.0 };
            gram[(idx[i], idx[j])] + reg
        });
        let b = DVector::from_fn(k, |i, _| cross[(idx[i], r)]);
        let diag = a.diagonal();
        let chol = a.cholesky().ok_or(Error::SingularNormalMatrix { row: r })?;
        // Rounding lets an exactly singular matrix through with tiny pivots.
        let l = chol.l_dirty();
        if (0..k).any(|i| l[(i, i)].powi(2) <= PIVOT_TOL * diag[i]) {
            return Err(Error::SingularNormalMatrix { row: r });
        }
        let beta = chol.solve(&b);
        for (i, &j) in idx.iter().enumerate() {
            w_out[r * d + j] = beta[i];
        }
    }
    Ok(w_out)
}

/// Fits the readout on materialized states and targets after discarding the
/// first `washout` rows.
pub fn train_readout(
    states: &Array2<f64>,
    targets: &Array2<f64>,
    washout: usize,
    lambda: f64,
    mask: &[bool],
) -> Result<Vec<f64>> {
    if states.nrows() != targets.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} state rows vs {} target rows",
            states.nrows(),
            targets.nrows()
        )));
    }
    if washout >= states.nrows() {
        return Err(Error::config(
            "washout",
            format!("{washout} steps leave nothing of {} to train on", states.nrows()),
        ));
    }
    let mut acc = RidgeAccumulator::new(states.ncols(), targets.ncols());
    for (x, y) in states.outer_iter().zip(targets.outer_iter()).skip(washout) {
        acc.push(&x.to_vec(), &y.to_vec());
    }
    acc.solve(mask, lambda)
}

/// Runs the reservoir over `ds` and fits `w.w_out` without storing states.
pub fn fit_readout(ds: &WindowedDataset<'_>, w: &mut EsnWeights, cfg: &EsnConfig) -> Result<()> {
    let acc = accumulate_readout(ds, w, cfg)?;
    w.w_out = acc.solve(&w.out_mask, cfg.params.ridge_lambda)?;
    Ok(())
}

/// Normal-equation sums of the post-washout steps of `ds`; lets several
/// regularization strengths be tried on one reservoir run.
pub fn accumulate_readout(ds: &WindowedDataset<'_>, w: &EsnWeights, cfg: &EsnConfig) -> Result<RidgeAccumulator> {
    let washout = cfg.params.washout;
    if washout >= ds.n_steps() {
        return Err(Error::config(
            "washout",
            format!("{washout} steps leave nothing of {} to train on", ds.n_steps()),
        ));
    }
    let mut acc = RidgeAccumulator::new(w.n_res(), cfg.n_out);
    let mut y = vec![0.0; cfg.n_out];
    fold_states(ds, w, cfg.params.leak, |t, x| {
        if t >= washout {
            for (dst, &l) in y.iter_mut().zip(ds.targets(t)) {
                *dst = l as f64;
            }
            acc.push(x, &y);
        }
    });
    Ok(acc)
}
