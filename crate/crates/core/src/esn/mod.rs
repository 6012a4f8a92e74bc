//! Sliding-window echo state network with a strided multi-symbol readout.
//!
//! One reservoir step consumes a window of `M = 2k + 1` symbols of every
//! slice and emits `n_out` consecutive symbol estimates centred in that
//! window; the next step advances by `n_out` symbols. The state carries
//! across steps within a region and starts from zero at each region.

mod artifact;
mod readout;
mod reservoir;
mod sparse;
mod windows;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_sim::LinkParams;

pub use artifact::{read_weights, weights_from_str, weights_to_string, write_weights};
pub use readout::{accumulate_readout, fit_readout, solve_masked_ridge, train_readout, RidgeAccumulator};
pub use reservoir::{equalize, fold_states, run_reservoir, update_state, ReservoirState};
pub use sparse::SparseMatrix;
pub use windows::{build_windows, WindowedDataset};

/// How the readout sparsity pattern is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMask {
    /// Every output sees every reservoir node.
    #[default]
    Dense,
    /// Each readout coefficient is kept with probability `s_out`.
    Bernoulli,
}

/// Reservoir hyper-parameters that do not depend on the link or readout width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsnParams {
    /// One-sided window length in symbols.
    pub k: usize,
    pub n_res: usize,
    pub spectral_radius: f64,
    /// Leaking rate α in `(0, 1]`.
    pub leak: f64,
    /// Nonzero fraction of the input weights.
    pub s_in: f64,
    /// Nonzero fraction of the recurrent weights.
    pub s_res: f64,
    /// Nonzero fraction of the readout, used by [`ReadoutMask::Bernoulli`].
    pub s_out: f64,
    /// Input weights are uniform on `[-input_scaling, input_scaling]`.
    pub input_scaling: f64,
    pub ridge_lambda: f64,
    /// When non-empty, the regularization is picked from these values by
    /// symbol errors on a held-out tail of the training region, overriding
    /// `ridge_lambda`.
    pub ridge_lambda_grid: Vec<f64>,
    /// Training steps discarded before fitting the readout.
    pub washout: usize,
    pub readout_mask: ReadoutMask,
}

impl Default for EsnParams {
    fn default() -> Self {
        EsnParams {
            k: 11,
            n_res: 30,
            spectral_radius: 1.2,
            leak: 0.7,
            s_in: 0.1,
            s_res: 0.05,
            s_out: 0.1,
            input_scaling: 1.0,
            ridge_lambda: 1e-4,
            ridge_lambda_grid: Vec::new(),
            washout: 100,
            readout_mask: ReadoutMask::Dense,
        }
    }
}

impl EsnParams {
    pub fn window_len(&self) -> usize {
        2 * self.k + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_res == 0 {
            return Err(Error::config("n_res", "must be positive"));
        }
        if !(self.spectral_radius.is_finite() && self.spectral_radius > 0.0) {
            return Err(Error::config("spectral_radius", "must be positive"));
        }
        if !(self.leak > 0.0 && self.leak <= 1.0) {
            return Err(Error::config("leak", "must lie in (0, 1]"));
        }
        for (name, s) in [("s_in", self.s_in), ("s_res", self.s_res), ("s_out", self.s_out)] {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::config(name, "must lie in (0, 1]"));
            }
        }
        if !(self.input_scaling.is_finite() && self.input_scaling > 0.0) {
            return Err(Error::config("input_scaling", "must be positive"));
        }
        if !(self.ridge_lambda.is_finite() && self.ridge_lambda >= 0.0) {
            return Err(Error::config("ridge_lambda", "must be finite and non-negative"));
        }
        if self.ridge_lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::config("ridge_lambda_grid", "values must be finite and non-negative"));
        }
        Ok(())
    }
}

/// A reservoir bound to a link front end and a readout width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnConfig {
    pub params: EsnParams,
    pub n_out: usize,
    pub sps: usize,
    pub num_slices: usize,
    pub seed: u64,
}

impl EsnConfig {
    pub fn new(params: EsnParams, n_out: usize, link: &LinkParams, seed: u64) -> Self {
        EsnConfig {
            params,
            n_out,
            sps: link.sps,
            num_slices: link.num_slices,
            seed,
        }
    }

    /// Window length `M = 2k + 1`.
    pub fn m(&self) -> usize {
        self.params.window_len()
    }

    pub fn n_in(&self) -> usize {
        self.m() * self.sps * self.num_slices
    }

    /// Position of the first target symbol inside the window.
    pub fn target_offset(&self) -> usize {
        (self.m() - self.n_out) / 2
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_out == 0 || self.n_out > self.m() {
            return Err(Error::config("n_out", format!("must lie in 1..={}", self.m())));
        }
        if self.sps == 0 {
            return Err(Error::config("sps", "must be positive"));
        }
        if self.num_slices == 0 {
            return Err(Error::config("num_slices", "must be positive"));
        }
        Ok(())
    }
}

/// Fixed random weights plus the trained readout.
#[derive(Debug, Clone, PartialEq)]
pub struct EsnWeights {
    pub w_in: SparseMatrix,
    pub w_res: SparseMatrix,
    /// `n_out × n_res`, row-major.
    pub out_mask: Vec<bool>,
    /// `n_out × (n_res + 1)`, row-major; the last column is the bias.
    pub w_out: Vec<f64>,
    pub n_out: usize,
}

impl EsnWeights {
    pub fn n_res(&self) -> usize {
        self.w_res.rows()
    }

    pub fn n_in(&self) -> usize {
        self.w_in.cols()
    }

    pub fn mask_row(&self, r: usize) -> &[bool] {
        let n = self.n_res();
        &self.out_mask[r * n..(r + 1) * n]
    }

    pub fn w_out_row(&self, r: usize) -> &[f64] {
        let n = self.n_res() + 1;
        &self.w_out[r * n..(r + 1) * n]
    }

    /// `y = W_out [x; 1]`.
    pub fn readout_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n_res();
        for (r, out) in y.iter_mut().enumerate() {
            let row = self.w_out_row(r);
            *out = row[n] + row[..n].iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// Draws input and recurrent weights and the readout mask.
///
/// The recurrent matrix is rescaled to the configured spectral radius. A
/// draw with zero spectral radius (for example one with no cycles) is
/// redrawn once before giving up.
pub fn init_weights<R: Rng + ?Sized>(cfg: &EsnConfig, rng: &mut R) -> Result<EsnWeights> {
    cfg.validate()?;
    let p = &cfg.params;
    let w_in = SparseMatrix::random(p.n_res, cfg.n_in(), p.s_in, p.input_scaling, rng);

    let mut w_res = None;
    for _ in 0..2 {
        let mut candidate = SparseMatrix::random(p.n_res, p.n_res, p.s_res, 1.0, rng);
        let radius = candidate.spectral_radius()?;
        if radius > 0.0 {
            candidate.scale(p.spectral_radius / radius);
            w_res = Some(candidate);
            break;
        }
    }
    let w_res = w_res.ok_or_else(|| {
        Error::DegenerateReservoir(format!(
            "two draws of a {0}x{0} matrix at density {1} had zero spectral radius",
            p.n_res, p.s_res
        ))
    })?;

    let out_mask = match p.readout_mask {
        ReadoutMask::Dense => vec![true; cfg.n_out * p.n_res],
        ReadoutMask::Bernoulli => (0..cfg.n_out * p.n_res).map(|_| rng.random_bool(p.s_out)).collect(),
    };

    Ok(EsnWeights {
        w_in,
        w_res,
        out_mask,
        w_out: vec![0.0; cfg.n_out * (p.n_res + 1)],
        n_out: cfg.n_out,
    })
}
