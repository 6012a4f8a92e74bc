use std::ops::Range;

use ndarray::Array2;

use super::EsnConfig;
use crate::error::{Error, Result};
use crate::link_sim::{SlicedObservation, SymbolFrame};

/// Strided windows over a region of target symbols.
///
/// Input rows are assembled on demand from the borrowed observation, so a
/// dataset over a long frame costs no more memory than the frame itself.
#[derive(Debug, Clone)]
pub struct WindowedDataset<'a> {
    obs: &'a SlicedObservation,
    levels: &'a [i8],
    first_symbol: usize,
    n_steps: usize,
    n_out: usize,
    offset: usize,
    m: usize,
}

/// Windows whose targets tile `region` in blocks of `n_out` symbols.
///
/// Trailing symbols that do not fill a whole block are left untargeted.
/// Window positions outside the observation read as zeros.
pub fn build_windows<'a>(
    obs: &'a SlicedObservation,
    frame: &'a SymbolFrame,
    cfg: &EsnConfig,
    region: Range<usize>,
) -> Result<WindowedDataset<'a>> {
    cfg.validate()?;
    if obs.sps != cfg.sps || obs.n_samples() % obs.sps != 0 {
        return Err(Error::DimensionMismatch(format!(
            "observation of {} samples at {} sps is not aligned to {} sps",
            obs.n_samples(),
            obs.sps,
            cfg.sps
        )));
    }
    if obs.num_slices() != cfg.num_slices {
        return Err(Error::DimensionMismatch(format!(
            "observation has {} slices, reservoir expects {}",
            obs.num_slices(),
            cfg.num_slices
        )));
    }
    if frame.len() != obs.n_symbols() {
        return Err(Error::DimensionMismatch(format!(
            "frame has {} symbols, observation {}",
            frame.len(),
            obs.n_symbols()
        )));
    }
    if obs.n_symbols() < cfg.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols are fewer than one window of {}",
            obs.n_symbols(),
            cfg.m()
        )));
    }
    if region.start > region.end || region.end > obs.n_symbols() {
        return Err(Error::DimensionMismatch(format!(
            "region {region:?} outside 0..{}",
            obs.n_symbols()
        )));
    }
    Ok(WindowedDataset {
        obs,
        levels: &frame.levels,
        first_symbol: region.start,
        n_steps: region.len() / cfg.n_out,
        n_out: cfg.n_out,
        offset: cfg.target_offset(),
        m: cfg.m(),
    })
}

impl<'a> WindowedDataset<'a> {
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn is_empty(&self) -> bool {
        self.n_steps == 0
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn n_in(&self) -> usize {
        self.m * self.obs.sps * self.obs.num_slices()
    }

    /// Absolute index of the first target symbol of step `t`.
    pub fn center_symbol_index(&self, t: usize) -> usize {
        self.first_symbol + t * self.n_out
    }

    /// Targeted symbols, `first..first + n_steps * n_out`.
    pub fn targeted(&self) -> Range<usize> {
        self.first_symbol..self.first_symbol + self.n_steps * self.n_out
    }

    pub fn targets(&self, t: usize) -> &'a [i8] {
        let c = self.center_symbol_index(t);
        &self.levels[c..c + self.n_out]
    }

    /// Writes the input vector of step `t`: slices outermost, then window
    /// symbols, then the samples of each symbol.
    pub fn input_into(&self, t: usize, buf: &mut [f64]) {
        let sps = self.obs.sps;
        let n_sym = self.obs.n_symbols() as isize;
        let start = self.center_symbol_index(t) as isize - self.offset as isize;
        let per_slice = self.m * sps;
        debug_assert_eq!(buf.len(), per_slice * self.obs.num_slices());
        for (s, row) in self.obs.data.outer_iter().enumerate() {
            let dst = &mut buf[s * per_slice..(s + 1) * per_slice];
            for w in 0..self.m {
                let sym = start + w as isize;
                let out = &mut dst[w * sps..(w + 1) * sps];
                if (0..n_sym).contains(&sym) {
                    let base = sym as usize * sps;
                    for (j, o) in out.iter_mut().enumerate() {
                        *o = row[base + j];
                    }
                } else {
                    out.fill(0.0);
                }
            }
        }
    }

    pub fn input(&self, t: usize) -> Vec<f64> {
        let mut buf = vec![0.0; self.n_in()];
        self.input_into(t, &mut buf);
        buf
    }

    /// Materialized `n_steps × n_in` input matrix.
    pub fn inputs(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_steps, self.n_in()));
        for (t, mut row) in out.outer_iter_mut().enumerate() {
            self.input_into(t, row.as_slice_mut().expect("standard layout"));
        }
        out
    }

    /// Materialized `n_steps × n_out` target matrix.
    pub fn targets_matrix(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n_steps, self.n_out), |(t, j)| self.targets(t)[j] as f64)
    }
}
