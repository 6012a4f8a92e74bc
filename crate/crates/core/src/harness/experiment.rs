use std::ops::Range;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esn::{
    accumulate_readout, build_windows, equalize, fold_states, init_weights, EsnConfig, EsnParams, EsnWeights,
    RidgeAccumulator, WindowedDataset,
};
use crate::eval::{complexity_rmps, count_errors, decide, hard_decision, BerReport};
use crate::link_sim::{simulate_link, LinkConfig, LinkParams};
use crate::rng::{substream, WEIGHTS_STREAM};

/// Everything needed to evaluate one grid point for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub label: String,
    pub link: LinkParams,
    pub esn: EsnParams,
    pub fiber_length_km: f64,
    pub snr_db: f64,
    pub n_out: usize,
    pub total_symbols: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

/// Symbol ranges of one experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub guard: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
}

impl PointSpec {
    pub fn link_config(&self) -> LinkConfig {
        LinkConfig::new(
            self.link.clone(),
            self.fiber_length_km,
            self.snr_db,
            self.total_symbols,
            self.seed,
        )
    }

    pub fn esn_config(&self) -> EsnConfig {
        EsnConfig::new(self.esn.clone(), self.n_out, &self.link, self.seed)
    }

    /// Contiguous training prefix after the edge guard, a gap of `k` symbols,
    /// then the test region up to the trailing guard. Both regions are cut to
    /// whole output blocks.
    pub fn split(&self) -> Result<Split> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction", "must lie in (0, 1)"));
        }
        let n = self.total_symbols;
        let guard = self.link_config().guard_symbols();
        let k = self.esn.k;
        let blocks = |len: usize| len / self.n_out * self.n_out;
        let train_len = blocks((self.train_fraction * n as f64).floor() as usize);
        let train = guard..guard + train_len;
        let test_start = train.end + k;
        let end = n.saturating_sub(guard);
        if test_start >= end {
            return Err(Error::config(
                "total_symbols",
                format!("{n} symbols leave no test region after guard {guard} and training {train_len}"),
            ));
        }
        let test = test_start..test_start + blocks(end - test_start);
        Ok(Split { guard, train, test })
    }
}

/// Result of one experiment point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointOutcome {
    pub report: BerReport,
    pub rmps: f64,
    /// Regularization the readout was fitted with.
    pub ridge_lambda: f64,
    pub train_symbols: usize,
    pub test_symbols: usize,
    pub wall_time_s: f64,
}

/// Simulates the link, trains the readout on the training prefix and counts
/// errors over the test region.
pub fn run_experiment(point: &PointSpec) -> Result<PointOutcome> {
    let started = Instant::now();
    let link = point.link_config();
    let esn = point.esn_config();
    esn.validate()?;
    let split = point.split()?;

    let (obs, frame) = simulate_link(&link)?;
    let mut weights = init_weights(&esn, &mut substream(point.seed, WEIGHTS_STREAM))?;

    let train = build_windows(&obs, &frame, &esn, split.train.clone())?;
    let ridge_lambda = train_readout(&train, &mut weights, &esn)?;

    let (tested, estimates) = equalize(&obs, &frame, &weights, &esn, split.test.clone(), esn.params.washout)?;
    let decided = hard_decision(&estimates);
    let report = count_errors(&decided, &frame.levels[tested.clone()], esn.n_out)?;

    Ok(PointOutcome {
        report,
        rmps: complexity_rmps(&esn),
        ridge_lambda,
        train_symbols: train.targeted().len(),
        test_symbols: tested.len(),
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Fits the readout on `train` and returns the regularization used.
///
/// With a non-empty `ridge_lambda_grid`, the last fifth of the post-washout
/// training steps is held out; each candidate is fitted on the rest and
/// scored by held-out symbol errors, then squared error. The winner is refit
/// on the whole training region.
pub fn train_readout(train: &WindowedDataset<'_>, w: &mut EsnWeights, esn: &EsnConfig) -> Result<f64> {
    let p = &esn.params;
    if p.ridge_lambda_grid.is_empty() {
        let acc = accumulate_readout(train, w, esn)?;
        w.w_out = acc.solve(&w.out_mask, p.ridge_lambda)?;
        return Ok(p.ridge_lambda);
    }

    let n = train.n_steps();
    let usable = n.saturating_sub(p.washout);
    let fit_end = p.washout + usable * 4 / 5;
    if usable < 5 {
        return Err(Error::config(
            "washout",
            format!("{} steps leave too few of {n} for a validation split", p.washout),
        ));
    }
    let (n_res, n_out) = (w.n_res(), esn.n_out);
    let mut fit = RidgeAccumulator::new(n_res, n_out);
    let mut held = RidgeAccumulator::new(n_res, n_out);
    let mut held_states = Vec::with_capacity((n - fit_end) * n_res);
    let mut held_targets: Vec<i8> = Vec::with_capacity((n - fit_end) * n_out);
    let mut y = vec![0.0; n_out];
    fold_states(train, w, p.leak, |t, x| {
        if t < p.washout {
            return;
        }
        let targets = train.targets(t);
        y.iter_mut().zip(targets).for_each(|(d, &l)| *d = l as f64);
        if t < fit_end {
            fit.push(x, &y);
        } else {
            held.push(x, &y);
            held_states.extend_from_slice(x);
            held_targets.extend_from_slice(targets);
        }
    });

    let mut best: Option<(u64, f64, f64)> = None;
    for &lambda in &p.ridge_lambda_grid {
        let w_out = match fit.solve(&w.out_mask, lambda) {
            Ok(v) => v,
            Err(Error::SingularNormalMatrix { .. }) => continue,
            Err(e) => return Err(e),
        };
        let (mut errors, mut sq) = (0u64, 0.0);
        for (x, targets) in held_states.chunks(n_res).zip(held_targets.chunks(n_out)) {
            for (r, &target) in targets.iter().enumerate() {
                let row = &w_out[r * (n_res + 1)..(r + 1) * (n_res + 1)];
                let est = row[n_res] + row[..n_res].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                errors += (decide(est) != target) as u64;
                sq += (est - target as f64).powi(2);
            }
        }
        if best.is_none_or(|(e, s, _)| (errors, sq) < (e, s)) {
            best = Some((errors, sq, lambda));
        }
    }
    let (_, _, lambda) = best.ok_or(Error::SingularNormalMatrix { row: 0 })?;
    fit.merge(&held);
    w.w_out = fit.solve(&w.out_mask, lambda)?;
    Ok(lambda)
}
