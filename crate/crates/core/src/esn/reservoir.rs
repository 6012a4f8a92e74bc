use std::ops::Range;

use ndarray::Array2;

use super::{build_windows, EsnConfig, EsnWeights, WindowedDataset};
use crate::error::{Error, Result};
use crate::link_sim::{SlicedObservation, SymbolFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    pub x: Vec<f64>,
}

impl ReservoirState {
    pub fn zeros(n_res: usize) -> Self {
        ReservoirState { x: vec![0.0; n_res] }
    }

    /// In-place leaky update; `scratch` must hold `n_res` values.
    pub fn advance(&mut self, u: &[f64], w: &EsnWeights, leak: f64, scratch: &mut [f64]) {
        w.w_in.matvec_into(u, scratch);
        for (r, acc) in scratch.iter_mut().enumerate() {
            *acc += w.w_res.row(r).map(|(c, v)| v * self.x[c]).sum::<f64>();
        }
        for (x, a) in self.x.iter_mut().zip(scratch.iter()) {
            *x = (1.0 - leak) * *x + leak * a.tanh();
        }
    }
}

/// `x' = (1 - α) x + α tanh(W_in u + W_res x)`.
pub fn update_state(x: &ReservoirState, u: &[f64], w: &EsnWeights, leak: f64) -> ReservoirState {
    let mut next = x.clone();
    let mut scratch = vec![0.0; w.n_res()];
    next.advance(u, w, leak, &mut scratch);
    next
}

/// Folds the update over every step from a zero state, calling `visit` with
/// the step index and the state after consuming that step's input.
pub fn fold_states<F>(ds: &WindowedDataset<'_>, w: &EsnWeights, leak: f64, mut visit: F)
where
    F: FnMut(usize, &[f64]),
{
    let mut state = ReservoirState::zeros(w.n_res());
    let mut u = vec![0.0; ds.n_in()];
    let mut scratch = vec![0.0; w.n_res()];
    for t in 0..ds.n_steps() {
        ds.input_into(t, &mut u);
        state.advance(&u, w, leak, &mut scratch);
        visit(t, &state.x);
    }
}

/// Materialized `n_steps × n_res` state matrix.
pub fn run_reservoir(ds: &WindowedDataset<'_>, w: &EsnWeights, cfg: &EsnConfig) -> Array2<f64> {
    let mut states = Array2::zeros((ds.n_steps(), w.n_res()));
    fold_states(ds, w, cfg.params.leak, |t, x| {
        states.row_mut(t).iter_mut().zip(x).for_each(|(s, v)| *s = *v);
    });
    states
}

/// Soft estimates for the symbols of `region`.
///
/// The reservoir starts from zero up to `warmup_steps` steps before the
/// region (as many as fit in front of it) so that its transient has decayed
/// by the first estimated symbol; warm-up steps read only received samples.
/// Returns the targeted range and one estimate per symbol in it.
pub fn equalize(
    obs: &SlicedObservation,
    frame: &SymbolFrame,
    w: &EsnWeights,
    cfg: &EsnConfig,
    region: Range<usize>,
    warmup_steps: usize,
) -> Result<(Range<usize>, Vec<f64>)> {
    if w.n_out != cfg.n_out || w.n_in() != cfg.n_in() || w.n_res() != cfg.params.n_res {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}→{}→{}, config {}→{}→{}",
            w.n_in(),
            w.n_res(),
            w.n_out,
            cfg.n_in(),
            cfg.params.n_res,
            cfg.n_out
        )));
    }
    let warm = warmup_steps.min(region.start / cfg.n_out);
    let start = region.start - warm * cfg.n_out;
    let ds = build_windows(obs, frame, cfg, start..region.end)?;
    let targeted = region.start..ds.targeted().end;

    let mut estimates = Vec::with_capacity(targeted.len());
    let mut y = vec![0.0; cfg.n_out];
    fold_states(&ds, w, cfg.params.leak, |t, x| {
        if t >= warm {
            w.readout_into(x, &mut y);
            estimates.extend_from_slice(&y);
        }
    });
    Ok((targeted, estimates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esn::{init_weights, EsnParams};
    use crate::link_sim::LinkParams;
    use crate::rng::{substream, WEIGHTS_STREAM};

    fn small_cfg(n_out: usize) -> EsnConfig {
        let params = EsnParams {
            k: 1,
            n_res: 6,
            s_in: 0.6,
            s_res: 0.5,
            ..EsnParams::default()
        };
        let link = LinkParams {
            num_slices: 2,
            ..LinkParams::default()
        };
        EsnConfig::new(params, n_out, &link, 3)
    }

    fn random_obs(n_symbols: usize, seed: u64) -> (SlicedObservation, SymbolFrame) {
        use rand::Rng;
        let mut rng = substream(seed, 99);
        let data = Array2::from_shape_fn((2, 2 * n_symbols), |_| rng.random_range(-1.0..1.0));
        let bits = (0..2 * n_symbols).map(|_| rng.random::<bool>() as u8).collect();
        (
            SlicedObservation {
                data,
                sample_rate: 64e9,
                sps: 2,
            },
            SymbolFrame::from_bits(bits),
        )
    }

    /// Straight dense loop written without the sparse or fold helpers.
    fn brute_force(ds: &WindowedDataset<'_>, w: &EsnWeights, leak: f64) -> Vec<Vec<f64>> {
        let n = w.n_res();
        let w_in = w.w_in.to_dense();
        let w_res = w.w_res.to_dense();
        let mut x = vec![0.0; n];
        let mut out = Vec::new();
        for t in 0..ds.n_steps() {
            let u = ds.input(t);
            let mut next = vec![0.0; n];
            for i in 0..n {
                let mut a = 0.0;
                for j in 0..u.len() {
                    a += w_in[i * u.len() + j] * u[j];
                }
                for j in 0..n {
                    a += w_res[i * n + j] * x[j];
                }
                next[i] = (1.0 - leak) * x[i] + leak * a.tanh();
            }
            x = next;
            out.push(x.clone());
        }
        out
    }

    #[test]
    fn fold_matches_brute_force_loop() {
        for seed in 0..10 {
            let cfg = small_cfg(1);
            let (obs, frame) = random_obs(8, seed);
            let w = init_weights(&cfg, &mut substream(seed, WEIGHTS_STREAM)).unwrap();
            let ds = build_windows(&obs, &frame, &cfg, 1..6).unwrap();
            assert_eq!(ds.n_steps(), 5);
            let states = run_reservoir(&ds, &w, &cfg);
            let oracle = brute_force(&ds, &w, cfg.params.leak);
            for t in 0..5 {
                for i in 0..6 {
                    assert!((states[(t, i)] - oracle[t][i]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_input_stays_at_origin() {
        let cfg = small_cfg(1);
        let w = init_weights(&cfg, &mut substream(1, WEIGHTS_STREAM)).unwrap();
        let x = update_state(&ReservoirState::zeros(6), &vec![0.0; cfg.n_in()], &w, 0.7);
        assert!(x.x.iter().all(|&v| v == 0.0));

        let (mut obs, frame) = random_obs(20, 1);
        obs.data.fill(0.0);
        let ds = build_windows(&obs, &frame, &cfg, 0..20).unwrap();
        assert!(run_reservoir(&ds, &w, &cfg).iter().all(|&v| v == 0.0));
        let empty = build_windows(&obs, &frame, &cfg, 5..5).unwrap();
        assert_eq!(run_reservoir(&empty, &w, &cfg).nrows(), 0);
    }

    #[test]
    fn unit_leak_has_no_memory_term() {
        let cfg = small_cfg(1);
        let w = init_weights(&cfg, &mut substream(2, WEIGHTS_STREAM)).unwrap();
        let x0 = ReservoirState {
            x: vec![0.3, -0.2, 0.9, 0.0, -0.5, 0.1],
        };
        let u: Vec<f64> = (0..cfg.n_in()).map(|i| (i as f64 * 0.37).sin()).collect();
        let next = update_state(&x0, &u, &w, 1.0);
        let mut pre = w.w_in.matvec(&u);
        pre.iter_mut().zip(w.w_res.matvec(&x0.x)).for_each(|(a, b)| *a += b);
        for (a, b) in next.x.iter().zip(pre) {
            assert_eq!(*a, b.tanh());
        }
    }

    #[test]
    fn states_stay_inside_unit_cube() {
        let mut cfg = small_cfg(1);
        cfg.params.input_scaling = 50.0;
        let w = init_weights(&cfg, &mut substream(3, WEIGHTS_STREAM)).unwrap();
        let (obs, frame) = random_obs(200, 3);
        let ds = build_windows(&obs, &frame, &cfg, 0..200).unwrap();
        let states = run_reservoir(&ds, &w, &cfg);
        assert!(states.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn equalize_covers_region_and_is_order_free() {
        let cfg = small_cfg(3);
        let mut w = init_weights(&cfg, &mut substream(4, WEIGHTS_STREAM)).unwrap();
        w.w_out.iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64 * 0.1).cos());
        let (obs_a, frame_a) = random_obs(120, 5);
        let (obs_b, frame_b) = random_obs(120, 6);

        let (range, est) = equalize(&obs_a, &frame_a, &w, &cfg, 30..90, 4).unwrap();
        assert_eq!(range, 30..90);
        assert_eq!(est.len(), 60);

        let b_first = equalize(&obs_b, &frame_b, &w, &cfg, 30..90, 4).unwrap();
        let a_again = equalize(&obs_a, &frame_a, &w, &cfg, 30..90, 4).unwrap();
        let b_again = equalize(&obs_b, &frame_b, &w, &cfg, 30..90, 4).unwrap();
        assert_eq!(a_again.1, est);
        assert_eq!(b_first, b_again);

        // Warm-up limited by the space in front of the region.
        let (range, est) = equalize(&obs_a, &frame_a, &w, &cfg, 2..20, 10).unwrap();
        assert_eq!(range, 2..20);
        assert_eq!(est.len(), 18);
    }
}
