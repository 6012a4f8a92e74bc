use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{LinkConfig, SymbolFrame, Waveform};
use crate::error::{Error, Result};

/// Shortest accepted half-support, in symbols.
pub const MIN_RRC_SPAN: usize = 8;

const SINGULARITY_EPS: f64 = 1e-9;

/// RRC impulse response at `t` symbol periods (unnormalized).
fn rrc_value(t: f64, rolloff: f64) -> f64 {
    let b = rolloff;
    if t.abs() < SINGULARITY_EPS {
        return 1.0 - b + 4.0 * b / PI;
    }
    if b > 0.0 && (t.abs() - 1.0 / (4.0 * b)).abs() < SINGULARITY_EPS {
        let arg = PI / (4.0 * b);
        return b * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos();
    let den = PI * t * (1.0 - (4.0 * b * t).powi(2));
    num / den
}

/// Root-raised-cosine taps sampled at `sps` per symbol over
/// `[-span, +span]` symbols, scaled to unit energy.
///
/// The returned sequence has odd length `2 * span * sps + 1` and is
/// symmetric about its center tap.
pub fn rrc_taps(rolloff: f64, sps: usize, span_symbols: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::config("rolloff", "must lie in [0, 1]"));
    }
    if sps == 0 {
        return Err(Error::config("sps", "must be positive"));
    }
    if span_symbols < MIN_RRC_SPAN {
        return Err(Error::SpanTooShort {
            span: span_symbols,
            min: MIN_RRC_SPAN,
        });
    }
    let half = (span_symbols * sps) as isize;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|n| rrc_value(n as f64 / sps as f64, rolloff))
        .collect();
    normalize_energy(&mut taps);
    Ok(taps)
}

fn normalize_energy(taps: &mut [f64]) {
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
}

/// Symbol-spaced samples of the matched cascade `taps * taps`, lags `1..`,
/// relative to the center value.
pub fn cascade_isi(taps: &[f64], sps: usize) -> Vec<f64> {
    let n = taps.len();
    let center: f64 = taps.iter().map(|t| t * t).sum();
    (1..)
        .map(|j| j * sps)
        .take_while(|&lag| lag < n)
        .map(|lag| (0..n - lag).map(|i| taps[i] * taps[i + lag]).sum::<f64>() / center)
        .collect()
}

/// [`rrc_taps`] with a small symmetric correction that removes the ISI the
/// truncation leaves in the matched cascade.
///
/// Truncating the RRC response to a finite span leaves ISI of order `1/span`
/// at symbol spacing (about `1e-4` for roll-off 0.1 over ±64 symbols). A few
/// Gauss–Newton steps with minimum-norm updates drive the symbol-spaced
/// cascade samples at lags up to `1.5 * span` to zero; the remaining lags are
/// products of tail taps and already negligible.
pub fn rrc_nyquist_taps(rolloff: f64, sps: usize, span_symbols: usize) -> Result<Vec<f64>> {
    let mut taps = rrc_taps(rolloff, sps, span_symbols)?;
    let half = span_symbols * sps;
    let n_lags = (3 * span_symbols / 2).min(2 * span_symbols - 1);

    for _ in 0..12 {
        let residual: Vec<f64> = (1..=n_lags)
            .map(|j| {
                let lag = j * sps;
                (0..taps.len() - lag).map(|i| taps[i] * taps[i + lag]).sum()
            })
            .collect();
        if residual.iter().all(|r| r.abs() < 1e-14) {
            break;
        }
        // Jacobian of lag-l cascade sample w.r.t. the symmetric tap pair
        // p_i = h[half ± i]: d r_l / d h[a] = h[a + l] + h[a - l].
        let tap = |idx: isize| -> f64 {
            if idx >= 0 && (idx as usize) < taps.len() {
                taps[idx as usize]
            } else {
                0.0
            }
        };
        let jac = DMatrix::from_fn(n_lags, half + 1, |row, i| {
            let lag = ((row + 1) * sps) as isize;
            let grad = |a: isize| tap(a + lag) + tap(a - lag);
            let hi = (half + i) as isize;
            if i == 0 {
                grad(hi)
            } else {
                grad(hi) + grad((half - i) as isize)
            }
        });
        let rhs = -DVector::from_vec(residual);
        let normal = &jac * jac.transpose();
        let z = match normal.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => match normal.lu().solve(&rhs) {
                Some(z) => z,
                None => break,
            },
        };
        let step = jac.transpose() * z;
        for i in 0..=half {
            taps[half + i] += step[i];
            if i > 0 {
                taps[half - i] += step[i];
            }
        }
        normalize_energy(&mut taps);
    }
    Ok(taps)
}

/// Circularly convolves zero-stuffed `levels` with `taps`, delay-compensated
/// so that sample `i * sps` is centered on symbol `i`.
pub fn shape_levels(levels: &[f64], taps: &[f64], sps: usize, sample_rate: f64) -> Waveform {
    let n = levels.len() * sps;
    let center = taps.len() / 2;
    let mut out = vec![0.0f64; n];
    if n > 0 {
        for (i, &a) in levels.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let origin = i * sps;
            for (t, &h) in taps.iter().enumerate() {
                let idx = (origin as isize + t as isize - center as isize).rem_euclid(n as isize);
                out[idx as usize] += a * h;
            }
        }
    }
    Waveform::new(out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), sample_rate)
}

pub fn pulse_shape(frame: &SymbolFrame, taps: &[f64], cfg: &LinkConfig) -> Waveform {
    let levels: Vec<f64> = frame.levels.iter().map(|&l| l as f64).collect();
    shape_levels(&levels, taps, cfg.params.sps, cfg.sample_rate())
}
