use num_complex::Complex64;

use super::spectrum::{bin_frequency, fft, ifft};
use super::{LinkConfig, Waveform};
use crate::error::{Error, Result};

/// Occupied bandwidth `(1 + rolloff) * baud` of the RRC-shaped signal.
pub fn occupied_band_hz(rolloff: f64, baud_rate: f64) -> f64 {
    (1.0 + rolloff) * baud_rate
}

/// Edges `[lo, hi)` of each slice; the last slice also includes `hi`.
pub fn slice_bounds_hz(cfg: &LinkConfig) -> Vec<(f64, f64)> {
    let p = &cfg.params;
    let band = occupied_band_hz(p.rolloff, p.baud_rate);
    let width = band / p.num_slices as f64;
    (0..p.num_slices)
        .map(|i| (-band / 2.0 + i as f64 * width, -band / 2.0 + (i + 1) as f64 * width))
        .collect()
}

/// Slice holding frequency `f`, or `None` outside the occupied band.
fn slice_of(f: f64, band: f64, num_slices: usize) -> Option<usize> {
    if f < -band / 2.0 || f > band / 2.0 {
        return None;
    }
    let idx = ((f + band / 2.0) / (band / num_slices as f64)).floor() as usize;
    Some(idx.min(num_slices - 1))
}

fn check_band(cfg: &LinkConfig, sample_rate: f64) -> Result<f64> {
    let p = &cfg.params;
    if p.num_slices == 0 {
        return Err(Error::config("num_slices", "must be at least 1"));
    }
    let band = occupied_band_hz(p.rolloff, p.baud_rate);
    if band > sample_rate {
        return Err(Error::BandExceedsSampling {
            band_hz: band,
            sample_rate,
        });
    }
    Ok(band)
}

/// Splits the occupied band into `num_slices` contiguous equal-width
/// brick-wall bands and returns each band's field.
///
/// Frequencies outside the occupied band are dropped, so the slices sum to
/// the in-band part of `wave` and their energies add up to its energy.
pub fn slice_spectrum(wave: &Waveform, cfg: &LinkConfig) -> Result<Vec<Waveform>> {
    let band = check_band(cfg, wave.sample_rate)?;
    let slices = cfg.params.num_slices;
    let n = wave.len();
    let mut spec = wave.samples.clone();
    fft(&mut spec);

    let owner: Vec<Option<usize>> = (0..n)
        .map(|k| slice_of(bin_frequency(k, n, wave.sample_rate), band, slices))
        .collect();
    Ok((0..slices)
        .map(|i| {
            let mut part: Vec<Complex64> = spec
                .iter()
                .zip(&owner)
                .map(|(&s, &o)| if o == Some(i) { s } else { Complex64::new(0.0, 0.0) })
                .collect();
            ifft(&mut part);
            Waveform::new(part, wave.sample_rate)
        })
        .collect())
}

/// The in-band component of `wave`, i.e. the sum of all slices.
pub fn in_band_component(wave: &Waveform, cfg: &LinkConfig) -> Result<Waveform> {
    let band = check_band(cfg, wave.sample_rate)?;
    let n = wave.len();
    let mut spec = wave.samples.clone();
    fft(&mut spec);
    for (k, s) in spec.iter_mut().enumerate() {
        if slice_of(bin_frequency(k, n, wave.sample_rate), band, 1).is_none() {
            *s = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut spec);
    Ok(Waveform::new(spec, wave.sample_rate))
}

/// Adds the optical carrier (the field's mean, i.e. the DC bin) to every
/// slice whose band does not already contain it.
///
/// Without a carrier a slice is detected as the squared envelope of its
/// sideband and loses the sign of the modulation; with it, each slice
/// carries a term linear in the drive.
pub fn add_carrier_tap(slices: &mut [Waveform], wave: &Waveform, cfg: &LinkConfig) {
    let p = &cfg.params;
    let band = occupied_band_hz(p.rolloff, p.baud_rate);
    let Some(owner) = slice_of(0.0, band, slices.len()) else {
        return;
    };
    let n = wave.len().max(1) as f64;
    let carrier: Complex64 = wave.samples.iter().sum::<Complex64>() / n;
    for (i, slice) in slices.iter_mut().enumerate() {
        if i != owner {
            slice.samples.iter_mut().for_each(|s| *s += carrier);
        }
    }
}
