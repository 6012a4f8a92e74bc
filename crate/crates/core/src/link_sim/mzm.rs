use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use super::Waveform;
use crate::error::{Error, Result};

/// Scales the real drive so its peak magnitude is one.
pub fn normalize_drive(wave: &Waveform) -> Waveform {
    let peak = wave.samples.iter().fold(0.0f64, |m, s| m.max(s.re.abs()));
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    Waveform::new(
        wave.samples.iter().map(|s| Complex64::new(s.re * scale, 0.0)).collect(),
        wave.sample_rate,
    )
}

/// Push-pull MZM biased at quadrature: `E = cos(pi/4 * (1 - m v))`.
///
/// The drive `v` is the real part of `wave` and must satisfy `|v| <= 1`.
pub fn mzm_modulate(wave: &Waveform, mod_index: f64) -> Result<Waveform> {
    if !(mod_index > 0.0 && mod_index <= 1.0) {
        return Err(Error::config("mzm_mod_index", "must lie in (0, 1]"));
    }
    let peak = wave.samples.iter().fold(0.0f64, |m, s| m.max(s.re.abs()));
    if peak > 1.0 + 1e-12 {
        return Err(Error::DriveOutOfRange { peak });
    }
    let field = wave
        .samples
        .iter()
        .map(|s| Complex64::new((FRAC_PI_4 * (1.0 - mod_index * s.re)).cos(), 0.0))
        .collect();
    Ok(Waveform::new(field, wave.sample_rate))
}
