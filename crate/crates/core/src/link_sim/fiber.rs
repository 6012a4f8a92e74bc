use std::f64::consts::PI;

use super::spectrum::{bin_frequency, fft, ifft};
use super::{LinkConfig, Waveform, SPEED_OF_LIGHT};

/// Group-velocity dispersion β₂ in s²/m from D in ps/(nm km).
pub fn beta2_s2_per_m(dispersion_ps_nm_km: f64, wavelength_nm: f64) -> f64 {
    let d_si = dispersion_ps_nm_km * 1e-6; // ps/(nm km) -> s/m^2
    let lambda = wavelength_nm * 1e-9;
    -d_si * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
}

/// Applies `H(f) = exp(j β₂/2 (2πf)² L)` circularly over the whole waveform.
pub fn propagate_cd_length(wave: &Waveform, beta2: f64, length_km: f64) -> Waveform {
    if length_km == 0.0 || beta2 == 0.0 {
        return wave.clone();
    }
    let n = wave.len();
    let length_m = length_km * 1e3;
    let mut spec = wave.samples.clone();
    fft(&mut spec);
    for (k, s) in spec.iter_mut().enumerate() {
        let w = 2.0 * PI * bin_frequency(k, n, wave.sample_rate);
        let phase = 0.5 * beta2 * w * w * length_m;
        *s *= num_complex::Complex64::from_polar(1.0, phase);
    }
    ifft(&mut spec);
    Waveform::new(spec, wave.sample_rate)
}

pub fn propagate_cd(wave: &Waveform, cfg: &LinkConfig) -> Waveform {
    let beta2 = beta2_s2_per_m(cfg.params.dispersion_ps_nm_km, cfg.params.wavelength_nm);
    propagate_cd_length(wave, beta2, cfg.fiber_length_km)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn beta2_of_standard_fiber() {
        // -20.9 ps^2/km at 1550 nm for D = 16.4 ps/(nm km)
        let b2 = beta2_s2_per_m(16.4, 1550.0);
        assert!((b2 * 1e27 - -20.92).abs() < 0.05, "{}", b2 * 1e27);
    }

    #[test]
    fn zero_length_is_identity() {
        let w = Waveform::new(vec![Complex64::new(0.3, -0.1); 16], 64e9);
        assert_eq!(propagate_cd_length(&w, -2e-26, 0.0), w);
    }

    #[test]
    fn gaussian_pulse_broadens_as_predicted() {
        let fs = 2e12;
        let n = 1 << 14;
        let t0 = 10e-12;
        let samples: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = (i as f64 - n as f64 / 2.0) / fs;
                Complex64::new((-t * t / (2.0 * t0 * t0)).exp(), 0.0)
            })
            .collect();
        let w = Waveform::new(samples, fs);
        let b2 = beta2_s2_per_m(16.4, 1550.0);
        let out = propagate_cd_length(&w, b2, 10.0);

        // 1/e half-width of intensity exp(-t^2/T^2) is sqrt(2) * rms width.
        let rms_width = |w: &Waveform| {
            let total: f64 = w.samples.iter().map(|s| s.norm_sqr()).sum();
            let var: f64 = w
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let t = (i as f64 - n as f64 / 2.0) / fs;
                    t * t * s.norm_sqr()
                })
                .sum::<f64>()
                / total;
            (2.0 * var).sqrt()
        };
        assert!((rms_width(&w) / t0 - 1.0).abs() < 1e-6);
        let expected = t0 * (1.0 + (b2 * 1e4 / (t0 * t0)).powi(2)).sqrt();
        let got = rms_width(&out);
        assert!((got / expected - 1.0).abs() < 0.01, "{got} vs {expected}");
    }
}
