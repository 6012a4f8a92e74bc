use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use super::{SlicedObservation, Waveform};
use crate::rng;

/// Mean power of `row` after removing its mean.
pub fn ac_power(row: &[f64]) -> f64 {
    if row.is_empty() {
        return 0.0;
    }
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Square-law detects each slice and adds white Gaussian noise whose power
/// is the row's AC power divided by `10^(snr_db / 10)`.
///
/// Slice `i` draws its noise from substream `noise_stream(i)` of `seed`.
pub fn photodetect_and_load_noise(slices: &[Waveform], snr_db: f64, sps: usize, seed: u64) -> SlicedObservation {
    assert!(!slices.is_empty(), "at least one slice is required");
    let n = slices[0].len();
    let mut data = Array2::<f64>::zeros((slices.len(), n));
    for (i, slice) in slices.iter().enumerate() {
        assert_eq!(slice.len(), n, "slices must have equal length");
        let mut row = data.row_mut(i);
        for (dst, s) in row.iter_mut().zip(&slice.samples) {
            *dst = s.norm_sqr();
        }
        let sigma = (ac_power(row.as_slice().expect("standard layout")) / 10f64.powf(snr_db / 10.0)).sqrt();
        if sigma > 0.0 {
            let mut rng = rng::substream(seed, rng::noise_stream(i));
            for v in row.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * z;
            }
        }
    }
    SlicedObservation {
        data,
        sample_rate: slices[0].sample_rate,
        sps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn constant_field_without_noise() {
        let w = Waveform::new(vec![Complex64::new(0.6, 0.8); 32], 1.0);
        let obs = photodetect_and_load_noise(&[w], f64::INFINITY, 2, 1);
        assert!(obs.data.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn measured_snr_matches_target() {
        let n = 1 << 18;
        let field: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.3 * (i as f64 * 0.37).sin(), 0.0))
            .collect();
        let w = Waveform::new(field, 1.0);
        let clean = photodetect_and_load_noise(std::slice::from_ref(&w), f64::INFINITY, 2, 3);
        for snr in [5.0, 17.0, 30.0] {
            let noisy = photodetect_and_load_noise(std::slice::from_ref(&w), snr, 2, 3);
            let noise: Vec<f64> = noisy.data.iter().zip(clean.data.iter()).map(|(a, b)| a - b).collect();
            let measured = 10.0 * (ac_power(clean.data.as_slice().unwrap()) / ac_power(&noise)).log10();
            assert!((measured - snr).abs() < 0.1, "target {snr}, measured {measured}");
        }
    }

    #[test]
    fn slices_get_independent_noise() {
        let w = Waveform::new((0..64).map(|i| Complex64::new(i as f64 / 64.0, 0.0)).collect(), 1.0);
        let obs = photodetect_and_load_noise(&[w.clone(), w], 10.0, 2, 8);
        assert_ne!(obs.data.row(0), obs.data.row(1));
    }
}
