use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn fft(samples: &mut [Complex64]) {
    if samples.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_forward(samples.len()).process(samples);
}

/// Inverse FFT including the `1/N` normalization.
pub fn ifft(samples: &mut [Complex64]) {
    if samples.is_empty() {
        return;
    }
    FftPlanner::new().plan_fft_inverse(samples.len()).process(samples);
    let scale = 1.0 / samples.len() as f64;
    samples.iter_mut().for_each(|s| *s *= scale);
}

/// Frequency in Hz of FFT bin `k` for an `n`-point transform.
pub fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k * sample_rate / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_match_numpy_convention() {
        let f: Vec<f64> = (0..5).map(|k| bin_frequency(k, 5, 5.0)).collect();
        assert_eq!(f, vec![0.0, 1.0, 2.0, -2.0, -1.0]);
        let f: Vec<f64> = (0..4).map(|k| bin_frequency(k, 4, 4.0)).collect();
        assert_eq!(f, vec![0.0, 1.0, -2.0, -1.0]);
    }

    #[test]
    fn round_trip() {
        let orig: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let mut x = orig.clone();
        fft(&mut x);
        ifft(&mut x);
        for (a, b) in x.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
