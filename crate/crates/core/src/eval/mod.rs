//! Symbol decisions, error counting, FEC-threshold reading and complexity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esn::EsnConfig;
use crate::link_sim::demap_gray_pam4;

/// KP4 FEC pre-correction BER limit.
pub const KP4_BER: f64 = 2.26e-4;

/// Nearest PAM4 level with decision thresholds at −2, 0 and +2. A value
/// exactly on a threshold goes to the lower level.
pub fn decide(v: f64) -> i8 {
    if v <= -2.0 {
        -3
    } else if v <= 0.0 {
        -1
    } else if v <= 2.0 {
        1
    } else {
        3
    }
}

pub fn hard_decision(estimates: &[f64]) -> Vec<i8> {
    estimates.iter().map(|&v| decide(v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerReport {
    pub ber: f64,
    pub ser: f64,
    pub n_bits: u64,
    pub n_bit_errors: u64,
    pub n_symbol_errors: u64,
    /// BER by position inside the `n_out`-symbol output block.
    pub per_position_ber: Vec<f64>,
}

impl BerReport {
    /// `1 / (2 n_bits)`, the value recorded in place of a zero BER.
    pub fn floor(&self) -> f64 {
        0.5 / self.n_bits as f64
    }

    pub fn error_free(&self) -> bool {
        self.n_bit_errors == 0
    }
}

/// Compares decided levels with the transmitted ones. Both sequences start
/// at the first symbol of an output block, so symbol `i` sits at block
/// position `i % n_out`.
pub fn count_errors(pred: &[i8], truth: &[i8], n_out: usize) -> Result<BerReport> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} decisions for {} symbols",
            pred.len(),
            truth.len()
        )));
    }
    if n_out == 0 {
        return Err(Error::config("n_out", "must be positive"));
    }
    let mut pos_errors = vec![0u64; n_out];
    let mut pos_bits = vec![0u64; n_out];
    let mut bit_errors = 0u64;
    let mut symbol_errors = 0u64;
    for (i, (&p, &t)) in pred.iter().zip(truth).enumerate() {
        let e = if p == t {
            0
        } else {
            symbol_errors += 1;
            let (a, b) = (demap_gray_pam4(p), demap_gray_pam4(t));
            (a[0] != b[0]) as u64 + (a[1] != b[1]) as u64
        };
        bit_errors += e;
        pos_errors[i % n_out] += e;
        pos_bits[i % n_out] += 2;
    }
    let n_bits = 2 * pred.len() as u64;
    let ratio = |e: u64, n: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
    Ok(BerReport {
        ber: ratio(bit_errors, n_bits),
        ser: ratio(symbol_errors, pred.len() as u64),
        n_bits,
        n_bit_errors: bit_errors,
        n_symbol_errors: symbol_errors,
        per_position_ber: pos_errors.iter().zip(&pos_bits).map(|(&e, &n)| ratio(e, n)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FecThreshold {
    pub ber_threshold: f64,
}

impl Default for FecThreshold {
    fn default() -> Self {
        FecThreshold { ber_threshold: KP4_BER }
    }
}

impl FecThreshold {
    pub fn new(ber_threshold: f64) -> Result<Self> {
        if !(ber_threshold > 0.0 && ber_threshold < 1.0) {
            return Err(Error::config("ber_threshold", "must lie in (0, 1)"));
        }
        Ok(FecThreshold { ber_threshold })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub ber: f64,
    /// No errors were counted; `ber` holds the `1 / (2 n_bits)` floor.
    pub floored: bool,
}

impl CurvePoint {
    pub fn measured(snr_db: f64, report: &BerReport) -> Self {
        if report.error_free() {
            CurvePoint {
                snr_db,
                ber: report.floor(),
                floored: true,
            }
        } else {
            CurvePoint {
                snr_db,
                ber: report.ber,
                floored: false,
            }
        }
    }
}

/// BER against SNR at strictly increasing SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerSnrCurve {
    points: Vec<CurvePoint>,
}

impl BerSnrCurve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::config("curve", "needs at least two points"));
        }
        if points.windows(2).any(|w| !(w[1].snr_db > w[0].snr_db)) {
            return Err(Error::config("curve", "SNR must be strictly increasing"));
        }
        if points.iter().any(|p| !(p.ber > 0.0 && p.ber <= 1.0)) {
            return Err(Error::config("curve", "BER values must lie in (0, 1]"));
        }
        Ok(BerSnrCurve { points })
    }

    /// Unflagged points from `(snr_db, ber)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(snr_db, ber)| CurvePoint {
                    snr_db,
                    ber,
                    floored: false,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }
}

/// SNR at which the curve reaches the threshold BER, by linear interpolation
/// of `log10(BER)` against SNR on the first decreasing segment that brackets
/// it. A segment whose two ends are both floored does not count.
pub fn snr_at_threshold(curve: &BerSnrCurve, fec: &FecThreshold) -> Result<f64> {
    let th = fec.ber_threshold;
    let pts = curve.points();
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.ber), hi.max(p.ber)));
    if th < lo || th > hi {
        return Err(Error::NotBracketed { threshold: th });
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.floored && b.floored {
            continue;
        }
        if a.ber == th {
            return Ok(a.snr_db);
        }
        if a.ber > th && th >= b.ber {
            let t = (th.log10() - a.ber.log10()) / (b.ber.log10() - a.ber.log10());
            return Ok(a.snr_db + t * (b.snr_db - a.snr_db));
        }
    }
    if pts.last().is_some_and(|p| p.ber == th && !p.floored) {
        return Ok(pts[pts.len() - 1].snr_db);
    }
    Err(Error::NonMonotone { threshold: th })
}

/// Extra SNR `curve` needs over `reference` to reach the threshold.
pub fn snr_penalty(curve: &BerSnrCurve, reference: &BerSnrCurve, fec: &FecThreshold) -> Result<f64> {
    Ok(snr_at_threshold(curve, fec)? - snr_at_threshold(reference, fec)?)
}

/// Real multiplications per equalized symbol:
/// `[N_in N_res s_in + N_res² s_res + N_res N_out s_out + 2 N_res + N_out (1 + N_res)] / N_out`.
pub fn complexity_rmps(cfg: &EsnConfig) -> f64 {
    let p = &cfg.params;
    rmps(cfg.n_in(), p.n_res, cfg.n_out, p.s_in, p.s_res, p.s_out)
}

pub fn rmps(n_in: usize, n_res: usize, n_out: usize, s_in: f64, s_res: f64, s_out: f64) -> f64 {
    let (n_in, n_res, n_out) = (n_in as f64, n_res as f64, n_out as f64);
    let total = n_in * n_res * s_in
        + n_res * n_res * s_res
        + n_res * n_out * s_out
        + 2.0 * n_res
        + n_out * (1.0 + n_res);
    total / n_out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esn::EsnParams;
    use crate::link_sim::{map_gray_pam4, LinkParams, PAM4_LEVELS};

    #[test]
    fn decisions() {
        assert_eq!(decide(0.9), 1);
        assert_eq!(decide(-5.0), -3);
        assert_eq!(decide(2.0), 1);
        assert_eq!(decide(0.0), -1);
        assert_eq!(decide(-2.0), -3);
        assert_eq!(decide(2.0 + 1e-12), 3);
        assert_eq!(hard_decision(&[-1.2, 3.3, 1e9]), vec![-1, 3, 3]);
        for l in PAM4_LEVELS {
            assert_eq!(decide(l as f64), l);
        }
    }

    #[test]
    fn identical_sequences_have_no_errors() {
        let t = [-3, -1, 1, 3, 3, -1];
        let r = count_errors(&t, &t, 3).unwrap();
        assert_eq!(r.ber, 0.0);
        assert_eq!(r.ser, 0.0);
        assert_eq!(r.n_bits, 12);
        assert!(r.error_free());
        assert_eq!(r.floor(), 1.0 / 24.0);
    }

    #[test]
    fn adjacent_error_costs_one_bit() {
        let truth = vec![1i8; 50];
        let mut pred = truth.clone();
        pred[7] = 3;
        let r = count_errors(&pred, &truth, 1).unwrap();
        assert_eq!(r.ber, 1.0 / 100.0);
        assert_eq!(r.ser, 1.0 / 50.0);
    }

    #[test]
    fn confusions_cost_their_hamming_distance() {
        // Bit labels written out independently of the mapper.
        let label = |l: i8| -> [u8; 2] {
            match l {
                -3 => [0, 0],
                -1 => [0, 1],
                1 => [1, 1],
                3 => [1, 0],
                _ => unreachable!(),
            }
        };
        let mut pairs = 0;
        for a in PAM4_LEVELS {
            assert_eq!(map_gray_pam4(label(a)), a);
            for b in PAM4_LEVELS {
                if a == b {
                    continue;
                }
                pairs += 1;
                let (x, y) = (label(a), label(b));
                let hd = (x[0] != y[0]) as u64 + (x[1] != y[1]) as u64;
                let r = count_errors(&[a], &[b], 1).unwrap();
                assert_eq!(r.n_bit_errors, hd, "{a} vs {b}");
            }
        }
        assert_eq!(pairs, 12);
        assert_eq!(count_errors(&[-3], &[3], 1).unwrap().n_bit_errors, 1);
    }

    #[test]
    fn injected_errors_are_counted_exactly() {
        let truth: Vec<i8> = (0..1000).map(|i| PAM4_LEVELS[i % 4]).collect();
        let mut pred = truth.clone();
        // Flip to an adjacent level at every 37th symbol: one bit each.
        let mut e = 0;
        for i in (0..1000).step_by(37) {
            pred[i] = if truth[i] == 3 { 1 } else { truth[i] + 2 };
            e += 1;
        }
        let r = count_errors(&pred, &truth, 4).unwrap();
        assert_eq!(r.n_bit_errors, e);
        assert_eq!(r.ber, e as f64 / 2000.0);
        let avg: f64 = r.per_position_ber.iter().sum::<f64>() / 4.0;
        assert!((avg - r.ber).abs() < 1e-15);
    }

    #[test]
    fn per_position_tracks_block_offset() {
        let truth = vec![-1i8; 40];
        let mut pred = truth.clone();
        for i in (0..40).step_by(5) {
            pred[i] = 1;
        }
        let r = count_errors(&pred, &truth, 5).unwrap();
        assert_eq!(r.per_position_ber[0], 0.5);
        assert!(r.per_position_ber[1..].iter().all(|&b| b == 0.0));
        assert!(count_errors(&pred, &truth[1..], 5).is_err());
    }

    #[test]
    fn threshold_examples() {
        let fec = FecThreshold::new(1e-4).unwrap();
        let c = BerSnrCurve::from_pairs(&[(10.0, 1e-3), (12.0, 1e-5)]).unwrap();
        assert!((snr_at_threshold(&c, &fec).unwrap() - 11.0).abs() < 1e-12);
        let c = BerSnrCurve::from_pairs(&[(8.0, 1e-2), (10.0, 1e-4), (12.0, 1e-6)]).unwrap();
        assert_eq!(snr_at_threshold(&c, &fec).unwrap(), 10.0);
        let c = BerSnrCurve::from_pairs(&[(8.0, 1e-2), (10.0, 1e-4)]).unwrap();
        assert_eq!(snr_at_threshold(&c, &fec).unwrap(), 10.0);
    }

    #[test]
    fn log_linear_curve_is_inverted_exactly() {
        // ber = 10^(-snr/2)  =>  snr = -2 log10(ber)
        let pts: Vec<(f64, f64)> = (0..=20).map(|i| (i as f64, 10f64.powf(-(i as f64) / 2.0))).collect();
        let c = BerSnrCurve::from_pairs(&pts).unwrap();
        for th in [0.5, 0.1, 2.26e-4, 3.3e-7, 1.7e-9] {
            let got = snr_at_threshold(&c, &FecThreshold::new(th).unwrap()).unwrap();
            assert!((got + 2.0 * th.log10()).abs() < 1e-9, "{th}: {got}");
        }
    }

    #[test]
    fn bracketing_errors() {
        let fec = FecThreshold::default();
        let high = BerSnrCurve::from_pairs(&[(10.0, 1e-2), (12.0, 1e-3)]).unwrap();
        assert!(matches!(snr_at_threshold(&high, &fec), Err(Error::NotBracketed { .. })));
        let rising = BerSnrCurve::from_pairs(&[(10.0, 1e-6), (12.0, 1e-2)]).unwrap();
        assert!(matches!(snr_at_threshold(&rising, &fec), Err(Error::NonMonotone { .. })));
        let floor = |snr_db| CurvePoint {
            snr_db,
            ber: 1e-6,
            floored: true,
        };
        let c = BerSnrCurve::new(vec![
            CurvePoint {
                snr_db: 8.0,
                ber: 1e-6,
                floored: true,
            },
            floor(9.0),
        ])
        .unwrap();
        assert!(matches!(snr_at_threshold(&c, &fec), Err(Error::NotBracketed { .. })));
        let c = BerSnrCurve::new(vec![
            CurvePoint {
                snr_db: 8.0,
                ber: 1e-2,
                floored: false,
            },
            floor(10.0),
        ])
        .unwrap();
        assert!(snr_at_threshold(&c, &fec).is_ok());
        assert!(BerSnrCurve::from_pairs(&[(1.0, 0.1)]).is_err());
        assert!(BerSnrCurve::from_pairs(&[(1.0, 0.1), (1.0, 0.01)]).is_err());
        assert!(BerSnrCurve::from_pairs(&[(1.0, 0.1), (2.0, 0.0)]).is_err());
    }

    #[test]
    fn penalty_properties() {
        let fec = FecThreshold::default();
        let pts: Vec<(f64, f64)> = (8..=20).map(|s| (s as f64, 10f64.powf(-(s as f64) / 3.0))).collect();
        let shifted: Vec<(f64, f64)> = pts.iter().map(|&(s, b)| (s + 2.0, b)).collect();
        let a = BerSnrCurve::from_pairs(&pts).unwrap();
        let b = BerSnrCurve::from_pairs(&shifted).unwrap();
        assert_eq!(snr_penalty(&a, &a, &fec).unwrap(), 0.0);
        assert!((snr_penalty(&b, &a, &fec).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(snr_penalty(&b, &a, &fec).unwrap(), -snr_penalty(&a, &b, &fec).unwrap());
    }

    fn cfg(n_out: usize) -> EsnConfig {
        EsnConfig::new(EsnParams::default(), n_out, &LinkParams::default(), 0)
    }

    #[test]
    fn complexity_matches_integer_evaluation() {
        // 184*30/10 + 30*30/20 + 30*n/10 + 2*30 + n*31, all integers here.
        for (n_out, num) in [(1usize, 691u64), (17, 1235), (23, 1439)] {
            let total = 552 + 45 + 3 * n_out as u64 + 60 + 31 * n_out as u64;
            assert_eq!(total, num);
            let want = num as f64 / n_out as f64;
            assert!((complexity_rmps(&cfg(n_out)) - want).abs() < 1e-9);
        }
        assert!((complexity_rmps(&cfg(17)) - 72.0).abs() <= 1.0);
        assert!(complexity_rmps(&cfg(1)) / complexity_rmps(&cfg(17)) >= 9.5);
    }

    #[test]
    fn complexity_falls_with_output_width() {
        let v: Vec<f64> = (1..=23).map(|n| complexity_rmps(&cfg(n))).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }
}
