//! Peak-to-average power ratio measurement and CCDF statistics.
//!
//! PAPR is measured on the prefix-free block. Oversampling evaluates the
//! continuous-index signal
//!
//! ```text
//! s(t) = N^{-1/2} sum_m x[m] exp(j 2 pi (c1 t^2 + c2_m m^2 + m t / N))
//! ```
//!
//! at `t = n / L`. The de-post-chirped part is a trigonometric polynomial in
//! `t`, so zero-padding its spectrum and taking an `L N`-point inverse FFT is
//! exact. The post-chirp is applied pointwise afterwards; it has unit modulus
//! and never changes the PAPR.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::Fft;

use crate::modem::{afdm_modulate, PreChirpProfile};
use crate::numerics::{check_finite, cis_turns, db, inverse_plan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprSample {
    pub linear: f64,
    pub db: f64,
    pub oversample: usize,
}

impl PaprSample {
    pub fn from_linear(linear: f64, oversample: usize) -> Self {
        Self {
            linear,
            db: db(linear),
            oversample,
        }
    }
}

/// `max |s|^2 / mean |s|^2` of a sample vector.
pub fn papr_of(samples: &[Complex64]) -> f64 {
    let (peak, sum) = samples.iter().fold((0.0f64, 0.0f64), |(pk, sm), v| {
        let p = v.norm_sqr();
        (pk.max(p), sm + p)
    });
    peak * samples.len() as f64 / sum
}

/// Samples of the AFDM block at `t = n / L`, `n = 0 .. L N - 1`.
pub fn oversampled_time_signal(
    x: &[Complex64],
    c1: f64,
    profile: &PreChirpProfile,
    oversample: usize,
) -> Result<Vec<Complex64>> {
    if oversample == 0 {
        return Err(Error::invalid("oversampling factor must be at least 1"));
    }
    if oversample == 1 {
        return Ok(afdm_modulate(x, c1, profile)?.samples);
    }
    check_finite(x)?;
    let n = x.len();
    if profile.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: profile.len(),
        });
    }
    let len = n * oversample;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for ((b, xi), p) in buf.iter_mut().zip(x).zip(profile.pre_chirp()) {
        *b = xi * p.conj();
    }
    inverse_plan(len).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    let l2 = (oversample * oversample) as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= cis_turns(c1 * (k * k) as f64 / l2) * scale;
    }
    Ok(buf)
}

pub fn papr(
    x: &[Complex64],
    c1: f64,
    profile: &PreChirpProfile,
    oversample: usize,
) -> Result<PaprSample> {
    let s = oversampled_time_signal(x, c1, profile, oversample)?;
    Ok(PaprSample::from_linear(papr_of(&s), oversample))
}

/// Reusable PAPR evaluator for search loops: holds the `L N`-point plan and
/// scratch space. Takes the pre-chirped spectrum `conj(pre) * x` directly.
pub struct PaprEvaluator {
    n: usize,
    oversample: usize,
    plan: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PaprEvaluator {
    pub fn new(n: usize, oversample: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if oversample == 0 {
            return Err(Error::invalid("oversampling factor must be at least 1"));
        }
        let plan = inverse_plan(n * oversample);
        let scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        Ok(Self {
            n,
            oversample,
            plan,
            buf: vec![Complex64::new(0.0, 0.0); n * oversample],
            scratch,
        })
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// PAPR of the block whose subcarrier `m` carries `spectrum(m)`.
    pub fn evaluate(&mut self, spectrum: impl Fn(usize) -> Complex64) -> f64 {
        for (m, b) in self.buf.iter_mut().enumerate() {
            *b = if m < self.n { spectrum(m) } else { Complex64::new(0.0, 0.0) };
        }
        self.plan.process_with_scratch(&mut self.buf, &mut self.scratch);
        papr_of(&self.buf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub n_trials: usize,
}

/// Empirical `Pr(PAPR > threshold)` at each threshold (sorted ascending).
pub fn ccdf(samples: &[PaprSample], thresholds_db: &[f64]) -> Result<CcdfCurve> {
    let dbs: Vec<f64> = samples.iter().map(|s| s.db).collect();
    ccdf_db(&dbs, thresholds_db)
}

pub fn ccdf_db(samples_db: &[f64], thresholds_db: &[f64]) -> Result<CcdfCurve> {
    if samples_db.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut thresholds = thresholds_db.to_vec();
    thresholds.sort_by(f64::total_cmp);
    let mut sorted = samples_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let probabilities = thresholds
        .iter()
        .map(|&t| {
            let at_or_below = sorted.partition_point(|&v| v <= t);
            (n - at_or_below) as f64 / n as f64
        })
        .collect();
    Ok(CcdfCurve {
        thresholds_db: thresholds,
        probabilities,
        n_trials: n,
    })
}

/// PAPR level (dB) at which the empirical CCDF drops to `probability`:
/// the value with exactly `floor(probability * n)` samples strictly above it.
pub fn papr_at_ccdf(samples_db: &[f64], probability: f64) -> Result<f64> {
    if samples_db.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..1.0).contains(&probability) {
        return Err(Error::invalid("CCDF level must lie in [0, 1)"));
    }
    let mut sorted = samples_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let above = (probability * n as f64).floor() as usize;
    Ok(sorted[n - above - 1])
}

/// Extreme-value approximation of the peak-power CDF of an `N`-sample
/// block with unit-power Gaussian samples:
/// `exp(-e^{-gamma} N sqrt((pi/3) ln N))`.
pub fn analytic_peak_cdf(gamma: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("analytic peak model needs N >= 2"));
    }
    if gamma < 0.0 {
        return Err(Error::invalid("gamma must be non-negative"));
    }
    Ok((-(-gamma).exp() * peak_model_scale(n)).exp())
}

fn peak_model_scale(n: usize) -> f64 {
    let nf = n as f64;
    nf * (std::f64::consts::PI / 3.0 * nf.ln()).sqrt()
}

/// Threshold (dB) where `1 - analytic_peak_cdf` equals `probability`.
pub fn analytic_ccdf_threshold_db(probability: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("analytic peak model needs N >= 2"));
    }
    if !(probability > 0.0 && probability < 1.0) {
        return Err(Error::invalid("probability must lie in (0, 1)"));
    }
    let gamma = -((-(1.0 - probability).ln()) / peak_model_scale(n)).ln();
    Ok(db(gamma))
}

/// Model correlation of two candidate signals that differ only in the
/// pre-chirp phase of one subcarrier: `(N - 1 + e^{j delta}) / N`.
pub fn candidate_correlation(n: usize, phase_delta: f64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::invalid("correlation model needs N >= 2"));
    }
    let nf = n as f64;
    Ok((Complex64::new(nf - 1.0, 0.0) + Complex64::from_polar(1.0, phase_delta)) / nf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{compute_c1, GroupLayout, GroupPattern};
    use crate::reference::{afdm_direct_at, random_qam_block};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn single_subcarrier_has_unit_papr() {
        let n = 32;
        let c1 = compute_c1(1, n).unwrap();
        let profile = GroupLayout::new(n, 4, 2, 2, GroupPattern::Adjacent)
            .unwrap()
            .profile(&[2, 1, 2, 1])
            .unwrap();
        for m in [0usize, 5, 31] {
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[m] = Complex64::new(0.3, -0.7);
            for l in [1usize, 2, 4, 8] {
                let p = papr(&x, c1, &profile, l).unwrap();
                assert!((p.linear - 1.0).abs() < 1e-12, "m={m} L={l} papr={}", p.linear);
                assert!(p.db.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn all_ones_without_chirps_is_an_impulse() {
        let n = 64;
        let x = vec![Complex64::new(1.0, 0.0); n];
        let profile = PreChirpProfile::uniform(n, 0.0).unwrap();
        let p = papr(&x, 0.0, &profile, 1).unwrap();
        assert!((p.linear - 64.0).abs() < 1e-9);
        assert!((p.db - 18.0618).abs() < 1e-4);
    }

    #[test]
    fn oversampling_never_lowers_papr() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 64;
        let c1 = compute_c1(1, n).unwrap();
        let profile = PreChirpProfile::uniform(n, 0.013).unwrap();
        for _ in 0..200 {
            let x = random_qam_block(&mut rng, n);
            let p1 = papr(&x, c1, &profile, 1).unwrap();
            let p4 = papr(&x, c1, &profile, 4).unwrap();
            assert!(p4.linear >= p1.linear - 1e-12);
        }
    }

    #[test]
    fn oversampled_signal_contains_the_critical_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let n = 16;
        let c1 = 0.0937;
        let profile = GroupLayout::new(n, 2, 2, 2, GroupPattern::Comb)
            .unwrap()
            .profile(&[2, 1])
            .unwrap();
        let x = random_qam_block(&mut rng, n);
        let base = oversampled_time_signal(&x, c1, &profile, 1).unwrap();
        let over = oversampled_time_signal(&x, c1, &profile, 4).unwrap();
        assert_eq!(over.len(), 4 * n);
        for k in 0..n {
            assert!((over[4 * k] - base[k]).norm() < 1e-9);
        }
        let e1: f64 = base.iter().map(|v| v.norm_sqr()).sum();
        let e4: f64 = over.iter().map(|v| v.norm_sqr()).sum();
        assert!((e4 - 4.0 * e1).abs() < 1e-9);

        let times: Vec<f64> = (0..4 * n).map(|k| k as f64 / 4.0).collect();
        let direct = afdm_direct_at(&x, c1, profile.c2_values(), &times);
        let err = over.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn evaluator_matches_full_papr() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 64;
        let profile = PreChirpProfile::uniform(n, 0.02).unwrap();
        let pre = profile.pre_chirp();
        let mut eval = PaprEvaluator::new(n, 4).unwrap();
        for _ in 0..20 {
            let x = random_qam_block(&mut rng, n);
            let fast = eval.evaluate(|m| x[m] * pre[m].conj());
            let full = papr(&x, 0.031, &profile, 4).unwrap().linear;
            assert!((fast - full).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_oversampling_rejected() {
        let x = vec![Complex64::new(1.0, 0.0); 4];
        let profile = PreChirpProfile::uniform(4, 0.0).unwrap();
        assert!(papr(&x, 0.0, &profile, 0).is_err());
    }

    fn flat(db: f64, n: usize) -> Vec<PaprSample> {
        vec![PaprSample { linear: crate::numerics::undb(db), db, oversample: 1 }; n]
    }

    #[test]
    fn ccdf_edge_cases() {
        let s = flat(6.0, 10);
        let c = ccdf(&s, &[7.0, 5.0]).unwrap();
        assert_eq!(c.thresholds_db, vec![5.0, 7.0]);
        assert_eq!(c.probabilities, vec![1.0, 0.0]);
        assert_eq!(c.n_trials, 10);
        assert!(ccdf(&[], &[1.0]).is_err());
    }

    #[test]
    fn ccdf_quantile_definition() {
        let samples: Vec<f64> = (1..=1000).map(|v| v as f64 / 100.0).collect();
        let t = papr_at_ccdf(&samples, 0.01).unwrap();
        // ten samples strictly above
        assert_eq!(t, 9.90);
        assert_eq!(samples.iter().filter(|&&v| v > t).count(), 10);
    }

    #[test]
    fn analytic_cdf_limits_and_monotonicity() {
        assert!((analytic_peak_cdf(30.0, 64).unwrap() - 1.0).abs() < 1e-10);
        assert!(analytic_peak_cdf(0.0, 64).unwrap() < 1e-30);
        let mut prev = 0.0;
        for i in 0..100 {
            let v = analytic_peak_cdf(i as f64 * 0.2, 64).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(analytic_peak_cdf(1.0, 1).is_err());
        let t = analytic_ccdf_threshold_db(1e-2, 64).unwrap();
        let g = crate::numerics::undb(t);
        assert!((1.0 - analytic_peak_cdf(g, 64).unwrap() - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn correlation_model() {
        let rho = candidate_correlation(64, PI).unwrap();
        assert!((rho - Complex64::new(62.0 / 64.0, 0.0)).norm() < 1e-15);
        let one = candidate_correlation(64, 0.0).unwrap();
        assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(candidate_correlation(1, 0.0).is_err());
    }
}
