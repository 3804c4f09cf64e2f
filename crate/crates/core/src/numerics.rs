//! Complex-vector primitives shared by every other module.
//!
//! The DFT here is the unitary one: both directions carry a `1/sqrt(N)`
//! factor so that energy is preserved and the inverse is the adjoint.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward FFT plan of length `n`, cached per thread.
pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Inverse (unnormalized) FFT plan of length `n`, cached per thread.
pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// `exp(j * 2 * pi * turns)`, with the integer part of `turns` removed first
/// so large chirp arguments keep full precision.
#[inline]
pub fn cis_turns(turns: f64) -> Complex64 {
    let frac = turns - turns.floor();
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

pub fn check_finite(x: &[Complex64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::invalid("vector contains non-finite entries"));
    }
    Ok(())
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// Unitary DFT: `X[k] = N^{-1/2} sum_n x[n] e^{-j 2 pi k n / N}`.
pub fn dft_unitary(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut buf = x.to_vec();
    forward_plan(buf.len()).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

/// Unitary inverse DFT, the adjoint of [`dft_unitary`].
pub fn idft_unitary(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut buf = x.to_vec();
    inverse_plan(buf.len()).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn undb(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Hook for swapping the symbol alphabet.
pub trait Constellation {
    fn bits_per_symbol(&self) -> usize;
    fn map(&self, bits: &[bool]) -> Result<Vec<Complex64>>;
    fn demap(&self, symbols: &[Complex64]) -> Vec<bool>;
}

/// Gray-mapped square 16-QAM with unit average energy.
///
/// A 4-bit label `b0 b1 b2 b3` (b0 is the most significant bit) maps to
/// `(I + jQ) / sqrt(10)`. The in-phase level comes from `b0 b1` and the
/// quadrature level from `b2 b3`, each through the per-axis Gray code
///
/// ```text
/// 00 -> -3    01 -> -1    11 -> +1    10 -> +3
/// ```
#[derive(Debug, Clone, Copy, Default)]
pub struct Qam16;

const GRAY_LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0]; // indexed by the 2-bit value

impl Qam16 {
    pub const ORDER: usize = 16;

    /// Constellation point for `label` in `0..16`.
    pub fn point(label: u8) -> Complex64 {
        let scale = 1.0 / 10f64.sqrt();
        let i = GRAY_LEVELS[(label >> 2) as usize & 3];
        let q = GRAY_LEVELS[label as usize & 3];
        Complex64::new(i * scale, q * scale)
    }

    pub fn points() -> [Complex64; 16] {
        std::array::from_fn(|l| Self::point(l as u8))
    }

    /// Minimum-distance label; on exact ties the lowest label wins.
    pub fn decide(symbol: Complex64) -> u8 {
        let mut best = 0u8;
        let mut best_d = f64::INFINITY;
        for label in 0..16u8 {
            let d = (symbol - Self::point(label)).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

impl Constellation for Qam16 {
    fn bits_per_symbol(&self) -> usize {
        4
    }

    fn map(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        qam16_map(bits)
    }

    fn demap(&self, symbols: &[Complex64]) -> Vec<bool> {
        qam16_demap(symbols)
    }
}

pub fn qam16_map(bits: &[bool]) -> Result<Vec<Complex64>> {
    if bits.len() % 4 != 0 {
        return Err(Error::invalid(format!(
            "16-QAM needs a multiple of 4 bits, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(4)
        .map(|b| {
            let label = b.iter().fold(0u8, |acc, &bit| (acc << 1) | bit as u8);
            Qam16::point(label)
        })
        .collect())
}

pub fn qam16_demap(symbols: &[Complex64]) -> Vec<bool> {
    symbols
        .iter()
        .flat_map(|&s| {
            let label = Qam16::decide(s);
            (0..4).rev().map(move |shift| (label >> shift) & 1 == 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::dft_direct;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn impulse_transforms_to_constant() {
        let mut x = vec![Complex64::new(0.0, 0.0); 4];
        x[0] = Complex64::new(1.0, 0.0);
        for v in dft_unitary(&x).unwrap() {
            assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let back = idft_unitary(&vec![Complex64::new(0.5, 0.0); 4]).unwrap();
        assert!((back[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(back[1..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn single_tone_has_flat_envelope() {
        let n = 16;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[3] = Complex64::new(1.0, 0.0);
        let s = idft_unitary(&x).unwrap();
        for (i, v) in s.iter().enumerate() {
            let expected = cis_turns(3.0 * i as f64 / n as f64) / (n as f64).sqrt();
            assert!((v - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn unitary_round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &n in &[8usize, 64, 256] {
            for _ in 0..1000 {
                let x = random_vec(&mut rng, n);
                let f = dft_unitary(&x).unwrap();
                assert!((energy(&f) - energy(&x)).abs() <= 1e-10);
                let back = idft_unitary(&f).unwrap();
                let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err <= 1e-10);
            }
        }
    }

    #[test]
    fn fast_transform_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // power-of-two and awkward sizes alike
        for &n in &[1usize, 7, 12, 64, 100] {
            let x = random_vec(&mut rng, n);
            let fast = dft_unitary(&x).unwrap();
            let slow = dft_direct(&x);
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "n={n} err={err}");
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(dft_unitary(&[]), Err(Error::EmptyInput)));
        assert!(matches!(idft_unitary(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn qam_unit_power_and_distinct_points() {
        let pts = Qam16::points();
        let mean: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0;
        assert!((mean - 1.0).abs() < 1e-15);
        for i in 0..16 {
            for j in (i + 1)..16 {
                assert!((pts[i] - pts[j]).norm() > 0.1);
            }
        }
    }

    #[test]
    fn qam_gray_neighbours_differ_in_one_bit() {
        let pts = Qam16::points();
        let dmin = 2.0 / 10f64.sqrt();
        for i in 0..16u8 {
            for j in 0..16u8 {
                let d = (pts[i as usize] - pts[j as usize]).norm();
                if (d - dmin).abs() < 1e-12 {
                    assert_eq!((i ^ j).count_ones(), 1, "labels {i} and {j}");
                }
            }
        }
    }

    #[test]
    fn qam_round_trip_all_labels() {
        let bits: Vec<bool> = (0..16u8)
            .flat_map(|l| (0..4).rev().map(move |s| (l >> s) & 1 == 1))
            .collect();
        let sym = qam16_map(&bits).unwrap();
        assert_eq!(sym.len(), 16);
        assert_eq!(qam16_demap(&sym), bits);
    }

    #[test]
    fn qam_decision_regions_tolerate_small_noise() {
        let half = 1.0 / 10f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for label in 0..16u8 {
            for _ in 0..50 {
                let r = rng.gen_range(0.0..0.99 * half);
                let phi = rng.gen_range(0.0..2.0 * PI);
                let noisy = Qam16::point(label) + Complex64::from_polar(r, phi);
                assert_eq!(Qam16::decide(noisy), label);
            }
        }
    }

    #[test]
    fn origin_ties_break_to_lowest_inner_label() {
        // inner points carry labels 5, 7, 13, 15
        assert_eq!(Qam16::decide(Complex64::new(0.0, 0.0)), 5);
    }

    #[test]
    fn qam_rejects_partial_symbol() {
        assert!(qam16_map(&[true, false, true]).is_err());
    }
}
