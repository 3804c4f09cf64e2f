//! Slow direct evaluations used to cross-check the fast paths.
//!
//! Nothing here touches an FFT or the search machinery in [`crate::gps`];
//! every routine is a literal double sum or an explicit matrix product.
//! They back the unit tests, the acceptance suite, and `afdm selftest`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::gps::GpsParams;
use crate::modem::GroupPattern;
use crate::numerics::qam16_map;

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `X[k] = N^{-1/2} sum_n x[n] e^{-j 2 pi k n / N}` by direct summation.
pub fn dft_direct(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| v * cis(-2.0 * PI * ((k * i) % n) as f64 / n as f64))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Chirp-subcarrier synthesis at arbitrary (possibly fractional) times:
/// `s(t) = N^{-1/2} sum_m x[m] exp(j 2 pi (c1 t^2 + c2_m m^2 + m t / N))`.
pub fn afdm_direct_at(x: &[Complex64], c1: f64, c2: &[f64], times: &[f64]) -> Vec<Complex64> {
    let n = x.len() as f64;
    times
        .iter()
        .map(|&t| {
            let sum: Complex64 = x
                .iter()
                .enumerate()
                .map(|(m, xm)| {
                    let mf = m as f64;
                    let turns = c1 * t * t + c2[m] * mf * mf + mf * t / n;
                    xm * cis(2.0 * PI * (turns - turns.floor()))
                })
                .sum();
            sum / n.sqrt()
        })
        .collect()
}

/// Direct synthesis at the integer sample instants `0..N`.
pub fn afdm_direct(x: &[Complex64], c1: f64, c2: &[f64]) -> Vec<Complex64> {
    let times: Vec<f64> = (0..x.len()).map(|n| n as f64).collect();
    afdm_direct_at(x, c1, c2, &times)
}

/// Random unit-power 16-QAM block from uniformly drawn bits.
pub fn random_qam_block<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let bits: Vec<bool> = (0..4 * n).map(|_| rng.gen()).collect();
    qam16_map(&bits).expect("bit count is a multiple of four")
}

/// Candidate pre-chirp value written out from the closed forms.
pub fn omega_direct(m: usize, w: u32, candidates: u32, precision: u32) -> f64 {
    let scaled = PI * 10f64.powi(precision as i32);
    let r = scaled / scaled.floor();
    let m2 = (m * m) as f64;
    if candidates == 2 {
        (-1f64).powi(w as i32 - 1) * r / (4.0 * m2)
    } else {
        (w as f64 - 0.5) * r / (candidates as f64 * m2)
    }
}

fn group_members(n: usize, groups: usize, pattern: GroupPattern, g: usize) -> Vec<usize> {
    (0..n)
        .filter(|&m| match pattern {
            GroupPattern::Adjacent => m / (n / groups) == g,
            GroupPattern::Comb => m % groups == g,
        })
        .collect()
}

/// Explicit oversampled synthesis matrix `T[t, m] = exp(j 2 pi (c1 (t/L)^2 + m t / (L N))) / sqrt(N)`,
/// i.e. the post-chirp and inverse-DFT factors at `t / L`.
fn synthesis_matrix(n: usize, c1: f64, oversample: usize) -> DMatrix<Complex64> {
    let l = oversample as f64;
    DMatrix::from_fn(n * oversample, n, |t, m| {
        let tf = t as f64 / l;
        cis(2.0 * PI * (c1 * tf * tf + m as f64 * tf / n as f64)) / (n as f64).sqrt()
    })
}

fn matrix_papr(s: &DVector<Complex64>) -> f64 {
    let powers: Vec<f64> = s.iter().map(|v| v.norm_sqr()).collect();
    let peak = powers.iter().cloned().fold(0.0, f64::max);
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    peak / mean
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSelection {
    pub selection: Vec<u32>,
    pub papr_min: f64,
    pub papr_initial: f64,
    pub evaluations: usize,
}

/// PAPR of the block for one explicit group selection, built as
/// `T * diag(pre)^H * x`.
pub fn selection_papr_matrix(x: &[Complex64], c1: f64, params: &GpsParams, selection: &[u32]) -> f64 {
    let n = x.len();
    let mut c2 = vec![0.0; n];
    for (g, &w) in selection.iter().enumerate() {
        for m in group_members(n, params.groups, params.pattern, g) {
            if m > 0 {
                c2[m] = omega_direct(m, w, params.candidates, params.precision);
            }
        }
    }
    let pre_h = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            cis(2.0 * PI * c2[i] * (i * i) as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let t = synthesis_matrix(n, c1, params.oversample_select);
    let s = t * pre_h * DVector::from_column_slice(x);
    matrix_papr(&s)
}

/// Greedy grouped selection written step by step with explicit matrices:
/// flip one group to each alternative candidate, keep it on a strict
/// improvement, otherwise revert.
pub fn gps_matrix_oracle(x: &[Complex64], c1: f64, params: &GpsParams) -> OracleSelection {
    let mut selection = vec![1u32; params.groups];
    let initial = selection_papr_matrix(x, c1, params, &selection);
    let mut best = initial;
    let mut evaluations = 1;
    for g in 0..params.groups {
        for w in 2..=params.candidates {
            let previous = selection[g];
            selection[g] = w;
            let p = selection_papr_matrix(x, c1, params, &selection);
            evaluations += 1;
            if p >= best {
                selection[g] = previous;
            } else {
                best = p;
            }
        }
    }
    OracleSelection {
        selection,
        papr_min: best,
        papr_initial: initial,
        evaluations,
    }
}

/// Exhaustive search over every selection tuple with explicit matrices.
pub fn enumerate_matrix_oracle(x: &[Complex64], c1: f64, params: &GpsParams) -> OracleSelection {
    let total = (params.candidates as usize).pow(params.groups as u32);
    let mut best = f64::INFINITY;
    let mut best_sel = vec![1u32; params.groups];
    for code in 0..total {
        let mut rem = code;
        let mut sel = vec![1u32; params.groups];
        for slot in sel.iter_mut().rev() {
            *slot = (rem % params.candidates as usize) as u32 + 1;
            rem /= params.candidates as usize;
        }
        let p = selection_papr_matrix(x, c1, params, &sel);
        if p < best {
            best = p;
            best_sel = sel;
        }
    }
    OracleSelection {
        selection: best_sel,
        papr_min: best,
        papr_initial: selection_papr_matrix(x, c1, params, &vec![1; params.groups]),
        evaluations: total + 1,
    }
}

/// OTFS time samples through an explicit inverse symplectic finite Fourier
/// transform followed by a rectangular-pulse Heisenberg transform, both as
/// direct sums. `grid[l * N + k]` holds the symbol at delay `l` (of `M`)
/// and Doppler `k` (of `N`); slot `n` occupies samples `n M .. (n + 1) M`.
pub fn otfs_direct(grid: &[Complex64], delay_bins: usize, doppler_bins: usize) -> Vec<Complex64> {
    let (m_bins, n_bins) = (delay_bins, doppler_bins);
    let isfft_scale = 1.0 / ((m_bins * n_bins) as f64).sqrt();
    let mut tf = vec![Complex64::new(0.0, 0.0); m_bins * n_bins];
    for i in 0..m_bins {
        for n in 0..n_bins {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..m_bins {
                for k in 0..n_bins {
                    let turns = (n * k) as f64 / n_bins as f64 - (i * l) as f64 / m_bins as f64;
                    acc += grid[l * n_bins + k] * cis(2.0 * PI * turns);
                }
            }
            tf[i * n_bins + n] = acc * isfft_scale;
        }
    }
    let pulse_scale = 1.0 / (m_bins as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); m_bins * n_bins];
    for n in 0..n_bins {
        for t in 0..m_bins {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m_bins {
                acc += tf[i * n_bins + n] * cis(2.0 * PI * (i * t) as f64 / m_bins as f64);
            }
            out[n * m_bins + t] = acc * pulse_scale;
        }
    }
    out
}
