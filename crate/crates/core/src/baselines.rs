//! OFDM and OTFS modulators used as PAPR references.

use num_complex::Complex64;

use crate::modem::TimeBlock;
use crate::numerics::{check_finite, idft_unitary, inverse_plan};
use crate::{Error, Result};

/// Unitary IDFT of the subcarrier symbols.
pub fn ofdm_modulate(x: &[Complex64]) -> Result<TimeBlock> {
    Ok(TimeBlock::new(idft_unitary(x)?))
}

/// Delay-Doppler symbol grid. `symbols[l * doppler_bins + k]` sits at delay
/// bin `l` and Doppler bin `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OtfsGrid {
    pub delay_bins: usize,
    pub doppler_bins: usize,
    pub symbols: Vec<Complex64>,
}

impl OtfsGrid {
    pub fn new(delay_bins: usize, doppler_bins: usize, symbols: Vec<Complex64>) -> Result<Self> {
        if delay_bins == 0 || doppler_bins == 0 {
            return Err(Error::invalid("OTFS grid dimensions must be positive"));
        }
        if symbols.len() != delay_bins * doppler_bins {
            return Err(Error::LengthMismatch {
                expected: delay_bins * doppler_bins,
                actual: symbols.len(),
            });
        }
        Ok(Self {
            delay_bins,
            doppler_bins,
            symbols,
        })
    }
}

/// ISFFT plus rectangular-pulse Heisenberg transform. The two DFTs along the
/// delay axis cancel, leaving a unitary IDFT along Doppler; slot `n`
/// carries samples `n M .. (n + 1) M`, delay-major.
pub fn otfs_modulate(grid: &OtfsGrid) -> Result<TimeBlock> {
    Ok(TimeBlock::new(otfs_oversampled(grid, 1)?))
}

/// OTFS samples with each slot's `M`-sample multicarrier symbol
/// interpolated `L`-fold by spectrum zero-padding.
pub fn otfs_oversampled(grid: &OtfsGrid, oversample: usize) -> Result<Vec<Complex64>> {
    if oversample == 0 {
        return Err(Error::invalid("oversampling factor must be at least 1"));
    }
    check_finite(&grid.symbols)?;
    let (m, n) = (grid.delay_bins, grid.doppler_bins);
    // IDFT along Doppler for each delay row
    let mut slots = vec![Complex64::new(0.0, 0.0); m * n];
    let doppler_plan = inverse_plan(n);
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / (n as f64).sqrt();
    for l in 0..m {
        row.copy_from_slice(&grid.symbols[l * n..(l + 1) * n]);
        doppler_plan.process(&mut row);
        for (k, v) in row.iter().enumerate() {
            slots[k * m + l] = v * scale;
        }
    }
    if oversample == 1 {
        return Ok(slots);
    }
    let forward = crate::numerics::forward_plan(m);
    let inverse = inverse_plan(m * oversample);
    let mut out = Vec::with_capacity(m * n * oversample);
    let mut padded = vec![Complex64::new(0.0, 0.0); m * oversample];
    for slot in slots.chunks_exact(m) {
        let mut spec = slot.to_vec();
        forward.process(&mut spec);
        padded.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        padded[..m].copy_from_slice(&spec);
        inverse.process(&mut padded);
        out.extend(padded.iter().map(|v| v / m as f64));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{afdm_modulate, PreChirpProfile};
    use crate::numerics::energy;
    use crate::papr::papr_of;
    use crate::reference::{otfs_direct, random_qam_block};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ofdm_is_afdm_without_chirps() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let x = random_qam_block(&mut rng, 64);
        let a = ofdm_modulate(&x).unwrap();
        let b = afdm_modulate(&x, 0.0, &PreChirpProfile::uniform(64, 0.0).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!((energy(&a.samples) - energy(&x)).abs() < 1e-12);
    }

    #[test]
    fn ofdm_delta_has_flat_envelope() {
        let mut x = vec![Complex64::new(0.0, 0.0); 32];
        x[7] = Complex64::new(1.0, 0.0);
        let s = ofdm_modulate(&x).unwrap();
        assert!((papr_of(&s.samples) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn otfs_matches_direct_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for (m, n) in [(8usize, 8usize), (4, 16), (16, 4)] {
            let x = random_qam_block(&mut rng, m * n);
            let grid = OtfsGrid::new(m, n, x.clone()).unwrap();
            let fast = otfs_modulate(&grid).unwrap();
            let slow = otfs_direct(&x, m, n);
            let err = fast.samples.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-9);
            assert!((energy(&fast.samples) - energy(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn otfs_doppler_impulse_is_a_pulse_train() {
        let (m, n) = (8, 8);
        let mut x = vec![Complex64::new(0.0, 0.0); m * n];
        x[3 * n + 5] = Complex64::new(1.0, 0.0);
        let s = otfs_modulate(&OtfsGrid::new(m, n, x).unwrap()).unwrap();
        // one nonzero unit-modulus sample per slot, at delay 3
        for (t, v) in s.samples.iter().enumerate() {
            if t % m == 3 {
                assert!((v.norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
        assert!((papr_of(&s.samples) - m as f64).abs() < 1e-9);
    }

    #[test]
    fn otfs_oversampling_keeps_critical_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let grid = OtfsGrid::new(8, 8, random_qam_block(&mut rng, 64)).unwrap();
        let base = otfs_oversampled(&grid, 1).unwrap();
        let over = otfs_oversampled(&grid, 4).unwrap();
        assert_eq!(over.len(), 256);
        for (i, v) in base.iter().enumerate() {
            assert!((over[4 * i] - v).norm() < 1e-12);
        }
        assert!((energy(&over) - 4.0 * energy(&base)).abs() < 1e-9);
    }

    #[test]
    fn otfs_grid_validation() {
        assert!(OtfsGrid::new(0, 8, vec![]).is_err());
        assert!(OtfsGrid::new(8, 8, vec![Complex64::new(0.0, 0.0); 10]).is_err());
    }
}
