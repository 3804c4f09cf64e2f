//! Fast paths checked against the direct evaluations in [`crate::reference`].

use num_complex::Complex64;

use super::rng::block_rng;
use crate::baselines::{otfs_modulate, OtfsGrid};
use crate::channel::ChannelScenario;
use crate::gps::{enumerate_optimal, gps_select, side_bits_decode, side_bits_encode, GpsParams};
use crate::modem::{
    add_cpp, afdm_modulate, build_daft_matrix, compute_c1, AfdmConfig, GroupPattern, PreChirpProfile,
};
use crate::numerics::dft_unitary;
use crate::papr::oversampled_time_signal;
use crate::reference::{
    afdm_direct, afdm_direct_at, dft_direct, enumerate_matrix_oracle, gps_matrix_oracle, otfs_direct,
    random_qam_block,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_profile(rng: &mut impl rand::Rng, n: usize) -> Result<PreChirpProfile> {
    PreChirpProfile::from_values((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect())
}

pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    let mut rng = block_rng(seed, u64::MAX, 0);
    let mut checks = Vec::new();

    let mut err = 0.0f64;
    for n in [7usize, 16, 64] {
        let x = random_qam_block(&mut rng, n);
        err = err.max(max_diff(&dft_unitary(&x)?, &dft_direct(&x)));
    }
    checks.push(Check { name: "dft", max_error: err, tolerance: 1e-10 });

    let mut err = 0.0f64;
    for n in [16usize, 64] {
        let c1 = compute_c1(1, n)?;
        for _ in 0..10 {
            let x = random_qam_block(&mut rng, n);
            let profile = random_profile(&mut rng, n)?;
            let fast = afdm_modulate(&x, c1, &profile)?;
            err = err.max(max_diff(&fast.samples, &afdm_direct(&x, c1, profile.c2_values())));
        }
    }
    checks.push(Check { name: "afdm_modulate", max_error: err, tolerance: 1e-9 });

    let n = 32;
    let c1 = compute_c1(2, n)?;
    let profile = random_profile(&mut rng, n)?;
    let a = build_daft_matrix(c1, profile.c2_values())?;
    let gram = &a * a.adjoint();
    let err = (gram - nalgebra::DMatrix::<Complex64>::identity(n, n)).camax();
    checks.push(Check { name: "daft_unitary", max_error: err, tolerance: 1e-10 });

    let x = random_qam_block(&mut rng, n);
    let times: Vec<f64> = (0..4 * n).map(|k| k as f64 / 4.0).collect();
    let fast = oversampled_time_signal(&x, c1, &profile, 4)?;
    let err = max_diff(&fast, &afdm_direct_at(&x, c1, profile.c2_values(), &times));
    checks.push(Check { name: "oversampled_signal", max_error: err, tolerance: 1e-9 });

    let cpp = 5;
    let with_prefix = add_cpp(&afdm_modulate(&x, c1, &profile)?, cpp, c1)?;
    let times: Vec<f64> = (0..n + cpp).map(|i| i as f64 - cpp as f64).collect();
    let err = max_diff(&with_prefix.samples, &afdm_direct_at(&x, c1, profile.c2_values(), &times));
    checks.push(Check { name: "chirp_periodic_prefix", max_error: err, tolerance: 1e-9 });

    let scenario = ChannelScenario {
        paths: 3,
        l_max: 3,
        alpha_max: 2,
        integer_doppler: true,
        seed: 0,
    };
    let channel = scenario.draw(n, &mut rng)?;
    let fast = channel.build_heff(c1, &profile)?;
    let slow = &a * channel.build_time_channel(c1) * a.adjoint();
    let err = (fast - slow).camax();
    checks.push(Check { name: "effective_channel", max_error: err, tolerance: 1e-9 });

    let (m_bins, k_bins) = (8, 4);
    let grid = random_qam_block(&mut rng, m_bins * k_bins);
    let fast = otfs_modulate(&OtfsGrid::new(m_bins, k_bins, grid.clone())?)?;
    let err = max_diff(&fast.samples, &otfs_direct(&grid, m_bins, k_bins));
    checks.push(Check { name: "otfs_modulate", max_error: err, tolerance: 1e-10 });

    let n = 16;
    let config = AfdmConfig::new(n, 1)?;
    let mut mismatches = 0usize;
    let mut err = 0.0f64;
    for (groups, candidates, pattern) in [
        (2, 2, GroupPattern::Adjacent),
        (4, 2, GroupPattern::Comb),
        (2, 3, GroupPattern::Adjacent),
    ] {
        let params = GpsParams {
            groups,
            candidates,
            precision: 2,
            pattern,
            oversample_select: 4,
        };
        for _ in 0..5 {
            let x = random_qam_block(&mut rng, n);
            let fast = gps_select(&x, &config, &params)?;
            let slow = gps_matrix_oracle(&x, config.c1, &params);
            mismatches += usize::from(fast.profile.selection() != Some(&slow.selection[..]));
            mismatches += usize::from(fast.n_evaluations != slow.evaluations);
            err = err.max((fast.papr_min.linear - slow.papr_min).abs());
            let fast = enumerate_optimal(&x, &config, &params, 1 << 10)?;
            let slow = enumerate_matrix_oracle(&x, config.c1, &params);
            mismatches += usize::from(fast.profile.selection() != Some(&slow.selection[..]));
            err = err.max((fast.papr_min.linear - slow.papr_min).abs());
        }
    }
    checks.push(Check { name: "grouped_search", max_error: err + mismatches as f64, tolerance: 1e-9 });

    let mut failures = 0usize;
    for candidates in 1..=5u32 {
        for code in 0..candidates.pow(3) {
            let selection: Vec<u32> = (0..3).map(|g| code / candidates.pow(2 - g) % candidates + 1).collect();
            let bits = side_bits_encode(&selection, candidates)?;
            failures += usize::from(side_bits_decode(&bits, 3, candidates)? != selection);
        }
    }
    checks.push(Check { name: "side_bits_round_trip", max_error: failures as f64, tolerance: 0.0 });

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for check in run_selftest(0x5EED).unwrap() {
            assert!(check.passed(), "{check:?}");
        }
    }
}
