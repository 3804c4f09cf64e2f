//! DAFT-domain MMSE equalization and bit recovery.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::LtvChannel;
use crate::gps::side_bits_decode;
use crate::modem::{afdm_demodulate, remove_cpp, AfdmConfig, GroupLayout, PreChirpProfile, TimeBlock};
use crate::numerics::qam16_demap;
use crate::{Error, Result};

/// `x_hat = H^H (H H^H + n0 I)^{-1} y`, assuming unit-energy symbols.
///
/// With `n0 = 0` this is zero forcing and fails on a singular `H`.
pub fn mmse_equalize(y: &[Complex64], h_eff: &DMatrix<Complex64>, n0: f64) -> Result<Vec<Complex64>> {
    if !h_eff.is_square() {
        return Err(Error::invalid("effective channel must be square"));
    }
    if y.len() != h_eff.nrows() {
        return Err(Error::LengthMismatch {
            expected: h_eff.nrows(),
            actual: y.len(),
        });
    }
    if !(n0 >= 0.0) {
        return Err(Error::invalid(format!("noise variance must be non-negative, got {n0}")));
    }
    let yv = DVector::from_column_slice(y);
    let h_adj = h_eff.adjoint();
    let mut gram = h_eff * &h_adj;
    for i in 0..gram.nrows() {
        gram[(i, i)] += Complex64::new(n0, 0.0);
    }
    let z = gram.lu().solve(&yv).ok_or(Error::Singular)?;
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular);
    }
    Ok((h_adj * z).iter().copied().collect())
}

/// How the receiver learns the transmitter's pre-chirp profile.
#[derive(Debug, Clone)]
pub enum SideInfo {
    /// Profile handed over out of band.
    Genie(PreChirpProfile),
    /// Profile rebuilt from received side bits.
    Bits { bits: Vec<bool>, layout: GroupLayout },
}

impl SideInfo {
    pub fn profile(&self) -> Result<PreChirpProfile> {
        match self {
            SideInfo::Genie(p) => Ok(p.clone()),
            SideInfo::Bits { bits, layout } => {
                let selection = side_bits_decode(bits, layout.groups(), layout.candidates())?;
                layout.profile(&selection)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EqualizerOutput {
    pub x_hat: Vec<Complex64>,
    pub profile_used: PreChirpProfile,
}

/// Demodulate and MMSE-equalize one received block with perfect channel knowledge.
pub fn equalize_block(
    r: &TimeBlock,
    side: &SideInfo,
    channel: &LtvChannel,
    config: &AfdmConfig,
    n0: f64,
) -> Result<EqualizerOutput> {
    let profile = side.profile()?;
    let body = if r.has_cpp() { remove_cpp(r) } else { r.clone() };
    if body.samples.len() != config.n_subcarriers {
        return Err(Error::LengthMismatch {
            expected: config.n_subcarriers,
            actual: body.samples.len(),
        });
    }
    let y = afdm_demodulate(&body, config.c1, &profile)?;
    let h_eff = channel.build_heff(config.c1, &profile)?;
    let x_hat = mmse_equalize(&y, &h_eff, n0)?;
    Ok(EqualizerOutput {
        x_hat,
        profile_used: profile,
    })
}

/// Full receive chain down to hard 16-QAM bit decisions.
pub fn recover_bits(
    r: &TimeBlock,
    side: &SideInfo,
    channel: &LtvChannel,
    config: &AfdmConfig,
    n0: f64,
) -> Result<Vec<bool>> {
    let out = equalize_block(r, side, channel, config, n0)?;
    Ok(qam16_demap(&out.x_hat))
}

/// Hard BPSK decisions (`+1 -> true`) on the first `count` equalized symbols.
pub fn bpsk_decide(x_hat: &[Complex64], count: usize) -> Vec<bool> {
    x_hat.iter().take(count).map(|v| v.re > 0.0).collect()
}

pub fn bpsk_map(bits: &[bool]) -> Vec<Complex64> {
    bits.iter()
        .map(|&b| Complex64::new(if b { 1.0 } else { -1.0 }, 0.0))
        .collect()
}

/// `(bit errors, total bits)`.
pub fn ber_count(tx: &[bool], rx: &[bool]) -> Result<(usize, usize)> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            actual: rx.len(),
        });
    }
    Ok((tx.iter().zip(rx).filter(|(a, b)| a != b).count(), tx.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{awgn, ChannelScenario};
    use crate::gps::side_bits_encode;
    use crate::modem::{add_cpp, afdm_modulate, GroupPattern};
    use crate::numerics::qam16_map;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_channel_equalization() {
        let y = vec![c(1.0, 2.0), c(-0.5, 0.25), c(0.0, -1.0)];
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert_eq!(mmse_equalize(&y, &id, 0.0).unwrap(), y);
        let half = mmse_equalize(&y, &id, 1.0).unwrap();
        for (a, b) in half.iter().zip(&y) {
            assert!((a - b / 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn near_zero_noise_inverts_random_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let n = 16;
        let h = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let x: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let y = &h * DVector::from_column_slice(&x);
        let direct = h.clone().lu().solve(&y).unwrap();
        let x_hat = mmse_equalize(y.as_slice(), &h, 1e-8).unwrap();
        for i in 0..n {
            assert!((x_hat[i] - x[i]).norm() < 1e-4);
            assert!((x_hat[i] - direct[i]).norm() < 1e-4);
        }
    }

    #[test]
    fn singular_zero_forcing_is_an_error() {
        let h = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(
            mmse_equalize(&[c(1.0, 0.0), c(1.0, 0.0)], &h, 0.0),
            Err(Error::Singular)
        ));
        assert!(mmse_equalize(&[c(1.0, 0.0)], &h, 0.1).is_err());
        assert!(mmse_equalize(&[c(1.0, 0.0), c(1.0, 0.0)], &h, -0.1).is_err());
    }

    #[test]
    fn mse_shrinks_with_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let n = 32;
        let config = AfdmConfig::new(n, 1).unwrap();
        let ch = ChannelScenario::default().draw(n, &mut rng).unwrap();
        let profile = PreChirpProfile::uniform(n, 0.01).unwrap();
        let h_eff = ch.build_heff(config.c1, &profile).unwrap();
        let blocks: Vec<Vec<Complex64>> = (0..200)
            .map(|_| {
                let bits: Vec<bool> = (0..4 * n).map(|_| rng.gen()).collect();
                qam16_map(&bits).unwrap()
            })
            .collect();
        let noise: Vec<Vec<Complex64>> = (0..200)
            .map(|_| awgn(&vec![c(0.0, 0.0); n], 1.0, &mut rng).unwrap())
            .collect();
        let mut last = f64::INFINITY;
        for snr_db in [0.0, 5.0, 10.0, 15.0, 20.0] {
            let n0 = 10f64.powf(-snr_db / 10.0);
            let mut mse = 0.0;
            for (x, w) in blocks.iter().zip(&noise) {
                let y = &h_eff * DVector::from_column_slice(x);
                let y: Vec<Complex64> = y.iter().zip(w).map(|(a, b)| a + b * n0.sqrt()).collect();
                let x_hat = mmse_equalize(&y, &h_eff, n0).unwrap();
                mse += x_hat.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
            }
            assert!(mse <= last);
            last = mse;
        }
    }

    #[test]
    fn noiseless_identity_channel_recovers_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let n = 64;
        let config = AfdmConfig::new(n, 1).unwrap();
        let layout = GroupLayout::new(n, 4, 2, 2, GroupPattern::Adjacent).unwrap();
        let profile = layout.profile(&[2, 1, 2, 2]).unwrap();
        let bits: Vec<bool> = (0..4 * n).map(|_| rng.gen()).collect();
        let s = afdm_modulate(&qam16_map(&bits).unwrap(), config.c1, &profile).unwrap();
        let ch = LtvChannel::identity(n).unwrap();
        let rx = recover_bits(&s, &SideInfo::Genie(profile), &ch, &config, 0.0).unwrap();
        assert_eq!(ber_count(&bits, &rx).unwrap(), (0, 4 * n));
    }

    #[test]
    fn side_bits_and_genie_agree_and_wrong_bits_hurt() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let n = 64;
        let config = AfdmConfig::new(n, 1).unwrap().with_cpp(2).unwrap();
        let layout = GroupLayout::new(n, 4, 2, 2, GroupPattern::Adjacent).unwrap();
        let selection = [2u32, 1, 2, 1];
        let profile = layout.profile(&selection).unwrap();
        let good = side_bits_encode(&selection, 2).unwrap();
        let mut bad = good.clone();
        bad[0] = !bad[0];
        let n0 = 0.01; // 20 dB
        let (mut err_good, mut err_bad) = (0, 0);
        for _ in 0..20 {
            let ch = ChannelScenario::default().draw(n, &mut rng).unwrap();
            let bits: Vec<bool> = (0..4 * n).map(|_| rng.gen()).collect();
            let s = afdm_modulate(&qam16_map(&bits).unwrap(), config.c1, &profile).unwrap();
            let tx = add_cpp(&s, config.cpp_len, config.c1).unwrap();
            let clean = ch.apply(tx.body(), config.c1).unwrap();
            let noisy = awgn(&clean, n0, &mut rng).unwrap();
            let r = TimeBlock::new(noisy);
            let genie = recover_bits(&r, &SideInfo::Genie(profile.clone()), &ch, &config, n0).unwrap();
            let via_bits = recover_bits(
                &r,
                &SideInfo::Bits { bits: good.clone(), layout: layout.clone() },
                &ch,
                &config,
                n0,
            )
            .unwrap();
            assert_eq!(genie, via_bits);
            let wrong = recover_bits(
                &r,
                &SideInfo::Bits { bits: bad.clone(), layout: layout.clone() },
                &ch,
                &config,
                n0,
            )
            .unwrap();
            err_good += ber_count(&bits, &genie).unwrap().0;
            err_bad += ber_count(&bits, &wrong).unwrap().0;
        }
        assert!(err_bad > err_good, "bad={err_bad} good={err_good}");
    }

    #[test]
    fn malformed_side_bits_rejected() {
        let layout = GroupLayout::new(16, 4, 2, 2, GroupPattern::Adjacent).unwrap();
        let side = SideInfo::Bits { bits: vec![true; 3], layout };
        assert!(side.profile().is_err());
    }

    #[test]
    fn ber_counting() {
        let a = vec![true, false, true, true];
        let flipped: Vec<bool> = a.iter().map(|b| !b).collect();
        assert_eq!(ber_count(&a, &a).unwrap(), (0, 4));
        assert_eq!(ber_count(&a, &flipped).unwrap(), (4, 4));
        let mut one = a.clone();
        one[2] = false;
        assert_eq!(ber_count(&a, &one).unwrap(), (1, 4));
        assert!(ber_count(&a, &a[..3]).is_err());
    }
}
