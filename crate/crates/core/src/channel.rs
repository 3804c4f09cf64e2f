//! Doubly dispersive (linear time-varying) multipath channel.
//!
//! Path `p` has complex gain `h_p`, integer delay `l_p` and Doppler `f_p`
//! normalized to the subcarrier spacing (cycles per `N`-sample block). With
//! a chirp-periodic prefix at least as long as the largest delay, the
//! prefix-free received block is `r = H s + w` with
//!
//! ```text
//! H = sum_p h_p G_p D^{f_p} P^{l_p}
//! ```
//!
//! where `P` is the cyclic delay-by-one permutation, `D = diag(e^{-j 2 pi n / N})`
//! and `G_p` applies the prefix phase `e^{-j 2 pi c1 (N^2 - 2 N (l_p - n))}` to
//! the samples `n < l_p` that wrapped around from the prefix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::modem::{afdm_demodulate, afdm_modulate, cpp_phase, PreChirpProfile, TimeBlock};
use crate::numerics::cis_turns;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub gain: Complex64,
    pub delay: usize,
    pub doppler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtvChannel {
    n: usize,
    paths: Vec<PathSpec>,
}

impl LtvChannel {
    pub fn new(n: usize, paths: Vec<PathSpec>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("block size must be positive"));
        }
        if paths.is_empty() {
            return Err(Error::invalid("channel needs at least one path"));
        }
        if let Some(p) = paths.iter().find(|p| p.delay >= n) {
            return Err(Error::invalid(format!(
                "path delay {} must be below N = {n}",
                p.delay
            )));
        }
        Ok(Self { n, paths })
    }

    /// Single-tap identity channel.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(
            n,
            vec![PathSpec {
                gain: Complex64::new(1.0, 0.0),
                delay: 0,
                doppler: 0.0,
            }],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn max_delay(&self) -> usize {
        self.paths.iter().map(|p| p.delay).max().unwrap_or(0)
    }

    /// Same channel with every gain multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            paths: self
                .paths
                .iter()
                .map(|p| PathSpec {
                    gain: p.gain * factor,
                    ..*p
                })
                .collect(),
        }
    }

    /// Per-path tap gain seen at output sample `n`, including the Doppler
    /// rotation and, for wrapped samples, the prefix phase.
    fn tap(&self, path: &PathSpec, n: usize, c1: f64) -> Complex64 {
        let doppler = cis_turns(-path.doppler * n as f64 / self.n as f64);
        let wrap = if n < path.delay {
            cpp_phase(c1, self.n, path.delay - n)
        } else {
            Complex64::new(1.0, 0.0)
        };
        path.gain * doppler * wrap
    }

    /// `r = H s` without materializing `H`.
    pub fn apply(&self, s: &[Complex64], c1: f64) -> Result<Vec<Complex64>> {
        if s.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: s.len(),
            });
        }
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for path in &self.paths {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.tap(path, i, c1) * s[(i + n - path.delay) % n];
            }
        }
        Ok(out)
    }

    /// Run a prefixed block through the tapped delay line
    /// `r[t] = sum_p h_p e^{-j 2 pi f_p t / N} s[t - l_p]`, with `t` counted
    /// from the first body sample. Samples that would need transmit history
    /// before the prefix are left at zero; the body is exact whenever the
    /// prefix covers the largest delay.
    pub fn propagate(&self, tx: &TimeBlock) -> Result<TimeBlock> {
        let body_len = tx.samples.len() - tx.prefix_len;
        if body_len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: body_len,
            });
        }
        if tx.prefix_len < self.max_delay() {
            return Err(Error::invalid(format!(
                "prefix of {} samples is shorter than the largest delay {}",
                tx.prefix_len,
                self.max_delay()
            )));
        }
        let mut rx = vec![Complex64::new(0.0, 0.0); tx.samples.len()];
        for path in &self.paths {
            for (t, r) in rx.iter_mut().enumerate().skip(path.delay) {
                let time = t as f64 - tx.prefix_len as f64;
                let rot = cis_turns(-path.doppler * time / self.n as f64);
                *r += path.gain * rot * tx.samples[t - path.delay];
            }
        }
        Ok(TimeBlock {
            samples: rx,
            prefix_len: tx.prefix_len,
        })
    }

    /// Dense time-domain channel matrix `H`.
    pub fn build_time_channel(&self, c1: f64) -> DMatrix<Complex64> {
        let n = self.n;
        let mut h = DMatrix::zeros(n, n);
        for path in &self.paths {
            for i in 0..n {
                h[(i, (i + n - path.delay) % n)] += self.tap(path, i, c1);
            }
        }
        h
    }

    /// Effective DAFT-domain channel `A H A^H` for the given pre-chirp profile.
    pub fn build_heff(&self, c1: f64, profile: &PreChirpProfile) -> Result<DMatrix<Complex64>> {
        Ok(EffectiveChannel::new(self, c1)?.with_profile(profile))
    }
}

/// `A0 H A0^H` with the pre-chirp stripped out (`A0 = F L1`).
///
/// Because the pre-chirp is diagonal, the effective channel for any profile
/// is `L2 B L2^H`, a pointwise phase rotation of this core. The support of
/// the matrix therefore never depends on the profile.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    core: DMatrix<Complex64>,
}

impl EffectiveChannel {
    pub fn new(channel: &LtvChannel, c1: f64) -> Result<Self> {
        let n = channel.n();
        let flat = PreChirpProfile::uniform(n, 0.0)?;
        let mut core = DMatrix::zeros(n, n);
        let mut unit = vec![Complex64::new(0.0, 0.0); n];
        for q in 0..n {
            unit.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            unit[q] = Complex64::new(1.0, 0.0);
            let s = afdm_modulate(&unit, c1, &flat)?;
            let r = channel.apply(&s.samples, c1)?;
            let col = afdm_demodulate(&TimeBlock::new(r), c1, &flat)?;
            core.set_column(q, &nalgebra::DVector::from_vec(col));
        }
        Ok(Self { core })
    }

    pub fn core(&self) -> &DMatrix<Complex64> {
        &self.core
    }

    pub fn with_profile(&self, profile: &PreChirpProfile) -> DMatrix<Complex64> {
        let pre = profile.pre_chirp();
        let mut h = self.core.clone();
        for ((p, q), v) in h
            .iter_mut()
            .enumerate()
            .map(|(idx, v)| ((idx % pre.len(), idx / pre.len()), v))
        {
            *v *= pre[p] * pre[q].conj();
        }
        h
    }
}

/// Scenario for random channel draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelScenario {
    #[serde(rename = "P")]
    pub paths: usize,
    pub l_max: usize,
    pub alpha_max: u32,
    pub integer_doppler: bool,
    pub seed: u64,
}

impl Default for ChannelScenario {
    fn default() -> Self {
        Self {
            paths: 3,
            l_max: 2,
            alpha_max: 1,
            integer_doppler: true,
            seed: 0,
        }
    }
}

impl ChannelScenario {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Config("channel needs at least one path".into()));
        }
        if self.paths > self.l_max + 1 {
            return Err(Error::Config(format!(
                "{} paths cannot take distinct delays in 0..={}",
                self.paths, self.l_max
            )));
        }
        if self.l_max >= n {
            return Err(Error::Config(format!("l_max {} must be below N = {n}", self.l_max)));
        }
        Ok(())
    }

    /// Distinct delays from `0..=l_max`, Doppler uniform on
    /// `[-alpha_max, alpha_max]` (integers when `integer_doppler`), gains
    /// `CN(0, 1)` per path.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LtvChannel> {
        self.validate(n)?;
        let gain_dist = Normal::new(0.0, 0.5f64.sqrt()).expect("finite std");
        let delays = sample(rng, self.l_max + 1, self.paths).into_vec();
        let a = self.alpha_max as i64;
        let paths = delays
            .into_iter()
            .map(|delay| {
                let doppler = if self.integer_doppler {
                    rng.gen_range(-a..=a) as f64
                } else {
                    rng.gen_range(-(a as f64)..=a as f64)
                };
                let gain = Complex64::new(gain_dist.sample(rng), gain_dist.sample(rng));
                PathSpec {
                    gain,
                    delay,
                    doppler,
                }
            })
            .collect();
        LtvChannel::new(n, paths)
    }
}

/// Add circular complex Gaussian noise of variance `n0` per sample.
pub fn awgn<R: Rng + ?Sized>(s: &[Complex64], n0: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    if !(n0 >= 0.0) || !n0.is_finite() {
        return Err(Error::invalid(format!("noise variance must be non-negative, got {n0}")));
    }
    if n0 == 0.0 {
        return Ok(s.to_vec());
    }
    let dist = Normal::new(0.0, (n0 / 2.0).sqrt()).expect("finite std");
    Ok(s.iter()
        .map(|v| v + Complex64::new(dist.sample(rng), dist.sample(rng)))
        .collect())
}
