//! AFDM modulation and demodulation.
//!
//! The discrete affine Fourier transform (DAFT) is `A = L2 * F * L1`, where
//! `F` is the unitary DFT and `Li = diag(exp(-j 2 pi c_i n^2))`. The
//! transmitter applies `A^H`; the receiver applies `A`. The pre-chirp `L2`
//! may carry a different `c2` on every subcarrier, which is what grouped
//! pre-chirp selection exploits.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gps::{make_groups, OmegaSet};
use crate::numerics::{check_finite, cis_turns, forward_plan, inverse_plan};
use crate::{Error, Result};

/// Default oversampling factor for PAPR measurement.
pub const DEFAULT_OVERSAMPLE: usize = 4;

/// Minimum post-chirp parameter for integer Doppler up to `alpha_max`:
/// `c1 = (2 alpha_max + 1) / (2N)`.
pub fn compute_c1(alpha_max: u32, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("subcarrier count must be positive"));
    }
    Ok((2.0 * alpha_max as f64 + 1.0) / (2.0 * n as f64))
}

/// Uniform pre-chirp used by conventional AFDM.
pub fn default_uniform_c2(n: usize) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfdmConfig {
    pub n_subcarriers: usize,
    pub alpha_max: u32,
    pub c1: f64,
    pub cpp_len: usize,
    pub oversample: usize,
}

impl AfdmConfig {
    /// Config with `c1` derived from `alpha_max`, no prefix, 4x oversampling.
    pub fn new(n_subcarriers: usize, alpha_max: u32) -> Result<Self> {
        let c1 = compute_c1(alpha_max, n_subcarriers)?;
        Ok(Self {
            n_subcarriers,
            alpha_max,
            c1,
            cpp_len: 0,
            oversample: DEFAULT_OVERSAMPLE,
        })
    }

    pub fn with_cpp(mut self, cpp_len: usize) -> Result<Self> {
        if cpp_len >= self.n_subcarriers {
            return Err(Error::invalid(format!(
                "prefix length {cpp_len} must be below N = {}",
                self.n_subcarriers
            )));
        }
        self.cpp_len = cpp_len;
        Ok(self)
    }

    pub fn with_oversample(mut self, oversample: usize) -> Result<Self> {
        if oversample == 0 {
            return Err(Error::invalid("oversampling factor must be at least 1"));
        }
        self.oversample = oversample;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupPattern {
    /// Contiguous runs of `N / V` subcarriers.
    Adjacent,
    /// Subcarrier `m` belongs to group `m mod V`.
    Comb,
}

impl GroupPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupPattern::Adjacent => "adjacent",
            GroupPattern::Comb => "comb",
        }
    }
}

impl std::str::FromStr for GroupPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacent" => Ok(GroupPattern::Adjacent),
            "comb" => Ok(GroupPattern::Comb),
            other => Err(Error::invalid(format!("unknown grouping pattern '{other}'"))),
        }
    }
}

/// Shape of a grouped pre-chirp search: block size, group count `V`,
/// candidates per set `W`, decimal precision `k`, and grouping pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLayout {
    n_subcarriers: usize,
    groups: usize,
    omega: OmegaSet,
    pattern: GroupPattern,
    group_of: Vec<usize>,
}

impl GroupLayout {
    pub fn new(
        n_subcarriers: usize,
        groups: usize,
        candidates: u32,
        precision: u32,
        pattern: GroupPattern,
    ) -> Result<Self> {
        let group_of = make_groups(n_subcarriers, groups, pattern)?;
        let omega = OmegaSet::new(candidates, precision)?;
        Ok(Self {
            n_subcarriers,
            groups,
            omega,
            pattern,
            group_of,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn candidates(&self) -> u32 {
        self.omega.candidates()
    }

    pub fn precision(&self) -> u32 {
        self.omega.precision()
    }

    pub fn pattern(&self) -> GroupPattern {
        self.pattern
    }

    pub fn omega(&self) -> &OmegaSet {
        &self.omega
    }

    /// Zero-based group index of every subcarrier.
    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    /// The all-`w = 1` starting point of the search.
    pub fn initial_selection(&self) -> Vec<u32> {
        vec![1; self.groups]
    }

    pub fn profile(&self, selection: &[u32]) -> Result<PreChirpProfile> {
        if selection.len() != self.groups {
            return Err(Error::LengthMismatch {
                expected: self.groups,
                actual: selection.len(),
            });
        }
        let w_max = self.candidates();
        if let Some(bad) = selection.iter().find(|&&w| w == 0 || w > w_max) {
            return Err(Error::invalid(format!(
                "selection index {bad} outside 1..={w_max}"
            )));
        }
        // subcarrier 0 has no chirp phase for any c2; it is pinned to 0
        let mut c2 = vec![0.0; self.n_subcarriers];
        for (m, c) in c2.iter_mut().enumerate().skip(1) {
            *c = self.omega.value(m, selection[self.group_of[m]])?;
        }
        Ok(PreChirpProfile {
            c2,
            grouping: Some(Grouping {
                layout: self.clone(),
                selection: selection.to_vec(),
            }),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Grouping {
    layout: GroupLayout,
    selection: Vec<u32>,
}

/// Per-subcarrier pre-chirp values, plus the group selection that produced
/// them when the profile came out of a grouped search.
#[derive(Debug, Clone, PartialEq)]
pub struct PreChirpProfile {
    c2: Vec<f64>,
    grouping: Option<Grouping>,
}

impl PreChirpProfile {
    /// Conventional AFDM: the same `c2` on every subcarrier.
    pub fn uniform(n: usize, c2: f64) -> Result<Self> {
        Self::from_values(vec![c2; n])
    }

    /// Arbitrary per-subcarrier values without group bookkeeping.
    pub fn from_values(c2: Vec<f64>) -> Result<Self> {
        if c2.is_empty() {
            return Err(Error::EmptyInput);
        }
        if c2.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("pre-chirp values must be finite"));
        }
        Ok(Self { c2, grouping: None })
    }

    pub fn len(&self) -> usize {
        self.c2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c2.is_empty()
    }

    pub fn c2_values(&self) -> &[f64] {
        &self.c2
    }

    pub fn layout(&self) -> Option<&GroupLayout> {
        self.grouping.as_ref().map(|g| &g.layout)
    }

    /// One-based candidate index per group.
    pub fn selection(&self) -> Option<&[u32]> {
        self.grouping.as_ref().map(|g| g.selection.as_slice())
    }

    /// Diagonal of the pre-chirp matrix, `exp(-j 2 pi c2_m m^2)`.
    pub fn pre_chirp(&self) -> Vec<Complex64> {
        chirp_diagonal(&self.c2)
    }

    pub fn descriptor(&self) -> Option<ProfileDescriptor> {
        self.grouping.as_ref().map(|g| ProfileDescriptor {
            n: g.layout.n_subcarriers,
            v: g.layout.groups,
            pattern: g.layout.pattern,
            w: g.layout.candidates(),
            k: g.layout.precision(),
            selection: g.selection.clone(),
        })
    }

    pub fn from_descriptor(d: &ProfileDescriptor) -> Result<Self> {
        GroupLayout::new(d.n, d.v, d.w, d.k, d.pattern)?.profile(&d.selection)
    }
}

/// JSON side-information record from which a receiver rebuilds the
/// pre-chirp values bit-exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDescriptor {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "V")]
    pub v: usize,
    pub pattern: GroupPattern,
    #[serde(rename = "W")]
    pub w: u32,
    pub k: u32,
    pub selection: Vec<u32>,
}

/// `exp(-j 2 pi c_n n^2)` for each index.
pub fn chirp_diagonal(c: &[f64]) -> Vec<Complex64> {
    c.iter()
        .enumerate()
        .map(|(n, &ci)| {
            let n2 = (n * n) as f64;
            cis_turns(-ci * n2)
        })
        .collect()
}

/// Uniform-parameter chirp diagonal of length `n`.
pub fn uniform_chirp(c: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|i| cis_turns(-c * (i * i) as f64)).collect()
}

/// Dense DAFT matrix `A = diag(pre) * F * diag(post)`.
pub fn build_daft_matrix(c1: f64, c2: &[f64]) -> Result<DMatrix<Complex64>> {
    let n = c2.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let pre = chirp_diagonal(c2);
    let post = uniform_chirp(c1, n);
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DMatrix::from_fn(n, n, |p, q| {
        let kernel = cis_turns(-(((p * q) % n) as f64) / n as f64);
        pre[p] * kernel * post[q] * scale
    }))
}

/// Time-domain samples of one block; `prefix_len` leading samples are a
/// chirp-periodic prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBlock {
    pub samples: Vec<Complex64>,
    pub prefix_len: usize,
}

impl TimeBlock {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            prefix_len: 0,
        }
    }

    pub fn has_cpp(&self) -> bool {
        self.prefix_len > 0
    }

    /// Samples after the prefix.
    pub fn body(&self) -> &[Complex64] {
        &self.samples[self.prefix_len..]
    }
}

/// Inverse DAFT, `s = L1^H F^H L2^H x`, evaluated with one inverse FFT.
pub fn afdm_modulate(x: &[Complex64], c1: f64, profile: &PreChirpProfile) -> Result<TimeBlock> {
    check_finite(x)?;
    let n = x.len();
    if profile.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: profile.len(),
        });
    }
    let mut buf: Vec<Complex64> = x
        .iter()
        .zip(profile.pre_chirp())
        .map(|(xi, p)| xi * p.conj())
        .collect();
    inverse_plan(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for (i, v) in buf.iter_mut().enumerate() {
        *v *= cis_turns(c1 * (i * i) as f64) * scale;
    }
    Ok(TimeBlock::new(buf))
}

/// Forward DAFT `y = L2 F L1 r` on a prefix-free block.
pub fn afdm_demodulate(r: &TimeBlock, c1: f64, profile: &PreChirpProfile) -> Result<Vec<Complex64>> {
    if r.has_cpp() {
        return Err(Error::invalid("remove the chirp-periodic prefix before demodulating"));
    }
    check_finite(&r.samples)?;
    let n = r.samples.len();
    if profile.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: profile.len(),
        });
    }
    let mut buf: Vec<Complex64> = r
        .samples
        .iter()
        .enumerate()
        .map(|(i, v)| v * cis_turns(-c1 * (i * i) as f64))
        .collect();
    forward_plan(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    Ok(buf
        .into_iter()
        .zip(profile.pre_chirp())
        .map(|(v, p)| v * p * scale)
        .collect())
}

/// Phase applied to the prefix copy of sample `N - q`.
pub fn cpp_phase(c1: f64, n: usize, q: usize) -> Complex64 {
    let n = n as f64;
    cis_turns(-c1 * (n * n - 2.0 * n * q as f64))
}

/// Prepend `cpp_len` samples: position `-q` holds `s[N-q] * exp(-j 2 pi c1 (N^2 - 2Nq))`.
pub fn add_cpp(s: &TimeBlock, cpp_len: usize, c1: f64) -> Result<TimeBlock> {
    if s.has_cpp() {
        return Err(Error::invalid("block already carries a prefix"));
    }
    let n = s.samples.len();
    if cpp_len >= n {
        return Err(Error::invalid(format!(
            "prefix length {cpp_len} must be below N = {n}"
        )));
    }
    let mut out = Vec::with_capacity(n + cpp_len);
    for q in (1..=cpp_len).rev() {
        out.push(s.samples[n - q] * cpp_phase(c1, n, q));
    }
    out.extend_from_slice(&s.samples);
    Ok(TimeBlock {
        samples: out,
        prefix_len: cpp_len,
    })
}

pub fn remove_cpp(r: &TimeBlock) -> TimeBlock {
    TimeBlock::new(r.body().to_vec())
}
