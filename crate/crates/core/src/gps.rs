//! Grouped pre-chirp selection (GPS).
//!
//! Every subcarrier `m >= 1` draws its pre-chirp value from a small
//! candidate set `Omega_m`. Subcarriers are split into `V` groups and all
//! members of a group use the same candidate index. The greedy search walks
//! the groups once, trying each alternative candidate and keeping it only
//! when the block PAPR strictly drops. The receiver needs the chosen
//! indices, shipped as `ceil(log2(W^V))` side bits.
//!
//! Candidate values, with `r = pi 10^k / floor(pi 10^k)` (a number just above
//! one that keeps the values irrational-looking at finite precision):
//!
//! ```text
//! W = 2:  Omega_m(w) = (-1)^(w-1) r / (4 m^2)
//! W != 2: Omega_m(w) = (w - 1/2) r / (W m^2)
//! ```
//!
//! Either way the chirp phase `2 pi Omega_m(w) m^2` steps by `2 pi r / W`
//! between consecutive candidates, independent of `m`.

use num_bigint::BigUint;
use num_complex::Complex64;

use crate::modem::{AfdmConfig, GroupLayout, GroupPattern, PreChirpProfile};
use crate::numerics::{check_finite, cis_turns};
use crate::papr::{PaprEvaluator, PaprSample};
use crate::{Error, Result};

/// Default exhaustive-search budget (number of candidate tuples).
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 20;

/// Largest `k` for which `pi 10^k` still has an exact integer part in f64.
const MAX_PRECISION: u32 = 15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaSet {
    candidates: u32,
    precision: u32,
}

impl OmegaSet {
    pub fn new(candidates: u32, precision: u32) -> Result<Self> {
        if candidates == 0 {
            return Err(Error::invalid("candidate count W must be at least 1"));
        }
        if precision > MAX_PRECISION {
            return Err(Error::invalid(format!(
                "precision k must be at most {MAX_PRECISION}"
            )));
        }
        Ok(Self {
            candidates,
            precision,
        })
    }

    pub fn candidates(&self) -> u32 {
        self.candidates
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `pi 10^k / floor(pi 10^k)`.
    pub fn ratio(&self) -> f64 {
        let scaled = std::f64::consts::PI * 10f64.powi(self.precision as i32);
        scaled / scaled.floor()
    }

    /// Candidate `w` (one-based) for subcarrier `m >= 1`.
    pub fn value(&self, m: usize, w: u32) -> Result<f64> {
        if m == 0 {
            return Err(Error::invalid("subcarrier 0 has no candidate set"));
        }
        if w == 0 || w > self.candidates {
            return Err(Error::invalid(format!(
                "candidate index {w} outside 1..={}",
                self.candidates
            )));
        }
        let m2 = (m * m) as f64;
        let r = self.ratio();
        Ok(if self.candidates == 2 {
            let sign = if w == 1 { 1.0 } else { -1.0 };
            sign * r / (4.0 * m2)
        } else {
            (w as f64 - 0.5) * r / (self.candidates as f64 * m2)
        })
    }

    pub fn values(&self, m: usize) -> Result<Vec<f64>> {
        (1..=self.candidates).map(|w| self.value(m, w)).collect()
    }
}

pub fn omega_values(m: usize, candidates: u32, precision: u32) -> Result<Vec<f64>> {
    OmegaSet::new(candidates, precision)?.values(m)
}

/// Zero-based group index of every subcarrier.
pub fn make_groups(n: usize, groups: usize, pattern: GroupPattern) -> Result<Vec<usize>> {
    if n == 0 || groups == 0 || n % groups != 0 {
        return Err(Error::invalid(format!(
            "group count {groups} must be a positive divisor of N = {n}"
        )));
    }
    let size = n / groups;
    Ok((0..n)
        .map(|m| match pattern {
            GroupPattern::Adjacent => m / size,
            GroupPattern::Comb => m % groups,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpsParams {
    pub groups: usize,
    pub candidates: u32,
    pub precision: u32,
    pub pattern: GroupPattern,
    /// Oversampling used while ranking candidates.
    pub oversample_select: usize,
}

impl GpsParams {
    pub fn layout(&self, n: usize) -> Result<GroupLayout> {
        GroupLayout::new(n, self.groups, self.candidates, self.precision, self.pattern)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpsResult {
    pub papr_initial: PaprSample,
    pub papr_min: PaprSample,
    pub profile: PreChirpProfile,
    pub side_bits: Vec<bool>,
    pub n_evaluations: usize,
}

/// Precomputed per-subcarrier candidate phases for one data block.
struct Search<'a> {
    x: &'a [Complex64],
    layout: GroupLayout,
    // phases[m * W + (w - 1)] = conj(exp(-j 2 pi Omega_m(w) m^2))
    phases: Vec<Complex64>,
    eval: PaprEvaluator,
    evaluations: usize,
}

impl<'a> Search<'a> {
    fn new(x: &'a [Complex64], config: &AfdmConfig, params: &GpsParams) -> Result<Self> {
        check_finite(x)?;
        let n = config.n_subcarriers;
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: x.len(),
            });
        }
        let layout = params.layout(n)?;
        let w = layout.candidates() as usize;
        let mut phases = vec![Complex64::new(1.0, 0.0); n * w];
        for m in 1..n {
            for (j, c) in layout.omega().values(m)?.into_iter().enumerate() {
                phases[m * w + j] = cis_turns(-c * (m * m) as f64).conj();
            }
        }
        let eval = PaprEvaluator::new(n, params.oversample_select)?;
        Ok(Self {
            x,
            layout,
            phases,
            eval,
            evaluations: 0,
        })
    }

    fn papr(&mut self, selection: &[u32]) -> f64 {
        self.evaluations += 1;
        let w = self.layout.candidates() as usize;
        let (x, phases, groups) = (self.x, &self.phases, self.layout.group_of());
        self.eval
            .evaluate(|m| x[m] * phases[m * w + (selection[groups[m]] - 1) as usize])
    }

    fn finish(self, initial: f64, best: f64, selection: &[u32]) -> Result<GpsResult> {
        let l = self.eval.oversample();
        Ok(GpsResult {
            papr_initial: PaprSample::from_linear(initial, l),
            papr_min: PaprSample::from_linear(best, l),
            profile: self.layout.profile(selection)?,
            side_bits: side_bits_encode(selection, self.layout.candidates())?,
            n_evaluations: self.evaluations,
        })
    }
}

/// Greedy one-pass selection over groups in index order.
///
/// Starts from all groups at candidate 1. For each group, candidates
/// `2..=W` are tried in order against the running minimum; a candidate is
/// kept only when it is strictly better, otherwise the group keeps its
/// best-seen value. Exactly `1 + V (W - 1)` PAPR evaluations.
pub fn gps_select(x: &[Complex64], config: &AfdmConfig, params: &GpsParams) -> Result<GpsResult> {
    let mut search = Search::new(x, config, params)?;
    let mut selection = search.layout.initial_selection();
    let initial = search.papr(&selection);
    let mut best = initial;
    for g in 0..selection.len() {
        let mut keep = selection[g];
        for w in 2..=params.candidates {
            selection[g] = w;
            let p = search.papr(&selection);
            if p < best {
                best = p;
                keep = w;
            }
        }
        selection[g] = keep;
    }
    search.finish(initial, best, &selection)
}

/// Number of tuples an exhaustive grouped search visits, `W^V`, if it fits in u64.
pub fn enumeration_size(groups: usize, candidates: u32) -> Option<u64> {
    u32::try_from(groups)
        .ok()
        .and_then(|v| (candidates as u64).checked_pow(v))
}

/// Exhaustive search over all `W^V` group selections.
///
/// Ties resolve to the lexicographically smallest selection. The initial
/// all-ones block is scored once up front like in [`gps_select`], so the
/// evaluation count is `1 + W^V`.
pub fn enumerate_optimal(
    x: &[Complex64],
    config: &AfdmConfig,
    params: &GpsParams,
    budget: u64,
) -> Result<GpsResult> {
    match enumeration_size(params.groups, params.candidates) {
        Some(size) if size <= budget => {}
        _ => {
            let tuples = BigUint::from(params.candidates).pow(params.groups as u32);
            return Err(Error::BudgetExceeded {
                tuples: tuples.to_string(),
                budget,
            });
        }
    }
    let mut search = Search::new(x, config, params)?;
    let mut selection = search.layout.initial_selection();
    let initial = search.papr(&selection);
    let mut best = f64::INFINITY;
    let mut best_selection = selection.clone();
    loop {
        let p = search.papr(&selection);
        if p < best {
            best = p;
            best_selection.copy_from_slice(&selection);
        }
        // odometer increment, last group fastest
        let mut g = selection.len();
        loop {
            if g == 0 {
                return search.finish(initial, best, &best_selection);
            }
            g -= 1;
            if selection[g] < params.candidates {
                selection[g] += 1;
                break;
            }
            selection[g] = 1;
        }
    }
}

/// `ceil(log2(W^V))`.
pub fn side_bit_count(groups: usize, candidates: u32) -> usize {
    if candidates <= 1 || groups == 0 {
        return 0;
    }
    let total = BigUint::from(candidates).pow(groups as u32);
    (total - 1u32).bits() as usize
}

/// Mixed-radix encoding of the one-based selection, group 0 as the most
/// significant digit, written as a big-endian bit string.
pub fn side_bits_encode(selection: &[u32], candidates: u32) -> Result<Vec<bool>> {
    if let Some(bad) = selection.iter().find(|&&w| w == 0 || w > candidates) {
        return Err(Error::invalid(format!(
            "selection index {bad} outside 1..={candidates}"
        )));
    }
    let mut value = BigUint::from(0u32);
    for &w in selection {
        value = value * candidates + (w - 1);
    }
    let len = side_bit_count(selection.len(), candidates);
    Ok((0..len).rev().map(|i| value.bit(i as u64)).collect())
}

pub fn side_bits_decode(bits: &[bool], groups: usize, candidates: u32) -> Result<Vec<u32>> {
    if candidates == 0 {
        return Err(Error::invalid("candidate count W must be at least 1"));
    }
    let expected = side_bit_count(groups, candidates);
    if bits.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: bits.len(),
        });
    }
    let mut value = bits
        .iter()
        .fold(BigUint::from(0u32), |acc, &b| (acc << 1u32) + b as u32);
    if value >= BigUint::from(candidates).pow(groups as u32) {
        return Err(Error::invalid("side bits encode an out-of-range selection"));
    }
    let radix = BigUint::from(candidates);
    let mut selection = vec![1u32; groups];
    for slot in selection.iter_mut().rev() {
        let digit = &value % &radix;
        *slot += digit.iter_u32_digits().next().unwrap_or(0);
        value /= &radix;
    }
    Ok(selection)
}
