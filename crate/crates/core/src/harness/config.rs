//! Experiment configuration, read from flat JSON.
//!
//! Every key is optional and falls back to the desk-scale default; unknown
//! keys are rejected so typos surface as errors instead of silent defaults.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelScenario;
use crate::gps::{enumeration_size, GpsParams, DEFAULT_ENUM_BUDGET};
use crate::modem::{default_uniform_c2, AfdmConfig, GroupPattern, PreChirpProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Ccdf,
    Ber,
    Sweep,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Conventional AFDM with a uniform pre-chirp.
    Afdm,
    Ofdm,
    Otfs,
    /// Greedy grouped pre-chirp selection.
    Gps,
    /// Exhaustive grouped search.
    Enum,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Afdm => "afdm",
            Scheme::Ofdm => "ofdm",
            Scheme::Otfs => "otfs",
            Scheme::Gps => "gps",
            Scheme::Enum => "enum",
        }
    }

    pub fn is_grouped(self) -> bool {
        matches!(self, Scheme::Gps | Scheme::Enum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideInfoMode {
    /// Receiver is handed the profile.
    Genie,
    /// Side bits travel BPSK-modulated in a header block.
    Embedded,
}

impl SideInfoMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SideInfoMode::Genie => "genie",
            SideInfoMode::Embedded => "embedded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(rename = "N")]
    pub n_subcarriers: usize,
    pub modulation_order: u32,
    pub alpha_max: u32,
    #[serde(rename = "V")]
    pub groups: Vec<usize>,
    #[serde(rename = "W")]
    pub candidates: Vec<u32>,
    #[serde(rename = "k")]
    pub precision: u32,
    #[serde(rename = "pattern")]
    pub patterns: Vec<GroupPattern>,
    pub schemes: Vec<Scheme>,
    pub n_blocks: usize,
    pub snr_db: Vec<f64>,
    pub seed: u64,
    #[serde(rename = "L")]
    pub oversample: usize,
    #[serde(rename = "L_select")]
    pub oversample_select: usize,
    pub side_info_mode: Vec<SideInfoMode>,
    pub output: Option<String>,
    pub enum_budget: u64,
    /// Uniform pre-chirp of the conventional scheme; defaults to `1 / (2 pi N)`.
    pub c2: Option<f64>,
    pub channel: ChannelScenario,
    /// Stop a BER point early once every scheme has this many errors (0 disables).
    pub min_errors: usize,
    /// CCDF thresholds as `[start, stop, step]` in dB.
    pub thresholds_db: [f64; 3],
    /// CCDF levels reported by the sweep experiment.
    pub ccdf_levels: Vec<f64>,
    /// Doppler bins of the OTFS frame; delay bins are `N / otfs_doppler_bins`.
    pub otfs_doppler_bins: usize,
    /// Worker threads, 0 for the rayon default. Does not affect results.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Ccdf,
            n_subcarriers: 64,
            modulation_order: 16,
            alpha_max: 1,
            groups: vec![4],
            candidates: vec![2],
            precision: 2,
            patterns: vec![GroupPattern::Adjacent],
            schemes: vec![Scheme::Afdm, Scheme::Gps],
            n_blocks: 10_000,
            snr_db: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            seed: 0x5EED,
            oversample: 4,
            oversample_select: 4,
            side_info_mode: vec![SideInfoMode::Genie],
            output: None,
            enum_budget: DEFAULT_ENUM_BUDGET,
            c2: None,
            channel: ChannelScenario::default(),
            min_errors: 0,
            thresholds_db: [4.0, 13.0, 0.1],
            ccdf_levels: vec![1e-2, 1e-3],
            otfs_doppler_bins: 8,
            workers: 0,
        }
    }
}

/// One scheme/parameter combination evaluated on every block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub scheme: Scheme,
    pub groups: usize,
    pub candidates: u32,
    pub pattern: Option<GroupPattern>,
}

impl Cell {
    pub fn plain(scheme: Scheme) -> Self {
        Self {
            scheme,
            groups: 1,
            candidates: 1,
            pattern: None,
        }
    }

    pub fn pattern_str(&self) -> &'static str {
        self.pattern.map_or("none", GroupPattern::as_str)
    }

    pub fn label(&self) -> String {
        if self.scheme.is_grouped() {
            format!(
                "{} V={} W={} {}",
                self.scheme.as_str(),
                self.groups,
                self.candidates,
                self.pattern_str()
            )
        } else {
            self.scheme.as_str().to_string()
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_subcarriers;
        let fail = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        if n < 2 {
            return fail("N", format!("need at least 2 subcarriers, got {n}"));
        }
        if self.modulation_order != 16 {
            return fail("modulation_order", "only 16-QAM is implemented".into());
        }
        if self.n_blocks == 0 {
            return fail("n_blocks", "must be at least 1".into());
        }
        if self.oversample == 0 {
            return fail("L", "must be at least 1".into());
        }
        if self.oversample_select == 0 {
            return fail("L_select", "must be at least 1".into());
        }
        if self.precision > 15 {
            return fail("k", "must be at most 15".into());
        }
        if self.schemes.is_empty() {
            return fail("schemes", "list is empty".into());
        }
        if let Some(&v) = self.groups.iter().find(|&&v| v == 0 || n % v != 0) {
            return fail("V", format!("{v} does not divide N = {n}"));
        }
        if self.candidates.contains(&0) {
            return fail("W", "entries must be at least 1".into());
        }
        if self.schemes.iter().any(|s| s.is_grouped())
            && (self.groups.is_empty() || self.candidates.is_empty() || self.patterns.is_empty())
        {
            return fail("V/W/pattern", "grouped schemes need non-empty lists".into());
        }
        if self.schemes.contains(&Scheme::Enum) {
            for &v in &self.groups {
                for &w in &self.candidates {
                    match enumeration_size(v, w) {
                        Some(size) if size <= self.enum_budget => {}
                        _ => {
                            return fail(
                                "enum_budget",
                                format!("W^V = {w}^{v} exceeds budget {}", self.enum_budget),
                            )
                        }
                    }
                }
            }
        }
        if self.schemes.contains(&Scheme::Otfs)
            && (self.otfs_doppler_bins == 0 || n % self.otfs_doppler_bins != 0)
        {
            return fail(
                "otfs_doppler_bins",
                format!("{} does not divide N = {n}", self.otfs_doppler_bins),
            );
        }
        let [start, stop, step] = self.thresholds_db;
        if !(step > 0.0) || !(stop >= start) {
            return fail("thresholds_db", "expected [start, stop, step] with step > 0".into());
        }
        if self.ccdf_levels.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return fail("ccdf_levels", "levels must lie in (0, 1)".into());
        }
        if let Some(c2) = self.c2 {
            if !c2.is_finite() {
                return fail("c2", "must be finite".into());
            }
        }
        if self.experiment == ExperimentKind::Ber {
            if self.snr_db.is_empty() {
                return fail("snr_db", "list is empty".into());
            }
            if let Some(s) = self
                .schemes
                .iter()
                .find(|s| !matches!(s, Scheme::Afdm | Scheme::Gps))
            {
                return fail(
                    "schemes",
                    format!("BER runs support afdm and gps, not {}", s.as_str()),
                );
            }
            if self.side_info_mode.is_empty() {
                return fail("side_info_mode", "list is empty".into());
            }
            self.channel.validate(n).map_err(|e| Error::Config(format!("channel: {e}")))?;
            if self.channel.alpha_max > self.alpha_max {
                return fail(
                    "channel.alpha_max",
                    format!("exceeds the modem's alpha_max {}", self.alpha_max),
                );
            }
        }
        Ok(())
    }

    pub fn afdm(&self) -> Result<AfdmConfig> {
        AfdmConfig::new(self.n_subcarriers, self.alpha_max)?.with_oversample(self.oversample)
    }

    pub fn conventional_profile(&self) -> Result<PreChirpProfile> {
        let c2 = self.c2.unwrap_or_else(|| default_uniform_c2(self.n_subcarriers));
        PreChirpProfile::uniform(self.n_subcarriers, c2)
    }

    pub fn gps_params(&self, cell: &Cell) -> GpsParams {
        GpsParams {
            groups: cell.groups,
            candidates: cell.candidates,
            precision: self.precision,
            pattern: cell.pattern.unwrap_or(GroupPattern::Adjacent),
            oversample_select: self.oversample_select,
        }
    }

    /// Cells in output order: schemes as listed, grouped schemes expanded
    /// over `V x W x pattern`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            if scheme.is_grouped() {
                for &groups in &self.groups {
                    for &candidates in &self.candidates {
                        for &pattern in &self.patterns {
                            out.push(Cell {
                                scheme,
                                groups,
                                candidates,
                                pattern: Some(pattern),
                            });
                        }
                    }
                }
            } else {
                out.push(Cell::plain(scheme));
            }
        }
        out
    }

    pub fn thresholds(&self) -> Vec<f64> {
        let [start, stop, step] = self.thresholds_db;
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((start + i as f64 * step) * 1e6).round() / 1e6)
            .collect()
    }

    /// FNV-1a over the canonical JSON of the result-determining fields.
    pub fn config_hash(&self) -> u64 {
        let mut canon = self.clone();
        canon.output = None;
        canon.workers = 0;
        let text = serde_json::to_string(&canon).expect("config serializes");
        text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        })
    }
}
