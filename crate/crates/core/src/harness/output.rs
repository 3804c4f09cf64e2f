//! Result rows and their CSV / JSON encodings.
//!
//! Floats are written in shortest round-trip form, so identical runs give
//! identical bytes.

use serde::{Deserialize, Serialize};

use super::ber::BerRun;
use super::ccdf::CcdfRun;
use super::sweep::SweepRun;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("format: expected csv or json, got {other:?}"))),
        }
    }
}

fn hash_hex(h: u64) -> String {
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfRow {
    pub threshold_db: f64,
    pub ccdf: f64,
    pub n_trials: usize,
    pub scheme: String,
    #[serde(rename = "V")]
    pub groups: usize,
    #[serde(rename = "W")]
    pub candidates: u32,
    pub pattern: String,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub snr_db: f64,
    pub ber: f64,
    pub n_bits: usize,
    pub scheme: String,
    pub side_info_mode: String,
    #[serde(rename = "V")]
    pub groups: usize,
    #[serde(rename = "W")]
    pub candidates: u32,
    pub seed: u64,
    pub pattern: String,
    pub n_errors: usize,
    pub n_blocks: usize,
    /// Block-level Monte Carlo standard error of `ber`.
    pub std_error: f64,
    #[serde(rename = "P")]
    pub paths: usize,
    pub l_max: usize,
    pub alpha_max: u32,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ccdf_level: f64,
    pub papr_db: f64,
    pub n_trials: usize,
    pub scheme: String,
    #[serde(rename = "V")]
    pub groups: usize,
    #[serde(rename = "W")]
    pub candidates: u32,
    pub pattern: String,
    pub mean_evaluations: f64,
    pub side_bits: usize,
    pub spectral_efficiency: f64,
    pub seed: u64,
    pub config_hash: String,
}

pub fn ccdf_rows(run: &CcdfRun) -> Result<Vec<CcdfRow>> {
    let cfg = &run.config;
    let hash = hash_hex(cfg.config_hash());
    let mut rows = Vec::new();
    for (i, samples) in run.cells.iter().enumerate() {
        let curve = run.curve(i)?;
        for (&threshold_db, &ccdf) in curve.thresholds_db.iter().zip(&curve.probabilities) {
            rows.push(CcdfRow {
                threshold_db,
                ccdf,
                n_trials: curve.n_trials,
                scheme: samples.cell.scheme.as_str().into(),
                groups: samples.cell.groups,
                candidates: samples.cell.candidates,
                pattern: samples.cell.pattern_str().into(),
                seed: cfg.seed,
                config_hash: hash.clone(),
            });
        }
    }
    Ok(rows)
}

pub fn ber_rows(run: &BerRun) -> Vec<BerRow> {
    let cfg = &run.config;
    let hash = hash_hex(cfg.config_hash());
    run.points
        .iter()
        .map(|p| BerRow {
            snr_db: p.snr_db,
            ber: p.ber(),
            n_bits: p.n_bits,
            scheme: p.cell.cell.scheme.as_str().into(),
            side_info_mode: p.cell.side_info_str().into(),
            groups: p.cell.cell.groups,
            candidates: p.cell.cell.candidates,
            seed: cfg.seed,
            pattern: p.cell.cell.pattern_str().into(),
            n_errors: p.n_errors,
            n_blocks: p.n_blocks,
            std_error: p.std_error(),
            paths: cfg.channel.paths,
            l_max: cfg.channel.l_max,
            alpha_max: cfg.channel.alpha_max,
            config_hash: hash.clone(),
        })
        .collect()
}

pub fn sweep_rows(run: &SweepRun) -> Result<Vec<SweepRow>> {
    let cfg = &run.ccdf.config;
    let hash = hash_hex(cfg.config_hash());
    run.entries
        .iter()
        .map(|e| {
            let samples = &run.ccdf.cells[e.cell_index];
            Ok(SweepRow {
                ccdf_level: e.ccdf_level,
                papr_db: e.papr_db,
                n_trials: samples.papr_db.len(),
                scheme: samples.cell.scheme.as_str().into(),
                groups: samples.cell.groups,
                candidates: samples.cell.candidates,
                pattern: samples.cell.pattern_str().into(),
                mean_evaluations: samples.mean_evaluations(),
                side_bits: samples.side_bits,
                spectral_efficiency: run.spectral_efficiency(e.cell_index)?,
                seed: cfg.seed,
                config_hash: hash.clone(),
            })
        })
        .collect()
}

pub(crate) fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Csv {
        line,
        message: e.to_string(),
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| csv_error(&e))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    Ok(text)
}

pub fn encode<T: Serialize>(rows: &[T], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}
