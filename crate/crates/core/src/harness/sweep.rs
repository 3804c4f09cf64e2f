//! PAPR thresholds at fixed CCDF levels for every cell of a grid.

use super::ccdf::{run_ccdf, CcdfRun};
use super::config::ExperimentConfig;
use super::spectral_efficiency;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub cell_index: usize,
    pub ccdf_level: f64,
    pub papr_db: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub ccdf: CcdfRun,
    pub entries: Vec<SweepEntry>,
}

impl SweepRun {
    pub fn spectral_efficiency(&self, cell_index: usize) -> Result<f64> {
        let cell = &self.ccdf.cells[cell_index].cell;
        spectral_efficiency(self.ccdf.config.n_subcarriers, 4, cell.groups, cell.candidates)
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepRun> {
    let ccdf = run_ccdf(cfg)?;
    let mut entries = Vec::new();
    for cell_index in 0..ccdf.cells.len() {
        for &level in &cfg.ccdf_levels {
            entries.push(SweepEntry {
                cell_index,
                ccdf_level: level,
                papr_db: ccdf.threshold_at(cell_index, level)?,
            });
        }
    }
    Ok(SweepRun { ccdf, entries })
}
