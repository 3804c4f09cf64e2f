//! PAPR distribution experiment.
//!
//! Every cell sees the same data blocks: block `b` draws its 16-QAM symbols
//! from the data stream at index `b`, and each scheme is evaluated on it.

use num_complex::Complex64;

use super::config::{Cell, ExperimentConfig, Scheme};
use super::rng::block_rng;
use super::run_indexed;
use crate::baselines::{otfs_oversampled, OtfsGrid};
use crate::gps::{enumerate_optimal, gps_select, side_bit_count};
use crate::modem::{AfdmConfig, PreChirpProfile};
use crate::numerics::db;
use crate::papr::{ccdf_db, papr, papr_at_ccdf, papr_of, CcdfCurve, PaprEvaluator};
use crate::reference::random_qam_block;
use crate::Result;

pub(crate) const STREAM_DATA: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct CellSamples {
    pub cell: Cell,
    /// PAPR in dB at the reporting oversampling factor, indexed by block.
    pub papr_db: Vec<f64>,
    /// PAPR evaluations spent by the selection search, summed over blocks.
    pub evaluations: u64,
    pub side_bits: usize,
}

impl CellSamples {
    pub fn mean_evaluations(&self) -> f64 {
        self.evaluations as f64 / self.papr_db.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct CcdfRun {
    pub config: ExperimentConfig,
    pub cells: Vec<CellSamples>,
}

impl CcdfRun {
    pub fn cell(&self, wanted: &Cell) -> Option<&CellSamples> {
        self.cells.iter().find(|c| &c.cell == wanted)
    }

    pub fn curve(&self, index: usize) -> Result<CcdfCurve> {
        ccdf_db(&self.cells[index].papr_db, &self.config.thresholds())
    }

    pub fn threshold_at(&self, index: usize, probability: f64) -> Result<f64> {
        papr_at_ccdf(&self.cells[index].papr_db, probability)
    }
}

/// Per-block state shared by every cell.
struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    cells: Vec<Cell>,
    afdm: AfdmConfig,
    conventional: PreChirpProfile,
}

impl Ctx<'_> {
    fn block(&self, b: usize) -> Result<Vec<(f64, usize)>> {
        let cfg = self.cfg;
        let mut rng = block_rng(cfg.seed, STREAM_DATA, b as u64);
        let x = random_qam_block(&mut rng, cfg.n_subcarriers);
        self.cells
            .iter()
            .map(|cell| self.evaluate(cell, &x))
            .collect()
    }

    fn evaluate(&self, cell: &Cell, x: &[Complex64]) -> Result<(f64, usize)> {
        let (cfg, c1, l) = (self.cfg, self.afdm.c1, self.cfg.oversample);
        match cell.scheme {
            Scheme::Afdm => Ok((papr(x, c1, &self.conventional, l)?.db, 0)),
            Scheme::Ofdm => {
                let mut eval = PaprEvaluator::new(x.len(), l)?;
                Ok((db(eval.evaluate(|m| x[m])), 0))
            }
            Scheme::Otfs => {
                let doppler = cfg.otfs_doppler_bins;
                let grid = OtfsGrid::new(x.len() / doppler, doppler, x.to_vec())?;
                Ok((db(papr_of(&otfs_oversampled(&grid, l)?)), 0))
            }
            Scheme::Gps | Scheme::Enum => {
                let params = cfg.gps_params(cell);
                let result = if cell.scheme == Scheme::Gps {
                    gps_select(x, &self.afdm, &params)?
                } else {
                    enumerate_optimal(x, &self.afdm, &params, cfg.enum_budget)?
                };
                let value = if cfg.oversample_select == l {
                    result.papr_min.db
                } else {
                    papr(x, c1, &result.profile, l)?.db
                };
                Ok((value, result.n_evaluations))
            }
        }
    }
}

pub fn run_ccdf(cfg: &ExperimentConfig) -> Result<CcdfRun> {
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        cells: cfg.cells(),
        afdm: cfg.afdm()?,
        conventional: cfg.conventional_profile()?,
    };
    let per_block = run_indexed(cfg.workers, cfg.n_blocks, |b| ctx.block(b))?;
    let cells = ctx
        .cells
        .iter()
        .enumerate()
        .map(|(i, &cell)| CellSamples {
            cell,
            papr_db: per_block.iter().map(|row| row[i].0).collect(),
            evaluations: per_block.iter().map(|row| row[i].1 as u64).sum(),
            side_bits: if cell.scheme.is_grouped() {
                side_bit_count(cell.groups, cell.candidates)
            } else {
                0
            },
        })
        .collect();
    Ok(CcdfRun {
        config: cfg.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::GroupPattern;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_subcarriers: 16,
            n_blocks: 40,
            groups: vec![2],
            schemes: vec![Scheme::Afdm, Scheme::Ofdm, Scheme::Otfs, Scheme::Gps, Scheme::Enum],
            otfs_doppler_bins: 4,
            ..Default::default()
        }
    }

    #[test]
    fn cells_are_paired_and_ordered() {
        let run = run_ccdf(&small()).unwrap();
        assert_eq!(run.cells.len(), 5);
        let gps = &run.cells[3];
        let en = &run.cells[4];
        assert_eq!(gps.cell.pattern, Some(GroupPattern::Adjacent));
        for (g, e) in gps.papr_db.iter().zip(&en.papr_db) {
            assert!(e <= g);
        }
        assert_eq!(gps.evaluations, 40 * 3);
        assert_eq!(en.evaluations, 40 * 5);
        assert_eq!(gps.side_bits, 2);
        let curve = run.curve(0).unwrap();
        assert_eq!(curve.n_trials, 40);
    }

    #[test]
    fn worker_count_does_not_change_samples() {
        let mut cfg = small();
        cfg.workers = 1;
        let a = run_ccdf(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_ccdf(&cfg).unwrap();
        assert_eq!(a.cells, b.cells);
    }

    #[test]
    fn selection_oversampling_can_differ_from_reporting() {
        let mut cfg = small();
        cfg.schemes = vec![Scheme::Gps];
        cfg.oversample_select = 1;
        let run = run_ccdf(&cfg).unwrap();
        assert!(run.cells[0].papr_db.iter().all(|v| v.is_finite() && *v > 0.0));
    }
}
