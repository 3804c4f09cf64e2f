//! Bit error rate over random doubly dispersive channels.
//!
//! Block `b` draws its data bits, channel and unit noise from streams
//! indexed by `b` alone, so every SNR point and every scheme sees the same
//! blocks and the same noise shape scaled by `sqrt(N0)`.
//!
//! In embedded mode the GPS side bits ride BPSK-modulated on the first
//! DAFT symbols of a header block sent with the conventional pre-chirp
//! through the same channel. Header and data share the energy of one plain
//! block, so both are sent with amplitude `sqrt(N / (N + n_side))`.

use num_complex::Complex64;
use rand::Rng;

use super::config::{Cell, ExperimentConfig, SideInfoMode};
use super::rng::{block_rng, derive_seed};
use super::run_indexed;
use crate::channel::{awgn, LtvChannel};
use crate::gps::{gps_select, side_bits_decode};
use crate::modem::{add_cpp, afdm_modulate, AfdmConfig, GroupLayout, PreChirpProfile, TimeBlock};
use crate::numerics::{qam16_map, undb};
use crate::receiver::{ber_count, bpsk_decide, bpsk_map, equalize_block, recover_bits, SideInfo};
use crate::stats::binomial_std_error;
use crate::Result;

const STREAM_BITS: u64 = 1;
const STREAM_CHANNEL: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_HEADER_NOISE: u64 = 4;
/// Blocks simulated between early-stopping checks.
const CHUNK: usize = 64;

/// One BER curve: a scheme cell plus how its receiver learns the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BerCell {
    pub cell: Cell,
    pub side_info: Option<SideInfoMode>,
}

impl BerCell {
    pub fn side_info_str(&self) -> &'static str {
        self.side_info.map_or("none", SideInfoMode::as_str)
    }

    pub fn label(&self) -> String {
        match self.side_info {
            Some(mode) => format!("{} {}", self.cell.label(), mode.as_str()),
            None => self.cell.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub cell: BerCell,
    pub n_errors: usize,
    pub n_bits: usize,
    pub n_blocks: usize,
    /// Sum over blocks of the squared per-block error count.
    pub sum_sq_block_errors: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.n_errors as f64 / self.n_bits as f64
    }

    /// Binomial standard error, treating every bit as independent.
    pub fn binomial_std_error(&self) -> f64 {
        binomial_std_error(self.n_errors, self.n_bits)
    }

    /// Standard error from the spread of per-block error counts. Errors
    /// cluster in badly conditioned channel draws, so this is the honest
    /// Monte Carlo error of the BER estimate.
    pub fn std_error(&self) -> f64 {
        let b = self.n_blocks as f64;
        if self.n_blocks < 2 {
            return f64::INFINITY;
        }
        let bits_per_block = self.n_bits as f64 / b;
        let mean = self.n_errors as f64 / b;
        let var = (self.sum_sq_block_errors as f64 - b * mean * mean) / (b - 1.0);
        (var.max(0.0) / b).sqrt() / bits_per_block
    }
}

#[derive(Debug, Clone)]
pub struct BerRun {
    pub config: ExperimentConfig,
    pub cells: Vec<BerCell>,
    /// Points ordered by SNR, then by cell.
    pub points: Vec<BerPoint>,
}

impl BerRun {
    pub fn curve(&self, cell: &BerCell) -> Vec<&BerPoint> {
        self.points.iter().filter(|p| &p.cell == cell).collect()
    }
}

pub fn ber_cells(cfg: &ExperimentConfig) -> Vec<BerCell> {
    let mut out = Vec::new();
    for cell in cfg.cells() {
        if cell.scheme.is_grouped() {
            for &mode in &cfg.side_info_mode {
                out.push(BerCell {
                    cell,
                    side_info: Some(mode),
                });
            }
        } else {
            out.push(BerCell {
                cell,
                side_info: None,
            });
        }
    }
    out
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    cells: Vec<BerCell>,
    afdm: AfdmConfig,
    conventional: PreChirpProfile,
}

/// What the transmitter sends and what the receiver is told.
enum Frame<'p> {
    Conventional,
    Genie(&'p PreChirpProfile),
    Embedded {
        profile: &'p PreChirpProfile,
        side_bits: &'p [bool],
        layout: GroupLayout,
    },
}

impl Ctx<'_> {
    /// `(errors, bits)` per cell for block `b` at SNR index `s`.
    fn block(&self, s: usize, b: usize) -> Result<Vec<(usize, usize)>> {
        let cfg = self.cfg;
        let n = cfg.n_subcarriers;
        let n0 = 1.0 / undb(cfg.snr_db[s]);
        let block = b as u64;
        let mut bit_rng = block_rng(cfg.seed, STREAM_BITS, block);
        let bits: Vec<bool> = (0..4 * n).map(|_| bit_rng.gen()).collect();
        let x = qam16_map(&bits)?;
        let channel_seed = derive_seed(cfg.seed, STREAM_CHANNEL, cfg.channel.seed);
        let channel = cfg.channel.draw(n, &mut block_rng(channel_seed, 0, block))?;
        self.cells
            .iter()
            .map(|cell| {
                // every cell sees the same noise realization
                let mut noise = block_rng(cfg.seed, STREAM_NOISE, block);
                let rx = match cell.side_info {
                    None => self.send(block, &x, Frame::Conventional, &channel, n0, &mut noise)?,
                    Some(mode) => {
                        let params = cfg.gps_params(&cell.cell);
                        let chosen = gps_select(&x, &self.afdm, &params)?;
                        let frame = match mode {
                            SideInfoMode::Genie => Frame::Genie(&chosen.profile),
                            SideInfoMode::Embedded => Frame::Embedded {
                                profile: &chosen.profile,
                                side_bits: &chosen.side_bits,
                                layout: params.layout(n)?,
                            },
                        };
                        self.send(block, &x, frame, &channel, n0, &mut noise)?
                    }
                };
                ber_count(&bits, &rx)
            })
            .collect()
    }

    fn transmit(
        &self,
        x: &[Complex64],
        profile: &PreChirpProfile,
        channel: &LtvChannel,
        n0: f64,
        noise: &mut impl Rng,
    ) -> Result<TimeBlock> {
        let c1 = self.afdm.c1;
        let tx = add_cpp(&afdm_modulate(x, c1, profile)?, self.afdm.cpp_len, c1)?;
        let mut rx = channel.propagate(&tx)?;
        rx.samples = awgn(&rx.samples, n0, noise)?;
        Ok(rx)
    }

    fn send(
        &self,
        block: u64,
        x: &[Complex64],
        frame: Frame<'_>,
        channel: &LtvChannel,
        n0: f64,
        noise: &mut impl Rng,
    ) -> Result<Vec<bool>> {
        let (profile, side, channel) = match frame {
            Frame::Conventional => (
                &self.conventional,
                SideInfo::Genie(self.conventional.clone()),
                channel.clone(),
            ),
            Frame::Genie(profile) => (profile, SideInfo::Genie(profile.clone()), channel.clone()),
            Frame::Embedded {
                profile,
                side_bits,
                layout,
            } => {
                let n = self.cfg.n_subcarriers;
                let scaled = channel.scaled((n as f64 / (n + side_bits.len()) as f64).sqrt());
                let mut header = vec![Complex64::new(0.0, 0.0); n];
                header[..side_bits.len()].copy_from_slice(&bpsk_map(side_bits));
                let mut header_noise = block_rng(self.cfg.seed, STREAM_HEADER_NOISE, block);
                let rx = self.transmit(&header, &self.conventional, &scaled, n0, &mut header_noise)?;
                let known = SideInfo::Genie(self.conventional.clone());
                let out = equalize_block(&rx, &known, &scaled, &self.afdm, n0)?;
                let decided = bpsk_decide(&out.x_hat, side_bits.len());
                let side = match side_bits_decode(&decided, layout.groups(), layout.candidates()) {
                    Ok(selection) => SideInfo::Genie(layout.profile(&selection)?),
                    // a corrupted index outside 1..=W: fall back to the all-ones selection
                    Err(_) => SideInfo::Genie(layout.profile(&layout.initial_selection())?),
                };
                (profile, side, scaled)
            }
        };
        let rx = self.transmit(x, profile, &channel, n0, noise)?;
        recover_bits(&rx, &side, &channel, &self.afdm, n0)
    }
}

pub fn run_ber(cfg: &ExperimentConfig) -> Result<BerRun> {
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        cells: ber_cells(cfg),
        afdm: cfg.afdm()?.with_cpp(cfg.channel.l_max)?,
        conventional: cfg.conventional_profile()?,
    };
    let mut points = Vec::new();
    for (s, &snr_db) in cfg.snr_db.iter().enumerate() {
        let mut totals = vec![(0usize, 0usize, 0u64); ctx.cells.len()];
        let mut done = 0;
        while done < cfg.n_blocks {
            let count = CHUNK.min(cfg.n_blocks - done);
            let chunk = run_indexed(cfg.workers, count, |i| ctx.block(s, done + i))?;
            for row in chunk {
                for (t, (e, n)) in totals.iter_mut().zip(row) {
                    t.0 += e;
                    t.1 += n;
                    t.2 += (e * e) as u64;
                }
            }
            done += count;
            if cfg.min_errors > 0 && totals.iter().all(|t| t.0 >= cfg.min_errors) {
                break;
            }
        }
        for (cell, (n_errors, n_bits, sum_sq_block_errors)) in ctx.cells.iter().zip(totals) {
            points.push(BerPoint {
                snr_db,
                cell: *cell,
                n_errors,
                n_bits,
                n_blocks: done,
                sum_sq_block_errors,
            });
        }
    }
    Ok(BerRun {
        config: cfg.clone(),
        cells: ctx.cells,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::config::ExperimentKind;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Ber,
            n_subcarriers: 16,
            n_blocks: 20,
            groups: vec![2],
            snr_db: vec![5.0, 200.0],
            side_info_mode: vec![SideInfoMode::Genie, SideInfoMode::Embedded],
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_channel_has_no_errors() {
        let run = run_ber(&small()).unwrap();
        assert_eq!(run.cells.len(), 3);
        for p in run.points.iter().filter(|p| p.snr_db == 200.0) {
            assert_eq!(p.n_errors, 0, "{}", p.cell.label());
            assert_eq!(p.n_bits, 20 * 64);
        }
        assert!(run.points.iter().any(|p| p.snr_db == 5.0 && p.n_errors > 0));
    }

    #[test]
    fn early_stop_is_chunked() {
        let mut cfg = small();
        cfg.n_blocks = 1000;
        cfg.snr_db = vec![0.0];
        cfg.min_errors = 10;
        let run = run_ber(&cfg).unwrap();
        assert!(run.points.iter().all(|p| p.n_blocks == CHUNK));
    }

    #[test]
    fn workers_do_not_change_counts() {
        let mut cfg = small();
        cfg.workers = 1;
        let a = run_ber(&cfg).unwrap();
        cfg.workers = 2;
        let b = run_ber(&cfg).unwrap();
        assert_eq!(a.points, b.points);
    }
}
