//! Affine frequency division multiplexing (AFDM) simulation toolkit.
//!
//! The crate covers the full transmit/receive chain of chirp-based AFDM,
//! grouped pre-chirp selection (GPS) for peak-to-average power ratio (PAPR)
//! reduction, and a seeded Monte Carlo harness that produces CCDF and BER
//! curves.
//!
//! Module map:
//!
//! - [`numerics`]: unitary DFT wrappers and the Gray-mapped 16-QAM constellation.
//! - [`modem`]: configuration, pre-chirp profiles, DAFT/IDAFT, chirp-periodic prefix.
//! - [`channel`]: doubly dispersive multipath channel, effective DAFT-domain channel, AWGN.
//! - [`papr`]: oversampled PAPR, empirical CCDF, analytic peak-power model.
//! - [`gps`]: candidate sets, grouping, greedy selection, exhaustive baseline, side bits.
//! - [`receiver`]: MMSE equalization, side-information decoding, bit recovery.
//! - [`baselines`]: OFDM and OTFS modulators used for PAPR comparisons.
//! - [`harness`]: experiment configs, Monte Carlo drivers, CSV/JSON/SVG output.
//! - [`reference`]: slow direct-summation evaluations used to cross-check the fast paths.

pub mod baselines;
pub mod channel;
mod error;
pub mod gps;
pub mod harness;
pub mod modem;
pub mod numerics;
pub mod papr;
pub mod receiver;
pub mod reference;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
