//! Seeded Monte Carlo experiment drivers and their file outputs.
//!
//! Each trial draws from its own RNG stream (see [`rng`]) and results are
//! gathered in trial order, so outputs do not depend on the worker count.

pub mod ber;
pub mod ccdf;
pub mod config;
pub mod output;
pub mod plot;
pub mod rng;
pub mod selftest;
pub mod sweep;

use rayon::prelude::*;

use crate::gps::side_bit_count;
use crate::{Error, Result};

pub use ber::{run_ber, BerPoint, BerRun};
pub use ccdf::{run_ccdf, CcdfRun, CellSamples};
pub use config::{Cell, ExperimentConfig, ExperimentKind, Scheme, SideInfoMode};
pub use sweep::{run_sweep, SweepRun};

/// Data rate of a GPS frame relative to plain AFDM: `N b / (N b + ceil(log2 W^V))`.
pub fn spectral_efficiency(n: usize, bits_per_symbol: usize, groups: usize, candidates: u32) -> Result<f64> {
    if n == 0 || bits_per_symbol == 0 || groups == 0 || candidates == 0 {
        return Err(Error::invalid("spectral efficiency arguments must be positive"));
    }
    let data = (n * bits_per_symbol) as f64;
    Ok(data / (data + side_bit_count(groups, candidates) as f64))
}

/// Evaluate `f(0..count)` on `workers` threads (0 = rayon default) and
/// return the results in index order.
pub(crate) fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let job = || (0..count).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    if workers == 0 {
        return job();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
        .install(job)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_efficiency_values() {
        assert_eq!(spectral_efficiency(64, 4, 4, 2).unwrap(), 256.0 / 260.0);
        assert_eq!(spectral_efficiency(64, 4, 4, 1).unwrap(), 1.0);
        assert_eq!(spectral_efficiency(64, 4, 8, 3).unwrap(), 256.0 / 269.0);
        assert!(spectral_efficiency(0, 4, 4, 2).is_err());
    }

    #[test]
    fn indexed_results_keep_order() {
        let serial = run_indexed(1, 100, |i| Ok(i * i)).unwrap();
        let parallel = run_indexed(0, 100, |i| Ok(i * i)).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial[7], 49);
        let err = run_indexed(2, 10, |i| if i == 3 { Err(Error::Singular) } else { Ok(i) });
        assert!(matches!(err, Err(Error::Singular)));
    }
}
