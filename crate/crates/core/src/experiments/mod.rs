//! Seeded Monte Carlo harness.
//!
//! Every trial draws from its own stream `mix(mix(master, tag), trial)`, where
//! the tag separates experiments and grid points. Trials run on the rayon
//! pool and are collected in index order, so results do not depend on the
//! number of threads.

pub mod config;
pub mod coupon;
pub mod invariance;
pub mod rates;
pub mod suite;
pub mod trials;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng;

pub use config::{DensityChoice, Oversample, TrialConfig};
pub use coupon::{fourier_radius, run_coupon, CouponReport};
pub use rates::{fit_loglog, run_mls_rates, run_sobolev_rates, RateFit};
pub use suite::{run_suite, SuiteReport};
pub use trials::{run_concentration, run_gaussian_theorem, run_wce_trials, ConcentrationSummary, WceSummary};

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Default working dimension `M = max(8 N, 4 n, 512)`.
pub fn default_dim(n: usize, big_n: usize) -> usize {
    (8 * big_n).max(4 * n).max(512)
}

/// Seed of trial `t` in the sub-experiment `tag`.
pub fn trial_seed(master: u64, tag: u64, t: usize) -> u64 {
    rng::mix(rng::mix(master, tag), t as u64)
}

/// Run `f` over `0..trials` in parallel, keeping index order.
pub(crate) fn par_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Exact order statistics by the nearest-rank rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let rank = |p: f64| {
            let r = (p * v.len() as f64).ceil() as usize;
            v[r.clamp(1, v.len()) - 1]
        };
        Some(Quantiles {
            min: v[0],
            q05: rank(0.05),
            median: rank(0.5),
            q95: rank(0.95),
            max: v[v.len() - 1],
        })
    }
}

/// Fraction of `flags` that are set.
pub fn fraction(flags: impl IntoIterator<Item = bool>) -> f64 {
    let (hit, total) = flags.into_iter().fold((0usize, 0usize), |(h, t), f| (h + f as usize, t + 1));
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

/// Serialize rows as CSV with a header.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wr.serialize(r)?;
    }
    let bytes = wr.into_inner().map_err(|e| crate::error::Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
