//! Coverage of the leading Fourier indices by iid draws from `rho_n`.
//!
//! With coordinate information the best reconstruction fills unobserved
//! coordinates with zero, so the radius of information is `sigma_k` at the
//! smallest unobserved index `k`.

use serde::{Deserialize, Serialize};

use super::{fraction, par_trials, to_csv, trial_seed, Quantiles};
use crate::channels::{sample_fourier, DrawRng, Functional};
use crate::error::Result;
use crate::spectrum::{Spectrum, SpectrumKind};

/// Smallest index in `1..=M` missing from `observed`, or `M + 1`.
pub fn min_missing(observed: &[usize], m: usize) -> usize {
    let mut seen = vec![false; m + 2];
    for &k in observed {
        if (1..=m).contains(&k) {
            seen[k] = true;
        }
    }
    (1..=m + 1).find(|k| !seen[*k]).unwrap_or(m + 1)
}

/// `sigma` at the smallest unobserved index; `sigma_{M+1}` (zero for finite
/// spectra) when every index up to `M` was seen.
pub fn fourier_radius(observed: &[usize], spectrum: &Spectrum) -> f64 {
    spectrum.sigma_or_zero(min_missing(observed, spectrum.dim()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouponRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    /// `M + 1` when all indices up to `M` were observed.
    pub min_missing: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouponReport {
    pub spectrum: SpectrumKind,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// Estimate of `P[radius <= sigma_{n+1}]`: all of `1..n` observed.
    pub coverage_probability: f64,
    /// Estimate of `P[radius >= sigma_n]`.
    pub lower_probability: f64,
    pub radius: Quantiles,
    #[serde(skip)]
    pub rows: Vec<CouponRow>,
}

impl CouponReport {
    pub fn csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    pub fn digest(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

pub fn run_coupon(spectrum: &SpectrumKind, n: usize, big_n: usize, trials: usize, seed: u64, m: Option<usize>) -> Result<CouponReport> {
    let dim = match spectrum {
        SpectrumKind::Explicit(v) => v.len(),
        _ => m.unwrap_or_else(|| super::default_dim(n, big_n)),
    };
    let spec = Spectrum::new(spectrum.clone(), dim)?;
    super::trials::require_summable(&spec)?;
    let tag = (4u64 << 40) | ((big_n as u64) << 20) | n as u64;
    let rows = par_trials(trials.max(1), |i| {
        let s = trial_seed(seed, tag, i);
        let draw = sample_fourier(&spec, n, big_n, &mut DrawRng::new(s))?;
        let idx: Vec<usize> = draw
            .functionals
            .iter()
            .map(|l| match l {
                Functional::FourierIndex(k) => *k,
                _ => unreachable!("fourier draw"),
            })
            .collect();
        let k = min_missing(&idx, dim);
        Ok(CouponRow {
            n,
            big_n,
            m: dim,
            trial: i,
            seed: s,
            min_missing: k,
            radius: spec.sigma_or_zero(k),
        })
    })?;
    let sigma_n = spec.sigma_or_zero(n);
    let sigma_next = spec.sigma_or_zero(n + 1);
    let radii: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    Ok(CouponReport {
        spectrum: spectrum.clone(),
        n,
        big_n,
        m: dim,
        trials: rows.len(),
        seed,
        coverage_probability: fraction(radii.iter().map(|r| *r <= sigma_next)),
        lower_probability: fraction(radii.iter().map(|r| *r >= sigma_n)),
        radius: Quantiles::of(&radii).expect("at least one trial"),
        rows,
    })
}
