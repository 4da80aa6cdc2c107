use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::spectrum::{Spectrum, SpectrumKind};

/// Rule for the number of functionals `N` given `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Oversample {
    /// `N = ceil(c n ln n)`.
    Ceil { c: f64 },
    /// `N = floor(c n ln n)`.
    Floor { c: f64 },
    /// `N = ceil(b n)`.
    Linear { b: f64 },
    Explicit { count: usize },
}

impl Oversample {
    pub fn count(&self, n: usize) -> usize {
        let nf = n as f64;
        match *self {
            Oversample::Ceil { c } => (c * nf * nf.ln()).ceil().max(0.0) as usize,
            Oversample::Floor { c } => (c * nf * nf.ln()).floor().max(0.0) as usize,
            Oversample::Linear { b } => (b * nf).ceil().max(0.0) as usize,
            Oversample::Explicit { count } => count,
        }
    }
}

impl Default for Oversample {
    fn default() -> Self {
        Oversample::Ceil { c: 5.0 }
    }
}

/// Sampling density of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityChoice {
    /// The optimal density `rho_n` with weights `1 / rho_n`.
    Rho,
    /// Uniform points with unit weights.
    Uniform,
    /// Standard Gaussian functionals.
    Plain,
}

impl std::str::FromStr for DensityChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(DensityChoice::Rho),
            "uniform" => Ok(DensityChoice::Uniform),
            "plain" => Ok(DensityChoice::Plain),
            other => Err(Error::Config(format!("unknown density `{other}`"))),
        }
    }
}

impl DensityChoice {
    /// Whether this density is available on `channel`.
    pub fn fits(&self, channel: Channel) -> bool {
        matches!(
            (channel, self),
            (_, DensityChoice::Rho) | (Channel::Point, DensityChoice::Uniform) | (Channel::Gauss, DensityChoice::Plain)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub channel: Channel,
    pub density: DensityChoice,
    pub spectrum: SpectrumKind,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub oversample: Oversample,
    pub trials: usize,
    pub seed: u64,
    /// Working dimension; `max(8 N, 4 n, 512)` when absent.
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Replace the random draw by the Fourier indices `1..n` with unit weights.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub optimal: bool,
}

impl TrialConfig {
    pub fn new(channel: Channel, density: DensityChoice, spectrum: SpectrumKind, n_grid: Vec<usize>) -> Self {
        TrialConfig {
            channel,
            density,
            spectrum,
            n_grid,
            oversample: Oversample::default(),
            trials: 100,
            seed: super::DEFAULT_SEED,
            m: None,
            optimal: false,
        }
    }

    /// `(N, M)` for a grid value `n`.
    pub fn sizes(&self, n: usize) -> (usize, usize) {
        let big_n = if self.optimal { n } else { self.oversample.count(n) };
        let m = match (&self.spectrum, self.m) {
            (SpectrumKind::Explicit(v), _) => v.len(),
            (_, Some(m)) => m,
            _ => super::default_dim(n, big_n),
        };
        (big_n, m)
    }

    pub fn spectrum_for(&self, n: usize) -> Result<Spectrum> {
        Spectrum::new(self.spectrum.clone(), self.sizes(n).1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("empty n grid".into()));
        }
        if !self.density.fits(self.channel) {
            return Err(Error::Config(format!(
                "density {:?} is not available on the {} channel",
                self.density,
                self.channel.name()
            )));
        }
        if self.optimal && self.channel != Channel::Fourier {
            return Err(Error::Config("optimal information exists only on the fourier channel".into()));
        }
        for &n in &self.n_grid {
            let (_, m) = self.sizes(n);
            if n == 0 || n >= m {
                return Err(Error::Config(format!("need 1 <= n < M (n = {n}, M = {m})")));
            }
        }
        Ok(())
    }
}
