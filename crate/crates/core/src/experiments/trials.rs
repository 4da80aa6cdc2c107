//! Worst-case-error and concentration trials.

use serde::{Deserialize, Serialize};

use super::config::{DensityChoice, Oversample, TrialConfig};
use super::{fraction, par_trials, to_csv, trial_seed, Quantiles};
use crate::channels::{
    sample_fourier, sample_gaussian, sample_points_rho, sample_points_uniform, Channel, DensitySpec, DrawRng, Functional,
    InfoDraw,
};
use crate::error::{Error, Result};
use crate::model::ModelSpace;
use crate::spectrum::Spectrum;
use crate::wls::{self, WceReport};

/// Which theorem bound a run is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRule {
    /// `sqrt(tail_sum(n) / n)`.
    Benchmark,
    /// `5 (sigma_{n+1} + sqrt(tail_sum(n) / n))`.
    Gaussian,
}

impl BoundRule {
    pub fn value(&self, spectrum: &Spectrum, n: usize) -> Result<f64> {
        let b = spectrum.benchmark_bound(n)?;
        Ok(match self {
            BoundRule::Benchmark => b,
            BoundRule::Gaussian => 5.0 * (spectrum.sigma_or_zero(n + 1) + b),
        })
    }
}

/// Refuse spectra whose squares are not summable.
pub fn require_summable(spectrum: &Spectrum) -> Result<()> {
    if spectrum.is_square_summable() {
        Ok(())
    } else {
        Err(Error::DivergentTail)
    }
}

fn channel_code(c: Channel) -> u64 {
    match c {
        Channel::Point => 0,
        Channel::Gauss => 1,
        Channel::Fourier => 2,
    }
}

fn tag(experiment: u64, channel: Channel, n: usize) -> u64 {
    (experiment << 40) | (channel_code(channel) << 32) | n as u64
}

/// One draw for the configured channel and density.
pub fn draw_info(cfg: &TrialConfig, model: &ModelSpace, n: usize, big_n: usize, rng: &mut DrawRng) -> Result<InfoDraw> {
    if cfg.optimal {
        let mut d = InfoDraw::from_parts(
            (1..=n).map(Functional::FourierIndex).collect(),
            vec![1.0; n],
            DensitySpec::RhoN { n },
        )?;
        d.seed = rng.seed();
        return Ok(d);
    }
    match (cfg.channel, cfg.density) {
        (Channel::Fourier, DensityChoice::Rho) => sample_fourier(&model.spectrum, n, big_n, rng),
        (Channel::Point, DensityChoice::Rho) => sample_points_rho(model, n, big_n, rng),
        (Channel::Point, DensityChoice::Uniform) => Ok(sample_points_uniform(big_n, rng)),
        (Channel::Gauss, DensityChoice::Rho) => sample_gaussian(model, n, big_n, rng, true),
        (Channel::Gauss, DensityChoice::Plain) => {
            let mut d = sample_gaussian(model, n, big_n, rng, false)?;
            let w = 1.0 / big_n.max(1) as f64;
            d.weights.iter_mut().for_each(|x| *x = w);
            Ok(d)
        }
        (c, d) => Err(Error::Config(format!("density {d:?} is not available on the {} channel", c.name()))),
    }
}

/// Aggregates for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WceGroup {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub failures: usize,
    pub sigma_next: f64,
    pub benchmark: f64,
    pub theorem_bound: f64,
    /// `wce_exact <= theorem_bound`.
    pub pass_theorem: f64,
    /// `wce_exact <= sqrt(tail_sum(n) / n)`.
    pub pass_benchmark: f64,
    /// `wce_exact <= 3 sigma_{n+1}`.
    pub pass_three_sigma: f64,
    /// `wce_exact <= sigma_{n+1} + beta_hat / alpha_hat`.
    pub pass_local: f64,
    pub sandwich_violations: usize,
    pub wce: Quantiles,
    pub alpha_hat: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WceSummary {
    pub config: TrialConfig,
    pub bound: BoundRule,
    pub groups: Vec<WceGroup>,
    #[serde(skip)]
    pub rows: Vec<WceReport>,
}

impl WceSummary {
    /// Per-trial rows.
    pub fn csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    pub fn digest(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("summary serializes")
    }

    pub fn sandwich_violations(&self) -> usize {
        self.groups.iter().map(|g| g.sandwich_violations).sum()
    }
}

fn summarize(rows: &[WceReport], spectrum: &Spectrum, n: usize, theorem_bound: f64) -> Result<WceGroup> {
    let sigma_next = spectrum.sigma_or_zero(n + 1);
    let benchmark = spectrum.benchmark_bound(n)?;
    let ok = |r: &WceReport, b: f64| r.pass && r.wce_exact <= b;
    let wce: Vec<f64> = rows.iter().map(|r| r.wce_exact).collect();
    let alpha: Vec<f64> = rows.iter().map(|r| r.alpha_hat).collect();
    Ok(WceGroup {
        n,
        big_n: rows[0].big_n,
        m: rows[0].m,
        trials: rows.len(),
        failures: rows.iter().filter(|r| !r.pass).count(),
        sigma_next,
        benchmark,
        theorem_bound,
        pass_theorem: fraction(rows.iter().map(|r| ok(r, theorem_bound))),
        pass_benchmark: fraction(rows.iter().map(|r| ok(r, benchmark))),
        pass_three_sigma: fraction(rows.iter().map(|r| ok(r, 3.0 * sigma_next))),
        pass_local: fraction(rows.iter().map(|r| ok(r, r.wce_bound + 1e-9))),
        sandwich_violations: rows.iter().filter(|r| !r.sandwich_holds(spectrum)).count(),
        wce: Quantiles::of(&wce).expect("at least one trial"),
        alpha_hat: Quantiles::of(&alpha).expect("at least one trial"),
    })
}

fn run_rows(cfg: &TrialConfig, bound: BoundRule, experiment: u64) -> Result<WceSummary> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for &n in &cfg.n_grid {
        let (big_n, _) = cfg.sizes(n);
        let spectrum = cfg.spectrum_for(n)?;
        require_summable(&spectrum)?;
        let model = ModelSpace::new(spectrum.clone(), cfg.channel.basis());
        let theorem_bound = bound.value(&spectrum, n)?;
        let t = tag(experiment, cfg.channel, n);
        let group: Vec<WceReport> = par_trials(cfg.trials, |i| {
            let mut rng = DrawRng::new(trial_seed(cfg.seed, t, i));
            let draw = draw_info(cfg, &model, n, big_n, &mut rng)?;
            wls::wce_report(&draw, &model, n, theorem_bound)
        })?;
        groups.push(summarize(&group, &spectrum, n, theorem_bound)?);
        rows.extend(group);
    }
    Ok(WceSummary {
        config: cfg.clone(),
        bound,
        groups,
        rows,
    })
}

/// Draw, assemble and evaluate the exact worst-case error per trial, and
/// compare against the benchmark `sqrt(tail_sum(n) / n)`.
pub fn run_wce_trials(cfg: &TrialConfig) -> Result<WceSummary> {
    run_rows(cfg, BoundRule::Benchmark, 1)
}

/// Plain Gaussian information with `N = 2n` and weights `1 / N`, compared
/// against `5 (sigma_{n+1} + sqrt(tail_sum(n) / n))`.
pub fn run_gaussian_theorem(
    spectrum: &crate::spectrum::SpectrumKind,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    m: Option<usize>,
) -> Result<WceSummary> {
    let mut cfg = TrialConfig::new(Channel::Gauss, DensityChoice::Plain, spectrum.clone(), n_grid.to_vec());
    cfg.oversample = Oversample::Linear { b: 2.0 };
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.m = m;
    run_rows(&cfg, BoundRule::Gaussian, 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub channel: Channel,
    pub density: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub stat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationGroup {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    /// Fraction of trials with statistic at most one half.
    pub fraction_below_half: f64,
    pub stat: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub config: TrialConfig,
    pub groups: Vec<ConcentrationGroup>,
    #[serde(skip)]
    pub rows: Vec<ConcentrationRow>,
}

impl ConcentrationSummary {
    pub fn csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    pub fn digest(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("summary serializes")
    }
}

/// Distribution of the deviation of the empirical second-moment matrix from
/// its mean; see [`wls::concentration_stat`].
pub fn run_concentration(cfg: &TrialConfig) -> Result<ConcentrationSummary> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for &n in &cfg.n_grid {
        let (big_n, m) = cfg.sizes(n);
        let spectrum = cfg.spectrum_for(n)?;
        require_summable(&spectrum)?;
        let model = ModelSpace::new(spectrum, cfg.channel.basis());
        let t = tag(3, cfg.channel, n);
        let group: Vec<ConcentrationRow> = par_trials(cfg.trials, |i| {
            let seed = trial_seed(cfg.seed, t, i);
            let mut rng = DrawRng::new(seed);
            let draw = draw_info(cfg, &model, n, big_n, &mut rng)?;
            Ok(ConcentrationRow {
                channel: cfg.channel,
                density: draw.density.name().to_string(),
                n,
                big_n,
                m,
                trial: i,
                seed,
                stat: wls::concentration_stat(&draw, &model, n)?,
            })
        })?;
        let stats: Vec<f64> = group.iter().map(|r| r.stat).collect();
        groups.push(ConcentrationGroup {
            n,
            big_n,
            m,
            trials: group.len(),
            fraction_below_half: fraction(stats.iter().map(|s| *s <= 0.5)),
            stat: Quantiles::of(&stats).expect("at least one trial"),
        });
        rows.extend(group);
    }
    Ok(ConcentrationSummary {
        config: cfg.clone(),
        groups,
        rows,
    })
}
