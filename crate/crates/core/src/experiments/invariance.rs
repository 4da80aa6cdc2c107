//! Weight-scaling and permutation invariance of the least-squares engine on
//! random configurations.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{par_trials, trial_seed};
use crate::channels::{sample_fourier, sample_gaussian, sample_points_rho, Channel, DrawRng, InfoDraw};
use crate::error::Result;
use crate::model::{CoefVector, ModelSpace};
use crate::spectrum::Spectrum;
use crate::wls::{assemble, solve, spectral_check, wce_exact};

/// Worst deviations over one configuration, each relative to the size of
/// the compared quantity (floored at one for the permutation checks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceRow {
    pub config: usize,
    pub seed: u64,
    pub channel: Channel,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub lambda: f64,
    pub pass: bool,
    /// `alpha`, `beta` against `sqrt(lambda)` scaling.
    pub scale_singular: f64,
    /// Reconstruction and `wce_exact` after scaling.
    pub scale_output: f64,
    /// `alpha`, `beta`, `wce_exact` after permuting the functionals.
    pub permutation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub configs: usize,
    pub max_scale_singular: f64,
    pub max_scale_output: f64,
    pub max_permutation: f64,
    #[serde(skip)]
    pub rows: Vec<InvarianceRow>,
}

impl InvarianceReport {
    /// Scaling to `1e-10`, permutation to `1e-12`.
    pub fn holds(&self) -> bool {
        self.max_scale_singular <= 1e-10 && self.max_scale_output <= 1e-10 && self.max_permutation <= 1e-12
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn rel_floor(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn one_config(index: usize, seed: u64) -> Result<InvarianceRow> {
    let mut rng = DrawRng::new(seed);
    let channel = [Channel::Fourier, Channel::Point, Channel::Gauss][index % 3];
    let n: usize = rng.random_range(2..=8);
    let big_n = 2 * n + rng.random_range(0..=3 * n);
    let m: usize = rng.random_range((n + 8)..=64);
    let spectrum = Spectrum::power_law(rng.random_range(0.75..2.0), m)?;
    let model = ModelSpace::new(spectrum.clone(), channel.basis());
    let draw = match channel {
        Channel::Fourier => sample_fourier(&spectrum, n, big_n, &mut rng)?,
        Channel::Point => sample_points_rho(&model, n, big_n, &mut rng)?,
        Channel::Gauss => sample_gaussian(&model, n, big_n, &mut rng, true)?,
    };
    let lambda: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
    let c = CoefVector((1..=m).map(|k| spectrum.sigma_or_zero(k) * rng.random_range(-1.0..1.0)).collect());

    let mut scaled = draw.clone();
    scaled.weights.iter_mut().for_each(|w| *w *= lambda);
    let mut order: Vec<usize> = (0..draw.len()).collect();
    order.shuffle(&mut rng);
    let permuted = InfoDraw {
        functionals: order.iter().map(|i| draw.functionals[*i].clone()).collect(),
        weights: order.iter().map(|i| draw.weights[*i]).collect(),
        ..draw.clone()
    };

    let base = assemble(&draw, &model, n)?;
    let chk = spectral_check(&base);
    let sc = assemble(&scaled, &model, n)?;
    let chk_s = spectral_check(&sc);
    let pm = assemble(&permuted, &model, n)?;
    let chk_p = spectral_check(&pm);

    let root = lambda.sqrt();
    let scale_singular = rel(chk_s.alpha_hat, root * chk.alpha_hat).max(rel(chk_s.beta_hat, root * chk.beta_hat));
    let mut scale_output = 0.0f64;
    let mut permutation = rel_floor(chk_p.alpha_hat, chk.alpha_hat).max(rel_floor(chk_p.beta_hat, chk.beta_hat));
    if chk.pass {
        let x0 = solve(&base, &draw.measure(&model, &c)?)?;
        let x1 = solve(&sc, &scaled.measure(&model, &c)?)?;
        let diff = x0.as_slice().iter().zip(x1.as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let w0 = wce_exact(&base, &spectrum).value;
        let w1 = wce_exact(&sc, &spectrum).value;
        let w2 = wce_exact(&pm, &spectrum).value;
        scale_output = (diff / x0.l2_norm().max(1.0)).max(rel(w0, w1));
        permutation = permutation.max(rel_floor(w0, w2));
    }
    Ok(InvarianceRow {
        config: index,
        seed,
        channel,
        n,
        big_n,
        m,
        lambda,
        pass: chk.pass,
        scale_singular,
        scale_output,
        permutation,
    })
}

pub fn check_invariances(seed: u64, configs: usize) -> Result<InvarianceReport> {
    let rows = par_trials(configs, |i| one_config(i, trial_seed(seed, 7u64 << 40, i)))?;
    let max = |f: fn(&InvarianceRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(InvarianceReport {
        configs,
        max_scale_singular: max(|r| r.scale_singular),
        max_scale_output: max(|r| r.scale_output),
        max_permutation: max(|r| r.permutation),
        rows,
    })
}
