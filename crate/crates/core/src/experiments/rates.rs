//! Log-log rate fits for distance-function norms and moving least squares.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{par_trials, to_csv, trial_seed};
use crate::channels::DrawRng;
use crate::error::{Error, Result};
use crate::mls::{mls_error, mls_fit_fn, DEFAULT_KAPPA};
use crate::sobolev::{covering_radius_grid, dist_norm_grid, Gamma, PointSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Domain(format!("need at least 3 paired values, got {} and {}", xs.len(), ys.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

/// One statistic of one trial, in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevPoint {
    pub n: usize,
    pub mean_covering_radius: f64,
    /// `h n^{1/d} / (ln n)^{1/d}`.
    pub hole_ratio: f64,
    /// Mean `||dist||_{L_gamma}` keyed by `gamma`.
    pub mean_norms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevRates {
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub grid: usize,
    pub points: Vec<SobolevPoint>,
    /// Keyed by `h` and by `L<gamma>`.
    pub fits: BTreeMap<String, RateFit>,
    #[serde(skip)]
    pub rows: Vec<RateRow>,
}

impl SobolevRates {
    pub fn csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    pub fn digest(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("rates serialize")
    }

    /// Largest over smallest hole ratio across the grid.
    pub fn hole_ratio_spread(&self) -> f64 {
        let r: Vec<f64> = self.points.iter().map(|p| p.hole_ratio).collect();
        r.iter().copied().fold(f64::NEG_INFINITY, f64::max) / r.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Covering radius and distance-function norms of iid uniform sets.
pub fn run_sobolev_rates(d: usize, gammas: &[f64], n_grid: &[usize], trials: usize, seed: u64, grid: usize) -> Result<SobolevRates> {
    if !(d == 1 || d == 2) {
        return Err(Error::Unsupported(format!("dimension {d}")));
    }
    if trials == 0 || n_grid.is_empty() {
        return Err(Error::Config("need trials >= 1 and a nonempty n grid".into()));
    }
    let names: Vec<String> = gammas.iter().map(|g| Gamma::Finite(*g).to_string()).collect();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in n_grid {
        let tag = (5u64 << 40) | ((d as u64) << 32) | n as u64;
        let per_trial: Vec<Vec<RateRow>> = par_trials(trials, |i| {
            let s = trial_seed(seed, tag, i);
            let p = PointSet::uniform(d, n, &mut DrawRng::new(s))?;
            let mut out = vec![RateRow {
                n,
                trial: i,
                seed: s,
                statistic: "h".into(),
                value: covering_radius_grid(&p, grid),
            }];
            for (g, name) in gammas.iter().zip(&names) {
                out.push(RateRow {
                    n,
                    trial: i,
                    seed: s,
                    statistic: format!("L{name}"),
                    value: dist_norm_grid(&p, Gamma::Finite(*g), grid),
                });
            }
            Ok(out)
        })?;
        let flat: Vec<RateRow> = per_trial.into_iter().flatten().collect();
        let mean = |stat: &str| {
            let v: Vec<f64> = flat.iter().filter(|r| r.statistic == stat).map(|r| r.value).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let h = mean("h");
        let nf = n as f64;
        points.push(SobolevPoint {
            n,
            mean_covering_radius: h,
            hole_ratio: h * nf.powf(1.0 / d as f64) / nf.ln().powf(1.0 / d as f64),
            mean_norms: names.iter().map(|g| (g.clone(), mean(&format!("L{g}")))).collect(),
        });
        rows.extend(flat);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let mut fits = BTreeMap::new();
    if xs.len() >= 3 {
        let hs: Vec<f64> = points.iter().map(|p| p.mean_covering_radius).collect();
        fits.insert("h".to_string(), fit_loglog(&xs, &hs)?);
        for g in &names {
            let ys: Vec<f64> = points.iter().map(|p| p.mean_norms[g]).collect();
            fits.insert(format!("L{g}"), fit_loglog(&xs, &ys)?);
        }
    }
    Ok(SobolevRates {
        d,
        trials,
        seed,
        grid,
        points,
        fits,
        rows,
    })
}

/// Test functions for the MLS rate study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `sin(2 pi x)`.
    Sin2Pi,
    /// `x^m`.
    Monomial(u32),
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Sin2Pi => (2.0 * PI * x).sin(),
            TestFunction::Monomial(m) => x.powi(*m as i32),
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin2pi" => Ok(TestFunction::Sin2Pi),
            _ => s
                .strip_prefix("poly:")
                .and_then(|m| m.parse().ok())
                .map(TestFunction::Monomial)
                .ok_or_else(|| Error::Config(format!("unknown test function `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlsRates {
    pub s: u32,
    /// Norm exponent as written (`1`, `2`, `inf`).
    pub q: String,
    pub function: TestFunction,
    pub kappa: f64,
    pub trials: usize,
    pub seed: u64,
    pub grid: usize,
    pub ns: Vec<usize>,
    pub mean_errors: Vec<f64>,
    /// Absent when the errors sit at rounding level.
    pub fit: Option<RateFit>,
    #[serde(skip)]
    pub rows: Vec<RateRow>,
}

impl MlsRates {
    pub fn csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    pub fn digest(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("rates serialize")
    }
}

/// Degree-`s` MLS on iid uniform points, mean `L_q` error per `n`.
#[allow(clippy::too_many_arguments)]
pub fn run_mls_rates(
    s: u32,
    q: f64,
    function: TestFunction,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    grid: usize,
    kappa: Option<f64>,
) -> Result<MlsRates> {
    if trials == 0 || n_grid.is_empty() {
        return Err(Error::Config("need trials >= 1 and a nonempty n grid".into()));
    }
    let kappa = kappa.unwrap_or(DEFAULT_KAPPA);
    let degree = s as usize;
    let q_name = if q.is_infinite() { "inf".to_string() } else { q.to_string() };
    let mut rows = Vec::new();
    let mut mean_errors = Vec::new();
    for &n in n_grid {
        let tag = (6u64 << 40) | ((s as u64) << 32) | n as u64;
        let group = par_trials(trials, |i| {
            let sd = trial_seed(seed, tag, i);
            let p = PointSet::uniform(1, n, &mut DrawRng::new(sd))?;
            let model = mls_fit_fn(&p, |x| function.eval(x), degree, kappa)?;
            Ok(RateRow {
                n,
                trial: i,
                seed: sd,
                statistic: format!("L{q_name}"),
                value: mls_error(|x| function.eval(x), &model, q, grid)?,
            })
        })?;
        mean_errors.push(group.iter().map(|r| r.value).sum::<f64>() / group.len() as f64);
        rows.extend(group);
    }
    let xs: Vec<f64> = n_grid.iter().map(|n| *n as f64).collect();
    let at_floor = mean_errors.iter().all(|e| *e < 1e-10);
    let fit = if at_floor || xs.len() < 3 {
        None
    } else {
        Some(fit_loglog(&xs, &mean_errors)?)
    };
    Ok(MlsRates {
        s,
        q: q_name,
        function,
        kappa,
        trials,
        seed,
        grid,
        ns: n_grid.to_vec(),
        mean_errors,
        fit,
        rows,
    })
}
