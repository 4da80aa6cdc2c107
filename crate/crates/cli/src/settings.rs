//! Flags shared by every subcommand. A JSON file passed with `--config` uses
//! the same keys; flags given on the command line win.

use std::path::{Path, PathBuf};

use clap::Args;
use randinfo::SpectrumKind;
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Spectrum as `kind:params`, e.g. `power_law:1`, `power_log:1:0.5`,
    /// `geometric:0.25`, `explicit:1,0.5,0.1`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<String>,
    /// Target dimension, or a comma-separated list.
    #[arg(long, value_parser = parse_list)]
    #[serde(default, deserialize_with = "de_list", skip_serializing_if = "Option::is_none")]
    pub n: Option<Dims>,
    /// Powers of two from 2^a to 2^b, written `a:b`.
    #[arg(long = "n-grid", value_parser = parse_grid)]
    #[serde(default, rename = "n_grid", deserialize_with = "de_grid", skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Dims>,
    /// Oversampling constant C: N = ceil(C n ln n) (floor for `coupon`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversample: Option<f64>,
    /// Explicit number of functionals.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    /// Working dimension of the truncated model.
    #[arg(long = "M")]
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// point | gauss | fourier
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    /// rho | uniform | plain
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(long)]
    #[serde(skip_serializing)]
    pub outdir: Option<PathBuf>,
    /// Evaluation grid size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Comma-separated exponents for the distance-function norms.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    /// Dimension of the point cloud (1 or 2).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// MLS smoothness; the local polynomial degree is s - 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    /// Error norm exponent, a number or `inf`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    /// Test function: `sin2pi` or `poly:m`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    /// MLS window multiplier.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Run twice and compare (only `all`).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub repeat: bool,
    /// JSON file with defaults for any of the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// A list of target dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Dims(pub Vec<usize>);

fn parse_list(s: &str) -> Result<Dims, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a dimension")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.contains(&0) {
        return Err("dimensions start at 1".into());
    }
    Ok(Dims(v))
}

fn parse_grid(s: &str) -> Result<Dims, String> {
    let (a, b) = s.split_once(':').ok_or("expected `a:b`")?;
    let a: u32 = a.trim().parse().map_err(|_| format!("bad exponent `{a}`"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad exponent `{b}`"))?;
    if a > b || b > 30 {
        return Err(format!("need a <= b <= 30, got {a}:{b}"));
    }
    Ok(Dims((a..=b).map(|e| 1usize << e).collect()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ListForm {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

fn de_list<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Dims>, D::Error> {
    let v = match ListForm::deserialize(d)? {
        ListForm::One(k) => Dims(vec![k]),
        ListForm::Many(v) => Dims(v),
        ListForm::Text(t) => parse_list(&t).map_err(serde::de::Error::custom)?,
    };
    Ok(Some(v))
}

fn de_grid<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Dims>, D::Error> {
    let v = match ListForm::deserialize(d)? {
        ListForm::Text(t) => parse_grid(&t).map_err(serde::de::Error::custom)?,
        ListForm::Many(v) => Dims(v),
        ListForm::One(k) => Dims(vec![k]),
    };
    Ok(Some(v))
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Fill every unset field from `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            spectrum: self.spectrum.or(base.spectrum),
            n: self.n.or(base.n),
            n_grid: self.n_grid.or(base.n_grid),
            oversample: self.oversample.or(base.oversample),
            big_n: self.big_n.or(base.big_n),
            m: self.m.or(base.m),
            channel: self.channel.or(base.channel),
            density: self.density.or(base.density),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            outdir: self.outdir.or(base.outdir),
            grid: self.grid.or(base.grid),
            gamma: self.gamma.or(base.gamma),
            dim: self.dim.or(base.dim),
            s: self.s.or(base.s),
            q: self.q.or(base.q),
            function: self.function.or(base.function),
            kappa: self.kappa.or(base.kappa),
            repeat: self.repeat || base.repeat,
            config: self.config,
        }
    }

    /// The merged settings with the seed resolved, for the JSON digest.
    pub fn effective(&self, seed: u64) -> serde_json::Value {
        let mut s = self.clone();
        s.seed = Some(seed);
        serde_json::to_value(s).expect("settings serialize")
    }

    pub fn spectrum_kind(&self) -> Result<SpectrumKind, randinfo::Error> {
        self.spectrum.as_deref().unwrap_or("power_law:1").parse()
    }

    /// Dimensions from `--n` or `--n-grid`, else `default`.
    pub fn n_values(&self, default: &[usize]) -> Result<Vec<usize>, randinfo::Error> {
        match (&self.n, &self.n_grid) {
            (Some(_), Some(_)) => Err(randinfo::Error::Config("give either --n or --n-grid, not both".into())),
            (Some(v), None) | (None, Some(v)) => Ok(v.0.clone()),
            (None, None) => Ok(default.to_vec()),
        }
    }

    /// As [`Settings::n_values`] with the default grid `2^a..=2^b`.
    pub fn n_values_grid(&self, a: u32, b: u32) -> Result<Vec<usize>, randinfo::Error> {
        let default: Vec<usize> = (a..=b).map(|e| 1usize << e).collect();
        self.n_values(&default)
    }
}
