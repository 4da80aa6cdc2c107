//! `randinfo`: run the experiments and write `<outdir>/<command>-<seed>.csv`
//! plus a JSON digest next to it.
//!
//! Exit codes: 0 success, 1 refusal or runtime failure (including failed
//! criteria under `all`), 2 usage error.

mod settings;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use randinfo::experiments::config::{DensityChoice, Oversample, TrialConfig};
use randinfo::experiments::rates::TestFunction;
use randinfo::experiments::{self, run_suite};
use randinfo::sobolev::Gamma;
use randinfo::{Channel, Error};
use serde_json::json;

use settings::Settings;

#[derive(Parser)]
#[command(name = "randinfo", version, about = "Recovery from iid random information: experiments")]
#[command(subcommand_required = true, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact worst-case error of weighted least squares against the benchmark.
    Wce(Settings),
    /// Plain Gaussian information with N = 2n.
    Gaussian(Settings),
    /// Coverage of the leading Fourier indices (N = floor(C n ln n)).
    Coupon(Settings),
    /// Deviation of the empirical second-moment matrix.
    Concentration(Settings),
    /// Covering radius and distance-function norms of uniform points.
    SobolevDist(Settings),
    /// Moving least squares error rates.
    Mls(Settings),
    /// The full acceptance suite.
    All(Settings),
}

impl Command {
    fn parts(&self) -> (&'static str, &Settings) {
        match self {
            Command::Wce(s) => ("wce", s),
            Command::Gaussian(s) => ("gaussian", s),
            Command::Coupon(s) => ("coupon", s),
            Command::Concentration(s) => ("concentration", s),
            Command::SobolevDist(s) => ("sobolev-dist", s),
            Command::Mls(s) => ("mls", s),
            Command::All(s) => ("all", s),
        }
    }
}

/// Usage problems found after parsing.
struct Usage(String);

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Usage(m),
            Error::DivergentTail => Failure::Runtime(
                "refusing to run: the spectrum is not square summable, so the theorem bounds do not apply".into(),
            ),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

struct Output {
    csv: String,
    digest: serde_json::Value,
    /// Extra files under `<outdir>/<command>-<seed>/`.
    extra: Vec<(String, String)>,
    failed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(t) = std::env::var("RANDINFO_THREADS") {
        match t.parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("error: RANDINFO_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(2);
            }
        }
    }
    let (name, flags) = cli.command.parts();
    match run(name, flags) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("see `randinfo {name} --help`");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(name: &str, flags: &Settings) -> Result<ExitCode, Failure> {
    let file = match &flags.config {
        Some(p) => Settings::from_file(p).map_err(Failure::Usage)?,
        None => Settings::default(),
    };
    let s = flags.clone().over(file);
    let seed = s.seed.unwrap_or(experiments::DEFAULT_SEED);
    let outdir = s.outdir.clone().unwrap_or_else(|| PathBuf::from("."));
    let out = match name {
        "wce" => wce(&s, seed, false)?,
        "concentration" => wce(&s, seed, true)?,
        "gaussian" => gaussian(&s, seed)?,
        "coupon" => coupon(&s, seed)?,
        "sobolev-dist" => sobolev(&s, seed)?,
        "mls" => mls(&s, seed)?,
        "all" => all(seed, s.repeat)?,
        _ => unreachable!("clap knows the commands"),
    };
    let digest = json!({
        "command": name,
        "effective_config": s.effective(seed),
        "result": out.digest,
    });
    write_outputs(&outdir, name, seed, &out, &digest)?;
    Ok(if out.failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn write_outputs(dir: &Path, name: &str, seed: u64, out: &Output, digest: &serde_json::Value) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let stem = format!("{name}-{seed}");
    fs::write(dir.join(format!("{stem}.csv")), &out.csv)?;
    let mut js = serde_json::to_string_pretty(digest).map_err(|e| Failure::Runtime(e.to_string()))?;
    js.push('\n');
    fs::write(dir.join(format!("{stem}.json")), js)?;
    if !out.extra.is_empty() {
        let sub = dir.join(&stem);
        fs::create_dir_all(&sub)?;
        for (file, body) in &out.extra {
            fs::write(sub.join(format!("{file}.csv")), body)?;
        }
    }
    Ok(())
}

fn trial_config(s: &Settings, seed: u64) -> Result<TrialConfig, Failure> {
    let channel: Channel = s.channel.as_deref().unwrap_or("fourier").parse()?;
    let density: DensityChoice = s.density.as_deref().unwrap_or("rho").parse()?;
    let mut cfg = TrialConfig::new(channel, density, s.spectrum_kind()?, s.n_values(&[32])?);
    cfg.oversample = match (s.big_n, s.oversample) {
        (Some(_), Some(_)) => return Err(Usage("give either --oversample or --N, not both".into()).into()),
        (Some(count), None) => Oversample::Explicit { count },
        (None, Some(c)) => Oversample::Ceil { c },
        (None, None) => Oversample::default(),
    };
    cfg.trials = s.trials.unwrap_or(100);
    cfg.seed = seed;
    cfg.m = s.m;
    Ok(cfg)
}

fn wce(s: &Settings, seed: u64, concentration: bool) -> Result<Output, Failure> {
    let cfg = trial_config(s, seed)?;
    if concentration {
        let r = experiments::run_concentration(&cfg)?;
        for g in &r.groups {
            println!(
                "n={} N={} M={}: fraction with statistic <= 1/2 = {:.3}, median {:.4}",
                g.n, g.big_n, g.m, g.fraction_below_half, g.stat.median
            );
        }
        return Ok(Output {
            csv: r.csv()?,
            digest: r.digest(),
            extra: vec![],
            failed: false,
        });
    }
    let r = experiments::run_wce_trials(&cfg)?;
    for g in &r.groups {
        println!(
            "n={} N={} M={}: wce median {:.5}, benchmark {:.5} (pass {:.2}), 3 sigma_(n+1) pass {:.2}, failures {}",
            g.n, g.big_n, g.m, g.wce.median, g.benchmark, g.pass_benchmark, g.pass_three_sigma, g.failures
        );
    }
    Ok(Output {
        csv: r.csv()?,
        digest: r.digest(),
        extra: vec![],
        failed: false,
    })
}

fn gaussian(s: &Settings, seed: u64) -> Result<Output, Failure> {
    let r = experiments::run_gaussian_theorem(&s.spectrum_kind()?, &s.n_values(&[16, 32, 64])?, s.trials.unwrap_or(100), seed, s.m)?;
    for g in &r.groups {
        println!(
            "n={} N={}: wce median {:.5}, bound {:.5}, pass {:.2}",
            g.n, g.big_n, g.wce.median, g.theorem_bound, g.pass_theorem
        );
    }
    Ok(Output {
        csv: r.csv()?,
        digest: r.digest(),
        extra: vec![],
        failed: false,
    })
}

fn coupon(s: &Settings, seed: u64) -> Result<Output, Failure> {
    let ns = s.n_values(&[64])?;
    let [n] = ns[..] else {
        return Err(Usage("coupon takes a single --n".into()).into());
    };
    let big_n = match (s.big_n, s.oversample) {
        (Some(_), Some(_)) => return Err(Usage("give either --oversample or --N, not both".into()).into()),
        (Some(count), None) => count,
        (None, c) => Oversample::Floor { c: c.unwrap_or(5.0) }.count(n),
    };
    let r = experiments::run_coupon(&s.spectrum_kind()?, n, big_n, s.trials.unwrap_or(200), seed, s.m)?;
    println!(
        "n={} N={}: P[radius <= sigma_(n+1)] = {:.3}, P[radius >= sigma_n] = {:.3}",
        r.n, r.big_n, r.coverage_probability, r.lower_probability
    );
    Ok(Output {
        csv: r.csv()?,
        digest: r.digest(),
        extra: vec![],
        failed: false,
    })
}

fn sobolev(s: &Settings, seed: u64) -> Result<Output, Failure> {
    let gammas: Vec<f64> = match &s.gamma {
        None => vec![1.0],
        Some(list) => list
            .split(',')
            .map(|g| match g.parse::<Gamma>()? {
                Gamma::Finite(v) => Ok(v),
                Gamma::Infinity => Err(Error::Config("the covering radius is always reported; drop `inf`".into())),
            })
            .collect::<Result<_, Error>>()?,
    };
    let grid = s.n_values_grid(6, 12)?;
    let r = experiments::run_sobolev_rates(s.dim.unwrap_or(1), &gammas, &grid, s.trials.unwrap_or(200), seed, s.grid.unwrap_or(512))?;
    for (stat, fit) in &r.fits {
        println!("{stat}: slope {:.4}, R^2 {:.4}", fit.slope, fit.r_squared);
    }
    println!("hole ratio spread {:.3}", r.hole_ratio_spread());
    Ok(Output {
        csv: r.csv()?,
        digest: r.digest(),
        extra: vec![],
        failed: false,
    })
}

fn mls(s: &Settings, seed: u64) -> Result<Output, Failure> {
    let q = match s.q.as_deref().unwrap_or("inf") {
        "inf" => f64::INFINITY,
        t => t.parse::<f64>().map_err(|_| Usage(format!("bad --q {t:?}")))?,
    };
    let function: TestFunction = s.function.as_deref().unwrap_or("sin2pi").parse()?;
    let grid = s.n_values_grid(6, 11)?;
    let r = experiments::run_mls_rates(
        s.s.unwrap_or(2),
        q,
        function,
        &grid,
        s.trials.unwrap_or(100),
        seed,
        s.grid.unwrap_or(1024),
        s.kappa,
    )?;
    match &r.fit {
        Some(f) => println!("slope {:.4}, R^2 {:.4}", f.slope, f.r_squared),
        None => println!("errors at rounding level; no fit"),
    }
    Ok(Output {
        csv: r.csv()?,
        digest: r.digest(),
        extra: vec![],
        failed: false,
    })
}

fn all(seed: u64, repeat: bool) -> Result<Output, Failure> {
    let mut report = run_suite(seed)?;
    if repeat {
        let second = run_suite(seed)?;
        report.record_determinism(&second);
    }
    for v in &report.verdicts {
        let status = match v.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        println!("{status} {:>2} {}: {}", v.id, v.name, v.detail);
    }
    let failed = report.verdicts.iter().any(|v| v.pass == Some(false));
    Ok(Output {
        csv: report.csv()?,
        digest: report.digest(),
        extra: report.outputs.clone(),
        failed,
    })
}
