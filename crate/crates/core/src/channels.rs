//! Admissible information and its sampling distributions.
//!
//! Three channels are supported: point evaluations on `[0, 1]`, Gaussian
//! functionals on coefficient space, and single Fourier coefficients. Each
//! can be drawn from the density
//!
//! ```text
//! rho_n(l) = 1/2 * ( (1/n) sum_{k<=n} l(b_k)^2 + sum_{k>n} sigma_k^2 l(b_k)^2 / sum_{k>n} sigma_k^2 )
//! ```
//!
//! relative to the channel's base measure, with least-squares weights
//! `w = 1 / rho_n(l)`. Point evaluations also come with the constant density
//! (uniform points, unit weights) and Gaussian functionals with the plain
//! Gaussian measure (unit weights).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Basis, CoefVector, ModelSpace, TrigBasis};
use crate::rng::{self, TrialRng};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Point,
    Gauss,
    Fourier,
}

impl Channel {
    pub fn name(&self) -> &'static str {
        match self {
            Channel::Point => "point",
            Channel::Gauss => "gauss",
            Channel::Fourier => "fourier",
        }
    }

    /// Basis the channel evaluates against.
    pub fn basis(&self) -> Basis {
        match self {
            Channel::Point => Basis::Trig,
            Channel::Gauss | Channel::Fourier => Basis::Coordinate,
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(Channel::Point),
            "gauss" => Ok(Channel::Gauss),
            "fourier" => Ok(Channel::Fourier),
            other => Err(Error::Config(format!("unknown channel `{other}`"))),
        }
    }
}

/// A single information functional.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// `f -> f(x)`.
    PointEval(f64),
    /// `f -> sum_k c_k g_k`.
    GaussianCoefs(Vec<f64>),
    /// `f -> c_k` (1-based).
    FourierIndex(usize),
}

impl Functional {
    pub fn channel(&self) -> Channel {
        match self {
            Functional::PointEval(_) => Channel::Point,
            Functional::GaussianCoefs(_) => Channel::Gauss,
            Functional::FourierIndex(_) => Channel::Fourier,
        }
    }

    fn check_basis(&self, model: &ModelSpace) -> Result<()> {
        if let Functional::PointEval(x) = self {
            if model.basis != Basis::Trig {
                return Err(Error::Unsupported("point evaluation needs the trigonometric basis".into()));
            }
            if !(0.0..=1.0).contains(x) {
                return Err(Error::Domain(format!("evaluation point {x} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// `l(b_1), ..., l(b_m)` written into `out`.
    pub fn basis_values_into(&self, model: &ModelSpace, out: &mut [f64]) -> Result<()> {
        self.check_basis(model)?;
        match self {
            Functional::PointEval(x) => TrigBasis.eval_all_into(*x, out),
            Functional::GaussianCoefs(g) => {
                let m = out.len().min(g.len());
                out[..m].copy_from_slice(&g[..m]);
                out[m..].iter_mut().for_each(|v| *v = 0.0);
            }
            Functional::FourierIndex(k) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                if *k >= 1 && *k <= out.len() {
                    out[k - 1] = 1.0;
                }
            }
        }
        Ok(())
    }

    pub fn basis_values(&self, model: &ModelSpace, m: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; m];
        self.basis_values_into(model, &mut out)?;
        Ok(out)
    }

    /// `l(f)` for `f = sum_k c_k b_k`.
    pub fn apply(&self, model: &ModelSpace, c: &CoefVector) -> Result<f64> {
        self.check_basis(model)?;
        Ok(match self {
            Functional::PointEval(_) => {
                let b = self.basis_values(model, c.len())?;
                b.iter().zip(c.as_slice()).map(|(b, c)| b * c).sum()
            }
            Functional::GaussianCoefs(g) => g.iter().zip(c.as_slice()).map(|(g, c)| g * c).sum(),
            Functional::FourierIndex(k) => {
                if *k == 0 || *k > c.len() {
                    return Err(Error::OutOfRange { index: *k, max: c.len() });
                }
                c.as_slice()[k - 1]
            }
        })
    }
}

/// The density information was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    RhoN { n: usize },
    Constant,
    PlainGaussian,
}

impl DensitySpec {
    pub fn name(&self) -> &'static str {
        match self {
            DensitySpec::RhoN { .. } => "rho",
            DensitySpec::Constant => "uniform",
            DensitySpec::PlainGaussian => "plain",
        }
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, DensitySpec::RhoN { .. })
    }
}

/// Precomputed `rho_n` for one spectrum and head dimension.
#[derive(Debug, Clone)]
pub struct RhoDensity {
    n: usize,
    /// `sigma_k^2 / tail_sum(n)` for `k = n+1..=M`.
    tail_weights: Vec<f64>,
}

impl RhoDensity {
    pub fn new(spectrum: &Spectrum, n: usize) -> Result<Self> {
        let m = spectrum.dim();
        if n == 0 || n >= m {
            return Err(Error::Domain(format!("rho_n needs 1 <= n < M (n = {n}, M = {m})")));
        }
        let tail = spectrum.tail_sum(n).value;
        if tail <= 0.0 {
            return Err(Error::ZeroTail { n });
        }
        let tail_weights = ((n + 1)..=m).map(|k| spectrum.sigma_or_zero(k).powi(2) / tail).collect();
        Ok(RhoDensity { n, tail_weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total mass of the coefficient weights; below one when the tail beyond
    /// `M` is not represented.
    pub fn mass(&self) -> f64 {
        0.5 * (1.0 + self.tail_weights.iter().sum::<f64>())
    }

    /// `rho_n` given `l(b_1..b_M)`.
    pub fn eval_values(&self, vals: &[f64]) -> f64 {
        let n = self.n;
        let head: f64 = vals[..n].iter().map(|v| v * v).sum::<f64>() / n as f64;
        let tail: f64 = vals[n..].iter().zip(&self.tail_weights).map(|(v, w)| w * v * v).sum();
        0.5 * (head + tail)
    }

    /// `rho_n` at a Fourier index.
    pub fn eval_index(&self, k: usize) -> f64 {
        if k <= self.n {
            0.5 / self.n as f64
        } else {
            0.5 * self.tail_weights.get(k - self.n - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn eval(&self, model: &ModelSpace, l: &Functional) -> Result<f64> {
        match l {
            Functional::FourierIndex(k) => Ok(self.eval_index(*k)),
            _ => {
                let vals = l.basis_values(model, self.n + self.tail_weights.len())?;
                Ok(self.eval_values(&vals))
            }
        }
    }
}

/// `rho_n(l)` for the model's spectrum.
pub fn density_rho(model: &ModelSpace, n: usize, l: &Functional) -> Result<f64> {
    RhoDensity::new(&model.spectrum, n)?.eval(model, l)
}

/// Fourier-index distribution on `1..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTable {
    /// Renormalized probabilities over `1..=M`.
    pub probs: Vec<f64>,
    /// `rho_n(k)` before renormalization.
    pub raw: Vec<f64>,
    /// Sum of `raw`, divided out of `probs`.
    pub normalization: f64,
}

pub fn fourier_density_table(spectrum: &Spectrum, n: usize, m: usize) -> Result<FourierTable> {
    let spectrum = spectrum.with_dim(m)?;
    let rho = RhoDensity::new(&spectrum, n)?;
    let raw: Vec<f64> = (1..=spectrum.dim()).map(|k| rho.eval_index(k)).collect();
    let normalization: f64 = raw.iter().sum();
    let probs = raw.iter().map(|r| r / normalization).collect();
    Ok(FourierTable { probs, raw, normalization })
}

/// A realized set of functionals with least-squares weights.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoDraw {
    pub channel: Channel,
    pub density: DensitySpec,
    pub functionals: Vec<Functional>,
    pub weights: Vec<f64>,
    /// Seed of the stream the draw was taken from.
    pub seed: u64,
}

impl InfoDraw {
    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    /// Information built from explicit functionals and weights.
    pub fn from_parts(functionals: Vec<Functional>, weights: Vec<f64>, density: DensitySpec) -> Result<Self> {
        if functionals.len() != weights.len() {
            return Err(Error::Dimension("functionals and weights differ in length".into()));
        }
        let channel = functionals.first().map(Functional::channel).unwrap_or(Channel::Fourier);
        if functionals.iter().any(|l| l.channel() != channel) {
            return Err(Error::Dimension("all functionals must share one channel".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        Ok(InfoDraw {
            channel,
            density,
            functionals,
            weights,
            seed: 0,
        })
    }

    /// Weighted measurements `sqrt(w_i) l_i(f)`.
    pub fn measure(&self, model: &ModelSpace, c: &CoefVector) -> Result<Vec<f64>> {
        self.functionals
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| Ok(w.sqrt() * l.apply(model, c)?))
            .collect()
    }
}

/// A ChaCha stream that remembers the seed it was created from.
#[derive(Debug, Clone)]
pub struct DrawRng {
    seed: u64,
    inner: TrialRng,
}

impl DrawRng {
    pub fn new(seed: u64) -> Self {
        DrawRng {
            seed,
            inner: rng::from_seed(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for DrawRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `N` iid Fourier indices from the renormalized `rho_n` table; weights use
/// the unrenormalized density.
pub fn sample_fourier(spectrum: &Spectrum, n: usize, count: usize, rng: &mut DrawRng) -> Result<InfoDraw> {
    let table = fourier_density_table(spectrum, n, spectrum.dim())?;
    let mut functionals = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    if count > 0 {
        let dist = WeightedIndex::new(&table.probs).map_err(|e| Error::Domain(e.to_string()))?;
        for _ in 0..count {
            let k = dist.sample(rng) + 1;
            functionals.push(Functional::FourierIndex(k));
            weights.push(1.0 / table.raw[k - 1]);
        }
    }
    Ok(InfoDraw {
        channel: Channel::Fourier,
        density: DensitySpec::RhoN { n },
        functionals,
        weights,
        seed: rng.seed(),
    })
}

/// Envelope constant for rejection sampling of `rho_n` on `[0, 1]`:
/// `|b_k(x)|^2 <= 2` bounds both averaged terms by 2.
pub const POINT_ENVELOPE: f64 = 2.0;

/// Points drawn from `rho_n dx` by rejection against the uniform proposal.
#[derive(Debug, Clone)]
pub struct PointSample {
    pub draw: InfoDraw,
    pub proposals: usize,
}

pub fn sample_points_rho_counted(model: &ModelSpace, n: usize, count: usize, rng: &mut DrawRng) -> Result<PointSample> {
    if model.basis != Basis::Trig {
        return Err(Error::Unsupported("point sampling needs the trigonometric basis".into()));
    }
    let rho = RhoDensity::new(&model.spectrum, n)?;
    let mut buf = vec![0.0; model.dim()];
    let mut functionals = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut proposals = 0usize;
    while functionals.len() < count {
        proposals += 1;
        let x: f64 = rng.random();
        let u: f64 = rng.random();
        TrigBasis.eval_all_into(x, &mut buf);
        let r = rho.eval_values(&buf);
        assert!(
            r <= POINT_ENVELOPE * (1.0 + 1e-12),
            "rho_n({x}) = {r} exceeds the rejection envelope; basis convention broken"
        );
        if u * POINT_ENVELOPE < r {
            functionals.push(Functional::PointEval(x));
            weights.push(1.0 / r);
        }
    }
    Ok(PointSample {
        draw: InfoDraw {
            channel: Channel::Point,
            density: DensitySpec::RhoN { n },
            functionals,
            weights,
            seed: rng.seed(),
        },
        proposals,
    })
}

/// `N` iid points from `rho_n dx`, weights `1 / rho_n(x_i)`.
pub fn sample_points_rho(model: &ModelSpace, n: usize, count: usize, rng: &mut DrawRng) -> Result<InfoDraw> {
    Ok(sample_points_rho_counted(model, n, count, rng)?.draw)
}

/// `N` iid uniform points on `[0, 1]` with unit weights.
pub fn sample_points_uniform(count: usize, rng: &mut DrawRng) -> InfoDraw {
    let functionals = (0..count).map(|_| Functional::PointEval(rng.random())).collect();
    InfoDraw {
        channel: Channel::Point,
        density: DensitySpec::Constant,
        functionals,
        weights: vec![1.0; count],
        seed: rng.seed(),
    }
}

/// `N` Gaussian functionals with coordinate vectors in `R^M`.
///
/// Plain mode draws iid standard normal vectors with unit weights. Weighted
/// mode draws exactly from `rho_n dgamma`: since `rho_n(g) = sum_k c_k g_k^2`
/// with nonnegative `c_k`, the density is a mixture in which one coordinate,
/// chosen with probability proportional to `c_k`, is size-biased to a
/// chi-3 magnitude and all others stay standard normal. Weights are
/// `1 / rho_n(g)`.
pub fn sample_gaussian(model: &ModelSpace, n: usize, count: usize, rng: &mut DrawRng, weighted: bool) -> Result<InfoDraw> {
    let m = model.dim();
    if n == 0 || n >= m {
        return Err(Error::Domain(format!("gaussian sampling needs 1 <= n < M (n = {n}, M = {m})")));
    }
    let normal = |rng: &mut DrawRng| -> f64 { rng.sample(StandardNormal) };
    let mut functionals = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    if weighted {
        let rho = RhoDensity::new(&model.spectrum, n)?;
        let coef: Vec<f64> = (1..=m).map(|k| rho.eval_index(k)).collect();
        let pick = WeightedIndex::new(&coef).map_err(|e| Error::Domain(e.to_string()))?;
        for _ in 0..count {
            let mut g: Vec<f64> = (0..m).map(|_| normal(rng)).collect();
            let k = pick.sample(rng);
            let chi3 = (0..3).map(|_| normal(rng).powi(2)).sum::<f64>().sqrt();
            g[k] = if rng.random::<bool>() { chi3 } else { -chi3 };
            let r = rho.eval_values(&g);
            functionals.push(Functional::GaussianCoefs(g));
            weights.push(1.0 / r);
        }
    } else {
        for _ in 0..count {
            functionals.push(Functional::GaussianCoefs((0..m).map(|_| normal(rng)).collect()));
            weights.push(1.0);
        }
    }
    Ok(InfoDraw {
        channel: Channel::Gauss,
        density: if weighted { DensitySpec::RhoN { n } } else { DensitySpec::PlainGaussian },
        functionals,
        weights,
        seed: rng.seed(),
    })
}

#[derive(Serialize, Deserialize)]
struct InfoDrawJson {
    channel: Channel,
    density: DensitySpec,
    functionals: serde_json::Value,
    weights: Vec<f64>,
    seed: u64,
}

impl Serialize for InfoDraw {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let functionals = match self.channel {
            Channel::Point => serde_json::json!(self
                .functionals
                .iter()
                .map(|l| match l {
                    Functional::PointEval(x) => *x,
                    _ => unreachable!("mixed channels"),
                })
                .collect::<Vec<_>>()),
            Channel::Gauss => serde_json::json!(self
                .functionals
                .iter()
                .map(|l| match l {
                    Functional::GaussianCoefs(g) => g.clone(),
                    _ => unreachable!("mixed channels"),
                })
                .collect::<Vec<_>>()),
            Channel::Fourier => serde_json::json!(self
                .functionals
                .iter()
                .map(|l| match l {
                    Functional::FourierIndex(k) => *k,
                    _ => unreachable!("mixed channels"),
                })
                .collect::<Vec<_>>()),
        };
        InfoDrawJson {
            channel: self.channel,
            density: self.density,
            functionals,
            weights: self.weights.clone(),
            seed: self.seed,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for InfoDraw {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = InfoDrawJson::deserialize(de)?;
        let functionals = match j.channel {
            Channel::Point => Vec::<f64>::deserialize(j.functionals)
                .map_err(D::Error::custom)?
                .into_iter()
                .map(Functional::PointEval)
                .collect(),
            Channel::Gauss => Vec::<Vec<f64>>::deserialize(j.functionals)
                .map_err(D::Error::custom)?
                .into_iter()
                .map(Functional::GaussianCoefs)
                .collect(),
            Channel::Fourier => Vec::<usize>::deserialize(j.functionals)
                .map_err(D::Error::custom)?
                .into_iter()
                .map(Functional::FourierIndex)
                .collect::<Vec<_>>(),
        };
        let functionals: Vec<Functional> = functionals;
        if functionals.len() != j.weights.len() {
            return Err(D::Error::custom("functionals and weights differ in length"));
        }
        Ok(InfoDraw {
            channel: j.channel,
            density: j.density,
            functionals,
            weights: j.weights,
            seed: j.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn geo(m: usize) -> Spectrum {
        Spectrum::geometric(0.5, m).unwrap()
    }

    #[test]
    fn apply_examples() {
        let coord = ModelSpace::coordinate(geo(8));
        let mut c = CoefVector::zeros(8);
        c.0[2] = 7.0;
        assert_eq!(Functional::FourierIndex(3).apply(&coord, &c).unwrap(), 7.0);
        let mut g = vec![0.0; 8];
        g[0] = 3.0;
        assert_eq!(Functional::GaussianCoefs(g).apply(&coord, &CoefVector::unit(1, 8)).unwrap(), 3.0);
        let trig = ModelSpace::trig(geo(8));
        let mut c = CoefVector::zeros(8);
        c.0[0] = 1.0;
        c.0[1] = 1.0;
        assert_abs_diff_eq!(Functional::PointEval(0.0).apply(&trig, &c).unwrap(), 1.0 + SQRT_2, epsilon = 1e-14);
        assert!(Functional::PointEval(0.0).apply(&coord, &c).is_err());
    }

    #[test]
    fn fourier_density_values() {
        let model = ModelSpace::coordinate(geo(64));
        let want = [0.25, 0.25, 3.0 / 8.0, 3.0 / 32.0];
        for (k, w) in want.iter().enumerate() {
            let r = density_rho(&model, 2, &Functional::FourierIndex(k + 1)).unwrap();
            assert_abs_diff_eq!(r, *w, epsilon = 1e-15);
        }
        let mut g = vec![0.0; 64];
        g[0] = 1.0;
        for n in [1usize, 3, 10] {
            let r = density_rho(&model, n, &Functional::GaussianCoefs(g.clone())).unwrap();
            assert_abs_diff_eq!(r, 0.5 / n as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_tail_is_an_error() {
        let model = ModelSpace::coordinate(Spectrum::explicit(vec![1.0, 0.5, 0.25]).unwrap());
        assert!(density_rho(&model, 3, &Functional::FourierIndex(1)).is_err());
        let padded = ModelSpace::coordinate(Spectrum::explicit(vec![1.0, 0.5]).unwrap());
        assert_eq!(
            RhoDensity::new(&padded.spectrum, 2).unwrap_err(),
            Error::Domain("rho_n needs 1 <= n < M (n = 2, M = 2)".into())
        );
    }

    #[test]
    fn point_density_is_bounded() {
        let model = ModelSpace::trig(Spectrum::geometric(0.9, 400).unwrap());
        let rho = RhoDensity::new(&model.spectrum, 7).unwrap();
        for i in 0..=500 {
            let x = i as f64 / 500.0;
            let r = rho.eval(&model, &Functional::PointEval(x)).unwrap();
            assert!((0.5 - 1e-12..=2.0).contains(&r), "rho({x}) = {r}");
        }
    }

    #[test]
    fn fourier_table_shape() {
        let t = fourier_density_table(&geo(64), 2, 64).unwrap();
        let want = [0.25, 0.25, 3.0 / 8.0, 3.0 / 32.0, 3.0 / 128.0];
        for (p, w) in t.raw.iter().zip(want) {
            assert_abs_diff_eq!(*p, w, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(t.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(t.probs.iter().all(|p| *p >= 0.0));

        let fin = Spectrum::explicit(vec![1.0, 0.5, 0.25, 0.125, 0.1]).unwrap();
        let t = fourier_density_table(&fin, 4, 5).unwrap();
        assert_eq!(t.raw, vec![0.125, 0.125, 0.125, 0.125, 0.5]);
        assert_abs_diff_eq!(t.normalization, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fourier_sampling() {
        let s = geo(64);
        let empty = sample_fourier(&s, 2, 0, &mut DrawRng::new(1)).unwrap();
        assert!(empty.is_empty());
        let big = sample_fourier(&s, 2, 100_000, &mut DrawRng::new(2)).unwrap();
        let ones = big.functionals.iter().filter(|l| **l == Functional::FourierIndex(1)).count();
        assert!((ones as f64 / 1e5 - 0.25).abs() < 0.01);
        let again = sample_fourier(&s, 2, 100_000, &mut DrawRng::new(2)).unwrap();
        assert_eq!(big, again);
    }

    #[test]
    fn weights_invert_density() {
        let trig = ModelSpace::trig(Spectrum::power_law(1.0, 64).unwrap());
        let mut rng = DrawRng::new(3);
        let d = sample_points_rho(&trig, 5, 200, &mut rng).unwrap();
        let rho = RhoDensity::new(&trig.spectrum, 5).unwrap();
        for (l, w) in d.functionals.iter().zip(&d.weights) {
            assert_abs_diff_eq!(w * rho.eval(&trig, l).unwrap(), 1.0, epsilon = 1e-12);
        }
        let coord = ModelSpace::coordinate(Spectrum::power_law(1.0, 64).unwrap());
        let d = sample_gaussian(&coord, 5, 200, &mut rng, true).unwrap();
        for (l, w) in d.functionals.iter().zip(&d.weights) {
            assert_abs_diff_eq!(w * rho.eval(&coord, l).unwrap(), 1.0, epsilon = 1e-12);
        }
        let d = sample_fourier(&coord.spectrum, 5, 200, &mut rng).unwrap();
        for (l, w) in d.functionals.iter().zip(&d.weights) {
            assert_abs_diff_eq!(w * rho.eval(&coord, l).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn acceptance_rate_near_half_for_flat_density() {
        // odd n with a tiny tail: rho_n is close to its mean 1, so about half
        // the proposals under envelope 2 are kept
        let mut vals = vec![1.0; 9];
        vals.extend(std::iter::repeat_n(1e-6, 8));
        let model = ModelSpace::trig(Spectrum::explicit(vals).unwrap());
        let s = sample_points_rho_counted(&model, 9, 5000, &mut DrawRng::new(4)).unwrap();
        let rate = 5000.0 / s.proposals as f64;
        assert!(rate >= 0.45, "acceptance rate {rate}");
        let mean: f64 = s
            .draw
            .functionals
            .iter()
            .zip(&s.draw.weights)
            .map(|(l, w)| w * density_rho(&model, 9, l).unwrap())
            .sum::<f64>()
            / 5000.0;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_points() {
        let a = sample_points_uniform(3, &mut DrawRng::new(9));
        let b = sample_points_uniform(3, &mut DrawRng::new(9));
        assert_eq!(a, b);
        assert!(a.weights.iter().all(|w| *w == 1.0));
        let big = sample_points_uniform(100_000, &mut DrawRng::new(10));
        let mean = big
            .functionals
            .iter()
            .map(|l| match l {
                Functional::PointEval(x) => *x,
                _ => unreachable!(),
            })
            .sum::<f64>()
            / 1e5;
        assert!((mean - 0.5).abs() < 0.005);
    }

    #[test]
    fn uniform_points_pass_kolmogorov_smirnov() {
        let d = sample_points_uniform(10_000, &mut DrawRng::new(crate::experiments::DEFAULT_SEED));
        let mut xs: Vec<f64> = d
            .functionals
            .iter()
            .map(|l| match l {
                Functional::PointEval(x) => *x,
                _ => unreachable!(),
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS statistic {ks}");
    }

    #[test]
    fn gaussian_coordinates_have_unit_variance() {
        let model = ModelSpace::coordinate(Spectrum::power_law(1.0, 16).unwrap());
        let d = sample_gaussian(&model, 4, 10_000, &mut DrawRng::new(12), false).unwrap();
        for k in 0..5 {
            let xs: Vec<f64> = d
                .functionals
                .iter()
                .map(|l| match l {
                    Functional::GaussianCoefs(g) => g[k],
                    _ => unreachable!(),
                })
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            assert!((var - 1.0).abs() < 0.05, "coordinate {k}: variance {var}");
        }
        assert_eq!(d, sample_gaussian(&model, 4, 10_000, &mut DrawRng::new(12), false).unwrap());
    }

    #[test]
    fn gaussian_density_concentrates_around_one() {
        // mean of rho_n over the plain Gaussian measure
        let model = ModelSpace::coordinate(Spectrum::power_law(1.0, 512).unwrap());
        let rho = RhoDensity::new(&model.spectrum, 16).unwrap();
        let d = sample_gaussian(&model, 16, 10_000, &mut DrawRng::new(13), false).unwrap();
        let mean = d.functionals.iter().map(|l| rho.eval(&model, l).unwrap()).sum::<f64>() / 1e4;
        assert!((mean - 1.0).abs() < 0.05, "mean rho {mean}");
    }

    /// (1/N) sum w_i l_i(f) l_i(h) estimates <f, h>_{L2}.
    fn unbiasedness(model: &ModelSpace, draw: &InfoDraw, seed: u64) {
        let mut rng = DrawRng::new(seed);
        let m = model.dim();
        let rows: Vec<Vec<f64>> = draw.functionals.iter().map(|l| l.basis_values(model, m).unwrap()).collect();
        for _ in 0..5 {
            let f: Vec<f64> = (0..m).map(|k| rng.sample::<f64, _>(StandardNormal) * model.spectrum.sigma_or_zero(k + 1)).collect();
            let h: Vec<f64> = (0..m).map(|k| rng.sample::<f64, _>(StandardNormal) * model.spectrum.sigma_or_zero(k + 1)).collect();
            let samples: Vec<f64> = rows
                .iter()
                .zip(&draw.weights)
                .map(|(b, w)| {
                    let lf: f64 = b.iter().zip(&f).map(|(b, c)| b * c).sum();
                    let lh: f64 = b.iter().zip(&h).map(|(b, c)| b * c).sum();
                    w * lf * lh
                })
                .collect();
            let nn = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / nn;
            let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (nn - 1.0)).sqrt();
            let exact: f64 = f.iter().zip(&h).map(|(a, b)| a * b).sum();
            assert!(
                (mean - exact).abs() <= 5.0 * sd / nn.sqrt(),
                "{:?}/{:?}: mean {mean} vs exact {exact} (se {})",
                draw.channel,
                draw.density,
                sd / nn.sqrt()
            );
        }
    }

    #[test]
    fn weighted_information_is_unbiased() {
        let fin = Spectrum::power_law(1.0, 24).unwrap().truncated();
        let trig = ModelSpace::trig(fin.clone());
        let coord = ModelSpace::coordinate(fin.clone());
        let n = 5;
        let count = 100_000;
        unbiasedness(&trig, &sample_points_rho(&trig, n, count, &mut DrawRng::new(21)).unwrap(), 31);
        unbiasedness(&trig, &sample_points_uniform(count, &mut DrawRng::new(22)), 32);
        unbiasedness(&coord, &sample_gaussian(&coord, n, count, &mut DrawRng::new(23), true).unwrap(), 33);
        unbiasedness(&coord, &sample_gaussian(&coord, n, count, &mut DrawRng::new(24), false).unwrap(), 34);
        unbiasedness(&coord, &sample_fourier(&fin, n, count, &mut DrawRng::new(25)).unwrap(), 35);
    }

    #[test]
    fn info_draw_json() {
        let model = ModelSpace::coordinate(geo(6));
        for d in [
            sample_fourier(&model.spectrum, 2, 5, &mut DrawRng::new(1)).unwrap(),
            sample_gaussian(&model, 2, 3, &mut DrawRng::new(2), true).unwrap(),
            sample_points_uniform(4, &mut DrawRng::new(3)),
        ] {
            let txt = serde_json::to_string(&d).unwrap();
            let back: InfoDraw = serde_json::from_str(&txt).unwrap();
            assert_eq!(back, d);
        }
        let txt = serde_json::to_string(&sample_fourier(&model.spectrum, 2, 2, &mut DrawRng::new(1)).unwrap()).unwrap();
        assert!(txt.starts_with(r#"{"channel":"fourier","density":{"kind":"rho_n","n":2},"functionals":["#));
    }
}
