//! Weighted least squares recovery on `V_n = span{b_1..b_n}` and its exact
//! worst-case error over the unit ball of `H`.
//!
//! With `G_{ik} = sqrt(w_i) l_i(b_k)` for `k <= n` and
//! `T_{ik} = sqrt(w_i) l_i(b_k)` for `n < k <= M`, the estimator returns the
//! head coefficients `G^+ y`. For `f` in the unit ball the error splits into
//! a head part `-G^+ T c_tail` and the untouched tail `c_tail`; writing
//! `c_tail = D u` with `D = diag(sigma_{n+1}..sigma_M)` and `|u| <= 1`, the
//! worst case is the operator norm of `[-G^+ T D; D]`, i.e. the square root
//! of the largest eigenvalue of `D^2 + (G^+ T D)^T (G^+ T D)`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, DensitySpec, Functional, InfoDraw};
use crate::error::{Error, Result};
use crate::linalg::{self, Pinv, RANK_TOL};
use crate::model::{Basis, CoefVector, ModelSpace, TrigBasis};
use crate::spectrum::Spectrum;

/// Information matrices of one draw.
#[derive(Debug)]
pub struct InfoMatrices {
    g: DMatrix<f64>,
    t_raw: DMatrix<f64>,
    t_scaled: DMatrix<f64>,
    n: usize,
    m: usize,
    pinv: OnceLock<Pinv>,
}

impl Clone for InfoMatrices {
    fn clone(&self) -> Self {
        InfoMatrices {
            g: self.g.clone(),
            t_raw: self.t_raw.clone(),
            t_scaled: self.t_scaled.clone(),
            n: self.n,
            m: self.m,
            pinv: OnceLock::new(),
        }
    }
}

impl InfoMatrices {
    /// Build from raw matrices; `tail_sigma` holds `sigma_{n+1..M}`.
    pub fn from_parts(g: DMatrix<f64>, t_raw: DMatrix<f64>, tail_sigma: &[f64]) -> Result<Self> {
        if g.nrows() != t_raw.nrows() || t_raw.ncols() != tail_sigma.len() {
            return Err(Error::Dimension(format!(
                "G is {}x{}, T is {}x{}, {} tail sigmas",
                g.nrows(),
                g.ncols(),
                t_raw.nrows(),
                t_raw.ncols(),
                tail_sigma.len()
            )));
        }
        let mut t_scaled = t_raw.clone();
        for (mut col, s) in t_scaled.column_iter_mut().zip(tail_sigma) {
            col *= *s;
        }
        let n = g.ncols();
        let m = n + t_raw.ncols();
        Ok(InfoMatrices {
            g,
            t_raw,
            t_scaled,
            n,
            m,
            pinv: OnceLock::new(),
        })
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn t_raw(&self) -> &DMatrix<f64> {
        &self.t_raw
    }

    pub fn t_scaled(&self) -> &DMatrix<f64> {
        &self.t_scaled
    }

    /// `(N, n, M)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.g.nrows(), self.n, self.m)
    }

    pub fn pinv(&self) -> &Pinv {
        self.pinv.get_or_init(|| Pinv::new(&self.g))
    }

    fn alpha_and_pass(&self) -> (f64, bool) {
        let p = self.pinv();
        let alpha = if self.n == 0 { 0.0 } else { p.singular_value(self.n) };
        (alpha, alpha > RANK_TOL * p.largest() && alpha > 0.0)
    }
}

/// Build `G` and `T` for `draw` against the first `M` basis functions.
pub fn assemble(draw: &InfoDraw, model: &ModelSpace, n: usize) -> Result<InfoMatrices> {
    let m = model.dim();
    if n == 0 || n > m {
        return Err(Error::Dimension(format!("need 1 <= n <= M (n = {n}, M = {m})")));
    }
    if draw.channel == Channel::Point && model.basis != Basis::Trig {
        return Err(Error::Unsupported("point information needs the trigonometric basis".into()));
    }
    let rows = draw.len();
    let mut g = DMatrix::zeros(rows, n);
    let mut t_raw = DMatrix::zeros(rows, m - n);
    let mut buf = vec![0.0; m];
    for (i, (l, w)) in draw.functionals.iter().zip(&draw.weights).enumerate() {
        let sw = w.sqrt();
        match l {
            Functional::FourierIndex(k) => {
                if *k == 0 || *k > m {
                    continue;
                }
                if *k <= n {
                    g[(i, k - 1)] = sw;
                } else {
                    t_raw[(i, k - n - 1)] = sw;
                }
            }
            Functional::GaussianCoefs(v) if v.len() < m => {
                return Err(Error::Dimension(format!("gaussian functional of length {} < M = {m}", v.len())));
            }
            Functional::PointEval(x) => {
                TrigBasis.eval_all_into(*x, &mut buf);
                fill_row(&mut g, &mut t_raw, i, n, sw, &buf);
            }
            Functional::GaussianCoefs(v) => fill_row(&mut g, &mut t_raw, i, n, sw, &v[..m]),
        }
    }
    let tail_sigma: Vec<f64> = ((n + 1)..=m).map(|k| model.spectrum.sigma_or_zero(k)).collect();
    InfoMatrices::from_parts(g, t_raw, &tail_sigma)
}

fn fill_row(g: &mut DMatrix<f64>, t: &mut DMatrix<f64>, i: usize, n: usize, sw: f64, vals: &[f64]) {
    for (k, v) in vals.iter().enumerate() {
        if k < n {
            g[(i, k)] = sw * v;
        } else {
            t[(i, k - n)] = sw * v;
        }
    }
}

/// Empirical spectral constants: `alpha_hat = s_n(G)`, `beta_hat = s_1(T_scaled)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub pass: bool,
}

pub fn spectral_check(mats: &InfoMatrices) -> SpectralCheck {
    let (alpha_hat, pass) = mats.alpha_and_pass();
    SpectralCheck {
        alpha_hat,
        beta_hat: linalg::top_singular_value(&mats.t_scaled),
        pass,
    }
}

/// Head coefficients `G^+ y`, zero-padded to length `M`.
pub fn solve(mats: &InfoMatrices, measurements: &[f64]) -> Result<CoefVector> {
    let (alpha_hat, pass) = mats.alpha_and_pass();
    if !pass {
        return Err(Error::Reconstruction { alpha_hat });
    }
    if measurements.len() != mats.g.nrows() {
        return Err(Error::Dimension(format!(
            "{} measurements for {} functionals",
            measurements.len(),
            mats.g.nrows()
        )));
    }
    let head = mats.pinv().apply(&DVector::from_column_slice(measurements));
    let mut c = vec![0.0; mats.m];
    c[..mats.n].copy_from_slice(head.as_slice());
    Ok(CoefVector(c))
}

/// Worst-case `L2` error over the unit ball of `H`, truncated at `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WceValue {
    pub value: f64,
    /// Reconstruction failed; `value` is the diameter fallback `sigma_1`.
    pub failed: bool,
}

pub fn wce_exact(mats: &InfoMatrices, spectrum: &Spectrum) -> WceValue {
    let (_, pass) = mats.alpha_and_pass();
    if !pass {
        return WceValue {
            value: spectrum.sigma_or_zero(1),
            failed: true,
        };
    }
    let n = mats.n;
    let d: Vec<f64> = ((n + 1)..=mats.m).map(|k| spectrum.sigma_or_zero(k)).collect();
    let mut b = mats.pinv().apply_mat(&mats.t_raw);
    for (mut col, s) in b.column_iter_mut().zip(&d) {
        col *= *s;
    }
    let d2: Vec<f64> = d.iter().map(|s| s * s).collect();
    WceValue {
        value: linalg::max_eig_diag_plus_gram(&d2, &b).sqrt(),
        failed: false,
    }
}

/// `sigma_{n+1} + beta_hat / alpha_hat`, or infinity when the check failed.
pub fn wce_bound(check: &SpectralCheck, spectrum: &Spectrum, n: usize) -> f64 {
    if !check.pass {
        return f64::INFINITY;
    }
    spectrum.sigma_or_zero(n + 1) + check.beta_hat / check.alpha_hat
}

/// `|| c - A_N c ||_{L2}` with measurements supplied by the caller.
pub fn local_error(mats: &InfoMatrices, c: &CoefVector, measurements: &[f64]) -> Result<f64> {
    let rec = solve(mats, measurements)?;
    Ok(c.as_slice()
        .iter()
        .zip(rec.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `max_x |f(x) - (A_N f)(x)|` over the grid `x_i = i / grid`, `i < grid`.
pub fn sup_error(model: &ModelSpace, mats: &InfoMatrices, c: &CoefVector, measurements: &[f64], grid: usize) -> Result<f64> {
    if model.basis != Basis::Trig {
        return Err(Error::Unsupported("sup error needs the trigonometric basis".into()));
    }
    let rec = solve(mats, measurements)?;
    let diff = CoefVector(c.as_slice().iter().zip(rec.as_slice()).map(|(a, b)| a - b).collect());
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        let x = i as f64 / grid as f64;
        worst = worst.max(model.eval_function(&diff, x)?.abs());
    }
    Ok(worst)
}

/// Spectral norm of `(1/N) sum_i y_i y_i^T - E` over the truncated index set,
/// where `(y_i)_k = sqrt(w_i) l_i(b_k)` for `k <= n`,
/// `sqrt(w_i) sigma_k l_i(b_k) / gamma_n` for `k > n`,
/// `gamma_n = max(sigma_{n+1}, sqrt(tail_sum(n) / n))` and
/// `E = diag(1, .., 1, sigma_k^2 / gamma_n^2, ..)`.
///
/// Coordinate (Fourier) information gives a diagonal matrix. Other channels
/// use a dense eigensolver for `M <= 600` and Lanczos beyond.
pub fn concentration_stat(draw: &InfoDraw, model: &ModelSpace, n: usize) -> Result<f64> {
    let m = model.dim();
    if n == 0 || n >= m {
        return Err(Error::Domain(format!("need 1 <= n < M (n = {n}, M = {m})")));
    }
    if draw.is_empty() {
        return Err(Error::Domain("empty draw".into()));
    }
    let spectrum = &model.spectrum;
    let tail = spectrum.tail_sum(n).value;
    let gamma = spectrum.sigma_or_zero(n + 1).max((tail / n as f64).sqrt());
    if gamma <= 0.0 {
        return Err(Error::ZeroTail { n });
    }
    let scale: Vec<f64> = (1..=m)
        .map(|k| if k <= n { 1.0 } else { spectrum.sigma_or_zero(k) / gamma })
        .collect();
    let expect: Vec<f64> = scale.iter().map(|s| s * s).collect();
    let count = draw.len() as f64;

    if draw.channel == Channel::Fourier {
        let mut diag = vec![0.0; m];
        for (l, w) in draw.functionals.iter().zip(&draw.weights) {
            if let Functional::FourierIndex(k) = l {
                if *k >= 1 && *k <= m {
                    diag[k - 1] += w * scale[k - 1].powi(2) / count;
                }
            }
        }
        return Ok(diag
            .iter()
            .zip(&expect)
            .map(|(a, e)| (a - e).abs())
            .fold(0.0, f64::max));
    }

    let mut y = DMatrix::zeros(draw.len(), m);
    let mut buf = vec![0.0; m];
    for (i, (l, w)) in draw.functionals.iter().zip(&draw.weights).enumerate() {
        l.basis_values_into(model, &mut buf)?;
        let sw = w.sqrt();
        for k in 0..m {
            y[(i, k)] = sw * buf[k] * scale[k];
        }
    }
    if m <= 600 {
        let mut a = y.tr_mul(&y) / count;
        for k in 0..m {
            a[(k, k)] -= expect[k];
        }
        let ev = a.symmetric_eigenvalues();
        return Ok(ev.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    let (lo, hi) = linalg::lanczos_extremes(m, 300, |x, out| {
        let xv = DVector::from_column_slice(x);
        let yx = &y * xv;
        let r = y.tr_mul(&yx) / count;
        for k in 0..m {
            out[k] = r[k] - expect[k] * x[k];
        }
    });
    Ok(lo.abs().max(hi.abs()))
}

/// One row of a worst-case-error experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WceReport {
    pub channel: Channel,
    pub density: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub wce_exact: f64,
    pub wce_bound: f64,
    pub theorem_bound: f64,
    pub truncation_bias: f64,
    pub pass: bool,
    pub seed: u64,
}

impl WceReport {
    /// `sigma_{N+1} - bias - 1e-9 <= wce_exact <= sigma_{n+1} + beta/alpha + 1e-9`
    /// on successful reconstructions; failed ones are not constrained.
    pub fn sandwich_holds(&self, spectrum: &Spectrum) -> bool {
        if !self.pass {
            return true;
        }
        let lower = spectrum.sigma_or_zero(self.big_n + 1) - self.truncation_bias - 1e-9;
        lower <= self.wce_exact && self.wce_exact <= self.wce_bound + 1e-9
    }
}

/// Assemble, check and evaluate one draw.
pub fn wce_report(draw: &InfoDraw, model: &ModelSpace, n: usize, theorem_bound: f64) -> Result<WceReport> {
    let mats = assemble(draw, model, n)?;
    let check = spectral_check(&mats);
    let wce = wce_exact(&mats, &model.spectrum);
    let m = model.dim();
    let sigma_beyond = if model.spectrum.is_finite() {
        0.0
    } else {
        model.spectrum.sigma_or_zero(m + 1)
    };
    let truncation_bias = if check.pass {
        sigma_beyond * (1.0 + check.beta_hat / check.alpha_hat)
    } else {
        sigma_beyond
    };
    Ok(WceReport {
        channel: draw.channel,
        density: density_label(&draw.density),
        n,
        big_n: draw.len(),
        m,
        alpha_hat: check.alpha_hat,
        beta_hat: check.beta_hat,
        wce_exact: wce.value,
        wce_bound: wce_bound(&check, &model.spectrum, n),
        theorem_bound,
        truncation_bias,
        pass: check.pass,
        seed: draw.seed,
    })
}

fn density_label(d: &DensitySpec) -> String {
    d.name().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{sample_gaussian, sample_points_rho, DrawRng};
    use approx::assert_abs_diff_eq;

    fn fourier_draw(indices: &[usize], weights: &[f64]) -> InfoDraw {
        InfoDraw::from_parts(
            indices.iter().map(|k| Functional::FourierIndex(*k)).collect(),
            weights.to_vec(),
            DensitySpec::RhoN { n: 1 },
        )
        .unwrap()
    }

    #[test]
    fn optimal_information_gives_identity() {
        let model = ModelSpace::coordinate(Spectrum::power_law(1.0, 32).unwrap());
        let d = fourier_draw(&[1, 2, 3, 4], &[1.0; 4]);
        let mats = assemble(&d, &model, 4).unwrap();
        assert_eq!(mats.g(), &DMatrix::identity(4, 4));
        assert!(mats.t_raw().iter().all(|v| *v == 0.0));
        let chk = spectral_check(&mats);
        assert_eq!((chk.alpha_hat, chk.beta_hat, chk.pass), (1.0, 0.0, true));
        let w = wce_exact(&mats, &model.spectrum);
        assert_abs_diff_eq!(w.value, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn point_draw_first_column_is_sqrt_weights() {
        let model = ModelSpace::trig(Spectrum::power_law(1.0, 64).unwrap());
        let d = sample_points_rho(&model, 5, 30, &mut DrawRng::new(1)).unwrap();
        let mats = assemble(&d, &model, 5).unwrap();
        for (i, w) in d.weights.iter().enumerate() {
            assert_abs_diff_eq!(mats.g()[(i, 0)], w.sqrt(), epsilon = 1e-15);
        }
        for (k, col) in mats.t_scaled().column_iter().enumerate() {
            let s = model.spectrum.sigma(5 + k + 1).unwrap();
            for (a, b) in col.iter().zip(mats.t_raw().column(k).iter()) {
                assert_abs_diff_eq!(*a, s * b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn plain_gaussian_matrix_is_raw_draw() {
        let model = ModelSpace::coordinate(Spectrum::power_law(1.0, 16).unwrap());
        let d = sample_gaussian(&model, 4, 8, &mut DrawRng::new(2), false).unwrap();
        let mats = assemble(&d, &model, 4).unwrap();
        for (i, l) in d.functionals.iter().enumerate() {
            let Functional::GaussianCoefs(g) = l else { unreachable!() };
            for k in 0..4 {
                assert_eq!(mats.g()[(i, k)], g[k]);
            }
        }
    }

    #[test]
    fn repeated_row_is_rank_deficient() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let mats = InfoMatrices::from_parts(g, DMatrix::zeros(2, 1), &[0.1]).unwrap();
        let chk = spectral_check(&mats);
        assert!(!chk.pass);
        assert!(chk.alpha_hat < 1e-12);
        assert_eq!(solve(&mats, &[1.0, 1.0]), Err(Error::Reconstruction { alpha_hat: chk.alpha_hat }));
        let spec = Spectrum::explicit(vec![1.0, 0.5, 0.1]).unwrap();
        let w = wce_exact(&mats, &spec);
        assert!(w.failed);
        assert_eq!(w.value, 1.0);
        assert_eq!(wce_bound(&chk, &spec, 2), f64::INFINITY);
    }

    #[test]
    fn solve_examples() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let mats = InfoMatrices::from_parts(g, DMatrix::zeros(2, 0), &[]).unwrap();
        assert_eq!(solve(&mats, &[2.0, 4.0]).unwrap().0, vec![1.0, 2.0]);
        assert_eq!(solve(&mats, &[0.0, 0.0]).unwrap().0, vec![0.0, 0.0]);
    }

    #[test]
    fn two_by_one_block_by_hand() {
        // n = 1, M = 2, G = (1), T = (t), sigma_2 = s
        let (t, s) = (0.7, 0.3);
        let g = DMatrix::from_row_slice(1, 1, &[1.0]);
        let mats = InfoMatrices::from_parts(g, DMatrix::from_row_slice(1, 1, &[t]), &[s]).unwrap();
        let spec = Spectrum::explicit(vec![1.0, s]).unwrap();
        let w = wce_exact(&mats, &spec);
        assert_abs_diff_eq!(w.value, s * (1.0 + t * t).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn no_tail_means_no_error() {
        let spec = Spectrum::explicit(vec![1.0, 0.5, 0.25]).unwrap();
        let model = ModelSpace::coordinate(spec.clone());
        let d = sample_gaussian(&ModelSpace::coordinate(Spectrum::power_law(1.0, 4).unwrap()), 3, 6, &mut DrawRng::new(3), false)
            .unwrap();
        let mats = assemble(&d, &model, 3).unwrap();
        assert_eq!(wce_exact(&mats, &spec).value, 0.0);
    }

    #[test]
    fn wce_bound_arithmetic() {
        let spec = Spectrum::explicit(vec![1.0, 0.2, 0.1]).unwrap();
        let c = SpectralCheck {
            alpha_hat: 1.0,
            beta_hat: 0.0,
            pass: true,
        };
        assert_eq!(wce_bound(&c, &spec, 1), 0.2);
        let c = SpectralCheck {
            alpha_hat: 0.5,
            beta_hat: 0.1,
            pass: true,
        };
        assert_abs_diff_eq!(wce_bound(&c, &spec, 1), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn concentration_single_draw_is_positive() {
        let spec = Spectrum::geometric(0.5, 32).unwrap();
        let model = ModelSpace::coordinate(spec.clone());
        let d = crate::channels::sample_fourier(&spec, 4, 1, &mut DrawRng::new(4)).unwrap();
        assert!(concentration_stat(&d, &model, 4).unwrap() > 0.0);
    }

    #[test]
    fn concentration_dense_and_lanczos_agree() {
        let model = ModelSpace::trig(Spectrum::power_law(1.0, 700).unwrap());
        let d = sample_points_rho(&model, 8, 120, &mut DrawRng::new(5)).unwrap();
        let lanczos = concentration_stat(&d, &model, 8).unwrap();
        // dense reference
        let small = ModelSpace::trig(model.spectrum.clone());
        let m = small.dim();
        let tail = small.spectrum.tail_sum(8).value;
        let gamma = small.spectrum.sigma(9).unwrap().max((tail / 8.0).sqrt());
        let mut a = DMatrix::<f64>::zeros(m, m);
        for (l, w) in d.functionals.iter().zip(&d.weights) {
            let b = l.basis_values(&small, m).unwrap();
            let y: Vec<f64> = (0..m)
                .map(|k| if k < 8 { w.sqrt() * b[k] } else { w.sqrt() * b[k] * small.spectrum.sigma(k + 1).unwrap() / gamma })
                .collect();
            let yv = DVector::from_vec(y);
            a += &yv * yv.transpose() / d.len() as f64;
        }
        for k in 0..m {
            let e = if k < 8 { 1.0 } else { (small.spectrum.sigma(k + 1).unwrap() / gamma).powi(2) };
            a[(k, k)] -= e;
        }
        let dense = a.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert_abs_diff_eq!(lanczos, dense, epsilon = 1e-8 * dense);
    }
}
