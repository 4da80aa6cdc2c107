//! One-dimensional moving least squares.
//!
//! At a query `x` the window is the `ceil(kappa (m + 1))` points nearest to
//! `x` (taken from both sides), `delta` is twice the distance to the farthest
//! of them and the weights are `Phi((x - y) / delta)` with
//! `Phi(t) = (1 - t^2)_+^2`. The value is that of the weighted least-squares
//! polynomial of degree `m` at `x`, fitted in the coordinate `(y - x) / delta`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sobolev::PointSet;

/// Default window multiplier.
pub const DEFAULT_KAPPA: f64 = 2.0;

/// Compactly supported weight profile `(1 - t^2)_+^2`.
pub fn bump(t: f64) -> f64 {
    let u = 1.0 - t * t;
    if u > 0.0 { u * u } else { 0.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlsModel {
    xs: Vec<f64>,
    fs: Vec<f64>,
    degree: usize,
    kappa: f64,
    window: usize,
}

/// Prepare an MLS model. `samples[i]` is the value at the `i`-th point of
/// `P` in sorted order, i.e. at `P.xs()[i]`.
pub fn mls_fit(p: &PointSet, samples: &[f64], degree: usize, kappa: f64) -> Result<MlsModel> {
    let xs = p
        .xs()
        .ok_or_else(|| Error::Unsupported("moving least squares is one-dimensional".into()))?;
    if samples.len() != xs.len() {
        return Err(Error::Dimension(format!("{} samples for {} points", samples.len(), xs.len())));
    }
    if !(kappa >= 1.0) {
        return Err(Error::Domain(format!("window multiplier {kappa} below 1")));
    }
    let window = (kappa * (degree + 1) as f64).ceil() as usize;
    if xs.len() < window {
        return Err(Error::InsufficientPoints {
            needed: window,
            have: xs.len(),
        });
    }
    Ok(MlsModel {
        xs: xs.to_vec(),
        fs: samples.to_vec(),
        degree,
        kappa,
        window,
    })
}

/// Sample `f` on `P` and fit.
pub fn mls_fit_fn<F: Fn(f64) -> f64>(p: &PointSet, f: F, degree: usize, kappa: f64) -> Result<MlsModel> {
    let samples: Vec<f64> = p
        .xs()
        .ok_or_else(|| Error::Unsupported("moving least squares is one-dimensional".into()))?
        .iter()
        .map(|x| f(*x))
        .collect();
    mls_fit(p, &samples, degree, kappa)
}

impl MlsModel {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Index range `[lo, hi)` of the window around `x`.
    pub fn window_at(&self, x: f64) -> (usize, usize) {
        let n = self.xs.len();
        let mut hi = self.xs.partition_point(|v| *v < x);
        let mut lo = hi;
        while hi - lo < self.window {
            let take_left = if lo == 0 {
                false
            } else if hi == n {
                true
            } else {
                x - self.xs[lo - 1] <= self.xs[hi] - x
            };
            if take_left {
                lo -= 1;
            } else {
                hi += 1;
            }
        }
        (lo, hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.window_at(x);
        let pts = &self.xs[lo..hi];
        let far = pts.iter().map(|y| (y - x).abs()).fold(0.0, f64::max);
        if far == 0.0 {
            return self.fs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        }
        let delta = 2.0 * far;
        let cols = self.degree + 1;
        let mut a = DMatrix::zeros(hi - lo, cols);
        let mut b = DVector::zeros(hi - lo);
        for (r, (y, f)) in pts.iter().zip(&self.fs[lo..hi]).enumerate() {
            let u = (y - x) / delta;
            let sw = bump(u).sqrt();
            let mut pw = sw;
            for c in 0..cols {
                a[(r, c)] = pw;
                pw *= u;
            }
            b[r] = sw * f;
        }
        // the constant coefficient is the value at u = 0
        let svd = a.svd(true, true);
        let sol = svd.solve(&b, 1e-13).expect("both factors computed");
        sol[0]
    }
}

pub fn mls_eval(model: &MlsModel, x: f64) -> f64 {
    model.eval(x)
}

/// Discrete `L_q` error over the nodes `i / (grid - 1)`; `q = inf` gives the
/// maximum.
pub fn mls_error<F: Fn(f64) -> f64>(f_true: F, model: &MlsModel, q: f64, grid: usize) -> Result<f64> {
    if grid < 64 {
        return Err(Error::Domain(format!("evaluation grid of {grid} < 64 nodes")));
    }
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("norm exponent {q} below 1")));
    }
    let errs = (0..grid).map(|i| {
        let x = i as f64 / (grid - 1) as f64;
        (f_true(x) - model.eval(x)).abs()
    });
    if q.is_infinite() {
        Ok(errs.fold(0.0, f64::max))
    } else {
        Ok((errs.map(|e| e.powf(q)).sum::<f64>() / grid as f64).powf(1.0 / q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn uniform(n: usize, seed: u64) -> PointSet {
        PointSet::uniform(1, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn reproduces_constants() {
        let p = uniform(20, 1);
        let m = mls_fit_fn(&p, |_| 3.5, 1, DEFAULT_KAPPA).unwrap();
        for i in 0..=100 {
            assert_abs_diff_eq!(m.eval(i as f64 / 100.0), 3.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn reproduces_polynomials_of_degree_m() {
        for m in 0..=3usize {
            for seed in 0..20 {
                let p = uniform(3 * (m + 1) + seed as usize, seed);
                let f = |x: f64| (0..=m).map(|j| (j as f64 + 1.0) * (x - 0.3).powi(j as i32)).sum::<f64>();
                let model = mls_fit_fn(&p, f, m, DEFAULT_KAPPA).unwrap();
                assert!(mls_error(f, &model, f64::INFINITY, 257).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn single_window_is_a_global_fit() {
        // kappa (m + 1) = |P|: every query sees all points
        let p = uniform(6, 2);
        let model = mls_fit_fn(&p, |x| x * x, 1, 3.0).unwrap();
        assert_eq!(model.window(), 6);
        for x in [0.0, 0.4, 1.0] {
            assert_eq!(model.window_at(x), (0, 6));
        }
    }

    #[test]
    fn windows_are_nearest_points() {
        let p = PointSet::new_1d(vec![0.0, 0.1, 0.2, 0.5, 0.9, 1.0]).unwrap();
        let model = mls_fit(&p, &[0.0; 6], 1, 1.5).unwrap();
        assert_eq!(model.window(), 3);
        assert_eq!(model.window_at(0.0), (0, 3));
        assert_eq!(model.window_at(0.45), (1, 4));
        assert_eq!(model.window_at(1.0), (3, 6));
    }

    #[test]
    fn insufficient_points() {
        let p = uniform(5, 3);
        assert_eq!(
            mls_fit_fn(&p, |x| x, 2, 2.0),
            Err(Error::InsufficientPoints { needed: 6, have: 5 })
        );
    }

    #[test]
    fn value_at_sample_is_within_window_residual() {
        let p = uniform(200, 4);
        let f = |x: f64| (2.0 * PI * x).sin();
        let model = mls_fit_fn(&p, f, 2, DEFAULT_KAPPA).unwrap();
        for &x in p.xs().unwrap().iter().step_by(17) {
            let (lo, hi) = model.window_at(x);
            // residual bound: a quadratic fit on a window of width w leaves
            // at most the cubic Taylor remainder
            let w = p.xs().unwrap()[hi - 1] - p.xs().unwrap()[lo];
            let bound = (2.0 * PI).powi(3) * w.powi(3) / 6.0;
            assert!((model.eval(x) - f(x)).abs() <= bound, "x = {x}");
        }
    }

    #[test]
    fn sup_error_dominates_l1_error() {
        let p = uniform(64, 5);
        let f = |x: f64| (2.0 * PI * x).sin();
        let model = mls_fit_fn(&p, f, 2, DEFAULT_KAPPA).unwrap();
        let e1 = mls_error(f, &model, 1.0, 128).unwrap();
        let einf = mls_error(f, &model, f64::INFINITY, 128).unwrap();
        assert!(e1 <= einf);
        assert!(matches!(mls_error(f, &model, 1.0, 32), Err(Error::Domain(_))));
    }

    #[test]
    fn more_points_give_smaller_errors() {
        let f = |x: f64| (2.0 * PI * x).sin();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut better = 0;
        for _ in 0..100 {
            let coarse = PointSet::uniform(1, 1 << 7, &mut rng).unwrap();
            let fine = PointSet::uniform(1, 1 << 10, &mut rng).unwrap();
            let ec = mls_error(f, &mls_fit_fn(&coarse, f, 2, DEFAULT_KAPPA).unwrap(), f64::INFINITY, 256).unwrap();
            let ef = mls_error(f, &mls_fit_fn(&fine, f, 2, DEFAULT_KAPPA).unwrap(), f64::INFINITY, 256).unwrap();
            if ef < ec {
                better += 1;
            }
        }
        assert!(better >= 95, "{better} of 100");
    }
}
