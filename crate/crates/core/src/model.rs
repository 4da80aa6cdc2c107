//! Trigonometric basis on `[0, 1]`, coefficient vectors and the model space
//! that pairs a spectrum with a basis.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// `b_1 = 1`, `b_{2j} = sqrt2 cos(2 pi j x)`, `b_{2j+1} = sqrt2 sin(2 pi j x)`.
///
/// With this ordering every odd `n` covers whole cosine/sine pairs, so
/// `sum_{k<=n} b_k(x)^2 = n` for every `x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrigBasis;

impl TrigBasis {
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        assert!(k >= 1, "basis index starts at 1");
        if k == 1 {
            return 1.0;
        }
        let arg = 2.0 * PI * frac_mul(k / 2, x);
        if k % 2 == 0 {
            SQRT_2 * arg.cos()
        } else {
            SQRT_2 * arg.sin()
        }
    }

    /// `b_1(x), ..., b_m(x)` written into `out[..m]`.
    ///
    /// Multiples of the angle are generated by rotation and re-anchored with a
    /// direct `sin_cos` every few steps, so the error stays near machine
    /// precision for large `m`.
    pub fn eval_all_into(&self, x: f64, out: &mut [f64]) {
        const ANCHOR: usize = 32;
        let m = out.len();
        if m == 0 {
            return;
        }
        out[0] = 1.0;
        let theta = 2.0 * PI * x;
        let (s1, c1) = theta.sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        let mut j = 1usize;
        while 2 * j <= m {
            if j % ANCHOR == 1 {
                let (sj, cj) = (2.0 * PI * frac_mul(j, x)).sin_cos();
                s = sj;
                c = cj;
            } else {
                let (sn, cn) = (s * c1 + c * s1, c * c1 - s * s1);
                s = sn;
                c = cn;
            }
            out[2 * j - 1] = SQRT_2 * c;
            if 2 * j < m {
                out[2 * j] = SQRT_2 * s;
            }
            j += 1;
        }
    }

    pub fn eval_all(&self, x: f64, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        self.eval_all_into(x, &mut out);
        out
    }
}

/// Fractional part of `j * x`, with the rounding error of the product
/// recovered by a fused multiply-add so large frequencies keep full accuracy.
fn frac_mul(j: usize, x: f64) -> f64 {
    let j = j as f64;
    let p = j * x;
    let err = j.mul_add(x, -p);
    (p - p.floor()) + err
}

/// How basis functions are realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Trig,
    /// Abstract coordinates: `b_k` is the k-th unit vector of sequence space.
    Coordinate,
}

/// Coefficients `c_1..c_M` against the `L2`-orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefVector(pub Vec<f64>);

impl CoefVector {
    pub fn zeros(m: usize) -> Self {
        CoefVector(vec![0.0; m])
    }

    /// The `k`-th unit vector (1-based) in dimension `m`.
    pub fn unit(k: usize, m: usize) -> Self {
        let mut c = vec![0.0; m];
        c[k - 1] = 1.0;
        CoefVector(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Orthogonal projection onto the span of the first `n` basis functions.
    pub fn project_head(&self, n: usize) -> CoefVector {
        let n = n.min(self.0.len());
        let mut c = self.0.clone();
        c[n..].iter_mut().for_each(|v| *v = 0.0);
        CoefVector(c)
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// The pair `(H, L2)`: a spectrum plus the basis realising it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub spectrum: Spectrum,
    pub basis: Basis,
}

impl ModelSpace {
    pub fn new(spectrum: Spectrum, basis: Basis) -> Self {
        ModelSpace { spectrum, basis }
    }

    pub fn trig(spectrum: Spectrum) -> Self {
        Self::new(spectrum, Basis::Trig)
    }

    pub fn coordinate(spectrum: Spectrum) -> Self {
        Self::new(spectrum, Basis::Coordinate)
    }

    /// Working dimension `M`.
    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// `f(x) = sum_{k<=M} c_k b_k(x)`.
    pub fn eval_function(&self, c: &CoefVector, x: f64) -> Result<f64> {
        if self.basis != Basis::Trig {
            return Err(Error::Unsupported("point evaluation needs the trigonometric basis".into()));
        }
        let b = TrigBasis.eval_all(x, c.len());
        Ok(b.iter().zip(&c.0).map(|(b, c)| b * c).sum())
    }

    /// `(||f||_{L2}, ||f||_H)` with `||f||_H^2 = sum c_k^2 / sigma_k^2`.
    pub fn norms(&self, c: &CoefVector) -> Result<(f64, f64)> {
        if c.len() > self.dim() {
            return Err(Error::Dimension(format!(
                "coefficient vector of length {} exceeds M = {}",
                c.len(),
                self.dim()
            )));
        }
        let l2 = c.l2_norm();
        let mut h2 = 0.0;
        for (k, ck) in c.0.iter().enumerate() {
            if *ck != 0.0 {
                let s = self.spectrum.sigma(k + 1)?;
                h2 += (ck / s).powi(2);
            }
        }
        Ok((l2, h2.sqrt()))
    }
}
