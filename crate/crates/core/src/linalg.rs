//! Dense linear-algebra kernels on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative cutoff below which singular values are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Thin SVD with a truncated pseudoinverse.
#[derive(Debug, Clone)]
pub struct Pinv {
    u: DMatrix<f64>,
    v_t: DMatrix<f64>,
    singular: DVector<f64>,
    /// Number of rows of the factored matrix.
    rows: usize,
    cols: usize,
}

impl Pinv {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return Pinv {
                u: DMatrix::zeros(rows, 0),
                v_t: DMatrix::zeros(0, cols),
                singular: DVector::zeros(0),
                rows,
                cols,
            };
        }
        let svd = a.clone().svd(true, true);
        Pinv {
            u: svd.u.expect("u requested"),
            v_t: svd.v_t.expect("v_t requested"),
            singular: svd.singular_values,
            rows,
            cols,
        }
    }

    pub fn largest(&self) -> f64 {
        self.singular.iter().copied().fold(0.0, f64::max)
    }

    /// `k`-th largest singular value (1-based), zero past the rank.
    pub fn singular_value(&self, k: usize) -> f64 {
        let mut s: Vec<f64> = self.singular.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s.get(k - 1).copied().unwrap_or(0.0)
    }

    fn inverted(&self) -> DVector<f64> {
        let cut = RANK_TOL * self.largest();
        self.singular.map(|s| if s > cut { 1.0 / s } else { 0.0 })
    }

    /// `A^+ b` for a vector `b`.
    pub fn apply(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.rows);
        if self.singular.is_empty() {
            return DVector::zeros(self.cols);
        }
        let mut t = self.u.tr_mul(b);
        t.component_mul_assign(&self.inverted());
        self.v_t.tr_mul(&t)
    }

    /// `A^+ B` for a matrix `B`.
    pub fn apply_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(b.nrows(), self.rows);
        if self.singular.is_empty() {
            return DMatrix::zeros(self.cols, b.ncols());
        }
        let mut t = self.u.tr_mul(b);
        let inv = self.inverted();
        for (mut row, s) in t.row_iter_mut().zip(inv.iter()) {
            row *= *s;
        }
        self.v_t.tr_mul(&t)
    }
}

/// Largest singular value, via the symmetric eigenproblem of the Gram matrix
/// on the smaller side.
///
/// A matrix with at most one nonzero per row has orthogonal columns, so its
/// top singular value is the largest column norm.
pub fn top_singular_value(a: &DMatrix<f64>) -> f64 {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    if (0..r).all(|i| a.row(i).iter().filter(|v| **v != 0.0).count() <= 1) {
        return a.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
    }
    let gram = if r <= c { a * a.transpose() } else { a.tr_mul(a) };
    let lmax = gram.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    lmax.max(0.0).sqrt()
}

/// Largest eigenvalue of `diag(d) + B^T B` for `d >= 0` of length `m` and
/// `B` of shape `k x m`.
///
/// For `lambda > max d` the value `lambda` is an eigenvalue exactly when the
/// `k x k` matrix `B (lambda - diag d)^{-1} B^T` has eigenvalue one. Its top
/// eigenvalue `phi(lambda)` is convex and decreasing, so Newton steps from the
/// left converge monotonically while steps from the right may overshoot, so
/// every step is kept inside a bisection bracket. When `phi` stays below one
/// near `max d`, the answer is `max d` itself.
pub fn max_eig_diag_plus_gram(d: &[f64], b: &DMatrix<f64>) -> f64 {
    let m = d.len();
    assert_eq!(b.ncols(), m);
    if m == 0 {
        return 0.0;
    }
    let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let frob2 = b.norm_squared();
    if b.nrows() == 0 || frob2 == 0.0 {
        return d_max;
    }

    let phi = |lambda: f64| -> (f64, f64) {
        let scale: Vec<f64> = d.iter().map(|di| 1.0 / (lambda - di)).collect();
        let mut bw = b.clone();
        for (mut col, s) in bw.column_iter_mut().zip(&scale) {
            col *= s.sqrt();
        }
        let k_mat = &bw * bw.transpose();
        let eig = SymmetricEigen::new(k_mat);
        let (imax, top) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let v = eig.eigenvectors.column(imax);
        // phi'(lambda) = - || (lambda - D)^{-1} B^T v ||^2
        let btv = b.tr_mul(&v);
        let deriv = -btv.iter().zip(&scale).map(|(x, s)| (x * s).powi(2)).sum::<f64>();
        (top, deriv)
    };

    let mut lo = d_max;
    let mut hi = d_max + frob2;
    let mut lambda = hi;
    for _ in 0..200 {
        let (p, dp) = phi(lambda);
        if (p - 1.0).abs() <= 4.0 * f64::EPSILON {
            return lambda;
        }
        if p > 1.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
        let newton = if dp < 0.0 { lambda - (p - 1.0) / dp } else { f64::NAN };
        lambda = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    hi.max(d_max)
}

/// Extreme eigenvalues `(min, max)` of a symmetric operator by Lanczos with
/// full reorthogonalization.
pub fn lanczos_extremes<F>(dim: usize, steps: usize, mut matvec: F) -> (f64, f64)
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim == 0 {
        return (0.0, 0.0);
    }
    let steps = steps.min(dim).max(1);
    // deterministic start vector with no special alignment
    let mut q: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let nrm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= nrm);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; dim];
    basis.push(q);
    for j in 0..steps {
        matvec(&basis[j], &mut w);
        let a: f64 = w.iter().zip(&basis[j]).map(|(x, y)| x * y).sum();
        alpha.push(a);
        // full reorthogonalization, applied twice
        for _ in 0..2 {
            for v in &basis {
                let c: f64 = w.iter().zip(v).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if j + 1 == steps || b <= 1e-14 * a.abs().max(1.0) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let ev = t.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn pinv_solves_full_rank_systems() {
        let a = gaussian(12, 4, 1);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let b = &a * &x;
        let p = Pinv::new(&a);
        assert!((p.apply(&b) - &x).norm() < 1e-12);
        let bm = DMatrix::from_columns(&[b.clone(), b]);
        let xm = p.apply_mat(&bm);
        assert!((xm.column(1) - &x).norm() < 1e-12);
    }

    #[test]
    fn top_singular_value_matches_svd() {
        for (r, c) in [(5, 40), (40, 5), (7, 7)] {
            let a = gaussian(r, c, (r * c) as u64);
            let svd = a.clone().svd(false, false);
            let want = svd.singular_values.iter().copied().fold(0.0, f64::max);
            assert_relative_eq!(top_singular_value(&a), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn row_sparse_shortcut() {
        let a = DMatrix::from_row_slice(4, 3, &[0.0, 2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 0.0]);
        let svd = a.clone().svd(false, false);
        let want = svd.singular_values.iter().copied().fold(0.0, f64::max);
        assert_relative_eq!(top_singular_value(&a), want, max_relative = 1e-14);
    }

    #[test]
    fn secular_solver_matches_dense_eigen() {
        for (k, m, seed) in [(1, 1, 1), (3, 20, 2), (6, 50, 3), (4, 4, 4)] {
            let b = gaussian(k, m, seed) * 0.3;
            let d: Vec<f64> = (0..m).map(|i| 1.0 / ((i + 2) as f64).powi(2)).collect();
            let dense = DMatrix::from_diagonal(&DVector::from_vec(d.clone())) + b.tr_mul(&b);
            let want = dense.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert_relative_eq!(max_eig_diag_plus_gram(&d, &b), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn secular_solver_handles_orthogonal_perturbations() {
        // B only touches small diagonal entries and stays below the largest
        let d = vec![1.0, 0.1, 0.05];
        let b = DMatrix::from_row_slice(1, 3, &[0.0, 0.2, 0.1]);
        assert_relative_eq!(max_eig_diag_plus_gram(&d, &b), 1.0, max_relative = 1e-14);
        let z = DMatrix::zeros(2, 3);
        assert_eq!(max_eig_diag_plus_gram(&d, &z), 1.0);
        assert_eq!(max_eig_diag_plus_gram(&[], &DMatrix::zeros(2, 0)), 0.0);
    }

    #[test]
    fn lanczos_finds_extremes() {
        let a = gaussian(60, 60, 9);
        let s = (&a + a.transpose()) * 0.5;
        let ev = s.clone().symmetric_eigenvalues();
        let (lo, hi) = lanczos_extremes(60, 60, |x, y| {
            let v = &s * DVector::from_column_slice(x);
            y.copy_from_slice(v.as_slice());
        });
        assert_relative_eq!(lo, ev.min(), max_relative = 1e-10);
        assert_relative_eq!(hi, ev.max(), max_relative = 1e-10);
    }
}
