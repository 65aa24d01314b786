//! Dense complex linear algebra on top of nalgebra: SVD null spaces,
//! numerical rank, block assembly and seeded Gaussian draws.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type CMat = DMatrix<Complex64>;

/// Numerical thresholds. `rank_rtol = None` selects the usual
/// `max(rows, cols) * eps` relative to the largest singular value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_rtol: Option<f64>,
    /// Relative tolerance on alignment and inverse identities.
    pub identity: f64,
    /// Maximum relative symbol recovery error in noiseless runs.
    pub recovery: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_rtol: None, identity: 1e-9, recovery: 1e-8 }
    }
}

impl Tolerances {
    pub fn rank_threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        let rtol = self
            .rank_rtol
            .unwrap_or(rows.max(cols) as f64 * f64::EPSILON);
        rtol * sigma_max
    }
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn rank(a: &CMat, tol: &Tolerances) -> usize {
    let s = singular_values(a);
    let Some(&max) = s.first() else { return 0 };
    let thr = tol.rank_threshold(a.nrows(), a.ncols(), max);
    s.iter().filter(|&&x| x > thr).count()
}

/// Orthonormal basis (as columns) of `{x : a x = 0}`.
pub fn null_space(a: &CMat, tol: &Tolerances) -> CMat {
    let (m, n) = a.shape();
    if n == 0 {
        return zeros(0, 0);
    }
    if m == 0 {
        return CMat::identity(n, n);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let rows = m.max(n);
    let mut padded = zeros(rows, n);
    padded.view_mut((0, 0), (m, n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let max = sigma.iter().copied().fold(0.0, f64::max);
    let thr = tol.rank_threshold(m, n, max);
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let null: Vec<usize> = order.into_iter().filter(|&i| sigma[i] <= thr).collect();
    let mut basis = zeros(n, null.len());
    for (k, &i) in null.iter().enumerate() {
        for r in 0..n {
            basis[(r, k)] = v_t[(i, r)].conj();
        }
    }
    basis
}

/// Orthonormal basis (as rows) of `{y : y a = 0}`.
pub fn left_null_space(a: &CMat, tol: &Tolerances) -> CMat {
    null_space(&a.adjoint(), tol).adjoint()
}

/// Orthonormalizes the columns of a full-column-rank matrix.
pub fn orthonormalize_columns(a: &CMat) -> CMat {
    if a.ncols() == 0 {
        return a.clone();
    }
    a.clone().qr().q()
}

pub fn orthonormalize_rows(a: &CMat) -> CMat {
    orthonormalize_columns(&a.adjoint()).adjoint()
}

/// One circularly-symmetric complex Gaussian sample with unit variance.
pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. CN(0,1) entries, filled row-major.
pub fn random_cn<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| cn01(rng)).collect();
    CMat::from_row_slice(rows, cols, &data)
}

pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), b.shape()).copy_from(*b);
        c += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), b.shape()).copy_from(*b);
        r += b.nrows();
    }
    out
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inverse of a square matrix together with its extreme singular values.
/// `None` when the numerical rank is below full.
pub fn checked_inverse(a: &CMat, tol: &Tolerances) -> (Option<CMat>, usize, f64, f64) {
    assert!(a.is_square(), "inverse of non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return (Some(zeros(0, 0)), 0, 0.0, 0.0);
    }
    let s = singular_values(a);
    let (max, min) = (s[0], s[s.len() - 1]);
    let thr = tol.rank_threshold(n, n, max);
    let r = s.iter().filter(|&&x| x > thr).count();
    if r < n {
        return (None, r, min, max);
    }
    (a.clone().try_inverse(), r, min, max)
}

/// `|| a - b ||_F / max(|| b ||_F, 1)`-style relative deviation with a floor
/// on the reference scale.
pub fn relative_deviation(a: &CMat, b: &CMat, scale: f64) -> f64 {
    frobenius(&(a - b)) / scale.max(f64::MIN_POSITIVE)
}
