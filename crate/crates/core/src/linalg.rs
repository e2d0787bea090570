//! Dense complex helpers shared by the relation and resolvent code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real_diag(d: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0))))
}

pub fn cdiag(d: &[Complex64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(d))
}

/// Thin SVD as `(U, sigma, V)` with `m = U diag(sigma) V^H`.
pub fn svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, k) = m.shape();
    if r == 0 || k == 0 {
        return (CMat::zeros(r, 0), vec![], CMat::zeros(k, 0));
    }
    // nalgebra's complex SVD is unreliable on some inputs (e.g. (1+i) times a real matrix)
    let f = faer::Mat::<Complex64>::from_fn(r, k, |i, j| m[(i, j)]);
    let s = f.thin_svd().expect("svd converges");
    let (fu, fs, fv) = (s.U(), s.S().column_vector(), s.V());
    let u = CMat::from_fn(r, fu.ncols(), |i, j| fu[(i, j)]);
    let v = CMat::from_fn(k, fv.ncols(), |i, j| fv[(i, j)]);
    (u, fs.iter().map(|x| x.re).collect(), v)
}

fn rank_of(sig: &[f64], tol: f64) -> usize {
    let smax = sig.iter().copied().fold(0.0, f64::max);
    if !(smax > 0.0) || !smax.is_finite() {
        return 0;
    }
    sig.iter().filter(|&&s| s > tol * smax).count()
}

fn select_cols(m: &CMat, idx: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.set_column(j, &m.column(i));
    }
    out
}

/// Orthonormal basis of the column span, threshold relative to `sigma_max`.
pub fn orth(m: &CMat, tol: f64) -> CMat {
    let smax = op_norm(m);
    orth_abs(m, tol * smax)
}

/// Orthonormal basis of the column span keeping singular values above `thresh`.
pub fn orth_abs(m: &CMat, thresh: f64) -> CMat {
    let (u, sig, _) = svd(m);
    let idx: Vec<usize> = (0..sig.len()).filter(|&i| sig[i] > thresh && sig[i] > 0.0).collect();
    select_cols(&u, &idx)
}

/// Orthonormal basis of the right null space, threshold relative to `sigma_max`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    null_space_with(m, |sig| rank_of(sig, tol))
}

/// Right null space keeping singular values at most `thresh`.
pub fn null_space_abs(m: &CMat, thresh: f64) -> CMat {
    null_space_with(m, |sig| sig.iter().filter(|&&s| s > thresh).count())
}

fn null_space_with(m: &CMat, rank_fn: impl Fn(&[f64]) -> usize) -> CMat {
    let (r, k) = m.shape();
    if k == 0 {
        return CMat::zeros(0, 0);
    }
    if r == 0 {
        return CMat::identity(k, k);
    }
    // pad so the thin SVD returns a full V
    let padded = if r < k {
        let mut p = CMat::zeros(k, k);
        p.view_mut((0, 0), (r, k)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, sig, v) = svd(&padded);
    let rank = rank_fn(&sig);
    let mut order: Vec<usize> = (0..sig.len()).collect();
    order.sort_by(|&a, &b| sig[b].total_cmp(&sig[a]));
    select_cols(&v, &order[rank..])
}

pub fn rank(m: &CMat, tol: f64) -> usize {
    rank_of(&svd(m).1, tol)
}

/// Spectral norm; zero for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Distance from `v` to the span of the orthonormal columns of `basis`.
pub fn dist_to_span(basis: &CMat, v: &CVec) -> f64 {
    if basis.ncols() == 0 {
        return v.norm();
    }
    let coef = basis.adjoint() * v;
    (v - basis * coef).norm()
}

/// Largest distance of a column of `a` (orthonormal) to span(`b`).
pub fn span_defect(a: &CMat, b: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| dist_to_span(b, &a.column(j).into_owned()))
        .fold(0.0, f64::max)
}

pub fn hstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn vstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

pub fn vcat(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

/// Max absolute entry; handy as a residual.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Determines if every entry is finite.
pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
