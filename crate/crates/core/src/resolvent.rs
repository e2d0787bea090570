//! C-resolvents, regularizer construction and sampled region certificates.

use crate::error::{Error, ResolventFailure, Result};
use crate::linalg::{self, c, CMat};
use crate::linrel::LinearRelation;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative residual above which a resolvent system is declared inconsistent.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionMode {
    H,
    HS,
}

/// Region data `(alpha, eps, c, d, theta, lambda0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub mode: RegionMode,
    pub alpha: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    pub lambda0: Complex64,
}

fn default_eps() -> f64 {
    0.2
}
fn default_c() -> f64 {
    0.3
}
fn default_theta() -> f64 {
    PI / 4.0
}

impl RegionParams {
    /// H mode with `d` solved from the coupling constraint.
    pub fn h(alpha: f64, eps: f64, c: f64, lambda0: Complex64) -> Self {
        RegionParams {
            mode: RegionMode::H,
            alpha,
            eps,
            c,
            d: coupled_d(alpha, eps, c),
            theta: default_theta(),
            lambda0,
        }
    }

    pub fn hs(alpha: f64, theta: f64, d: f64, lambda0: Complex64) -> Self {
        RegionParams {
            mode: RegionMode::HS,
            alpha,
            eps: default_eps(),
            c: default_c(),
            d,
            theta,
            lambda0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.alpha >= -1.0) {
            return bad(format!("alpha = {} < -1", self.alpha));
        }
        if !(self.d > 0.0 && self.d <= 1.0) {
            return bad(format!("d = {} outside (0,1]", self.d));
        }
        match self.mode {
            RegionMode::H => {
                if !(self.eps > 0.0 && self.eps <= 1.0) {
                    return bad(format!("eps = {} outside (0,1]", self.eps));
                }
                if !(self.c > 0.0 && self.c < 1.0) {
                    return bad(format!("c = {} outside (0,1)", self.c));
                }
                let lhs = self.eps.powi(2) + self.c.powi(2) * (1.0 + self.eps).powf(-2.0 * self.alpha);
                if (lhs - self.d * self.d).abs() > 1e-9 {
                    return bad(format!(
                        "coupling constraint violated: eps^2 + c^2 (1+eps)^(-2 alpha) = {lhs}, d^2 = {}",
                        self.d * self.d
                    ));
                }
            }
            RegionMode::HS => {
                if !(self.theta > 0.0 && self.theta < PI / 2.0) {
                    return bad(format!("theta = {} outside (0, pi/2)", self.theta));
                }
            }
        }
        if self.contains(self.lambda0) {
            return bad(format!("lambda0 = {} lies in the region", self.lambda0));
        }
        Ok(())
    }

    /// Membership in `P ∪ B_d` (H) or `Σ_θ ∪ B_d` (HS).
    pub fn contains(&self, z: Complex64) -> bool {
        if z.norm() <= self.d {
            return true;
        }
        match self.mode {
            RegionMode::H => z.re >= self.eps && z.im.abs() <= self.c * (1.0 + z.re).powf(-self.alpha),
            RegionMode::HS => z.norm() > 0.0 && z.arg().abs() < self.theta,
        }
    }

    /// `⌊alpha + 2⌋`, the resolvent order in `C1`; zero when `alpha = -1`.
    pub fn c1_order(&self) -> usize {
        if self.alpha == -1.0 {
            0
        } else {
            (self.alpha + 2.0).floor() as usize
        }
    }
}

/// `d` with `eps^2 + c^2 (1+eps)^(-2 alpha) = d^2`.
pub fn coupled_d(alpha: f64, eps: f64, c: f64) -> f64 {
    (eps * eps + c * c * (1.0 + eps).powf(-2.0 * alpha)).sqrt()
}

/// Default auxiliary point `-2 (1 + rho)` with `rho` a spectral radius estimate.
pub fn default_lambda0(a: &LinearRelation) -> Complex64 {
    // largest |lambda| over finite generalized eigenvalues of the graph pencil, bounded by ||Q|| / sigma_min(P) on the domain
    let p = a.p();
    let q = a.q();
    let sp = linalg::svd(&p).1;
    let smin = sp.iter().copied().filter(|&s| s > 1e-8).fold(f64::INFINITY, f64::min);
    let rho = if smin.is_finite() { linalg::op_norm(&q) / smin } else { 0.0 };
    c(-2.0 * (1.0 + rho), 0.0)
}

/// Solves `rhs_j ∈ (lambda - A) y_j` for every column; returns `Y` and the worst relative residual.
pub fn solve_shifted(a: &LinearRelation, lambda: Complex64, rhs: &CMat) -> Result<(CMat, f64)> {
    let n = a.dim();
    if rhs.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, relation on C^{n}",
            rhs.nrows()
        )));
    }
    let p = a.p();
    let q = a.q();
    let k = p.ncols();
    if k > n {
        return Err(Error::NotInResolventSet {
            lambda,
            reason: ResolventFailure::NonUnique,
        });
    }
    let m = p.map(|e| e * lambda) - &q;
    let (u, sig, v) = linalg::svd(&m);
    let mut inv_sig = Vec::with_capacity(sig.len());
    for (j, &s) in sig.iter().enumerate() {
        let cj = v.column(j);
        let py = (&p * cj).norm();
        let qy = (&q * cj).norm();
        // c_j witnesses a kernel element when M c_j vanishes relative to its two terms
        if s <= linalg::RANK_TOL * (lambda.norm() * py + qy) && py > 1e-10 {
            return Err(Error::NotInResolventSet {
                lambda,
                reason: ResolventFailure::NonUnique,
            });
        }
        inv_sig.push(if s > 0.0 { 1.0 / s } else { 0.0 });
    }
    let pinv = |b: &CMat| {
        let mut coef = u.adjoint() * b;
        for (i, mut row) in coef.row_iter_mut().enumerate() {
            row *= c(inv_sig[i], 0.0);
        }
        &v * coef
    };
    let mut cmat = pinv(rhs);
    // refinement recovers digits lost on non-normal shifts
    for _ in 0..2 {
        let r = rhs - &m * &cmat;
        cmat += pinv(&r);
    }
    let mnorm = sig.iter().copied().fold(0.0, f64::max);
    let resid = &m * &cmat - rhs;
    let mut worst = 0.0f64;
    for j in 0..rhs.ncols() {
        let scale = rhs.column(j).norm() + mnorm * cmat.column(j).norm();
        let r = resid.column(j).norm();
        let rel = if scale > 0.0 { r / scale } else { 0.0 };
        worst = worst.max(rel);
    }
    if worst > CONSISTENCY_TOL {
        return Err(Error::NotInResolventSet {
            lambda,
            reason: ResolventFailure::Inconsistent,
        });
    }
    Ok((&p * cmat, worst))
}

fn check_c(a: &LinearRelation, cm: &CMat) -> Result<()> {
    if cm.shape() != (a.dim(), a.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "C is {:?}, relation on C^{}",
            cm.shape(),
            a.dim()
        )));
    }
    Ok(())
}

/// `(lambda - A)^{-1} C`.
pub fn c_resolvent(a: &LinearRelation, cm: &CMat, lambda: Complex64) -> Result<CMat> {
    check_c(a, cm)?;
    Ok(solve_shifted(a, lambda, cm)?.0)
}

pub fn in_c_resolvent_set(a: &LinearRelation, cm: &CMat, lambda: Complex64, tol: f64) -> bool {
    match c_resolvent(a, cm, lambda) {
        Ok(r) => {
            // residual of the defining system through the graph
            match defining_residual(a, cm, lambda, &r) {
                Some(res) => res <= tol,
                None => false,
            }
        }
        Err(_) => false,
    }
}

/// Worst distance of `(R x, lambda R x - C x)` from the graph over basis vectors `x`.
pub fn defining_residual(a: &LinearRelation, cm: &CMat, lambda: Complex64, r: &CMat) -> Option<f64> {
    let n = a.dim();
    let mut worst = 0.0f64;
    for j in 0..n {
        let y = r.column(j).into_owned();
        let w = y.map(|e| e * lambda) - cm.column(j);
        let (_, d) = a.contains_pair(&y, &w, 1.0).ok()?;
        worst = worst.max(d / (1.0 + y.norm() + w.norm()));
    }
    Some(worst)
}

/// `(lambda - A)^{-n} C` by repeated relation inversion.
pub fn resolvent_power(a: &LinearRelation, cm: &CMat, lambda: Complex64, n: usize) -> Result<CMat> {
    check_c(a, cm)?;
    if n == 0 {
        return Err(Error::InvalidParams("resolvent power needs n >= 1".into()));
    }
    let mut cur = cm.clone();
    for _ in 0..n {
        cur = solve_shifted(a, lambda, &cur)?.0;
    }
    Ok(cur)
}

/// `C (lambda0 - A)^{-⌊alpha+2⌋} C`, or `C` when `alpha = -1`.
pub fn build_c1(a: &LinearRelation, cm: &CMat, params: &RegionParams) -> Result<CMat> {
    check_c(a, cm)?;
    let k = params.c1_order();
    if k == 0 {
        return Ok(cm.clone());
    }
    Ok(cm * resolvent_power(a, cm, params.lambda0, k)?)
}

/// Sampling density for region certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radial: usize,
    pub angular: usize,
    pub radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radial: 60,
            angular: 24,
            radius: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub sup_weighted_norm: f64,
    pub worst_lambda: Complex64,
    pub pass: bool,
}

fn log_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if m <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect()
}

/// Canonically ordered sample points of the region, boundary included.
pub fn region_samples(params: &RegionParams, grid: &GridSpec) -> Vec<Complex64> {
    let mut pts = Vec::new();
    let d = params.d;
    for i in 0..grid.angular.max(2) {
        let phi = -PI + 2.0 * PI * i as f64 / grid.angular.max(2) as f64;
        for &r in &[0.0, 0.5 * d, d] {
            pts.push(Complex64::from_polar(r, phi));
        }
    }
    let radii = log_grid(d.max(1e-3), grid.radius, grid.radial);
    match params.mode {
        RegionMode::H => {
            for &xi in &log_grid(params.eps, grid.radius, grid.radial) {
                let h = params.c * (1.0 + xi).powf(-params.alpha);
                for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                    pts.push(c(xi, s * h));
                }
            }
        }
        RegionMode::HS => {
            for &r in &radii {
                for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                    // boundary of the open sector sampled just inside
                    pts.push(Complex64::from_polar(r, s * params.theta * (1.0 - 1e-9)));
                }
            }
        }
    }
    pts
}

/// Sampled sup of `(1+|λ|)^{-alpha} ||(λ - A)^{-1} C||` over the region.
pub fn region_certify(
    a: &LinearRelation,
    cm: &CMat,
    params: &RegionParams,
    grid: &GridSpec,
    bound: f64,
) -> Result<Certificate> {
    let mut sup = 0.0f64;
    let mut worst = c(0.0, 0.0);
    for z in region_samples(params, grid) {
        let r = c_resolvent(a, cm, z)?;
        let w = (1.0 + z.norm()).powf(-params.alpha) * linalg::op_norm(&r);
        if !w.is_finite() {
            return Err(Error::NotInResolventSet {
                lambda: z,
                reason: ResolventFailure::NonUnique,
            });
        }
        if w > sup {
            sup = w;
            worst = z;
        }
    }
    Ok(Certificate {
        sup_weighted_norm: sup,
        worst_lambda: worst,
        pass: sup <= bound,
    })
}

/// Samples `λ (λ - A)^{-1} C` for `λ` outside `Σ_{omega'}`; `Ok((bounded, sup))`.
///
/// Each ray is refined around its largest sample so isolated spectral points
/// between grid radii are still found. A spectral point gives `(false, inf)`.
pub fn classify_sectorial(
    a: &LinearRelation,
    cm: &CMat,
    omega_prime: f64,
    grid: &GridSpec,
    bound: f64,
) -> (bool, f64) {
    let eval = |r: f64, phi: f64| -> f64 {
        match c_resolvent(a, cm, Complex64::from_polar(r, phi)) {
            Ok(m) => r * linalg::op_norm(&m),
            Err(_) => f64::INFINITY,
        }
    };
    let radii = log_grid(1.0 / grid.radius, grid.radius, grid.radial.max(3));
    let na = grid.angular.max(2);
    let mut sup = 0.0f64;
    for i in 0..=na {
        let phi0 = omega_prime + (PI - omega_prime) * i as f64 / na as f64;
        for phi in [phi0, -phi0] {
            let vals: Vec<f64> = radii.iter().map(|&r| eval(r, phi)).collect();
            let (imax, vmax) = vals
                .iter()
                .copied()
                .enumerate()
                .fold((0, -1.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
            sup = sup.max(vmax);
            if !sup.is_finite() {
                return (false, f64::INFINITY);
            }
            // golden-section search in log r around the peak
            let mut lo = radii[imax.saturating_sub(1)].ln();
            let mut hi = radii[(imax + 1).min(radii.len() - 1)].ln();
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                let (f1, f2) = (eval(m1.exp(), phi), eval(m2.exp(), phi));
                sup = sup.max(f1).max(f2);
                if !sup.is_finite() {
                    return (false, f64::INFINITY);
                }
                if f1 > f2 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
        }
    }
    (sup.is_finite() && sup <= bound, sup)
}
