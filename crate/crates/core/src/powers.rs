//! Functional calculus `f_{C1}(A)` and complex powers of `-A`.
//!
//! Sign anchoring: every route is normalized so that `(-A)^{-n}_{C1} = (-A)^{-n} C1`
//! with the contour orientation `winding(-1) = +1`. For `A = -a` this means
//! `f_{C1}(A) = f(a) C1`.

use crate::contour::{build_gamma, build_gamma_sector, quad_contour, Contour};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::linrel::{relation_from_condition, LinearRelation};
use crate::quad::{quad_halfline, DecaySpec, Tail};
use crate::resolvent::{c_resolvent, resolvent_power, solve_shifted, RegionMode, RegionParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

const TWO_PI_I: Complex64 = Complex64 { re: 0.0, im: 2.0 * PI };

/// Holomorphic function off `(-inf, 0]` with `|f(z)| <= M |z|^{-decay_s}`.
#[derive(Clone)]
pub struct CalcFunction {
    eval: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    pub decay_s: f64,
    pub description: String,
}

impl std::fmt::Debug for CalcFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CalcFunction")
            .field("decay_s", &self.decay_s)
            .field("description", &self.description)
            .finish()
    }
}

impl CalcFunction {
    pub fn new(
        description: impl Into<String>,
        decay_s: f64,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        CalcFunction {
            eval: Arc::new(eval),
            decay_s,
            description: description.into(),
        }
    }

    /// `z^{-b}` on the principal branch.
    pub fn power(b: Complex64) -> Self {
        Self::new(format!("z^-({b})"), b.re, move |z| (-b * z.ln()).exp())
    }

    /// `-ln z * z^{-b}`, the `b`-derivative of `z^{-b}`.
    pub fn dpower(b: Complex64) -> Self {
        // the log factor costs a little decay
        Self::new(format!("-ln z z^-({b})"), 0.9 * b.re, move |z| {
            let l = z.ln();
            -l * (-b * l).exp()
        })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn product(&self, other: &Self) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(
            format!("({})({})", self.description, other.description),
            self.decay_s + other.decay_s,
            move |z| f(z) * g(z),
        )
    }
}

/// Default path for a region: `Γ(alpha, eps, c, d)` or `Γ_S(theta, d)`.
pub fn region_contour(region: &RegionParams) -> Result<Contour> {
    match region.mode {
        RegionMode::H => build_gamma(region),
        RegionMode::HS => build_gamma_sector(region.theta, region.d),
    }
}

/// `(z + A)^{-1} C1 = -((-z) - A)^{-1} C1`.
pub fn shifted_resolvent(a: &LinearRelation, c1: &CMat, z: Complex64) -> Result<CMat> {
    Ok(-c_resolvent(a, c1, -z)?)
}

/// `f_{C1}(A) = -(1/2πi) ∫_Γ f(z) (z + A)^{-1} C1 dz`.
pub fn hfunctional_calc(
    a: &LinearRelation,
    c1: &CMat,
    f: &CalcFunction,
    gamma: &Contour,
    tol: f64,
) -> Result<CMat> {
    if !(f.decay_s > 0.0) {
        return Err(Error::InvalidParams(format!("decay exponent {} must be positive", f.decay_s)));
    }
    let tail = if f.decay_s.is_infinite() {
        Tail::SuperExponential
    } else {
        Tail::Exponential(f.decay_s)
    };
    let r = quad_contour(
        |z: Complex64| Ok(shifted_resolvent(a, c1, z)? * f.eval(z)),
        gamma,
        2.0 * PI * tol,
        tail,
    )?;
    Ok(r.value * (-1.0 / TWO_PI_I))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Contour,
    Balakrishnan,
    Moment,
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contour" => Ok(Route::Contour),
            "balakrishnan" => Ok(Route::Balakrishnan),
            "moment" => Ok(Route::Moment),
            _ => Err(Error::Parse(format!("unknown route {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSpec {
    pub b: Complex64,
    pub route: Route,
    #[serde(default)]
    pub n_moment: usize,
}

impl PowerSpec {
    pub fn new(b: Complex64, route: Route) -> Self {
        PowerSpec { b, route, n_moment: 0 }
    }

    pub fn moment(b: Complex64, n: usize) -> Self {
        PowerSpec { b, route: Route::Moment, n_moment: n }
    }

    pub fn validate(&self) -> Result<()> {
        let re = self.b.re;
        if self.b == Complex64::new(0.0, 0.0) {
            return Ok(());
        }
        let dom = |m: &str| Err(Error::RouteDomain(format!("b = {} {m}", self.b)));
        if !(re > 0.0) {
            return dom("needs Re b > 0");
        }
        match self.route {
            Route::Contour => Ok(()),
            Route::Balakrishnan => {
                if re.fract() == 0.0 && self.b.im != 0.0 {
                    return dom("has integer real part and nonzero imaginary part");
                }
                Ok(())
            }
            Route::Moment => {
                if re >= (self.n_moment + 1) as f64 || re.fract() == 0.0 {
                    return dom(&format!("needs Re b in (0, {}) minus integers", self.n_moment + 1));
                }
                Ok(())
            }
        }
    }
}

/// `(-A)^{-m} M` via repeated relation inversion at zero.
pub fn neg_int_power_apply(a: &LinearRelation, m: usize, rhs: &CMat) -> Result<CMat> {
    let mut cur = rhs.clone();
    for _ in 0..m {
        cur = solve_shifted(a, Complex64::new(0.0, 0.0), &cur)?.0;
    }
    Ok(cur)
}

fn sin_pi(b: Complex64) -> Complex64 {
    (b * PI).sin()
}

/// `(-A)^{-b}_{C1}` by the requested route; the moment route returns `C1^n (-A)^{-b}_{C1}`.
pub fn neg_power(
    a: &LinearRelation,
    c1: &CMat,
    spec: &PowerSpec,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    spec.validate()?;
    let b = spec.b;
    if b == Complex64::new(0.0, 0.0) {
        return Ok(match spec.route {
            Route::Moment => c1.pow(spec.n_moment as u32 + 1),
            _ => c1.clone(),
        });
    }
    match spec.route {
        Route::Contour => {
            let gamma = region_contour(region)?;
            hfunctional_calc(a, c1, &CalcFunction::power(b), &gamma, tol)
        }
        Route::Balakrishnan => balakrishnan(a, c1, b, tol),
        Route::Moment => moment(a, c1, b, spec.n_moment, tol),
    }
}

fn balakrishnan(a: &LinearRelation, c1: &CMat, b: Complex64, tol: f64) -> Result<CMat> {
    if b.im == 0.0 && b.re.fract() == 0.0 {
        // integer exponent: residue identity
        return resolvent_power(a, c1, Complex64::new(0.0, 0.0), b.re as usize);
    }
    // peel integer part so that 0 < Re b' < 1
    let m = b.re.ceil() as usize - 1;
    let bp = b - m as f64;
    let decay = DecaySpec::algebraic(1.0 - bp.re, bp.re);
    let scale = sin_pi(bp) / PI;
    let r = quad_halfline(
        |lam: f64| {
            let w = (-bp * lam.ln()).exp();
            Ok(c_resolvent(a, c1, Complex64::new(lam, 0.0))? * w)
        },
        tol / scale.norm().max(1e-300),
        &decay,
    )?;
    let base = r.value * scale;
    neg_int_power_apply(a, m, &base)
}

fn moment(a: &LinearRelation, c1: &CMat, b: Complex64, n: usize, tol: f64) -> Result<CMat> {
    let mut pref = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        pref *= k as f64 / (k as f64 - b);
    }
    // (-1)^n from the formula combined with the global sign flip
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let pref = pref * sign * sin_pi(n as f64 - b) / PI;
    let cpow = c1.pow(n as u32 + 1);
    let decay = DecaySpec::algebraic(n as f64 + 1.0 - b.re, b.re);
    let r = quad_halfline(
        |t: f64| {
            let w = ((n as f64 - b) * t.ln()).exp();
            Ok(resolvent_power(a, &cpow, Complex64::new(t, 0.0), n + 1)? * w)
        },
        tol / pref.norm().max(1e-300),
        &decay,
    )?;
    Ok(r.value * pref)
}

/// Rank threshold for relations assembled from quadrature output.
pub fn noisy_rank_tol(tol: f64) -> f64 {
    (100.0 * tol).max(1e-10)
}

/// `(-A)_b`: `{(x,y) : C1 y = (-A)^{b}_{C1} x}` for `Re b < 0`, `{(x,y) : (-A)^{-b}_{C1} y = C1 x}` for `Re b > 0`.
pub fn power_relation(
    a: &LinearRelation,
    c1: &CMat,
    b: Complex64,
    region: &RegionParams,
    tol: f64,
) -> Result<LinearRelation> {
    if b.re == 0.0 {
        return Err(Error::RouteDomain(format!("power relation needs Re b != 0, got {b}")));
    }
    let rt = noisy_rank_tol(tol);
    if b.re < 0.0 {
        let p = neg_power_exact_or_contour(a, c1, -b, region, tol)?;
        relation_from_condition(c1, &p, rt)
    } else {
        let p = neg_power_exact_or_contour(a, c1, b, region, tol)?;
        relation_from_condition(&p, c1, rt)
    }
}

/// Integer exponents use the residue identity; others the contour route.
fn neg_power_exact_or_contour(
    a: &LinearRelation,
    c1: &CMat,
    b: Complex64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    if b.im == 0.0 && b.re.fract() == 0.0 && b.re > 0.0 {
        return resolvent_power(a, c1, Complex64::new(0.0, 0.0), b.re as usize);
    }
    neg_power(a, c1, &PowerSpec::new(b, Route::Contour), region, tol)
}

/// `(-A)_{iτ} = C1^{-2} (1-A)_2 (-A)_{-1} (-A)_{1+iτ} (1-A)_{-2} C1^2`.
pub fn imaginary_power_relation(
    a: &LinearRelation,
    c1: &CMat,
    tau: f64,
    region: &RegionParams,
    tol: f64,
) -> Result<LinearRelation> {
    if tau == 0.0 {
        return Err(Error::InvalidParams("tau must be nonzero".into()));
    }
    let rt = noisy_rank_tol(tol);
    let one = Complex64::new(1.0, 0.0);
    let c1r = LinearRelation::from_matrix(c1)?.with_rank_tol(rt);
    let c1inv = c1r.inverse();
    let one_minus_a = a.with_rank_tol(rt).scalar_shift_mul(-one, one);
    let sq = one_minus_a.integer_power(2);
    let up2 = c1inv.compose(&sq)?.compose(&c1r)?;
    let down2 = c1inv.compose(&sq.inverse())?.compose(&c1r)?;
    let m1 = power_relation(a, c1, Complex64::new(-1.0, 0.0), region, tol)?;
    let p1 = power_relation(a, c1, Complex64::new(1.0, tau), region, tol)?;
    // applied right to left
    let mut r = c1r.compose(&c1r)?;
    for f in [&down2, &p1, &m1, &up2, &c1inv, &c1inv] {
        r = f.compose(&r)?;
    }
    Ok(r)
}

/// Membership of `(x, y)` in `(-A)_b` through the defining matrix equation; the residual is scaled.
pub fn power_membership(
    a: &LinearRelation,
    c1: &CMat,
    b: Complex64,
    x: &CVec,
    y: &CVec,
    region: &RegionParams,
    tol: f64,
) -> Result<(bool, f64)> {
    if b.re == 0.0 {
        return Err(Error::RouteDomain(format!("membership needs Re b != 0, got {b}")));
    }
    let (p, lhs_y, rhs_x) = if b.re > 0.0 {
        let p = neg_power_exact_or_contour(a, c1, b, region, tol)?;
        (p.clone(), &p * y, c1 * x)
    } else {
        let p = neg_power_exact_or_contour(a, c1, -b, region, tol)?;
        (p.clone(), c1 * y, &p * x)
    };
    let res = (lhs_y - &rhs_x).norm();
    let scale = 1.0 + crate::linalg::op_norm(&p) * (x.norm() + y.norm()) + crate::linalg::op_norm(c1) * (x.norm() + y.norm());
    Ok((res <= tol * scale, res / scale))
}

/// `d/db (-A)^{-b}_{C1}`.
pub fn dpower_db(a: &LinearRelation, c1: &CMat, b: Complex64, region: &RegionParams, tol: f64) -> Result<CMat> {
    if !(b.re > 0.0) {
        return Err(Error::RouteDomain(format!("derivative needs Re b > 0, got {b}")));
    }
    hfunctional_calc(a, c1, &CalcFunction::dpower(b), &region_contour(region)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs, real_diag};
    use crate::linrel::rvec;

    fn diag() -> LinearRelation {
        LinearRelation::from_matrix(&real_diag(&[-1.0, -4.0])).unwrap()
    }
    fn pencil() -> LinearRelation {
        LinearRelation::from_pencil(&real_diag(&[1.0, 0.0]), &real_diag(&[-1.0, -1.0])).unwrap()
    }
    fn region() -> RegionParams {
        RegionParams::h(-1.0, 0.2, 0.3, c(-2.0, 0.0))
    }
    fn eye() -> CMat {
        CMat::identity(2, 2)
    }

    #[test]
    fn calc_inverse_and_sqrt() {
        let g = region_contour(&region()).unwrap();
        let f = hfunctional_calc(&diag(), &eye(), &CalcFunction::power(c(1.0, 0.0)), &g, 1e-9).unwrap();
        assert!(max_abs(&(f - real_diag(&[1.0, 0.25]))) < 1e-8);
        let f = hfunctional_calc(&diag(), &eye(), &CalcFunction::power(c(0.5, 0.0)), &g, 1e-9).unwrap();
        assert!(max_abs(&(f - real_diag(&[1.0, 0.5]))) < 1e-8);
        let f = hfunctional_calc(&pencil(), &eye(), &CalcFunction::power(c(1.0, 0.0)), &g, 1e-9).unwrap();
        assert!(max_abs(&(f - real_diag(&[1.0, 0.0]))) < 1e-8);
    }

    #[test]
    fn routes_on_diag() {
        for route in [Route::Contour, Route::Balakrishnan] {
            let v = neg_power(&diag(), &eye(), &PowerSpec::new(c(0.5, 0.0), route), &region(), 1e-9).unwrap();
            assert!(max_abs(&(v - real_diag(&[1.0, 0.5]))) < 1e-8, "{route:?}");
        }
        let v = neg_power(&diag(), &eye(), &PowerSpec::moment(c(0.5, 0.0), 1), &region(), 1e-9).unwrap();
        assert!(max_abs(&(v - real_diag(&[1.0, 0.5]))) < 1e-8);
        let v = neg_power(&diag(), &eye(), &PowerSpec::new(c(0.0, 0.0), Route::Contour), &region(), 1e-9).unwrap();
        assert_eq!(v, eye());
    }

    #[test]
    fn route_domains() {
        let r = neg_power(&diag(), &eye(), &PowerSpec::moment(c(1.0, 0.0), 1), &region(), 1e-8);
        assert!(matches!(r, Err(Error::RouteDomain(_))));
        let r = neg_power(&diag(), &eye(), &PowerSpec::new(c(-0.5, 0.0), Route::Contour), &region(), 1e-8);
        assert!(matches!(r, Err(Error::RouteDomain(_))));
    }

    #[test]
    fn relations() {
        let r = power_relation(&diag(), &eye(), c(1.0, 0.0), &region(), 1e-9).unwrap();
        assert!(r.equals(&LinearRelation::from_matrix(&real_diag(&[1.0, 4.0])).unwrap(), 1e-8));
        let c1 = real_diag(&[1.0, 0.0]);
        let r = power_relation(&pencil(), &c1, c(-1.0, 0.0), &region(), 1e-9).unwrap();
        // C1 y = (-A)^{-1} C1 x: y1 = x1, y2 free, x2 free
        assert!(r.contains_pair(&rvec(&[1.0, 3.0]), &rvec(&[1.0, -2.0]), 1e-8).unwrap().0);
        assert!(!r.contains_pair(&rvec(&[1.0, 0.0]), &rvec(&[2.0, 0.0]), 1e-6).unwrap().0);
    }

    #[test]
    fn memberships() {
        let e1 = rvec(&[1.0, 0.0]);
        let e2 = rvec(&[0.0, 1.0]);
        let half = c(0.5, 0.0);
        assert!(power_membership(&diag(), &eye(), half, &e1, &e1, &region(), 1e-8).unwrap().0);
        assert!(power_membership(&diag(), &eye(), half, &e2, &(&e2 * c(2.0, 0.0)), &region(), 1e-8).unwrap().0);
        assert!(!power_membership(&diag(), &eye(), half, &e2, &e2, &region(), 1e-8).unwrap().0);
        // the pencil: (0, e2) belongs since (-A)^{-b}_{C1} kills e2
        let c1 = real_diag(&[1.0, 0.0]);
        assert!(power_membership(&pencil(), &c1, half, &CVec::zeros(2), &e2, &region(), 1e-8).unwrap().0);
    }

    #[test]
    fn imaginary_scalar() {
        let a = 3.0f64;
        let s = LinearRelation::from_matrix(&real_diag(&[-a])).unwrap();
        let r = imaginary_power_relation(&s, &CMat::identity(1, 1), 1.0, &region(), 1e-9).unwrap();
        let want = LinearRelation::from_matrix(&CMat::from_element(1, 1, c(0.0, a.ln()).exp())).unwrap();
        assert!(r.equals(&want, 1e-7), "{}", r.graph());
    }

    #[test]
    fn derivative_scalar_and_fd() {
        let a = 4.0f64;
        let s = LinearRelation::from_matrix(&real_diag(&[-a])).unwrap();
        let b = c(0.7, 0.0);
        let d = dpower_db(&s, &CMat::identity(1, 1), b, &region(), 1e-10).unwrap();
        let want = -a.ln() * a.powf(-0.7);
        assert!((d[(0, 0)] - want).norm() < 1e-8);
        let h = 1e-4;
        let p = |bb: f64| neg_power(&diag(), &eye(), &PowerSpec::new(c(bb, 0.0), Route::Contour), &region(), 1e-12).unwrap();
        let fd = (p(0.7 + h) - p(0.7 - h)) / c(2.0 * h, 0.0);
        let d = dpower_db(&diag(), &eye(), b, &region(), 1e-10).unwrap();
        assert!(max_abs(&(fd - &d)) <= 1e-5 * max_abs(&d));
        assert!(d.iter().all(|z| z.im.abs() < 1e-10));
    }
}
