//! Semigroups `S_γ(t) = (e^{-t z^γ})_{C1}(A)`, the boundary case `S_{1/2}`, integrated
//! families `S_{γ,ζ}`, their Laplace transforms `F_γ`, and the incomplete problems.

use crate::error::{Error, Result};
use crate::fracderiv::gzeta_eval;
use crate::linalg::{CMat, CVec};
use crate::linrel::LinearRelation;
use crate::powers::{hfunctional_calc, region_contour, CalcFunction};
use crate::quad::{integrate, quad_halfline_opts, DecaySpec, QuadOpts, QuadResult, Tail};
use crate::resolvent::{c_resolvent, resolvent_power, RegionMode, RegionParams};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const TWO_PI_I: Complex64 = Complex64 { re: 0.0, im: 2.0 * PI };

/// Richardson nodes for the `γ -> 1/2` limit.
pub const HALF_LIMIT_GAMMAS: [f64; 3] = [0.40, 0.45, 0.48];

/// `φ_γ = π/2 - γ(π - ϑ)`.
pub fn phi_gamma(gamma: f64, vartheta: f64) -> f64 {
    PI / 2.0 - gamma * (PI - vartheta)
}

/// Half-angle of the sector where the unrotated kernel integral converges.
pub fn direct_half_angle(gamma: f64) -> f64 {
    PI / 2.0 - gamma * PI
}

/// Sector half-angle `ϑ` of the region; zero in paraboloid mode.
pub fn sector_angle(region: &RegionParams) -> f64 {
    match region.mode {
        RegionMode::HS => region.theta,
        RegionMode::H => 0.0,
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("gamma = {gamma} must lie in (0, 1/2]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma: f64,
    pub theta: f64,
    pub t: Complex64,
    pub phi_gamma: f64,
    pub eps_t: f64,
}

impl KernelParams {
    pub fn new(gamma: f64, theta: f64, t: Complex64, vartheta: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if theta != 0.0 && theta.abs() >= vartheta {
            return Err(Error::InvalidParams(format!("|theta| = {} must be below {vartheta}", theta.abs())));
        }
        Ok(KernelParams {
            gamma,
            theta,
            t,
            phi_gamma: phi_gamma(gamma, vartheta),
            eps_t: t.re * (PI * gamma).cos(),
        })
    }
}

/// `f_t(λ) = π^{-1} e^{-t λ^γ cos πγ} sin(t λ^γ sin πγ)`.
pub fn f_t_eval(lambda: f64, t: Complex64, gamma: f64) -> Complex64 {
    if t == Complex64::new(0.0, 0.0) {
        return t;
    }
    let lg = lambda.powf(gamma);
    let (s, c) = (PI * gamma).sin_cos();
    (-t * lg * c).exp() * (t * lg * s).sin() / PI
}

/// Q1: `π^{-1} e^{-λ^γ t cos πγ}`.
pub fn q1_bound(lambda: f64, t: f64, gamma: f64) -> f64 {
    (-lambda.powf(gamma) * t * (PI * gamma).cos()).exp() / PI
}

/// Q2 exactly as printed: `γ t λ^γ e^{-t λ^γ sin ε_t}` with `ε_t = t cos πγ`.
pub fn q2_bound(lambda: f64, t: f64, gamma: f64) -> f64 {
    let lg = lambda.powf(gamma);
    let eps_t = t * (PI * gamma).cos();
    gamma * t * lg * (-t * lg * eps_t.sin()).exp()
}

/// `(λ - e^{iθ}A)^{-1} C1 = e^{-iθ} (λ e^{-iθ} - A)^{-1} C1`.
fn rotated_resolvent(a: &LinearRelation, c1: &CMat, lambda: f64, theta: f64) -> Result<CMat> {
    if theta == 0.0 {
        return c_resolvent(a, c1, Complex64::new(lambda, 0.0));
    }
    let r = Complex64::from_polar(1.0, -theta);
    Ok(c_resolvent(a, c1, r * lambda)? * r)
}

/// `S_{θ,γ}(w) = ∫_0^∞ f_w(λ) (λ - e^{iθ}A)^{-1} C1 dλ` for `w` in the direct sector.
pub fn evaluate_sg_rotated(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    theta: f64,
    w: Complex64,
    tol: f64,
) -> Result<CMat> {
    check_gamma(gamma)?;
    let half = direct_half_angle(gamma);
    if w == Complex64::new(0.0, 0.0) {
        return Ok(c1.clone());
    }
    if !(w.arg().abs() < half) {
        return Err(Error::OutOfSector { z: w, half_angle: half });
    }
    let decay = DecaySpec {
        at_zero: Tail::Exponential(1.0 + gamma),
        at_inf: Tail::SuperExponential,
    };
    let r = quad_halfline_opts(
        |lam: f64| Ok(rotated_resolvent(a, c1, lam, theta)? * f_t_eval(lam, w, gamma)),
        &QuadOpts::mixed(tol),
        &decay,
    )?;
    Ok(r.value)
}

/// Rotation angle used for `z`: zero inside the direct sector, else the default `±0.9ϑ`
/// when it reaches `z`, else the midpoint between the smallest admissible angle and `ϑ`.
pub fn choose_rotation(gamma: f64, vartheta: f64, z: Complex64) -> Result<f64> {
    let half = direct_half_angle(gamma);
    let arg = z.arg();
    let a = arg.abs();
    if a < half {
        return Ok(0.0);
    }
    let phi = phi_gamma(gamma, vartheta);
    if !(a < phi) || vartheta <= 0.0 {
        return Err(Error::OutOfSector { z, half_angle: phi.max(half) });
    }
    let sign = arg.signum();
    let theta1 = 0.9 * vartheta;
    if a - gamma * theta1 < half {
        return Ok(sign * theta1);
    }
    let theta_min = (a - half) / gamma;
    Ok(sign * 0.5 * (theta_min + vartheta))
}

/// `S_γ(z)` on `Σ_{φ_γ}`, with `S_γ(0) = C1`.
pub fn evaluate_sg(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    z: Complex64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    check_gamma(gamma)?;
    if gamma == 0.5 {
        return evaluate_sg_half(a, c1, z, region, tol);
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(c1.clone());
    }
    let theta = choose_rotation(gamma, sector_angle(region), z)?;
    let w = z * Complex64::from_polar(1.0, -gamma * theta);
    evaluate_sg_rotated(a, c1, gamma, theta, w, tol)
}

/// `S_γ(t)` through the contour calculus with `f(z) = e^{-t z^γ}` (cross-check).
pub fn sg_via_calculus(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    t: Complex64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    check_gamma(gamma)?;
    let f = CalcFunction::new(format!("exp(-({t}) z^{gamma})"), f64::INFINITY, move |z| {
        (-t * (z.ln() * gamma).exp()).exp()
    });
    hfunctional_calc(a, c1, &f, &region_contour(region)?, tol)
}

/// `S_{1/2}(t)`: rotated-ray representation when the region is sectorial, else the
/// Richardson `γ -> 1/2` limit.
pub fn evaluate_sg_half(
    a: &LinearRelation,
    c1: &CMat,
    t: Complex64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    if t == Complex64::new(0.0, 0.0) {
        return Ok(c1.clone());
    }
    let vt = sector_angle(region);
    let arg = t.arg().abs();
    if vt > 0.0 {
        if !(arg < 0.5 * vt) {
            return Err(Error::OutOfSector { z: t, half_angle: 0.5 * vt });
        }
        return match sg_half_rays(a, c1, t, vt, tol) {
            Err(Error::ToleranceNotMet { .. }) => sg_half_richardson(a, c1, t, region, tol),
            other => other,
        };
    }
    if arg != 0.0 || t.re <= 0.0 {
        return Err(Error::OutOfSector { z: t, half_angle: 0.0 });
    }
    sg_half_richardson(a, c1, t, region, tol)
}

/// With `λ = u²` the kernel against `(λ - A)^{-2} C1` becomes
/// `(4u/(π t²)) (h₊ - h₋)/(2i)`, `h_± = e^{±itu}(1 ∓ itu)`; each half is moved onto the ray
/// `u = r e^{±iφ}` where it decays.
fn sg_half_rays(a: &LinearRelation, c1: &CMat, t: Complex64, vartheta: f64, tol: f64) -> Result<CMat> {
    let phi = 0.5 * (t.arg().abs() + 0.5 * vartheta);
    let decay = DecaySpec {
        at_zero: Tail::Exponential(2.0),
        at_inf: Tail::SuperExponential,
    };
    let opts = QuadOpts::mixed(tol * t.norm_sqr().min(1.0));
    let mut parts = Vec::with_capacity(2);
    for s in [1.0, -1.0] {
        let dir = Complex64::from_polar(1.0, s * phi);
        let r = quad_halfline_opts(
            |r: f64| {
                let u = dir * r;
                let itu = I * s * t * u;
                let h = itu.exp() * (1.0 - itu);
                Ok(resolvent_power(a, c1, u * u, 2)? * (u * h * dir))
            },
            &opts,
            &decay,
        )?;
        parts.push(r.value);
    }
    let scale = 4.0 / (PI * t * t) / (2.0 * I);
    Ok((&parts[0] - &parts[1]) * scale)
}

/// Quadratic extrapolation of `S_γ(t)` from [`HALF_LIMIT_GAMMAS`] to `γ = 1/2`.
pub fn sg_half_richardson(
    a: &LinearRelation,
    c1: &CMat,
    t: Complex64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    let g = HALF_LIMIT_GAMMAS;
    let mut acc = CMat::zeros(c1.nrows(), c1.ncols());
    for (k, &gk) in g.iter().enumerate() {
        let mut w = 1.0;
        for (j, &gj) in g.iter().enumerate() {
            if j != k {
                w *= (0.5 - gj) / (gk - gj);
            }
        }
        acc += evaluate_sg(a, c1, gk, t, region, tol)? * Complex64::new(w, 0.0);
    }
    Ok(acc)
}

const ML_ASYMPTOTIC: f64 = 60.0;

/// `E_{1,ζ+1}(x) ~ x^{-ζ} e^x - Σ_k x^{-k}/Γ(ζ+1-k)`, valid for `|arg x| <= π`;
/// truncated at the smallest term.
fn ml_asymptotic(x: Complex64, zeta: f64) -> Complex64 {
    let mut sum = (-zeta * x.ln()).exp() * x.exp();
    let xi = 1.0 / x;
    // 1/Γ(ζ+1-k) by the recurrence 1/Γ(a-1) = (a-1)/Γ(a)
    let mut rg = 1.0 / gamma_fn(zeta);
    let mut pw = xi;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let term = pw * rg;
        let tn = term.norm();
        if tn > last {
            break;
        }
        sum -= term;
        if tn <= 1e-17 * sum.norm() {
            break;
        }
        if tn > 0.0 {
            last = tn;
        }
        rg *= zeta - k as f64;
        pw *= xi;
    }
    sum
}

/// `∫_0^t g_ζ(t-s) e^{-sκ} ds = t^ζ E_{1,ζ+1}(-κt)`.
pub fn ml_kernel(kappa: Complex64, t: f64, zeta: f64) -> Result<Complex64> {
    let x = -kappa * t;
    let tz = t.powf(zeta);
    if x.norm() < 1.0 {
        let mut term = Complex64::new(1.0 / gamma_fn(zeta + 1.0), 0.0);
        let mut sum = term;
        for k in 0..200 {
            term *= x / (k as f64 + zeta + 1.0);
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        return Ok(sum * tz);
    }
    if x.norm() >= ML_ASYMPTOTIC {
        return Ok(ml_asymptotic(x, zeta) * tz);
    }
    // w = ((t - s)/t)^ζ removes the endpoint singularity
    let p = 1.0 / zeta;
    let opts = QuadOpts {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 2000,
    };
    let r: QuadResult<Complex64> = integrate(|w: f64| Ok((x * (1.0 - w.powf(p))).exp()), 0.0, 1.0, &opts)?;
    Ok(r.value * (tz / gamma_fn(zeta + 1.0)))
}

/// `S_{γ,ζ}(t) = ∫_0^t g_ζ(t-s) S_γ(s) ds`, integrated first in `s` against the kernel.
pub fn evaluate_sg_integrated(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    zeta: f64,
    t: f64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    check_gamma(gamma)?;
    if !(zeta >= 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("zeta = {zeta}, t = {t} must be nonnegative")));
    }
    if zeta == 0.0 {
        return evaluate_sg(a, c1, gamma, Complex64::new(t, 0.0), region, tol);
    }
    if t == 0.0 {
        return Ok(CMat::zeros(c1.nrows(), c1.ncols()));
    }
    if gamma == 0.5 {
        return evaluate_sg_integrated_nested(a, c1, gamma, zeta, t, region, tol);
    }
    let km = Complex64::from_polar(1.0, -PI * gamma);
    let kp = km.conj();
    let r = quad_halfline_opts(
        |lam: f64| {
            let lg = lam.powf(gamma);
            let k = (ml_kernel(km * lg, t, zeta)? - ml_kernel(kp * lg, t, zeta)?) / TWO_PI_I;
            Ok(c_resolvent(a, c1, Complex64::new(lam, 0.0))? * k)
        },
        &QuadOpts::mixed(tol),
        &DecaySpec::algebraic(1.0 + gamma, gamma),
    )?;
    Ok(r.value)
}

/// `S_{γ,ζ}(t)` by quadrature of `S_γ` in time (cross-check and `γ = 1/2`).
pub fn evaluate_sg_integrated_nested(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    zeta: f64,
    t: f64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    if !(zeta > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidParams(format!("zeta = {zeta}, t = {t} must be positive")));
    }
    let p = 1.0 / zeta;
    let r = integrate(
        |w: f64| {
            let s = t * (1.0 - w.powf(p));
            evaluate_sg(a, c1, gamma, Complex64::new(s, 0.0), region, 0.1 * tol)
        },
        0.0,
        1.0,
        &QuadOpts::mixed(tol),
    )?;
    Ok(r.value * Complex64::new(t.powf(zeta) / gamma_fn(zeta + 1.0), 0.0))
}

/// `g_{ζ+1}(t) C1`, the inhomogeneous term of the integrated Cauchy problem.
pub fn g_next_c1(c1: &CMat, zeta: f64, t: f64) -> CMat {
    c1 * Complex64::new(gzeta_eval(zeta + 1.0, t), 0.0)
}

/// `F_γ(λ)`, the Laplace transform of `S_γ`, from the rotated `v`-integral.
///
/// `θ` enters with sign `-|θ|` for `arg λ >= 0` and `+|θ|` below the axis.
pub fn f_lambda_eval(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    theta: f64,
    lambda: Complex64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    check_gamma(gamma)?;
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParams("lambda must be nonzero".into()));
    }
    let vt = sector_angle(region);
    if theta != 0.0 && theta.abs() >= vt {
        return Err(Error::InvalidParams(format!("|theta| = {} must be below {vt}", theta.abs())));
    }
    let th = if lambda.arg() >= 0.0 { -theta.abs() } else { theta.abs() };
    let limit = PI * (1.0 - gamma);
    if !((lambda.arg() + th * gamma).abs() < limit) {
        return Err(Error::OutOfSector {
            z: lambda,
            half_angle: limit - theta.abs() * gamma,
        });
    }
    let (sg, cg) = (PI * gamma).sin_cos();
    let lam_rot = lambda * Complex64::from_polar(1.0, th * gamma);
    let r = quad_halfline_opts(
        |v: f64| {
            let vg = v.powf(gamma);
            let den = (lam_rot + vg * cg).powi(2) + vg * vg * sg * sg;
            Ok(rotated_resolvent(a, c1, v, th)? * (vg / den))
        },
        &QuadOpts::mixed(tol),
        &DecaySpec::algebraic(1.0 + gamma, gamma),
    )?;
    Ok(r.value * (Complex64::from_polar(sg / PI, th * gamma)))
}

/// `(·^w e^{-z ·^γ})_{C1}(A)` as the cut integral
/// `(1/2πi) ∫_0^∞ λ^w [e^{-iwπ} e^{-zλ^γ e^{-iπγ}} - e^{iwπ} e^{-zλ^γ e^{iπγ}}] (λ - A)^{-1} C1 dλ`.
pub fn sg_weighted(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    z: Complex64,
    w: Complex64,
    tol: f64,
) -> Result<CMat> {
    check_gamma(gamma)?;
    let half = direct_half_angle(gamma);
    if !(z.arg().abs() < half) || z == Complex64::new(0.0, 0.0) {
        return Err(Error::OutOfSector { z, half_angle: half });
    }
    if !(w.re > -1.0) {
        return Err(Error::InvalidParams(format!("weight exponent {w} needs Re w > -1")));
    }
    let em = Complex64::from_polar(1.0, -PI * gamma);
    let ep = em.conj();
    let wm = (-I * w * PI).exp();
    let wp = (I * w * PI).exp();
    let decay = DecaySpec {
        at_zero: Tail::Exponential(1.0 + w.re),
        at_inf: Tail::SuperExponential,
    };
    let r = quad_halfline_opts(
        |lam: f64| {
            let lg = lam.powf(gamma);
            let lw = (w * lam.ln()).exp();
            let k = lw * (wm * (-z * lg * em).exp() - wp * (-z * lg * ep).exp()) / TWO_PI_I;
            Ok(c_resolvent(a, c1, Complex64::new(lam, 0.0))? * k)
        },
        &QuadOpts::mixed(tol),
        &decay,
    )?;
    Ok(r.value)
}

/// Right-hand side of the fractional-derivative identity for `u(t) = S_γ(t e^{iθ})`:
/// `e^{iθβ} (·^{γβ} e^{-z·^γ})_{C1}(A)` with `z = t e^{iθ}`.
pub fn metallica_rhs(
    a: &LinearRelation,
    c1: &CMat,
    gamma: f64,
    beta: f64,
    theta: f64,
    t: f64,
    tol: f64,
) -> Result<CMat> {
    let z = Complex64::from_polar(t, theta);
    let v = sg_weighted(a, c1, gamma, z, Complex64::new(gamma * beta, 0.0), tol)?;
    Ok(v * Complex64::from_polar(1.0, theta * beta))
}

/// `d/dz S_γ(z) = -(·^γ e^{-z·^γ})_{C1}(A)`.
pub fn evaluate_sg_deriv(a: &LinearRelation, c1: &CMat, gamma: f64, z: Complex64, tol: f64) -> Result<CMat> {
    Ok(-sg_weighted(a, c1, gamma, z, Complex64::new(gamma, 0.0), tol)?)
}

/// `∫_0^∞ λ^n f_t(λ) (λ - A)^{-1} C1 dλ`, an element of `A^n S_γ(t)`.
pub fn sg_moment(a: &LinearRelation, c1: &CMat, gamma: f64, t: Complex64, n: u32, tol: f64) -> Result<CMat> {
    check_gamma(gamma)?;
    let half = direct_half_angle(gamma);
    if !(t.arg().abs() < half) || t == Complex64::new(0.0, 0.0) {
        return Err(Error::OutOfSector { z: t, half_angle: half });
    }
    let decay = DecaySpec {
        at_zero: Tail::Exponential(n as f64 + 1.0 + gamma),
        at_inf: Tail::SuperExponential,
    };
    // the resolvent decays like 1/λ, so cancellation is governed by the (n-1)-th kernel mass
    let floor = if n == 0 {
        0.0
    } else {
        100.0 * f64::EPSILON * q1_mass(n - 1, t.re, gamma) * c1.norm()
    };
    let opts = QuadOpts {
        abs_tol: tol.max(floor),
        rel_tol: tol,
        max_intervals: 4000,
    };
    let r = quad_halfline_opts(
        |lam: f64| Ok(c_resolvent(a, c1, Complex64::new(lam, 0.0))? * (f_t_eval(lam, t, gamma) * lam.powi(n as i32))),
        &opts,
        &decay,
    )?;
    Ok(r.value)
}

/// `∫_0^∞ λ^n π^{-1} e^{-λ^γ t cos πγ} dλ = Γ((n+1)/γ) / (γ π ε_t^{(n+1)/γ})`.
pub fn q1_mass(n: u32, t: f64, gamma: f64) -> f64 {
    let p = (n as f64 + 1.0) / gamma;
    let eps_t = t * (PI * gamma).cos();
    gamma_fn(p) / (gamma * PI * eps_t.powf(p))
}

/// `∫_0^∞ λ^n f_t(λ) dλ` and the Q1 mass `∫ λ^n π^{-1} e^{-λ^γ ε_t} dλ` it is measured against.
pub fn kernel_moment(n: u32, t: f64, gamma: f64, tol: f64) -> Result<(f64, f64)> {
    kernel_moment_detuned(n, t, gamma, 0.0, tol)
}

/// As [`kernel_moment`] with the oscillating factor `sin(t λ^{γ'} sin πγ')`, `γ' = γ + detune`.
pub fn kernel_moment_detuned(n: u32, t: f64, gamma: f64, detune: f64, tol: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if gamma == 0.5 || !(t > 0.0) {
        return Err(Error::InvalidParams(format!("need gamma < 1/2 and t > 0, got {gamma}, {t}")));
    }
    let mass = q1_mass(n, t, gamma);
    let opts = QuadOpts {
        abs_tol: tol.max(100.0 * f64::EPSILON * mass),
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let decay = DecaySpec {
        at_zero: Tail::Exponential(n as f64 + 1.0 + gamma.min(gamma + detune)),
        at_inf: Tail::SuperExponential,
    };
    let gs = gamma + detune;
    let damp = t * (PI * gamma).cos();
    let osc = t * (PI * gs).sin();
    let r = quad_halfline_opts(
        |lam: f64| {
            let v = (-damp * lam.powf(gamma)).exp() * (osc * lam.powf(gs)).sin() / PI;
            Ok(Complex64::new(v * lam.powi(n as i32), 0.0))
        },
        &opts,
        &decay,
    )?;
    Ok((r.value.re, mass))
}

/// Incomplete problems solved by the semigroups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Problem {
    /// `D^β_- u(t) ∈ e^{iθβ} (-A)_{γβ} u(t)`, solved by `u(t) = S_γ(t e^{iθ}) x`
    #[serde(rename = "fp")]
    FP { beta: f64, theta: f64, gamma: f64 },
    /// `u''(t) ∈ -A u(t)`, solved by `u(t) = S_{1/2}(t) x`
    #[serde(rename = "p2")]
    P2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub problem: Problem,
}

impl Trajectory {
    pub fn state(&self, k: usize) -> CVec {
        CVec::from_vec(self.states[k].clone())
    }

    pub fn sup_norm(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Operator behind a problem at time `t`.
pub fn problem_operator(
    a: &LinearRelation,
    c1: &CMat,
    problem: &Problem,
    t: f64,
    region: &RegionParams,
    tol: f64,
) -> Result<CMat> {
    match *problem {
        Problem::FP { theta, gamma, beta } => {
            if !(beta > 0.0) {
                return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
            }
            evaluate_sg(a, c1, gamma, Complex64::from_polar(t, theta), region, tol)
        }
        Problem::P2 => evaluate_sg_half(a, c1, Complex64::new(t, 0.0), region, tol),
    }
}

/// Sample `u(t)` at the given times.
pub fn solve_incomplete(
    a: &LinearRelation,
    c1: &CMat,
    problem: &Problem,
    x: &CVec,
    times: &[f64],
    region: &RegionParams,
    tol: f64,
) -> Result<Trajectory> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!("x has {} entries, relation dim {}", x.len(), a.dim())));
    }
    if times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParams("times must be positive and strictly increasing".into()));
    }
    let states: Vec<Result<Vec<Complex64>>> = times
        .par_iter()
        .map(|&t| {
            let s = problem_operator(a, c1, problem, t, region, tol)?;
            Ok((s * x).iter().copied().collect())
        })
        .collect();
    let states = states.into_iter().collect::<Result<Vec<_>>>()?;
    if states.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::ToleranceNotMet { achieved: f64::INFINITY, requested: tol });
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        problem: *problem,
    })
}
