//! Named identities run as residual suites over an [`Instance`].
//!
//! In control mode the right-hand side of every identity is evaluated for `A + 0.01 I`
//! (with `C1` rebuilt), so a working suite must report failure.

use crate::error::{Error, Result};
use crate::fracderiv::{gzeta_eval, liouville_right_deriv, FracParams};
use crate::instance::Instance;
use crate::linalg::{c, op_norm, CMat, CVec};
use crate::linrel::LinearRelation;
use crate::powers::{
    hfunctional_calc, neg_int_power_apply, neg_power, noisy_rank_tol, power_membership, power_relation,
    region_contour, CalcFunction, PowerSpec, Route,
};
use crate::quad::{integrate_semi_infinite, QuadOpts, Tail};
use crate::resolvent::{c_resolvent, resolvent_power, RegionMode, RegionParams};
use crate::semigroup::{
    evaluate_sg, evaluate_sg_deriv, evaluate_sg_half, evaluate_sg_integrated, f_lambda_eval, kernel_moment_detuned,
    metallica_rhs, sg_moment,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const CATALOG: [&str; 19] = [
    "resolvent_eq",
    "creso",
    "genres_i",
    "genres_ii",
    "resequ",
    "homomorphism",
    "power_add",
    "residue",
    "s_inclusions",
    "sg_law",
    "sg_limit",
    "sg_commute",
    "subgen_AB",
    "qzero",
    "an_membership",
    "frac_deriv",
    "second_order",
    "laplace",
    "klim",
];

/// Shift applied to the operator in control mode.
pub const CONTROL_SHIFT: f64 = 0.01;
/// Detuning of the oscillating exponent in the `qzero` control.
pub const CONTROL_DETUNE: f64 = 0.01;
/// Quadrature tolerance as a fraction of the identity threshold.
pub const QUAD_FRACTION: f64 = 0.1;
/// Residual recorded for a sample whose computation failed.
pub const FAILED: f64 = f64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TolClass {
    Alg,
    Quad,
    Fd,
    Limit,
}

pub fn tol_class(id: &str) -> Result<TolClass> {
    Ok(match id {
        "resolvent_eq" | "creso" | "genres_i" | "genres_ii" | "resequ" | "klim" | "qzero" => TolClass::Alg,
        "homomorphism" | "power_add" | "residue" | "s_inclusions" | "sg_law" | "sg_commute" | "subgen_AB"
        | "an_membership" | "laplace" => TolClass::Quad,
        "frac_deriv" | "second_order" => TolClass::Fd,
        "sg_limit" => TolClass::Limit,
        _ => return Err(Error::UnknownIdentity(id.to_string())),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub digest: String,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity_id: String,
    pub control: bool,
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub max_residual: f64,
    pub tol: f64,
    pub quad_tol: f64,
    pub pass: bool,
    /// wall time; left out of the serialized form so reports compare byte for byte
    #[serde(skip)]
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// threshold; `None` takes the instance default for the identity's class
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub control: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: None,
            samples: None,
            seed: None,
            control: false,
        }
    }
}

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Halton point `k` in coordinate `dim`, offset by the seed.
pub fn halton(seed: u64, k: u64, dim: usize) -> f64 {
    let base = PRIMES[dim % PRIMES.len()];
    let mut i = seed.wrapping_mul(7919).wrapping_add(k + 1);
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

struct Ctx<'a> {
    lhs: &'a Instance,
    rhs: Instance,
    tol: f64,
    qtol: f64,
    samples: usize,
    seed: u64,
}

impl Ctx<'_> {
    fn u(&self, k: usize, dim: usize) -> f64 {
        halton(self.seed, k as u64, dim)
    }

    /// Point of the region away from its boundary.
    fn point(&self, k: usize) -> Complex64 {
        region_point(&self.lhs.region, self.u(k, 0), self.u(k, 1))
    }

    fn vector(&self, k: usize) -> CVec {
        let n = self.lhs.dim();
        CVec::from_fn(n, |i, _| {
            c(2.0 * self.u(k, 2 + 2 * i) - 1.0, 2.0 * self.u(k, 3 + 2 * i) - 1.0)
        })
    }

    /// Random element of the column span of `basis`.
    fn combo(&self, basis: &CMat, k: usize) -> CVec {
        let m = basis.ncols();
        let coef = CVec::from_fn(m, |i, _| c(2.0 * self.u(k, 2 + 2 * i) - 1.0, 2.0 * self.u(k, 3 + 2 * i) - 1.0));
        basis * coef
    }
}

pub fn region_point(region: &RegionParams, u: f64, v: f64) -> Complex64 {
    match region.mode {
        RegionMode::HS => Complex64::from_polar(0.3 * 20f64.powf(u), (2.0 * v - 1.0) * 0.8 * region.theta),
        RegionMode::H => {
            let xi = region.eps.max(0.3) + 5.7 * u;
            let eta = (2.0 * v - 1.0) * 0.8 * region.c * (1.0 + xi).powf(-region.alpha);
            c(xi, eta)
        }
    }
}

fn col(v: &CVec) -> CMat {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

fn to_vec(m: &CMat) -> CVec {
    m.column(0).into_owned()
}

/// `‖Σ terms‖ / (1 + max ‖term‖)`.
fn balance(terms: &[CMat]) -> f64 {
    let mut sum = terms[0].clone() * c(0.0, 0.0);
    let mut big = 0.0f64;
    for t in terms {
        sum += t;
        big = big.max(op_norm(t));
    }
    op_norm(&sum) / (1.0 + big)
}

fn sample(digest: String, r: Result<f64>) -> Sample {
    match r {
        Ok(v) if v.is_finite() => Sample {
            digest,
            residual: v,
            error: None,
        },
        Ok(v) => Sample {
            digest,
            residual: FAILED,
            error: Some(format!("non-finite residual {v}")),
        },
        Err(e) => Sample {
            digest,
            residual: FAILED,
            error: Some(e.to_string()),
        },
    }
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn cpow(m: &CMat, k: usize) -> CMat {
    let mut r = CMat::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        r = &r * m;
    }
    r
}

fn neg_a(a: &LinearRelation) -> LinearRelation {
    a.scalar_shift_mul(c(-1.0, 0.0), c(0.0, 0.0))
}

/// Run one identity; unknown ids are the only hard error.
pub fn verify_identity(id: &str, inst: &Instance, opts: &VerifyOptions) -> Result<ResidualReport> {
    let class = tol_class(id)?;
    let d = inst.defaults();
    let tol = opts.tol.unwrap_or(match class {
        TolClass::Alg => d.tol_alg,
        TolClass::Quad => d.tol_quad,
        TolClass::Fd => d.tol_fd,
        TolClass::Limit => d.tol_limit,
    });
    let qtol = tol * QUAD_FRACTION;
    let seed = opts.seed.unwrap_or(d.seed);
    let samples = opts.samples.unwrap_or(d.samples).max(1);
    let start = Instant::now();
    let rhs = if opts.control {
        inst.perturbed(CONTROL_SHIFT)
    } else {
        Ok(inst.clone())
    };
    let list = match rhs {
        Ok(rhs) => {
            let ctx = Ctx {
                lhs: inst,
                rhs,
                tol,
                qtol,
                samples,
                seed,
            };
            run(id, &ctx, opts.control)
        }
        Err(e) => vec![sample("control setup".into(), Err(e))],
    };
    let max_residual = list.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(ResidualReport {
        identity_id: id.to_string(),
        control: opts.control,
        seed,
        pass: !list.is_empty() && max_residual <= tol,
        samples: list,
        max_residual,
        tol,
        quad_tol: if class == TolClass::Alg { 0.0 } else { qtol },
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Every catalog identity, in catalog order.
pub fn verify_all(inst: &Instance, opts: &VerifyOptions) -> Vec<ResidualReport> {
    CATALOG
        .par_iter()
        .map(|id| verify_identity(id, inst, opts).expect("catalog ids are known"))
        .collect()
}

fn run(id: &str, ctx: &Ctx, control: bool) -> Vec<Sample> {
    match id {
        "resolvent_eq" => resolvent_eq(ctx),
        "creso" => creso(ctx),
        "genres_i" => genres_i(ctx),
        "genres_ii" => genres_ii(ctx),
        "resequ" => resequ(ctx),
        "homomorphism" => homomorphism(ctx),
        "power_add" => power_add(ctx),
        "residue" => residue(ctx),
        "s_inclusions" => s_inclusions(ctx),
        "sg_law" => sg_law(ctx),
        "sg_limit" => sg_limit(ctx),
        "sg_commute" => sg_commute(ctx),
        "subgen_AB" => subgen_ab(ctx),
        "qzero" => qzero(ctx, control),
        "an_membership" => an_membership(ctx),
        "frac_deriv" => frac_deriv(ctx),
        "second_order" => second_order(ctx),
        "laplace" => laplace(ctx),
        "klim" => klim(ctx),
        _ => unreachable!("checked by tol_class"),
    }
}

fn par_samples<F>(n: usize, f: F) -> Vec<Sample>
where
    F: Fn(usize) -> Sample + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

fn resolvent_eq(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    par_samples(ctx.samples, |k| {
        let (lam, mu) = (ctx.point(2 * k), ctx.point(2 * k + 1));
        let go = || -> Result<f64> {
            let rl = c_resolvent(&l.a, &l.c, lam)?;
            let rm = c_resolvent(&l.a, &l.c, mu)?;
            let rl2 = c_resolvent(&r.a, &r.c, lam)?;
            let rm2 = c_resolvent(&r.a, &r.c, mu)?;
            Ok(balance(&[&rl * &l.c, -(&rm * &l.c), -(rl2 * rm2) * (mu - lam)]))
        };
        sample(format!("lambda={} mu={}", fmt_c(lam), fmt_c(mu)), go())
    })
}

/// Circle-stencil `m`-th derivative of `λ -> (λ - A)^{-1} C`.
fn circle_derivative(a: &LinearRelation, cm: &CMat, lam: Complex64, m: usize) -> Result<CMat> {
    const N: usize = 32;
    const R: f64 = 0.05;
    let mut acc = CMat::zeros(cm.nrows(), cm.ncols());
    for j in 0..N {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / N as f64);
        acc += c_resolvent(a, cm, lam + w * R)? * w.powi(-(m as i32));
    }
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    Ok(acc * c(fact / (N as f64 * R.powi(m as i32)), 0.0))
}

fn creso(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    par_samples(ctx.samples, |k| {
        let lam = ctx.point(k);
        let go = || -> Result<f64> {
            let mut worst = 0.0f64;
            for n in 1..=4usize {
                let d = circle_derivative(&l.a, &l.c, lam, n - 1)?;
                let fact: f64 = (1..n).map(|i| i as f64).product();
                let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
                let want = resolvent_power(&r.a, &r.c, lam, n)? * c(sign * fact, 0.0);
                worst = worst.max(balance(&[d, -want]));
            }
            Ok(worst)
        };
        sample(format!("lambda={} n=1..4", fmt_c(lam)), go())
    })
}

fn genres_i(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    par_samples(ctx.samples, |k| {
        let (z, lam) = (ctx.point(2 * k), ctx.point(2 * k + 1));
        let x = col(&ctx.vector(k));
        let go = || -> Result<f64> {
            let rz = c_resolvent(&l.a, &l.c, z)?;
            let rl = c_resolvent(&l.a, &l.c, lam)?;
            let rz2 = c_resolvent(&r.a, &r.c, z)?;
            let rl2 = c_resolvent(&r.a, &r.c, lam)?;
            let mut worst = 0.0f64;
            for kk in 0..=4usize {
                let mut terms = vec![-(&rz * cpow(&rl, kk) * &x)];
                let dz = z - lam;
                let s0 = if kk % 2 == 0 { 1.0 } else { -1.0 };
                terms.push(&rz2 * cpow(&r.c, kk) * &x * (s0 / dz.powi(kk as i32)));
                for i in 1..=kk {
                    let s = if (kk - i) % 2 == 0 { 1.0 } else { -1.0 };
                    terms.push(cpow(&rl2, i) * cpow(&r.c, kk + 1 - i) * &x * (s / dz.powi((kk + 1 - i) as i32)));
                }
                worst = worst.max(balance(&terms));
            }
            Ok(worst)
        };
        sample(format!("z={} lambda={} k=0..4", fmt_c(z), fmt_c(lam)), go())
    })
}

fn genres_ii(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let l0 = l.region.lambda0;
    par_samples(ctx.samples, |k| {
        let z = ctx.point(k);
        let go = || -> Result<f64> {
            let rz = c_resolvent(&l.a, &l.c, z)?;
            let rz2 = c_resolvent(&r.a, &r.c, z)?;
            let rl2 = c_resolvent(&r.a, &r.c, l0)?;
            let shifted = l.a.scalar_shift_mul(c(-1.0, 0.0), l0);
            let n = l.dim();
            let mut worst = 0.0f64;
            for kk in 0..=4usize {
                let rel = shifted.integer_power(kk as i32);
                if rel.rank() == 0 {
                    continue;
                }
                let v = ctx.combo(rel.graph(), k);
                let x = col(&v.rows(0, n).into_owned());
                let y = col(&v.rows(n, n).into_owned());
                let dz = z - l0;
                let s0 = if kk % 2 == 0 { 1.0 } else { -1.0 };
                let mut terms = vec![
                    -(&rz * cpow(&l.c, kk) * &x),
                    &rz2 * cpow(&r.c, kk) * &y * (s0 / dz.powi(kk as i32)),
                ];
                for i in 1..=kk {
                    let s = if (kk - i) % 2 == 0 { 1.0 } else { -1.0 };
                    terms.push(cpow(&rl2, i) * cpow(&r.c, kk + 1 - i) * &y * (s / dz.powi((kk + 1 - i) as i32)));
                }
                worst = worst.max(balance(&terms));
            }
            Ok(worst)
        };
        sample(format!("z={} lambda0={} k=0..4", fmt_c(z), fmt_c(l0)), go())
    })
}

fn resequ(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let l0 = l.region.lambda0;
    par_samples(ctx.samples, |k| {
        let z = ctx.point(k);
        let x = col(&ctx.vector(k));
        let go = || -> Result<f64> {
            let rz = c_resolvent(&l.a, &l.c, z)?;
            let rz2 = c_resolvent(&r.a, &r.c, z)?;
            let cx = &r.c * &x;
            let mut worst = 0.0f64;
            for kk in 1..=4usize {
                let dz = z - l0;
                let s0 = if kk % 2 == 0 { 1.0 } else { -1.0 };
                let mut terms = vec![
                    -(&rz * resolvent_power(&l.a, &l.c, l0, kk)? * &x),
                    &rz2 * &cx * (s0 / dz.powi(kk as i32)),
                ];
                for i in 1..=kk {
                    let s = if (kk - i) % 2 == 0 { 1.0 } else { -1.0 };
                    terms.push(resolvent_power(&r.a, &r.c, l0, i)? * &cx * (s / dz.powi((kk + 1 - i) as i32)));
                }
                worst = worst.max(balance(&terms));
            }
            Ok(worst)
        };
        sample(format!("z={} k=1..4", fmt_c(z)), go())
    })
}

fn klim(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let n = l.dim();
    par_samples(ctx.samples, |k| {
        let kk = 1 + k % 3;
        let go = || -> Result<f64> {
            let ch = l.a.chains(kk);
            if ch.ncols() == 0 {
                return Ok(0.0);
            }
            let v = ctx.combo(&ch, k);
            let x = col(&v.rows(0, n).into_owned());
            let x1 = col(&v.rows(n, n).into_owned());
            let target = &l.c1 * &x;
            let mut worst = 0.0f64;
            let mut last = f64::INFINITY;
            for j in 2..=6 {
                let lam = c(10f64.powi(j), 0.0);
                let lk = lam.powi(kk as i32);
                let val = resolvent_power(&l.a, &l.c1, lam, kk)? * &x * lk;
                let err = (&val - &target).norm();
                // the gap must shrink down to the rounding floor
                if err > last * (1.0 + 1e-6) + 1e-13 * (1.0 + target.norm()) {
                    return Ok(1.0);
                }
                last = err;
                let mut terms = vec![val, -(&r.c1 * &x)];
                for m in 0..kk {
                    terms.push(-(resolvent_power(&r.a, &r.c1, lam, m + 1)? * &x1 * lam.powi(m as i32)));
                }
                worst = worst.max(balance(&terms));
            }
            Ok(worst)
        };
        sample(format!("k={kk} lambda=1e2..1e6"), go())
    })
}

fn b_sample(ctx: &Ctx, k: usize, dim: usize, lo: f64, hi: f64) -> Complex64 {
    c(lo + (hi - lo) * ctx.u(k, dim), 0.6 * ctx.u(k, dim + 1) - 0.3)
}

fn homomorphism(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    par_samples(ctx.samples, |k| {
        let (b1, b2) = (b_sample(ctx, k, 0, 0.2, 1.5), b_sample(ctx, k, 2, 0.2, 1.5));
        let go = || -> Result<f64> {
            let g = region_contour(&l.region)?;
            let (f1, f2) = (CalcFunction::power(b1), CalcFunction::power(b2));
            let a = hfunctional_calc(&l.a, &l.c1, &f1, &g, ctx.qtol)?;
            let b = hfunctional_calc(&l.a, &l.c1, &f2, &g, ctx.qtol)?;
            let ab = hfunctional_calc(&r.a, &r.c1, &f1.product(&f2), &g, ctx.qtol)?;
            Ok(op_norm(&(&a * &b - ab * &r.c1)) / (1.0 + op_norm(&a) * op_norm(&b)))
        };
        sample(format!("b1={} b2={}", fmt_c(b1), fmt_c(b2)), go())
    })
}

fn power_add(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    par_samples(ctx.samples, |k| {
        let (b1, b2) = (b_sample(ctx, k, 0, 0.2, 1.5), b_sample(ctx, k, 2, 0.2, 1.5));
        let go = || -> Result<f64> {
            let p = |a: &LinearRelation, c1: &CMat, b| {
                neg_power(a, c1, &PowerSpec::new(b, Route::Contour), &l.region, ctx.qtol)
            };
            let p1 = p(&l.a, &l.c1, b1)?;
            let p2 = p(&l.a, &l.c1, b2)?;
            let p12 = p(&r.a, &r.c1, b1 + b2)?;
            Ok(op_norm(&(&p1 * &p2 - p12 * &r.c1)) / (1.0 + op_norm(&p1) * op_norm(&p2)))
        };
        sample(format!("b1={} b2={}", fmt_c(b1), fmt_c(b2)), go())
    })
}

fn residue(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    par_samples(3, |k| {
        let n = k + 1;
        let go = || -> Result<f64> {
            let g = region_contour(&l.region)?;
            let v = hfunctional_calc(&l.a, &l.c1, &CalcFunction::power(c(n as f64, 0.0)), &g, ctx.qtol)?;
            let w = neg_int_power_apply(&r.a, n, &r.c1)?;
            Ok(op_norm(&(&v - &w)) / (1.0 + op_norm(&w)))
        };
        sample(format!("n={n}"), go())
    })
}

fn s_inclusions(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    par_samples(ctx.samples, |k| {
        let (b1, b2) = (b_sample(ctx, k, 0, 0.2, 0.8), b_sample(ctx, k, 2, 0.2, 0.8));
        let go = || -> Result<f64> {
            let rt = noisy_rank_tol(ctx.qtol);
            let pr = |inst: &Instance, b| -> Result<LinearRelation> {
                Ok(power_relation(&inst.a, &inst.c1, b, &inst.region, ctx.qtol)?.with_rank_tol(rt))
            };
            let conj = |inst: &Instance, x: &LinearRelation| -> Result<LinearRelation> {
                let c1 = LinearRelation::from_matrix(&inst.c1)?.with_rank_tol(rt);
                c1.inverse().compose(&x.compose(&c1)?)
            };
            let (p1, p2, p12) = (pr(l, b1)?, pr(l, b2)?, pr(l, b1 + b2)?);
            let (q1, q2, q12) = (pr(r, b1)?, pr(r, b2)?, pr(r, b1 + b2)?);
            // P_b ⊆ C1^{-1} P_b C1, P_{b1+b2} ⊆ C1^{-1} P_{b1} P_{b2} C1, P_{b1} P_{b2} ⊆ C1^{-1} P_{b1+b2} C1
            let s1 = p1.subset_of(&conj(r, &q1)?, 0.0).1;
            let s2 = p12.subset_of(&conj(r, &q1.compose(&q2)?)?, 0.0).1;
            let s3 = p1.compose(&p2)?.subset_of(&conj(r, &q12)?, 0.0).1;
            Ok(s1.max(s2).max(s3))
        };
        sample(format!("b1={} b2={}", fmt_c(b1), fmt_c(b2)), go())
    })
}

fn sg_at(inst: &Instance, gamma: f64, z: Complex64, tol: f64) -> Result<CMat> {
    evaluate_sg(&inst.a, &inst.c1, gamma, z, &inst.region, tol)
}

fn sg_law(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let ts = [0.3, 0.7, 1.1];
    let mut jobs = Vec::new();
    for g in [0.2, 0.45, 0.5] {
        for &t1 in &ts {
            for &t2 in &ts {
                jobs.push((g, t1, t2));
            }
        }
    }
    jobs.par_iter()
        .map(|&(g, t1, t2)| {
            let go = || -> Result<f64> {
                let s1 = sg_at(l, g, c(t1, 0.0), ctx.qtol)?;
                let s2 = sg_at(l, g, c(t2, 0.0), ctx.qtol)?;
                let s12 = sg_at(r, g, c(t1 + t2, 0.0), ctx.qtol)?;
                Ok(op_norm(&(&s1 * &s2 - s12 * &r.c1)) / (1.0 + op_norm(&s1) * op_norm(&s2)))
            };
            sample(format!("gamma={g} t1={t1} t2={t2}"), go())
        })
        .collect()
}

fn sg_limit(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let gamma = l.defaults().gamma;
    par_samples(ctx.samples.min(3), |k| {
        let go = || -> Result<(f64, f64)> {
            let dom = l.a.power_domain(1);
            if dom.ncols() == 0 {
                return Ok((0.0, 0.0));
            }
            let x = col(&ctx.combo(&dom, k));
            let target = &l.c1 * &x;
            let scale = target.norm().max(1e-8 * x.norm()).max(f64::MIN_POSITIVE);
            let mut last = f64::INFINITY;
            let mut vals = Vec::new();
            for j in 1..=11 {
                let v = sg_at(l, gamma, c(2f64.powi(-j), 0.0), ctx.qtol * 1e-2)? * &x;
                let err = (&v - &target).norm();
                // approach to C1 x must be monotone
                if err > last * (1.0 + 1e-9) {
                    return Ok((1.0, err / scale));
                }
                last = err;
                vals.push(v);
            }
            let err11 = (&vals[10] - &target).norm() / scale;
            // two Richardson steps in h = 2^{-j}
            let r10 = &vals[10] * c(2.0, 0.0) - &vals[9];
            let r9 = &vals[9] * c(2.0, 0.0) - &vals[8];
            let limit = (r10 * c(4.0, 0.0) - r9) * c(1.0 / 3.0, 0.0);
            Ok(((limit - &r.c1 * &x).norm() / scale, err11))
        };
        match go() {
            Ok((res, e)) => sample(format!("gamma={gamma} j=1..11 defect11={e:.3e}"), Ok(res)),
            Err(e) => sample(format!("gamma={gamma} j=1..11"), Err(e)),
        }
    })
}

fn pair_from(rel: &LinearRelation, ctx: &Ctx, k: usize) -> Option<(CVec, CVec)> {
    if rel.rank() == 0 {
        return None;
    }
    let n = rel.dim();
    let v = ctx.combo(rel.graph(), k);
    Some((v.rows(0, n).into_owned(), v.rows(n, n).into_owned()))
}

fn sg_commute(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let gamma = l.defaults().gamma;
    let mut jobs = Vec::new();
    for nu in [0.5, 1.0] {
        for z in [c(0.6, 0.0), Complex64::from_polar(1.2, 0.3)] {
            jobs.push((nu, z));
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(nu, z))| {
            let go = || -> Result<f64> {
                let rel = power_relation(&l.a, &l.c1, c(nu, 0.0), &l.region, ctx.qtol)?;
                let Some((x, y)) = pair_from(&rel, ctx, k) else {
                    return Ok(0.0);
                };
                let s = sg_at(l, gamma, z, ctx.qtol)?;
                let (sx, sy) = (&s * &x, &s * &y);
                Ok(power_membership(&r.a, &r.c1, c(nu, 0.0), &sx, &sy, &r.region, ctx.qtol)?.1)
            };
            sample(format!("nu={nu} z={}", fmt_c(z)), go())
        })
        .collect()
}

fn subgen_ab(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let gamma = l.defaults().gamma;
    let mut jobs = Vec::new();
    for zeta in [0.5, 1.0] {
        for t in [0.5, 1.0] {
            jobs.push((zeta, t));
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(zeta, t))| {
            let go = || -> Result<(f64, f64)> {
                let rel = power_relation(&l.a, &l.c1, c(gamma, 0.0), &l.region, ctx.qtol)?;
                let Some((x, w)) = pair_from(&rel, ctx, k) else {
                    return Ok((0.0, 0.0));
                };
                // (x, -w) lies in the generator -(-A)_γ
                let y = -w;
                let sz = |inst: &Instance, z| evaluate_sg_integrated(&inst.a, &inst.c1, gamma, z, t, &inst.region, ctx.qtol);
                let s_z = sz(l, zeta)? * &x;
                let gx = &l.c1 * &x * c(gzeta_eval(zeta + 1.0, t), 0.0);
                let v = &s_z - &gx;
                let u_rhs = sz(r, zeta + 1.0)?;
                let res_a = balance(&[col(&v), -col(&(&u_rhs * &y))]);
                let u = sz(l, zeta + 1.0)? * &x;
                let res_b = power_membership(&r.a, &r.c1, c(gamma, 0.0), &u, &(-&v), &r.region, ctx.qtol)?.1;
                // the integral-generator reading with g_ζ in place of g_{ζ+1}
                let alt = (&s_z - &l.c1 * &x * c(gzeta_eval(zeta, t), 0.0) - &u_rhs * &y).norm() / (1.0 + v.norm());
                Ok((res_a.max(res_b), alt))
            };
            match go() {
                Ok((res, alt)) => sample(format!("zeta={zeta} t={t} g_zeta_variant={alt:.3e}"), Ok(res)),
                Err(e) => sample(format!("zeta={zeta} t={t}"), Err(e)),
            }
        })
        .collect()
}

fn qzero(ctx: &Ctx, control: bool) -> Vec<Sample> {
    let detune = if control { CONTROL_DETUNE } else { 0.0 };
    par_samples(3, |n| {
        let r = kernel_moment_detuned(n as u32, 1.0, 0.3, detune, ctx.tol * 1e-2).map(|(v, _)| v.abs());
        sample(format!("n={n} t=1 gamma=0.3"), r)
    })
}

fn an_membership(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let gamma = l.defaults().gamma;
    let mut jobs = Vec::new();
    for n in [1u32, 2] {
        for t in [1.0, 2.0] {
            jobs.push((n, t));
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(n, t))| {
            let x = col(&ctx.vector(k));
            let go = || -> Result<f64> {
                let u = to_vec(&(sg_at(l, gamma, c(t, 0.0), ctx.qtol)? * &x));
                let m = to_vec(&(sg_moment(&r.a, &r.c1, gamma, c(t, 0.0), n, ctx.qtol)? * &x));
                let an = l.a.integer_power(n as i32);
                let (_, d) = an.contains_pair(&u, &m, ctx.tol)?;
                Ok(d / (1.0 + u.norm() + m.norm()))
            };
            sample(format!("n={n} t={t}"), go())
        })
        .collect()
}

fn frac_deriv(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let gamma = l.defaults().gamma;
    let inner = 1e-12f64.max(ctx.qtol * 1e-6);
    let mut jobs = Vec::new();
    for beta in [2.0, 3.0] {
        for theta in [0.0, 0.3] {
            for s in [0.5, 1.0] {
                jobs.push((beta, theta, s));
            }
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(beta, theta, s))| {
            let x = col(&ctx.vector(k));
            let go = || -> Result<f64> {
                let rot = Complex64::from_polar(1.0, theta);
                let du = |t: f64| -> Result<CMat> {
                    Ok(evaluate_sg_deriv(&l.a, &l.c1, gamma, rot * t, inner)? * &x * rot)
                };
                let p = FracParams::new(beta, None)?;
                let lhs: CMat = liouville_right_deriv(du, &p, s, 10.0 * inner)?;
                let rhs = metallica_rhs(&r.a, &r.c1, gamma, beta, theta, s, inner)? * &x;
                Ok((&lhs - &rhs).norm() / (rhs.norm() + 1e-12))
            };
            sample(format!("beta={beta} theta={theta} s={s}"), go())
        })
        .collect()
}

fn second_order(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let h = 1e-3;
    let inner = 1e-12;
    let minus_a = neg_a(&r.a);
    [0.5, 1.0, 2.0]
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let x = col(&ctx.vector(k));
            let go = || -> Result<f64> {
                let s = |t: f64| -> Result<CMat> {
                    Ok(evaluate_sg_half(&l.a, &l.c1, c(t, 0.0), &l.region, inner)? * &x)
                };
                let (sm, s0, sp) = (s(t - h)?, s(t)?, s(t + h)?);
                let dd = (&sp - &s0 * c(2.0, 0.0) + &sm) * c(1.0 / (h * h), 0.0);
                let (u, v) = (to_vec(&s0), to_vec(&dd));
                let (_, d) = minus_a.contains_pair(&u, &v, ctx.tol)?;
                Ok(d / (1.0 + u.norm() + v.norm()))
            };
            sample(format!("t={t} h={h}"), go())
        })
        .collect()
}

fn laplace(ctx: &Ctx) -> Vec<Sample> {
    let (l, r) = (ctx.lhs, &ctx.rhs);
    let mut jobs = Vec::new();
    for g in [0.5, 0.3] {
        for lam in [1.0, 2.0] {
            jobs.push((g, lam));
        }
    }
    jobs.par_iter()
        .map(|&(g, lam)| {
            let go = || -> Result<f64> {
                let q = integrate_semi_infinite(
                    |t: f64| Ok(sg_at(l, g, c(t, 0.0), ctx.qtol * 1e-2)? * c((-lam * t).exp(), 0.0)),
                    Tail::Exponential(lam),
                    &QuadOpts::mixed(ctx.qtol),
                )?;
                let f = f_lambda_eval(&r.a, &r.c1, g, 0.0, c(lam, 0.0), &r.region, ctx.qtol)?;
                Ok(op_norm(&(&q.value - &f)) / (1.0 + op_norm(&f)))
            };
            sample(format!("gamma={g} lambda={lam}"), go())
        })
        .collect()
}
