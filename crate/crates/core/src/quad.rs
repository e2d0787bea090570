//! Adaptive Gauss-Kronrod quadrature for scalar- and matrix-valued integrands.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Values the engine can integrate.
pub trait QuadValue: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += w * other`
    fn axpy(&mut self, w: f64, other: &Self);
    fn norm(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn cscale(&self, w: Complex64) -> Self;
}

impl QuadValue for Complex64 {
    fn zeros_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, w: f64, other: &Self) {
        *self += other * w;
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
    fn cscale(&self, w: Complex64) -> Self {
        self * w
    }
}

impl QuadValue for CMat {
    fn zeros_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }
    fn axpy(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b * w;
        }
    }
    fn norm(&self) -> f64 {
        // Frobenius
        self.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.is_finite())
    }
    fn cscale(&self, w: Complex64) -> Self {
        self * w
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadResult<V> {
    pub value: V,
    pub est_error: f64,
    pub tail_bound: f64,
    pub evaluations: usize,
}

/// Accuracy request: success when `error <= max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl QuadOpts {
    /// Absolute `tol` below unit scale, relative above it.
    pub fn mixed(tol: f64) -> Self {
        QuadOpts {
            abs_tol: tol,
            rel_tol: tol,
            max_intervals: 4000,
        }
    }

    pub fn target(&self, value_norm: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value_norm)
    }
}

struct Piece<V> {
    a: f64,
    b: f64,
    val: V,
    err: f64,
}

fn gk21<V: QuadValue, F: FnMut(f64) -> Result<V>>(f: &mut F, a: f64, b: f64) -> Result<(V, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut resk = fc.zeros_like();
    resk.axpy(WGK[10], &fc);
    let mut resg = fc.zeros_like();
    let mut fv = Vec::with_capacity(21);
    fv.push((WGK[10], fc.clone()));
    let mut resabs = WGK[10] * fc.norm();
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        resk.axpy(WGK[j], &f1);
        resk.axpy(WGK[j], &f2);
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            resg.axpy(WG[j / 2], &f1);
            resg.axpy(WG[j / 2], &f2);
        }
        fv.push((WGK[j], f1));
        fv.push((WGK[j], f2));
    }
    if !resk.is_finite() {
        return Err(Error::ToleranceNotMet {
            achieved: f64::INFINITY,
            requested: 0.0,
        });
    }
    // resasc: integral of |f - mean|
    let mut mean = resk.zeros_like();
    mean.axpy(0.5, &resk);
    let mut resasc = 0.0;
    for (w, v) in &fv {
        let mut d = v.clone();
        d.axpy(-1.0, &mean);
        resasc += w * d.norm();
    }
    let habs = half.abs();
    let mut diff = resk.clone();
    diff.axpy(-1.0, &resg);
    let mut err = diff.norm() * habs;
    let resasc = resasc * habs;
    let resabs = resabs * habs;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    let mut val = resk.zeros_like();
    val.axpy(half, &resk);
    Ok((val, err))
}

/// Neumaier-compensated sum of the piece values in left-to-right order.
fn compensated_sum<V: QuadValue>(pieces: &[Piece<V>]) -> V {
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&i, &j| pieces[i].a.total_cmp(&pieces[j].a));
    let mut sum = pieces[0].val.zeros_like();
    let mut comp = sum.zeros_like();
    for i in order {
        let mut t = sum.clone();
        t.axpy(1.0, &pieces[i].val);
        let mut lost = sum.clone();
        lost.axpy(-1.0, &t);
        lost.axpy(1.0, &pieces[i].val);
        comp.axpy(1.0, &lost);
        sum = t;
    }
    sum.axpy(1.0, &comp);
    sum
}

/// Adaptive integration of `f` over `[a, b]` (`a > b` allowed).
pub fn integrate<V, F>(mut f: F, a: f64, b: f64, opts: &QuadOpts) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let mut evals = 0usize;
    let mut counted = |x: f64| {
        evals += 1;
        f(x)
    };
    let (v, e) = gk21(&mut counted, a, b)?;
    let mut pieces = vec![Piece { a, b, val: v, err: e }];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.err).sum();
        let value = compensated_sum(&pieces);
        let target = opts.target(value.norm());
        if total_err <= target {
            drop(counted);
            return Ok(QuadResult {
                value,
                est_error: total_err,
                tail_bound: 0.0,
                evaluations: evals,
            });
        }
        if pieces.len() >= opts.max_intervals {
            return Err(Error::ToleranceNotMet {
                achieved: total_err,
                requested: target,
            });
        }
        // bisect the worst piece; ties go to the leftmost index
        let mut worst = 0;
        for (i, p) in pieces.iter().enumerate() {
            if p.err > pieces[worst].err {
                worst = i;
            }
        }
        let p = pieces.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m == p.a || m == p.b {
            return Err(Error::ToleranceNotMet {
                achieved: total_err,
                requested: target,
            });
        }
        let (v1, e1) = gk21(&mut counted, p.a, m)?;
        let (v2, e2) = gk21(&mut counted, m, p.b)?;
        pieces.push(Piece { a: p.a, b: m, val: v1, err: e1 });
        pieces.push(Piece { a: m, b: p.b, val: v2, err: e2 });
    }
}

/// Decay of a transformed integrand `g(s)` at one end of `(-inf, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// `|g(s)| <= M e^{-rate |s|}`
    Exponential(f64),
    /// faster than any exponential
    SuperExponential,
}

impl Tail {
    fn bound(&self, end_norm: f64) -> f64 {
        match self {
            Tail::Exponential(r) => end_norm / r,
            Tail::SuperExponential => end_norm,
        }
    }
}

/// Decay data for a half-line integrand in the variable `lambda = e^s`.
///
/// `at_zero` is the rate as `s -> -inf` (integrand `~ lambda^{q-1}` gives rate `q`),
/// `at_inf` as `s -> inf` (integrand `~ lambda^{-1-p}` gives rate `p`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub at_zero: Tail,
    pub at_inf: Tail,
}

impl DecaySpec {
    pub fn algebraic(q: f64, p: f64) -> Self {
        DecaySpec {
            at_zero: Tail::Exponential(q),
            at_inf: Tail::Exponential(p),
        }
    }
}

const S_LIMIT: f64 = 700.0;

/// Largest transformed-integrand norm over a unit window at the end `s`, damped by the tail rate.
fn window_norm<V: QuadValue, F: FnMut(f64) -> Result<V>>(
    g: &mut F,
    s: f64,
    dir: f64,
    tail: &Tail,
) -> Result<f64> {
    let mut m = 0.0f64;
    for j in 0..5 {
        let back = 0.25 * j as f64;
        let v = g(s - dir * back)?.norm();
        let damp = match tail {
            Tail::Exponential(r) => (-r * back).exp(),
            Tail::SuperExponential => 1.0,
        };
        m = m.max(v * damp);
    }
    Ok(m)
}

/// `∫_a^∞ g(s) ds`-style driver on `s ∈ (-inf, inf)` with tails cut where the bound allows.
///
/// Integrates `[lo, 0]` and `[0, hi]` separately and grows the window until
/// both tail bounds are at most a tenth of the target.
pub fn integrate_line<V, F>(mut g: F, tails: (Tail, Tail), opts: &QuadOpts) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let mut lo = -8.0f64;
    let mut hi = 8.0f64;
    let mut sub = *opts;
    sub.abs_tol *= 0.4;
    sub.rel_tol *= 0.4;
    let mut left = integrate(&mut g, lo, 0.0, &sub)?;
    let mut right = integrate(&mut g, 0.0, hi, &sub)?;
    let mut evals = left.evaluations + right.evaluations;
    loop {
        let mut value = left.value.clone();
        value.axpy(1.0, &right.value);
        let target = opts.target(value.norm());
        let tl = tails.0.bound(window_norm(&mut g, lo, -1.0, &tails.0)?);
        let th = tails.1.bound(window_norm(&mut g, hi, 1.0, &tails.1)?);
        evals += 10;
        let mut grown = false;
        if tl > 0.1 * target {
            if lo <= -S_LIMIT {
                return Err(Error::ToleranceNotMet { achieved: tl, requested: target });
            }
            let nlo = (lo * 1.5).max(-S_LIMIT);
            let ext = integrate(&mut g, nlo, lo, &sub)?;
            evals += ext.evaluations;
            left.value.axpy(1.0, &ext.value);
            left.est_error += ext.est_error;
            lo = nlo;
            grown = true;
        }
        if th > 0.1 * target {
            if hi >= S_LIMIT {
                return Err(Error::ToleranceNotMet { achieved: th, requested: target });
            }
            let nhi = (hi * 1.5).min(S_LIMIT);
            let ext = integrate(&mut g, hi, nhi, &sub)?;
            evals += ext.evaluations;
            right.value.axpy(1.0, &ext.value);
            right.est_error += ext.est_error;
            hi = nhi;
            grown = true;
        }
        if !grown {
            let mut est = left.est_error + right.est_error;
            if est > target {
                // the pieces were added one at a time; redo the settled window in one pass
                let whole = QuadOpts {
                    abs_tol: 0.9 * target - (tl + th),
                    rel_tol: 0.0,
                    ..*opts
                };
                let r = integrate(&mut g, lo, hi, &whole)?;
                evals += r.evaluations;
                if r.est_error > target {
                    return Err(Error::ToleranceNotMet { achieved: r.est_error, requested: target });
                }
                value = r.value;
                est = r.est_error;
            }
            return Ok(QuadResult {
                value,
                est_error: est,
                tail_bound: tl + th,
                evaluations: evals,
            });
        }
    }
}

/// `∫_0^∞ g(u) du` with `g` decaying like `tail`; the window grows until the tail bound is small.
pub fn integrate_semi_infinite<V, F>(mut g: F, tail: Tail, opts: &QuadOpts) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let mut sub = *opts;
    sub.abs_tol *= 0.5;
    sub.rel_tol *= 0.5;
    let mut hi = 8.0f64;
    let mut acc = integrate(&mut g, 0.0, hi, &sub)?;
    loop {
        let target = opts.target(acc.value.norm());
        let tb = tail.bound(window_norm(&mut g, hi, 1.0, &tail)?);
        acc.evaluations += 5;
        if tb <= 0.1 * target {
            if acc.est_error > target {
                return Err(Error::ToleranceNotMet { achieved: acc.est_error, requested: target });
            }
            acc.tail_bound = tb;
            return Ok(acc);
        }
        if hi >= S_LIMIT {
            return Err(Error::ToleranceNotMet { achieved: tb, requested: target });
        }
        let nhi = (hi * 1.5).min(S_LIMIT);
        let ext = integrate(&mut g, hi, nhi, &sub)?;
        acc.value.axpy(1.0, &ext.value);
        acc.est_error += ext.est_error;
        acc.evaluations += ext.evaluations;
        hi = nhi;
    }
}

/// `∫_0^∞ f(λ) dλ` through `λ = e^s`; the split at `λ = 1` isolates the endpoint behaviour.
pub fn quad_halfline<V, F>(mut f: F, tol: f64, decay: &DecaySpec) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    quad_halfline_opts(&mut f, &QuadOpts::mixed(tol), decay)
}

pub fn quad_halfline_opts<V, F>(mut f: F, opts: &QuadOpts, decay: &DecaySpec) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let g = |s: f64| -> Result<V> {
        let lam = s.exp();
        let v = f(lam)?;
        let mut out = v.zeros_like();
        out.axpy(lam, &v);
        Ok(out)
    };
    integrate_line(g, (decay.at_zero, decay.at_inf), opts)
}
