//! Right-sided Liouville derivatives of decaying trajectories and the kernel `g_ζ`.

use crate::error::{Error, Result};
use crate::quad::{integrate_semi_infinite, QuadOpts, QuadValue, Tail};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

/// `g_ζ(t) = t^{ζ-1} / Γ(ζ)`, zero for `t <= 0`.
pub fn gzeta_eval(zeta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if zeta == 1.0 {
        return 1.0;
    }
    t.powf(zeta - 1.0) / gamma(zeta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `(-1)^{⌈β⌉} d^{⌈β-1⌉}/ds ∫_s^∞ g_{⌈β⌉-β}(t-s) u'(t) dt`
    Modified,
    /// `(-1)^{⌈β⌉} d^{⌈β⌉}/ds ∫_s^∞ g_{⌈β⌉-β}(t-s) u(t) dt`
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub beta: f64,
    pub ceil_beta: u32,
    pub kernel_order: f64,
    /// exponential decay rate of the integrand in `t`; required for non-integer `β`
    pub decay_rate: Option<f64>,
    /// finite-difference step; `None` picks `tol^{1/(m+2)} s` for `m` outer derivatives
    pub h: Option<f64>,
}

impl FracParams {
    pub fn new(beta: f64, decay_rate: Option<f64>) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
        }
        let ceil_beta = beta.ceil() as u32;
        Ok(FracParams {
            beta,
            ceil_beta,
            kernel_order: ceil_beta as f64 - beta,
            decay_rate,
            h: None,
        })
    }

    pub fn is_integer(&self) -> bool {
        self.kernel_order == 0.0
    }
}

fn binom(m: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// `m`-th central difference of `f` at `s`.
fn central_diff<V, F>(f: &mut F, s: f64, m: u32, h: f64) -> Result<V>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    if m == 0 {
        return f(s);
    }
    let mut acc: Option<V> = None;
    for j in 0..=m {
        let x = s + (0.5 * m as f64 - j as f64) * h;
        let w = if j % 2 == 0 { 1.0 } else { -1.0 } * binom(m, j) / h.powi(m as i32);
        let v = f(x)?;
        match acc.as_mut() {
            None => {
                let mut z = v.zeros_like();
                z.axpy(w, &v);
                acc = Some(z);
            }
            Some(z) => z.axpy(w, &v),
        }
    }
    Ok(acc.expect("m >= 1"))
}

fn step(params: &FracParams, s: f64, m: u32, tol: f64) -> f64 {
    params
        .h
        .unwrap_or_else(|| tol.powf(1.0 / (m as f64 + 2.0)) * s.abs().max(1e-3))
}

/// `∫_s^∞ g_κ(t-s) v(t) dt` through `t = s + w^{1/κ}`.
fn tail_integral<V, F>(v: &mut F, s: f64, kappa: f64, rate: f64, tol: f64) -> Result<V>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let p = 1.0 / kappa;
    let scale = 1.0 / gamma(kappa + 1.0);
    let r = integrate_semi_infinite(
        |w: f64| {
            let val = v(s + w.powf(p))?;
            let mut out = val.zeros_like();
            out.axpy(scale, &val);
            Ok(out)
        },
        Tail::Exponential(rate),
        &QuadOpts::mixed(tol),
    )?;
    Ok(r.value)
}

/// Modified right-sided Liouville derivative `D^β_- u(s)` from the derivative `du = u'`.
///
/// Integer `β = n` returns `(-1)^n u^{(n)}(s)`.
pub fn liouville_right_deriv<V, F>(mut du: F, params: &FracParams, s: f64, tol: f64) -> Result<V>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    if !(s > 0.0) {
        return Err(Error::InvalidParams(format!("s = {s} must be positive")));
    }
    let n = params.ceil_beta;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let m = n - 1;
    let h = step(params, s, m, tol);
    let mut out = if params.is_integer() {
        central_diff(&mut du, s, m, h)?
    } else {
        let rate = params.decay_rate.ok_or(Error::TailBoundMissing)?;
        let kappa = params.kernel_order;
        let inner_tol = tol * h.powi(m as i32) * 1e-2;
        let mut inner = |x: f64| tail_integral(&mut du, x, kappa, rate, inner_tol.max(1e-13));
        central_diff(&mut inner, s, m, h)?
    };
    if sign < 0.0 {
        let mut neg = out.zeros_like();
        neg.axpy(-1.0, &out);
        out = neg;
    }
    Ok(out)
}

/// Classical right-sided Liouville derivative `𝐃^β_- u(s)` from `u` itself.
pub fn liouville_right_classical<V, F>(mut u: F, params: &FracParams, s: f64, tol: f64) -> Result<V>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    if !(s > 0.0) {
        return Err(Error::InvalidParams(format!("s = {s} must be positive")));
    }
    let n = params.ceil_beta;
    let h = step(params, s, n, tol);
    let mut out = if params.is_integer() {
        central_diff(&mut u, s, n, h)?
    } else {
        let rate = params.decay_rate.ok_or(Error::TailBoundMissing)?;
        let kappa = params.kernel_order;
        let inner_tol = tol * h.powi(n as i32) * 1e-2;
        let mut inner = |x: f64| tail_integral(&mut u, x, kappa, rate, inner_tol.max(1e-13));
        central_diff(&mut inner, s, n, h)?
    };
    if n % 2 == 1 {
        let mut neg = out.zeros_like();
        neg.axpy(-1.0, &out);
        out = neg;
    }
    Ok(out)
}

/// Dispatch on the variant.
pub fn liouville<V, U, D>(u: U, du: D, params: &FracParams, s: f64, tol: f64, variant: Variant) -> Result<V>
where
    V: QuadValue,
    U: FnMut(f64) -> Result<V>,
    D: FnMut(f64) -> Result<V>,
{
    match variant {
        Variant::Modified => liouville_right_deriv(du, params, s, tol),
        Variant::Classical => liouville_right_classical(u, params, s, tol),
    }
}
