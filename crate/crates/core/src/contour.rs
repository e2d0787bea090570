//! Integration paths around `(-inf, 0]` and integration along them.
//!
//! Every contour is listed as lower branch (incoming), arc (upward through the
//! positive real side), upper branch (outgoing). With this orientation the
//! winding number around `-1` is `+1`.

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_semi_infinite, QuadOpts, QuadResult, QuadValue, Tail};
use crate::resolvent::{RegionMode, RegionParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Upper infinite branch `u >= 0 -> z(u)`; the lower one is its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BranchShape {
    /// `xi = -eps e^u`, `eta = c (1 + |xi|)^{-alpha}`
    Paraboloid { alpha: f64, eps: f64, c: f64 },
    /// `z = r0 e^u e^{i angle}`
    Ray { angle: f64, r0: f64 },
}

impl BranchShape {
    /// Point and `dz/du` on the upper branch.
    pub fn upper(&self, u: f64) -> (Complex64, Complex64) {
        match *self {
            BranchShape::Paraboloid { alpha, eps, c } => {
                let rho = eps * u.exp();
                let eta = c * (1.0 + rho).powf(-alpha);
                let deta = -alpha * c * (1.0 + rho).powf(-alpha - 1.0) * rho;
                (Complex64::new(-rho, eta), Complex64::new(-rho, deta))
            }
            BranchShape::Ray { angle, r0 } => {
                let z = Complex64::from_polar(r0 * u.exp(), angle);
                (z, z)
            }
        }
    }

    /// Parameter where `|z|` first reaches about `r`.
    fn param_at_radius(&self, r: f64) -> f64 {
        match *self {
            BranchShape::Paraboloid { eps, .. } => {
                // |z| ≈ |xi| far out; refine by bisection on |z(u)| = r
                let (mut lo, mut hi) = (0.0f64, (r / eps).ln().max(0.0) + 1.0);
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if self.upper(m).0.norm() < r {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                0.5 * (lo + hi)
            }
            BranchShape::Ray { r0, .. } => (r / r0).ln().max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    /// `z = radius e^{i phi}`, phi from `phi0` to `phi1`
    Arc { radius: f64, phi0: f64, phi1: f64 },
    /// incoming conjugate branch
    Lower(BranchShape),
    /// outgoing branch
    Upper(BranchShape),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub segments: Vec<Segment>,
}

impl Contour {
    fn three(shape: BranchShape, radius: f64, phi: f64) -> Self {
        Contour {
            segments: vec![
                Segment::Lower(shape),
                Segment::Arc { radius, phi0: -phi, phi1: phi },
                Segment::Upper(shape),
            ],
        }
    }

    /// Junction points in traversal order: lower-to-arc, arc-to-upper.
    pub fn junctions(&self) -> Vec<(Complex64, Complex64)> {
        let mut out = Vec::new();
        for w in self.segments.windows(2) {
            out.push((end_point(&w[0]), start_point(&w[1])));
        }
        out
    }

    /// Shared branch shape.
    fn shape(&self) -> BranchShape {
        for s in &self.segments {
            if let Segment::Upper(b) | Segment::Lower(b) = s {
                return *b;
            }
        }
        unreachable!("contours always carry branches")
    }
}

fn start_point(s: &Segment) -> Complex64 {
    match *s {
        Segment::Arc { radius, phi0, .. } => Complex64::from_polar(radius, phi0),
        Segment::Upper(b) => b.upper(0.0).0,
        Segment::Lower(_) => Complex64::new(f64::INFINITY, 0.0),
    }
}

fn end_point(s: &Segment) -> Complex64 {
    match *s {
        Segment::Arc { radius, phi1, .. } => Complex64::from_polar(radius, phi1),
        Segment::Lower(b) => b.upper(0.0).0.conj(),
        Segment::Upper(_) => Complex64::new(f64::INFINITY, 0.0),
    }
}

/// `Γ(alpha, eps, c, d)` for H-mode parameters.
pub fn build_gamma(params: &RegionParams) -> Result<Contour> {
    let mut p = *params;
    p.mode = RegionMode::H;
    p.validate()?;
    let eta0 = p.c * (1.0 + p.eps).powf(-p.alpha);
    let phi = eta0.atan2(-p.eps);
    Ok(Contour::three(
        BranchShape::Paraboloid { alpha: p.alpha, eps: p.eps, c: p.c },
        p.d,
        phi,
    ))
}

/// `Γ_S(theta, d)`: rays at angles `±(pi - theta)` from radius `d`.
pub fn build_gamma_sector(theta: f64, d: f64) -> Result<Contour> {
    if !(theta > 0.0 && theta < PI / 2.0) || !(d > 0.0 && d <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "sector contour needs theta in (0, pi/2) and d in (0, 1], got {theta}, {d}"
        )));
    }
    let angle = PI - theta;
    Ok(Contour::three(BranchShape::Ray { angle, r0: d }, d, angle))
}

/// `Γ_{δ', z}`: rays at `±(pi/2 + δ')` from radius `1/|z|`.
pub fn build_gamma_dz(delta: f64, z: Complex64) -> Result<Contour> {
    if !(delta > 0.0 && delta < PI / 2.0) || z.norm() == 0.0 {
        return Err(Error::InvalidParams(format!("delta' = {delta}, z = {z}")));
    }
    let angle = PI / 2.0 + delta;
    let r0 = 1.0 / z.norm();
    Ok(Contour::three(BranchShape::Ray { angle, r0 }, r0, angle))
}

/// `∫_Γ f(z) dz`; `tail` is the decay of `|f(z(u)) z'(u)|` in the branch parameter.
pub fn quad_contour<V, F>(f: F, gamma: &Contour, tol: f64, tail: Tail) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(Complex64) -> Result<V>,
{
    let nseg = gamma.segments.len() as f64;
    let opts = QuadOpts {
        abs_tol: tol / nseg,
        rel_tol: tol / nseg,
        max_intervals: 4000,
    };
    let mut total: Option<QuadResult<V>> = None;
    for seg in &gamma.segments {
        let r = integrate_segment(&f, seg, &opts, tail)?;
        total = Some(match total {
            None => r,
            Some(mut acc) => {
                acc.value.axpy(1.0, &r.value);
                acc.est_error += r.est_error;
                acc.tail_bound += r.tail_bound;
                acc.evaluations += r.evaluations;
                acc
            }
        });
    }
    let out = total.expect("nonempty contour");
    let target = tol.max(tol * out.value.norm());
    if out.est_error + out.tail_bound > target {
        return Err(Error::ToleranceNotMet {
            achieved: out.est_error + out.tail_bound,
            requested: target,
        });
    }
    Ok(out)
}

fn integrate_segment<V, F>(f: &F, seg: &Segment, opts: &QuadOpts, tail: Tail) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(Complex64) -> Result<V>,
{
    match *seg {
        Segment::Arc { radius, phi0, phi1 } => integrate(
            |phi: f64| {
                let z = Complex64::from_polar(radius, phi);
                Ok(f(z)?.cscale(I * z))
            },
            phi0,
            phi1,
            opts,
        ),
        Segment::Upper(b) => integrate_semi_infinite(
            |u: f64| {
                let (z, dz) = b.upper(u);
                Ok(f(z)?.cscale(dz))
            },
            tail,
            opts,
        ),
        Segment::Lower(b) => integrate_semi_infinite(
            |u: f64| {
                let (z, dz) = b.upper(u);
                // incoming: reversed parameter direction
                Ok(f(z.conj())?.cscale(-dz.conj()))
            },
            tail,
            opts,
        ),
    }
}

/// `∮ f dz` over the contour cut at `|z| = radius` and closed through the negative real axis.
pub fn quad_closed<V, F>(f: F, gamma: &Contour, radius: f64, tol: f64) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(Complex64) -> Result<V>,
{
    let opts = QuadOpts::mixed(tol / 4.0);
    let shape = gamma.shape();
    let umax = shape.param_at_radius(radius);
    let mut parts = Vec::new();
    for seg in &gamma.segments {
        parts.push(match *seg {
            Segment::Arc { .. } => integrate_segment(&f, seg, &opts, Tail::SuperExponential)?,
            Segment::Upper(b) => integrate(
                |u: f64| {
                    let (z, dz) = b.upper(u);
                    Ok(f(z)?.cscale(dz))
                },
                0.0,
                umax,
                &opts,
            )?,
            Segment::Lower(b) => integrate(
                |u: f64| {
                    let (z, dz) = b.upper(u);
                    Ok(f(z.conj())?.cscale(dz.conj()))
                },
                umax,
                0.0,
                &opts,
            )?,
        });
    }
    let zend = shape.upper(umax).0;
    let (r, phi) = zend.to_polar();
    parts.push(integrate(
        |t: f64| {
            let z = Complex64::from_polar(r, t);
            Ok(f(z)?.cscale(I * z))
        },
        phi,
        2.0 * PI - phi,
        &opts,
    )?);
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("segments");
    for p in it {
        acc.value.axpy(1.0, &p.value);
        acc.est_error += p.est_error;
        acc.evaluations += p.evaluations;
    }
    Ok(acc)
}

/// Winding number about `p` of the contour truncated at `radius` and closed through the negative axis.
pub fn winding_number(gamma: &Contour, p: Complex64, radius: f64) -> i64 {
    let shape = gamma.shape();
    let umax = shape.param_at_radius(radius.max(2.0 * p.norm() + 2.0));
    let m = 4000;
    let mut pts = Vec::with_capacity(4 * m);
    for seg in &gamma.segments {
        match *seg {
            Segment::Lower(b) => {
                for i in 0..=m {
                    let u = umax * (1.0 - i as f64 / m as f64);
                    pts.push(b.upper(u).0.conj());
                }
            }
            Segment::Arc { radius, phi0, phi1 } => {
                for i in 0..=m {
                    let t = phi0 + (phi1 - phi0) * i as f64 / m as f64;
                    pts.push(Complex64::from_polar(radius, t));
                }
            }
            Segment::Upper(b) => {
                for i in 0..=m {
                    pts.push(b.upper(umax * i as f64 / m as f64).0);
                }
            }
        }
    }
    let (r, phi) = shape.upper(umax).0.to_polar();
    for i in 0..=m {
        let t = phi + (2.0 * PI - 2.0 * phi) * i as f64 / m as f64;
        pts.push(Complex64::from_polar(r, t));
    }
    let mut total = 0.0;
    for w in pts.windows(2) {
        let a = (w[0] - p).arg();
        let b = (w[1] - p).arg();
        let mut d = b - a;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
    }
    (total / (2.0 * PI)).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::quad::{quad_halfline, DecaySpec};

    fn gamma_h(alpha: f64) -> Contour {
        build_gamma(&RegionParams::h(alpha, 0.2, 0.3, c(-2.0, 0.0))).unwrap()
    }

    #[test]
    fn straight_rays_for_alpha_minus_one() {
        let g = gamma_h(-1.0);
        let Segment::Upper(b) = g.segments[2] else { panic!() };
        for u in [0.0, 1.0, 3.0] {
            let (z, _) = b.upper(u);
            assert!((z.im - 0.3 * (1.0 + z.re.abs())).abs() < 1e-12);
        }
    }

    #[test]
    fn junctions_on_circle() {
        let p = RegionParams::h(1.0, 0.2, 0.3, c(-2.0, 0.0));
        assert!((p.d - 0.1025f64.sqrt()).abs() < 1e-15);
        let g = build_gamma(&p).unwrap();
        for (a, b) in g.junctions() {
            assert!((a - b).norm() < 1e-12);
            assert!((a.norm() - p.d).abs() < 1e-12);
        }
        let (lo, _) = g.junctions()[0];
        assert!((lo - c(-0.2, -0.3 / 1.2)).norm() < 1e-12);
        let g = build_gamma_sector(PI / 4.0, 0.5).unwrap();
        for (a, b) in g.junctions() {
            assert!((a - b).norm() < 1e-12);
            assert!((a.norm() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_violation_rejected() {
        let mut p = RegionParams::h(1.0, 0.2, 0.3, c(-2.0, 0.0));
        p.d = 0.9;
        assert!(matches!(build_gamma(&p), Err(Error::InvalidParams(_))));
        assert!(matches!(build_gamma_sector(PI / 2.0, 0.5), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn windings() {
        for g in [
            gamma_h(-1.0),
            gamma_h(1.0),
            gamma_h(0.0),
            build_gamma_sector(PI / 4.0, 0.5).unwrap(),
            build_gamma_dz(0.3, c(1.0, 0.5)).unwrap(),
        ] {
            assert_eq!(winding_number(&g, c(-1.0, 0.0), 1e3), 1);
            assert_eq!(winding_number(&g, c(2.0, 0.0), 1e3), 0);
        }
    }

    #[test]
    fn cauchy_closed() {
        for g in [gamma_h(-1.0), gamma_h(1.0), build_gamma_sector(PI / 4.0, 0.5).unwrap()] {
            let r = quad_closed(|z: Complex64| Ok(1.0 / (z + 1.0)), &g, 50.0, 1e-11).unwrap();
            let w = r.value / (2.0 * PI * I);
            assert!((w - 1.0).norm() < 1e-10, "{w}");
        }
    }

    #[test]
    fn branch_cut_example() {
        // (1/2πi)∮ z^{-1/2}/(z-1) dz = -1, against the real-axis reduction
        let oracle = quad_halfline(
            |l: f64| Ok(Complex64::new(l.powf(-0.5) / (l + 1.0), 0.0)),
            1e-12,
            &DecaySpec::algebraic(0.5, 0.5),
        )
        .unwrap()
        .value
            * (-1.0 / PI);
        assert!((oracle - c(-1.0, 0.0)).norm() < 1e-10);
        let g = build_gamma(&RegionParams::h(-1.0, 0.2, 0.3, c(-2.0, 0.0))).unwrap();
        let r = quad_contour(
            |z: Complex64| Ok(z.powf(-0.5) / (z - 1.0)),
            &g,
            1e-9,
            Tail::Exponential(0.5),
        )
        .unwrap();
        let v = r.value / (2.0 * PI * I);
        assert!((v - oracle).norm() < 1e-8, "{v}");
    }

    #[test]
    fn contract_on_smooth_integrand() {
        let g = build_gamma_sector(PI / 3.0, 0.5).unwrap();
        let r = quad_contour(|z: Complex64| Ok((-z).exp() / (z - 2.0)), &g, 1e-6, Tail::SuperExponential)
            .unwrap_err();
        // e^{-z} grows on the left half-plane: a divergent integrand is reported, not returned
        assert!(matches!(r, Error::ToleranceNotMet { .. }));
        let r = quad_contour(|z: Complex64| Ok(z.exp() / (z - 2.0)), &g, 1e-6, Tail::SuperExponential).unwrap();
        assert!(r.est_error <= 1e-6 && r.tail_bound <= 1e-7);
        // the only pole lies outside the enclosed region
        let v = r.value / (2.0 * PI * I);
        assert!(v.norm() < 1e-6, "{v}");
    }

    #[test]
    fn serializes() {
        let g = build_gamma_sector(PI / 4.0, 0.5).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Contour = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
    }
}
