//! One line per acceptance criterion; exits non-zero if any fails.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relpow::fracderiv::{liouville_right_deriv, FracParams};
use relpow::instance::{Defaults, Instance};
use relpow::linalg::{c, cdiag, op_norm, real_diag, CMat};
use relpow::linrel::LinearRelation;
use relpow::powers::{neg_power, PowerSpec, Route};
use relpow::resolvent::{region_certify, RegionParams};
use relpow::semigroup::evaluate_sg;
use relpow::verify::{verify_all, verify_identity, ResidualReport, VerifyOptions, CATALOG};
use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

const ALGEBRAIC: [&str; 6] = ["resolvent_eq", "creso", "genres_i", "genres_ii", "resequ", "klim"];

fn instance_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn load(name: &str) -> Instance {
    Instance::load(&instance_path(name)).unwrap()
}

fn region() -> RegionParams {
    RegionParams::hs(-1.0, FRAC_PI_4, 0.5, c(-3.0, 0.0))
}

fn verify(id: &str, inst: &Instance) -> ResidualReport {
    verify_identity(id, inst, &VerifyOptions::default()).unwrap()
}

fn worst<'a>(reports: impl IntoIterator<Item = &'a ResidualReport>) -> f64 {
    reports.into_iter().map(|r| r.max_residual).fold(0.0, f64::max)
}

fn near_identity(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::identity(n, n) + DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)))
}

/// Pencil `{(W D_B Z x, W D_L Z x)}` with three finite eigenvalues near the negative axis
/// and a one-dimensional multivalued part.
fn random_relation(rng: &mut ChaCha8Rng) -> LinearRelation {
    let (w, z) = (near_identity(rng, 4), near_identity(rng, 4));
    let mut dl: Vec<Complex64> = (0..3)
        .map(|_| -Complex64::from_polar(rng.random_range(1.0..6.0), rng.random_range(-0.5..0.5)))
        .collect();
    dl.push(c(-1.0, 0.0));
    let b = &w * real_diag(&[1.0, 1.0, 1.0, 0.0]) * &z;
    let l = &w * cdiag(&dl) * &z;
    LinearRelation::from_pencil(&b, &l).unwrap()
}

fn criterion1() -> (bool, String) {
    let start = Instant::now();
    let mut insts = vec![load("diag.json"), load("pencil.json"), load("pencil_c.json")];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut certified = true;
    for _ in 0..5 {
        let a = random_relation(&mut rng);
        let eye = CMat::identity(4, 4);
        let reg = RegionParams::hs(0.0, FRAC_PI_4, 0.5, c(-0.75, 0.0));
        let cert = region_certify(&a, &eye, &reg, &Defaults::default().grid, 100.0);
        certified &= cert.map(|c| c.pass).unwrap_or(false);
        insts.push(Instance::new(a, eye, reg, Defaults::default()).unwrap());
    }
    let reports: Vec<_> = insts.iter().flat_map(|i| ALGEBRAIC.map(|id| verify(id, i))).collect();
    let secs = start.elapsed().as_secs_f64();
    let w = worst(&reports);
    let ok = certified && reports.iter().all(|r| r.pass) && w <= 1e-8 && secs <= 10.0;
    (ok, format!("max residual {w:.2e} over 8 instances, random spectra certified: {certified}, {secs:.1}s"))
}

fn criterion2() -> (bool, String) {
    let start = Instant::now();
    let v = CMat::from_row_slice(3, 3, &[1.0, 0.2, -0.1, 0.0, 1.0, 0.3, 0.1, -0.2, 1.0].map(|x| c(x, 0.0)));
    let vinv = v.clone().try_inverse().unwrap();
    let mu = [1.0, 4.0, 9.0];
    let a = LinearRelation::from_matrix(&(&v * real_diag(&mu.map(|m| -m)) * &vinv)).unwrap();
    let eye = CMat::identity(3, 3);
    let mut err = 0.0f64;
    for b in [c(0.3, 0.0), c(0.5, 0.2), c(1.7, 0.0)] {
        let want = &v * cdiag(&mu.map(|m| c(m, 0.0).powc(-b))) * &vinv;
        let n = b.re.ceil() as usize;
        for spec in [PowerSpec::new(b, Route::Contour), PowerSpec::new(b, Route::Balakrishnan), PowerSpec::moment(b, n)] {
            let p = neg_power(&a, &eye, &spec, &region(), 1e-9).unwrap();
            err = err.max(op_norm(&(p - &want)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (err <= 1e-5 && secs <= 30.0, format!("max error {err:.2e} over 3 exponents x 3 routes, {secs:.1}s"))
}

fn criterion3() -> (bool, String) {
    let inst = load("pencil.json");
    let (a, c1) = (&inst.a, &inst.c1);
    let mut err = 0.0f64;
    for b in [0.3, 0.7] {
        let b = c(b, 0.0);
        let run = |spec| neg_power(a, c1, &spec, &inst.region, 1e-9).unwrap();
        let pc = run(PowerSpec::new(b, Route::Contour));
        let pb = run(PowerSpec::new(b, Route::Balakrishnan));
        // the moment route carries one extra factor C1
        let pm = run(PowerSpec::moment(b, 1));
        let pc1 = c1 * &pc;
        err = err.max(op_norm(&(&pc - &pb))).max(op_norm(&(&pc1 - &pm))).max(op_norm(&(c1 * &pb - &pm)));
    }
    (err <= 1e-5, format!("max pairwise difference {err:.2e}"))
}

fn criterion4() -> (bool, String) {
    let opts = VerifyOptions { samples: Some(10), ..Default::default() };
    let mut ok = true;
    let mut w = 0.0f64;
    for name in ["diag.json", "pencil.json"] {
        let inst = load(name);
        for id in ["homomorphism", "power_add"] {
            let r = verify_identity(id, &inst, &opts).unwrap();
            ok &= r.samples.len() == 10 && r.max_residual <= 5.0 * r.quad_tol;
            w = w.max(r.max_residual / r.quad_tol);
        }
    }
    (ok, format!("worst residual {w:.2} x quadrature tol"))
}

fn criterion5() -> (bool, String) {
    let law = worst([&verify("sg_law", &load("diag.json")), &verify("sg_law", &load("pencil.json"))]);
    let a = LinearRelation::from_matrix(&real_diag(&[-2.0])).unwrap();
    let s = evaluate_sg(&a, &CMat::identity(1, 1), 0.25, c(1.0, 0.0), &region(), 1e-10).unwrap()[(0, 0)];
    let scalar = (s - (-(2f64.powf(0.25))).exp()).norm();
    let inst = load("diag.json");
    let half = evaluate_sg(&inst.a, &inst.c1, 0.5, c(1.0, 0.0), &inst.region, 1e-10).unwrap();
    let half_err = op_norm(&(half - real_diag(&[(-1f64).exp(), (-2f64).exp()])));
    let ok = law <= 1e-5 && scalar <= 1e-5 && half_err <= 1e-5;
    (ok, format!("sg_law {law:.2e}, S_1/4(1) = {:.6} (err {scalar:.1e}), S_1/2(1) err {half_err:.1e}", s.re))
}

fn criterion6() -> (bool, String) {
    let inst = load("pencil.json");
    let reports: Vec<_> = ["an_membership", "second_order", "sg_commute", "subgen_AB"].map(|id| verify(id, &inst)).into();
    let ok = reports.iter().all(|r| r.pass);
    let detail: Vec<_> = reports.iter().map(|r| format!("{} {:.1e}", r.identity_id, r.max_residual)).collect();
    (ok, detail.join(", "))
}

fn criterion7() -> (bool, String) {
    let mut eig = 0.0f64;
    for a in [0.5, 1.0, 2.5] {
        for beta in [0.3, 1.5, 2.0, 2.7] {
            for s in [0.5, 2.0] {
                let p = FracParams::new(beta, Some(a)).unwrap();
                let du = |t: f64| Ok(c(-a * (-a * t).exp(), 0.0));
                let got: Complex64 = liouville_right_deriv(du, &p, s, 1e-10).unwrap();
                let want = a.powf(beta) * (-a * s).exp();
                eig = eig.max((got - want).norm());
            }
        }
    }
    let mut fd = 0.0f64;
    for name in ["diag.json", "pencil.json"] {
        let r = verify("frac_deriv", &load(name));
        fd = r
            .samples
            .iter()
            .filter(|s| s.digest.starts_with("beta=2 theta=0 "))
            .map(|s| s.residual)
            .fold(fd, f64::max);
    }
    (eig <= 1e-5 && fd <= 1e-4, format!("eigenfunction error {eig:.1e}, beta=2 theta=0 relative {fd:.1e}"))
}

fn criterion8() -> (bool, String) {
    let mut w = 0.0f64;
    for name in ["diag.json", "pencil.json"] {
        let r = verify("laplace", &load(name));
        w = r
            .samples
            .iter()
            .filter(|s| s.digest.starts_with("gamma=0.5 "))
            .map(|s| s.residual)
            .fold(w, f64::max);
    }
    (w <= 1e-5, format!("gamma=1/2 at lambda 1, 2: {w:.1e}"))
}

fn criterion9() -> (bool, String) {
    let opts = VerifyOptions { control: true, ..Default::default() };
    let mut caught = 0;
    let mut missed = Vec::new();
    let mut weakest = f64::INFINITY;
    for name in ["diag_reg.json", "pencil.json", "pencil_c.json"] {
        for r in verify_all(&load(name), &opts) {
            if !r.pass && r.max_residual > 10.0 * r.tol {
                caught += 1;
                weakest = weakest.min(r.max_residual / r.tol);
            } else {
                missed.push(format!("{name}:{}", r.identity_id));
            }
        }
    }
    let total = 3 * CATALOG.len();
    (missed.is_empty(), format!("{caught}/{total} perturbed runs fail by > 10x tol (weakest {weakest:.0}x) {missed:?}"))
}

fn criterion10() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance_path("pencil_c.json");
    let run = |out: &str, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_relpow"))
            .current_dir(dir.path())
            .env("RELPOW_THREADS", threads)
            .args(["verify", "--id", "all", "--seed", "11", "--out", out, "--instance"])
            .arg(&inst)
            .output()
            .unwrap();
        (status.status.code(), std::fs::read(dir.path().join(out)).unwrap())
    };
    let (c1, r1) = run("a.json", "4");
    let (c2, r2) = run("b.json", "1");
    (c1 == Some(0) && c2 == Some(0) && r1 == r2, format!("{} bytes, identical: {}", r1.len(), r1 == r2))
}

fn main() {
    let criteria: [(&str, fn() -> (bool, String)); 10] = [
        ("algebraic identities", criterion1),
        ("power oracle", criterion2),
        ("route consistency", criterion3),
        ("homomorphism and additivity", criterion4),
        ("semigroup", criterion5),
        ("membership", criterion6),
        ("fractional", criterion7),
        ("laplace", criterion8),
        ("negative controls", criterion9),
        ("determinism", criterion10),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f();
        failed += usize::from(!ok);
        println!("criterion {:>2} {:<28} {}  {detail}", k + 1, name, if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
