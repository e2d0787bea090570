//! `relpow` command line.
//!
//! Complex numbers are written `re,im` on the command line and `[re, im]` in JSON.
//! Exit codes: 0 success, 1 numeric failure (reports are still written), 2 usage error.

use crate::error::Error;
use crate::instance::{matrix_to_json, Instance};
use crate::linalg::{c, CMat, CVec};
use crate::powers::{neg_power, power_membership, PowerSpec, Route};
use crate::resolvent::{c_resolvent, region_certify};
use crate::semigroup::{evaluate_sg_half, metallica_rhs, solve_incomplete, Problem, Trajectory};
use crate::verify::{verify_all, verify_identity, ResidualReport, Sample, VerifyOptions};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "relpow", version, about = "Powers and semigroups of linear relations with a C-resolvent")]
pub struct Cli {
    /// JSON file whose `defaults` block (or the whole object) overrides instance defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// seed for every sampled parameter
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Fp,
    P2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print (λ - A)^{-1} C.
    Resolve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print (-A)^{-b}_{C1}.
    Power {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        b: Complex64,
        #[arg(long, default_value = "contour", value_parser = parse_route)]
        route: Route,
        /// order n of the moment route
        #[arg(long, default_value_t = 1)]
        n_moment: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an incomplete problem and write the trajectory as CSV.
    Evolve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        problem: ProblemKind,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// defaults to the instance gamma
        #[arg(long)]
        gamma: Option<f64>,
        /// initial state, one `re,im` per component
        #[arg(long = "x", value_parser = parse_complex, allow_hyphen_values = true, required = true)]
        x: Vec<Complex64>,
        /// increasing positive times; defaults to the instance times
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
        /// CSV destination; stdout when absent
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
    },
    /// Run identity residual suites.
    Verify {
        /// catalog id or `all`
        #[arg(long)]
        id: String,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// evaluate against the perturbed operator
        #[arg(long)]
        control: bool,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
    /// Certify the region against the weighted resolvent bound.
    Certify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        bound: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(c(p(re)?, p(im)?))
}

fn parse_route(s: &str) -> std::result::Result<Route, String> {
    s.parse::<Route>().map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::Io(_)
            | Error::UnknownIdentity(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidParams(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

type Outcome = std::result::Result<i32, Failure>;

/// Parse `args` (program name first) and run; stdout output goes to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = write!(out, "{e}");
            } else {
                eprint!("{e}");
            }
            return code;
        }
    };
    init_threads();
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("relpow: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("relpow: {m}");
            EXIT_NUMERIC
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("RELPOW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn load(cli: &Cli, path: &Path) -> std::result::Result<Instance, Failure> {
    let mut inst = Instance::load(path)?;
    if let Some(cfg) = &cli.config {
        inst.apply_config(cfg)?;
    }
    if let Some(s) = cli.seed {
        inst.spec.defaults.seed = s;
    }
    Ok(inst)
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::Usage(format!("stdout: {e}")))
}

fn matrix_json(m: &CMat) -> String {
    serde_json::to_string(&matrix_to_json(m)).expect("complex matrices serialize")
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Resolve { instance, lambda, out: file } => {
            let inst = load(cli, instance)?;
            let r = c_resolvent(&inst.a, &inst.c, *lambda)?;
            let text = matrix_json(&r);
            if let Some(p) = file {
                write_file(p, &text)?;
            }
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Power {
            instance,
            b,
            route,
            n_moment,
            tol,
            out: file,
        } => {
            let inst = load(cli, instance)?;
            let spec = match route {
                Route::Moment => PowerSpec::moment(*b, *n_moment),
                r => PowerSpec::new(*b, *r),
            };
            let tol = tol.unwrap_or(inst.defaults().tol_quad);
            let p = neg_power(&inst.a, &inst.c1, &spec, &inst.region, tol)?;
            let text = matrix_json(&p);
            if let Some(f) = file {
                write_file(f, &text)?;
            }
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Evolve {
            instance,
            problem,
            beta,
            theta,
            gamma,
            x,
            times,
            tol,
            csv,
            report,
        } => {
            let inst = load(cli, instance)?;
            let d = inst.defaults().clone();
            let problem = match problem {
                ProblemKind::Fp => Problem::FP {
                    beta: *beta,
                    theta: *theta,
                    gamma: gamma.unwrap_or(d.gamma),
                },
                ProblemKind::P2 => Problem::P2,
            };
            let times = times.clone().unwrap_or(d.times.clone());
            let x0 = CVec::from_vec(x.clone());
            let qtol = tol.unwrap_or(d.tol_quad * 0.1);
            let traj = solve_incomplete(&inst.a, &inst.c1, &problem, &x0, &times, &inst.region, qtol)?;
            let table = trajectory_csv(&traj).map_err(|e| Failure::Usage(format!("csv: {e}")))?;
            match csv {
                Some(p) => write_file(p, &table)?,
                None => write!(out, "{table}").map_err(|e| Failure::Usage(format!("stdout: {e}")))?,
            }
            let rep = trajectory_report(&inst, &traj, &x0, qtol);
            write_file(report, &serde_json::to_string_pretty(&rep).expect("reports serialize"))?;
            eprintln!("{}: max residual {:.3e} (tol {:.0e})", rep.identity_id, rep.max_residual, rep.tol);
            Ok(if rep.pass { EXIT_OK } else { EXIT_NUMERIC })
        }
        Command::Verify {
            id,
            instance,
            tol,
            samples,
            control,
            out: file,
        } => {
            let inst = load(cli, instance)?;
            let opts = VerifyOptions {
                tol: *tol,
                samples: *samples,
                seed: cli.seed,
                control: *control,
            };
            let reports = if id == "all" {
                verify_all(&inst, &opts)
            } else {
                vec![verify_identity(id, &inst, &opts)?]
            };
            write_file(file, &serde_json::to_string_pretty(&reports).expect("reports serialize"))?;
            for r in &reports {
                emit(
                    out,
                    &format!(
                        "{:<14} {} max_residual={:.3e} tol={:.0e}",
                        r.identity_id,
                        if r.pass { "pass" } else { "FAIL" },
                        r.max_residual,
                        r.tol
                    ),
                )?;
            }
            Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_NUMERIC })
        }
        Command::Certify { instance, bound, out: file } => {
            let inst = load(cli, instance)?;
            let d = inst.defaults();
            let cert = region_certify(&inst.a, &inst.c, &inst.region, &d.grid, bound.unwrap_or(d.cert_bound))?;
            let text = serde_json::to_string_pretty(&cert).expect("certificates serialize");
            if let Some(f) = file {
                write_file(f, &text)?;
            }
            emit(out, &text)?;
            Ok(if cert.pass { EXIT_OK } else { EXIT_NUMERIC })
        }
    }
}

/// Header `t, x0_re, x0_im, x1_re, ...`, one row per time.
pub fn trajectory_csv(traj: &Trajectory) -> std::result::Result<String, csv::Error> {
    let n = traj.states.first().map_or(0, |s| s.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        header.push(format!("x{i}_re"));
        header.push(format!("x{i}_im"));
    }
    w.write_record(&header)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![format!("{t:e}")];
        for z in s {
            row.push(format!("{:e}", z.re));
            row.push(format!("{:e}", z.im));
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Per-time membership check of a computed trajectory.
///
/// `p2`: the second central difference of `S_{1/2}(t) x` against `-A`.
/// `fp`: `(u(t), e^{-iθβ} D^β u(t))` against `(-A)_{γβ}`, with the derivative in closed form.
pub fn trajectory_report(inst: &Instance, traj: &Trajectory, x: &CVec, qtol: f64) -> ResidualReport {
    let d = inst.defaults();
    let (id, tol) = match traj.problem {
        Problem::FP { .. } => ("evolve_fp", d.tol_quad),
        Problem::P2 => ("evolve_p2", d.tol_fd),
    };
    let start = std::time::Instant::now();
    let samples: Vec<Sample> = (0..traj.times.len())
        .into_par_iter()
        .map(|k| {
            let t = traj.times[k];
            let u = traj.state(k);
            let r = match traj.problem {
                Problem::P2 => p2_residual(inst, x, t),
                Problem::FP { beta, theta, gamma } => (|| {
                    let rhs = metallica_rhs(&inst.a, &inst.c1, gamma, beta, theta, t, qtol)? * x;
                    let y = rhs * Complex64::from_polar(1.0, -theta * beta);
                    let b = c(gamma * beta, 0.0);
                    Ok(power_membership(&inst.a, &inst.c1, b, &u, &y, &inst.region, qtol)?.1)
                })(),
            };
            let digest = format!("t={t}");
            match r {
                Ok(v) => Sample {
                    digest,
                    residual: v,
                    error: None,
                },
                Err(e) => Sample {
                    digest,
                    residual: f64::MAX,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    ResidualReport {
        identity_id: id.to_string(),
        control: false,
        seed: d.seed,
        pass: max_residual <= tol,
        samples,
        max_residual,
        tol,
        quad_tol: qtol,
        runtime_ms: start.elapsed().as_millis() as u64,
    }
}

fn p2_residual(inst: &Instance, x: &CVec, t: f64) -> crate::error::Result<f64> {
    let h = (1e-3f64).min(0.25 * t);
    // all three points at the same tight tolerance; quadrature noise is amplified by 1/h^2
    let s = |t: f64| -> crate::error::Result<CVec> {
        Ok(evaluate_sg_half(&inst.a, &inst.c1, c(t, 0.0), &inst.region, 1e-12)? * x)
    };
    let u = s(t)?;
    let v = (s(t + h)? - &u * c(2.0, 0.0) + s(t - h)?) * c(1.0 / (h * h), 0.0);
    let minus_a = inst.a.scalar_shift_mul(c(-1.0, 0.0), c(0.0, 0.0));
    let (_, dist) = minus_a.contains_pair(&u, &v, inst.defaults().tol_fd)?;
    Ok(dist / (1.0 + u.norm() + v.norm()))
}
