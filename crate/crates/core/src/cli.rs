//! The `symknot` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::energy::{circle_energy_oracle, energy_gradient, seminorm_energy_check, EnergyParams};
use crate::error::{Error, Result};
use crate::geometry::{bilipschitz_ratio, curve_stats};
use crate::io::{load_curve, save_curve, write_json, write_trace, RunManifest};
use crate::optimize::{compare_minimizers, minimize_symmetric, CompareTolerances, OptimizerConfig, Termination};
use crate::symmetry::{detect_periods, period_signature, validate_symmetry_constraints};
use crate::torus::{symmetry_for_order, torus_knot_curve, validate_torus_spec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub const THREADS_ENV: &str = "SYMKNOT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "symknot", version, about = "Symmetric critical torus knots for O'Hara energies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the standard torus knot curve and write it as a curve file.
    MakeTorus {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, default_value_t = 0.4)]
        rho: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Energy, scaled energy, sampling statistics and the seminorm check.
    Eval {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Neighbor exclusion in the pair sum.
        #[arg(long, default_value_t = 1)]
        exclude: usize,
    },
    /// Minimize the scaled energy among curves fixed by an order-m action.
    Minimize {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 240)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        rho: f64,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        grad_tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Detect rotational periods and check the axis constraints.
    DetectSymmetry {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = 12)]
        m_max: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Decide whether two curves are isometric, mirror images, or distinct.
    Compare {
        #[arg(long)]
        c1: PathBuf,
        #[arg(long)]
        c2: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        energy_tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        align_tol: f64,
    },
    /// Energy of the unit circle by adaptive quadrature.
    Oracle {
        #[arg(long)]
        alpha: f64,
    },
}

/// Runs one invocation and returns the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let pool = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_NUMERICAL;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Some(t)),
            _ => Err(Error::param(format!("{THREADS_ENV} must be an integer >= 1, got {s:?}"))),
        },
    }
}

/// Output files must land in an existing directory; checked up front so a
/// rejected run leaves nothing behind.
fn check_output(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if !dir.is_dir() => Err(Error::param(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

/// Writes one line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn print_json(v: &Value) {
    emit(&serde_json::to_string_pretty(v).expect("json"));
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::MakeTorus { a, b, rho, n, out } => {
            let spec = validate_torus_spec(a, b, rho)?;
            check_output(&out)?;
            let curve = torus_knot_curve(&spec, n)?;
            let mut meta = Map::new();
            meta.insert("spec".into(), json!({ "a": a, "b": b, "rho": rho }));
            meta.insert("provenance".into(), json!("make-torus"));
            save_curve(&curve, &out, Some(&meta))?;
            Ok(EXIT_OK)
        }
        Command::Eval { curve, alpha, exclude } => {
            let params = EnergyParams::new(alpha)?.with_neighbor_exclusion(exclude)?;
            let c = load_curve(&curve)?;
            let g = energy_gradient(&c, &params)?;
            let stats = curve_stats(&c);
            let seminorm = match seminorm_energy_check(&c, &params) {
                Ok(chk) => json!({ "lhs": chk.lhs, "rhs": chk.rhs, "slack": chk.slack, "pass": chk.pass }),
                Err(Error::NonUniformSampling { spread, .. }) => {
                    json!({ "skipped": format!("sampling not uniform (edge spread {spread:.3e})") })
                }
                Err(e) => return Err(e),
            };
            print_json(&json!({
                "n": c.len(),
                "alpha": alpha,
                "energy": g.energy,
                "scaled_energy": g.scaled,
                "length": stats.length,
                "min_edge": stats.min_edge,
                "max_edge": stats.max_edge,
                "diameter": stats.diameter,
                "bilipschitz_ratio": bilipschitz_ratio(&c),
                "seminorm_check": seminorm,
            }));
            Ok(EXIT_OK)
        }
        Command::Minimize {
            a,
            b,
            m,
            alpha,
            n,
            rho,
            max_iters,
            grad_tol,
            out,
            trace,
            report,
            manifest,
        } => {
            let spec = validate_torus_spec(a, b, rho)?;
            let mut config = OptimizerConfig::new(alpha)?;
            config.samples = n;
            config.rho = rho;
            if let Some(v) = max_iters {
                config.max_iters = v;
            }
            if let Some(v) = grad_tol {
                config.grad_tol = v;
            }
            config.validate()?;
            let sym = symmetry_for_order(&spec, m)?;
            sym.action().check_grid(n)?;
            torus_knot_curve(&sym.representative(&spec), n)?;
            for p in [Some(&out), trace.as_ref(), report.as_ref(), manifest.as_ref()].into_iter().flatten() {
                check_output(p)?;
            }

            let started = Instant::now();
            let outcome = match minimize_symmetric(&spec, m, &config) {
                Ok(o) => o,
                Err(Error::Stall {
                    iteration,
                    reason,
                    trace: partial,
                }) => {
                    if let Some(p) = &trace {
                        write_trace(&partial, p)?;
                    }
                    return Err(Error::Stall {
                        iteration,
                        reason,
                        trace: partial,
                    });
                }
                Err(e) => return Err(e),
            };
            let elapsed = started.elapsed().as_secs_f64();

            let mut meta = Map::new();
            meta.insert("spec".into(), json!({ "a": a, "b": b, "rho": rho }));
            meta.insert("alpha".into(), json!(alpha));
            meta.insert("m".into(), json!(m));
            meta.insert("provenance".into(), json!("minimize"));
            save_curve(&outcome.curve, &out, Some(&meta))?;
            if let Some(p) = &trace {
                write_trace(&outcome.trace, p)?;
            }
            let termination = match outcome.termination {
                Termination::Converged => "converged",
                Termination::MaxIterations => "max_iterations",
            };
            if let Some(p) = &report {
                write_json(
                    &json!({
                        "termination": termination,
                        "iterations": outcome.iterations,
                        "m": m,
                        "k": sym.k,
                        "report": outcome.report,
                    }),
                    p,
                )?;
            }
            if let Some(p) = &manifest {
                let mut man = RunManifest::new("minimize", json!({ "a": a, "b": b, "m": m, "config": config }));
                man.outputs = [Some(&out), trace.as_ref(), report.as_ref()].into_iter().flatten().cloned().collect();
                man.wall_clock_seconds = elapsed;
                man.termination = Some(termination.to_string());
                man.iterations = Some(outcome.iterations);
                man.report = Some(outcome.report.clone());
                write_json(&man, p)?;
            }
            emit(&format!(
                "{termination} after {} iterations: S = {:.10e}, sym grad {:.3e}, full grad {:.3e}, periods {:?}",
                outcome.iterations,
                outcome.report.scaled_energy,
                outcome.report.sym_grad_rms,
                outcome.report.full_grad_rms,
                outcome.report.periods
            ));
            Ok(match outcome.termination {
                Termination::Converged => EXIT_OK,
                Termination::MaxIterations => EXIT_NUMERICAL,
            })
        }
        Command::DetectSymmetry { curve, m_max, tol } => {
            if m_max < 2 {
                return Err(Error::param("m-max must be at least 2"));
            }
            if !(tol > 0.0) {
                return Err(Error::param("tol must be positive"));
            }
            let c = load_curve(&curve)?;
            let found = detect_periods(&c, m_max, tol);
            let violations = validate_symmetry_constraints(&found, &c);
            print_json(&json!({
                "periods": period_signature(&found),
                "detections": found.iter().map(|d| json!({
                    "order": d.order,
                    "axis_point": [d.axis_point.x, d.axis_point.y, d.axis_point.z],
                    "axis_direction": [d.axis_direction.x, d.axis_direction.y, d.axis_direction.z],
                    "index_shift": d.index_shift,
                    "residual": d.residual,
                })).collect::<Vec<_>>(),
                "violations": violations.iter().map(|v| json!({
                    "clause": v.clause().to_string(),
                    "detail": format!("{v:?}"),
                })).collect::<Vec<_>>(),
            }));
            Ok(EXIT_OK)
        }
        Command::Compare {
            c1,
            c2,
            alpha,
            energy_tol,
            align_tol,
        } => {
            let params = EnergyParams::new(alpha)?;
            if !(energy_tol > 0.0 && align_tol > 0.0) {
                return Err(Error::param("tolerances must be positive"));
            }
            let a = load_curve(&c1)?;
            let b = load_curve(&c2)?;
            let tol = CompareTolerances {
                energy_rel: energy_tol,
                alignment: align_tol,
            };
            let cmp = compare_minimizers(&a, &b, &params, &tol)?;
            print_json(&serde_json::to_value(&cmp).expect("json"));
            Ok(EXIT_OK)
        }
        Command::Oracle { alpha } => {
            let params = EnergyParams::for_oracle(alpha)?;
            emit(&format!("{:.16e}", circle_energy_oracle(&params)?));
            Ok(EXIT_OK)
        }
    }
}
