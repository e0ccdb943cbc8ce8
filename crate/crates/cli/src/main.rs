//! `qqsys`: verify, solve, transform and diagonalize qq-system data from files.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 bad input,
//! 3 the solver did not converge. Reports go to stdout as JSON, logs to
//! stderr (`-v`, `-vv` or `RUST_LOG`).

mod commands;
mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use commands::{Check, Failure, Outcome};
use format::{read_json, Backend, DatumFile, InputError, InstanceFile, SolutionFile, SolveInputFile};
use qqsys::backlund::CombinatorialDatum;
use qqsys::{Mp, NumCtx, QQInstance, QQSolution, Rational, Scalar, WeylWord};

#[derive(Parser, Debug)]
#[command(name = "qqsys", version, about = "qq-systems, Bethe equations and Miura opers")]
struct Cli {
    /// Overrides the backend named in the instance file.
    #[arg(long, global = true)]
    backend: Option<Backend>,
    /// Mantissa bits for the numeric backend.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Relative comparison tolerance for the numeric backend.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for artifact files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON array of argument lists, run in parallel; reports are printed in order.
    #[arg(long)]
    batch: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Check qq residuals, Miura-Pluecker twist and regularity of a solution.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Solve the Bethe equations from a partition, initial roots or degrees (numeric).
    Solve { instance: PathBuf, input: PathBuf },
    /// Apply the reflections of a word, right to left.
    Chain {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        word: Option<String>,
    },
    /// Check the degree inequalities along a word for a datum or instance file.
    Admissible {
        input: PathBuf,
        /// Solution giving the degrees when `input` is an instance file.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long)]
        word: Option<String>,
    },
    /// Fold a B_n or G_2 solution onto A_n.
    Fold { instance: PathBuf, solution: PathBuf },
    /// Diagonalize a type A connection along a reduced word for w0.
    Diagonalize {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        word: Option<String>,
    },
}

#[derive(Serialize, Debug)]
struct Report {
    command: Vec<String>,
    digest: String,
    backend: Option<Backend>,
    status: &'static str,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    checks: Vec<Check>,
    info: Map<String, Value>,
    artifacts: Map<String, Value>,
    wall_time_ms: u128,
}

struct Run {
    digest: Sha256,
    backend: Option<Backend>,
}

impl Run {
    fn read<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, InputError> {
        let (v, bytes) = read_json(path)?;
        self.digest.update((bytes.len() as u64).to_le_bytes());
        self.digest.update(&bytes);
        Ok(v)
    }
}

fn num_ctx(cli: &Cli, file: &InstanceFile) -> Result<NumCtx, InputError> {
    let mut ctx = match cli.precision {
        Some(p) if p < 32 => return Err(InputError(format!("precision {p} is too small"))),
        Some(p) => {
            let mut c = NumCtx::with_prec(p);
            if let Some(t) = &file.tolerances {
                c.tol_bits = t.tol_bits.unwrap_or(c.tol_bits);
                c.root_tol_bits = t.root_tol_bits.unwrap_or(c.root_tol_bits);
            }
            c
        }
        None => file.num_ctx(),
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(InputError(format!("tolerance {t} must lie in (0, 1)")));
        }
        ctx.tol_bits = (-t.log2()).ceil() as u32;
    }
    Ok(ctx)
}

fn parse_word(w: &Option<String>) -> Result<Option<WeylWord>, InputError> {
    w.as_deref().map(format::parse_word).transpose()
}

fn load<S: Scalar>(
    run: &mut Run,
    ctx: &S::Ctx,
    file: &InstanceFile,
    solution: &Path,
) -> Result<(QQInstance<S>, QQSolution<S>), InputError> {
    let inst = file.to_instance::<S>(ctx)?;
    let sf: SolutionFile = run.read(solution)?;
    let sol = sf.to_solution(ctx, inst.rank())?;
    Ok((inst, sol))
}

/// Runs `f` with the scalar type selected by the backend.
macro_rules! with_backend {
    ($cli:expr, $run:expr, $file:expr, |$s:ident, $ctx:ident| $body:expr) => {{
        let backend = $cli.backend.unwrap_or($file.backend);
        $run.backend = Some(backend);
        match backend {
            Backend::Exact => {
                type $s = Rational;
                let $ctx = ();
                $body
            }
            Backend::Numeric => {
                type $s = Mp;
                let $ctx = num_ctx($cli, &$file)?;
                $body
            }
        }
    }};
}

fn dispatch(cli: &Cli, cmd: &Command, run: &mut Run) -> Result<Outcome, Failure> {
    match cmd {
        Command::Verify { instance, solution } => {
            let file: InstanceFile = run.read(instance)?;
            with_backend!(cli, run, file, |S, ctx| {
                let (inst, sol) = load::<S>(run, &ctx, &file, solution)?;
                commands::verify(&inst, &sol)
            })
        }
        Command::Solve { instance, input } => {
            let file: InstanceFile = run.read(instance)?;
            let backend = cli.backend.unwrap_or(file.backend);
            run.backend = Some(backend);
            if backend == Backend::Exact {
                return Err(Failure::Input("solve needs the numeric backend (--backend numeric)".into()));
            }
            let ctx = num_ctx(cli, &file)?;
            let inst = file.to_instance::<Mp>(&ctx)?;
            let input: SolveInputFile = run.read(input)?;
            let (out, _) = commands::solve(&inst, &input, cli.seed)?;
            Ok(out)
        }
        Command::Chain { instance, solution, word } => {
            let word = parse_word(word)?;
            let file: InstanceFile = run.read(instance)?;
            with_backend!(cli, run, file, |S, ctx| {
                let (inst, sol) = load::<S>(run, &ctx, &file, solution)?;
                commands::run_chain(&inst, &sol, word.as_ref(), cli.seed)
            })
        }
        Command::Admissible { input, solution, word } => {
            let word = parse_word(word)?;
            let value: Value = run.read(input)?;
            let datum = if value.get("d").is_some() {
                let df: DatumFile = serde_json::from_value(value).map_err(|e| InputError(e.to_string()))?;
                df.to_datum()?
            } else {
                let file: InstanceFile = serde_json::from_value(value).map_err(|e| InputError(e.to_string()))?;
                let solution = solution
                    .as_ref()
                    .ok_or_else(|| InputError("an instance file needs --solution for the degrees".into()))?;
                with_backend!(cli, run, file, |S, ctx| {
                    let (inst, sol) = load::<S>(run, &ctx, &file, solution)?;
                    CombinatorialDatum::from_instance(&inst, &sol.q_plus)
                })
            };
            Ok(commands::admissible(&datum, word.as_ref()))
        }
        Command::Fold { instance, solution } => {
            let file: InstanceFile = run.read(instance)?;
            let precision = file.precision_bits.or(cli.precision);
            with_backend!(cli, run, file, |S, ctx| {
                let (inst, sol) = load::<S>(run, &ctx, &file, solution)?;
                commands::run_fold(&inst, &sol, cli.backend.unwrap_or(file.backend), precision)
            })
        }
        Command::Diagonalize { instance, solution, word } => {
            let word = parse_word(word)?;
            let file: InstanceFile = run.read(instance)?;
            with_backend!(cli, run, file, |S, ctx| {
                let (inst, sol) = load::<S>(run, &ctx, &file, solution)?;
                commands::diagonalize(&inst, &sol, word.as_ref(), cli.seed)
            })
        }
    }
}

fn write_artifacts(dir: &Path, artifacts: &Map<String, Value>) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, v) in artifacts {
        format::write_json(&dir.join(format!("{name}.json")), v)?;
    }
    Ok(())
}

fn execute(cli: &Cli, args: Vec<String>) -> Report {
    let start = Instant::now();
    let mut run = Run { digest: Sha256::new(), backend: None };
    let result = match &cli.command {
        Some(cmd) => dispatch(cli, cmd, &mut run),
        None => Err(Failure::Input("no command given".into())),
    };
    let (status, exit_code, error, out) = match result {
        Ok(out) => {
            if out.checks.iter().all(|c| c.pass) {
                ("pass", 0, None, out)
            } else {
                ("check-failed", 1, None, out)
            }
        }
        Err(Failure::Input(e)) => ("input-error", 2, Some(e), Outcome::default()),
        Err(Failure::NoConvergence(e)) => ("no-convergence", 3, Some(e), Outcome::default()),
    };
    let mut report = Report {
        command: args,
        digest: run.digest.finalize().iter().map(|b| format!("{b:02x}")).collect(),
        backend: run.backend,
        status,
        exit_code,
        error,
        checks: out.checks,
        info: out.info,
        artifacts: out.artifacts,
        wall_time_ms: 0,
    };
    if let Some(dir) = &cli.out {
        if let Err(e) = write_artifacts(dir, &report.artifacts) {
            report.status = "input-error";
            report.exit_code = 2;
            report.error = Some(format!("{}: {e}", dir.display()));
        }
    }
    report.wall_time_ms = start.elapsed().as_millis();
    for c in report.checks.iter().filter(|c| !c.pass) {
        log::warn!("check failed: {} (residual {})", c.name, c.residual);
    }
    if let Some(e) = &report.error {
        log::error!("{e}");
    }
    report
}

fn run_batch(cli: &Cli, path: &Path) -> Result<Vec<Report>, InputError> {
    let (jobs, _): (Vec<Vec<String>>, _) = read_json(path)?;
    let parsed: Vec<Result<Cli, String>> = jobs
        .iter()
        .map(|args| {
            let argv = std::iter::once("qqsys".to_string()).chain(args.iter().cloned());
            Cli::try_parse_from(argv).map_err(|e| e.to_string())
        })
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len().max(1));
    let mut reports: Vec<Option<Report>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = reports.chunks_mut(jobs.len().div_ceil(workers).max(1)).collect();
        let mut offset = 0;
        for chunk in chunks {
            let start = offset;
            offset += chunk.len();
            let (jobs, parsed) = (&jobs, &parsed);
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    let idx = start + k;
                    *slot = Some(match &parsed[idx] {
                        Ok(job) => {
                            let mut job = job.clone_inherit(cli);
                            job.batch = None;
                            execute(&job, jobs[idx].clone())
                        }
                        Err(e) => Report {
                            command: jobs[idx].clone(),
                            digest: String::new(),
                            backend: None,
                            status: "input-error",
                            exit_code: 2,
                            error: Some(e.trim().to_string()),
                            checks: Vec::new(),
                            info: Map::new(),
                            artifacts: Map::new(),
                            wall_time_ms: 0,
                        },
                    });
                }
            });
        }
    });
    Ok(reports.into_iter().map(|r| r.expect("every job ran")).collect())
}

impl Cli {
    /// Job flags fall back to the ones given alongside `--batch`.
    fn clone_inherit(&self, parent: &Cli) -> Cli {
        Cli {
            backend: self.backend.or(parent.backend),
            precision: self.precision.or(parent.precision),
            tol: self.tol.or(parent.tol),
            seed: if self.seed != 0 { self.seed } else { parent.seed },
            out: self.out.clone(),
            batch: None,
            verbose: self.verbose,
            command: self.command.clone(),
        }
    }
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(path) = &cli.batch {
        return match run_batch(&cli, path) {
            Ok(reports) => {
                print_json(&reports);
                ExitCode::from(reports.iter().map(|r| r.exit_code).max().unwrap_or(0))
            }
            Err(e) => {
                log::error!("{e}");
                ExitCode::from(2)
            }
        };
    }
    let report = execute(&cli, args);
    print_json(&report);
    ExitCode::from(report.exit_code)
}
