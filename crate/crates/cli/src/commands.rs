//! Command implementations, generic over the scalar backend.

use serde_json::{json, Map, Value};

use qqsys::backlund::{chain, check_admissible, ChainError, CombinatorialDatum};
use qqsys::bethe::{
    find_partition, seed_and_continue, solve_newton, verify_bethe, BetheError, BetheRoots, InfinitePartition,
    SolveOptions,
};
use qqsys::opermat::{diagonalize_type_a, regularity_residues, verify_mp_twist, OperError};
use qqsys::qqcore::{check_nondegenerate, complete_minus, fold, qq_check};
use qqsys::rootsys::w0_reduced_word;
use qqsys::{Mp, QQInstance, QQSolution, Scalar, WeylWord};

use crate::format::{
    literals, matrix_file, root_sets, roots_file, Backend, InputError, InstanceFile, SolutionFile, TraceFile,
};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Magnitude, printed in scientific notation.
    pub residual: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, residual: f64) -> Self {
        Self { name: name.into(), pass, residual: format!("{residual:e}") }
    }
}

/// Everything a successful run produces besides its exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub info: Map<String, Value>,
    pub artifacts: Map<String, Value>,
}

impl Outcome {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn info(&mut self, k: &str, v: Value) {
        self.info.insert(k.into(), v);
    }

    fn artifact(&mut self, k: &str, v: impl serde::Serialize) {
        self.artifacts.insert(k.into(), serde_json::to_value(v).expect("serializable"));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Input(String),
    NoConvergence(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

fn bethe_failure(e: BetheError) -> Failure {
    match e {
        BetheError::NoConvergence { .. } | BetheError::SingularJacobian | BetheError::PathCollision { .. } => {
            Failure::NoConvergence(e.to_string())
        }
        other => Failure::Input(other.to_string()),
    }
}

fn nondeg_info<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>) -> (bool, Value) {
    let nd = check_nondegenerate(inst, &sol.q_plus);
    let v = json!({
        "nondegenerate": nd.overall,
        "monic": nd.monic,
        "squarefree": nd.squarefree,
        "coprime_to_lambda": nd.coprime_to_lambda,
    });
    (nd.overall, v)
}

fn qq_checks<S: Scalar>(out: &mut Outcome, inst: &QQInstance<S>, sol: &QQSolution<S>, prefix: &str) {
    for i in 0..inst.rank() {
        let c = qq_check(inst, sol, i);
        out.check(Check::new(format!("{prefix}qq[{}]", i + 1), c.pass, c.residual));
    }
}

pub fn verify<S: Scalar>(inst: &QQInstance<S>, sol: &QQSolution<S>) -> Result<Outcome, Failure> {
    let mut out = Outcome::default();
    qq_checks(&mut out, inst, sol, "");
    let (nondeg, nd) = nondeg_info(inst, sol);
    out.info("nondegeneracy", nd);
    for i in 0..inst.rank() {
        match verify_mp_twist(inst, sol, i) {
            Ok(m) => out.check(Check::new(format!("mp_twist[{}]", i + 1), m.pass, m.residual)),
            Err(e) => out.check(Check::new(format!("mp_twist[{}]: {e}", i + 1), false, f64::INFINITY)),
        }
    }
    if !nondeg {
        out.info("regularity", json!("skipped: solution is degenerate"));
        return Ok(out);
    }
    match regularity_residues(inst, sol) {
        Ok(res) => {
            for (i, r) in res.iter().enumerate() {
                let max = r.iter().map(Scalar::abs).fold(0.0, f64::max);
                // residues are sums of O(#roots) terms of size O(1/separation)
                let scale = 1e3 * (1.0 + r.len() as f64);
                let pass = r.iter().all(|v| v.is_negligible(scale));
                out.check(Check::new(format!("regularity[{}]", i + 1), pass, max));
            }
        }
        Err(OperError::Poly(e)) => out.info("regularity", json!(format!("skipped: {e}"))),
        Err(e) => out.check(Check::new(format!("regularity: {e}"), false, f64::INFINITY)),
    }
    Ok(out)
}

pub fn solve(
    inst: &QQInstance<Mp>,
    input: &crate::format::SolveInputFile,
    seed: u64,
) -> Result<(Outcome, QQSolution<Mp>), Failure> {
    let ctx = *inst.ctx();
    let opts = SolveOptions { seed, ..SolveOptions::default() };
    let given = [input.partition.is_some(), input.init.is_some(), input.degrees.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(Failure::Input("solve input needs exactly one of `partition`, `init`, `degrees`".into()));
    }
    let mut out = Outcome::default();
    let roots = if let Some(init) = &input.init {
        let init = BetheRoots::new(root_sets(&ctx, init)?);
        if init.roots.len() != inst.rank() {
            return Err(Failure::Input(format!("{} root sets for rank {}", init.roots.len(), inst.rank())));
        }
        out.info("method", json!("newton"));
        solve_newton(inst, &init, &opts).map_err(bethe_failure)?
    } else {
        let part = match (&input.partition, &input.degrees) {
            (Some(p), _) => InfinitePartition { w: root_sets(&ctx, p)? },
            (_, Some(d)) => {
                if d.len() != inst.rank() {
                    return Err(Failure::Input(format!("{} degrees for rank {}", d.len(), inst.rank())));
                }
                find_partition(inst, d)
                    .ok_or_else(|| Failure::Input(format!("bad partition: no root sets with degrees {d:?}")))?
            }
            _ => unreachable!(),
        };
        out.info("method", json!("continuation"));
        out.artifact("partition", part.w.iter().map(|w| literals(w)).collect::<Vec<_>>());
        seed_and_continue(inst, &part, &opts).map_err(bethe_failure)?
    };
    let tol = opts.resolved_tolerance::<Mp>(&ctx);
    let report = verify_bethe(inst, &roots, tol).map_err(bethe_failure)?;
    out.check(Check::new("bethe", report.pass, report.max_residual));
    out.artifact("roots", roots_file(&roots));
    let q_plus = roots.to_polys(&ctx);
    let sol = complete_minus(inst, &q_plus, None).map_err(|e| Failure::NoConvergence(format!("completion failed: {e}")))?;
    qq_checks(&mut out, inst, &sol, "");
    out.artifact("solution", SolutionFile::from_solution(&sol));
    Ok((out, sol))
}

fn default_word<S: Scalar>(inst: &QQInstance<S>, word: Option<&WeylWord>) -> WeylWord {
    word.cloned().unwrap_or_else(|| w0_reduced_word(inst.cartan_type))
}

pub fn run_chain<S: Scalar>(
    inst: &QQInstance<S>,
    sol: &QQSolution<S>,
    word: Option<&WeylWord>,
    seed: u64,
) -> Result<Outcome, Failure> {
    let word = default_word(inst, word);
    let mut out = Outcome::default();
    out.info("word", json!(word.to_string()));
    let trace = match chain(inst, sol, &word, seed) {
        Ok(t) => t,
        Err(ChainError::Broken(f)) => {
            out.check(Check::new(format!("chain: {f}"), false, f64::INFINITY));
            out.artifact("trace", TraceFile::from_trace(&f.partial));
            return Ok(out);
        }
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    for (k, s) in trace.steps.iter().enumerate() {
        let worst = (0..inst.rank())
            .map(|i| qq_check(&s.instance, &s.solution, i))
            .fold((true, 0.0f64), |(p, r), c| (p && c.pass, r.max(c.residual)));
        out.check(Check::new(format!("step[{}] s{}", k + 1, s.index + 1), worst.0, worst.1));
    }
    out.check(Check::new("composable", trace.composable(), 0.0));
    out.check(Check::new("generic", trace.generic(), 0.0));
    out.artifact("trace", TraceFile::from_trace(&trace));
    Ok(out)
}

pub fn admissible(datum: &CombinatorialDatum, word: Option<&WeylWord>) -> Outcome {
    let word = word.cloned().unwrap_or_else(|| w0_reduced_word(datum.cartan_type));
    let rep = check_admissible(datum, &word);
    let mut out = Outcome::default();
    out.info("word", json!(word.to_string()));
    out.info("first_failure", json!(rep.first_failure()));
    for p in &rep.prefixes {
        out.check(Check::new(format!("prefix[{}]", p.prefix), p.holds.iter().all(|&b| b), 0.0));
    }
    out.artifact(
        "degrees",
        rep.prefixes.iter().map(|p| json!({"prefix": p.prefix, "degrees": p.degrees, "holds": p.holds})).collect::<Vec<_>>(),
    );
    out
}

pub fn run_fold<S: Scalar>(
    inst: &QQInstance<S>,
    sol: &QQSolution<S>,
    backend: Backend,
    precision: Option<u32>,
) -> Result<Outcome, Failure> {
    let (finst, fsol) = fold(inst, sol).map_err(|e| Failure::Input(e.to_string()))?;
    let mut out = Outcome::default();
    qq_checks(&mut out, &finst, &fsol, "folded ");
    let (_, nd) = nondeg_info(&finst, &fsol);
    out.info("nondegeneracy", nd);
    out.artifact("instance", InstanceFile::from_instance(&finst, backend, precision));
    out.artifact("solution", SolutionFile::from_solution(&fsol));
    Ok(out)
}

pub fn diagonalize<S: Scalar>(
    inst: &QQInstance<S>,
    sol: &QQSolution<S>,
    word: Option<&WeylWord>,
    seed: u64,
) -> Result<Outcome, Failure> {
    let word = default_word(inst, word);
    let mut out = Outcome::default();
    out.info("word", json!(word.to_string()));
    match diagonalize_type_a(inst, sol, &word, seed) {
        Ok(d) => {
            out.check(Check::new("gauge", d.pass, d.residual));
            out.artifact(
                "matrices",
                json!({
                    "v": matrix_file(&d.v),
                    "b_minus": matrix_file(&d.b_minus),
                    "n_plus": matrix_file(&d.n_plus),
                    "connection": matrix_file(&d.connection),
                }),
            );
        }
        Err(e @ (OperError::UnsupportedType(_) | OperError::NotLongest(_) | OperError::RootSystem(_))) => {
            return Err(Failure::Input(e.to_string()))
        }
        Err(e) => out.check(Check::new(format!("diagonalize: {e}"), false, f64::INFINITY)),
    }
    Ok(out)
}
