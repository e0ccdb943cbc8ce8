//! JSON file formats. Scalars are exact strings or `[re, im]` pairs;
//! polynomials are coefficient arrays, lowest degree first; colors and
//! word letters are 1-based.

use std::fmt;
use std::path::Path;

use qqsys::backlund::{ChainTrace, CombinatorialDatum};
use qqsys::bethe::BetheRoots;
use qqsys::opermat::RatMatrix;
use qqsys::polyalg::Literal;
use qqsys::{CartanType, Family, NumCtx, Point, Poly, QQInstance, QQSolution, RationalFn, Scalar, Twist, WeylWord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Anything wrong with what the user handed us (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_err(e: impl fmt::Display) -> InputError {
    InputError(e.to_string())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>), InputError> {
    let bytes = std::fs::read(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let v = serde_json::from_slice(&bytes).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok((v, bytes))
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    std::fs::write(path, s)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Exact,
    Numeric,
}

impl std::str::FromStr for Backend {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "numeric" => Ok(Backend::Numeric),
            other => Err(InputError(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartanSpec {
    pub family: Family,
    pub rank: usize,
}

impl CartanSpec {
    pub fn to_type(self) -> Result<CartanType, InputError> {
        CartanType::new(self.family, self.rank).map_err(input_err)
    }

    pub fn from_type(ty: CartanType) -> Self {
        Self { family: ty.family(), rank: ty.rank() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_tol_bits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub z: Literal,
    pub weights: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub cartan: CartanSpec,
    pub points: Vec<PointFile>,
    pub twist: Vec<Literal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead: Option<Vec<Literal>>,
    /// Extra polynomial factor of each `Lambda_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<Vec<Vec<Literal>>>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

pub fn scalar<S: Scalar>(ctx: &S::Ctx, lit: &Literal) -> Result<S, InputError> {
    S::from_literal(ctx, lit).map_err(input_err)
}

pub fn scalars<S: Scalar>(ctx: &S::Ctx, lits: &[Literal]) -> Result<Vec<S>, InputError> {
    lits.iter().map(|l| scalar(ctx, l)).collect()
}

pub fn literals<S: Scalar>(v: &[S]) -> Vec<Literal> {
    v.iter().map(Scalar::to_literal).collect()
}

pub fn poly<S: Scalar>(ctx: &S::Ctx, lits: &[Literal]) -> Result<Poly<S>, InputError> {
    Ok(Poly::from_coeffs(ctx, scalars(ctx, lits)?))
}

pub fn poly_literals<S: Scalar>(p: &Poly<S>) -> Vec<Literal> {
    literals(p.coeffs())
}

impl InstanceFile {
    /// Numeric context from the file, before command-line overrides.
    pub fn num_ctx(&self) -> NumCtx {
        let mut ctx = self.precision_bits.map_or_else(NumCtx::default, NumCtx::with_prec);
        if let Some(t) = &self.tolerances {
            if let Some(b) = t.tol_bits {
                ctx.tol_bits = b;
            }
            if let Some(b) = t.root_tol_bits {
                ctx.root_tol_bits = b;
            }
        }
        ctx
    }

    pub fn to_instance<S: Scalar>(&self, ctx: &S::Ctx) -> Result<QQInstance<S>, InputError> {
        let ty = self.cartan.to_type()?;
        let points = self
            .points
            .iter()
            .map(|p| Ok(Point { z: scalar(ctx, &p.z)?, weights: p.weights.clone() }))
            .collect::<Result<Vec<_>, InputError>>()?;
        let twist = Twist::new(scalars(ctx, &self.twist)?);
        if twist.rank() == 0 {
            return Err(InputError("empty twist".into()));
        }
        let mut inst = QQInstance::new(ty, points, twist).map_err(input_err)?;
        if let Some(lead) = &self.lead {
            inst = inst.with_lead(scalars(ctx, lead)?).map_err(input_err)?;
        }
        if let Some(extra) = &self.extra {
            if extra.len() != inst.rank() {
                return Err(InputError(format!("{} extra factors for rank {}", extra.len(), inst.rank())));
            }
            let polys = extra.iter().map(|e| poly(ctx, e)).collect::<Result<Vec<_>, _>>()?;
            if polys.iter().any(Poly::is_zero) {
                return Err(InputError("zero extra factor".into()));
            }
            inst.extra = polys;
        }
        Ok(inst)
    }

    pub fn from_instance<S: Scalar>(inst: &QQInstance<S>, backend: Backend, precision_bits: Option<u32>) -> Self {
        let one = S::one(inst.ctx());
        let lead = (!inst.lead.iter().all(|l| l.approx_eq(&one))).then(|| literals(&inst.lead));
        let extra = (!inst.extra.iter().all(|e| e.is_constant() && e.coeff(0).approx_eq(&one)))
            .then(|| inst.extra.iter().map(poly_literals).collect());
        Self {
            cartan: CartanSpec::from_type(inst.cartan_type),
            points: inst.points.iter().map(|p| PointFile { z: p.z.to_literal(), weights: p.weights.clone() }).collect(),
            twist: literals(&inst.twist.zeta),
            lead,
            extra,
            backend,
            precision_bits,
            tolerances: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub q_plus: Vec<Vec<Literal>>,
    pub q_minus: Vec<Vec<Literal>>,
}

impl SolutionFile {
    pub fn to_solution<S: Scalar>(&self, ctx: &S::Ctx, rank: usize) -> Result<QQSolution<S>, InputError> {
        if self.q_plus.len() != rank || self.q_minus.len() != rank {
            return Err(InputError(format!("solution has {}/{} polynomials for rank {rank}", self.q_plus.len(), self.q_minus.len())));
        }
        let qp = self.q_plus.iter().map(|c| poly(ctx, c)).collect::<Result<Vec<_>, _>>()?;
        let qm = self.q_minus.iter().map(|c| poly(ctx, c)).collect::<Result<Vec<_>, _>>()?;
        if qp.iter().any(Poly::is_zero) {
            return Err(InputError("q+ must be nonzero".into()));
        }
        Ok(QQSolution::new(qp, qm))
    }

    pub fn from_solution<S: Scalar>(sol: &QQSolution<S>) -> Self {
        Self {
            q_plus: sol.q_plus.iter().map(poly_literals).collect(),
            q_minus: sol.q_minus.iter().map(poly_literals).collect(),
        }
    }
}

/// Input of `solve`: exactly one of the three keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveInputFile {
    /// Root sets of a solution at infinite twist, continued to the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<Literal>>>,
    /// Starting roots for Newton.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<Vec<Literal>>>,
    /// Degrees; a partition is searched for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<usize>>,
}

pub fn root_sets<S: Scalar>(ctx: &S::Ctx, sets: &[Vec<Literal>]) -> Result<Vec<Vec<S>>, InputError> {
    sets.iter().map(|s| scalars(ctx, s)).collect()
}

pub fn roots_file<S: Scalar>(roots: &BetheRoots<S>) -> Vec<Vec<Literal>> {
    roots.roots.iter().map(|r| literals(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumFile {
    pub cartan: CartanSpec,
    pub d: Vec<i64>,
    pub n: Vec<i64>,
    /// 1-based colors with vanishing pairing.
    #[serde(default)]
    pub psi: Vec<usize>,
}

impl DatumFile {
    pub fn to_datum(&self) -> Result<CombinatorialDatum, InputError> {
        let ty = self.cartan.to_type()?;
        let r = ty.rank();
        if self.d.len() != r || self.n.len() != r {
            return Err(InputError(format!("datum needs {r} degrees and {r} Lambda degrees")));
        }
        let mut datum = CombinatorialDatum::new(ty, self.d.clone(), self.n.clone());
        for &c in &self.psi {
            if c == 0 || c > r {
                return Err(InputError(format!("color {c} out of range")));
            }
            datum.psi.push(c - 1);
        }
        datum.twist_vanishes = datum.psi.len() == r;
        Ok(datum)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatFnFile {
    pub num: Vec<Literal>,
    pub den: Vec<Literal>,
}

impl RatFnFile {
    pub fn from_ratfn<S: Scalar>(f: &RationalFn<S>) -> Self {
        Self { num: poly_literals(f.num()), den: poly_literals(f.den()) }
    }

    #[allow(dead_code)]
    pub fn to_ratfn<S: Scalar>(&self, ctx: &S::Ctx) -> Result<RationalFn<S>, InputError> {
        RationalFn::new(poly(ctx, &self.num)?, poly(ctx, &self.den)?).ok_or_else(|| InputError("zero denominator".into()))
    }
}

pub type MatrixFile = Vec<Vec<RatFnFile>>;

pub fn matrix_file<S: Scalar>(m: &RatMatrix<S>) -> MatrixFile {
    m.rows().iter().map(|r| r.iter().map(RatFnFile::from_ratfn).collect()).collect()
}

#[allow(dead_code)]
pub fn matrix_from_file<S: Scalar>(ctx: &S::Ctx, m: &MatrixFile) -> Result<RatMatrix<S>, InputError> {
    let rows = m
        .iter()
        .map(|r| r.iter().map(|e| e.to_ratfn(ctx)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    RatMatrix::from_rows(rows).ok_or_else(|| InputError("matrix is not square".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub color: usize,
    pub twist: Vec<Literal>,
    pub solution: SolutionFile,
    pub composable: bool,
    pub generic: bool,
    pub retries: usize,
    pub mu: RatFnFile,
    pub mu_ledger: RatFnFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub word: String,
    pub initial_generic: bool,
    pub composable: bool,
    pub generic: bool,
    /// In application order, starting from the last letter.
    pub steps: Vec<StepFile>,
}

impl TraceFile {
    pub fn from_trace<S: Scalar>(t: &ChainTrace<S>) -> Self {
        Self {
            word: t.word.to_string(),
            initial_generic: t.initial_generic,
            composable: t.composable(),
            generic: t.generic(),
            steps: t
                .steps
                .iter()
                .map(|s| StepFile {
                    color: s.index + 1,
                    twist: literals(&s.instance.twist.zeta),
                    solution: SolutionFile::from_solution(&s.solution),
                    composable: s.composable,
                    generic: s.generic,
                    retries: s.retries,
                    mu: RatFnFile::from_ratfn(&s.mu),
                    mu_ledger: RatFnFile::from_ratfn(&s.mu_ledger),
                })
                .collect(),
        }
    }
}

pub fn parse_word(s: &str) -> Result<WeylWord, InputError> {
    s.parse().map_err(input_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qqsys::{Mp, Rational};

    fn a1_file() -> InstanceFile {
        serde_json::from_str(
            r#"{"cartan": {"family": "A", "rank": 1},
                "points": [{"z": "0", "weights": [1]}],
                "twist": ["1/2"]}"#,
        )
        .unwrap()
    }

    #[test]
    fn instance_round_trip_exact() {
        let f = a1_file();
        let inst: QQInstance<Rational> = f.to_instance(&()).unwrap();
        let back = InstanceFile::from_instance(&inst, Backend::Exact, None);
        assert_eq!(back, f);
        assert_eq!(back.to_instance::<Rational>(&()).unwrap(), inst);
    }

    #[test]
    fn solution_round_trip_numeric() {
        let ctx = NumCtx::default();
        let f = SolutionFile {
            q_plus: vec![vec![Literal::Complex(["0.25".into(), "-3".into()]), "1".into()]],
            q_minus: vec![vec!["1/3".into()]],
        };
        let sol: QQSolution<Mp> = f.to_solution(&ctx, 1).unwrap();
        let again = SolutionFile::from_solution(&sol).to_solution::<Mp>(&ctx, 1).unwrap();
        assert_eq!(again, sol);
    }

    #[test]
    fn malformed_inputs_rejected() {
        let mut f = a1_file();
        f.twist = vec!["1/0".into()];
        assert!(f.to_instance::<Rational>(&()).is_err());
        let mut f = a1_file();
        f.twist = vec![Literal::Complex(["1".into(), "1".into()])];
        assert!(f.to_instance::<Rational>(&()).is_err());
        assert!(serde_json::from_str::<InstanceFile>(r#"{"cartan": {"family": "A", "rank": 1}}"#).is_err());
        let sol = SolutionFile { q_plus: vec![vec![]], q_minus: vec![vec![]] };
        assert!(sol.to_solution::<Rational>(&(), 1).is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = RatMatrix::<Rational>::identity(&(), 3);
        assert_eq!(matrix_from_file::<Rational>(&(), &matrix_file(&m)).unwrap(), m);
    }
}
