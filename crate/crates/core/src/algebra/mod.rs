//! Exact arithmetic in user-declared rational algebras.
//!
//! An [`AlgebraSpec`] fixes a basis `1, w1, .., wk`, a numeric value for each
//! basis element and a product table. [`QValue`]s are rational coordinate
//! vectors in that basis, so questions like "is this length of the form
//! `n0 + n1·α`" become rational linear algebra.

mod literal;
mod matrix;
mod qvalue;
pub(crate) mod rational;
mod spec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

pub use matrix::{exact_det, QMatrix};
pub use qvalue::{qval_arith, qval_eval, ArithOp, QValue};
pub use spec::{Algebra, AlgebraSpec, EMBEDDING_TOLERANCE};

pub(crate) use qvalue::same_algebra;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("values belong to different algebras")]
    Mismatch,
    #[error("algebra declaration, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid algebra: {0}")]
    Spec(String),
    #[error("product {0}·{1} is not declared")]
    MissingProduct(String, String),
    #[error("embedding of {left}·{right} is off by {error:e}")]
    Embedding { left: String, right: String, error: f64 },
    #[error("invalid literal: {0}")]
    Literal(String),
    #[error("`{0}` is not invertible in the algebra")]
    NotInvertible(String),
    #[error("sign of `{0}` cannot be decided at the embedding precision")]
    Undecidable(String),
    #[error("shape error: {0}")]
    Shape(String),
}

/// Integer witness `v = n·α + m` for membership in `Zα + Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ModuleWitness {
    pub n: i64,
    pub m: Vec<i64>,
}

impl ModuleWitness {
    /// Recomputes `n·α + m`.
    pub fn evaluate(&self, alpha: &[QValue]) -> Vec<QValue> {
        alpha
            .iter()
            .zip(&self.m)
            .map(|(a, &mi)| a.scale_int(self.n) + QValue::from_int(a.algebra(), mi))
            .collect()
    }
}

/// Decides exactly whether `v ∈ Zα + Z^d` and returns a witness `(n, m)`.
///
/// When some `αᵢ` is irrational the integer `n` is pinned by the irrational
/// coordinates; when all of `α` is rational the smallest non-negative `n`
/// solving the resulting congruences is returned. Witnesses that do not fit in
/// `i64` are reported as absent.
pub fn module_membership(v: &[QValue], alpha: &[QValue]) -> Option<ModuleWitness> {
    if v.len() != alpha.len() || v.is_empty() {
        return None;
    }
    let alg = alpha[0].algebra();
    if v.iter().chain(alpha).any(|x| !same_algebra(x.algebra(), alg)) {
        return None;
    }
    let k = alg.dim();
    let mut n: Option<BigRational> = None;
    for (vi, ai) in v.iter().zip(alpha) {
        for idx in 1..k {
            let (vc, ac) = (&vi.coeffs()[idx], &ai.coeffs()[idx]);
            if ac.is_zero() {
                if !vc.is_zero() {
                    return None;
                }
            } else {
                let cand = vc / ac;
                match &n {
                    Some(prev) if *prev != cand => return None,
                    Some(_) => {}
                    None => n = Some(cand),
                }
            }
        }
    }
    let n: BigInt = match n {
        Some(q) if q.is_integer() => q.to_integer(),
        Some(_) => return None,
        None => {
            // α rational: n·αᵢ ≡ vᵢ (mod 1) for every i
            let pairs: Vec<(BigRational, BigRational)> = alpha
                .iter()
                .zip(v)
                .map(|(a, x)| (a.coeffs()[0].clone(), x.coeffs()[0].clone()))
                .collect();
            rational::solve_fractional_congruences(&pairs)?
        }
    };
    let n_small = n.to_i64()?;
    let mut m = Vec::with_capacity(v.len());
    for (vi, ai) in v.iter().zip(alpha) {
        let rest = vi - &ai.scale_int(n_small);
        m.push(rest.as_integer()?.to_i64()?);
    }
    let witness = ModuleWitness { n: n_small, m };
    // the witness must reproduce v exactly
    (witness.evaluate(alpha).as_slice() == v).then_some(witness)
}

/// Splits a data file into its algebra declaration (`basis`/`product` lines)
/// and the remaining non-empty lines, numbered from 1. `#` starts a comment.
pub fn split_algebra_header(text: &str) -> (String, Vec<(usize, String)>) {
    let mut header = String::new();
    let mut rest = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let head = line.split_whitespace().next().unwrap_or("");
        if head == "basis" || head == "product" {
            header.push_str(line);
            header.push('\n');
        } else {
            rest.push((i + 1, line.to_string()));
        }
    }
    (header, rest)
}

/// The algebra declared by `header`, or `default` when the header is empty.
pub fn algebra_or_default(header: &str, default: &Algebra) -> Result<Algebra, AlgebraError> {
    if header.trim().is_empty() {
        Ok(default.clone())
    } else {
        AlgebraSpec::parse(header)
    }
}

/// Parses a comma-separated list of values.
pub fn parse_qvalues(alg: &Algebra, text: &str) -> Result<Vec<QValue>, AlgebraError> {
    text.split(',').map(|s| QValue::parse(alg, s.trim())).collect()
}

/// Rank over Q of the coefficient vectors of `values`.
pub fn rational_rank(values: &[QValue]) -> usize {
    let rows: Vec<Vec<BigRational>> = values.iter().map(|v| v.coeffs().to_vec()).collect();
    rational::rank(&rows)
}

/// Exact decomposition `γ = c0 + Σ cᵢ·αᵢ` with integer coefficients, when it exists
/// and `1, α1, .., αd` are independent over Q.
pub fn integer_coordinates(gamma: &QValue, alpha: &[QValue]) -> Option<Vec<BigInt>> {
    let alg = gamma.algebra();
    let mut gens = vec![QValue::one(alg)];
    gens.extend(alpha.iter().cloned());
    if rational_rank(&gens) != gens.len() {
        return None;
    }
    let k = alg.dim();
    // columns are generators, rows are basis coordinates
    let a: Vec<Vec<BigRational>> =
        (0..k).map(|r| gens.iter().map(|g| g.coeffs()[r].clone()).collect()).collect();
    let x = rational::solve(&a, gamma.coeffs())?;
    x.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
}
