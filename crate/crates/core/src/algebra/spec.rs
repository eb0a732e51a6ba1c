use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::literal;
use super::AlgebraError;

/// Maximum allowed mismatch between the numeric product of two basis values and
/// the numeric value of their declared product.
pub const EMBEDDING_TOLERANCE: f64 = 1e-9;

/// Shared handle to a declared algebra. Every [`QValue`](super::QValue) carries one.
pub type Algebra = Arc<AlgebraSpec>;

/// A finite-dimensional commutative algebra over Q with a declared basis
/// `w0 = 1, w1, ..., wk`, a numeric embedding and a product table.
///
/// Linear independence of the numeric values over Q is taken on trust; only the
/// unit, commutativity and embedding-consistency conditions are verified.
#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    names: Vec<String>,
    exprs: Vec<String>,
    values: Vec<f64>,
    table: Vec<Vec<Vec<BigRational>>>,
}

impl PartialEq for AlgebraSpec {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.table == other.table && self.values == other.values
    }
}

impl Eq for AlgebraSpec {}

impl AlgebraSpec {
    /// Builds and validates an algebra. `names[0]` and `values[0]` describe the unit.
    pub fn new(
        names: Vec<String>,
        values: Vec<f64>,
        table: Vec<Vec<Vec<BigRational>>>,
    ) -> Result<Algebra, AlgebraError> {
        let exprs = values.iter().map(|v| format!("{v:?}")).collect();
        Self::with_exprs(names, exprs, values, table)
    }

    fn with_exprs(
        names: Vec<String>,
        exprs: Vec<String>,
        values: Vec<f64>,
        table: Vec<Vec<Vec<BigRational>>>,
    ) -> Result<Algebra, AlgebraError> {
        let k = names.len();
        if k == 0 || values.len() != k || table.len() != k {
            return Err(AlgebraError::Spec("basis, values and table sizes differ".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != k || row.iter().any(|e| e.len() != k) {
                return Err(AlgebraError::Spec(format!("product table row {i} has wrong shape")));
            }
        }
        let spec = AlgebraSpec { names, exprs, values, table };
        spec.validate()?;
        Ok(Arc::new(spec))
    }

    fn validate(&self) -> Result<(), AlgebraError> {
        let k = self.dim();
        if (self.values[0] - 1.0).abs() > EMBEDDING_TOLERANCE {
            return Err(AlgebraError::Spec("w0 must embed as 1".into()));
        }
        for i in 0..k {
            let unit = basis_vector(k, i);
            if self.table[0][i] != unit || self.table[i][0] != unit {
                return Err(AlgebraError::Spec(format!(
                    "w0 is not the unit for {}",
                    self.names[i]
                )));
            }
            for j in 0..k {
                if self.table[i][j] != self.table[j][i] {
                    return Err(AlgebraError::Spec(format!(
                        "product table not commutative at ({}, {})",
                        self.names[i], self.names[j]
                    )));
                }
                let lhs = self.values[i] * self.values[j];
                let rhs: f64 = self.table[i][j]
                    .iter()
                    .zip(&self.values)
                    .map(|(c, v)| c.to_f64().unwrap_or(f64::NAN) * v)
                    .sum();
                if !((lhs - rhs).abs() <= EMBEDDING_TOLERANCE) {
                    return Err(AlgebraError::Embedding {
                        left: self.names[i].clone(),
                        right: self.names[j].clone(),
                        error: (lhs - rhs).abs(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The rational numbers, basis `{1}`.
    pub fn rationals() -> Algebra {
        let one = vec![vec![vec![BigRational::one()]]];
        Self::with_exprs(vec!["1".into()], vec!["1".into()], vec![1.0], one)
            .expect("Q is a valid algebra")
    }

    /// `Q(√n)` with basis `{1, w1 = √n}`.
    pub fn quadratic(n: i64) -> Result<Algebra, AlgebraError> {
        Self::parse(&format!("basis w1 = sqrt {n}"))
    }

    /// `Q(√a, √b)` with basis `{1, w1 = √a, w2 = √b, w3 = √(ab)}`.
    pub fn biquadratic(a: i64, b: i64) -> Result<Algebra, AlgebraError> {
        Self::parse(&format!(
            "basis w1 = sqrt {a}\nbasis w2 = sqrt {b}\nbasis w3 = sqrt {ab}\n\
             product w1 w2 = w3\nproduct w1 w3 = {a}*w2\nproduct w2 w3 = {b}*w1",
            ab = a * b
        ))
    }

    /// Parses the line-based declaration format:
    ///
    /// ```text
    /// basis w1 = sqrt 2
    /// basis w2 = sqrt 3
    /// product w1 w2 = w3
    /// basis w3 = sqrt 6
    /// ```
    ///
    /// A basis element declared as `sqrt q` for a rational `q` gets the square
    /// `w·w = q` unless a product line says otherwise. Every other product of
    /// non-unit elements must be declared. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Algebra, AlgebraError> {
        let mut names = vec!["1".to_string()];
        let mut exprs = vec!["1".to_string()];
        let mut values = vec![1.0];
        let mut squares: HashMap<usize, BigRational> = HashMap::new();
        let mut products: Vec<(usize, String, String, String)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match head {
                "basis" => {
                    let (name, expr) = rest.split_once('=').ok_or_else(|| AlgebraError::Parse {
                        line: lineno,
                        msg: "expected `basis NAME = EXPR`".into(),
                    })?;
                    let name = name.trim();
                    check_name(name, lineno)?;
                    if names.iter().any(|n| n == name) {
                        return Err(AlgebraError::Parse {
                            line: lineno,
                            msg: format!("duplicate basis name `{name}`"),
                        });
                    }
                    let expr = expr.trim();
                    let value = literal::eval_real(expr)
                        .map_err(|msg| AlgebraError::Parse { line: lineno, msg })?;
                    if let Some(q) = literal::sqrt_argument(expr) {
                        squares.insert(names.len(), q);
                    }
                    names.push(name.to_string());
                    exprs.push(expr.to_string());
                    values.push(value);
                }
                "product" => {
                    let (lhs, rhs) = rest.split_once('=').ok_or_else(|| AlgebraError::Parse {
                        line: lineno,
                        msg: "expected `product A B = VALUE`".into(),
                    })?;
                    let mut it = lhs.split_whitespace();
                    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                        return Err(AlgebraError::Parse {
                            line: lineno,
                            msg: "expected two factor names".into(),
                        });
                    };
                    products.push((lineno, a.to_string(), b.to_string(), rhs.trim().to_string()));
                }
                other => {
                    return Err(AlgebraError::Parse {
                        line: lineno,
                        msg: format!("unknown directive `{other}`"),
                    })
                }
            }
        }

        let k = names.len();
        let mut table: Vec<Vec<Option<Vec<BigRational>>>> = vec![vec![None; k]; k];
        for i in 0..k {
            table[0][i] = Some(basis_vector(k, i));
            table[i][0] = Some(basis_vector(k, i));
        }
        for (&i, q) in &squares {
            let mut v = vec![BigRational::zero(); k];
            v[0] = q.clone();
            table[i][i] = Some(v);
        }
        for (lineno, a, b, rhs) in products {
            let index = |s: &str| {
                names.iter().position(|n| n == s).ok_or_else(|| AlgebraError::Parse {
                    line: lineno,
                    msg: format!("unknown basis name `{s}`"),
                })
            };
            let (i, j) = (index(&a)?, index(&b)?);
            let coeffs = literal::parse_linear(&rhs, &names)
                .map_err(|msg| AlgebraError::Parse { line: lineno, msg })?;
            table[i][j] = Some(coeffs.clone());
            table[j][i] = Some(coeffs);
        }
        let mut full = Vec::with_capacity(k);
        for i in 0..k {
            let mut row = Vec::with_capacity(k);
            for j in 0..k {
                match table[i][j].take() {
                    Some(v) => row.push(v),
                    None => return Err(AlgebraError::MissingProduct(names[i].clone(), names[j].clone())),
                }
            }
            full.push(row);
        }
        Self::with_exprs(names, exprs, values, full)
    }

    /// Number of basis elements, including the unit.
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coefficients of `w_i * w_j`.
    pub fn product(&self, i: usize, j: usize) -> &[BigRational] {
        &self.table[i][j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Serializes back to the text format accepted by [`AlgebraSpec::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 1..self.dim() {
            out.push_str(&format!("basis {} = {}\n", self.names[i], self.exprs[i]));
        }
        for i in 1..self.dim() {
            for j in i..self.dim() {
                let coeffs = &self.table[i][j];
                out.push_str(&format!(
                    "product {} {} = {}\n",
                    self.names[i],
                    self.names[j],
                    literal::format_linear(coeffs, &self.names)
                ));
            }
        }
        out
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q<")?;
        for (i, (n, e)) in self.names.iter().zip(&self.exprs).enumerate().skip(1) {
            if i > 1 {
                write!(f, ", ")?;
            }
            write!(f, "{n}={e}")?;
        }
        write!(f, ">")
    }
}

fn check_name(name: &str, line: usize) -> Result<(), AlgebraError> {
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "sqrt";
    if ok {
        Ok(())
    } else {
        Err(AlgebraError::Parse { line, msg: format!("invalid basis name `{name}`") })
    }
}

pub(crate) fn basis_vector(k: usize, i: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); k];
    v[i] = BigRational::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_declared_example() {
        let alg = AlgebraSpec::parse(
            "basis w1 = sqrt 2\nbasis w2 = sqrt 3\nproduct w1 w2 = w3\nbasis w3 = sqrt 6\n\
             product w1 w3 = 2*w2\nproduct w2 w3 = 3*w1\n",
        )
        .unwrap();
        assert_eq!(alg.dim(), 4);
        assert_eq!(alg.product(1, 2), basis_vector(4, 3).as_slice());
        assert_eq!(alg.product(3, 3)[0], BigRational::from_integer(6.into()));
    }

    #[test]
    fn missing_product_is_rejected() {
        let err = AlgebraSpec::parse("basis w1 = sqrt 2\nbasis w2 = sqrt 3\n").unwrap_err();
        assert!(matches!(err, AlgebraError::MissingProduct(..)));
    }

    #[test]
    fn inconsistent_embedding_is_rejected() {
        let err = AlgebraSpec::parse("basis w1 = sqrt 2\nproduct w1 w1 = 3").unwrap_err();
        assert!(matches!(err, AlgebraError::Embedding { .. }));
    }

    #[test]
    fn golden_ratio() {
        let alg = AlgebraSpec::parse("basis phi = (1 + sqrt 5)/2\nproduct phi phi = 1 + phi").unwrap();
        assert!((alg.values()[1] - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let alg = AlgebraSpec::biquadratic(2, 3).unwrap();
        let again = AlgebraSpec::parse(&alg.to_text()).unwrap();
        assert_eq!(*alg, *again);
    }
}
