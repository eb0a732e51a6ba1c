use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::literal::{self, Expr};
use super::rational::{ratio_from_int, solve};
use super::spec::{basis_vector, Algebra};
use super::AlgebraError;

/// Element of a declared algebra, stored as exact rational coordinates in its basis.
///
/// Equality is coefficient equality. Arithmetic through the `std::ops` traits
/// panics when the operands belong to different algebras; the `checked_*`
/// methods report that case as an error instead.
#[derive(Clone)]
pub struct QValue {
    alg: Algebra,
    coeffs: Vec<BigRational>,
}

/// Binary operations accepted by [`qval_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Exact `a op b`.
pub fn qval_arith(a: &QValue, b: &QValue, op: ArithOp) -> Result<QValue, AlgebraError> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
    }
}

pub(crate) fn same_algebra(a: &Algebra, b: &Algebra) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl QValue {
    pub fn from_coeffs(alg: &Algebra, coeffs: Vec<BigRational>) -> Result<Self, AlgebraError> {
        if coeffs.len() != alg.dim() {
            return Err(AlgebraError::Shape(format!(
                "expected {} coefficients, got {}",
                alg.dim(),
                coeffs.len()
            )));
        }
        Ok(QValue { alg: alg.clone(), coeffs })
    }

    pub fn zero(alg: &Algebra) -> Self {
        QValue { alg: alg.clone(), coeffs: vec![BigRational::zero(); alg.dim()] }
    }

    pub fn one(alg: &Algebra) -> Self {
        Self::from_rational(alg, BigRational::one())
    }

    pub fn from_int(alg: &Algebra, n: i64) -> Self {
        Self::from_rational(alg, ratio_from_int(n))
    }

    pub fn from_bigint(alg: &Algebra, n: BigInt) -> Self {
        Self::from_rational(alg, BigRational::from_integer(n))
    }

    pub fn from_rational(alg: &Algebra, q: BigRational) -> Self {
        let mut v = Self::zero(alg);
        v.coeffs[0] = q;
        v
    }

    /// Exact rational value of a finite `f64`.
    pub fn from_f64(alg: &Algebra, x: f64) -> Result<Self, AlgebraError> {
        let q = BigRational::from_float(x)
            .ok_or_else(|| AlgebraError::Literal(format!("non-finite value {x}")))?;
        Ok(Self::from_rational(alg, q))
    }

    /// The `i`-th basis element.
    pub fn basis(alg: &Algebra, i: usize) -> Self {
        QValue { alg: alg.clone(), coeffs: basis_vector(alg.dim(), i) }
    }

    /// Parses a literal such as `3/2 + 1*w1 - 2*w2` or `(1 + w1)*w2`.
    /// Division is allowed by rationals and by invertible algebra elements.
    pub fn parse(alg: &Algebra, text: &str) -> Result<Self, AlgebraError> {
        let expr = literal::parse_expr(text).map_err(AlgebraError::Literal)?;
        Self::eval(alg, &expr)
    }

    fn eval(alg: &Algebra, e: &Expr) -> Result<Self, AlgebraError> {
        if let Some(q) = literal::eval_rational(e) {
            return Ok(Self::from_rational(alg, q));
        }
        Ok(match e {
            Expr::Name(n) => {
                let i = alg
                    .index_of(n)
                    .ok_or_else(|| AlgebraError::Literal(format!("unknown basis name `{n}`")))?;
                Self::basis(alg, i)
            }
            Expr::Neg(a) => -&Self::eval(alg, a)?,
            Expr::Add(a, b) => &Self::eval(alg, a)? + &Self::eval(alg, b)?,
            Expr::Sub(a, b) => &Self::eval(alg, a)? - &Self::eval(alg, b)?,
            Expr::Mul(a, b) => &Self::eval(alg, a)? * &Self::eval(alg, b)?,
            Expr::Div(a, b) => &Self::eval(alg, a)? * &Self::eval(alg, b)?.inverse()?,
            Expr::Sqrt(_) => {
                return Err(AlgebraError::Literal("`sqrt` is not allowed in values".into()))
            }
            Expr::Num(_) => unreachable!("numbers are rational"),
        })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// True when only the unit coefficient may be nonzero.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then(|| &self.coeffs[0])
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    pub fn is_compatible(&self, other: &QValue) -> bool {
        same_algebra(&self.alg, &other.alg)
    }

    fn check(&self, other: &QValue) -> Result<(), AlgebraError> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(AlgebraError::Mismatch)
        }
    }

    pub fn checked_add(&self, other: &QValue) -> Result<QValue, AlgebraError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(QValue { alg: self.alg.clone(), coeffs })
    }

    pub fn checked_sub(&self, other: &QValue) -> Result<QValue, AlgebraError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(QValue { alg: self.alg.clone(), coeffs })
    }

    pub fn checked_mul(&self, other: &QValue) -> Result<QValue, AlgebraError> {
        self.check(other)?;
        let k = self.alg.dim();
        let mut out = vec![BigRational::zero(); k];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (o, t) in out.iter_mut().zip(self.alg.product(i, j)) {
                    if !t.is_zero() {
                        *o += &ab * t;
                    }
                }
            }
        }
        Ok(QValue { alg: self.alg.clone(), coeffs: out })
    }

    pub fn scale(&self, q: &BigRational) -> QValue {
        QValue { alg: self.alg.clone(), coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn scale_int(&self, n: i64) -> QValue {
        self.scale(&ratio_from_int(n))
    }

    /// Multiplicative inverse, solving `self * x = 1` over Q.
    pub fn inverse(&self) -> Result<QValue, AlgebraError> {
        if let Some(q) = self.as_rational() {
            if q.is_zero() {
                return Err(AlgebraError::NotInvertible(self.to_string()));
            }
            return Ok(Self::from_rational(&self.alg, q.recip()));
        }
        let k = self.alg.dim();
        // column j of the multiplication matrix is self * w_j
        let cols: Vec<QValue> = (0..k).map(|j| self * &Self::basis(&self.alg, j)).collect();
        let a: Vec<Vec<BigRational>> =
            (0..k).map(|r| cols.iter().map(|c| c.coeffs[r].clone()).collect()).collect();
        let rhs = basis_vector(k, 0);
        // a singular multiplication map means a zero divisor (or zero)
        if super::rational::rank(&a) < k {
            return Err(AlgebraError::NotInvertible(self.to_string()));
        }
        let x = solve(&a, &rhs).ok_or_else(|| AlgebraError::NotInvertible(self.to_string()))?;
        Ok(QValue { alg: self.alg.clone(), coeffs: x })
    }

    /// Numeric embedding `Σ cᵢ·value(wᵢ)`.
    pub fn to_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.alg.values())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| c.to_f64().unwrap_or(f64::NAN) * v)
            .sum()
    }

    /// Bound on `|to_f64() − true value|`, assuming each declared basis value is
    /// accurate to a few ulps.
    pub fn error_bound(&self) -> f64 {
        let mag: f64 = self
            .coeffs
            .iter()
            .zip(self.alg.values())
            .map(|(c, v)| (c.to_f64().unwrap_or(f64::INFINITY) * v).abs())
            .sum();
        mag * (self.alg.dim() as f64 + 8.0) * f64::EPSILON + f64::MIN_POSITIVE
    }

    /// Exact sign. Nonzero elements are assumed to embed to nonzero reals (the
    /// declared-independence axiom); the embedding decides the sign whenever it
    /// is separated from zero by more than its error bound.
    pub fn signum(&self) -> Result<Ordering, AlgebraError> {
        if let Some(q) = self.as_rational() {
            return Ok(q.cmp(&BigRational::zero()));
        }
        let x = self.to_f64();
        if x.abs() > self.error_bound() {
            return Ok(if x > 0.0 { Ordering::Greater } else { Ordering::Less });
        }
        Err(AlgebraError::Undecidable(self.to_string()))
    }

    pub fn cmp_exact(&self, other: &QValue) -> Result<Ordering, AlgebraError> {
        self.checked_sub(other)?.signum()
    }

    pub fn abs(&self) -> Result<QValue, AlgebraError> {
        Ok(match self.signum()? {
            Ordering::Less => -self,
            _ => self.clone(),
        })
    }

    /// Exact floor: the embedding proposes a candidate which is then corrected by
    /// exact comparisons.
    pub fn floor(&self) -> Result<BigInt, AlgebraError> {
        if let Some(q) = self.as_rational() {
            return Ok(q.floor().to_integer());
        }
        let x = self.to_f64();
        if !x.is_finite() {
            return Err(AlgebraError::Undecidable(self.to_string()));
        }
        let mut n = BigInt::from(x.floor() as i128);
        for _ in 0..4 {
            let lo = self - &QValue::from_bigint(&self.alg, n.clone());
            if lo.signum()? == Ordering::Less {
                n -= 1;
                continue;
            }
            let hi = &lo - &QValue::one(&self.alg);
            if hi.signum()? != Ordering::Less {
                n += 1;
                continue;
            }
            return Ok(n);
        }
        Err(AlgebraError::Undecidable(self.to_string()))
    }

    /// Exact fractional part `self − floor(self)` in `[0, 1)`.
    pub fn fract(&self) -> Result<QValue, AlgebraError> {
        let n = self.floor()?;
        Ok(self - &QValue::from_bigint(&self.alg, n))
    }
}

/// Numeric evaluation of a value; see [`QValue::to_f64`].
pub fn qval_eval(a: &QValue) -> f64 {
    a.to_f64()
}

impl PartialEq for QValue {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && same_algebra(&self.alg, &other.alg)
    }
}

impl Eq for QValue {}

impl std::hash::Hash for QValue {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&literal::format_linear(&self.coeffs, self.alg.names()))
    }
}

impl fmt::Debug for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QValue({self})")
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&QValue> for &QValue {
            type Output = QValue;
            fn $method(self, rhs: &QValue) -> QValue {
                self.$checked(rhs).expect("QValue operands from different algebras")
            }
        }
        impl $trait<QValue> for QValue {
            type Output = QValue;
            fn $method(self, rhs: QValue) -> QValue {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QValue> for QValue {
            type Output = QValue;
            fn $method(self, rhs: &QValue) -> QValue {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &QValue {
    type Output = QValue;
    fn neg(self) -> QValue {
        QValue { alg: self.alg.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for QValue {
    type Output = QValue;
    fn neg(self) -> QValue {
        -&self
    }
}
