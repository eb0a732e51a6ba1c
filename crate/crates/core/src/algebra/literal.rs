//! Expression syntax shared by algebra declarations and `QValue` literals.
//!
//! Grammar (usual precedence, left associative):
//! `expr := term (('+'|'-') term)*`, `term := unary (('*'|'/') unary)*`,
//! `unary := '-' unary | 'sqrt' unary | atom`, `atom := number | name | '(' expr ')'`.
//! Numbers are integers or decimals and are read exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Expr {
    Num(BigRational),
    Name(String),
    Sqrt(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(parse_decimal(&text)?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

fn parse_decimal(text: &str) -> Result<BigRational, String> {
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(format!("malformed number `{text}`"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| format!("malformed number `{text}`"))?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(BigRational::new(numer, denom))
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        if self.peek() == Some(&Tok::Ident("sqrt".into())) {
            self.pos += 1;
            return Ok(Expr::Sqrt(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Expr::Num(q))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Name(name))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return Err("missing `)`".into());
                }
                Ok(e)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

pub(crate) fn parse_expr(s: &str) -> Result<Expr, String> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input after position {}", p.pos));
    }
    Ok(e)
}

/// Evaluates a purely numeric expression (no basis names).
pub(crate) fn eval_real(s: &str) -> Result<f64, String> {
    fn go(e: &Expr) -> Result<f64, String> {
        Ok(match e {
            Expr::Num(q) => q.to_f64().ok_or("number out of range")?,
            Expr::Name(n) => return Err(format!("unexpected name `{n}` in numeric value")),
            Expr::Sqrt(a) => {
                let x = go(a)?;
                if x < 0.0 {
                    return Err("square root of a negative number".into());
                }
                x.sqrt()
            }
            Expr::Neg(a) => -go(a)?,
            Expr::Add(a, b) => go(a)? + go(b)?,
            Expr::Sub(a, b) => go(a)? - go(b)?,
            Expr::Mul(a, b) => go(a)? * go(b)?,
            Expr::Div(a, b) => go(a)? / go(b)?,
        })
    }
    go(&parse_expr(s)?)
}

/// Exact rational value of an expression made of numbers and arithmetic only.
pub(crate) fn eval_rational(e: &Expr) -> Option<BigRational> {
    Some(match e {
        Expr::Num(q) => q.clone(),
        Expr::Name(_) | Expr::Sqrt(_) => return None,
        Expr::Neg(a) => -eval_rational(a)?,
        Expr::Add(a, b) => eval_rational(a)? + eval_rational(b)?,
        Expr::Sub(a, b) => eval_rational(a)? - eval_rational(b)?,
        Expr::Mul(a, b) => eval_rational(a)? * eval_rational(b)?,
        Expr::Div(a, b) => {
            let d = eval_rational(b)?;
            if d.is_zero() {
                return None;
            }
            eval_rational(a)? / d
        }
    })
}

/// `Some(q)` when the expression is exactly `sqrt q` with `q` a non-negative rational.
pub(crate) fn sqrt_argument(s: &str) -> Option<BigRational> {
    match parse_expr(s).ok()? {
        Expr::Sqrt(inner) => eval_rational(&inner).filter(|q| !q.is_negative()),
        _ => None,
    }
}

/// Parses a linear combination of basis names into coefficients.
pub(crate) fn parse_linear(s: &str, names: &[String]) -> Result<Vec<BigRational>, String> {
    fn go(e: &Expr, names: &[String]) -> Result<Vec<BigRational>, String> {
        let k = names.len();
        if let Some(q) = eval_rational(e) {
            let mut v = vec![BigRational::zero(); k];
            v[0] = q;
            return Ok(v);
        }
        Ok(match e {
            Expr::Name(n) => {
                let i = names.iter().position(|x| x == n).ok_or(format!("unknown name `{n}`"))?;
                super::spec::basis_vector(k, i)
            }
            Expr::Neg(a) => go(a, names)?.into_iter().map(|x| -x).collect(),
            Expr::Add(a, b) => zip(go(a, names)?, go(b, names)?, |x, y| x + y),
            Expr::Sub(a, b) => zip(go(a, names)?, go(b, names)?, |x, y| x - y),
            Expr::Mul(a, b) => match (eval_rational(a), eval_rational(b)) {
                (Some(q), _) => go(b, names)?.into_iter().map(|x| x * &q).collect(),
                (_, Some(q)) => go(a, names)?.into_iter().map(|x| x * &q).collect(),
                _ => return Err("product of two basis elements in a linear literal".into()),
            },
            Expr::Div(a, b) => {
                let q = eval_rational(b).ok_or("division by a non-constant")?;
                if q.is_zero() {
                    return Err("division by zero".into());
                }
                go(a, names)?.into_iter().map(|x| x / &q).collect()
            }
            Expr::Sqrt(_) => return Err("`sqrt` is not allowed in algebra literals".into()),
            Expr::Num(_) => unreachable!("numbers are rational"),
        })
    }
    go(&parse_expr(s)?, names)
}

fn zip(
    a: Vec<BigRational>,
    b: Vec<BigRational>,
    f: impl Fn(BigRational, BigRational) -> BigRational,
) -> Vec<BigRational> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Canonical text for a coefficient vector, e.g. `3/2 + w1 - 2*w2`.
pub(crate) fn format_linear(coeffs: &[BigRational], names: &[String]) -> String {
    let mut out = String::new();
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let unit = mag == BigRational::from_integer(1.into());
        if i == 0 {
            out.push_str(&mag.to_string());
        } else if unit {
            out.push_str(&names[i]);
        } else {
            out.push_str(&format!("{mag}*{}", names[i]));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["1".into(), "w1".into(), "w2".into()]
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert!(parse_decimal("1.2.3").is_err());
    }

    #[test]
    fn linear_literal() {
        let v = parse_linear("3/2 + 1*w1 - 2*w2", &names()).unwrap();
        assert_eq!(format_linear(&v, &names()), "3/2 + w1 - 2*w2");
        assert!(parse_linear("w1*w2", &names()).is_err());
    }

    #[test]
    fn numeric_values() {
        assert!((eval_real("sqrt 2").unwrap() - 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(sqrt_argument("sqrt(3/4)"), Some(BigRational::new(3.into(), 4.into())));
        assert_eq!(sqrt_argument("(1 + sqrt 5)/2"), None);
    }
}
