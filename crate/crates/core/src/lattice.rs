//! Lattices in `R^{d+1}` over a declared algebra, their duals, the special
//! form parametrized by `(α, β)` and the reduction of a general lattice to it.
//!
//! Basis matrices hold generators as columns. The last coordinate is the
//! "internal" direction: `p1` keeps the first `d` coordinates, `p2` the last.

use num_bigint::BigInt;
use thiserror::Error;

use crate::algebra::{
    algebra_or_default, parse_qvalues, rational_rank, same_algebra, split_algebra_header, Algebra, AlgebraError,
    QMatrix, QValue,
};
use crate::modelset::PointSet;
use crate::regions::{RegionError, RegionSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("basis is singular")]
    Singular,
    #[error("generator pairing <{0}, {1}*> is not an integer")]
    Pairing(usize, usize),
    #[error("independence condition fails: {0}")]
    Independence(String),
    #[error("the block `a` of the dual basis is not invertible")]
    SingularBlock,
    #[error("transformed lattice does not match the special form: {0}")]
    Correspondence(String),
    #[error("lattice file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// A full-rank lattice `Γ ⊂ R^{d+1}` with its cached dual basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    dim_d: usize,
    basis: QMatrix,
    dual: QMatrix,
}

impl Lattice {
    /// Lattice spanned by the columns of `basis`.
    pub fn new(basis: QMatrix) -> Result<Self, LatticeError> {
        if !basis.is_square() || basis.nrows() < 2 {
            return Err(LatticeError::Dimension(format!("basis is {}x{}", basis.nrows(), basis.ncols())));
        }
        if basis.det()?.is_zero() {
            return Err(LatticeError::Singular);
        }
        let dual = basis.inverse_transpose()?;
        let lattice = Lattice { dim_d: basis.nrows() - 1, basis, dual };
        lattice.check_pairings()?;
        Ok(lattice)
    }

    fn with_dual(basis: QMatrix, dual: QMatrix) -> Result<Self, LatticeError> {
        let lattice = Lattice { dim_d: basis.nrows() - 1, basis, dual };
        lattice.check_pairings()?;
        Ok(lattice)
    }

    pub fn from_generators(alg: &Algebra, gens: &[Vec<QValue>]) -> Result<Self, LatticeError> {
        Self::new(QMatrix::from_columns(alg, gens)?)
    }

    pub fn algebra(&self) -> &Algebra {
        self.basis.algebra()
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    pub fn dual_basis(&self) -> &QMatrix {
        &self.dual
    }

    pub fn generators(&self) -> Vec<Vec<QValue>> {
        self.basis.columns()
    }

    pub fn det(&self) -> Result<QValue, LatticeError> {
        Ok(self.basis.det()?)
    }

    /// Matrix of pairings `⟨γᵢ, γⱼ*⟩`.
    pub fn pairings(&self) -> Result<QMatrix, LatticeError> {
        Ok(self.basis.transpose().mul(&self.dual)?)
    }

    fn check_pairings(&self) -> Result<(), LatticeError> {
        let p = self.pairings()?;
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                if p.get(i, j).as_integer().is_none() {
                    return Err(LatticeError::Pairing(i, j));
                }
            }
        }
        Ok(())
    }

    /// The lattice point with integer coordinates `k` in the basis.
    pub fn point(&self, k: &[i64]) -> Result<Vec<QValue>, LatticeError> {
        let v: Vec<QValue> = k.iter().map(|&x| QValue::from_int(self.algebra(), x)).collect();
        Ok(self.basis.mul_vec(&v)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = self.algebra().to_text();
        for g in self.generators() {
            let parts: Vec<String> = g.iter().map(ToString::to_string).collect();
            out.push_str(&format!("generator ({})\n", parts.join(", ")));
        }
        out
    }

    /// Parses an optional algebra header followed by `generator (..)` lines.
    pub fn parse(text: &str, default: &Algebra) -> Result<Self, LatticeError> {
        let (header, lines) = split_algebra_header(text);
        let alg = algebra_or_default(&header, default)?;
        let mut gens = Vec::new();
        for (line, body) in lines {
            let err = |msg: String| LatticeError::Parse { line, msg };
            let rest = body.strip_prefix("generator").ok_or_else(|| err("expected `generator`".into()))?.trim();
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err("expected a parenthesized tuple".into()))?;
            gens.push(parse_qvalues(&alg, inner).map_err(|e| err(e.to_string()))?);
        }
        Self::from_generators(&alg, &gens)
    }
}

/// The dual lattice `Γ* = A^{−⊤} Z^{d+1}`.
pub fn dual_lattice(l: &Lattice) -> Result<Lattice, LatticeError> {
    Lattice::with_dual(l.dual.clone(), l.basis.clone())
}

/// The parameters `(α, β)` of a special-form lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialFormData {
    pub alpha: Vec<QValue>,
    pub beta: Vec<QValue>,
}

impl SpecialFormData {
    pub fn new(alpha: Vec<QValue>, beta: Vec<QValue>) -> Result<Self, LatticeError> {
        let data = SpecialFormData { alpha, beta };
        data.check()?;
        Ok(data)
    }

    pub fn dim_d(&self) -> usize {
        self.alpha.len()
    }

    /// `1 + βᵀα`.
    pub fn one_plus_beta_alpha(&self) -> QValue {
        let alg = self.alpha[0].algebra();
        self.beta.iter().zip(&self.alpha).fold(QValue::one(alg), |acc, (b, a)| acc + b * a)
    }

    /// Both rank conditions, exactly over Q.
    pub fn check(&self) -> Result<(), LatticeError> {
        let d = self.alpha.len();
        if d == 0 || self.beta.len() != d {
            return Err(LatticeError::Dimension("alpha and beta need the same positive length".into()));
        }
        let alg = self.alpha[0].algebra();
        if self.alpha.iter().chain(&self.beta).any(|v| !same_algebra(v.algebra(), alg)) {
            return Err(AlgebraError::Mismatch.into());
        }
        let mut first = vec![QValue::one(alg)];
        first.extend(self.alpha.iter().cloned());
        let r = rational_rank(&first);
        if r != d + 1 {
            return Err(LatticeError::Independence(format!(
                "1, alpha_1..alpha_d are not linearly independent over Q (rank {r}, need {})",
                d + 1
            )));
        }
        let mut second = self.beta.clone();
        second.push(self.one_plus_beta_alpha());
        let r = rational_rank(&second);
        if r != d + 1 {
            return Err(LatticeError::Independence(format!(
                "beta_1..beta_d, 1 + beta.alpha are not linearly independent over Q (rank {r}, need {})",
                d + 1
            )));
        }
        Ok(())
    }

    /// Columns `[eᵢ + αᵢβ; −αᵢ]` and `[−β; 1]`, the images of the unit
    /// vectors under `(m, n) ↦ ((Id + βαᵀ)m − βn, n − αᵀm)`.
    pub fn gamma_basis(&self) -> QMatrix {
        let d = self.dim_d();
        let alg = self.alpha[0].algebra();
        QMatrix::from_fn(alg, d + 1, d + 1, |r, c| match (r < d, c < d) {
            (true, true) => {
                let id = QValue::from_int(alg, i64::from(r == c));
                id + &self.beta[r] * &self.alpha[c]
            }
            (false, true) => -&self.alpha[c],
            (true, false) => -&self.beta[r],
            (false, false) => QValue::one(alg),
        })
    }

    /// Columns `[eᵢ; βᵢ]` and `[α; 1 + βᵀα]`, the images under
    /// `(m, n) ↦ (m + αn, (1 + βᵀα)n + βᵀm)`.
    pub fn gamma_star_basis(&self) -> QMatrix {
        let d = self.dim_d();
        let alg = self.alpha[0].algebra();
        let corner = self.one_plus_beta_alpha();
        QMatrix::from_fn(alg, d + 1, d + 1, |r, c| match (r < d, c < d) {
            (true, true) => QValue::from_int(alg, i64::from(r == c)),
            (false, true) => self.beta[c].clone(),
            (true, false) => self.alpha[r].clone(),
            (false, false) => corner.clone(),
        })
    }
}

/// `Γ` and `Γ*` of a special-form lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialLattice {
    pub data: SpecialFormData,
    pub gamma: Lattice,
    pub gamma_star: Lattice,
}

/// Builds `Γ` and `Γ*` from the displayed generator formulas.
pub fn make_special_lattice(alpha: &[QValue], beta: &[QValue]) -> Result<SpecialLattice, LatticeError> {
    let data = SpecialFormData::new(alpha.to_vec(), beta.to_vec())?;
    let g = data.gamma_basis();
    let gs = data.gamma_star_basis();
    let gamma = Lattice::with_dual(g.clone(), gs.clone())?;
    let gamma_star = Lattice::with_dual(gs, g)?;
    Ok(SpecialLattice { data, gamma, gamma_star })
}

/// Output of [`reduce_to_special`].
#[derive(Clone, Debug)]
pub struct Reduction {
    /// `a⁻¹`, where `a` is the upper-left block of the dual basis.
    pub a: QMatrix,
    /// `1/(e − cᵀa⁻¹b)`.
    pub b: QValue,
    /// `(A, B)` maps `L*` onto `Γ*`; `(A^{−⊤}, 1/B)` maps `L` onto `Γ`.
    pub primal_a: QMatrix,
    pub primal_b: QValue,
    pub special: SpecialLattice,
    /// Integer unimodular `U` with `T(L basis) = Γ basis · U`.
    pub correspondence: QMatrix,
}

impl Reduction {
    /// The full block-diagonal map `diag(primal_a, primal_b)` on `R^{d+1}`.
    pub fn primal_map(&self) -> QMatrix {
        block_diag(&self.primal_a, &self.primal_b)
    }

    /// `diag(a, b)`, the map on the dual side.
    pub fn dual_map(&self) -> QMatrix {
        block_diag(&self.a, &self.b)
    }
}

fn block_diag(a: &QMatrix, b: &QValue) -> QMatrix {
    let d = a.nrows();
    let alg = a.algebra();
    QMatrix::from_fn(alg, d + 1, d + 1, |r, c| match (r < d, c < d) {
        (true, true) => a.get(r, c).clone(),
        (false, false) => b.clone(),
        _ => QValue::zero(alg),
    })
}

/// Maps `L` to special form. With the dual basis `M = [[a, b], [cᵀ, e]]`,
/// `A = a⁻¹` and `B = 1/(e − cᵀa⁻¹b)` send `M` to the special `Γ*` basis with
/// `α = Ab`, `β = Bc`; the primal map `(A^{−⊤}, 1/B)` sends `L` to `Γ`.
pub fn reduce_to_special(l: &Lattice) -> Result<Reduction, LatticeError> {
    let d = l.dim_d;
    let m = &l.dual;
    let head: Vec<usize> = (0..d).collect();
    let block_a = m.select(&head, &head);
    let block_b: Vec<QValue> = (0..d).map(|r| m.get(r, d).clone()).collect();
    let block_c: Vec<QValue> = (0..d).map(|c| m.get(d, c).clone()).collect();
    let e = m.get(d, d).clone();

    let a_inv = block_a.inverse().map_err(|_| LatticeError::SingularBlock)?;
    let a_inv_b = a_inv.mul_vec(&block_b)?;
    let schur = block_c.iter().zip(&a_inv_b).fold(e, |acc, (c, x)| acc - c * x);
    let b = schur.inverse().map_err(|_| LatticeError::SingularBlock)?;
    let alpha = a_inv_b;
    let beta: Vec<QValue> = block_c.iter().map(|c| c * &b).collect();
    let special = make_special_lattice(&alpha, &beta)?;

    let primal_a = a_inv.inverse_transpose()?;
    let primal_b = schur;
    let reduction_map = block_diag(&primal_a, &primal_b);
    let image = reduction_map.mul(&l.basis)?;
    let u = special.gamma.dual_basis().transpose().mul(&image)?;
    if !u.is_integral() {
        return Err(LatticeError::Correspondence("T(L) generators are not integer combinations of Γ".into()));
    }
    let det = u.det()?.as_integer();
    if det != Some(BigInt::from(1)) && det != Some(BigInt::from(-1)) {
        return Err(LatticeError::Correspondence("change of basis is not unimodular".into()));
    }
    Ok(Reduction { a: a_inv, b, primal_a, primal_b, special, correspondence: u })
}

/// Image of a point set under `x ↦ A x`. Exact coordinates are carried
/// through when both the points and `A` have them.
pub fn transform_pointset(p: &PointSet, a: &QMatrix) -> Result<PointSet, LatticeError> {
    if a.nrows() != p.dim() || a.ncols() != p.dim() {
        return Err(LatticeError::Dimension("transform size".into()));
    }
    if a.det()?.is_zero() {
        return Err(LatticeError::Singular);
    }
    Ok(p.transformed(a)?)
}

/// Image of a region under `x ↦ M x`.
pub fn transform_region(s: &RegionSet, m: &QMatrix) -> Result<RegionSet, LatticeError> {
    if m.det()?.is_zero() {
        return Err(LatticeError::Singular);
    }
    Ok(s.transformed(m)?)
}
