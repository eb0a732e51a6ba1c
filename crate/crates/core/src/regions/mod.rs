//! Finite unions of half-open parallelepipeds with exact corner and edge data.
//!
//! A piece is the image of `[0,1)^d` under `u ↦ offset + E·u`, where the
//! columns of `E` are the edge vectors. A negative edge in one dimension gives a
//! left-open interval, so `(a, b]` is the piece with offset `b` and edge `a − b`.

mod brs;
mod construct;
mod fourier;
mod text;

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::algebra::{same_algebra, Algebra, AlgebraError, QMatrix, QValue};

pub use brs::{
    brs_parallelepiped, realize_measure, verify_equidecomposition, BrsParallelepiped,
    EquidecompCertificate, EquidecompVerdict,
};
pub use construct::{construct_brs_between, BrsConstruction, ConstructParams};
pub use fourier::ft_indicator;

/// Numeric slack used where exact polytope tests are out of reach.
pub const GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("degenerate piece: edge matrix is singular")]
    Degenerate,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("pieces {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("point is within the guard band of a piece boundary")]
    Ambiguous,
    #[error("region file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
}

/// One half-open parallelepiped.
#[derive(Clone, Debug)]
pub struct Piece {
    offset: Vec<QValue>,
    edges: QMatrix,
    det: QValue,
    inv: Option<QMatrix>,
    num_offset: DVector<f64>,
    num_edges: DMatrix<f64>,
    num_inv: DMatrix<f64>,
    num_volume: f64,
    bbox: (Vec<f64>, Vec<f64>),
}

impl Piece {
    pub fn new(offset: Vec<QValue>, edges: QMatrix) -> Result<Self, RegionError> {
        let d = offset.len();
        if d == 0 || !edges.is_square() || edges.nrows() != d {
            return Err(RegionError::Dimension(format!(
                "offset has {d} entries, edge matrix is {}x{}",
                edges.nrows(),
                edges.ncols()
            )));
        }
        if offset.iter().any(|v| !same_algebra(v.algebra(), edges.algebra())) {
            return Err(AlgebraError::Mismatch.into());
        }
        let det = edges.det()?;
        if det.is_zero() {
            return Err(RegionError::Degenerate);
        }
        let inv = edges.inverse().ok();
        let num_edges = edges.to_f64();
        let num_inv = match &inv {
            Some(m) => m.to_f64(),
            None => num_edges.clone().try_inverse().ok_or(RegionError::Degenerate)?,
        };
        let num_offset = DVector::from_iterator(d, offset.iter().map(QValue::to_f64));
        let num_volume = det.to_f64().abs();
        let mut piece = Piece {
            offset,
            edges,
            det,
            inv,
            num_offset,
            num_edges,
            num_inv,
            num_volume,
            bbox: (Vec::new(), Vec::new()),
        };
        piece.bbox = piece.compute_bbox();
        Ok(piece)
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn offset(&self) -> &[QValue] {
        &self.offset
    }

    pub fn edges(&self) -> &QMatrix {
        &self.edges
    }

    pub fn det(&self) -> &QValue {
        &self.det
    }

    pub fn volume(&self) -> Result<QValue, RegionError> {
        Ok(self.det.abs()?)
    }

    pub fn num_volume(&self) -> f64 {
        self.num_volume
    }

    pub fn num_offset(&self) -> &DVector<f64> {
        &self.num_offset
    }

    pub fn num_edges(&self) -> &DMatrix<f64> {
        &self.num_edges
    }

    /// Axis-aligned means the edge matrix is diagonal.
    pub fn is_axis_aligned(&self) -> bool {
        let d = self.dim();
        (0..d).all(|r| (0..d).all(|c| r == c || self.edges.get(r, c).is_zero()))
    }

    /// The same set moved by `shift`.
    pub fn translated(&self, shift: &[QValue]) -> Result<Piece, RegionError> {
        if shift.len() != self.dim() {
            return Err(RegionError::Dimension("shift length".into()));
        }
        let offset = self.offset.iter().zip(shift).map(|(o, s)| o.checked_add(s)).collect::<Result<_, _>>()?;
        Piece::new(offset, self.edges.clone())
    }

    /// Image under the linear map `m` (offset and edges both transformed).
    pub fn transformed(&self, m: &QMatrix) -> Result<Piece, RegionError> {
        let offset = m.mul_vec(&self.offset)?;
        Piece::new(offset, m.mul(&self.edges)?)
    }

    /// Same point set, possibly described differently: equal offsets and the
    /// same edge columns up to order.
    pub fn same_set(&self, other: &Piece) -> bool {
        if self.dim() != other.dim() || self.offset != other.offset {
            return false;
        }
        let mut a = self.edges.columns();
        let mut b = other.edges.columns();
        let key = |c: &Vec<QValue>| c.iter().map(ToString::to_string).collect::<Vec<_>>();
        a.sort_by_key(key);
        b.sort_by_key(key);
        a == b
    }

    /// Corners `offset + E·u` for `u ∈ {0,1}^d`, numerically.
    pub fn corners(&self) -> Vec<DVector<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let u = DVector::from_fn(d, |i, _| if mask & (1 << i) != 0 { 1.0 } else { 0.0 });
                &self.num_offset + &self.num_edges * u
            })
            .collect()
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        self.bbox.clone()
    }

    fn compute_bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for c in self.corners() {
            for i in 0..d {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        (lo, hi)
    }

    /// Exact membership.
    pub fn contains_exact(&self, x: &[QValue]) -> Result<bool, RegionError> {
        let Some(inv) = &self.inv else {
            let num: Vec<f64> = x.iter().map(QValue::to_f64).collect();
            let err = x.iter().map(QValue::error_bound).fold(0.0, f64::max);
            return self.contains_numeric(&num, err.max(GUARD)).ok_or(RegionError::Ambiguous);
        };
        let diff: Vec<QValue> =
            x.iter().zip(&self.offset).map(|(a, b)| a.checked_sub(b)).collect::<Result<_, _>>()?;
        let t = inv.mul_vec(&diff)?;
        let one = QValue::one(self.edges.algebra());
        for ti in &t {
            if ti.signum()? == Ordering::Less || ti.cmp_exact(&one)? != Ordering::Less {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Membership of a numeric point known to within `err` (max-norm).
    /// `None` when the point is too close to the boundary to decide.
    pub fn contains_numeric(&self, x: &[f64], err: f64) -> Option<bool> {
        let d = self.dim();
        let mut inside = true;
        let mut ambiguous = false;
        for r in 0..d {
            let mut t = 0.0;
            let mut row_norm = 0.0;
            for c in 0..d {
                let a = self.num_inv[(r, c)];
                t += a * (x[c] - self.num_offset[c]);
                row_norm += a.abs();
            }
            let margin = err * row_norm + 4.0 * f64::EPSILON * (1.0 + t.abs());
            if t < -margin || t >= 1.0 + margin {
                return Some(false);
            }
            if t < margin || t > 1.0 - margin {
                ambiguous = true;
                inside = false;
            }
        }
        if ambiguous {
            None
        } else {
            Some(inside)
        }
    }

    /// Numeric membership with an exact fallback near the boundary.
    pub fn contains_certified(
        &self,
        num: &[f64],
        err: f64,
        exact: impl FnOnce() -> Result<Vec<QValue>, RegionError>,
    ) -> Result<bool, RegionError> {
        match self.contains_numeric(num, err) {
            Some(b) => Ok(b),
            None => self.contains_exact(&exact()?),
        }
    }

    /// Number of integers `k` with `x + k` in a one-dimensional piece, or
    /// `None` when an endpoint is within `err` of such a translate.
    fn count_translates_1d(&self, x: f64, err: f64) -> Option<i64> {
        let (a, b) = (self.bbox.0[0], self.bbox.1[0]);
        let margin = err + 8.0 * f64::EPSILON * (1.0 + x.abs() + a.abs().max(b.abs()));
        let (ua, ub) = (a - x, b - x);
        for u in [ua, ub] {
            if (u - u.round()).abs() <= margin {
                return None;
            }
        }
        // [a, b) for a positive edge, (a, b] otherwise; off the grid both
        // count ceil(b - x) - ceil(a - x)
        Some(ub.ceil() as i64 - ua.ceil() as i64)
    }

    /// Whether the closures of two pieces have overlapping interiors. Exact
    /// for axis-aligned pairs, separating-axis test with a guard otherwise.
    pub fn interiors_overlap(&self, other: &Piece) -> Result<bool, RegionError> {
        if self.is_axis_aligned() && other.is_axis_aligned() {
            for i in 0..self.dim() {
                let (a_lo, a_hi) = axis_interval(self, i)?;
                let (b_lo, b_hi) = axis_interval(other, i)?;
                let lo = if a_lo.cmp_exact(&b_lo)? == Ordering::Less { b_lo } else { a_lo };
                let hi = if a_hi.cmp_exact(&b_hi)? == Ordering::Less { a_hi } else { b_hi };
                if lo.cmp_exact(&hi)? != Ordering::Less {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        Ok(!separated(self, other))
    }
}

fn axis_interval(p: &Piece, i: usize) -> Result<(QValue, QValue), RegionError> {
    let o = p.offset[i].clone();
    let e = p.edges.get(i, i);
    let end = &o + e;
    Ok(if e.signum()? == Ordering::Less { (end, o) } else { (o, end) })
}

fn separated(a: &Piece, b: &Piece) -> bool {
    let d = a.dim();
    let mut axes: Vec<DVector<f64>> = Vec::new();
    for p in [a, b] {
        for r in 0..d {
            axes.push(p.num_inv.row(r).transpose());
        }
    }
    if d == 3 {
        for i in 0..3 {
            for j in 0..3 {
                let u = a.num_edges.column(i).into_owned();
                let v = b.num_edges.column(j).into_owned();
                let c = DVector::from_vec(vec![
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ]);
                if c.norm() > 1e-12 {
                    axes.push(c);
                }
            }
        }
    }
    let (ca, cb) = (a.corners(), b.corners());
    axes.iter().any(|axis| {
        let scale = axis.norm().max(1e-300);
        let proj = |cs: &[DVector<f64>]| {
            cs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                let x = axis.dot(c) / scale;
                (lo.min(x), hi.max(x))
            })
        };
        let (alo, ahi) = proj(&ca);
        let (blo, bhi) = proj(&cb);
        ahi <= blo + GUARD || bhi <= alo + GUARD
    })
}

/// A finite union of pairwise (almost) disjoint half-open parallelepipeds.
#[derive(Clone, Debug)]
pub struct RegionSet {
    alg: Algebra,
    dim: usize,
    pieces: Vec<Piece>,
}

impl RegionSet {
    /// Builds a region, rejecting overlapping pieces.
    pub fn new(alg: &Algebra, dim: usize, pieces: Vec<Piece>) -> Result<Self, RegionError> {
        let region = Self::new_unchecked(alg, dim, pieces)?;
        if let Some((i, j)) = region.first_overlap()? {
            return Err(RegionError::Overlap(i, j));
        }
        Ok(region)
    }

    /// Builds a region without the pairwise disjointness check.
    pub fn new_unchecked(alg: &Algebra, dim: usize, pieces: Vec<Piece>) -> Result<Self, RegionError> {
        for p in &pieces {
            if p.dim() != dim {
                return Err(RegionError::Dimension(format!("piece of dimension {} in a {dim}-d region", p.dim())));
            }
            if !same_algebra(p.edges.algebra(), alg) {
                return Err(AlgebraError::Mismatch.into());
            }
        }
        Ok(RegionSet { alg: alg.clone(), dim, pieces })
    }

    pub fn empty(alg: &Algebra, dim: usize) -> Self {
        RegionSet { alg: alg.clone(), dim, pieces: Vec::new() }
    }

    /// Half-open interval `[lo, hi)`.
    pub fn interval(lo: &QValue, hi: &QValue) -> Result<Self, RegionError> {
        let edge = hi.checked_sub(lo)?;
        if edge.signum()? != Ordering::Greater {
            return Err(RegionError::Degenerate);
        }
        let alg = lo.algebra().clone();
        let piece = Piece::new(vec![lo.clone()], QMatrix::from_rows(&alg, vec![vec![edge]])?)?;
        Self::new(&alg, 1, vec![piece])
    }

    /// Half-open interval `(lo, hi]`.
    pub fn interval_left_open(lo: &QValue, hi: &QValue) -> Result<Self, RegionError> {
        let edge = lo.checked_sub(hi)?;
        if edge.signum()? != Ordering::Less {
            return Err(RegionError::Degenerate);
        }
        let alg = lo.algebra().clone();
        let piece = Piece::new(vec![hi.clone()], QMatrix::from_rows(&alg, vec![vec![edge]])?)?;
        Self::new(&alg, 1, vec![piece])
    }

    /// Axis-aligned box `[lo, hi)`.
    pub fn boxed(lo: &[QValue], hi: &[QValue]) -> Result<Self, RegionError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(RegionError::Dimension("box corners".into()));
        }
        let alg = lo[0].algebra().clone();
        let d = lo.len();
        let sides: Vec<QValue> =
            hi.iter().zip(lo).map(|(h, l)| h.checked_sub(l)).collect::<Result<_, _>>()?;
        let edges = QMatrix::from_fn(&alg, d, d, |r, c| if r == c { sides[r].clone() } else { QValue::zero(&alg) });
        Self::new(&alg, d, vec![Piece::new(lo.to_vec(), edges)?])
    }

    /// `[0,1)^d`.
    pub fn unit_cube(alg: &Algebra, d: usize) -> Result<Self, RegionError> {
        let lo = vec![QValue::zero(alg); d];
        let hi = vec![QValue::one(alg); d];
        Self::boxed(&lo, &hi)
    }

    /// Union of regions whose pieces must not overlap.
    pub fn union(parts: &[RegionSet]) -> Result<Self, RegionError> {
        let first = parts.first().ok_or_else(|| RegionError::Dimension("empty union".into()))?;
        let pieces = parts.iter().flat_map(|r| r.pieces.iter().cloned()).collect();
        Self::new(&first.alg, first.dim, pieces)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn first_overlap(&self) -> Result<Option<(usize, usize)>, RegionError> {
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                if self.pieces[i].interiors_overlap(&self.pieces[j])? {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    /// Exact volume `Σ |det E|`.
    pub fn volume(&self) -> Result<QValue, RegionError> {
        self.pieces.iter().try_fold(QValue::zero(&self.alg), |acc, p| Ok(acc + p.volume()?))
    }

    pub fn bbox(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut it = self.pieces.iter().map(Piece::bbox);
        let (mut lo, mut hi) = it.next()?;
        for (l, h) in it {
            for i in 0..self.dim {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        Some((lo, hi))
    }

    pub fn contains_exact(&self, x: &[QValue]) -> Result<bool, RegionError> {
        for p in &self.pieces {
            if p.contains_exact(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Number of pieces containing `x`: 0 or 1 off the piece boundaries.
    pub fn count_exact(&self, x: &[QValue]) -> Result<i64, RegionError> {
        let mut n = 0;
        for p in &self.pieces {
            if p.contains_exact(x)? {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Integer translates `k` for which `x + k` may land in the region.
    fn translate_range(&self, x: &[f64]) -> Vec<(i64, i64)> {
        let Some((lo, hi)) = self.bbox() else {
            return vec![(1, 0); self.dim];
        };
        (0..self.dim)
            .map(|i| {
                let a = (lo[i] - x[i] - 1e-6).ceil() as i64;
                let b = (hi[i] - x[i] + 1e-6).floor() as i64;
                (a, b)
            })
            .collect()
    }

    /// Multiplicity `χ_S(x) = Σ_{k∈Z^d} 1_S(x + k)`, exactly.
    pub fn multiplicity(&self, x: &[QValue]) -> Result<i64, RegionError> {
        if x.len() != self.dim {
            return Err(RegionError::Dimension("point dimension".into()));
        }
        let num: Vec<f64> = x.iter().map(QValue::to_f64).collect();
        let mut total = 0;
        for k in integer_box(&self.translate_range(&num)) {
            let y: Vec<QValue> = x.iter().zip(&k).map(|(xi, &ki)| xi + &QValue::from_int(&self.alg, ki)).collect();
            total += self.count_exact(&y)?;
        }
        Ok(total)
    }

    /// Multiplicity of a numeric point known within `err`; `None` when some
    /// translate sits inside the guard band of a boundary.
    pub fn multiplicity_numeric(&self, x: &[f64], err: f64) -> Option<i64> {
        if self.dim == 1 {
            return self.pieces.iter().map(|p| p.count_translates_1d(x[0], err)).sum();
        }
        let mut total = 0;
        for k in integer_box(&self.translate_range(x)) {
            let y: Vec<f64> = x.iter().zip(&k).map(|(a, &b)| a + b as f64).collect();
            for p in &self.pieces {
                if p.contains_numeric(&y, err)? {
                    total += 1;
                }
            }
        }
        Some(total)
    }

    /// Multiplicity decided numerically when safe and exactly otherwise.
    pub fn multiplicity_certified(
        &self,
        num: &[f64],
        err: f64,
        exact: impl FnOnce() -> Result<Vec<QValue>, RegionError>,
    ) -> Result<i64, RegionError> {
        match self.multiplicity_numeric(num, err) {
            Some(m) => Ok(m),
            None => self.multiplicity(&exact()?),
        }
    }

    pub fn translated(&self, shift: &[QValue]) -> Result<RegionSet, RegionError> {
        let pieces = self.pieces.iter().map(|p| p.translated(shift)).collect::<Result<_, _>>()?;
        Self::new_unchecked(&self.alg, self.dim, pieces)
    }

    /// Image under a linear map.
    pub fn transformed(&self, m: &QMatrix) -> Result<RegionSet, RegionError> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(RegionError::Dimension("transform size".into()));
        }
        let pieces = self.pieces.iter().map(|p| p.transformed(m)).collect::<Result<_, _>>()?;
        Self::new_unchecked(&self.alg, self.dim, pieces)
    }

    /// Largest `|⟨x, β⟩|` over the region, attained at a corner.
    pub fn max_abs_dot(&self, beta: &[f64]) -> f64 {
        self.pieces
            .iter()
            .flat_map(Piece::corners)
            .map(|c| c.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Whether `other` lies inside this region (up to boundaries). A piece of
    /// `other` passes when it sits in the closure of a single piece here
    /// (exact for axis-aligned pairs, numeric with a guard otherwise), or,
    /// when everything is axis-aligned, when the union of pieces covers it.
    pub fn contains_region(&self, other: &RegionSet) -> Result<bool, RegionError> {
        let aligned = self.pieces.iter().all(Piece::is_axis_aligned);
        for q in &other.pieces {
            let mut inside = false;
            for p in &self.pieces {
                if piece_inside(q, p)? {
                    inside = true;
                    break;
                }
            }
            if !inside && !(aligned && q.is_axis_aligned() && self.covers_box(q)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact cover test for an axis-aligned piece: the piece is cut along
    /// every boundary of the (axis-aligned) pieces here and the centre of
    /// each cell is tested.
    fn covers_box(&self, q: &Piece) -> Result<bool, RegionError> {
        let d = self.dim;
        let half = BigRational::new(1.into(), 2.into());
        let mut cuts: Vec<Vec<QValue>> = Vec::with_capacity(d);
        for i in 0..d {
            let (lo, hi) = axis_interval(q, i)?;
            let mut c = vec![lo.clone(), hi.clone()];
            for p in &self.pieces {
                let (a, b) = axis_interval(p, i)?;
                for v in [a, b] {
                    if v.cmp_exact(&lo)? == Ordering::Greater && v.cmp_exact(&hi)? == Ordering::Less {
                        c.push(v);
                    }
                }
            }
            let mut err = None;
            c.sort_by(|x, y| {
                x.cmp_exact(y).unwrap_or_else(|e| {
                    err = Some(e);
                    Ordering::Equal
                })
            });
            if let Some(e) = err {
                return Err(e.into());
            }
            c.dedup();
            let mids: Vec<QValue> = c.windows(2).map(|w| (&w[0] + &w[1]).scale(&half)).collect();
            cuts.push(mids);
        }
        let ranges: Vec<(i64, i64)> = cuts.iter().map(|c| (0, c.len() as i64 - 1)).collect();
        for idx in integer_box(&ranges) {
            let x: Vec<QValue> = idx.iter().enumerate().map(|(i, &k)| cuts[i][k as usize].clone()).collect();
            if !self.contains_exact(&x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_text(&self) -> String {
        text::region_to_text(self)
    }

    /// Parses the `piece offset=.. edges=..` format. Lines starting with
    /// `basis`/`product` declare the algebra; otherwise `alg` is used.
    pub fn parse(text: &str, alg: &Algebra) -> Result<RegionSet, RegionError> {
        text::parse_region(text, alg)
    }
}

/// `q ⊂ closure(p)`, by checking the corners of `q` (both convex).
fn piece_inside(q: &Piece, p: &Piece) -> Result<bool, RegionError> {
    if q.is_axis_aligned() && p.is_axis_aligned() {
        for i in 0..q.dim() {
            let (q_lo, q_hi) = axis_interval(q, i)?;
            let (p_lo, p_hi) = axis_interval(p, i)?;
            if q_lo.cmp_exact(&p_lo)? == Ordering::Less || q_hi.cmp_exact(&p_hi)? == Ordering::Greater {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    for c in q.corners() {
        let t = &p.num_inv * (c - &p.num_offset);
        if t.iter().any(|&ti| ti < -GUARD || ti > 1.0 + GUARD) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All integer vectors in a box given by inclusive per-axis ranges.
pub(crate) fn integer_box(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(a, b) in ranges {
        let mut next = Vec::new();
        for prefix in &out {
            for k in a..=b {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Multiplicity of `x` for the region, `volume` and point free helper.
pub fn volume(s: &RegionSet) -> Result<QValue, RegionError> {
    s.volume()
}

pub fn multiplicity(s: &RegionSet, x: &[QValue]) -> Result<i64, RegionError> {
    s.multiplicity(x)
}

pub(crate) fn bigint_to_i64(n: &BigInt) -> Result<i64, RegionError> {
    n.to_i64().ok_or_else(|| RegionError::Precondition("integer out of range".into()))
}
