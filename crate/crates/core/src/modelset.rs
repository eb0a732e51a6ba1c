//! Point sets: cut-and-project sets `Λ(Γ, I)`, the dual sets `Λ*`, the
//! sequences `λ(m) = m + {αᵀm}β`, periodic sets and their duals, plus density
//! and separation measurements.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::algebra::{AlgebraError, QMatrix, QValue};
use crate::lattice::{Lattice, LatticeError, SpecialFormData};
use crate::regions::{RegionError, RegionSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelSetError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("empty search box")]
    EmptySearch,
    #[error("invalid window: {0}")]
    Window(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point set file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// The lattice point behind a generated point. For `Λ(Γ, I)` these are the
/// coordinates in the lattice basis; for `Λ*` the pair with `nα + m ∈ S`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub n: i64,
    pub m: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<QValue>>>,
    provenance: Vec<Provenance>,
    range: String,
}

impl PointSet {
    pub fn new(
        dim: usize,
        points: Vec<Vec<f64>>,
        exact: Option<Vec<Vec<QValue>>>,
        provenance: Vec<Provenance>,
        range: impl Into<String>,
    ) -> Result<Self, ModelSetError> {
        if points.iter().any(|p| p.len() != dim) {
            return Err(ModelSetError::Dimension(format!("points must have {dim} coordinates")));
        }
        if !provenance.is_empty() && provenance.len() != points.len() {
            return Err(ModelSetError::Dimension("one provenance entry per point".into()));
        }
        if let Some(e) = &exact {
            if e.len() != points.len() || e.iter().any(|p| p.len() != dim) {
                return Err(ModelSetError::Dimension("exact coordinates do not match".into()));
            }
        }
        Ok(PointSet { dim, points, exact, provenance, range: range.into() })
    }

    /// One-dimensional set from plain values, without provenance.
    pub fn from_values(values: &[f64], range: impl Into<String>) -> Self {
        PointSet {
            dim: 1,
            points: values.iter().map(|&x| vec![x]).collect(),
            exact: None,
            provenance: Vec::new(),
            range: range.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn exact(&self) -> Option<&[Vec<QValue>]> {
        self.exact.as_deref()
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn has_provenance(&self) -> bool {
        !self.provenance.is_empty()
    }

    /// Description of the generation window.
    pub fn range(&self) -> &str {
        &self.range
    }

    /// First coordinates, for one-dimensional sets.
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    fn permuted(&self, order: &[usize]) -> PointSet {
        PointSet {
            dim: self.dim,
            points: order.iter().map(|&i| self.points[i].clone()).collect(),
            exact: self.exact.as_ref().map(|e| order.iter().map(|&i| e[i].clone()).collect()),
            provenance: if self.provenance.is_empty() {
                Vec::new()
            } else {
                order.iter().map(|&i| self.provenance[i].clone()).collect()
            },
            range: self.range.clone(),
        }
    }

    /// Reordered lexicographically by provenance `(n, m)`.
    pub fn sorted_by_provenance(&self) -> PointSet {
        let mut order: Vec<usize> = (0..self.len()).collect();
        if !self.provenance.is_empty() {
            order.sort_by(|&a, &b| self.provenance[a].cmp(&self.provenance[b]));
        }
        self.permuted(&order)
    }

    /// Reordered lexicographically by coordinates.
    pub fn sorted_by_value(&self) -> PointSet {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.points[a]
                .iter()
                .zip(&self.points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.cmp(&b))
        });
        self.permuted(&order)
    }

    /// Points inside the closed box `[-r, r]^d`.
    pub fn truncated(&self, r: f64) -> PointSet {
        let order: Vec<usize> =
            (0..self.len()).filter(|&i| self.points[i].iter().all(|x| x.abs() <= r)).collect();
        let mut out = self.permuted(&order);
        out.range = format!("{} within [-{r}, {r}]", self.range);
        out
    }

    /// Image under `x ↦ A x`.
    pub fn transformed(&self, a: &QMatrix) -> Result<PointSet, AlgebraError> {
        let an = a.to_f64();
        let points = self
            .points
            .iter()
            .map(|p| {
                let v = &an * nalgebra::DVector::from_column_slice(p);
                v.iter().copied().collect()
            })
            .collect();
        let exact = match &self.exact {
            Some(e) => Some(e.iter().map(|p| a.mul_vec(p)).collect::<Result<Vec<_>, _>>()?),
            None => None,
        };
        Ok(PointSet { dim: self.dim, points, exact, provenance: self.provenance.clone(), range: self.range.clone() })
    }

    /// Every point moved by `t`.
    pub fn shifted(&self, t: &[f64]) -> PointSet {
        let points = self.points.iter().map(|p| p.iter().zip(t).map(|(x, s)| x + s).collect()).collect();
        PointSet { dim: self.dim, points, exact: None, provenance: self.provenance.clone(), range: self.range.clone() }
    }

    /// CSV with a `# quasilab pointset v1 dim=<d>` header and rows
    /// `x1,..,xd,m..,n` at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# quasilab pointset v1 dim={}\n# range {}\n", self.dim, self.range);
        for (i, p) in self.points.iter().enumerate() {
            let mut fields: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
            if let Some(pr) = self.provenance.get(i) {
                fields.extend(pr.m.iter().map(ToString::to_string));
                fields.push(pr.n.to_string());
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<PointSet, ModelSetError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ModelSetError::Parse { line: 1, msg: "empty file".into() })?;
        let dim: usize = header
            .strip_prefix("# quasilab pointset v1 dim=")
            .and_then(|d| d.trim().parse().ok())
            .ok_or(ModelSetError::Parse { line: 1, msg: "missing `# quasilab pointset v1 dim=<d>` header".into() })?;
        let (mut points, mut provenance, mut range) = (Vec::new(), Vec::new(), String::new());
        for (i, line) in lines {
            let line = line.trim();
            if let Some(r) = line.strip_prefix("# range ") {
                range = r.to_string();
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| ModelSetError::Parse { line: i + 1, msg: msg.into() };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < dim {
                return Err(err("too few columns"));
            }
            let p: Vec<f64> = fields[..dim].iter().map(|f| f.parse()).collect::<Result<_, _>>().map_err(|_| err("bad coordinate"))?;
            points.push(p);
            if fields.len() > dim {
                let ints: Vec<i64> =
                    fields[dim..].iter().map(|f| f.parse()).collect::<Result<_, _>>().map_err(|_| err("bad provenance"))?;
                let (n, m) = ints.split_last().expect("non-empty");
                provenance.push(Provenance { n: *n, m: m.to_vec() });
            }
        }
        if !provenance.is_empty() && provenance.len() != points.len() {
            return Err(ModelSetError::Parse { line: 0, msg: "provenance on some rows only".into() });
        }
        PointSet::new(dim, points, None, provenance, range)
    }
}

/// Integer search ranges for the lattice coordinates. When `last` is absent,
/// the last coordinate is solved from the window for each choice of the others.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchBox {
    pub ranges: Vec<(i64, i64)>,
    pub last: Option<(i64, i64)>,
}

impl SearchBox {
    /// `[-r, r]` in the first `d` coordinates, last coordinate solved.
    pub fn symmetric(d: usize, r: i64) -> Self {
        SearchBox { ranges: vec![(-r, r); d], last: None }
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.ranges.iter().map(|(a, b)| format!("[{a},{b}]")).collect();
        match self.last {
            Some((a, b)) => format!("m in {} n in [{a},{b}]", parts.join("x")),
            None => format!("m in {} n solved", parts.join("x")),
        }
    }
}

fn check_window(window: &RegionSet) -> Result<(), ModelSetError> {
    if window.dim() != 1 {
        return Err(ModelSetError::Window("windows are one-dimensional".into()));
    }
    if window.is_empty() {
        return Err(ModelSetError::Window("empty window".into()));
    }
    Ok(())
}

pub(crate) fn integer_box(ranges: &[(i64, i64)]) -> impl Iterator<Item = Vec<i64>> + '_ {
    let total: u128 = ranges.iter().map(|(a, b)| (b - a + 1).max(0) as u128).product();
    (0..total).map(move |mut idx| {
        let mut out = vec![0; ranges.len()];
        for i in (0..ranges.len()).rev() {
            let (a, b) = ranges[i];
            let w = (b - a + 1) as u128;
            out[i] = a + (idx % w) as i64;
            idx /= w;
        }
        out
    })
}

fn qvec_f64(v: &[QValue]) -> Vec<f64> {
    v.iter().map(QValue::to_f64).collect()
}

/// `Λ(Γ, I) = {p1(γ) : γ ∈ Γ, p2(γ) ∈ I}` restricted to the search box.
/// Window membership is decided exactly.
pub fn cut_and_project(gamma: &Lattice, window: &RegionSet, search: &SearchBox) -> Result<PointSet, ModelSetError> {
    check_window(window)?;
    let d = gamma.dim_d();
    if search.ranges.len() != d {
        return Err(ModelSetError::Dimension(format!("search box needs {d} ranges")));
    }
    if search.ranges.iter().chain(search.last.iter()).any(|(a, b)| a > b) {
        return Err(ModelSetError::EmptySearch);
    }
    let alg = gamma.algebra();
    let b = gamma.basis();
    let e = b.get(d, d).clone();
    if search.last.is_none() && e.is_zero() {
        return Err(ModelSetError::Dimension("the last coordinate cannot be solved from the window; give its range".into()));
    }
    let e_num = e.to_f64();
    let pieces: Vec<(f64, f64)> = window.pieces().iter().map(|p| (p.bbox().0[0], p.bbox().1[0])).collect();

    let mut points = Vec::new();
    let mut exact = Vec::new();
    let mut provenance = Vec::new();
    for m in integer_box(&search.ranges) {
        // internal coordinate without the last generator
        let c = (0..d).fold(QValue::zero(alg), |acc, i| acc + b.get(d, i).scale_int(m[i]));
        let candidates: Vec<i64> = match search.last {
            Some((lo, hi)) => (lo..=hi).collect(),
            None => {
                let cn = c.to_f64();
                let mut ns = Vec::new();
                for &(lo, hi) in &pieces {
                    let (x, y) = ((lo - cn) / e_num, (hi - cn) / e_num);
                    let (x, y) = (x.min(y), x.max(y));
                    ns.extend((x.floor() as i64 - 1)..=(y.ceil() as i64 + 1));
                }
                ns.sort_unstable();
                ns.dedup();
                ns
            }
        };
        for n in candidates {
            let p2 = &c + &e.scale_int(n);
            if window.contains_exact(std::slice::from_ref(&p2))? {
                let mut k = m.clone();
                k.push(n);
                let full = gamma.point(&k)?;
                let p1 = full[..d].to_vec();
                points.push(qvec_f64(&p1));
                exact.push(p1);
                provenance.push(Provenance { n, m: m.clone() });
            }
        }
    }
    let set = PointSet::new(d, points, Some(exact), provenance, search.describe())?;
    Ok(set.sorted_by_provenance())
}

/// `Λ* = {n + ⟨nα + m, β⟩ : nα + m ∈ S}` for `n` in the range, with
/// provenance `(n, m)`; the blocks `Λ_n` are the points sharing `n`.
pub fn dual_model_points(
    alpha: &[QValue],
    beta: &[QValue],
    s: &RegionSet,
    n_range: (i64, i64),
) -> Result<PointSet, ModelSetError> {
    let d = alpha.len();
    if beta.len() != d || s.dim() != d || d == 0 {
        return Err(ModelSetError::Dimension("alpha, beta and S must share a dimension".into()));
    }
    if s.is_empty() {
        return Err(ModelSetError::Window("S is empty".into()));
    }
    if n_range.0 > n_range.1 {
        return Err(ModelSetError::EmptySearch);
    }
    let alg = alpha[0].algebra();
    let a_num = qvec_f64(alpha);
    let b_num = qvec_f64(beta);
    let a_err: f64 = alpha.iter().map(QValue::error_bound).fold(0.0, f64::max);
    let mut points = Vec::new();
    let mut exact = Vec::new();
    let mut provenance = Vec::new();
    for n in n_range.0..=n_range.1 {
        let base: Vec<f64> = a_num.iter().map(|a| n as f64 * a).collect();
        let err = (n as f64).abs() * (a_err + f64::EPSILON * 2.0) + 1e-15;
        let mut hits: Vec<Vec<i64>> = Vec::new();
        for piece in s.pieces() {
            let (lo, hi) = piece.bbox();
            let ranges: Vec<(i64, i64)> = (0..d)
                .map(|i| ((lo[i] - base[i] - 1e-6).ceil() as i64, (hi[i] - base[i] + 1e-6).floor() as i64))
                .collect();
            for m in integer_box(&ranges) {
                let x: Vec<f64> = base.iter().zip(&m).map(|(b, &mi)| b + mi as f64).collect();
                let exact_point = || -> Result<Vec<QValue>, RegionError> {
                    Ok(alpha.iter().zip(&m).map(|(a, &mi)| a.scale_int(n) + QValue::from_int(alg, mi)).collect())
                };
                if piece.contains_certified(&x, err, exact_point)? {
                    hits.push(m);
                }
            }
        }
        hits.sort();
        hits.dedup();
        for m in hits {
            let v: Vec<QValue> = alpha.iter().zip(&m).map(|(a, &mi)| a.scale_int(n) + QValue::from_int(alg, mi)).collect();
            let value = v.iter().zip(beta).fold(QValue::from_int(alg, n), |acc, (x, b)| acc + x * b);
            let approx = n as f64
                + (0..d).map(|i| (n as f64 * a_num[i] + m[i] as f64) * b_num[i]).sum::<f64>();
            // the exact value is authoritative; the sum above only guards against drift
            let val = value.to_f64();
            debug_assert!((val - approx).abs() < 1e-6 * (1.0 + approx.abs()));
            points.push(vec![val]);
            exact.push(vec![value]);
            provenance.push(Provenance { n, m });
        }
    }
    let set = PointSet::new(1, points, Some(exact), provenance, format!("n in [{},{}]", n_range.0, n_range.1))?;
    Ok(set.sorted_by_provenance())
}

/// `λ(m) = m + {αᵀm}β` over the box, with provenance `(⌊αᵀm⌋, m)`.
pub fn sequence_points(alpha: &[QValue], beta: &[QValue], m_box: &[(i64, i64)]) -> Result<PointSet, ModelSetError> {
    SpecialFormData::new(alpha.to_vec(), beta.to_vec())?;
    let d = alpha.len();
    if m_box.len() != d {
        return Err(ModelSetError::Dimension(format!("box needs {d} ranges")));
    }
    if m_box.iter().any(|(a, b)| a > b) {
        return Err(ModelSetError::EmptySearch);
    }
    let alg = alpha[0].algebra();
    let mut points = Vec::new();
    let mut exact = Vec::new();
    let mut provenance = Vec::new();
    for m in integer_box(m_box) {
        let dot = alpha.iter().zip(&m).fold(QValue::zero(alg), |acc, (a, &mi)| acc + a.scale_int(mi));
        let n = dot.floor()?;
        let frac = &dot - &QValue::from_bigint(alg, n.clone());
        let p: Vec<QValue> = m.iter().zip(beta).map(|(&mi, b)| QValue::from_int(alg, mi) + &frac * b).collect();
        points.push(qvec_f64(&p));
        exact.push(p);
        let n: i64 = n.try_into().map_err(|_| ModelSetError::Dimension("integer part out of range".into()))?;
        provenance.push(Provenance { n, m });
    }
    let range = format!("m in {:?}", m_box);
    let set = PointSet::new(d, points, Some(exact), provenance, range)?;
    Ok(set.sorted_by_provenance())
}

/// Numeric `⟨n, α⟩` with an error bound.
fn dot_with_error(alpha: &[QValue], a_num: &[f64], n: &[i64]) -> (f64, f64) {
    let mut x = 0.0;
    let mut err = 0.0;
    for ((a, an), &k) in alpha.iter().zip(a_num).zip(n) {
        let t = k as f64 * an;
        x += t;
        err += (k as f64).abs() * a.error_bound() + t.abs() * f64::EPSILON;
    }
    (x, err + x.abs() * f64::EPSILON * (alpha.len() as f64))
}

fn check_circle_interval(i: &RegionSet) -> Result<(), ModelSetError> {
    check_window(i)?;
    let len = i.volume()?;
    let alg = i.algebra();
    if len.signum()? != Ordering::Greater || len.cmp_exact(&QValue::one(alg))? != Ordering::Less {
        return Err(ModelSetError::Window(format!("interval length {len} is not in (0, 1)")));
    }
    Ok(())
}

/// `{n ∈ Z^d : ⟨n, α⟩ mod 1 ∈ I}` over the box. Each point carries
/// provenance `(k, n)` with `⟨n, α⟩ + k ∈ I`.
pub fn periodic_points(alpha: &[QValue], i: &RegionSet, n_box: &[(i64, i64)]) -> Result<PointSet, ModelSetError> {
    check_circle_interval(i)?;
    if n_box.len() != alpha.len() {
        return Err(ModelSetError::Dimension("box and alpha lengths differ".into()));
    }
    if n_box.iter().any(|(a, b)| a > b) {
        return Err(ModelSetError::EmptySearch);
    }
    let alg = i.algebra();
    let a_num = qvec_f64(alpha);
    let d = alpha.len();
    let mut points = Vec::new();
    let mut provenance = Vec::new();
    for n in integer_box(n_box) {
        let (x, err) = dot_with_error(alpha, &a_num, &n);
        let exact = || Ok(vec![alpha.iter().zip(&n).fold(QValue::zero(alg), |acc, (a, &k)| acc + a.scale_int(k))]);
        if i.multiplicity_certified(&[x], err, exact)? > 0 {
            let k = translate_into(i, x);
            points.push(n.iter().map(|&v| v as f64).collect());
            provenance.push(Provenance { n: k, m: n });
        }
    }
    PointSet::new(d, points, None, provenance, format!("n in {:?}", n_box))
}

/// `{m ∈ Z : −mα ∈ S}` with `S` read on the torus through its multiplicity.
pub fn periodic_dual(alpha: &[QValue], s: &RegionSet, m_range: (i64, i64)) -> Result<PointSet, ModelSetError> {
    let d = alpha.len();
    if s.dim() != d {
        return Err(ModelSetError::Dimension("S and alpha dimensions differ".into()));
    }
    if m_range.0 > m_range.1 {
        return Err(ModelSetError::EmptySearch);
    }
    let a_num = qvec_f64(alpha);
    let a_err: f64 = alpha.iter().map(QValue::error_bound).fold(0.0, f64::max);
    let mut points = Vec::new();
    let mut provenance = Vec::new();
    for m in m_range.0..=m_range.1 {
        let x: Vec<f64> = a_num.iter().map(|a| -(m as f64) * a).collect();
        let err = (m as f64).abs() * (a_err + 2.0 * f64::EPSILON * a_num.iter().fold(0.0f64, |t, a| t.max(a.abs()))) + 1e-15;
        let exact = || Ok(alpha.iter().map(|a| a.scale_int(-m)).collect());
        let mult = s.multiplicity_certified(&x, err, exact)?;
        if mult > 0 {
            points.push(vec![m as f64]);
            provenance.push(Provenance { n: m, m: vec![mult] });
        }
    }
    PointSet::new(1, points, None, provenance, format!("m in [{},{}]", m_range.0, m_range.1))
}

/// An integer `k` with `x + k` in the bounding box of the interval.
fn translate_into(i: &RegionSet, x: f64) -> i64 {
    let (lo, _) = i.bbox().expect("non-empty");
    (lo[0] - x).ceil() as i64
}

/// Beurling density estimates for one radius.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DensityEstimate {
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub windows: usize,
}

/// Smallest and largest number of points in translated windows `[s, s + 2R)^d`
/// lying inside the generated range, divided by the window volume.
pub fn density_estimate(p: &PointSet, radii: &[f64]) -> Result<Vec<DensityEstimate>, ModelSetError> {
    if p.is_empty() {
        return Err(ModelSetError::Window("empty point set".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModelSetError::Window("radii must increase".into()));
    }
    if p.dim() == 1 {
        let mut xs = p.values();
        xs.sort_by(f64::total_cmp);
        return Ok(radii.iter().map(|&r| density_1d(&xs, r)).collect());
    }
    Ok(radii.iter().map(|&r| density_grid(p, r)).collect())
}

fn density_1d(xs: &[f64], r: f64) -> DensityEstimate {
    let len = 2.0 * r;
    let last = xs[xs.len() - 1];
    let (mut lower, mut upper, mut windows) = (usize::MAX, 0usize, 0usize);
    // the count in [s, s + L) only changes when s or s + L crosses a point,
    // so windows starting at a point (sup) or just after one (inf) suffice
    let mut hi = 0;
    let mut hi_closed = 0;
    for i in 0..xs.len() {
        if xs[i] + len > last {
            break;
        }
        while hi < xs.len() && xs[hi] < xs[i] + len {
            hi += 1;
        }
        while hi_closed < xs.len() && xs[hi_closed] <= xs[i] + len {
            hi_closed += 1;
        }
        upper = upper.max(hi - i);
        let mut j = i + 1;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        lower = lower.min(hi_closed - j);
        windows += 1;
    }
    if windows == 0 {
        let n = xs.len();
        return DensityEstimate { radius: r, lower: n as f64 / len, upper: n as f64 / len, windows: 0 };
    }
    DensityEstimate { radius: r, lower: lower as f64 / len, upper: upper as f64 / len, windows }
}

fn density_grid(p: &PointSet, r: f64) -> DensityEstimate {
    let d = p.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for x in p.points() {
        for i in 0..d {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    let side = 2.0 * r;
    let step = r / 2.0;
    let steps: Vec<(i64, i64)> = (0..d).map(|i| (0, ((hi[i] - lo[i] - side) / step).floor().max(-1.0) as i64)).collect();
    let vol = side.powi(d as i32);
    let (mut lower, mut upper, mut windows) = (f64::INFINITY, 0.0f64, 0usize);
    for k in integer_box(&steps) {
        let start: Vec<f64> = (0..d).map(|i| lo[i] + k[i] as f64 * step).collect();
        let count = p
            .points()
            .iter()
            .filter(|x| (0..d).all(|i| x[i] >= start[i] && x[i] < start[i] + side))
            .count() as f64;
        lower = lower.min(count / vol);
        upper = upper.max(count / vol);
        windows += 1;
    }
    if windows == 0 {
        let c = p.len() as f64 / vol;
        return DensityEstimate { radius: r, lower: c, upper: c, windows: 0 };
    }
    DensityEstimate { radius: r, lower, upper, windows }
}

/// Smallest distance between two distinct points (Euclidean); infinite for
/// fewer than two points.
pub fn separation(p: &PointSet) -> f64 {
    let mut pts: Vec<&Vec<f64>> = p.points().iter().collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = pts[j][0] - pts[i][0];
            if dx >= best {
                break;
            }
            let dist = pts[i].iter().zip(pts[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            best = best.min(dist);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Algebra, AlgebraSpec};
    use crate::lattice::make_special_lattice;
    use proptest::prelude::*;

    fn q(alg: &Algebra, s: &str) -> QValue {
        QValue::parse(alg, s).unwrap()
    }

    fn sqrt2() -> Algebra {
        AlgebraSpec::quadratic(2).unwrap()
    }

    #[test]
    fn example_quasicrystal() {
        let alg = sqrt2();
        let s = make_special_lattice(&[q(&alg, "w1")], &[q(&alg, "1")]).unwrap();
        let window = RegionSet::interval_left_open(&q(&alg, "-1"), &q(&alg, "0")).unwrap();
        let p = cut_and_project(&s.gamma, &window, &SearchBox::symmetric(1, 3)).unwrap();
        let expected = [-3.0 + 0.757359312881, -2.0 + 0.171572875254, -1.0 + 0.585786437627, 0.0, 1.414213562373, 2.828427124746, 3.242640687119];
        let mut got = p.values();
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), 7);
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-9, "{g} vs {e}");
        }
    }

    #[test]
    fn window_endpoint_convention() {
        let alg = sqrt2();
        let s = make_special_lattice(&[q(&alg, "w1")], &[q(&alg, "1")]).unwrap();
        // m = 0, n = 0 has p2 = 0: in (-1, 0], not in [-1, 0)
        let closed_right = RegionSet::interval_left_open(&q(&alg, "-1"), &q(&alg, "0")).unwrap();
        let open_right = RegionSet::interval(&q(&alg, "-1"), &q(&alg, "0")).unwrap();
        let b = SearchBox { ranges: vec![(0, 0)], last: Some((-2, 2)) };
        assert_eq!(cut_and_project(&s.gamma, &closed_right, &b).unwrap().len(), 1);
        assert_eq!(cut_and_project(&s.gamma, &open_right, &b).unwrap().len(), 1);
        let pr = cut_and_project(&s.gamma, &open_right, &b).unwrap().provenance()[0].clone();
        assert_eq!(pr, Provenance { n: -1, m: vec![0] });
        assert!(matches!(
            cut_and_project(&s.gamma, &open_right, &SearchBox { ranges: vec![(1, 0)], last: None }),
            Err(ModelSetError::EmptySearch)
        ));
    }

    #[test]
    fn long_window_count() {
        let alg = sqrt2();
        let s = make_special_lattice(&[q(&alg, "w1")], &[q(&alg, "1")]).unwrap();
        let window = RegionSet::interval(&q(&alg, "0"), &q(&alg, "5/2")).unwrap();
        let p = cut_and_project(&s.gamma, &window, &SearchBox::symmetric(1, 500)).unwrap();
        let expected = 2.5 * 1001.0;
        assert!((p.len() as f64 - expected).abs() < 10.0, "{}", p.len());
    }

    #[test]
    fn dual_points_scan() {
        let alg = sqrt2();
        let s = RegionSet::interval(&q(&alg, "0"), &q(&alg, "w1 - 1")).unwrap();
        let p = dual_model_points(&[q(&alg, "w1")], &[q(&alg, "1")], &s, (0, 5)).unwrap();
        let v = p.values();
        let expected = [0.0, 3.0 + 0.242640687119, 5.0 + 0.071067811865];
        assert_eq!(v.len(), 3);
        for (g, e) in v.iter().zip(expected) {
            assert!((g - e).abs() < 1e-9);
        }
        assert!(p.provenance().iter().all(|pr| pr.n != 2));
        let zero_beta = dual_model_points(&[q(&alg, "w1")], &[q(&alg, "0")], &s, (-20, 20)).unwrap();
        assert!(zero_beta.values().iter().all(|x| x.fract() == 0.0));
    }

    #[test]
    fn sequence_examples() {
        let alg = sqrt2();
        let p = sequence_points(&[q(&alg, "w1")], &[q(&alg, "1")], &[(0, 3)]).unwrap();
        assert!((p.values()[3] - 3.2426406871).abs() < 1e-9);
        assert_eq!(p.values()[0], 0.0);

        let bq = AlgebraSpec::biquadratic(2, 3).unwrap();
        let ab = [q(&bq, "w1"), q(&bq, "w2")];
        let p = sequence_points(&ab, &ab, &[(1, 1), (0, 0)]).unwrap();
        assert!((p.points()[0][0] - 1.5857864376).abs() < 1e-9);
        assert!((p.points()[0][1] - 0.7174389352).abs() < 1e-9);
    }

    #[test]
    fn periodic_scan() {
        let alg = sqrt2();
        let i = RegionSet::interval(&q(&alg, "0"), &q(&alg, "w1 - 1")).unwrap();
        let p = periodic_points(&[q(&alg, "w1")], &i, &[(0, 2)]).unwrap();
        // {sqrt 2} is exactly the open endpoint, so only n = 0 survives
        assert_eq!(p.values(), vec![0.0]);
        let full = RegionSet::interval(&q(&alg, "0"), &q(&alg, "999/1000")).unwrap();
        assert!(periodic_points(&[q(&alg, "w1")], &full, &[(-5, 5)]).unwrap().len() >= 10);
        let too_long = RegionSet::interval(&q(&alg, "0"), &q(&alg, "1")).unwrap();
        assert!(periodic_points(&[q(&alg, "w1")], &too_long, &[(0, 2)]).is_err());
    }

    #[test]
    fn periodic_dual_scan() {
        let alg = sqrt2();
        let s = RegionSet::interval(&q(&alg, "0"), &q(&alg, "1/2")).unwrap();
        let p = periodic_dual(&[q(&alg, "w1")], &s, (-3, 3)).unwrap();
        let expected: Vec<f64> = (-3i64..=3)
            .filter(|&m| (-(m as f64) * 2f64.sqrt()).rem_euclid(1.0) < 0.5)
            .map(|m| m as f64)
            .collect();
        assert_eq!(p.values(), expected);
    }

    #[test]
    fn integers_density_and_separation() {
        let z = PointSet::from_values(&(-100..=100).map(f64::from).collect::<Vec<_>>(), "Z");
        for e in density_estimate(&z, &[2.5, 10.0]).unwrap() {
            assert!((e.lower - 1.0).abs() < 1e-12 && (e.upper - 1.0).abs() < 1e-12, "{e:?}");
        }
        assert_eq!(separation(&z), 1.0);
    }

    #[test]
    fn example_density_and_separation() {
        let alg = sqrt2();
        let p = sequence_points(&[q(&alg, "w1")], &[q(&alg, "1")], &[(-1500, 1500)]).unwrap();
        let e = &density_estimate(&p, &[500.0]).unwrap()[0];
        assert!((e.lower - 1.0).abs() < 0.02 && (e.upper - 1.0).abs() < 0.02, "{e:?}");
        assert!((separation(&p) - (2f64.sqrt() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let alg = sqrt2();
        let p = sequence_points(&[q(&alg, "w1")], &[q(&alg, "1")], &[(-3, 3)]).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("# quasilab pointset v1 dim=1\n"));
        let back = PointSet::from_csv(&csv).unwrap();
        assert_eq!(back.points(), p.points());
        assert_eq!(back.provenance(), p.provenance());
    }

    proptest! {
        #[test]
        fn cut_and_project_matches_sequence(lo in -40i64..0, width in 0i64..40, b in 1i64..3) {
            let alg = sqrt2();
            let alpha = [q(&alg, "w1")];
            let beta = [QValue::from_int(&alg, b)];
            let s = make_special_lattice(&alpha, &beta).unwrap();
            let window = RegionSet::interval_left_open(&q(&alg, "-1"), &q(&alg, "0")).unwrap();
            let cp = cut_and_project(&s.gamma, &window, &SearchBox { ranges: vec![(lo, lo + width)], last: None }).unwrap();
            let seq = sequence_points(&alpha, &beta, &[(lo, lo + width)]).unwrap();
            prop_assert_eq!(cp.exact().unwrap(), seq.exact().unwrap());
            prop_assert_eq!(cp.provenance(), seq.provenance());
        }

        #[test]
        fn provenance_resubstitutes(lo in -30i64..30) {
            let alg = sqrt2();
            let alpha = [q(&alg, "w1")];
            let beta = [q(&alg, "1/2")];
            let s = RegionSet::interval(&q(&alg, "0"), &q(&alg, "w1 - 1")).unwrap();
            let p = dual_model_points(&alpha, &beta, &s, (lo, lo + 20)).unwrap();
            let r = s.max_abs_dot(&[0.5]);
            for (pt, pr) in p.exact().unwrap().iter().zip(p.provenance()) {
                let v = alpha[0].scale_int(pr.n) + QValue::from_int(&alg, pr.m[0]);
                prop_assert!(s.contains_exact(std::slice::from_ref(&v)).unwrap());
                let again = QValue::from_int(&alg, pr.n) + &v * &beta[0];
                prop_assert_eq!(&pt[0], &again);
                prop_assert!((pt[0].to_f64() - pr.n as f64).abs() <= r + 1e-12);
            }
        }
    }
}
