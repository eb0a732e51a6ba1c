//! Enumeration of dual model sets by blocks, the perturbations `δ_j`,
//! Avdonin's averaged condition, Gram matrices of finite exponential
//! systems and their extreme eigenvalues.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{AlgebraError, QValue};
use crate::dynamics::{brs_empirical, BrsStatistic, DynamicsError};
use crate::lattice::{make_special_lattice, LatticeError};
use crate::modelset::{cut_and_project, dual_model_points, separation, ModelSetError, PointSet, SearchBox};
use crate::regions::{ft_indicator, RegionError, RegionSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RieszError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    ModelSet(#[from] ModelSetError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("point set has no block provenance")]
    Provenance,
    #[error("invalid range: {0}")]
    Range(String),
    #[error("sequence is not separated (min gap {0})")]
    NotSeparated(f64),
    #[error("matrix is not Hermitian at ({0}, {1})")]
    NonHermitian(usize, usize),
    #[error("truncation monotonicity violated: {0}")]
    Monotonicity(String),
}

pub const TIE_BREAK: &str = "blocks ascending by value, s_0 anchored, lambda_0 first element of Lambda_0";

/// `{λ_j}` listed block by block: `Λ_n = {λ_j : s_n ≤ j < s_{n+1}}`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Enumeration {
    pub j_start: i64,
    pub lambda: Vec<f64>,
    #[serde(skip)]
    pub exact: Option<Vec<QValue>>,
    pub block: Vec<i64>,
    pub rank: Vec<usize>,
    /// `s_n` for `n` in `[n_start, n_start + s.len())`.
    pub n_start: i64,
    pub s: Vec<i64>,
}

impl Enumeration {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn j_end(&self) -> i64 {
        self.j_start + self.lambda.len() as i64 - 1
    }

    pub fn lambda_at(&self, j: i64) -> Option<f64> {
        let i = j.checked_sub(self.j_start)?;
        if i < 0 {
            return None;
        }
        self.lambda.get(i as usize).copied()
    }

    pub fn s_at(&self, n: i64) -> Option<i64> {
        let i = n.checked_sub(self.n_start)?;
        if i < 0 {
            return None;
        }
        self.s.get(i as usize).copied()
    }
}

/// Enumerates a point set with block provenance `n`. Blocks span the
/// provenance range; within a block points are ascending, and `s_0` is the
/// anchor.
pub fn enumerate_blocks(p: &PointSet, s0_anchor: i64) -> Result<Enumeration, RieszError> {
    if p.dim() != 1 {
        return Err(RieszError::Range("enumeration needs a 1-D point set".into()));
    }
    if !p.has_provenance() {
        return Err(RieszError::Provenance);
    }
    let mut blocks: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, q) in p.provenance().iter().enumerate() {
        blocks.entry(q.n).or_default().push(i);
    }
    let (n_lo, n_hi) = match (blocks.keys().next(), blocks.keys().next_back()) {
        (Some(&a), Some(&b)) => (a.min(0), b.max(0)),
        _ => return Err(RieszError::Range("empty point set".into())),
    };
    let vals = p.values();
    let exact = p.exact();
    // s_{n+1} − s_n = #Λ_n, with s_0 fixed
    let sizes: Vec<i64> = (n_lo..=n_hi).map(|n| blocks.get(&n).map_or(0, |b| b.len() as i64)).collect();
    let mut s = vec![0i64; sizes.len() + 1];
    for i in 0..sizes.len() {
        s[i + 1] = s[i] + sizes[i];
    }
    let shift = s0_anchor - s[(0 - n_lo) as usize];
    for v in &mut s {
        *v += shift;
    }
    let mut lambda = Vec::with_capacity(p.len());
    let mut ex = exact.map(|_| Vec::with_capacity(p.len()));
    let mut block = Vec::with_capacity(p.len());
    let mut rank = Vec::with_capacity(p.len());
    for (n, idx) in &blocks {
        let mut idx = idx.clone();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        for (r, &i) in idx.iter().enumerate() {
            lambda.push(vals[i]);
            if let (Some(out), Some(e)) = (ex.as_mut(), exact) {
                out.push(e[i][0].clone());
            }
            block.push(*n);
            rank.push(r);
        }
    }
    Ok(Enumeration { j_start: s[0], lambda, exact: ex, block, rank, n_start: n_lo, s })
}

/// `δ_j = λ_j − j/mes S`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DeltaSequence {
    pub j_start: i64,
    pub delta: Vec<f64>,
    pub mes: f64,
}

impl DeltaSequence {
    pub fn from_values(j_start: i64, delta: Vec<f64>, mes: f64) -> Self {
        DeltaSequence { j_start, delta, mes }
    }

    pub fn j_end(&self) -> i64 {
        self.j_start + self.delta.len() as i64 - 1
    }

    /// `λ_j = δ_j + j/mes S`.
    pub fn lambda(&self) -> Vec<f64> {
        self.delta.iter().enumerate().map(|(i, d)| d + (self.j_start + i as i64) as f64 / self.mes).collect()
    }

    pub fn sup_abs(&self) -> f64 {
        self.delta.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MeansRow {
    pub n: usize,
    pub sup_dev: f64,
    pub argmax_k: i64,
}

/// `sup_k |(1/N) Σ_{j=k+1}^{k+N} δ_j − ĉ|` per window length, with `ĉ` the
/// mean of `δ` over the whole enumeration.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MeansTable {
    pub c_hat: f64,
    pub k_range: (i64, i64),
    pub rows: Vec<MeansRow>,
}

pub fn delta_sequence(e: &Enumeration, mes: &QValue) -> Result<DeltaSequence, RieszError> {
    let m = mes.to_f64();
    if !(m > 0.0) {
        return Err(RieszError::Range("mes S must be positive".into()));
    }
    let delta = match &e.exact {
        // exact subtraction keeps large j free of cancellation
        Some(ex) => {
            let inv = mes.inverse()?;
            ex.iter()
                .enumerate()
                .map(|(i, l)| {
                    let j = QValue::from_int(mes.algebra(), e.j_start + i as i64);
                    Ok((l - &(&j * &inv)).to_f64())
                })
                .collect::<Result<Vec<f64>, AlgebraError>>()?
        }
        None => e.lambda.iter().enumerate().map(|(i, l)| l - (e.j_start + i as i64) as f64 / m).collect(),
    };
    Ok(DeltaSequence { j_start: e.j_start, delta, mes: m })
}

pub fn means_table(d: &DeltaSequence, n_list: &[usize], k_range: (i64, i64)) -> Result<MeansTable, RieszError> {
    if d.delta.is_empty() {
        return Err(RieszError::Range("empty delta sequence".into()));
    }
    let (k0, k1) = k_range;
    let n_top = n_list.iter().copied().max().unwrap_or(0) as i64;
    if k0 > k1 || n_list.contains(&0) || k0 + 1 < d.j_start || k1 + n_top > d.j_end() {
        return Err(RieszError::Range(format!(
            "k in [{k0},{k1}] with N up to {n_top} needs j in [{}, {}], have [{}, {}]",
            k0 + 1,
            k1 + n_top,
            d.j_start,
            d.j_end()
        )));
    }
    let c_hat = d.delta.iter().sum::<f64>() / d.delta.len() as f64;
    let mut prefix = Vec::with_capacity(d.delta.len() + 1);
    prefix.push(0.0);
    for v in &d.delta {
        prefix.push(prefix.last().unwrap() + v);
    }
    // Σ_{j=k+1}^{k+N} δ_j = prefix[k + N − j_start + 1] − prefix[k − j_start + 1]
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let mut best = MeansRow { n, sup_dev: -1.0, argmax_k: k0 };
            for k in k0..=k1 {
                let a = (k + 1 - d.j_start) as usize;
                let mean = (prefix[a + n] - prefix[a]) / n as f64;
                let dev = (mean - c_hat).abs();
                if dev > best.sup_dev {
                    best.sup_dev = dev;
                    best.argmax_k = k;
                }
            }
            best
        })
        .collect();
    Ok(MeansTable { c_hat, k_range, rows })
}

/// `δ_j` together with the windowed-mean table.
pub fn delta_and_means(
    e: &Enumeration,
    mes: &QValue,
    n_list: &[usize],
    k_range: (i64, i64),
) -> Result<(DeltaSequence, MeansTable), RieszError> {
    let d = delta_sequence(e, mes)?;
    let t = means_table(&d, n_list, k_range)?;
    Ok((d, t))
}

/// The three terms bounding `|λ_j − j/mes S|`: `R = max |λ − n|`,
/// `max |s_n − n·mes S| / mes S` and `max #Λ_n / mes S`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DisplacementBound {
    pub radius: f64,
    pub s_term: f64,
    pub block_term: f64,
    pub total: f64,
}

pub fn displacement_bound(e: &Enumeration, mes: f64) -> DisplacementBound {
    let radius = e.lambda.iter().zip(&e.block).fold(0.0f64, |m, (l, &n)| m.max((l - n as f64).abs()));
    let s_term = e
        .s
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (i, &s)| m.max((s as f64 - (e.n_start + i as i64) as f64 * mes).abs()))
        / mes;
    let block_term = e.s.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0) as f64 / mes;
    DisplacementBound { radius, s_term, block_term, total: radius + s_term + block_term }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AvdoninVerdict {
    pub satisfied_at: Option<usize>,
    pub threshold: f64,
    /// `threshold − sup_dev` at the reported `N`, or at the best `N` tried.
    pub margin: f64,
    pub sup_dev: f64,
    pub c_hat: f64,
    pub separation: f64,
    pub sup_delta: f64,
    pub k_range: (i64, i64),
    pub n_max: usize,
}

/// Smallest `N ≤ N_max` in the table with `sup_k |mean − ĉ| < 1/(4|I|)`.
pub fn avdonin_check(
    d: &DeltaSequence,
    table: &MeansTable,
    interval_length: &QValue,
    n_max: usize,
) -> Result<AvdoninVerdict, RieszError> {
    let len = interval_length.to_f64();
    if !(len > 0.0) {
        return Err(RieszError::Range("interval length must be positive".into()));
    }
    let mut lambda = d.lambda();
    lambda.sort_by(f64::total_cmp);
    let gap = lambda.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if !(gap > 0.0) {
        return Err(RieszError::NotSeparated(gap));
    }
    let threshold = 1.0 / (4.0 * len);
    let mut rows: Vec<&MeansRow> = table.rows.iter().filter(|r| r.n <= n_max).collect();
    rows.sort_by_key(|r| r.n);
    let hit = rows.iter().find(|r| r.sup_dev < threshold);
    let best = match hit {
        Some(r) => Some(*r),
        None => rows.iter().copied().min_by(|a, b| a.sup_dev.total_cmp(&b.sup_dev)),
    };
    let sup_dev = best.map_or(f64::INFINITY, |r| r.sup_dev);
    Ok(AvdoninVerdict {
        satisfied_at: hit.map(|r| r.n),
        threshold,
        margin: threshold - sup_dev,
        sup_dev,
        c_hat: table.c_hat,
        separation: gap,
        sup_delta: d.sup_abs(),
        k_range: table.k_range,
        n_max,
    })
}

/// `G[j][k] = f̂_S(λ_k − λ_j)`; the lower triangle is the conjugate of the
/// upper one and the diagonal is `mes S`.
pub fn gram_matrix(p: &PointSet, s: &RegionSet) -> Result<DMatrix<Complex64>, RieszError> {
    if p.dim() != s.dim() {
        return Err(RieszError::Range("point and region dimensions differ".into()));
    }
    let n = p.len();
    let pts = p.points();
    let mes = Complex64::new(s.volume()?.to_f64(), 0.0);
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (j + 1..n)
                .map(|k| {
                    let t: Vec<f64> = pts[k].iter().zip(&pts[j]).map(|(a, b)| a - b).collect();
                    ft_indicator(s, &t)
                })
                .collect()
        })
        .collect();
    let mut g = DMatrix::from_element(n, n, mes);
    for (j, row) in rows.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            let k = j + 1 + off;
            g[(j, k)] = *v;
            g[(k, j)] = v.conj();
        }
    }
    Ok(g)
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn extreme_eigs(g: &DMatrix<Complex64>) -> Result<(f64, f64), RieszError> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(RieszError::NonHermitian(0, 0));
    }
    for j in 0..n {
        for k in j..n {
            if g[(j, k)] != g[(k, j)].conj() {
                return Err(RieszError::NonHermitian(j, k));
            }
        }
    }
    if n == 0 {
        return Err(RieszError::Range("empty matrix".into()));
    }
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

pub const EIG_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GramReport {
    pub points: String,
    pub region: String,
    pub size: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub tolerance: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BoundTrace {
    pub rows: Vec<GramReport>,
}

impl BoundTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,size,lambda_min,lambda_max\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{:.16e},{:.16e}", r.radius, r.size, r.lambda_min, r.lambda_max);
        }
        out
    }

    pub fn lambda_min(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.lambda_min).collect()
    }
}

fn describe_region(s: &RegionSet) -> String {
    match s.volume() {
        Ok(v) => format!("{} piece(s), mes {}", s.pieces().len(), v),
        Err(_) => format!("{} piece(s)", s.pieces().len()),
    }
}

/// Gram spectra of the points in `[-R, R]^d` for each radius. The sections
/// are nested, so `λ_min` must not increase and `λ_max` must not decrease.
pub fn riesz_bound_trace(p: &PointSet, radii: &[f64], s: &RegionSet) -> Result<BoundTrace, RieszError> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RieszError::Range("radii must increase".into()));
    }
    let rows = radii
        .par_iter()
        .map(|&r| {
            let sub = p.truncated(r);
            let g = gram_matrix(&sub, s)?;
            let (lo, hi) = extreme_eigs(&g)?;
            Ok(GramReport {
                points: sub.range().to_string(),
                region: describe_region(s),
                size: sub.len(),
                lambda_min: lo,
                lambda_max: hi,
                tolerance: EIG_TOLERANCE,
                radius: r,
            })
        })
        .collect::<Result<Vec<GramReport>, RieszError>>()?;
    for w in rows.windows(2) {
        let scale = w[1].lambda_max.abs().max(1.0);
        if w[1].lambda_min > w[0].lambda_min + EIG_TOLERANCE * scale
            || w[1].lambda_max < w[0].lambda_max - EIG_TOLERANCE * scale
        {
            return Err(RieszError::Monotonicity(format!("between R = {} and R = {}", w[0].radius, w[1].radius)));
        }
    }
    Ok(BoundTrace { rows })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DualityParams {
    pub radii: Vec<f64>,
    /// Largest `N` tried in Avdonin's condition.
    pub n_max: usize,
    /// `|k| ≤ k_max` in the windowed means.
    pub k_max: i64,
    /// `N` and `J` of the orbit statistic on the dual side.
    pub disc_n: i64,
    pub disc_j: i64,
}

impl Default for DualityParams {
    fn default() -> Self {
        DualityParams { radii: vec![25.0, 50.0, 100.0, 200.0], n_max: 128, k_max: 2000, disc_n: 10_000, disc_j: 1000 }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DualityReport {
    pub warning: Option<String>,
    pub mes_s: String,
    pub interval_length: String,
    pub primal: BoundTrace,
    pub dual: BoundTrace,
    pub primal_points: usize,
    pub dual_points: usize,
    pub primal_separation: f64,
    pub dual_separation: f64,
    pub avdonin: Option<AvdoninVerdict>,
    pub avdonin_error: Option<String>,
    pub displacement: DisplacementBound,
    pub orbit_statistic: BrsStatistic,
    pub enumeration: String,
}

/// Primal trace of `E(Λ(Γ, I))` on `S` beside the dual trace of
/// `E(Λ*(Γ, S))` on `I`, plus Avdonin's condition on the dual side.
pub fn duality_experiment(
    alpha: &[QValue],
    beta: &[QValue],
    i: &RegionSet,
    s: &RegionSet,
    params: &DualityParams,
) -> Result<DualityReport, RieszError> {
    let special = make_special_lattice(alpha, beta)?;
    let mes_s = s.volume()?;
    let len_i = i.volume()?;
    let warning = if mes_s != len_i {
        Some(format!("mes S = {mes_s} differs from |I| = {len_i}; Landau's density condition D(Lambda) = mes S fails"))
    } else {
        None
    };
    let r_max = params.radii.iter().copied().fold(0.0, f64::max);
    let (ilo, ihi) = i.bbox().ok_or_else(|| RieszError::Range("empty window".into()))?;
    let i_abs = ilo[0].abs().max(ihi[0].abs());
    let b_max = beta.iter().map(|b| b.to_f64().abs()).fold(0.0, f64::max);
    let d = alpha.len();
    let m_r = (r_max + b_max * i_abs).ceil() as i64 + 1;
    let primal = cut_and_project(&special.gamma, i, &SearchBox::symmetric(d, m_r))?;
    let primal_trace = riesz_bound_trace(&primal, &params.radii, s)?;

    let beta_num: Vec<f64> = beta.iter().map(QValue::to_f64).collect();
    let reach = s.max_abs_dot(&beta_num);
    let mes = mes_s.to_f64();
    let j_need = (params.k_max + params.n_max as i64 + 2) as f64 / mes;
    let n_r = (r_max.max(j_need) + reach).ceil() as i64 + 2;
    let dual = dual_model_points(alpha, beta, s, (-n_r, n_r))?;
    let dual_trace = riesz_bound_trace(&dual, &params.radii, i)?;
    let e = enumerate_blocks(&dual, 0)?;
    let n_list: Vec<usize> = (1..=params.n_max).collect();
    let displacement = displacement_bound(&e, mes);
    let (avdonin, avdonin_error) = match delta_and_means(&e, &mes_s, &n_list, (-params.k_max, params.k_max))
        .and_then(|(ds, t)| avdonin_check(&ds, &t, &len_i, params.n_max))
    {
        Ok(v) => (Some(v), None),
        Err(err) => (None, Some(err.to_string())),
    };
    let orbit_statistic = brs_empirical(s, alpha, params.disc_n, params.disc_j)?;
    Ok(DualityReport {
        warning,
        mes_s: mes_s.to_string(),
        interval_length: len_i.to_string(),
        primal_points: primal.truncated(r_max).len(),
        dual_points: dual.truncated(r_max).len(),
        primal_separation: separation(&primal.truncated(r_max)),
        dual_separation: separation(&dual.truncated(r_max)),
        primal: primal_trace,
        dual: dual_trace,
        avdonin,
        avdonin_error,
        displacement,
        orbit_statistic,
        enumeration: TIE_BREAK.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Algebra, AlgebraSpec, QMatrix};
    use crate::lattice::{transform_pointset, transform_region};
    use crate::modelset::{sequence_points, Provenance};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn q2() -> Algebra {
        AlgebraSpec::quadratic(2).unwrap()
    }

    fn q(alg: &Algebra, s: &str) -> QValue {
        QValue::parse(alg, s).unwrap()
    }

    fn interval(alg: &Algebra, lo: &str, hi: &str) -> RegionSet {
        RegionSet::interval(&q(alg, lo), &q(alg, hi)).unwrap()
    }

    fn example_dual(alg: &Algebra, n: i64) -> PointSet {
        dual_model_points(&[q(alg, "w1")], &[QValue::one(alg)], &interval(alg, "0", "1"), (-n, n)).unwrap()
    }

    #[test]
    fn singleton_blocks_give_the_example_sequence() {
        let alg = q2();
        let e = enumerate_blocks(&example_dual(&alg, 50), 0).unwrap();
        assert_eq!(e.j_start, -50);
        for j in -50..=50 {
            let f = (j as f64 * 2f64.sqrt()).rem_euclid(1.0);
            assert!((e.lambda_at(j).unwrap() - (j as f64 + f)).abs() < 1e-12);
            assert_eq!(e.s_at(j), Some(j));
        }
    }

    #[test]
    fn empty_and_double_blocks() {
        let prov = |n: i64| Provenance { n, m: vec![0] };
        let p = PointSet::new(
            1,
            vec![vec![0.7], vec![0.1], vec![2.5], vec![-1.0]],
            None,
            vec![prov(0), prov(0), prov(2), prov(-1)],
            "test",
        )
        .unwrap();
        let e = enumerate_blocks(&p, 0).unwrap();
        assert_eq!(e.lambda, vec![-1.0, 0.1, 0.7, 2.5]);
        assert_eq!(e.j_start, -1);
        assert_eq!(e.rank, vec![0, 0, 1, 0]);
        // n = 1 is empty
        assert_eq!(e.s_at(1), e.s_at(2));
        assert_eq!((e.s_at(0), e.s_at(1), e.s_at(3)), (Some(0), Some(2), Some(3)));
        for (i, &n) in e.block.iter().enumerate() {
            let j = e.j_start + i as i64;
            assert!(e.s_at(n).unwrap() <= j && j < e.s_at(n + 1).unwrap());
        }
        let bare = PointSet::from_values(&[1.0], "x");
        assert_eq!(enumerate_blocks(&bare, 0).unwrap_err(), RieszError::Provenance);
    }

    #[test]
    fn example_deltas_and_mean() {
        let alg = q2();
        let e = enumerate_blocks(&example_dual(&alg, 10_200), 0).unwrap();
        let (d, t) = delta_and_means(&e, &QValue::one(&alg), &[1, 2, 64], (-10_000, 10_000)).unwrap();
        for (i, v) in d.delta.iter().enumerate() {
            let j = d.j_start + i as i64;
            let want = q(&alg, "w1").scale_int(j).fract().unwrap().to_f64();
            assert!((v - want).abs() < 1e-12);
        }
        assert!((t.c_hat - 0.5).abs() < 0.01);
        assert!((t.rows[0].sup_dev - d.delta.iter().fold(0.0f64, |m, x| m.max((x - t.c_hat).abs()))).abs() < 0.02);
        let b = displacement_bound(&e, 1.0);
        assert!(d.sup_abs() <= b.total);
    }

    #[test]
    fn window_of_length_one_is_the_sup_deviation() {
        let delta: Vec<f64> = (0..50).map(|j| ((j * 7) % 11) as f64 / 10.0).collect();
        let d = DeltaSequence::from_values(0, delta.clone(), 1.0);
        let t = means_table(&d, &[1], (-1, 48)).unwrap();
        let c = delta.iter().sum::<f64>() / 50.0;
        let sup = delta.iter().fold(0.0f64, |m, x| m.max((x - c).abs()));
        assert!((t.rows[0].sup_dev - sup).abs() < 1e-15);
        assert!(means_table(&d, &[2], (-1, 48)).is_err());
    }

    #[test]
    fn kadec_degenerate_case() {
        let d = DeltaSequence::from_values(-100, vec![0.0; 201], 2.0);
        let t = means_table(&d, &[1, 2, 3], (-101, 97)).unwrap();
        let v = avdonin_check(&d, &t, &QValue::from_int(&q2(), 2), 3).unwrap();
        assert_eq!(v.satisfied_at, Some(1));
        assert_eq!(v.margin, 1.0 / 8.0);
    }

    #[test]
    fn alternating_perturbation_needs_two_terms() {
        let delta: Vec<f64> = (-100i64..100).map(|j| if j % 2 == 0 { 0.3 } else { -0.3 }).collect();
        let d = DeltaSequence::from_values(-100, delta, 1.0);
        let t = means_table(&d, &[1, 2, 3, 4], (-101, 95)).unwrap();
        let v = avdonin_check(&d, &t, &QValue::one(&q2()), 4).unwrap();
        assert_eq!(v.satisfied_at, Some(2));
        assert!(t.rows[0].sup_dev > 0.25);
        let none = avdonin_check(&d, &t, &QValue::one(&q2()), 1).unwrap();
        assert_eq!(none.satisfied_at, None);
        assert!(none.margin < 0.0);
    }

    #[test]
    fn collisions_are_rejected() {
        let d = DeltaSequence::from_values(0, vec![0.0, -1.0, 0.0], 1.0);
        let t = means_table(&d, &[1], (-1, 1)).unwrap();
        assert!(matches!(avdonin_check(&d, &t, &QValue::one(&q2()), 1), Err(RieszError::NotSeparated(_))));
    }

    #[test]
    fn integers_on_the_unit_interval_are_orthonormal() {
        let alg = q2();
        let vals: Vec<f64> = (-20..=20).map(|k| k as f64).collect();
        let g = gram_matrix(&PointSet::from_values(&vals, "Z"), &interval(&alg, "0", "1")).unwrap();
        assert_eq!(g, DMatrix::identity(41, 41));
        let (lo, hi) = extreme_eigs(&g).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_gram() {
        let alg = q2();
        let g = gram_matrix(&PointSet::from_values(&[0.0, 0.5], "x"), &interval(&alg, "0", "1")).unwrap();
        assert!((g[(0, 1)].norm() - 2.0 / PI).abs() < 1e-12);
        let (lo, hi) = extreme_eigs(&g).unwrap();
        assert!((lo - (1.0 - 2.0 / PI)).abs() < 1e-12);
        assert!((hi - (1.0 + 2.0 / PI)).abs() < 1e-12);
    }

    #[test]
    fn eigs_of_diagonal_and_rejection() {
        let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.2, 0.0),
            Complex64::new(5.0, 0.0),
        ]));
        let (lo, hi) = extreme_eigs(&g).unwrap();
        assert!((lo - 0.2).abs() < 1e-14 && (hi - 5.0).abs() < 1e-14);
        let mut bad = g.clone();
        bad[(0, 1)] = Complex64::new(0.0, 1.0);
        assert_eq!(extreme_eigs(&bad), Err(RieszError::NonHermitian(0, 1)));
    }

    #[test]
    fn gram_covariance_under_scaling() {
        let alg = q2();
        let p = sequence_points(&[q(&alg, "w1")], &[QValue::one(&alg)], &[(-30, 30)]).unwrap();
        let s = RegionSet::union(&[interval(&alg, "0", "w1 - 1"), interval(&alg, "1", "3 - w1")]).unwrap();
        let a = QMatrix::from_rows(&alg, vec![vec![QValue::from_int(&alg, 2)]]).unwrap();
        let ainv_t = a.inverse_transpose().unwrap();
        let g0 = gram_matrix(&p, &s).unwrap();
        let g1 = gram_matrix(&transform_pointset(&p, &a).unwrap(), &transform_region(&s, &ainv_t).unwrap()).unwrap();
        for (x, y) in g0.iter().zip(g1.iter()) {
            assert!((x * 0.5 - y).norm() < 1e-9);
        }
        let (l0, _) = extreme_eigs(&g0).unwrap();
        let (l1, _) = extreme_eigs(&g1).unwrap();
        assert!((l1 - 0.5 * l0).abs() < 1e-9);
    }

    #[test]
    fn integer_trace_is_flat() {
        let alg = q2();
        let vals: Vec<f64> = (-60..=60).map(|k| k as f64).collect();
        let t = riesz_bound_trace(&PointSet::from_values(&vals, "Z"), &[5.0, 20.0, 60.0], &interval(&alg, "0", "1"))
            .unwrap();
        assert!(t.rows.iter().all(|r| (r.lambda_min - 1.0).abs() < 1e-12));
        assert_eq!(t.rows.iter().map(|r| r.size).collect::<Vec<_>>(), vec![11, 41, 121]);
        assert!(t.to_csv().starts_with("R,size,lambda_min,lambda_max\n5,11,"));
    }

    #[test]
    fn small_duality_run() {
        let alg = q2();
        let s = RegionSet::union(&[interval(&alg, "0", "w1 - 1"), interval(&alg, "1", "3 - w1")]).unwrap();
        let i = RegionSet::interval_left_open(&q(&alg, "-1"), &QValue::zero(&alg)).unwrap();
        let params = DualityParams { radii: vec![10.0, 20.0], n_max: 32, k_max: 200, disc_n: 500, disc_j: 50 };
        let r = duality_experiment(&[q(&alg, "w1")], &[QValue::one(&alg)], &i, &s, &params).unwrap();
        assert!(r.warning.is_none());
        assert!(r.primal.rows[1].lambda_min > 1e-4);
        assert!(r.dual.rows[1].lambda_min > 1e-4);
        assert!(r.avdonin.as_ref().unwrap().satisfied_at.is_some());
        let off = RegionSet::interval(&QValue::zero(&alg), &q(&alg, "1/2")).unwrap();
        let w = duality_experiment(&[q(&alg, "w1")], &[QValue::one(&alg)], &i, &off, &params).unwrap();
        assert!(w.warning.is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn gram_is_hermitian_with_constant_diagonal(pts in proptest::collection::vec(-30.0f64..30.0, 2..25)) {
            let alg = q2();
            let s = interval(&alg, "0", "w1 - 1");
            let g = gram_matrix(&PointSet::from_values(&pts, "random"), &s).unwrap();
            let mes = 2f64.sqrt() - 1.0;
            for j in 0..pts.len() {
                prop_assert_eq!(g[(j, j)], Complex64::new(mes, 0.0));
                for k in 0..pts.len() {
                    prop_assert_eq!(g[(j, k)], g[(k, j)].conj());
                }
            }
            let (lo, hi) = extreme_eigs(&g).unwrap();
            prop_assert!(lo >= -1e-9 && lo <= hi);
        }

        #[test]
        fn avdonin_ignores_constant_shifts(shift in -3.0f64..3.0, seed in 0u64..1000) {
            let delta: Vec<f64> = (0..300u64).map(|j| ((j * 2654435761 + seed) % 1000) as f64 / 2500.0).collect();
            let moved: Vec<f64> = delta.iter().map(|d| d + shift).collect();
            let a = DeltaSequence::from_values(-150, delta, 1.0);
            let b = DeltaSequence::from_values(-150, moved, 1.0);
            let n_list: Vec<usize> = (1..=16).collect();
            let ta = means_table(&a, &n_list, (-151, 133)).unwrap();
            let tb = means_table(&b, &n_list, (-151, 133)).unwrap();
            prop_assert!((tb.c_hat - ta.c_hat - shift).abs() < 1e-9);
            let one = QValue::one(&q2());
            let va = avdonin_check(&a, &ta, &one, 16).unwrap();
            let vb = avdonin_check(&b, &tb, &one, 16).unwrap();
            prop_assert_eq!(va.satisfied_at, vb.satisfied_at);
            prop_assert!((va.margin - vb.margin).abs() < 1e-9);
        }
    }
}
