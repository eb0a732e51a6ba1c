//! Discrepancy of the rotation `x ↦ x + α` on `T^d` against the multiplicity
//! function of a region, BMO statistics and counting-function discrepancy of
//! one-dimensional point sets.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{AlgebraError, QValue};
use crate::modelset::PointSet;
use crate::regions::{RegionError, RegionSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid range: {0}")]
    Range(String),
    #[error("point set has no block provenance")]
    Provenance,
}

/// `D_n(S, x₀)` over a range of `n`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DiscrepancyTrace {
    pub alpha: Vec<String>,
    pub region: String,
    pub x0: Vec<String>,
    pub two_sided: bool,
    pub n_start: i64,
    /// Signed hit counts `H_n`, so that `D_n = H_n − n·mes S`.
    pub hits: Vec<i64>,
    pub values: Vec<f64>,
    pub mes: f64,
    pub max_abs: f64,
    pub argmax_n: i64,
}

impl DiscrepancyTrace {
    pub fn n_end(&self) -> i64 {
        self.n_start + self.values.len() as i64 - 1
    }

    pub fn value(&self, n: i64) -> Option<f64> {
        let i = n.checked_sub(self.n_start)?;
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }

    /// `max |D_n|` over `n` in `[lo, hi]` ∩ the trace.
    pub fn max_abs_between(&self, lo: i64, hi: i64) -> f64 {
        let a = (lo.max(self.n_start) - self.n_start) as usize;
        let b = (hi.min(self.n_end()) - self.n_start) as usize;
        if a > b {
            return 0.0;
        }
        self.values[a..=b].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,D_n\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{:.16e}", self.n_start + i as i64, v);
        }
        out
    }
}

fn describe_region(s: &RegionSet) -> String {
    match s.volume() {
        Ok(v) => format!("{} piece(s) in R^{}, mes {}", s.pieces().len(), s.dim(), v),
        Err(_) => format!("{} piece(s) in R^{}", s.pieces().len(), s.dim()),
    }
}

/// Orbit `x₀ + kα` evaluated through the multiplicity of `S`, for
/// `k` in `[lo, hi)`.
struct Orbit<'a> {
    s: &'a RegionSet,
    alpha: &'a [QValue],
    x0: &'a [QValue],
    a_num: Vec<f64>,
    x_num: Vec<f64>,
    a_err: f64,
    x_err: f64,
}

impl<'a> Orbit<'a> {
    fn new(s: &'a RegionSet, alpha: &'a [QValue], x0: &'a [QValue]) -> Result<Self, DynamicsError> {
        let d = s.dim();
        if alpha.len() != d || x0.len() != d {
            return Err(DynamicsError::Dimension(format!("S, alpha and x0 must live in R^{d}")));
        }
        let a_num: Vec<f64> = alpha.iter().map(QValue::to_f64).collect();
        let x_num: Vec<f64> = x0.iter().map(QValue::to_f64).collect();
        let a_err = alpha
            .iter()
            .zip(&a_num)
            .map(|(a, v)| a.error_bound() + 2.0 * f64::EPSILON * v.abs())
            .fold(0.0, f64::max);
        let x_err = x0.iter().map(QValue::error_bound).fold(0.0, f64::max);
        Ok(Orbit { s, alpha, x0, a_num, x_num, a_err, x_err })
    }

    fn chi(&self, k: i64) -> Result<i64, RegionError> {
        let kf = k as f64;
        let x: Vec<f64> = self.x_num.iter().zip(&self.a_num).map(|(x, a)| x + kf * a).collect();
        let mag = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = kf.abs() * self.a_err + self.x_err + 2.0 * f64::EPSILON * mag + 1e-15;
        self.s.multiplicity_certified(&x, err, || {
            Ok(self.x0.iter().zip(self.alpha).map(|(x, a)| x + &a.scale_int(k)).collect())
        })
    }

    fn chis(&self, lo: i64, hi: i64) -> Result<Vec<i64>, DynamicsError> {
        let v: Result<Vec<i64>, RegionError> = (lo..hi).into_par_iter().map(|k| self.chi(k)).collect();
        Ok(v?)
    }
}

/// Signed counts `H_n` for `n` in `[a, b]` with `H_0 = 0` and
/// `H_{n+1} − H_n = χ(n)`, where `chi[i]` holds `χ(lo + i)`.
fn signed_counts(chi: &[i64], lo: i64, a: i64, b: i64) -> Vec<i64> {
    // prefix[t] = Σ_{k=lo}^{lo+t-1} χ(k), H_n = prefix[n − lo] − prefix[−lo]
    let mut prefix = Vec::with_capacity(chi.len() + 1);
    prefix.push(0i64);
    for c in chi {
        prefix.push(prefix.last().unwrap() + c);
    }
    let zero = prefix[(-lo) as usize];
    (a..=b).map(|n| prefix[(n - lo) as usize] - zero).collect()
}

/// `D_n(S, x₀) = Σ_{k=0}^{n−1} χ_S(x₀ + kα) − n·mes S` for `n` in `n_range`.
/// In two-sided mode negative `n` use `−Σ_{k=n}^{−1} χ_S(x₀ + kα) − n·mes S`;
/// one-sided traces must start at `n ≥ 0`.
pub fn discrepancy_trace(
    s: &RegionSet,
    alpha: &[QValue],
    x0: &[QValue],
    n_range: (i64, i64),
    two_sided: bool,
) -> Result<DiscrepancyTrace, DynamicsError> {
    let (a, b) = n_range;
    if a > b {
        return Err(DynamicsError::Range(format!("[{a}, {b}] is empty")));
    }
    if !two_sided && a < 0 {
        return Err(DynamicsError::Range("one-sided traces need n >= 0".into()));
    }
    let orbit = Orbit::new(s, alpha, x0)?;
    let mes = s.volume()?.to_f64();
    let lo = a.min(0);
    let hi = b.max(0);
    let chi = orbit.chis(lo, hi)?;
    let hits = signed_counts(&chi, lo, a, b);
    let values: Vec<f64> = hits.iter().zip(a..=b).map(|(&h, n)| h as f64 - n as f64 * mes).collect();
    let (mut max_abs, mut argmax_n) = (0.0, a);
    for (i, v) in values.iter().enumerate() {
        if v.abs() > max_abs {
            max_abs = v.abs();
            argmax_n = a + i as i64;
        }
    }
    Ok(DiscrepancyTrace {
        alpha: alpha.iter().map(|v| v.to_string()).collect(),
        region: describe_region(s),
        x0: x0.iter().map(|v| v.to_string()).collect(),
        two_sided,
        n_start: a,
        hits,
        values,
        mes,
        max_abs,
        argmax_n,
    })
}

/// `sup_{1≤n≤N} sup_{|j|≤J} |Σ_{k=j+1}^{j+n} χ_S(kα) − n·mes S|`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BrsStatistic {
    pub max_abs: f64,
    pub argmax_n: i64,
    pub argmax_j: i64,
    pub windows: String,
}

/// The double-indexed discrepancy over the orbit of 0. Each block sum equals
/// `D_{j+n+1} − D_{j+1}` of the two-sided trace, so the sup is a sliding
/// max/min over one trace.
pub fn brs_empirical(s: &RegionSet, alpha: &[QValue], n_max: i64, j_max: i64) -> Result<BrsStatistic, DynamicsError> {
    if n_max < 1 || j_max < 0 {
        return Err(DynamicsError::Range("N must be positive and J non-negative".into()));
    }
    let zero = vec![QValue::zero(s.algebra()); s.dim()];
    let t0 = 1 - j_max;
    let t1 = j_max + 1 + n_max;
    let trace = discrepancy_trace(s, alpha, &zero, (t0, t1), true)?;
    let d = &trace.values;
    let idx = |t: i64| (t - t0) as usize;
    let mut best = (0.0, 1, -j_max);
    // windows (u, u + N], swept with u decreasing
    let mut maxq: VecDeque<i64> = VecDeque::new();
    let mut minq: VecDeque<i64> = VecDeque::new();
    let mut next_v = t1;
    for u in (t0..=j_max + 1).rev() {
        while next_v > u {
            let v = next_v;
            while maxq.back().is_some_and(|&w| d[idx(w)] <= d[idx(v)]) {
                maxq.pop_back();
            }
            maxq.push_back(v);
            while minq.back().is_some_and(|&w| d[idx(w)] >= d[idx(v)]) {
                minq.pop_back();
            }
            minq.push_back(v);
            next_v -= 1;
        }
        while maxq.front().is_some_and(|&w| w > u + n_max) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&w| w > u + n_max) {
            minq.pop_front();
        }
        let du = d[idx(u)];
        for &v in [maxq.front(), minq.front()].into_iter().flatten() {
            let val = (d[idx(v)] - du).abs();
            if val > best.0 {
                best = (val, v - u, u - 1);
            }
        }
    }
    Ok(BrsStatistic {
        max_abs: best.0,
        argmax_n: best.1,
        argmax_j: best.2,
        windows: format!("n in [1,{n_max}], j in [{},{j_max}], orbit of 0", -j_max),
    })
}

/// `g(nα)` for the transfer function normalized by `g(0) = 0`; these are the
/// two-sided `D_n(S, 0)`.
pub fn orbit_transfer(s: &RegionSet, alpha: &[QValue], n_range: (i64, i64)) -> Result<DiscrepancyTrace, DynamicsError> {
    let zero = vec![QValue::zero(s.algebra()); s.dim()];
    discrepancy_trace(s, alpha, &zero, n_range, true)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BmoStat {
    pub value: f64,
    pub argmax_start: usize,
    pub argmax_len: usize,
    /// Per window length, the largest mean oscillation.
    pub windows: Vec<(usize, f64)>,
}

/// `1, 2, 4, …` up to `max_len`.
pub fn dyadic_lengths(max_len: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |&l| l.checked_mul(2)).take_while(|&l| l <= max_len).collect()
}

struct Fenwick {
    count: Vec<i64>,
    sum: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { count: vec![0; n + 1], sum: vec![0.0; n + 1] }
    }

    fn add(&mut self, rank: usize, c: i64, v: f64) {
        let mut i = rank + 1;
        while i < self.count.len() {
            self.count[i] += c;
            self.sum[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Count and sum of entries with rank `< r`.
    fn prefix(&self, r: usize) -> (i64, f64) {
        let (mut c, mut s) = (0, 0.0);
        let mut i = r;
        while i > 0 {
            c += self.count[i];
            s += self.sum[i];
            i -= i & i.wrapping_neg();
        }
        (c, s)
    }
}

fn max_oscillation(seq: &[f64], ranks: &[usize], sorted: &[f64], len: usize, prefix: &[f64]) -> (f64, usize) {
    let mut tree = Fenwick::new(sorted.len());
    for i in 0..len {
        tree.add(ranks[i], 1, seq[i]);
    }
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
    let lf = len as f64;
    for start in 0..=seq.len() - len {
        if start > 0 {
            tree.add(ranks[start - 1], -1, -seq[start - 1]);
            tree.add(ranks[start + len - 1], 1, seq[start + len - 1]);
        }
        let total = prefix[start + len] - prefix[start];
        let mean = total / lf;
        let r = sorted.partition_point(|&v| v <= mean);
        let (c_lo, s_lo) = tree.prefix(r);
        let c_hi = len as i64 - c_lo;
        let s_hi = total - s_lo;
        let dev = ((c_lo as f64 * mean - s_lo) + (s_hi - c_hi as f64 * mean)) / lf;
        if dev > best {
            best = dev;
            arg = start;
        }
    }
    (best.max(0.0), arg)
}

/// `max (1/L) Σ_{k=s}^{s+L−1} |c_k − mean|` over all windows of the given
/// lengths lying inside the sequence.
pub fn bmo_stat(seq: &[f64], window_lengths: &[usize]) -> Result<BmoStat, DynamicsError> {
    if let Some(&bad) = window_lengths.iter().find(|&&l| l == 0 || l > seq.len()) {
        return Err(DynamicsError::Range(format!("window length {bad} for a sequence of length {}", seq.len())));
    }
    if window_lengths.is_empty() {
        return Err(DynamicsError::Range("no window lengths".into()));
    }
    let mut sorted: Vec<f64> = seq.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let ranks: Vec<usize> = seq.iter().map(|v| sorted.partition_point(|w| w < v)).collect();
    let mut prefix = Vec::with_capacity(seq.len() + 1);
    prefix.push(0.0);
    for v in seq {
        prefix.push(prefix.last().unwrap() + v);
    }
    let per_len: Vec<(usize, f64, usize)> = window_lengths
        .par_iter()
        .map(|&l| {
            let (v, s) = max_oscillation(seq, &ranks, &sorted, l, &prefix);
            (l, v, s)
        })
        .collect();
    let mut out = BmoStat { value: 0.0, argmax_start: 0, argmax_len: window_lengths[0], windows: Vec::new() };
    for &(l, v, s) in &per_len {
        out.windows.push((l, v));
        if v > out.value {
            out.value = v;
            out.argmax_start = s;
            out.argmax_len = l;
        }
    }
    Ok(out)
}

fn sorted_values(p: &PointSet) -> Result<Vec<f64>, DynamicsError> {
    if p.dim() != 1 {
        return Err(DynamicsError::Dimension("counting functions need a 1-D point set".into()));
    }
    let mut v = p.values();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `n_Λ(x)` normalized by `n_Λ(0) = 0`, so that `n_Λ(y) − n_Λ(x) = #Λ ∩ [x, y)`.
/// In block mode each block `Λ_k` is replaced by mass `#Λ_k` at the integer `k`.
pub fn counting_function(p: &PointSet, xs: &[f64], block_mode: bool) -> Result<Vec<i64>, DynamicsError> {
    let below = |v: &[f64], x: f64| v.partition_point(|&t| t < x) as i64;
    if block_mode {
        if !p.has_provenance() {
            return Err(DynamicsError::Provenance);
        }
        let mut blocks: Vec<f64> = p.provenance().iter().map(|q| q.n as f64).collect();
        blocks.sort_by(f64::total_cmp);
        let z = below(&blocks, 0.0);
        Ok(xs.iter().map(|&x| below(&blocks, x) - z).collect())
    } else {
        let v = sorted_values(p)?;
        let z = below(&v, 0.0);
        Ok(xs.iter().map(|&x| below(&v, x) - z).collect())
    }
}

/// `d(Λ, x) = n_Λ(x) − a·x` at each sample point.
pub fn counting_discrepancy(p: &PointSet, a: f64, xs: &[f64], block_mode: bool) -> Result<Vec<f64>, DynamicsError> {
    if a.is_nan() || a <= 0.0 {
        return Err(DynamicsError::Range("density must be positive".into()));
    }
    let n = counting_function(p, xs, block_mode)?;
    Ok(n.iter().zip(xs).map(|(&c, &x)| c as f64 - a * x).collect())
}

/// Block data of a point set with provenance: `R = max |λ − n|` and the
/// largest block size, with the bound `(2⌈R⌉ + 1)·max #Λ_k` on
/// `|n_Λ − ñ_Λ|`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BlockBound {
    pub radius: f64,
    pub max_block: usize,
    pub bound: f64,
}

pub fn block_counting_bound(p: &PointSet) -> Result<BlockBound, DynamicsError> {
    if p.dim() != 1 {
        return Err(DynamicsError::Dimension("block bound needs a 1-D point set".into()));
    }
    if !p.has_provenance() {
        return Err(DynamicsError::Provenance);
    }
    let mut sizes: BTreeMap<i64, usize> = BTreeMap::new();
    let mut radius = 0.0f64;
    for (x, q) in p.points().iter().zip(p.provenance()) {
        *sizes.entry(q.n).or_default() += 1;
        radius = radius.max((x[0] - q.n as f64).abs());
    }
    let max_block = sizes.values().copied().max().unwrap_or(0);
    Ok(BlockBound { radius, max_block, bound: (2.0 * radius.ceil() + 1.0) * max_block as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Algebra, AlgebraSpec};
    use crate::modelset::{dual_model_points, sequence_points, Provenance};
    use proptest::prelude::*;

    fn q2() -> Algebra {
        AlgebraSpec::quadratic(2).unwrap()
    }

    fn q(alg: &Algebra, s: &str) -> QValue {
        QValue::parse(alg, s).unwrap()
    }

    fn interval(alg: &Algebra, lo: &str, hi: &str) -> RegionSet {
        RegionSet::interval(&q(alg, lo), &q(alg, hi)).unwrap()
    }

    /// Direct orbit sums with exact fractional parts.
    fn brute_chi(alg: &Algebra, lo: &str, hi: &str, k: i64) -> i64 {
        let x = q(alg, "w1").scale_int(k);
        let f = x.fract().unwrap();
        let inside = f.cmp_exact(&q(alg, lo)).unwrap().is_ge() && f.cmp_exact(&q(alg, hi)).unwrap().is_lt();
        inside as i64
    }

    #[test]
    fn first_values_of_the_half_interval() {
        let alg = q2();
        let s = interval(&alg, "0", "1/2");
        let t = discrepancy_trace(&s, &[q(&alg, "w1")], &[QValue::zero(&alg)], (0, 3), false).unwrap();
        assert_eq!(t.values, vec![0.0, 0.5, 1.0, 0.5]);
        assert_eq!(t.max_abs, 1.0);
        assert_eq!(t.argmax_n, 2);
    }

    #[test]
    fn fundamental_domain_has_zero_discrepancy() {
        let alg = q2();
        let s = interval(&alg, "w1 - 3", "w1 - 2");
        let t = discrepancy_trace(&s, &[q(&alg, "w1")], &[q(&alg, "1/3")], (-50, 50), true).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_sided_negative_side() {
        let alg = q2();
        let s = interval(&alg, "0", "1/2");
        let t = discrepancy_trace(&s, &[q(&alg, "w1")], &[QValue::zero(&alg)], (-3, 0), true).unwrap();
        assert_eq!(t.value(0), Some(0.0));
        for n in -3..0 {
            let sum: i64 = (n..0).map(|k| brute_chi(&alg, "0", "1/2", k)).sum();
            assert_eq!(t.value(n), Some(-(sum as f64) - n as f64 * 0.5));
        }
        assert!(discrepancy_trace(&s, &[q(&alg, "w1")], &[QValue::zero(&alg)], (-3, 0), false).is_err());
    }

    #[test]
    fn transfer_function_is_the_orbit_trace() {
        let alg = q2();
        let s = interval(&alg, "0", "w1 - 1");
        let g = orbit_transfer(&s, &[q(&alg, "w1")], (-200, 200)).unwrap();
        let t = discrepancy_trace(&s, &[q(&alg, "w1")], &[QValue::zero(&alg)], (-200, 200), true).unwrap();
        assert_eq!(g.values, t.values);
        assert_eq!(g.value(0), Some(0.0));
        assert!((g.value(1).unwrap() - (1.0 - (2f64.sqrt() - 1.0))).abs() < 1e-15);
    }

    #[test]
    fn brs_statistic_matches_brute_force() {
        let alg = q2();
        let s = interval(&alg, "0", "w1 - 1");
        let stat = brs_empirical(&s, &[q(&alg, "w1")], 200, 50).unwrap();
        let mes = 2f64.sqrt() - 1.0;
        let mut best = 0.0f64;
        for j in -50..=50 {
            let mut acc = 0;
            for n in 1..=200 {
                acc += brute_chi(&alg, "0", "w1 - 1", j + n);
                best = best.max((acc as f64 - n as f64 * mes).abs());
            }
        }
        assert!((stat.max_abs - best).abs() < 1e-12);
        assert!((stat.max_abs - 0.9949493661166535).abs() < 1e-12);
        let mut acc = 0;
        for k in stat.argmax_j + 1..=stat.argmax_j + stat.argmax_n {
            acc += brute_chi(&alg, "0", "w1 - 1", k);
        }
        assert!(((acc as f64 - stat.argmax_n as f64 * mes).abs() - stat.max_abs).abs() < 1e-12);
    }

    #[test]
    fn certificate_pair_statistics_share_a_bound() {
        let alg = q2();
        let a = [q(&alg, "w1")];
        let s = interval(&alg, "0", "1");
        let s2 = RegionSet::union(&[interval(&alg, "0", "w1 - 1"), interval(&alg, "1", "3 - w1")]).unwrap();
        let x = brs_empirical(&s, &a, 5000, 500).unwrap();
        let y = brs_empirical(&s2, &a, 5000, 500).unwrap();
        assert_eq!(x.max_abs, 0.0);
        assert!((x.max_abs - y.max_abs).abs() <= 4.0);
    }

    #[test]
    fn bmo_small_cases() {
        let c = bmo_stat(&[3.0; 40], &dyadic_lengths(32)).unwrap();
        assert_eq!(c.value, 0.0);
        let alt: Vec<f64> = (0..64).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let b = bmo_stat(&alt, &[2, 4, 8, 16]).unwrap();
        assert!((b.value - 1.0).abs() < 1e-15);
        assert!(bmo_stat(&alt, &[65]).is_err());
        assert_eq!(dyadic_lengths(20), vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn bmo_of_half_interval_trace_matches_oracle() {
        let alg = q2();
        let s = interval(&alg, "0", "1/2");
        let t = discrepancy_trace(&s, &[q(&alg, "w1")], &[QValue::zero(&alg)], (0, 4096), false).unwrap();
        let cases = [(1, 0.0), (2, 0.25), (8, 0.375), (64, 0.4111328125), (512, 0.505645751953125), (4096, 0.4789466857910156)];
        for (l, want) in cases {
            let got = bmo_stat(&t.values, &[l]).unwrap().value;
            assert!((got - want).abs() < 1e-9, "L={l}: {got} vs {want}");
        }
    }

    #[test]
    fn counting_for_integers() {
        let vals: Vec<f64> = (-20..=20).map(|k| k as f64).collect();
        let p = PointSet::from_values(&vals, "Z");
        let xs: Vec<f64> = (0..400).map(|i| -19.9 + i as f64 * 0.0997).collect();
        let d = counting_discrepancy(&p, 1.0, &xs, false).unwrap();
        assert!(d.iter().all(|v| v.abs() <= 1.0));
        assert_eq!(counting_function(&p, &[0.0, 0.5, 1.0, -0.5], false).unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(counting_discrepancy(&p, 1.0, &xs, true), Err(DynamicsError::Provenance));
    }

    #[test]
    fn counting_for_the_model_sequence() {
        let alg = q2();
        let p = sequence_points(&[q(&alg, "w1")], &[QValue::one(&alg)], &[(-150, 150)]).unwrap();
        let xs: Vec<f64> = (0..=20000).map(|i| -100.0 + i as f64 * 0.01).collect();
        let d = counting_discrepancy(&p, 1.0, &xs, false).unwrap();
        assert!(d.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 2.0);
    }

    #[test]
    fn block_counting_stays_within_bound() {
        let alg = q2();
        let s = RegionSet::interval(&q(&alg, "-1/2"), &q(&alg, "3/2")).unwrap();
        let p = dual_model_points(&[q(&alg, "w1")], &[q(&alg, "w1 - 1")], &s, (-300, 300)).unwrap();
        let bound = block_counting_bound(&p).unwrap();
        assert!(bound.max_block >= 1);
        let xs: Vec<f64> = (0..=4000).map(|i| -250.0 + i as f64 * 0.125).collect();
        let a = counting_function(&p, &xs, false).unwrap();
        let b = counting_function(&p, &xs, true).unwrap();
        let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).max().unwrap();
        assert!(gap as f64 <= bound.bound, "{gap} > {}", bound.bound);
    }

    #[test]
    fn block_mode_uses_block_indices() {
        let prov = vec![Provenance { n: 0, m: vec![0] }, Provenance { n: 0, m: vec![1] }, Provenance { n: 2, m: vec![0] }];
        let p = PointSet::new(1, vec![vec![-0.3], vec![0.4], vec![2.2]], None, prov, "test").unwrap();
        assert_eq!(counting_function(&p, &[0.5, 1.0, 2.5, 3.0], true).unwrap(), vec![2, 2, 3, 3]);
        assert_eq!(counting_function(&p, &[0.5, 1.0, 2.5, 3.0], false).unwrap(), vec![1, 1, 2, 2]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn increments_are_orbit_hits(lo in 0i64..8, len in 1i64..8, x0 in 0i64..10, start in -60i64..0) {
            let alg = q2();
            let lo_s = format!("{lo}/10");
            let hi_s = format!("{}/10", lo + len);
            let s = interval(&alg, &lo_s, &hi_s);
            let x = QValue::from_rational(&alg, num_rational::BigRational::new(x0.into(), 7.into()));
            let t = discrepancy_trace(&s, &[q(&alg, "w1")], &[x.clone()], (start, start + 120), true).unwrap();
            let mes = s.volume().unwrap();
            for n in start..start + 120 {
                let i = (n - start) as usize;
                let point = &x + &q(&alg, "w1").scale_int(n);
                let chi = s.multiplicity(&[point]).unwrap();
                prop_assert_eq!(t.hits[i + 1] - t.hits[i], chi);
                let inc = t.values[i + 1] - t.values[i];
                prop_assert!((inc - (chi as f64 - mes.to_f64())).abs() < 1e-9);
            }
        }

        #[test]
        fn bmo_is_bounded_by_twice_the_sup_deviation(seq in proptest::collection::vec(-5.0f64..5.0, 2..60)) {
            let lens: Vec<usize> = (1..=seq.len()).collect();
            let b = bmo_stat(&seq, &lens).unwrap().value;
            let mean = seq.iter().sum::<f64>() / seq.len() as f64;
            let sup = seq.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
            prop_assert!(b <= 2.0 * sup + 1e-12);
            // brute force for the same family
            let mut best = 0.0f64;
            for l in 1..=seq.len() {
                for s in 0..=seq.len() - l {
                    let w = &seq[s..s + l];
                    let mu = w.iter().sum::<f64>() / l as f64;
                    best = best.max(w.iter().map(|v| (v - mu).abs()).sum::<f64>() / l as f64);
                }
            }
            prop_assert!((b - best).abs() < 1e-9);
        }
    }
}
