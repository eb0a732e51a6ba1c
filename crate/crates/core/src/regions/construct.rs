//! A restricted version of the `K ⊂ S ⊂ U` construction: tile space with a
//! small BRS parallelepiped, keep the tiles meeting `K`, add whole tiles inside
//! `U` and fit one residual piece inside a further free tile.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::algebra::{integer_coordinates, module_membership, ModuleWitness, QMatrix, QValue};

use super::brs::next_combination;
use super::{integer_box, Piece, RegionError, RegionSet, GUARD};

#[derive(Clone, Debug)]
pub struct ConstructParams {
    /// Target diameter of the tiles.
    pub epsilon: f64,
    /// Largest `n` tried when looking for short vectors `nα + m`.
    pub max_n: i64,
    /// How many times `epsilon` may be halved when the tiling is too coarse.
    pub refinements: usize,
}

impl Default for ConstructParams {
    fn default() -> Self {
        ConstructParams { epsilon: 0.05, max_n: 2000, refinements: 6 }
    }
}

#[derive(Clone, Debug)]
pub struct BrsConstruction {
    pub region: RegionSet,
    /// Edge witnesses per piece of `region`, in piece order.
    pub edge_witnesses: Vec<Vec<ModuleWitness>>,
    pub tiles_meeting_k: usize,
    pub free_tiles: usize,
    /// Index of the residual piece in `region`, if one was needed.
    pub residual: Option<usize>,
    pub epsilon: f64,
}

/// Short vectors `nα + m` (max-norm at most `eps`) for `1 ≤ n ≤ max_n`.
fn short_vectors(alpha: &[QValue], eps: f64, max_n: i64) -> Vec<ModuleWitness> {
    let a: Vec<f64> = alpha.iter().map(QValue::to_f64).collect();
    let mut out = Vec::new();
    for n in 1..=max_n {
        let m: Vec<i64> = a.iter().map(|x| -(n as f64 * x).round() as i64).collect();
        let size = a.iter().zip(&m).map(|(x, &mi)| (n as f64 * x + mi as f64).abs()).fold(0.0, f64::max);
        if size <= eps && size > 0.0 {
            out.push(ModuleWitness { n, m });
        }
    }
    out
}

fn numeric(w: &ModuleWitness, alpha: &[f64]) -> Vec<f64> {
    alpha.iter().zip(&w.m).map(|(a, &m)| w.n as f64 * a + m as f64).collect()
}

/// `d` independent short vectors with positive-orientation determinant.
fn tile_edges(alpha: &[QValue], eps: f64, max_n: i64) -> Option<Vec<ModuleWitness>> {
    let d = alpha.len();
    let a: Vec<f64> = alpha.iter().map(QValue::to_f64).collect();
    let mut pool = short_vectors(alpha, eps / d as f64, max_n);
    if d == 1 {
        let w = pool.first()?.clone();
        // orient the edge to be positive
        let v = numeric(&w, &a)[0];
        return Some(vec![if v > 0.0 { w } else { ModuleWitness { n: -w.n, m: w.m.iter().map(|x| -x).collect() } }]);
    }
    pool.truncate(40);
    if pool.len() < d {
        return None;
    }
    let mut idx: Vec<usize> = (0..d).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let m = DMatrix::from_fn(d, d, |r, c| numeric(&pool[idx[c]], &a)[r]);
        let det = m.determinant().abs();
        let scale: f64 = (0..d).map(|c| m.column(c).norm()).product();
        // prefer well-conditioned tiles
        let quality = det / scale;
        if quality > 1e-3 && best.as_ref().is_none_or(|(b, _)| quality > *b + 1e-12) {
            best = Some((quality, idx.clone()));
        }
        if !next_combination(&mut idx, pool.len()) {
            break;
        }
    }
    let (_, idx) = best?;
    let mut ws: Vec<ModuleWitness> = idx.iter().map(|&i| pool[i].clone()).collect();
    let m = DMatrix::from_fn(d, d, |r, c| numeric(&ws[c], &a)[r]);
    if m.determinant() < 0.0 {
        ws.swap(0, 1);
    }
    Some(ws)
}

fn bbox_overlap(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> bool {
    (0..a.0.len()).all(|i| a.0[i] <= b.1[i] + GUARD && b.0[i] <= a.1[i] + GUARD)
}

/// Builds a BRS `S` with `K ⊂ S ⊂ U` and `mes S = γ` exactly.
///
/// Every piece of the result is a parallelepiped with edges in `Zα + Z^d`.
/// Containment is checked on closures. In dimension two and up the residual
/// piece is searched among short-vector parallelepipeds and the search may
/// fail with [`RegionError::SearchExhausted`].
pub fn construct_brs_between(
    k: &RegionSet,
    u: &RegionSet,
    gamma: &QValue,
    alpha: &[QValue],
    params: &ConstructParams,
) -> Result<BrsConstruction, RegionError> {
    let d = alpha.len();
    if k.dim() != d || u.dim() != d {
        return Err(RegionError::Dimension("K, U and alpha must share a dimension".into()));
    }
    if k.is_empty() {
        return Err(RegionError::Precondition("K is empty".into()));
    }
    if !u.contains_region(k)? {
        return Err(RegionError::Precondition("K is not contained in U".into()));
    }
    let (mes_k, mes_u) = (k.volume()?, u.volume()?);
    if mes_k.cmp_exact(gamma)? != Ordering::Less || gamma.cmp_exact(&mes_u)? != Ordering::Less {
        return Err(RegionError::Precondition(format!("need mes K < {gamma} < mes U")));
    }
    if integer_coordinates(gamma, alpha).is_none() {
        return Err(RegionError::Precondition(format!(
            "{gamma} is not of the form n0 + n1*alpha1 + ... + nd*alphad"
        )));
    }
    let mut eps = params.epsilon;
    let mut last = RegionError::SearchExhausted("no refinement attempted".into());
    for _ in 0..=params.refinements {
        match attempt(k, u, gamma, alpha, eps, params.max_n) {
            Ok(c) => return Ok(c),
            Err(Attempt::Refine(e)) => last = e,
            Err(Attempt::Fatal(e)) => return Err(e),
        }
        eps /= 2.0;
    }
    Err(last)
}

enum Attempt {
    Refine(RegionError),
    Fatal(RegionError),
}

impl From<RegionError> for Attempt {
    fn from(e: RegionError) -> Self {
        Attempt::Fatal(e)
    }
}

impl From<crate::algebra::AlgebraError> for Attempt {
    fn from(e: crate::algebra::AlgebraError) -> Self {
        Attempt::Fatal(e.into())
    }
}

fn attempt(
    k: &RegionSet,
    u: &RegionSet,
    gamma: &QValue,
    alpha: &[QValue],
    eps: f64,
    max_n: i64,
) -> Result<BrsConstruction, Attempt> {
    let alg = k.algebra();
    let d = alpha.len();
    let a_num: Vec<f64> = alpha.iter().map(QValue::to_f64).collect();
    let edges_w = tile_edges(alpha, eps, max_n)
        .ok_or_else(|| Attempt::Refine(RegionError::SearchExhausted(format!("no short vectors at scale {eps}"))))?;
    let cols: Vec<Vec<QValue>> = edges_w.iter().map(|w| w.evaluate(alpha)).collect();
    let edges = QMatrix::from_columns(alg, &cols)?;
    let tile_vol = edges.det()?.abs()?;
    let anchor = k.pieces()[0].offset().to_vec();
    let tile = Piece::new(anchor.clone(), edges.clone())?;

    // integer tile indices covering the bounding box of U
    let (ulo, uhi) = u.bbox().ok_or_else(|| Attempt::Fatal(RegionError::Precondition("U is empty".into())))?;
    let inv = tile.num_edges().clone().try_inverse().ok_or(Attempt::Fatal(RegionError::Degenerate))?;
    let mut ranges = vec![(i64::MAX, i64::MIN); d];
    for mask in 0..1usize << d {
        let corner: Vec<f64> = (0..d).map(|i| if mask & (1 << i) != 0 { uhi[i] } else { ulo[i] }).collect();
        let rel = nalgebra::DVector::from_fn(d, |i, _| corner[i] - tile.num_offset()[i]);
        let c = &inv * rel;
        for i in 0..d {
            ranges[i].0 = ranges[i].0.min(c[i].floor() as i64 - 1);
            ranges[i].1 = ranges[i].1.max(c[i].ceil() as i64 + 1);
        }
    }
    let count: i64 = ranges.iter().map(|(a, b)| b - a + 1).product();
    if count > 2_000_000 {
        return Err(Attempt::Fatal(RegionError::Precondition(format!("{count} tiles; epsilon too small"))));
    }

    let k_boxes: Vec<_> = k.pieces().iter().map(Piece::bbox).collect();
    let k_center: Vec<f64> = {
        let (lo, hi) = k.bbox().expect("K is non-empty");
        lo.iter().zip(&hi).map(|(a, b)| (a + b) / 2.0).collect()
    };
    let mut meeting: Vec<Piece> = Vec::new();
    let mut free: Vec<(f64, Vec<i64>, Piece)> = Vec::new();
    for idx in integer_box(&ranges) {
        let shift: Vec<QValue> = (0..d)
            .map(|r| (0..d).fold(QValue::zero(alg), |acc, c| acc + cols[c][r].scale_int(idx[c])))
            .collect();
        let t = tile.translated(&shift)?;
        let bb = t.bbox();
        let single = RegionSet::new_unchecked(alg, d, vec![t.clone()])?;
        let inside = u.contains_region(&single)?;
        if k_boxes.iter().any(|kb| bbox_overlap(&bb, kb)) {
            if !inside {
                return Err(Attempt::Refine(RegionError::SearchExhausted(format!(
                    "tiles of scale {eps} around K leave U"
                ))));
            }
            meeting.push(t);
        } else if inside {
            let center: Vec<f64> = bb.0.iter().zip(&bb.1).map(|(a, b)| (a + b) / 2.0).collect();
            let dist = center.iter().zip(&k_center).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            free.push((dist, idx, t));
        }
    }
    free.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mes_a = tile_vol.scale_int(meeting.len() as i64);
    let rest = gamma.checked_sub(&mes_a)?;
    if rest.signum()? == Ordering::Less {
        return Err(Attempt::Refine(RegionError::SearchExhausted(format!(
            "tiles of scale {eps} meeting K already exceed the target measure"
        ))));
    }
    let whole = rest.checked_mul(&tile_vol.inverse()?)?.floor()?;
    let whole: usize = whole
        .try_into()
        .map_err(|_| Attempt::Fatal(RegionError::Precondition("tile count out of range".into())))?;
    let residual = rest.checked_sub(&tile_vol.scale_int(whole as i64))?;
    let needed = whole + usize::from(!residual.is_zero());
    if free.len() < needed {
        return Err(Attempt::Refine(RegionError::SearchExhausted(format!(
            "U has {} free tiles of scale {eps}, {needed} needed",
            free.len()
        ))));
    }

    let mut pieces = meeting.clone();
    let mut witnesses = vec![edges_w.clone(); meeting.len()];
    for (_, _, t) in free.iter().take(whole) {
        pieces.push(t.clone());
        witnesses.push(edges_w.clone());
    }
    let mut residual_index = None;
    if !residual.is_zero() {
        let host = &free[whole].2;
        let (piece, ws) = fit_residual(alpha, &a_num, &residual, host, eps, max_n)?;
        residual_index = Some(pieces.len());
        pieces.push(piece);
        witnesses.push(ws);
    }
    let region = RegionSet::new(alg, d, pieces)?;
    if region.volume()? != *gamma {
        return Err(Attempt::Fatal(RegionError::Precondition("constructed volume differs from the target".into())));
    }
    Ok(BrsConstruction {
        region,
        edge_witnesses: witnesses,
        tiles_meeting_k: meeting.len(),
        free_tiles: whole,
        residual: residual_index,
        epsilon: eps,
    })
}

/// A piece of volume `r` with edges in `Zα + Z^d`, placed inside `host`.
fn fit_residual(
    alpha: &[QValue],
    a_num: &[f64],
    r: &QValue,
    host: &Piece,
    eps: f64,
    max_n: i64,
) -> Result<(Piece, Vec<ModuleWitness>), Attempt> {
    let alg = r.algebra();
    let d = alpha.len();
    if d == 1 {
        let w = module_membership(std::slice::from_ref(r), alpha)
            .ok_or_else(|| Attempt::Fatal(RegionError::Precondition(format!("residual {r} is not in Z*alpha + Z"))))?;
        let edges = QMatrix::from_rows(alg, vec![vec![r.clone()]])?;
        // the host tile has a positive edge, so its offset is its left end
        return Ok((Piece::new(host.offset().to_vec(), edges)?, vec![w]));
    }
    let target = r.to_f64();
    let mut pool = short_vectors(alpha, eps, max_n);
    pool.truncate(24);
    let base = pool.clone();
    for i in 0..base.len() {
        for j in i + 1..base.len() {
            for sign in [1, -1] {
                let w = ModuleWitness {
                    n: base[i].n + sign * base[j].n,
                    m: base[i].m.iter().zip(&base[j].m).map(|(x, y)| x + sign * y).collect(),
                };
                if w.n != 0 || w.m.iter().any(|&x| x != 0) {
                    pool.push(w);
                }
            }
        }
    }
    if pool.len() < d {
        return Err(Attempt::Refine(RegionError::SearchExhausted("residual pool too small".into())));
    }
    let nums: Vec<Vec<f64>> = pool.iter().map(|w| numeric(w, a_num)).collect();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let m = DMatrix::from_fn(d, d, |r, c| nums[idx[c]][r]);
        if (m.determinant().abs() - target).abs() < 1e-9 * (1.0 + target) {
            let cols: Vec<Vec<QValue>> = idx.iter().map(|&i| pool[i].evaluate(alpha)).collect();
            let edges = QMatrix::from_columns(alg, &cols)?;
            if edges.det()?.abs()? == *r {
                if let Some(piece) = place_inside(&edges, host)? {
                    return Ok((piece, idx.iter().map(|&i| pool[i].clone()).collect()));
                }
            }
        }
        if !next_combination(&mut idx, pool.len()) {
            break;
        }
    }
    Err(Attempt::Fatal(RegionError::SearchExhausted(format!(
        "no residual parallelepiped of volume {r} fits in a free tile"
    ))))
}

/// Tries offsets on a grid inside `host` so that the piece spanned by `edges`
/// lies in the closure of `host`.
fn place_inside(edges: &QMatrix, host: &Piece) -> Result<Option<Piece>, RegionError> {
    let alg = edges.algebra();
    let d = edges.nrows();
    let probe = Piece::new(vec![QValue::zero(alg); d], edges.clone())?;
    let corners = probe.corners();
    let (lo, _) = probe.bbox();
    let host_inv = host.num_edges().clone().try_inverse().ok_or(RegionError::Degenerate)?;
    const STEPS: i64 = 8;
    for grid in integer_box(&vec![(0, STEPS); d]) {
        // a point of the host, as a rational combination of its edges
        let u: Vec<QValue> = grid
            .iter()
            .map(|&g| QValue::from_rational(alg, num_rational::BigRational::new(g.into(), STEPS.into())))
            .collect();
        let start = host.edges().mul_vec(&u)?;
        let offset: Vec<QValue> = (0..d)
            .map(|i| {
                let shift = QValue::from_f64(alg, -lo[i]).unwrap_or_else(|_| QValue::zero(alg));
                &(&host.offset()[i] + &start[i]) + &shift
            })
            .collect();
        let off_num: Vec<f64> = offset.iter().map(QValue::to_f64).collect();
        let ok = corners.iter().all(|c| {
            let rel = nalgebra::DVector::from_fn(d, |i, _| c[i] + off_num[i] - host.num_offset()[i]);
            (&host_inv * rel).iter().all(|&t| t >= GUARD && t <= 1.0 - GUARD)
        });
        if ok {
            return Ok(Some(Piece::new(offset, edges.clone())?));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Algebra, AlgebraSpec};

    fn q(alg: &Algebra, s: &str) -> QValue {
        QValue::parse(alg, s).unwrap()
    }

    #[test]
    fn one_dimensional_example() {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let k = RegionSet::interval(&q(&alg, "1/10"), &q(&alg, "2/5")).unwrap();
        let u = RegionSet::interval_left_open(&q(&alg, "0"), &q(&alg, "1")).unwrap();
        let gamma = q(&alg, "w1 - 1");
        let alpha = vec![q(&alg, "w1")];
        let c = construct_brs_between(&k, &u, &gamma, &alpha, &ConstructParams::default()).unwrap();
        assert_eq!(c.region.volume().unwrap(), gamma);
        assert!(u.contains_region(&c.region).unwrap());
        for (p, ws) in c.region.pieces().iter().zip(&c.edge_witnesses) {
            assert_eq!(ws[0].evaluate(&alpha), p.edges().column(0));
        }
        // K is covered
        for x in ["1/10", "1/4", "2/5 - 1/1000000"] {
            assert!(c.region.contains_exact(&[q(&alg, x)]).unwrap(), "{x}");
        }
    }

    #[test]
    fn rejects_bad_measure() {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let k = RegionSet::interval(&q(&alg, "1/10"), &q(&alg, "2/5")).unwrap();
        let u = RegionSet::interval(&q(&alg, "0"), &q(&alg, "1")).unwrap();
        let alpha = vec![q(&alg, "w1")];
        let p = ConstructParams::default();
        assert!(matches!(
            construct_brs_between(&k, &u, &q(&alg, "1/5"), &alpha, &p),
            Err(RegionError::Precondition(_))
        ));
        assert!(matches!(
            construct_brs_between(&k, &u, &q(&alg, "1/2"), &alpha, &p),
            Err(RegionError::Precondition(_))
        ));
    }

    #[test]
    fn two_dimensional_attempt_is_exact_or_reported() {
        let alg = AlgebraSpec::biquadratic(2, 3).unwrap();
        let k = RegionSet::boxed(&[q(&alg, "9/10"), q(&alg, "9/10")], &[q(&alg, "11/10"), q(&alg, "11/10")]).unwrap();
        let u = RegionSet::boxed(&[q(&alg, "0"), q(&alg, "0")], &[q(&alg, "2"), q(&alg, "2")]).unwrap();
        let alpha = vec![q(&alg, "w1"), q(&alg, "w2")];
        let params = ConstructParams { epsilon: 0.3, max_n: 400, refinements: 2 };
        match construct_brs_between(&k, &u, &q(&alg, "w1"), &alpha, &params) {
            Ok(c) => {
                assert_eq!(c.region.volume().unwrap(), q(&alg, "w1"));
                assert!(u.contains_region(&c.region).unwrap());
            }
            Err(RegionError::SearchExhausted(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}
